#include "mcip/oracle.hpp"

#include <stdexcept>

namespace mcip::oracle {

namespace {

bool check_from(const fo::Instance& inst, std::size_t depth, std::vector<std::uint64_t>& asg) {
    const auto& prefix = inst.formula.prefix;
    if (depth == prefix.size())
        return fo::eval_matrix_bool(inst.structure, inst.formula.matrix, asg);
    std::size_t n = inst.structure.universe_size();
    bool universal = prefix[depth] == fo::Quantifier::Forall;
    for (std::uint64_t v = 0; v < n; ++v) {
        asg[depth] = v;
        bool sub = check_from(inst, depth + 1, asg);
        if (universal && !sub) return false;
        if (!universal && sub) return true;
    }
    return universal;
}

} // namespace

bool model_check(const fo::Instance& inst) {
    if (inst.formula.matrix.max_var() > inst.k())
        throw std::invalid_argument("matrix references a variable outside the prefix");
    std::vector<std::uint64_t> asg(inst.formula.prefix.size(), 0);
    return check_from(inst, 0, asg);
}

} // namespace mcip::oracle
