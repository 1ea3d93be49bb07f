#include "mcip/fo.hpp"

#include <stdexcept>

namespace mcip::fo {

int Vocabulary::find(const std::string& symbol) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].symbol == symbol) return static_cast<int>(i);
    return -1;
}

Structure::Structure(Vocabulary vocab, std::size_t universe_size, int arity_cap)
    : vocab_(std::move(vocab)), n_(universe_size) {
    if (n_ < 1) throw std::invalid_argument("universe size must be >= 1");
    for (const auto& e : vocab_.entries) {
        if (e.arity < 1) throw std::invalid_argument("arity must be >= 1: " + e.symbol);
        if (e.arity > arity_cap)
            throw std::invalid_argument("arity of " + e.symbol + " exceeds cap " +
                                        std::to_string(arity_cap));
        for (const auto& o : vocab_.entries)
            if (&e != &o && e.symbol == o.symbol)
                throw std::invalid_argument("duplicate symbol: " + e.symbol);
    }
    bits_.resize(vocab_.entries.size());
    counts_.assign(vocab_.entries.size(), 0);
    for (std::size_t i = 0; i < vocab_.entries.size(); ++i) {
        std::size_t size = 1;
        for (int j = 0; j < vocab_.entries[i].arity; ++j) size *= n_;
        bits_[i].assign(size, 0);
    }
}

std::size_t Structure::tuple_index(int sym, const std::vector<std::uint64_t>& tuple) const {
    if (sym < 0 || sym >= static_cast<int>(vocab_.entries.size()))
        throw std::out_of_range("unknown relation symbol index");
    if (tuple.size() != static_cast<std::size_t>(vocab_.entries[sym].arity))
        throw std::invalid_argument("tuple length does not match arity of " +
                                    vocab_.entries[sym].symbol);
    std::size_t idx = 0;
    for (auto v : tuple) {
        if (v >= n_) throw std::out_of_range("tuple entry out of universe range");
        idx = idx * n_ + v;
    }
    return idx;
}

void Structure::add_tuple(int sym, const std::vector<std::uint64_t>& tuple) {
    std::size_t idx = tuple_index(sym, tuple);
    if (!bits_[sym][idx]) {
        bits_[sym][idx] = 1;
        ++counts_[sym];
    }
}

bool Structure::membership(int sym, const std::vector<std::uint64_t>& tuple) const {
    return bits_[sym][tuple_index(sym, tuple)] != 0;
}

bool Structure::membership_by_name(const std::string& symbol,
                                   const std::vector<std::uint64_t>& tuple) const {
    int sym = vocab_.find(symbol);
    if (sym < 0) throw std::out_of_range("unknown relation symbol: " + symbol);
    return membership(sym, tuple);
}

std::size_t Structure::size_measure() const {
    std::size_t total = n_ + vocab_.entries.size();
    for (std::size_t i = 0; i < vocab_.entries.size(); ++i)
        total += counts_[i] * static_cast<std::size_t>(vocab_.entries[i].arity);
    return total;
}

int Matrix::add_equal(int v1, int v2) {
    nodes.push_back(Node{Kind::Equal, v1, v2, {}});
    return root = static_cast<int>(nodes.size()) - 1;
}

int Matrix::add_rel(int sym, std::vector<int> vars) {
    nodes.push_back(Node{Kind::Rel, sym, 0, std::move(vars)});
    return root = static_cast<int>(nodes.size()) - 1;
}

int Matrix::add_not(int child) {
    nodes.push_back(Node{Kind::Not, child, 0, {}});
    return root = static_cast<int>(nodes.size()) - 1;
}

int Matrix::add_and(int lhs, int rhs) {
    nodes.push_back(Node{Kind::And, lhs, rhs, {}});
    return root = static_cast<int>(nodes.size()) - 1;
}

int Matrix::add_or(int lhs, int rhs) {
    nodes.push_back(Node{Kind::Or, lhs, rhs, {}});
    return root = static_cast<int>(nodes.size()) - 1;
}

int Matrix::max_var() const {
    int m = 0;
    for (const auto& node : nodes) {
        switch (node.kind) {
        case Kind::Equal:
            m = std::max({m, node.a, node.b});
            break;
        case Kind::Rel:
            for (int v : node.args) m = std::max(m, v);
            break;
        default:
            break;
        }
    }
    return m;
}

namespace {

bool eval_node(const Structure& s, const Matrix& m, int node,
               const std::vector<std::uint64_t>& asg) {
    const auto& nd = m.nodes[node];
    switch (nd.kind) {
    case Matrix::Kind::Equal:
        if (nd.a == nd.b) return true; // x = x needs no lookup; covers ground tautologies
        return asg.at(nd.a - 1) == asg.at(nd.b - 1);
    case Matrix::Kind::Rel: {
        std::vector<std::uint64_t> tuple;
        tuple.reserve(nd.args.size());
        for (int v : nd.args) tuple.push_back(asg.at(v - 1));
        return s.membership(nd.a, tuple);
    }
    case Matrix::Kind::Not:
        return !eval_node(s, m, nd.a, asg);
    case Matrix::Kind::And:
        return eval_node(s, m, nd.a, asg) && eval_node(s, m, nd.b, asg);
    case Matrix::Kind::Or:
        return eval_node(s, m, nd.a, asg) || eval_node(s, m, nd.b, asg);
    }
    throw std::logic_error("unreachable matrix node kind");
}

} // namespace

bool eval_matrix_bool(const Structure& s, const Matrix& m,
                      const std::vector<std::uint64_t>& assignment) {
    if (m.root < 0) throw std::invalid_argument("empty matrix");
    if (m.max_var() > static_cast<int>(assignment.size()))
        throw std::invalid_argument("assignment does not cover all matrix variables");
    return eval_node(s, m, m.root, assignment);
}

} // namespace mcip::fo
