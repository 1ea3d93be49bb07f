#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mcip/field.hpp"
#include "mcip/fo.hpp"

namespace mcip::arith {

using field::ExtContext;
using field::ExtElement;

enum class OpKind { Exists, Forall, Reduce };

struct Op {
    OpKind kind;
    int var; // 1..k

    bool operator==(const Op& o) const { return kind == o.kind && var == o.var; }
};

/// The interleaved quantifier/degree-reduction operator list: for each
/// quantifier position i = 1..k in prefix order, the quantifier operator for
/// variable i followed by Reduce(1), ..., Reduce(i). Length (k^2+3k)/2.
struct OperatorSchedule {
    std::vector<Op> ops;

    std::size_t length() const { return ops.size(); }
};

OperatorSchedule build_schedule(const std::vector<fo::Quantifier>& prefix);

/// Partial assignment of extension-field values to variables 1..k.
class Assignment {
public:
    explicit Assignment(int k) : vals_(k), set_(k, 0) {}

    void set(int var, const ExtElement& v) {
        vals_.at(var - 1) = v;
        set_.at(var - 1) = 1;
    }
    void unset(int var) { set_.at(var - 1) = 0; }
    bool has(int var) const { return var >= 1 && var <= (int)set_.size() && set_[var - 1]; }
    const ExtElement& get(int var) const;
    int capacity() const { return static_cast<int>(vals_.size()); }

private:
    std::vector<ExtElement> vals_;
    std::vector<std::uint8_t> set_;
};

/// Eq(x, y) = 1 - (x - y)^(q-1): 1 if x == y, 0 on distinct base-field
/// points, something else on general extension elements.
ExtElement eq_eval(const ExtContext& ctx, const ExtElement& x, const ExtElement& y);

/// Polynomial value of one atom. Rel atoms sum over relation tuples
/// consistent with the atom's variable-repetition pattern, one Eq factor per
/// distinct variable position, so the degree per variable stays q-1.
ExtElement atom_eval(const fo::Structure& s, const fo::Matrix& m, int node,
                     const Assignment& asg, const ExtContext& ctx);

/// Value of the arithmetized matrix polynomial at a point (AND -> product,
/// OR -> P+Q-PQ, NOT -> 1-P).
ExtElement matrix_eval(const fo::Structure& s, const fo::Matrix& m, const Assignment& asg,
                       const ExtContext& ctx);

/// Univariate polynomial over GF(q^4), lowest degree first, trimmed.
struct UnivariatePoly {
    int var = 0;
    std::vector<ExtElement> coeffs; // never empty; zero poly is {0}

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    ExtElement eval(const ExtContext& ctx, const ExtElement& x) const;
    void trim();

    bool operator==(const UnivariatePoly& o) const { return var == o.var && coeffs == o.coeffs; }

    std::string to_string() const; // "var=<i>; deg=<d>; coeffs=<c0|c1|...|cd>"
    static UnivariatePoly from_string(const std::string& text);
};

/// Unique polynomial of degree < points.size() through all points.
/// Throws std::invalid_argument on duplicate abscissae.
UnivariatePoly interpolate(const ExtContext& ctx,
                           const std::vector<std::pair<ExtElement, ExtElement>>& points,
                           int var = 0);

/// Applies one schedule operator to a univariate message:
///   Exists -> 1 - prod_z (1 - S(z)),  Forall -> prod_z S(z),
///   Reduce -> sum_z Eq(current, z) * S(z), all over z in {0,...,u}.
ExtElement op_apply(const ExtContext& ctx, const Op& op, const UnivariatePoly& S,
                    const ExtElement* current, std::size_t universe_size);

/// Evaluator for the polynomial tower P_0..P_T defined by the schedule.
/// chain_eval(t, asg) computes P_t at asg by recursion; memoization on
/// (t, assigned values) keeps desk-scale runs fast, and can be switched off
/// to get the plain trusted recursion.
class ChainEvaluator {
public:
    ChainEvaluator(const fo::Instance& inst, const ExtContext& ctx,
                   const OperatorSchedule& schedule, bool use_cache = true);

    /// P_t evaluated at asg; asg must assign exactly the variables whose
    /// quantifier operator occurs before position t.
    ExtElement chain_eval(std::size_t t, Assignment& asg);

    /// The exact univariate restriction P_t(..., X_var) of the tower member
    /// at position t, computed by evaluation at the first
    /// restriction_point_count(t, var) elements of the fixed enumeration of
    /// GF(q^4) (never more than q^2+1) and interpolation. min_points forces a
    /// larger evaluation set when the caller needs specific abscissae
    /// covered. Aborts (throws std::logic_error) if the result exceeds
    /// degree q^2.
    UnivariatePoly restrict_univariate(std::size_t t, Assignment& asg, int var,
                                       std::size_t min_points = 1);

    /// Static degree bound for var in P_t plus one, capped at q^2+1: the
    /// number of evaluation points that pins down the restriction.
    std::size_t restriction_point_count(std::size_t t, int var) const;

    const ExtContext& ctx() const { return ctx_; }
    const OperatorSchedule& schedule() const { return schedule_; }
    std::size_t rounds() const { return schedule_.ops.size(); }

private:
    ExtElement eval_uncached(std::size_t t, Assignment& asg);

    const fo::Instance& inst_;
    const ExtContext& ctx_;
    OperatorSchedule schedule_;
    bool use_cache_;
    std::vector<std::vector<int>> assigned_vars_at_; // per position t
    std::vector<std::vector<std::size_t>> deg_bound_; // per position t, per var
    struct KeyHash {
        std::size_t operator()(const std::vector<std::uint64_t>& key) const;
    };
    std::unordered_map<std::vector<std::uint64_t>, ExtElement, KeyHash> cache_;

    // dense cache for states whose assigned values are all embedded universe
    // points -- the bulk of the recursion's repeated work
    bool dense_ok_ = false;
    std::size_t dense_stride_ = 0; // n^k
    std::vector<ExtElement> dense_vals_;
    std::vector<std::uint8_t> dense_set_;
    bool dense_index(std::size_t t, const Assignment& asg, std::size_t& out) const;

    // Reduce weights Eq(a, z) per distinct non-embedded a, reused across
    // abscissae and rounds
    std::unordered_map<std::uint64_t, std::vector<ExtElement>> weight_memo_;
    const std::vector<ExtElement>& reduce_weights(const ExtElement& a);

    // per-node atom data decoded once: distinct variables and the matching
    // relation tuples, so leaf evaluation is allocation-free
    struct PreparedAtom {
        bool is_rel = false;
        int a = 0, b = 0;                              // Equal operands
        std::vector<int> vars;                         // distinct Rel variables
        std::vector<std::vector<std::uint64_t>> tuples; // entries aligned with vars
    };
    std::vector<PreparedAtom> prepared_;
    ExtElement eval_matrix_prepared(int node, const Assignment& asg);

    // interpolation scaffolding for the fixed abscissae (shared per context)
    struct InterpTables;
    std::shared_ptr<const InterpTables> tables_;
};

} // namespace mcip::arith
