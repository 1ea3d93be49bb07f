#include "mcip/arith.hpp"

#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace mcip::arith {

OperatorSchedule build_schedule(const std::vector<fo::Quantifier>& prefix) {
    OperatorSchedule s;
    int k = static_cast<int>(prefix.size());
    s.ops.reserve(static_cast<std::size_t>(k) * (k + 3) / 2);
    for (int i = 1; i <= k; ++i) {
        s.ops.push_back(Op{prefix[i - 1] == fo::Quantifier::Exists ? OpKind::Exists
                                                                   : OpKind::Forall,
                           i});
        for (int j = 1; j <= i; ++j) s.ops.push_back(Op{OpKind::Reduce, j});
    }
    return s;
}

const ExtElement& Assignment::get(int var) const {
    if (!has(var))
        throw std::invalid_argument("variable " + std::to_string(var) + " is not assigned");
    return vals_[var - 1];
}

ExtElement eq_eval(const ExtContext& ctx, const ExtElement& x, const ExtElement& y) {
    // base-field arguments short-circuit: (a-b)^(q-1) is 0 or 1 by Fermat
    if ((x.c[1] | x.c[2] | x.c[3] | y.c[1] | y.c[2] | y.c[3]) == 0)
        return x.c[0] == y.c[0] ? ctx.one() : ctx.zero();
    ExtElement d = ctx.sub(x, y);
    return ctx.sub(ctx.one(), ctx.pow(d, ctx.q() - 1));
}

ExtElement atom_eval(const fo::Structure& s, const fo::Matrix& m, int node,
                     const Assignment& asg, const ExtContext& ctx) {
    const auto& nd = m.nodes[node];
    if (nd.kind == fo::Matrix::Kind::Equal) {
        if (nd.a == nd.b) return ctx.one();
        return eq_eval(ctx, asg.get(nd.a), asg.get(nd.b));
    }
    if (nd.kind != fo::Matrix::Kind::Rel)
        throw std::invalid_argument("atom_eval requires an Equal or Rel node");

    // distinct variables and, for each, the argument positions it occupies
    std::vector<int> distinct;
    std::vector<int> var_of_pos(nd.args.size());
    for (std::size_t p = 0; p < nd.args.size(); ++p) {
        int v = nd.args[p];
        var_of_pos[p] = v;
        bool seen = false;
        for (int d : distinct) seen = seen || d == v;
        if (!seen) distinct.push_back(v);
    }

    const auto& bits = s.bits(nd.a);
    int arity = s.vocab().entries[nd.a].arity;
    std::size_t n = s.universe_size();

    ExtElement total = ctx.zero();
    std::vector<std::uint64_t> tuple(arity);
    for (std::size_t idx = 0; idx < bits.size(); ++idx) {
        if (!bits[idx]) continue;
        std::size_t rem = idx;
        for (int j = arity - 1; j >= 0; --j) {
            tuple[j] = rem % n;
            rem /= n;
        }
        // repetition pattern: positions sharing a variable must agree
        bool consistent = true;
        for (int v : distinct) {
            std::uint64_t first = 0;
            bool have = false;
            for (std::size_t p = 0; p < tuple.size() && consistent; ++p) {
                if (var_of_pos[p] != v) continue;
                if (!have) {
                    first = tuple[p];
                    have = true;
                } else if (tuple[p] != first) {
                    consistent = false;
                }
            }
        }
        if (!consistent) continue;
        ExtElement term = ctx.one();
        for (int v : distinct) {
            std::uint64_t entry = 0;
            for (std::size_t p = 0; p < tuple.size(); ++p)
                if (var_of_pos[p] == v) {
                    entry = tuple[p];
                    break;
                }
            term = ctx.mul(term, eq_eval(ctx, asg.get(v), ctx.embed(entry)));
        }
        total = ctx.add(total, term);
    }
    return total;
}

namespace {

ExtElement eval_node_ext(const fo::Structure& s, const fo::Matrix& m, int node,
                         const Assignment& asg, const ExtContext& ctx) {
    const auto& nd = m.nodes[node];
    switch (nd.kind) {
    case fo::Matrix::Kind::Equal:
    case fo::Matrix::Kind::Rel:
        return atom_eval(s, m, node, asg, ctx);
    case fo::Matrix::Kind::Not:
        return ctx.sub(ctx.one(), eval_node_ext(s, m, nd.a, asg, ctx));
    case fo::Matrix::Kind::And:
        return ctx.mul(eval_node_ext(s, m, nd.a, asg, ctx),
                       eval_node_ext(s, m, nd.b, asg, ctx));
    case fo::Matrix::Kind::Or: {
        ExtElement p = eval_node_ext(s, m, nd.a, asg, ctx);
        ExtElement q = eval_node_ext(s, m, nd.b, asg, ctx);
        return ctx.sub(ctx.add(p, q), ctx.mul(p, q));
    }
    }
    throw std::logic_error("unreachable matrix node kind");
}

} // namespace

ExtElement matrix_eval(const fo::Structure& s, const fo::Matrix& m, const Assignment& asg,
                       const ExtContext& ctx) {
    if (m.root < 0) throw std::invalid_argument("empty matrix");
    return eval_node_ext(s, m, m.root, asg, ctx);
}

ExtElement UnivariatePoly::eval(const ExtContext& ctx, const ExtElement& x) const {
    ExtElement acc = ctx.zero();
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        acc = ctx.add(ctx.mul(acc, x), *it);
    return acc;
}

void UnivariatePoly::trim() {
    while (coeffs.size() > 1 && coeffs.back().is_zero()) coeffs.pop_back();
    if (coeffs.empty()) coeffs.push_back(ExtElement{});
}

std::string UnivariatePoly::to_string() const {
    std::ostringstream os;
    os << "var=" << var << "; deg=" << degree() << "; coeffs=";
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i) os << '|';
        os << coeffs[i].to_string();
    }
    return os.str();
}

UnivariatePoly UnivariatePoly::from_string(const std::string& text) {
    UnivariatePoly p;
    auto need = [&](bool ok) {
        if (!ok) throw std::invalid_argument("bad polynomial literal: " + text);
    };
    std::size_t v = text.find("var=");
    std::size_t d = text.find("; deg=");
    std::size_t c = text.find("; coeffs=");
    need(v == 0 && d != std::string::npos && c != std::string::npos && d < c);
    p.var = std::stoi(text.substr(4, d - 4));
    int deg = std::stoi(text.substr(d + 6, c - d - 6));
    std::string rest = text.substr(c + 9);
    std::istringstream is(rest);
    std::string tok;
    while (std::getline(is, tok, '|')) p.coeffs.push_back(ExtElement::from_string(tok));
    need(static_cast<int>(p.coeffs.size()) == deg + 1);
    return p;
}

namespace {

// Batch inversion (Montgomery trick): one field inversion for the lot.
// Throws std::invalid_argument if any input is zero.
std::vector<ExtElement> batch_inverse(const ExtContext& ctx, const std::vector<ExtElement>& xs) {
    std::vector<ExtElement> prefix(xs.size());
    ExtElement acc = ctx.one();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].is_zero()) throw std::invalid_argument("duplicate abscissa in interpolation");
        prefix[i] = acc;
        acc = ctx.mul(acc, xs[i]);
    }
    ExtElement inv_all = ctx.inv(acc);
    std::vector<ExtElement> out(xs.size());
    for (std::size_t i = xs.size(); i-- > 0;) {
        out[i] = ctx.mul(inv_all, prefix[i]);
        inv_all = ctx.mul(inv_all, xs[i]);
    }
    return out;
}

// Newton divided differences. If inv_diff is non-null it holds precomputed
// inverses of (x_i - x_{i-j}); otherwise they are batch-inverted per level.
// Stops early once a whole difference level vanishes (all higher levels are
// then zero too).
UnivariatePoly newton_interpolate(const ExtContext& ctx, const std::vector<ExtElement>& xs,
                                  std::vector<ExtElement> ys,
                                  const std::vector<std::vector<ExtElement>>* inv_diff, int var) {
    std::size_t m = xs.size();
    std::size_t top = m;
    for (std::size_t j = 1; j < m; ++j) {
        std::vector<ExtElement> level_inv;
        if (inv_diff == nullptr) {
            std::vector<ExtElement> diffs;
            diffs.reserve(m - j);
            for (std::size_t i = j; i < m; ++i) diffs.push_back(ctx.sub(xs[i], xs[i - j]));
            level_inv = batch_inverse(ctx, diffs);
        }
        bool all_zero = true;
        for (std::size_t i = m - 1; i >= j; --i) {
            const ExtElement& inv = inv_diff ? (*inv_diff)[j - 1][i] : level_inv[i - j];
            ys[i] = ctx.mul(ctx.sub(ys[i], ys[i - 1]), inv);
            all_zero = all_zero && ys[i].is_zero();
        }
        if (all_zero) {
            top = j;
            break;
        }
    }
    // drop trailing zero Newton coefficients (true degree is usually far
    // below the point count)
    while (top > 1 && ys[top - 1].is_zero()) --top;
    // expand Newton form to the monomial basis
    UnivariatePoly p;
    p.var = var;
    p.coeffs.assign(1, ys[top - 1]);
    for (std::size_t i = top - 1; i-- > 0;) {
        // p = p * (X - xs[i]) + ys[i]
        p.coeffs.push_back(ExtElement{});
        for (std::size_t c = p.coeffs.size(); c-- > 1;) p.coeffs[c] = p.coeffs[c - 1];
        p.coeffs[0] = ExtElement{};
        ExtElement neg_x = ctx.neg(xs[i]);
        for (std::size_t c = 0; c + 1 < p.coeffs.size(); ++c)
            p.coeffs[c] = ctx.add(p.coeffs[c], ctx.mul(p.coeffs[c + 1], neg_x));
        p.coeffs[0] = ctx.add(p.coeffs[0], ys[i]);
    }
    p.trim();
    return p;
}

} // namespace

UnivariatePoly interpolate(const ExtContext& ctx,
                           const std::vector<std::pair<ExtElement, ExtElement>>& points,
                           int var) {
    if (points.empty()) throw std::invalid_argument("interpolation needs at least one point");
    std::size_t m = points.size();
    std::vector<ExtElement> xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = points[i].first;
        ys[i] = points[i].second;
    }
    // duplicate abscissae must be rejected even when the early-exit in the
    // divided-difference pass would never reach the offending pair
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (xs[i] == xs[j]) throw std::invalid_argument("duplicate abscissa in interpolation");
    return newton_interpolate(ctx, xs, std::move(ys), nullptr, var);
}

ExtElement op_apply(const ExtContext& ctx, const Op& op, const UnivariatePoly& S,
                    const ExtElement* current, std::size_t universe_size) {
    switch (op.kind) {
    case OpKind::Exists: {
        ExtElement prod = ctx.one();
        for (std::uint64_t z = 0; z < universe_size; ++z)
            prod = ctx.mul(prod, ctx.sub(ctx.one(), S.eval(ctx, ctx.embed(z))));
        return ctx.sub(ctx.one(), prod);
    }
    case OpKind::Forall: {
        ExtElement prod = ctx.one();
        for (std::uint64_t z = 0; z < universe_size; ++z)
            prod = ctx.mul(prod, S.eval(ctx, ctx.embed(z)));
        return prod;
    }
    case OpKind::Reduce: {
        if (current == nullptr)
            throw std::invalid_argument("Reduce requires the operated variable's current value");
        ExtElement sum = ctx.zero();
        for (std::uint64_t z = 0; z < universe_size; ++z) {
            ExtElement w = eq_eval(ctx, *current, ctx.embed(z));
            sum = ctx.add(sum, ctx.mul(w, S.eval(ctx, ctx.embed(z))));
        }
        return sum;
    }
    }
    throw std::logic_error("unreachable operator kind");
}

// Per-context interpolation scaffolding: the fixed q^2+1 abscissae and the
// inverse difference tables, shared process-wide per (q, irr).
struct ChainEvaluator::InterpTables {
    std::vector<ExtElement> abscissae;
    // inverse-difference tables are only materialized for small point counts
    // (quadratic memory); empty means the per-level fallback is used
    std::vector<std::vector<ExtElement>> inv_diff;
};

namespace {

// Per-variable degree bound of the arithmetized matrix: q-1 per atom a
// variable occurs in, summed through And/Or (P*Q and P+Q-PQ), unchanged by
// Not. Capped so the bounds stay small.
void matrix_deg_bounds(const fo::Matrix& m, int node, std::uint64_t per_var, std::size_t cap,
                       std::vector<std::size_t>& out) {
    const auto& nd = m.nodes[node];
    auto bump = [&](int v) {
        if (v >= 1 && v <= static_cast<int>(out.size()))
            out[v - 1] = std::min(cap, out[v - 1] + per_var);
    };
    switch (nd.kind) {
    case fo::Matrix::Kind::Equal:
        if (nd.a != nd.b) {
            bump(nd.a);
            bump(nd.b);
        }
        return;
    case fo::Matrix::Kind::Rel: {
        for (std::size_t p = 0; p < nd.args.size(); ++p) {
            bool first = true;
            for (std::size_t r = 0; r < p; ++r)
                if (nd.args[r] == nd.args[p]) first = false;
            if (first) bump(nd.args[p]);
        }
        return;
    }
    case fo::Matrix::Kind::Not: matrix_deg_bounds(m, nd.a, per_var, cap, out); return;
    case fo::Matrix::Kind::And:
    case fo::Matrix::Kind::Or:
        matrix_deg_bounds(m, nd.a, per_var, cap, out);
        matrix_deg_bounds(m, nd.b, per_var, cap, out);
        return;
    }
}

} // namespace

ChainEvaluator::ChainEvaluator(const fo::Instance& inst, const ExtContext& ctx,
                               const OperatorSchedule& schedule, bool use_cache)
    : inst_(inst), ctx_(ctx), schedule_(schedule), use_cache_(use_cache) {
    std::size_t T = schedule_.ops.size();
    assigned_vars_at_.resize(T + 1);
    std::vector<int> assigned;
    for (std::size_t t = 0; t <= T; ++t) {
        assigned_vars_at_[t] = assigned;
        if (t < T && schedule_.ops[t].kind != OpKind::Reduce)
            assigned.push_back(schedule_.ops[t].var);
    }

    // static degree bounds per tower position: quantifying one variable
    // multiplies the others' degrees by the universe size (product of n
    // substituted copies); Reduce pins the operated variable at q-1
    std::size_t n = inst_.structure.universe_size();
    std::size_t k = static_cast<std::size_t>(inst_.k());
    std::size_t cap = ctx_.q() * ctx_.q() + 1;
    deg_bound_.assign(T + 1, std::vector<std::size_t>(k, 0));
    if (inst_.formula.matrix.root >= 0)
        matrix_deg_bounds(inst_.formula.matrix, inst_.formula.matrix.root, ctx_.q() - 1, cap,
                          deg_bound_[T]);
    for (std::size_t t = T; t-- > 0;) {
        deg_bound_[t] = deg_bound_[t + 1];
        const Op& op = schedule_.ops[t];
        if (op.kind == OpKind::Reduce) {
            deg_bound_[t][op.var - 1] = ctx_.q() - 1;
        } else {
            deg_bound_[t][op.var - 1] = 0;
            for (std::size_t v = 0; v < k; ++v)
                if (v != static_cast<std::size_t>(op.var - 1))
                    deg_bound_[t][v] = std::min(cap, deg_bound_[t][v] * n);
        }
    }

    // decode every Rel atom's consistent tuples once
    const fo::Matrix& mat = inst_.formula.matrix;
    prepared_.resize(mat.nodes.size());
    for (std::size_t node = 0; node < mat.nodes.size(); ++node) {
        const auto& nd = mat.nodes[node];
        PreparedAtom& pa = prepared_[node];
        if (nd.kind == fo::Matrix::Kind::Equal) {
            pa.a = nd.a;
            pa.b = nd.b;
            continue;
        }
        if (nd.kind != fo::Matrix::Kind::Rel) continue;
        pa.is_rel = true;
        for (int v : nd.args) {
            bool seen = false;
            for (int d : pa.vars) seen = seen || d == v;
            if (!seen) pa.vars.push_back(v);
        }
        const auto& bits = inst_.structure.bits(nd.a);
        int arity = inst_.structure.vocab().entries[nd.a].arity;
        std::vector<std::uint64_t> tuple(arity);
        for (std::size_t idx = 0; idx < bits.size(); ++idx) {
            if (!bits[idx]) continue;
            std::size_t rem = idx;
            for (int j = arity - 1; j >= 0; --j) {
                tuple[j] = rem % n;
                rem /= n;
            }
            bool consistent = true;
            std::vector<std::uint64_t> entries(pa.vars.size());
            for (std::size_t d = 0; d < pa.vars.size() && consistent; ++d) {
                bool have = false;
                for (std::size_t p = 0; p < tuple.size() && consistent; ++p) {
                    if (nd.args[p] != pa.vars[d]) continue;
                    if (!have) {
                        entries[d] = tuple[p];
                        have = true;
                    } else if (tuple[p] != entries[d]) {
                        consistent = false;
                    }
                }
            }
            if (consistent) pa.tuples.push_back(std::move(entries));
        }
    }

    // dense cache over universe-valued assignments, when it fits
    if (use_cache_) {
        std::size_t stride = 1;
        bool fits = true;
        for (std::size_t v = 0; v < k && fits; ++v) {
            if (stride > (std::size_t{1} << 18) / std::max<std::size_t>(n, 1))
                fits = false;
            else
                stride *= n;
        }
        if (fits && stride * (T + 1) <= (std::size_t{1} << 18)) {
            dense_ok_ = true;
            dense_stride_ = stride;
            dense_vals_.assign(stride * (T + 1), ExtElement{});
            dense_set_.assign(stride * (T + 1), 0);
        }
    }

    // shared interpolation tables for this (q, irr)
    static std::mutex mu;
    static std::map<std::pair<std::uint64_t, std::array<std::uint64_t, 5>>,
                    std::shared_ptr<const InterpTables>>
        table_cache;
    std::pair<std::uint64_t, std::array<std::uint64_t, 5>> key{ctx.q(), ctx.irr().coeffs};
    {
        std::scoped_lock lock(mu);
        auto it = table_cache.find(key);
        if (it != table_cache.end()) {
            tables_ = it->second;
            return;
        }
    }
    auto tables = std::make_shared<InterpTables>();
    std::size_t m = ctx.q() * ctx.q() + 1;
    tables->abscissae.reserve(m);
    for (std::size_t i = 0; i < m; ++i) tables->abscissae.push_back(ctx.element_at(i));
    if (m <= 512) {
        std::vector<ExtElement> diffs;
        diffs.reserve(m * (m - 1) / 2);
        for (std::size_t j = 1; j < m; ++j)
            for (std::size_t i = j; i < m; ++i)
                diffs.push_back(ctx.sub(tables->abscissae[i], tables->abscissae[i - j]));
        std::vector<ExtElement> invs = batch_inverse(ctx, diffs);
        tables->inv_diff.resize(m - 1);
        std::size_t pos = 0;
        for (std::size_t j = 1; j < m; ++j) {
            tables->inv_diff[j - 1].assign(m, ExtElement{});
            for (std::size_t i = j; i < m; ++i) tables->inv_diff[j - 1][i] = invs[pos++];
        }
    }
    {
        std::scoped_lock lock(mu);
        table_cache.emplace(key, tables);
        tables_ = table_cache[key];
    }
}

bool ChainEvaluator::dense_index(std::size_t t, const Assignment& asg, std::size_t& out) const {
    if (!dense_ok_) return false;
    std::size_t n = inst_.structure.universe_size();
    std::size_t idx = 0;
    std::size_t mult = 1;
    for (int v : assigned_vars_at_[t]) {
        const ExtElement& e = asg.get(v);
        if ((e.c[1] | e.c[2] | e.c[3]) != 0 || e.c[0] >= n) return false;
        idx += e.c[0] * mult;
        mult *= n;
    }
    out = t * dense_stride_ + idx;
    return true;
}

const std::vector<ExtElement>& ChainEvaluator::reduce_weights(const ExtElement& a) {
    std::uint64_t key = a.c[0] | (a.c[1] << 16) | (a.c[2] << 32) | (a.c[3] << 48);
    auto it = weight_memo_.find(key);
    if (it != weight_memo_.end()) return it->second;
    std::size_t n = inst_.structure.universe_size();
    std::vector<ExtElement> w(n);
    for (std::size_t z = 0; z < n; ++z) w[z] = eq_eval(ctx_, a, ctx_.embed(z));
    return weight_memo_.emplace(key, std::move(w)).first->second;
}

std::size_t ChainEvaluator::KeyHash::operator()(const std::vector<std::uint64_t>& key) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto v : key) {
        h ^= v;
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
}

ExtElement ChainEvaluator::eval_matrix_prepared(int node, const Assignment& asg) {
    const auto& nd = inst_.formula.matrix.nodes[node];
    const PreparedAtom& pa = prepared_[node];
    switch (nd.kind) {
    case fo::Matrix::Kind::Equal:
        if (pa.a == pa.b) return ctx_.one();
        return eq_eval(ctx_, asg.get(pa.a), asg.get(pa.b));
    case fo::Matrix::Kind::Rel: {
        ExtElement total = ctx_.zero();
        for (const auto& entries : pa.tuples) {
            ExtElement term = ctx_.one();
            bool zero = false;
            for (std::size_t d = 0; d < pa.vars.size() && !zero; ++d) {
                const ExtElement& v = asg.get(pa.vars[d]);
                if ((v.c[1] | v.c[2] | v.c[3]) == 0) {
                    if (v.c[0] != entries[d]) zero = true;
                } else {
                    term = ctx_.mul(term, reduce_weights(v)[entries[d]]);
                }
            }
            if (!zero) total = ctx_.add(total, term);
        }
        return total;
    }
    case fo::Matrix::Kind::Not:
        return ctx_.sub(ctx_.one(), eval_matrix_prepared(nd.a, asg));
    case fo::Matrix::Kind::And:
        return ctx_.mul(eval_matrix_prepared(nd.a, asg), eval_matrix_prepared(nd.b, asg));
    case fo::Matrix::Kind::Or: {
        ExtElement p = eval_matrix_prepared(nd.a, asg);
        ExtElement q = eval_matrix_prepared(nd.b, asg);
        return ctx_.sub(ctx_.add(p, q), ctx_.mul(p, q));
    }
    }
    throw std::logic_error("unreachable matrix node kind");
}

ExtElement ChainEvaluator::eval_uncached(std::size_t t, Assignment& asg) {
    std::size_t T = schedule_.ops.size();
    if (t == T) {
        if (inst_.formula.matrix.root < 0) throw std::invalid_argument("empty matrix");
        return eval_matrix_prepared(inst_.formula.matrix.root, asg);
    }
    const Op& op = schedule_.ops[t];
    std::size_t n = inst_.structure.universe_size();
    switch (op.kind) {
    case OpKind::Exists: {
        ExtElement prod = ctx_.one();
        for (std::uint64_t z = 0; z < n; ++z) {
            asg.set(op.var, ctx_.embed(z));
            prod = ctx_.mul(prod, ctx_.sub(ctx_.one(), chain_eval(t + 1, asg)));
        }
        asg.unset(op.var);
        return ctx_.sub(ctx_.one(), prod);
    }
    case OpKind::Forall: {
        ExtElement prod = ctx_.one();
        for (std::uint64_t z = 0; z < n; ++z) {
            asg.set(op.var, ctx_.embed(z));
            prod = ctx_.mul(prod, chain_eval(t + 1, asg));
        }
        asg.unset(op.var);
        return prod;
    }
    case OpKind::Reduce: {
        ExtElement a = asg.get(op.var);
        if ((a.c[1] | a.c[2] | a.c[3]) == 0) {
            // base-field point: the Eq weights collapse to an indicator
            if (a.c[0] >= n) return ctx_.zero();
            asg.set(op.var, ctx_.embed(a.c[0]));
            ExtElement r = chain_eval(t + 1, asg);
            asg.set(op.var, a);
            return r;
        }
        const std::vector<ExtElement>& w = reduce_weights(a);
        ExtElement sum = ctx_.zero();
        for (std::uint64_t z = 0; z < n; ++z) {
            if (w[z].is_zero()) continue;
            asg.set(op.var, ctx_.embed(z));
            sum = ctx_.add(sum, ctx_.mul(w[z], chain_eval(t + 1, asg)));
        }
        asg.set(op.var, a);
        return sum;
    }
    }
    throw std::logic_error("unreachable operator kind");
}

ExtElement ChainEvaluator::chain_eval(std::size_t t, Assignment& asg) {
    if (t > schedule_.ops.size()) throw std::out_of_range("tower position out of range");
    for (int v : assigned_vars_at_[t])
        if (!asg.has(v))
            throw std::invalid_argument("variable " + std::to_string(v) +
                                        " must be assigned at position " + std::to_string(t));
    if (!use_cache_) return eval_uncached(t, asg);

    std::size_t di = 0;
    if (dense_index(t, asg, di)) {
        if (dense_set_[di]) return dense_vals_[di];
        ExtElement result = eval_uncached(t, asg);
        dense_vals_[di] = result;
        dense_set_[di] = 1;
        return result;
    }

    std::vector<std::uint64_t> key;
    key.reserve(1 + assigned_vars_at_[t].size() * 4);
    key.push_back(t);
    for (int v : assigned_vars_at_[t])
        for (auto c : asg.get(v).c) key.push_back(c);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    ExtElement result = eval_uncached(t, asg);
    if (cache_.size() > (1u << 22)) cache_.clear(); // bounded memory
    cache_.emplace(std::move(key), result);
    return result;
}

std::size_t ChainEvaluator::restriction_point_count(std::size_t t, int var) const {
    if (t >= deg_bound_.size() || var < 1 || var > inst_.k())
        throw std::out_of_range("restriction position or variable out of range");
    std::size_t cap = ctx_.q() * ctx_.q() + 1;
    return std::min(cap, deg_bound_[t][var - 1] + 1);
}

UnivariatePoly ChainEvaluator::restrict_univariate(std::size_t t, Assignment& asg, int var,
                                                   std::size_t min_points) {
    std::size_t cap = ctx_.q() * ctx_.q() + 1;
    std::size_t m = std::min(cap, std::max(restriction_point_count(t, var), min_points));
    std::vector<ExtElement> xs(tables_->abscissae.begin(), tables_->abscissae.begin() + m);
    std::vector<ExtElement> ys(m);
    bool had = asg.has(var);
    ExtElement saved = had ? asg.get(var) : ExtElement{};
    for (std::size_t i = 0; i < m; ++i) {
        asg.set(var, xs[i]);
        ys[i] = chain_eval(t, asg);
    }
    if (had)
        asg.set(var, saved);
    else
        asg.unset(var);
    UnivariatePoly p = newton_interpolate(
        ctx_, xs, std::move(ys), tables_->inv_diff.empty() ? nullptr : &tables_->inv_diff, var);
    if (p.degree() > static_cast<int>(ctx_.q() * ctx_.q()))
        throw std::logic_error("prover restriction exceeds the q^2 degree bound");
    return p;
}

} // namespace mcip::arith
