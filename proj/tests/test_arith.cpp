#include <doctest.h>

#include <vector>

#include "mcip/arith.hpp"
#include "mcip/oracle.hpp"
#include "mcip/rng.hpp"

using namespace mcip;
using arith::Assignment;
using arith::ChainEvaluator;
using arith::Op;
using arith::OpKind;
using arith::UnivariatePoly;
using field::ExtContext;
using field::ExtElement;
using field::PrimeModulus;

namespace {

ExtContext make_ctx(std::uint64_t q, std::uint64_t seed = 1) {
    PrimeModulus mod(q);
    Rng rng(seed);
    return ExtContext(mod, field::find_irreducible(mod, rng));
}

ExtElement random_elt(const ExtContext& ctx, Rng& rng) {
    return ctx.element_at(rng.uniform(ctx.q() * ctx.q() * ctx.q() * ctx.q()));
}

fo::Instance edge_instance(std::size_t n, std::vector<std::pair<int, int>> edges,
                           std::vector<fo::Quantifier> prefix, fo::Matrix matrix) {
    fo::Structure s(fo::Vocabulary{{{"E", 2}}}, n);
    for (auto [a, b] : edges) s.add_tuple(0, {std::uint64_t(a), std::uint64_t(b)});
    return fo::Instance{std::move(s), fo::PNFFormula{std::move(prefix), {}, std::move(matrix)}};
}

} // namespace

TEST_CASE("eq_eval") {
    ExtContext ctx = make_ctx(5);
    CHECK(arith::eq_eval(ctx, ctx.embed(2), ctx.embed(2)) == ctx.one());
    CHECK(arith::eq_eval(ctx, ctx.embed(1), ctx.embed(3)) == ctx.zero()); // 1-(-2)^4 = 0 mod 5
    Rng rng(2);
    for (int i = 0; i < 40; ++i) {
        ExtElement theta = random_elt(ctx, rng);
        CHECK(arith::eq_eval(ctx, theta, theta) == ctx.one());
        // the base-field shortcut must agree with the defining formula
        ExtElement a = ctx.embed(rng.uniform(5)), b = ctx.embed(rng.uniform(5));
        ExtElement direct = ctx.sub(ctx.one(), ctx.pow(ctx.sub(a, b), ctx.q() - 1));
        CHECK(arith::eq_eval(ctx, a, b) == direct);
    }
}

TEST_CASE("atom_eval") {
    ExtContext ctx = make_ctx(5);
    fo::Structure s(fo::Vocabulary{{{"E", 2}}}, 2);
    s.add_tuple(0, {0, 1});
    fo::Matrix m;
    int exy = m.add_rel(0, {1, 2});
    int exx = m.add_rel(0, {1, 1});
    m.root = exy;

    Assignment asg(2);
    asg.set(1, ctx.embed(0));
    asg.set(2, ctx.embed(1));
    CHECK(arith::atom_eval(s, m, exy, asg, ctx) == ctx.one());

    // E(x,x): no diagonal tuple survives the repetition pattern
    for (std::uint64_t v = 0; v < 2; ++v) {
        asg.set(1, ctx.embed(v));
        CHECK(arith::atom_eval(s, m, exx, asg, ctx) == ctx.zero());
    }

    fo::Structure empty(fo::Vocabulary{{{"E", 2}}}, 2);
    asg.set(1, ctx.embed(0));
    asg.set(2, ctx.embed(1));
    CHECK(arith::atom_eval(empty, m, exy, asg, ctx) == ctx.zero());
}

TEST_CASE("repeated variables keep the degree at q-1") {
    // E(x,x) over the full relation: the restriction to x is a polynomial of
    // degree q-1, not 2(q-1)
    ExtContext ctx = make_ctx(5);
    fo::Structure s(fo::Vocabulary{{{"E", 2}}}, 3);
    for (std::uint64_t a = 0; a < 3; ++a)
        for (std::uint64_t b = 0; b < 3; ++b) s.add_tuple(0, {a, b});
    fo::Matrix m;
    m.root = m.add_rel(0, {1, 1});
    Assignment asg(1);
    std::vector<std::pair<ExtElement, ExtElement>> pts;
    for (std::uint64_t i = 0; i < 25; ++i) {
        ExtElement x = ctx.element_at(i);
        asg.set(1, x);
        pts.emplace_back(x, arith::atom_eval(s, m, m.root, asg, ctx));
    }
    CHECK(arith::interpolate(ctx, pts).degree() <= 4);
}

TEST_CASE("matrix_eval combinators and boolean agreement") {
    ExtContext ctx = make_ctx(5);
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t n = 1 + rng.uniform(3);
        fo::Structure s(fo::Vocabulary{{{"E", 2}}}, n);
        for (std::uint64_t a = 0; a < n; ++a)
            for (std::uint64_t b = 0; b < n; ++b)
                if (rng.uniform(2)) s.add_tuple(0, {a, b});
        fo::Matrix m; // (E(x,y) | x = y) & !E(y,x)
        m.root = m.add_and(m.add_or(m.add_rel(0, {1, 2}), m.add_equal(1, 2)),
                           m.add_not(m.add_rel(0, {2, 1})));
        for (std::uint64_t a = 0; a < n; ++a)
            for (std::uint64_t b = 0; b < n; ++b) {
                Assignment asg(2);
                asg.set(1, ctx.embed(a));
                asg.set(2, ctx.embed(b));
                ExtElement got = arith::matrix_eval(s, m, asg, ctx);
                bool want = fo::eval_matrix_bool(s, m, {a, b});
                CHECK(got == (want ? ctx.one() : ctx.zero()));
            }
    }
}

TEST_CASE("build_schedule") {
    using fo::Quantifier;
    auto sched = arith::build_schedule({Quantifier::Exists});
    REQUIRE(sched.length() == 2);
    CHECK(sched.ops[0] == Op{OpKind::Exists, 1});
    CHECK(sched.ops[1] == Op{OpKind::Reduce, 1});

    sched = arith::build_schedule({Quantifier::Exists, Quantifier::Forall});
    REQUIRE(sched.length() == 5);
    CHECK(sched.ops[0] == Op{OpKind::Exists, 1});
    CHECK(sched.ops[1] == Op{OpKind::Reduce, 1});
    CHECK(sched.ops[2] == Op{OpKind::Forall, 2});
    CHECK(sched.ops[3] == Op{OpKind::Reduce, 1});
    CHECK(sched.ops[4] == Op{OpKind::Reduce, 2});

    CHECK(arith::build_schedule({}).length() == 0);
    std::vector<Quantifier> prefix;
    for (int k = 0; k <= 8; ++k) {
        CHECK(arith::build_schedule(prefix).length() ==
              static_cast<std::size_t>(k * k + 3 * k) / 2);
        prefix.push_back(Quantifier::Forall);
    }
}

TEST_CASE("chain_eval endpoints") {
    ExtContext ctx = make_ctx(5);
    fo::Matrix m;
    m.root = m.add_rel(0, {1, 2});
    using fo::Quantifier;

    // t=0 equals the embedded model-checking verdict (oracle comparison)
    Rng rng(13);
    for (int rep = 0; rep < 30; ++rep) {
        std::size_t n = 1 + rng.uniform(2);
        std::vector<std::pair<int, int>> edges;
        for (std::uint64_t a = 0; a < n; ++a)
            for (std::uint64_t b = 0; b < n; ++b)
                if (rng.uniform(2)) edges.emplace_back(a, b);
        auto prefix = {rng.uniform(2) ? Quantifier::Exists : Quantifier::Forall,
                       rng.uniform(2) ? Quantifier::Exists : Quantifier::Forall};
        fo::Instance inst = edge_instance(n, edges, prefix, m);
        auto sched = arith::build_schedule(inst.formula.prefix);
        ChainEvaluator eval(inst, ctx, sched);
        Assignment empty(2);
        ExtElement want = oracle::model_check(inst) ? ctx.one() : ctx.zero();
        CHECK(eval.chain_eval(0, empty) == want);

        // t=T is matrix_eval at the same point
        Assignment full(2);
        full.set(1, random_elt(ctx, rng));
        full.set(2, random_elt(ctx, rng));
        CHECK(eval.chain_eval(sched.length(), full) ==
              arith::matrix_eval(inst.structure, inst.formula.matrix, full, ctx));
    }
}

TEST_CASE("cached and uncached chains agree off the universe") {
    ExtContext ctx = make_ctx(5);
    fo::Matrix m;
    m.root = m.add_and(m.add_rel(0, {1, 2}), m.add_not(m.add_equal(1, 2)));
    fo::Instance inst = edge_instance(3, {{0, 1}, {1, 2}, {2, 0}},
                                      {fo::Quantifier::Forall, fo::Quantifier::Exists}, m);
    auto sched = arith::build_schedule(inst.formula.prefix);
    ChainEvaluator cached(inst, ctx, sched, true);
    ChainEvaluator plain(inst, ctx, sched, false);
    Rng rng(19);
    for (int rep = 0; rep < 40; ++rep) {
        // position 2 has variable 1 assigned (arbitrary field point)
        Assignment asg(2);
        asg.set(1, random_elt(ctx, rng));
        CHECK(cached.chain_eval(2, asg) == plain.chain_eval(2, asg));
        asg.set(2, random_elt(ctx, rng));
        CHECK(cached.chain_eval(4, asg) == plain.chain_eval(4, asg));
    }
}

TEST_CASE("Reduce is the identity on universe points") {
    // schedule[t] = Reduce(i) and asg(i) = embed(a): P_t and P_{t+1} coincide
    ExtContext ctx = make_ctx(5);
    Rng rng(29);
    using fo::Quantifier;
    for (int kk = 1; kk <= 2; ++kk) {
        for (int pat = 0; pat < (1 << kk); ++pat) {
            std::vector<Quantifier> prefix;
            for (int i = 0; i < kk; ++i)
                prefix.push_back((pat >> i) & 1 ? Quantifier::Forall : Quantifier::Exists);
            fo::Matrix m;
            if (kk == 1)
                m.root = m.add_rel(0, {1, 1});
            else
                m.root = m.add_or(m.add_rel(0, {1, 2}), m.add_equal(1, 2));
            std::size_t n = 3;
            fo::Instance inst = edge_instance(n, {{0, 1}, {1, 1}, {2, 0}}, prefix, m);
            auto sched = arith::build_schedule(inst.formula.prefix);
            ChainEvaluator eval(inst, ctx, sched);
            for (std::size_t t = 0; t < sched.length(); ++t) {
                if (sched.ops[t].kind != OpKind::Reduce) continue;
                int var = sched.ops[t].var;
                for (std::uint64_t a = 0; a < n; ++a) {
                    // fill every variable legal at position t; the reduced
                    // variable gets the universe point, others random
                    Assignment asg(kk);
                    for (int v = 1; v <= kk; ++v) asg.set(v, random_elt(ctx, rng));
                    asg.set(var, ctx.embed(a));
                    Assignment copy = asg;
                    CHECK(eval.chain_eval(t, asg) == eval.chain_eval(t + 1, copy));
                }
            }
        }
    }
}

TEST_CASE("interpolate") {
    ExtContext ctx = make_ctx(5);
    using P = std::pair<ExtElement, ExtElement>;
    auto c1 = arith::interpolate(ctx, {P{ctx.embed(0), ctx.one()}, P{ctx.embed(1), ctx.one()}});
    CHECK(c1.degree() == 0);
    CHECK(c1.coeffs[0] == ctx.one());

    auto id = arith::interpolate(ctx, {P{ctx.embed(0), ctx.embed(0)},
                                       P{ctx.embed(1), ctx.embed(1)},
                                       P{ctx.embed(2), ctx.embed(2)}});
    CHECK(id.degree() == 1);
    CHECK(id.coeffs[0] == ctx.zero());
    CHECK(id.coeffs[1] == ctx.one());

    CHECK_THROWS(arith::interpolate(ctx, {P{ctx.embed(1), ctx.one()},
                                          P{ctx.embed(1), ctx.zero()}}));

    // round trip against direct evaluation
    Rng rng(37);
    for (int rep = 0; rep < 25; ++rep) {
        UnivariatePoly p;
        p.var = 1;
        int deg = 1 + rng.uniform(8);
        for (int i = 0; i <= deg; ++i) p.coeffs.push_back(random_elt(ctx, rng));
        p.trim();
        std::vector<P> pts;
        for (int i = 0; i <= deg; ++i) {
            ExtElement x = ctx.element_at(i);
            pts.emplace_back(x, p.eval(ctx, x));
        }
        UnivariatePoly back = arith::interpolate(ctx, pts, 1);
        CHECK(back == p);
    }
}

TEST_CASE("op_apply") {
    ExtContext ctx = make_ctx(5);
    UnivariatePoly one_poly{0, {ctx.one()}};
    UnivariatePoly zero_poly{0, {ctx.zero()}};
    CHECK(arith::op_apply(ctx, Op{OpKind::Forall, 1}, one_poly, nullptr, 2) == ctx.one());
    CHECK(arith::op_apply(ctx, Op{OpKind::Exists, 1}, zero_poly, nullptr, 2) == ctx.zero());

    UnivariatePoly s{1, {ctx.embed(2), ctx.embed(3)}}; // 2 + 3X
    ExtElement at1 = ctx.embed(1);
    CHECK(arith::op_apply(ctx, Op{OpKind::Reduce, 1}, s, &at1, 2) == s.eval(ctx, at1));
    CHECK_THROWS(arith::op_apply(ctx, Op{OpKind::Reduce, 1}, s, nullptr, 2));
}

TEST_CASE("restrict_univariate matches pointwise chain evaluation") {
    ExtContext ctx = make_ctx(5);
    fo::Matrix m;
    m.root = m.add_or(m.add_rel(0, {1, 2}), m.add_equal(1, 2));
    fo::Instance inst = edge_instance(3, {{0, 1}, {2, 2}},
                                      {fo::Quantifier::Exists, fo::Quantifier::Forall}, m);
    auto sched = arith::build_schedule(inst.formula.prefix);
    ChainEvaluator eval(inst, ctx, sched);
    Rng rng(41);
    Assignment asg(2);
    for (std::size_t t = 1; t <= sched.length(); ++t) {
        int var = sched.ops[t - 1].var;
        UnivariatePoly msg = eval.restrict_univariate(t, asg, var);
        CHECK(msg.degree() <= 25);
        for (int i = 0; i < 20; ++i) {
            ExtElement a = random_elt(ctx, rng);
            Assignment probe = asg;
            probe.set(var, a);
            CHECK(msg.eval(ctx, a) == eval.chain_eval(t, probe));
        }
        // walk the tower like the verifier would
        asg.set(var, random_elt(ctx, rng));
    }
}

TEST_CASE("tautology matrix: known tower shapes") {
    // matrix x = x is constantly 1; the schedule is [Forall 1, Reduce 1], so
    // the round-1 message is the reduced indicator sum Eq(X,0) + Eq(X,1)
    // (degree q-1, value 1 on the universe) and the round-2 message is the
    // constant 1 itself.
    ExtContext ctx = make_ctx(5);
    fo::Matrix m;
    m.root = m.add_equal(1, 1);
    fo::Instance inst = edge_instance(2, {}, {fo::Quantifier::Forall}, m);
    auto sched = arith::build_schedule(inst.formula.prefix);
    ChainEvaluator eval(inst, ctx, sched);
    Rng rng(43);
    Assignment asg(1);

    UnivariatePoly first = eval.restrict_univariate(1, asg, 1);
    CHECK(first.degree() == 4);
    for (std::uint64_t z = 0; z < 2; ++z)
        CHECK(first.eval(ctx, ctx.embed(z)) == ctx.one());
    ExtElement probe = random_elt(ctx, rng);
    ExtElement want = ctx.add(arith::eq_eval(ctx, probe, ctx.embed(0)),
                              arith::eq_eval(ctx, probe, ctx.embed(1)));
    CHECK(first.eval(ctx, probe) == want);

    asg.set(1, random_elt(ctx, rng));
    UnivariatePoly second = eval.restrict_univariate(2, asg, 1);
    CHECK(second.degree() == 0);
    CHECK(second.coeffs[0] == ctx.one());
}

TEST_CASE("UnivariatePoly textual form") {
    ExtContext ctx = make_ctx(5);
    UnivariatePoly p{2, {ctx.embed(1), ctx.zero(), ctx.embed(4)}};
    std::string s = p.to_string();
    CHECK(s == "var=2; deg=2; coeffs=1,0,0,0|0,0,0,0|4,0,0,0");
    CHECK(UnivariatePoly::from_string(s) == p);
    CHECK_THROWS(UnivariatePoly::from_string("var=2; deg=3; coeffs=1,0,0,0"));
    CHECK_THROWS(UnivariatePoly::from_string("nonsense"));
}

TEST_CASE("chain_eval rejects bad positions and missing assignments") {
    ExtContext ctx = make_ctx(5);
    fo::Matrix m;
    m.root = m.add_rel(0, {1, 1});
    fo::Instance inst = edge_instance(2, {{0, 0}}, {fo::Quantifier::Exists}, m);
    auto sched = arith::build_schedule(inst.formula.prefix);
    ChainEvaluator eval(inst, ctx, sched);
    Assignment empty(1);
    CHECK_THROWS(eval.chain_eval(99, empty));
    CHECK_THROWS(eval.chain_eval(1, empty)); // variable 1 must be assigned
}
