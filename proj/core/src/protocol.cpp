#include "mcip/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "mcip/oracle.hpp"

namespace mcip::protocol {

namespace {

std::uint64_t field_order4(std::uint64_t q) { return q * q * q * q; }

std::uint64_t natural_q(const fo::Instance& inst, std::uint64_t q_min) {
    std::uint64_t k = static_cast<std::uint64_t>(inst.k());
    std::uint64_t lower = inst.structure.universe_size(); // u + 1
    lower = std::max(lower, (k * k + 3 * k) / 2);
    lower = std::max<std::uint64_t>(lower, inst.formula.matrix.node_count());
    lower = std::max<std::uint64_t>(lower, 5);
    lower = std::max(lower, q_min);
    return field::smallest_prime_geq(lower);
}

ExtElement draw_element(const field::ExtContext& ctx, Rng& rng) {
    return ctx.element_at(rng.uniform(field_order4(ctx.q())));
}

/// Values of the message at the first m enumeration points, with the value
/// at abscissa index `anchor` replaced, interpolated back to a poly.
arith::UnivariatePoly repoint(const field::ExtContext& ctx, const arith::UnivariatePoly& base,
                              std::uint64_t m, std::size_t anchor, const ExtElement& value,
                              int var) {
    std::vector<std::pair<ExtElement, ExtElement>> points;
    points.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        ExtElement x = ctx.element_at(i);
        points.emplace_back(x, i == anchor ? value : base.eval(ctx, x));
    }
    return arith::interpolate(ctx, points, var);
}

arith::UnivariatePoly honest_restriction(const RoundState& state, arith::ChainEvaluator& eval,
                                         const arith::Op& op) {
    arith::Assignment asg = state.asg;
    return eval.restrict_univariate(state.t, asg, op.var);
}

/// Per-universe-point weights of the round check: Exists/Forall treat every
/// point alike, Reduce weights point z by Eq(current, z).
std::vector<ExtElement> reduce_weights(const field::ExtContext& ctx, const ExtElement& current,
                                       std::size_t n) {
    std::vector<ExtElement> w(n);
    for (std::size_t z = 0; z < n; ++z) w[z] = arith::eq_eval(ctx, current, ctx.embed(z));
    return w;
}

arith::UnivariatePoly round_fixing_message(const RoundState& state, const fo::Instance& inst,
                                           const ProtocolParams& params,
                                           arith::ChainEvaluator& eval) {
    const field::ExtContext& ctx = *params.ctx;
    const arith::Op& op = params.schedule.ops[state.t - 1];
    std::size_t n = inst.structure.universe_size();
    arith::UnivariatePoly honest = honest_restriction(state, eval, op);

    const ExtElement* current = nullptr;
    ExtElement cur{};
    if (op.kind == arith::OpKind::Reduce) {
        cur = state.asg.get(op.var);
        current = &cur;
    }
    if (arith::op_apply(ctx, op, honest, current, n) == state.claim) return honest;

    std::vector<ExtElement> v(n);
    for (std::size_t z = 0; z < n; ++z) v[z] = honest.eval(ctx, ctx.embed(z));
    std::vector<ExtElement> w;
    if (op.kind == arith::OpKind::Reduce) w = reduce_weights(ctx, cur, n);

    for (std::size_t z0 = 0; z0 < n; ++z0) {
        ExtElement fixed;
        if (op.kind == arith::OpKind::Reduce) {
            if (w[z0].is_zero()) continue;
            ExtElement rest = ctx.zero();
            for (std::size_t z = 0; z < n; ++z)
                if (z != z0) rest = ctx.add(rest, ctx.mul(w[z], v[z]));
            fixed = ctx.mul(ctx.sub(state.claim, rest), ctx.inv(w[z0]));
        } else {
            bool forall = op.kind == arith::OpKind::Forall;
            ExtElement prod = ctx.one();
            for (std::size_t z = 0; z < n; ++z)
                if (z != z0) prod = ctx.mul(prod, forall ? v[z] : ctx.sub(ctx.one(), v[z]));
            if (prod.is_zero()) continue;
            if (forall)
                fixed = ctx.mul(state.claim, ctx.inv(prod));
            else
                fixed = ctx.sub(ctx.one(),
                                ctx.mul(ctx.sub(ctx.one(), state.claim), ctx.inv(prod)));
        }
        std::uint64_t m = std::max<std::uint64_t>(honest.coeffs.size(), n);
        return repoint(ctx, honest, m, z0, fixed, op.var);
    }
    return honest; // no feasible anchor; send the honest message and lose
}

arith::UnivariatePoly random_consistent_message(const RoundState& state, const fo::Instance& inst,
                                                const ProtocolParams& params, Rng& rng) {
    const field::ExtContext& ctx = *params.ctx;
    const arith::Op& op = params.schedule.ops[state.t - 1];
    std::size_t n = inst.structure.universe_size();
    std::uint64_t m = ctx.q() * ctx.q() + 1;

    std::size_t anchor = 0;
    std::vector<ExtElement> w;
    bool solvable = true;
    if (op.kind == arith::OpKind::Reduce) {
        w = reduce_weights(ctx, state.asg.get(op.var), n);
        solvable = false;
        for (std::size_t z = 0; z < n; ++z)
            if (!w[z].is_zero()) {
                anchor = z;
                solvable = true;
                break;
            }
    }

    // Universe points come first in the enumeration, so abscissa index z is
    // the embedded universe element z.
    std::vector<ExtElement> vals(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        if (solvable && i == anchor) continue;
        ExtElement v = draw_element(ctx, rng);
        if (i < n && op.kind != arith::OpKind::Reduce) {
            // keep the partial product invertible so the anchor equation solves
            bool forall = op.kind == arith::OpKind::Forall;
            while ((forall && v.is_zero()) || (!forall && v == ctx.one()))
                v = draw_element(ctx, rng);
        }
        vals[i] = v;
    }
    if (solvable) {
        if (op.kind == arith::OpKind::Reduce) {
            ExtElement rest = ctx.zero();
            for (std::size_t z = 0; z < n; ++z)
                if (z != anchor) rest = ctx.add(rest, ctx.mul(w[z], vals[z]));
            vals[anchor] = ctx.mul(ctx.sub(state.claim, rest), ctx.inv(w[anchor]));
        } else {
            bool forall = op.kind == arith::OpKind::Forall;
            ExtElement prod = ctx.one();
            for (std::size_t z = 0; z < n; ++z)
                if (z != anchor)
                    prod = ctx.mul(prod, forall ? vals[z] : ctx.sub(ctx.one(), vals[z]));
            if (forall)
                vals[anchor] = ctx.mul(state.claim, ctx.inv(prod));
            else
                vals[anchor] = ctx.sub(
                    ctx.one(), ctx.mul(ctx.sub(ctx.one(), state.claim), ctx.inv(prod)));
        }
    }

    std::vector<std::pair<ExtElement, ExtElement>> points;
    points.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) points.emplace_back(ctx.element_at(i), vals[i]);
    return arith::interpolate(ctx, points, op.var);
}

} // namespace

ProtocolParams choose_params_with_rng(const fo::Instance& inst, Rng& rng, std::uint64_t seed,
                                      std::uint64_t q_min) {
    std::uint64_t q = natural_q(inst, q_min);
    field::PrimeModulus mod(q);
    field::IrreduciblePoly irr = field::find_irreducible(mod, rng);
    ProtocolParams params;
    params.q = q;
    params.ctx = std::make_shared<field::ExtContext>(mod, irr);
    params.schedule = arith::build_schedule(inst.formula.prefix);
    params.rounds = params.schedule.length();
    params.seed = seed;
    return params;
}

ProtocolParams choose_params(const fo::Instance& inst, std::uint64_t seed, std::uint64_t q_min) {
    Rng rng(seed);
    return choose_params_with_rng(inst, rng, seed, q_min);
}

ProverKind prover_kind_from_string(const std::string& name) {
    if (name == "honest") return ProverKind::Honest;
    if (name == "round-fixing") return ProverKind::RoundFixing;
    if (name == "random-consistent") return ProverKind::RandomConsistent;
    throw std::invalid_argument("unknown prover strategy: " + name);
}

std::string to_string(ProverKind kind) {
    switch (kind) {
    case ProverKind::Honest: return "honest";
    case ProverKind::RoundFixing: return "round-fixing";
    case ProverKind::RandomConsistent: return "random-consistent";
    }
    throw std::logic_error("bad ProverKind");
}

std::string instance_digest(const fo::Instance& inst) {
    std::string text = fo::unparse(inst);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

StepOutcome verifier_step(RoundState& state, const ProtocolParams& params,
                          const fo::Instance& inst, const arith::UnivariatePoly& msg, Rng& rng) {
    const field::ExtContext& ctx = *params.ctx;
    const arith::Op& op = params.schedule.ops[state.t - 1];
    StepOutcome out{false, ctx.zero(), ctx.zero(), ""};

    if (msg.var != op.var) {
        out.reason = "var-mismatch";
        return out;
    }
    if (msg.degree() > static_cast<int>(params.q * params.q)) {
        out.reason = "degree";
        return out;
    }
    const ExtElement* current = nullptr;
    ExtElement cur{};
    if (op.kind == arith::OpKind::Reduce) {
        cur = state.asg.get(op.var);
        current = &cur;
    }
    out.check = arith::op_apply(ctx, op, msg, current, inst.structure.universe_size());
    if (!(out.check == state.claim)) {
        out.reason = op.kind == arith::OpKind::Reduce ? "reduce-mismatch" : "constant-mismatch";
        return out;
    }
    out.challenge = draw_element(ctx, rng);
    state.claim = msg.eval(ctx, out.challenge);
    state.asg.set(op.var, out.challenge);
    ++state.t;
    out.continued = true;
    return out;
}

bool final_check(const RoundState& state, const fo::Instance& inst, const field::ExtContext& ctx,
                 ExtElement* matrix_value) {
    ExtElement mv = arith::matrix_eval(inst.structure, inst.formula.matrix, state.asg, ctx);
    if (matrix_value) *matrix_value = mv;
    return mv == state.claim;
}

arith::UnivariatePoly prover_message(ProverKind kind, const RoundState& state,
                                     const fo::Instance& inst, const ProtocolParams& params,
                                     arith::ChainEvaluator& eval, Rng& prover_rng) {
    switch (kind) {
    case ProverKind::Honest:
        return honest_restriction(state, eval, params.schedule.ops[state.t - 1]);
    case ProverKind::RoundFixing: return round_fixing_message(state, inst, params, eval);
    case ProverKind::RandomConsistent:
        return random_consistent_message(state, inst, params, prover_rng);
    }
    throw std::logic_error("bad ProverKind");
}

Transcript run_protocol(const fo::Instance& inst, ProverKind prover, std::uint64_t seed,
                        std::uint64_t q_min) {
    Rng rng(seed);
    ProtocolParams params = choose_params_with_rng(inst, rng, seed, q_min);
    const field::ExtContext& ctx = *params.ctx;
    Rng prover_rng(Rng::derive(seed, 0x70726f76)); // "prov"
    arith::ChainEvaluator eval(inst, ctx, params.schedule);

    Transcript tr;
    tr.q = params.q;
    tr.irr = ctx.irr();
    tr.seed = seed;
    tr.rounds_total = params.rounds;
    tr.instance_digest = instance_digest(inst);

    RoundState state{1, arith::Assignment(inst.k()), ctx.one()};
    for (std::size_t t = 1; t <= params.rounds; ++t) {
        arith::UnivariatePoly msg = prover_message(prover, state, inst, params, eval, prover_rng);
        StepOutcome out = verifier_step(state, params, inst, msg, rng);
        RoundRecord rec{params.schedule.ops[t - 1], std::move(msg), out.check,
                        out.continued,               out.challenge,  ctx.zero()};
        if (out.continued) rec.claim = state.claim;
        tr.rounds.push_back(std::move(rec));
        if (!out.continued) {
            tr.accepted = false;
            tr.fail_round = t;
            tr.fail_reason = out.reason;
            return tr;
        }
    }
    tr.has_final_matrix = true;
    tr.accepted = final_check(state, inst, ctx, &tr.final_matrix);
    if (!tr.accepted) {
        tr.fail_round = params.rounds + 1;
        tr.fail_reason = "final-mismatch";
    }
    return tr;
}

VerifyResult verify_transcript(const fo::Instance& inst, const Transcript& tr) {
    VerifyResult r;
    if (tr.version != 1) {
        r.diagnostic = "unsupported transcript version";
        return r;
    }
    if (tr.instance_digest != instance_digest(inst)) {
        r.diagnostic = "instance digest mismatch";
        return r;
    }
    if (!field::is_prime(tr.q) || tr.q > field::kMaxModulus || tr.q < natural_q(inst, 0)) {
        r.diagnostic = "recorded modulus is invalid for this instance";
        return r;
    }
    field::PrimeModulus mod(tr.q);
    if (tr.irr.coeffs[4] != 1 || !field::is_irreducible(mod, tr.irr.coeffs)) {
        r.diagnostic = "recorded polynomial is not a monic irreducible quartic";
        return r;
    }
    arith::OperatorSchedule schedule = arith::build_schedule(inst.formula.prefix);
    std::size_t total = schedule.length();
    if (tr.rounds_total != total) {
        r.diagnostic = "round count does not match the instance";
        return r;
    }
    std::size_t expect_rows =
        (tr.fail_round >= 1 && tr.fail_round <= total) ? tr.fail_round : total;
    if (tr.rounds.size() != expect_rows) {
        r.diagnostic = "wrong number of round records";
        return r;
    }
    if (tr.fail_round == 0 && !tr.accepted) {
        r.diagnostic = "reject verdict without a failing round";
        return r;
    }
    if (tr.fail_round != 0 && tr.accepted) {
        r.diagnostic = "accept verdict with a failing round";
        return r;
    }
    field::ExtContext ctx(mod, tr.irr);
    for (const RoundRecord& rec : tr.rounds) {
        for (const ExtElement& c : rec.msg.coeffs) ctx.validate(c);
        ctx.validate(rec.check);
        ctx.validate(rec.challenge);
        ctx.validate(rec.claim);
    }
    r.well_formed = true;

    // Re-derive the seed-determined draws alongside the algebraic replay.
    Rng rng(tr.seed);
    field::IrreduciblePoly derived_irr = field::find_irreducible(mod, rng);
    if (!(derived_irr == tr.irr)) r.challenge_divergence = true;

    std::size_t n = inst.structure.universe_size();
    std::size_t q2 = tr.q * tr.q;
    RoundState state{1, arith::Assignment(inst.k()), ctx.one()};
    for (std::size_t i = 0; i < tr.rounds.size(); ++i) {
        const RoundRecord& rec = tr.rounds[i];
        const arith::Op& op = schedule.ops[i];
        std::size_t t = i + 1;
        if (!(rec.op == op)) {
            r.diagnostic = "operator tag differs from the schedule";
            return r;
        }
        bool failing = tr.fail_round == t;
        bool bad_var = rec.msg.var != op.var;
        bool bad_deg = rec.msg.degree() > static_cast<int>(q2);
        if (bad_var || bad_deg) {
            if (!failing) {
                r.diagnostic = "replay rejects a message the transcript continued past";
                return r;
            }
            std::string want = bad_var ? "var-mismatch" : "degree";
            r.verdict_reproduced = tr.fail_reason == want;
            if (!r.verdict_reproduced) r.diagnostic = "recorded failure reason differs";
            return r;
        }
        const ExtElement* current = nullptr;
        ExtElement cur{};
        if (op.kind == arith::OpKind::Reduce) {
            cur = state.asg.get(op.var);
            current = &cur;
        }
        ExtElement check = arith::op_apply(ctx, op, rec.msg, current, n);
        if (!(check == rec.check)) {
            r.diagnostic = "recorded check value differs on replay";
            return r;
        }
        bool passes = check == state.claim;
        if (failing) {
            if (passes) {
                r.diagnostic = "replay passes the round the transcript rejected";
                return r;
            }
            std::string want =
                op.kind == arith::OpKind::Reduce ? "reduce-mismatch" : "constant-mismatch";
            r.verdict_reproduced = tr.fail_reason == want;
            if (!r.verdict_reproduced) r.diagnostic = "recorded failure reason differs";
            return r;
        }
        if (!passes) {
            r.diagnostic = "replay rejects a round the transcript continued past";
            return r;
        }
        if (!r.challenge_divergence) {
            ExtElement derived = draw_element(ctx, rng);
            if (!(derived == rec.challenge)) r.challenge_divergence = true;
        }
        ExtElement next = rec.msg.eval(ctx, rec.challenge);
        if (!(next == rec.claim)) {
            r.diagnostic = "recorded claim differs from message at challenge";
            return r;
        }
        state.claim = next;
        state.asg.set(op.var, rec.challenge);
        ++state.t;
    }

    ExtElement mv{};
    bool accept = final_check(state, inst, ctx, &mv);
    if (tr.has_final_matrix && !(mv == tr.final_matrix)) {
        r.diagnostic = "recorded final matrix value differs on replay";
        return r;
    }
    r.accepted = accept;
    r.verdict_reproduced = accept == tr.accepted;
    if (!r.verdict_reproduced) r.diagnostic = "replayed verdict differs from the recorded one";
    return r;
}

ExperimentResult soundness_experiment(const fo::Instance& inst, ProverKind prover,
                                      std::size_t trials, std::uint64_t master_seed,
                                      std::uint64_t q_min) {
    if (oracle::model_check(inst)) throw std::invalid_argument("instance is true; soundness experiments need a false instance");
    ExperimentResult res;
    res.trials = trials;
    res.verdicts.reserve(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        std::uint64_t seed = Rng::derive(master_seed, i);
        Transcript tr = run_protocol(inst, prover, seed, q_min);
        res.q = tr.q;
        res.verdicts.push_back(tr.accepted ? 1 : 0);
        if (tr.accepted) ++res.accepts;
    }
    if (trials == 0)
        res.q = choose_params(inst, master_seed, q_min).q;
    res.rate = trials ? static_cast<double>(res.accepts) / static_cast<double>(trials) : 0.0;
    return res;
}

} // namespace mcip::protocol
