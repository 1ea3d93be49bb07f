#include <doctest.h>

#include <stdexcept>
#include <string>

#include "mcip/oracle.hpp"
#include "mcip/protocol.hpp"

using namespace mcip;
using namespace mcip::protocol;
using arith::Assignment;
using arith::ChainEvaluator;
using arith::UnivariatePoly;

namespace {

const char* kTrue = "vocab E/2\nuniverse 2\nrel E: (0,1) (1,0)\n"
                    "formula: ALL x . EX y . E(x,y)\n";
const char* kFalse = "vocab E/2\nuniverse 2\nrel E: (0,1)\n"
                     "formula: ALL x . EX y . E(x,y)\n";

fo::Instance parse(const char* text) { return fo::parse_instance(text); }

} // namespace

TEST_CASE("choose_params") {
    {
        fo::Instance inst = parse(kTrue); // u+1 = 2, T = 5, so q = 5
        ProtocolParams p = choose_params(inst, 0);
        CHECK(p.q == 5);
        CHECK(p.rounds == 5);
        CHECK(p.schedule.length() == 5);
        CHECK(p.ctx->q() == 5);
    }
    {
        // universe of 11 dominates every other lower bound
        fo::Instance inst = parse("vocab E/2\nuniverse 11\nrel E: (0,0)\n"
                                  "formula: EX x . E(x,x)\n");
        ProtocolParams p = choose_params(inst, 0);
        CHECK(p.q == 11);
        CHECK(p.rounds == 2);
    }
    {
        fo::Instance inst = parse(kTrue);
        ProtocolParams p = choose_params(inst, 0, 6); // q_min pushes past 5
        CHECK(p.q == 7);
    }
    // setup is deterministic per seed
    fo::Instance inst = parse(kTrue);
    CHECK(choose_params(inst, 42).ctx->irr() == choose_params(inst, 42).ctx->irr());
}

TEST_CASE("prover kinds parse and print") {
    CHECK(prover_kind_from_string("honest") == ProverKind::Honest);
    CHECK(prover_kind_from_string("round-fixing") == ProverKind::RoundFixing);
    CHECK(prover_kind_from_string("random-consistent") == ProverKind::RandomConsistent);
    CHECK_THROWS(prover_kind_from_string("clever"));
    CHECK(to_string(ProverKind::RoundFixing) == "round-fixing");
}

TEST_CASE("verifier_step accepts the honest message and rejects tampering") {
    fo::Instance inst = parse(kTrue);
    ProtocolParams params = choose_params(inst, 3);
    ChainEvaluator eval(inst, *params.ctx, params.schedule);
    Rng prover_rng(99);

    RoundState state{1, Assignment(inst.k()), params.ctx->one()};
    UnivariatePoly honest =
        prover_message(ProverKind::Honest, state, inst, params, eval, prover_rng);

    // round 1 is the quantifier operator for variable 1; on a true instance
    // the honest message satisfies QX_1 S(X_1) = s_0 = 1
    CHECK(arith::op_apply(*params.ctx, params.schedule.ops[0], honest, nullptr,
                          inst.structure.universe_size()) == params.ctx->one());

    {
        RoundState st = state;
        Rng rng(1);
        StepOutcome out = verifier_step(st, params, inst, honest, rng);
        CHECK(out.continued);
        CHECK(st.t == 2);
        CHECK(st.asg.has(1));
        CHECK(st.claim == honest.eval(*params.ctx, out.challenge));
    }
    {
        // shift the message by the constant 1: the operator value moves
        UnivariatePoly shifted = honest;
        shifted.coeffs[0] = params.ctx->add(shifted.coeffs[0], params.ctx->one());
        RoundState st = state;
        Rng rng(1);
        StepOutcome out = verifier_step(st, params, inst, shifted, rng);
        CHECK(!out.continued);
        CHECK(out.reason == "constant-mismatch");
    }
    {
        // wrong variable label
        UnivariatePoly wrong = honest;
        wrong.var = 2;
        RoundState st = state;
        Rng rng(1);
        StepOutcome out = verifier_step(st, params, inst, wrong, rng);
        CHECK(!out.continued);
        CHECK(out.reason == "var-mismatch");
    }
    {
        // degree q^2 + 1 is over the cap regardless of values
        UnivariatePoly fat;
        fat.var = 1;
        fat.coeffs.assign(params.q * params.q + 2, params.ctx->zero());
        fat.coeffs.back() = params.ctx->one();
        RoundState st = state;
        Rng rng(1);
        StepOutcome out = verifier_step(st, params, inst, fat, rng);
        CHECK(!out.continued);
        CHECK(out.reason == "degree");
    }
}

TEST_CASE("final_check") {
    fo::Instance inst = parse(kTrue);
    ProtocolParams params = choose_params(inst, 5);
    Transcript tr = run_protocol(inst, ProverKind::Honest, 5);
    REQUIRE(tr.accepted);

    // replay the accepted run's challenges and confirm the final identity
    RoundState state{1, Assignment(inst.k()), params.ctx->one()};
    for (const auto& rec : tr.rounds) {
        state.asg.set(rec.op.var, rec.challenge);
        state.claim = rec.claim;
        ++state.t;
    }
    ExtElement matrix{};
    CHECK(final_check(state, inst, *params.ctx, &matrix));
    CHECK(matrix == tr.final_matrix);

    // k = 0: no rounds, the matrix value must equal s_0 = 1 directly
    fo::Matrix m;
    m.root = m.add_equal(0, 0);
    fo::Instance ground{fo::Structure(fo::Vocabulary{}, 1), fo::PNFFormula{{}, {}, m}};
    ProtocolParams gp = choose_params(ground, 0);
    RoundState gs{1, Assignment(0), gp.ctx->one()};
    CHECK(final_check(gs, ground, *gp.ctx));

    fo::Matrix neg;
    neg.root = neg.add_not(neg.add_equal(0, 0));
    fo::Instance gfalse{fo::Structure(fo::Vocabulary{}, 1), fo::PNFFormula{{}, {}, neg}};
    ProtocolParams gfp = choose_params(gfalse, 0);
    RoundState gfs{1, Assignment(0), gfp.ctx->one()};
    CHECK(!final_check(gfs, gfalse, *gfp.ctx));
}

TEST_CASE("round-fixing equals honest while the claim holds") {
    fo::Instance inst = parse(kTrue);
    ProtocolParams params = choose_params(inst, 7);
    ChainEvaluator eval(inst, *params.ctx, params.schedule);
    Rng prover_rng(1);
    RoundState state{1, Assignment(inst.k()), params.ctx->one()};
    UnivariatePoly honest =
        prover_message(ProverKind::Honest, state, inst, params, eval, prover_rng);
    UnivariatePoly fixing =
        prover_message(ProverKind::RoundFixing, state, inst, params, eval, prover_rng);
    CHECK(fixing == honest);
}

TEST_CASE("round-fixing passes the first round on a false instance") {
    fo::Instance inst = parse(kFalse);
    ProtocolParams params = choose_params(inst, 11);
    ChainEvaluator eval(inst, *params.ctx, params.schedule);
    Rng prover_rng(2);
    RoundState state{1, Assignment(inst.k()), params.ctx->one()};
    UnivariatePoly msg =
        prover_message(ProverKind::RoundFixing, state, inst, params, eval, prover_rng);
    // the doctored message satisfies the round identity even though the
    // honest one cannot
    CHECK(arith::op_apply(*params.ctx, params.schedule.ops[0], msg, nullptr,
                          inst.structure.universe_size()) == params.ctx->one());
    Rng rng(5);
    StepOutcome out = verifier_step(state, params, inst, msg, rng);
    CHECK(out.continued);
}

TEST_CASE("run_protocol verdicts") {
    fo::Instance t = parse(kTrue);
    fo::Instance f = parse(kFalse);

    Transcript ta = run_protocol(t, ProverKind::Honest, 0);
    CHECK(ta.accepted);
    CHECK(ta.fail_round == 0);
    CHECK(ta.rounds.size() == 5);
    CHECK(ta.has_final_matrix);
    CHECK(ta.instance_digest == instance_digest(t));

    Transcript fr = run_protocol(f, ProverKind::Honest, 0);
    CHECK(!fr.accepted);
    CHECK(fr.fail_round == 1);
    CHECK(fr.fail_reason == "constant-mismatch");
    CHECK(fr.rounds.size() == 1);
    CHECK(!fr.rounds[0].completed);

    // determinism: identical inputs, byte-identical transcript
    CHECK(run_protocol(t, ProverKind::Honest, 12).to_string() ==
          run_protocol(t, ProverKind::Honest, 12).to_string());
    // different seeds draw different challenges
    CHECK(run_protocol(t, ProverKind::Honest, 12).to_string() !=
          run_protocol(t, ProverKind::Honest, 13).to_string());
}

TEST_CASE("completeness across seeds") {
    fo::Instance t = parse(kTrue);
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        CHECK(run_protocol(t, ProverKind::Honest, seed).accepted);
}

TEST_CASE("transcript serialization round-trips") {
    fo::Instance t = parse(kTrue);
    fo::Instance f = parse(kFalse);
    for (const Transcript& tr : {run_protocol(t, ProverKind::Honest, 4),
                                 run_protocol(f, ProverKind::Honest, 4),
                                 run_protocol(f, ProverKind::RoundFixing, 4)}) {
        std::string text = tr.to_string();
        Transcript back = Transcript::from_string(text);
        CHECK(back.to_string() == text);
        CHECK(back.accepted == tr.accepted);
        CHECK(back.fail_round == tr.fail_round);
        CHECK(back.rounds.size() == tr.rounds.size());
    }
}

TEST_CASE("malformed transcripts are refused") {
    fo::Instance t = parse(kTrue);
    std::string text = run_protocol(t, ProverKind::Honest, 4).to_string();

    CHECK_THROWS_AS(Transcript::from_string("not a transcript"), std::runtime_error);
    CHECK_THROWS_AS(Transcript::from_string(""), std::runtime_error);

    // drop the last round line: the round count no longer matches
    std::size_t last_round = text.rfind("round 5");
    std::size_t line_end = text.find('\n', last_round);
    std::string truncated = text.substr(0, last_round) + text.substr(line_end + 1);
    CHECK_THROWS_AS(Transcript::from_string(truncated), std::runtime_error);

    // verdict contradicting the fail marker
    std::string lied = text;
    lied.replace(lied.find("verdict accept"), 14, "verdict reject");
    CHECK_THROWS_AS(Transcript::from_string(lied), std::runtime_error);
}

TEST_CASE("verify_transcript replays and detects tampering") {
    fo::Instance t = parse(kTrue);
    fo::Instance f = parse(kFalse);

    for (const Transcript& tr : {run_protocol(t, ProverKind::Honest, 21),
                                 run_protocol(f, ProverKind::Honest, 21),
                                 run_protocol(f, ProverKind::RoundFixing, 21)}) {
        const fo::Instance& inst = tr.instance_digest == instance_digest(t) ? t : f;
        VerifyResult vr = verify_transcript(inst, Transcript::from_string(tr.to_string()));
        CHECK(vr.well_formed);
        CHECK(vr.verdict_reproduced);
        CHECK(!vr.challenge_divergence);
        CHECK(vr.accepted == tr.accepted);
    }

    // wrong instance: digest mismatch
    Transcript tr = run_protocol(t, ProverKind::Honest, 21);
    VerifyResult wrong = verify_transcript(f, tr);
    CHECK(!wrong.well_formed);

    // perturb one message coefficient: the replayed checks diverge
    Transcript bent = tr;
    bent.rounds[2].msg.coeffs[0] =
        choose_params(t, 21).ctx->add(bent.rounds[2].msg.coeffs[0],
                                      choose_params(t, 21).ctx->one());
    VerifyResult vr = verify_transcript(t, bent);
    CHECK(!vr.verdict_reproduced);

    // recorded challenge not matching the seed stream flags divergence
    Transcript swapped = tr;
    std::swap(swapped.rounds[0].challenge, swapped.rounds[1].challenge);
    VerifyResult dv = verify_transcript(t, swapped);
    CHECK(dv.challenge_divergence);
}

TEST_CASE("soundness_experiment") {
    fo::Instance t = parse(kTrue);
    fo::Instance f = parse(kFalse);
    CHECK_THROWS_AS(soundness_experiment(t, ProverKind::RoundFixing, 4, 0),
                    std::invalid_argument);

    ExperimentResult honest = soundness_experiment(f, ProverKind::Honest, 50, 0);
    CHECK(honest.trials == 50);
    CHECK(honest.accepts == 0);
    CHECK(honest.q == 5);

    ExperimentResult a = soundness_experiment(f, ProverKind::RoundFixing, 200, 9);
    ExperimentResult b = soundness_experiment(f, ProverKind::RoundFixing, 200, 9);
    CHECK(a.accepts == b.accepts);
    CHECK(a.verdicts == b.verdicts);
    CHECK(a.rate == doctest::Approx(double(a.accepts) / 200));
    // well below the certification line 1/q + 3 sigma at q = 5
    CHECK(a.rate <= 0.2 + 3 * 0.0283 + 1e-9);

    ExperimentResult one = soundness_experiment(f, ProverKind::RandomConsistent, 1, 3);
    CHECK(one.trials == 1);
    CHECK(one.verdicts.size() == 1);
}

TEST_CASE("instance digest is stable and canonical") {
    fo::Instance a = parse(kTrue);
    CHECK(instance_digest(a).size() == 16);
    CHECK(instance_digest(a) == instance_digest(parse(kTrue)));
    // same instance, different surface spacing
    fo::Instance b = parse("vocab E/2\nuniverse 2\nrel E:  (0,1)   (1,0)\n"
                           "formula: ALL x .  EX y .  E(x,y)\n");
    CHECK(instance_digest(a) == instance_digest(b));
    CHECK(instance_digest(a) != instance_digest(parse(kFalse)));
}
