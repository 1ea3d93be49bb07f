#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcip/arith.hpp"
#include "mcip/field.hpp"
#include "mcip/fo.hpp"
#include "mcip/rng.hpp"

namespace mcip::protocol {

using arith::ExtElement;

/// Everything fixed by the setup phase: the prime q, the GF(q^4) context,
/// the operator schedule, and the round count T = (k^2+3k)/2.
struct ProtocolParams {
    std::uint64_t q;
    std::shared_ptr<const field::ExtContext> ctx;
    arith::OperatorSchedule schedule;
    std::size_t rounds; // T
    std::uint64_t seed;
};

/// q := smallest prime >= max(u+1, (k^2+3k)/2, |psi|, 5, q_min); the
/// irreducible quartic comes from a seed-derived generator, so setup is
/// deterministic per seed and never fails.
ProtocolParams choose_params(const fo::Instance& inst, std::uint64_t seed,
                             std::uint64_t q_min = 0);

/// Variant that continues consuming an existing generator (the challenge
/// stream follows the setup draws on the same generator).
ProtocolParams choose_params_with_rng(const fo::Instance& inst, Rng& rng, std::uint64_t seed,
                                      std::uint64_t q_min = 0);

enum class ProverKind { Honest, RoundFixing, RandomConsistent };

ProverKind prover_kind_from_string(const std::string& name);
std::string to_string(ProverKind kind);

/// Verifier-side state between rounds: next round index t (1..T+1), the
/// challenge values fixed so far, and the running claim s_{t-1}.
struct RoundState {
    std::size_t t;
    arith::Assignment asg;
    ExtElement claim;
};

struct RoundRecord {
    arith::Op op;
    arith::UnivariatePoly msg;
    ExtElement check;     // the verifier's recomputed QX_j S(X_j) value
    bool completed;       // false for the round that triggered a reject
    ExtElement challenge; // valid only when completed
    ExtElement claim;     // next claim s_t, valid only when completed
};

struct Transcript {
    int version = 1;
    std::uint64_t q = 0;
    field::IrreduciblePoly irr{};
    std::uint64_t seed = 0;
    std::size_t rounds_total = 0;
    std::string instance_digest;
    std::vector<RoundRecord> rounds;
    bool has_final_matrix = false;
    ExtElement final_matrix{};
    bool accepted = false;
    std::size_t fail_round = 0; // 0 = none; T+1 = failed final check
    std::string fail_reason;

    std::string to_string() const;
    static Transcript from_string(const std::string& text);
};

/// FNV-1a over the canonical instance text, 16 hex digits.
std::string instance_digest(const fo::Instance& inst);

struct StepOutcome {
    bool continued;
    ExtElement check;
    ExtElement challenge;  // valid when continued
    std::string reason;    // valid when rejected
};

/// One verifier round: degree check, operator application, claim comparison,
/// uniform challenge from GF(q^4), state update.
StepOutcome verifier_step(RoundState& state, const ProtocolParams& params,
                          const fo::Instance& inst, const arith::UnivariatePoly& msg, Rng& rng);

/// Accept iff the matrix polynomial at the collected challenges equals the
/// final claim.
bool final_check(const RoundState& state, const fo::Instance& inst,
                 const field::ExtContext& ctx, ExtElement* matrix_value = nullptr);

/// Prover message for round state.t. Honest sends the exact restriction;
/// RoundFixing adjusts one anchor value so the round check passes;
/// RandomConsistent fills non-anchor values with seeded random elements.
arith::UnivariatePoly prover_message(ProverKind kind, const RoundState& state,
                                     const fo::Instance& inst, const ProtocolParams& params,
                                     arith::ChainEvaluator& eval, Rng& prover_rng);

Transcript run_protocol(const fo::Instance& inst, ProverKind prover, std::uint64_t seed,
                        std::uint64_t q_min = 0);

struct VerifyResult {
    bool well_formed = false;        // parses, digest matches, field valid
    bool verdict_reproduced = false; // replay reaches the recorded verdict
    bool challenge_divergence = false; // seed re-derivation disagrees
    bool accepted = false;           // replayed verdict
    std::string diagnostic;

    bool ok() const { return well_formed && verdict_reproduced && !challenge_divergence; }
};

VerifyResult verify_transcript(const fo::Instance& inst, const Transcript& transcript);

struct ExperimentResult {
    std::size_t trials = 0;
    std::size_t accepts = 0;
    double rate = 0.0;
    std::uint64_t q = 0;
    std::vector<std::uint8_t> verdicts; // per trial
};

/// Monte-Carlo soundness run; rejects true instances (misuse). Per-trial
/// seeds derive from (master_seed, trial index), so the result is
/// independent of execution order.
ExperimentResult soundness_experiment(const fo::Instance& inst, ProverKind prover,
                                      std::size_t trials, std::uint64_t master_seed,
                                      std::uint64_t q_min = 0);

} // namespace mcip::protocol
