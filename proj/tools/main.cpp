#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mcip/oracle.hpp"
#include "mcip/protocol.hpp"

namespace {

constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

int cmd_check(const std::string& path) {
    mcip::fo::Instance inst = mcip::fo::parse_instance_file(path);
    std::cout << (mcip::oracle::model_check(inst) ? "true" : "false") << "\n";
    return 0;
}

int cmd_run(const std::string& path, const std::string& prover, std::uint64_t seed,
            std::uint64_t q_min, const std::string& out_path) {
    mcip::fo::Instance inst = mcip::fo::parse_instance_file(path);
    mcip::protocol::ProverKind kind = mcip::protocol::prover_kind_from_string(prover);
    mcip::protocol::Transcript tr = mcip::protocol::run_protocol(inst, kind, seed, q_min);
    std::string text = tr.to_string();
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << text;
    }
    std::cerr << "verdict: " << (tr.accepted ? "accept" : "reject");
    if (!tr.accepted) std::cerr << " (round " << tr.fail_round << ", " << tr.fail_reason << ")";
    std::cerr << "\n";
    return tr.accepted ? 0 : kExitReject;
}

int cmd_verify(const std::string& inst_path, const std::string& tr_path) {
    mcip::fo::Instance inst = mcip::fo::parse_instance_file(inst_path);
    mcip::protocol::Transcript tr = mcip::protocol::Transcript::from_string(slurp(tr_path));
    mcip::protocol::VerifyResult r = mcip::protocol::verify_transcript(inst, tr);
    if (!r.well_formed) {
        std::cerr << "error: " << r.diagnostic << "\n";
        return kExitUsage;
    }
    std::cout << "verdict " << (r.accepted ? "accept" : "reject") << " reproduced "
              << (r.verdict_reproduced ? "yes" : "no") << " challenge-divergence "
              << (r.challenge_divergence ? "yes" : "no") << "\n";
    if (!r.diagnostic.empty()) std::cerr << r.diagnostic << "\n";
    return r.verdict_reproduced ? 0 : kExitReject;
}

int cmd_experiment(const std::string& path, const std::string& prover, std::size_t trials,
                   std::uint64_t seed, std::uint64_t q_min) {
    mcip::fo::Instance inst = mcip::fo::parse_instance_file(path);
    mcip::protocol::ProverKind kind = mcip::protocol::prover_kind_from_string(prover);
    mcip::protocol::ExperimentResult res =
        mcip::protocol::soundness_experiment(inst, kind, trials, seed, q_min);
    double bound = 1.0 / static_cast<double>(res.q);
    double margin = 3.0 * std::sqrt(bound * (1.0 - bound) / static_cast<double>(res.trials));
    bool pass = res.rate <= bound + margin;
    std::cout << "trials " << res.trials << "\n";
    std::cout << "accepts " << res.accepts << "\n";
    std::cout << "rate " << fmt6(res.rate) << "\n";
    std::cout << "bound " << fmt6(bound) << "\n";
    std::cout << "margin " << fmt6(margin) << "\n";
    std::cout << "result " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : kExitReject;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"interactive proofs for first-order model checking"};
    app.require_subcommand(1);

    std::string instance_path, transcript_path, out_path;
    std::string prover = "honest";
    std::uint64_t seed = 0, q_min = 0;
    std::size_t trials = 2000;

    CLI::App* check = app.add_subcommand("check", "evaluate an instance with the oracle");
    check->add_option("instance", instance_path, "instance file")->required();

    CLI::App* run = app.add_subcommand("run", "run one protocol instance");
    run->add_option("instance", instance_path, "instance file")->required();
    run->add_option("--prover", prover, "honest|round-fixing|random-consistent");
    run->add_option("--seed", seed, "verifier/prover seed");
    run->add_option("--q-min", q_min, "force a larger field modulus");
    run->add_option("--out", out_path, "write the transcript here instead of stdout");

    CLI::App* verify = app.add_subcommand("verify", "replay a recorded transcript");
    verify->add_option("instance", instance_path, "instance file")->required();
    verify->add_option("transcript", transcript_path, "transcript file")->required();

    CLI::App* experiment = app.add_subcommand("experiment", "soundness experiment");
    experiment->add_option("instance", instance_path, "false instance file")->required();
    experiment->add_option("--prover", prover, "honest|round-fixing|random-consistent");
    experiment->add_option("--trials", trials, "number of independent protocol runs");
    experiment->add_option("--seed", seed, "master seed");
    experiment->add_option("--q-min", q_min, "force a larger field modulus");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (check->parsed()) return cmd_check(instance_path);
        if (run->parsed()) return cmd_run(instance_path, prover, seed, q_min, out_path);
        if (verify->parsed()) return cmd_verify(instance_path, transcript_path);
        return cmd_experiment(instance_path, prover, trials, seed, q_min);
    } catch (const mcip::fo::ParseError& e) {
        std::cerr << "error: " << instance_path << ":" << e.line << ":" << e.column << ": "
                  << e.message << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
