#include <benchmark/benchmark.h>

#include "mcip/oracle.hpp"
#include "mcip/protocol.hpp"

using namespace mcip;

namespace {

fo::Instance bench_instance() {
    return fo::parse_instance("vocab E/2\nuniverse 3\nrel E: (0,1) (1,2) (2,0) (1,1)\n"
                              "formula: ALL x . EX y . ( E(x,y) | x = y )\n");
}

void BM_ext_mul(benchmark::State& state) {
    field::PrimeModulus mod(5);
    Rng rng(1);
    field::ExtContext ctx(mod, field::find_irreducible(mod, rng));
    field::ExtElement a = ctx.element_at(413), b = ctx.element_at(287);
    for (auto _ : state) {
        a = ctx.mul(a, b);
        benchmark::DoNotOptimize(a);
    }
}
BENCHMARK(BM_ext_mul);

void BM_ext_inv(benchmark::State& state) {
    field::PrimeModulus mod(5);
    Rng rng(1);
    field::ExtContext ctx(mod, field::find_irreducible(mod, rng));
    field::ExtElement a = ctx.element_at(413);
    for (auto _ : state) benchmark::DoNotOptimize(ctx.inv(a));
}
BENCHMARK(BM_ext_inv);

void BM_model_check(benchmark::State& state) {
    fo::Instance inst = bench_instance();
    for (auto _ : state) benchmark::DoNotOptimize(oracle::model_check(inst));
}
BENCHMARK(BM_model_check);

void BM_chain_eval_root(benchmark::State& state) {
    fo::Instance inst = bench_instance();
    auto params = protocol::choose_params(inst, 0);
    for (auto _ : state) {
        arith::ChainEvaluator eval(inst, *params.ctx, params.schedule);
        arith::Assignment empty(inst.k());
        benchmark::DoNotOptimize(eval.chain_eval(0, empty));
    }
}
BENCHMARK(BM_chain_eval_root);

void BM_restrict_univariate(benchmark::State& state) {
    fo::Instance inst = bench_instance();
    auto params = protocol::choose_params(inst, 0);
    arith::ChainEvaluator eval(inst, *params.ctx, params.schedule);
    arith::Assignment asg(inst.k());
    for (auto _ : state)
        benchmark::DoNotOptimize(eval.restrict_univariate(1, asg, params.schedule.ops[0].var));
}
BENCHMARK(BM_restrict_univariate);

void BM_honest_run(benchmark::State& state) {
    fo::Instance inst = bench_instance();
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(protocol::run_protocol(inst, protocol::ProverKind::Honest, seed++));
}
BENCHMARK(BM_honest_run);

void BM_round_fixing_run(benchmark::State& state) {
    fo::Instance inst = fo::parse_instance("vocab E/2\nuniverse 3\nrel E: (0,1)\n"
                                           "formula: ALL x . EX y . E(x,y)\n");
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            protocol::run_protocol(inst, protocol::ProverKind::RoundFixing, seed++));
}
BENCHMARK(BM_round_fixing_run);

} // namespace

BENCHMARK_MAIN();
