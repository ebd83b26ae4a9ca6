// Serial reference vs OpenMP paths of the two hot kernels: the Gram matrix
// and the KIIM-HT loss gradient. Thread count follows OMP_NUM_THREADS.

#include "kdm/kernel.hpp"
#include "kdm/projection_net.hpp"
#include "kdm/random.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace kdm;

Matrix random_points(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

KernelConfig kernel_for(const Matrix& p) {
  KernelConfig c;
  c.length_scale = median_heuristic(p);
  return c;
}

void BM_GramSerial(benchmark::State& st) {
  const Matrix p = random_points(st.range(0), 1, 1);
  const KernelConfig c = kernel_for(p);
  for (auto _ : st) benchmark::DoNotOptimize(gram_serial(p, c));
}

void BM_GramParallel(benchmark::State& st) {
  const Matrix p = random_points(st.range(0), 1, 1);
  const KernelConfig c = kernel_for(p);
  for (auto _ : st) benchmark::DoNotOptimize(gram(p, c));
}

struct LossProblem {
  ProjectionNetwork net;
  EmbeddingSet emb;
  Matrix x;
};

// Sizes match the scalar experiments: n samples, r = 100, h = 20.
LossProblem loss_problem(Index n) {
  LossProblem p;
  p.x = random_points(n, 1, 2);
  const Matrix K = gram(p.x, kernel_for(p.x));
  p.emb = conditional_embeddings(K, K, 1e-3);
  p.net = init_network(1, 20, 100, n, 3);
  return p;
}

void BM_LossGradSerial(benchmark::State& st) {
  const LossProblem p = loss_problem(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(loss_grad_serial(p.net, p.emb, LossConfig{}, p.x));
}

void BM_LossGradParallel(benchmark::State& st) {
  const LossProblem p = loss_problem(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(loss_grad(p.net, p.emb, LossConfig{}, p.x));
}

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(100)->Arg(400)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GramParallel)->Arg(100)->Arg(400)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LossGradSerial)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossGradParallel)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
