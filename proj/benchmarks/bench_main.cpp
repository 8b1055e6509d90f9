/*
 * Copyright (c) 2026 The scatter-sbi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ssbi/abc.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/inplane.hpp"
#include "ssbi/maf.hpp"
#include "ssbi/optics.hpp"
#include "ssbi/prior.hpp"
#include "ssbi/simulate.hpp"

namespace {

using namespace ssbi;

PriorSpec three_layers(const ExperimentGeometry& g) {
  return PriorSpec::from_materials(default_material_sequence(3), silicon_substrate(g.wavelength));
}

void BM_Parratt(benchmark::State& state) {
  const ExperimentGeometry g = desk_geometry();
  const PriorSpec prior = three_layers(g);
  Rng rng = make_stream(1, 0);
  const MultilayerSample sample = prior.to_sample(sample_prior(prior, rng));
  double angle = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parratt_amplitudes(sample, angle, g.wavelength));
    angle = angle < 0.01 ? angle + 1e-5 : 0.001;
  }
}
BENCHMARK(BM_Parratt);

void BM_SimulateDeskImage(benchmark::State& state) {
  const ExperimentGeometry g = desk_geometry();
  const PriorSpec prior = three_layers(g);
  Rng rng = make_stream(2, 0);
  const MultilayerSample sample = prior.to_sample(sample_prior(prior, rng));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_image(sample, g));
}
BENCHMARK(BM_SimulateDeskImage)->Unit(benchmark::kMillisecond);

void BM_ExtractSignal(benchmark::State& state) {
  const ExperimentGeometry g = desk_geometry();
  const PriorSpec prior = three_layers(g);
  Rng rng = make_stream(3, 0);
  const DetectorImage image = simulate_image(prior.to_sample(sample_prior(prior, rng)), g);
  const SignalConfig config = desk_signal_config();
  for (auto _ : state) benchmark::DoNotOptimize(extract_inplane(image, config));
}
BENCHMARK(BM_ExtractSignal);

void BM_FlowSample(benchmark::State& state) {
  FlowConfig c;
  c.param_dim = 18;
  c.signal_len = 90;
  MafFlow<float> flow(c, 4);
  const std::vector<double> zeta(90, 0.5), z(c.latent_dim, 0.0);
  Rng rng = make_stream(4, 1);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flow.sample(zeta, z, n, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FlowSample)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_AbcAccept(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t len = 90;
  std::vector<float> signals(n * len);
  Rng rng = make_stream(5, 0);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& v : signals) v = u(rng);
  const std::vector<double> observed(len, 0.5);
  const AbcConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(abc_accept(observed, signals, n, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AbcAccept)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_KdeLogProb(benchmark::State& state) {
  nn::Matrix<double> samples(state.range(0), 18);
  Rng rng = make_stream(6, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < samples.size(); ++i) samples.data()[i] = u(rng);
  const std::vector<double> query(18, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(kde_log_prob(samples, 0.2, query));
}
BENCHMARK(BM_KdeLogProb)->Arg(20)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
