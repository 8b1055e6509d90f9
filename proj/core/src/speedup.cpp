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

#include "ssbi/speedup.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "ssbi/parallel.hpp"

namespace ssbi {

std::string SpeedupReport::to_json() const {
  nlohmann::json j;
  j["timings"] = {{"flow_seconds", flow_seconds},
                  {"abc_reuse_seconds", abc_reuse_seconds},
                  {"abc_cold_seconds", abc_cold_seconds}};
  j["ratios"] = {{"cold_over_flow", cold_over_flow}, {"reuse_over_flow", reuse_over_flow}};
  j["flow_draws"] = flow_draws;
  j["simulations"] = simulations;
  j["threads"] = threads;
  return j.dump(2);
}

namespace {

template <typename Fn>
double median_seconds(std::size_t repetitions, Fn&& fn) {
  std::vector<double> times;
  for (std::size_t r = 0; r < std::max<std::size_t>(repetitions, 1); ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn(r);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t m = times.size();
  return m % 2 == 1 ? times[m / 2] : 0.5 * (times[m / 2 - 1] + times[m / 2]);
}

}  // namespace

SpeedupReport benchmark_speedup(const MafFlow<float>& flow, const AbcConfig& abc,
                                const GenerationRequest& cold, const Dataset& reuse,
                                std::span<const double> observation, const SpeedupOptions& options) {
  if (cold.n == 0) throw std::invalid_argument("cold-start benchmark needs simulations");
  SpeedupReport report;
  report.flow_draws = options.flow_draws;
  report.simulations = cold.n;
  report.threads = std::max(cold.threads, abc.threads);

  report.flow_seconds = median_seconds(options.repetitions, [&](std::size_t r) {
    Rng rng = make_stream(cold.seed, r, salt::kLatent);
    std::normal_distribution<double> normal;
    std::vector<double> z(flow.config().latent_dim);
    for (double& v : z) v = normal(rng);
    const PosteriorSampleSet draws = flow.sample(observation, z, options.flow_draws, rng);
    if (draws.size() != options.flow_draws) throw std::logic_error("flow returned the wrong draw count");
  });

  report.abc_reuse_seconds = median_seconds(options.repetitions, [&](std::size_t) {
    abc_accept(observation, reuse.signals, reuse.size(), abc);
  });

  report.abc_cold_seconds = median_seconds(options.cold_repetitions, [&](std::size_t r) {
    GenerationRequest request = cold;
    request.seed = cold.seed + r;
    request.store_images = false;
    const std::size_t len = request.signal.signal_length(request.geometry.n_pixels_z);
    std::vector<float> signals(request.n * len);
    parallel_for(request.n, request.threads, [&](std::size_t i) {
      const DatasetRecord rec = simulate_record(request, i);
      std::copy(rec.signal.begin(), rec.signal.end(), signals.begin() + static_cast<std::ptrdiff_t>(i * len));
    });
    abc_accept(observation, signals, request.n, abc);
  });

  report.cold_over_flow = report.abc_cold_seconds / report.flow_seconds;
  report.reuse_over_flow = report.abc_reuse_seconds / report.flow_seconds;
  return report;
}

}  // namespace ssbi
