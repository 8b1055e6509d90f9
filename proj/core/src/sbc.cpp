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

#include "ssbi/sbc.hpp"

#include <random>
#include <stdexcept>

#include "ssbi/stats.hpp"

namespace ssbi {

SbcResult sbc_calibration(const PosteriorSampler& sampler, const ForwardPipeline& pipeline,
                          std::size_t dimension, std::size_t n_trials, std::size_t n_draws, Rng& rng) {
  if (n_trials < 100) throw std::invalid_argument("sbc needs at least 100 trials");
  if (n_draws < 1 || dimension < 1) throw std::invalid_argument("sbc needs draws and dimensions");
  SbcResult result;
  result.n_draws = n_draws;
  result.ranks.assign(dimension, std::vector<std::size_t>(n_trials, 0));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> truth(dimension);
  for (std::size_t t = 0; t < n_trials; ++t) {
    for (double& v : truth) v = uniform(rng);
    const std::vector<double> zeta = pipeline(truth, rng);
    const nn::Matrix<double> draws = sampler(zeta, n_draws, rng);
    if (draws.rows() != static_cast<Eigen::Index>(n_draws) ||
        draws.cols() != static_cast<Eigen::Index>(dimension)) {
      throw std::invalid_argument("sbc sampler returned the wrong shape");
    }
    for (std::size_t j = 0; j < dimension; ++j) {
      std::size_t rank = 0;
      for (Eigen::Index i = 0; i < draws.rows(); ++i) {
        if (draws(i, static_cast<Eigen::Index>(j)) < truth[j]) ++rank;
      }
      result.ranks[j][t] = rank;
    }
  }
  for (std::size_t j = 0; j < dimension; ++j) {
    std::vector<double> u(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t) {
      u[t] = (static_cast<double>(result.ranks[j][t]) + 0.5) / static_cast<double>(n_draws + 1);
    }
    result.p_values.push_back(ks_uniform(u).p_value);
  }
  return result;
}

SbcResult sbc_calibration(const MafFlow<float>& flow, const ForwardPipeline& pipeline,
                          std::size_t n_trials, std::size_t n_draws, Rng& rng) {
  if (!flow.trained()) throw std::invalid_argument("sbc refuses an untrained flow");
  // The latent is integrated out: every posterior draw gets its own z.
  const PosteriorSampler sampler = [&flow](std::span<const double> zeta, std::size_t n, Rng& r) {
    std::normal_distribution<double> normal;
    std::vector<double> z(flow.config().latent_dim);
    nn::Matrix<double> out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(flow.config().param_dim));
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (double& v : z) v = normal(r);
      out.row(i) = flow.sample(zeta, z, 1, r).samples.row(0);
    }
    return out;
  };
  return sbc_calibration(sampler, pipeline, flow.config().param_dim, n_trials, n_draws, rng);
}

}  // namespace ssbi
