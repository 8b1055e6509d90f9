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

#include "ssbi/abc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "ssbi/error.hpp"
#include "ssbi/parallel.hpp"

namespace ssbi {

void AbcConfig::validate() const {
  if (!(acceptance_rate > 0.0 && acceptance_rate < 1.0)) {
    throw ConfigError("abc acceptance rate must lie in (0, 1)");
  }
  if (!(bandwidth > 0.0)) throw ConfigError("kde bandwidth must be positive");
  for (double b : bandwidths) {
    if (!(b > 0.0)) throw ConfigError("kde bandwidths must be positive");
  }
}

std::size_t abc_accept_count(std::size_t n, double rate) {
  // Guard against products such as 0.002 * 1e5 landing just above an integer.
  const double raw = rate * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

std::vector<double> signal_distances(std::span<const double> observed, std::span<const float> signals,
                                     std::size_t n, unsigned threads) {
  const std::size_t len = observed.size();
  if (signals.size() != n * len) throw ShapeError("signal block does not match the observed length");
  std::vector<double> dist(n);
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const float* row = signals.data() + i * len;
      double s = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        const double diff = static_cast<double>(row[k]) - observed[k];
        s += diff * diff;
      }
      dist[i] = std::sqrt(s);
    }
  });
  return dist;
}

std::vector<std::size_t> abc_accept(std::span<const double> observed, std::span<const float> signals,
                                    std::size_t n, const AbcConfig& config) {
  config.validate();
  if (n == 0) throw std::invalid_argument("abc needs a non-empty dataset");
  const std::vector<double> dist = signal_distances(observed, signals, n, config.threads);
  const std::size_t k = abc_accept_count(n, config.acceptance_rate);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), closer);
  order.resize(k);
  std::sort(order.begin(), order.end(), closer);
  return order;
}

PosteriorSampleSet abc_posterior(std::span<const double> observed, const Dataset& data,
                                 const AbcConfig& config) {
  if (data.size() == 0) throw std::invalid_argument("abc needs a non-empty dataset");
  if (observed.size() != data.manifest.signal_len) {
    throw ShapeError("observed signal length " + std::to_string(observed.size()) +
                     " differs from the dataset (" + std::to_string(data.manifest.signal_len) + ")");
  }
  const std::vector<std::size_t> accepted = abc_accept(observed, data.signals, data.size(), config);
  const std::size_t d = data.dimension();
  PosteriorSampleSet out;
  out.param_names = data.manifest.param_names;
  out.param_ranges = data.manifest.param_ranges;
  out.samples.resize(static_cast<Eigen::Index>(accepted.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < accepted.size(); ++r) {
    const auto row = data.param_row(accepted[r]);
    for (std::size_t j = 0; j < d; ++j) {
      const ParamRange& range = data.manifest.param_ranges[j];
      out.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          std::clamp((row[j] - range.lo) / range.width(), 0.0, 1.0);
    }
  }
  out.log_probs.resize(accepted.size());
  std::vector<double> q(d);
  for (std::size_t r = 0; r < accepted.size(); ++r) {
    for (std::size_t j = 0; j < d; ++j) q[j] = out.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    out.log_probs[r] = kde_log_prob(out.samples, config.bandwidth, q);
  }
  return out;
}

double kde_log_prob(const nn::Matrix<double>& samples, double bandwidth, std::span<const double> query) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 1) throw std::invalid_argument("kde needs at least one sample");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde bandwidth must be positive");
  if (static_cast<Eigen::Index>(query.size()) != d) throw ShapeError("kde query dimension mismatch");
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * bandwidth * bandwidth);
  std::vector<double> terms(static_cast<std::size_t>(n));
  double peak = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double diff = query[static_cast<std::size_t>(j)] - samples(i, j);
      s += diff * diff;
    }
    terms[static_cast<std::size_t>(i)] = -s * inv2h2;
    peak = std::max(peak, terms[static_cast<std::size_t>(i)]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return norm + peak + std::log(acc) - std::log(static_cast<double>(n));
}

double kde_log_prob_averaged(const nn::Matrix<double>& samples, std::span<const double> bandwidths,
                             std::span<const double> query) {
  if (bandwidths.empty()) throw std::invalid_argument("bandwidth list is empty");
  double total = 0.0;
  for (double b : bandwidths) total += kde_log_prob(samples, b, query);
  return total / static_cast<double>(bandwidths.size());
}

std::size_t kde_map_index(const nn::Matrix<double>& samples, double bandwidth) {
  if (samples.rows() < 1) throw std::invalid_argument("kde needs at least one sample");
  std::size_t best = 0;
  double best_lp = -std::numeric_limits<double>::infinity();
  std::vector<double> q(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) q[static_cast<std::size_t>(j)] = samples(i, j);
    const double lp = kde_log_prob(samples, bandwidth, q);
    if (lp > best_lp) {
      best_lp = lp;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

std::vector<double> kde_map(const nn::Matrix<double>& samples, double bandwidth) {
  const std::size_t i = kde_map_index(samples, bandwidth);
  const auto row = samples.row(static_cast<Eigen::Index>(i));
  return {row.data(), row.data() + row.size()};
}

}  // namespace ssbi
