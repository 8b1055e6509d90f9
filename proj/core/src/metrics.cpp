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

#include "ssbi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>

#include "ssbi/error.hpp"

namespace ssbi {

std::vector<double> test_log_probs(const LogDensityEstimator& estimator, std::span<const TestItem> items) {
  if (items.empty()) throw std::invalid_argument("test set is empty");
  std::vector<double> out;
  out.reserve(items.size());
  for (const TestItem& item : items) out.push_back(estimator(item.y, item.zeta));
  return out;
}

double test_log_prob(const LogDensityEstimator& estimator, std::span<const TestItem> items) {
  const std::vector<double> lps = test_log_probs(estimator, items);
  double total = 0.0;
  for (double v : lps) total += v;
  return total / static_cast<double>(lps.size());
}

std::vector<TestItem> test_items(const Dataset& data, std::span<const std::size_t> indices) {
  std::vector<TestItem> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    TestItem item;
    const auto p = data.param_row(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const ParamRange& r = data.manifest.param_ranges[j];
      item.y.push_back(std::clamp((p[j] - r.lo) / r.width(), 0.0, 1.0));
    }
    const auto s = data.signal_row(i);
    item.zeta.assign(s.begin(), s.end());
    out.push_back(std::move(item));
  }
  return out;
}

LogDensityEstimator flow_estimator(const MafFlow<float>& flow, std::uint64_t seed, std::size_t n_latent) {
  if (n_latent == 0) throw std::invalid_argument("flow_estimator needs at least one latent draw");
  auto rng = std::make_shared<Rng>(make_stream(seed, 0, salt::kLatent));
  return [&flow, rng, n_latent](std::span<const double> y, std::span<const double> zeta) {
    std::normal_distribution<double> normal;
    std::vector<double> z(flow.config().latent_dim);
    std::vector<double> lp(n_latent);
    for (double& l : lp) {
      for (double& v : z) v = normal(*rng);
      l = maf_log_prob(flow, y, zeta, z);
    }
    const double top = *std::max_element(lp.begin(), lp.end());
    if (!std::isfinite(top)) return top;
    double sum = 0.0;
    for (double l : lp) sum += std::exp(l - top);
    return top + std::log(sum / static_cast<double>(n_latent));
  };
}

LogDensityEstimator abc_kde_estimator(const Dataset& reference, const AbcConfig& config) {
  return [&reference, config](std::span<const double> y, std::span<const double> zeta) {
    const PosteriorSampleSet accepted = abc_posterior(zeta, reference, config);
    if (!config.bandwidths.empty()) return kde_log_prob_averaged(accepted.samples, config.bandwidths, y);
    return kde_log_prob(accepted.samples, config.bandwidth, y);
  };
}

double normalized_mae(std::span<const double> estimate, std::span<const double> reference,
                      std::span<const ParamRange> ranges) {
  if (estimate.size() != reference.size() || estimate.size() != ranges.size()) {
    throw ShapeError("normalized_mae: vector lengths differ");
  }
  if (estimate.empty()) throw ShapeError("normalized_mae: empty vectors");
  double total = 0.0;
  for (std::size_t j = 0; j < estimate.size(); ++j) {
    if (!(ranges[j].hi > ranges[j].lo)) throw std::domain_error("normalized_mae: degenerate range");
    total += std::abs(estimate[j] - reference[j]) / ranges[j].width();
  }
  return total / static_cast<double>(estimate.size());
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Merge the quantile breakpoints k/n and l/m and integrate |Qa - Qb|.
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double t = 0.0, total = 0.0;
  while (i < a.size() && j < b.size()) {
    const double next_a = static_cast<double>(i + 1) / n;
    const double next_b = static_cast<double>(j + 1) / m;
    const double next = std::min(next_a, next_b);
    total += (next - t) * std::abs(a[i] - b[j]);
    t = next;
    // Compare through cross-multiplication so equal breakpoints advance together.
    const auto ka = static_cast<unsigned long long>(i + 1) * b.size();
    const auto kb = static_cast<unsigned long long>(j + 1) * a.size();
    if (ka <= kb) ++i;
    if (kb <= ka) ++j;
  }
  return total;
}

double wasserstein_marginals(const nn::Matrix<double>& a, const nn::Matrix<double>& b) {
  if (a.rows() < 1 || b.rows() < 1) throw std::invalid_argument("wasserstein_marginals: empty sample set");
  if (a.cols() != b.cols()) throw ShapeError("wasserstein_marginals: dimensions differ");
  double total = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    std::vector<double> ca(static_cast<std::size_t>(a.rows())), cb(static_cast<std::size_t>(b.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) ca[static_cast<std::size_t>(i)] = a(i, j);
    for (Eigen::Index i = 0; i < b.rows(); ++i) cb[static_cast<std::size_t>(i)] = b(i, j);
    total += wasserstein_1d(std::move(ca), std::move(cb));
  }
  return total / static_cast<double>(a.cols());
}

std::vector<double> flow_map(const MafFlow<float>& flow, std::span<const double> zeta, std::size_t n, Rng& rng,
                             std::size_t n_latent) {
  if (n == 0 || n_latent == 0) throw std::invalid_argument("flow_map needs draws and latent samples");
  const FlowConfig& c = flow.config();
  const auto d = static_cast<Eigen::Index>(c.param_dim);
  const auto len = static_cast<Eigen::Index>(c.signal_len);
  const auto latent = static_cast<Eigen::Index>(c.latent_dim);
  std::normal_distribution<double> normal;
  std::vector<double> z(c.latent_dim);
  nn::Matrix<double> draws(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    for (double& v : z) v = normal(rng);
    draws.row(i) = flow.sample(zeta, z, 1, rng).samples.row(0);
  }
  // Marginal density of every draw over one shared set of latents.
  nn::Matrix<float> shared(static_cast<Eigen::Index>(n_latent), latent);
  for (Eigen::Index i = 0; i < shared.size(); ++i) shared.data()[i] = static_cast<float>(normal(rng));
  FlowBatch<float> batch;
  const auto rows = static_cast<Eigen::Index>(n * n_latent);
  batch.y.resize(rows, d);
  batch.zeta.resize(rows, len);
  batch.z.resize(rows, latent);
  for (Eigen::Index k = 0; k < len; ++k) batch.zeta.col(k).setConstant(static_cast<float>(zeta[static_cast<std::size_t>(k)]));
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n_latent); ++k) {
      batch.y.row(i * static_cast<Eigen::Index>(n_latent) + k) = draws.row(i).cast<float>();
      batch.z.row(i * static_cast<Eigen::Index>(n_latent) + k) = shared.row(k);
    }
  }
  const std::vector<double> lp = flow.log_prob(batch);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto first = lp.begin() + static_cast<std::ptrdiff_t>(i * n_latent);
    const double top = *std::max_element(first, first + static_cast<std::ptrdiff_t>(n_latent));
    double sum = 0.0;
    for (std::size_t k = 0; k < n_latent; ++k) sum += std::exp(first[static_cast<std::ptrdiff_t>(k)] - top);
    const double value = top + std::log(sum);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  const auto row = draws.row(static_cast<Eigen::Index>(best));
  return {row.data(), row.data() + row.size()};
}

}  // namespace ssbi
