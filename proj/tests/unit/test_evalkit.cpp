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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "oracles.hpp"
#include "ssbi/abc.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/error.hpp"
#include "ssbi/inplane.hpp"
#include "ssbi/metrics.hpp"
#include "ssbi/optics.hpp"
#include "ssbi/prior.hpp"
#include "ssbi/sbc.hpp"
#include "ssbi/simulate.hpp"
#include "ssbi/speedup.hpp"
#include "ssbi/stats.hpp"

namespace ssbi {
namespace {

TEST(TestLogProb, UniformDensityIsZero) {
  const LogDensityEstimator uniform = [](std::span<const double> y, std::span<const double>) {
    for (double v : y) {
      if (v < 0.0 || v > 1.0) return -std::numeric_limits<double>::infinity();
    }
    return 0.0;
  };
  std::vector<TestItem> items(10, TestItem{{0.2, 0.4, 0.9}, {1.0}});
  EXPECT_EQ(test_log_prob(uniform, items), 0.0);
  EXPECT_THROW(test_log_prob(uniform, std::vector<TestItem>{}), std::invalid_argument);
}

TEST(TestLogProb, SingleItemIsItsOwnValue) {
  const LogDensityEstimator f = [](std::span<const double> y, std::span<const double> zeta) { return y[0] * zeta[0] - 3.0; };
  const std::vector<TestItem> one{TestItem{{0.5}, {4.0}}};
  EXPECT_EQ(test_log_prob(f, one), -1.0);
  EXPECT_EQ(test_log_probs(f, one), std::vector<double>{-1.0});
}

TEST(TestLogProb, FlowAgreesWithQuadratureNormalizedDensity) {
  FlowConfig c;
  c.param_dim = 1;
  c.signal_len = 2;
  c.latent_dim = 2;
  c.n_transforms = 3;
  c.hidden = 8;
  c.embed_hidden = 8;
  c.context_dim = 4;
  c.logit_transform = false;
  MafFlow<double> flow(c, 3);
  Rng rng = make_stream(3, 0);
  testing::randomize(flow.parameters(), rng, 0.15);
  const std::vector<double> zeta{0.4, -0.2}, z{0.0, 0.5};
  const LogDensityEstimator est = [&](std::span<const double> y, std::span<const double> s) {
    return maf_log_prob(flow, y, s, z);
  };
  double integral = 0.0;
  const double h = 12.0 / 6000.0;
  for (int k = 0; k <= 6000; ++k) {
    const double y = -6.0 + h * k;
    integral += (k == 0 || k == 6000 ? 0.5 : 1.0) * std::exp(est(std::vector<double>{y}, zeta)) * h;
  }
  EXPECT_NEAR(std::log(integral), 0.0, 1e-3);
  const std::vector<TestItem> items{TestItem{{-1.0}, zeta}, TestItem{{0.7}, zeta}};
  const double expected = 0.5 * (est(std::vector<double>{-1.0}, zeta) + est(std::vector<double>{0.7}, zeta));
  EXPECT_NEAR(test_log_prob(est, items), expected, 1e-12);
}

TEST(NormalizedMae, Examples) {
  const std::vector<ParamRange> r{{0.0, 10.0}, {0.0, 10.0}};
  EXPECT_EQ(normalized_mae(std::vector<double>{2, 4}, std::vector<double>{2, 4}, r), 0.0);
  EXPECT_NEAR(normalized_mae(std::vector<double>{3, 6}, std::vector<double>{2, 4}, r), 0.15, 1e-15);
  // Affine re-parameterization y -> 5 y + 1 applied to values and ranges.
  const std::vector<ParamRange> r2{{1.0, 51.0}, {1.0, 51.0}};
  EXPECT_NEAR(normalized_mae(std::vector<double>{16, 31}, std::vector<double>{11, 21}, r2), 0.15, 1e-15);
  EXPECT_THROW(normalized_mae(std::vector<double>{1}, std::vector<double>{1}, std::vector<ParamRange>{{1.0, 1.0}}),
               std::domain_error);
  EXPECT_THROW(normalized_mae(std::vector<double>{1, 2}, std::vector<double>{1}, r), ShapeError);
}

TEST(NormalizedMae, BoundedInsideRanges) {
  Rng rng = make_stream(4, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<ParamRange> r(5, ParamRange{-2.0, 3.0});
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(5), b(5);
    for (std::size_t k = 0; k < 5; ++k) {
      a[k] = -2.0 + 5.0 * u(rng);
      b[k] = -2.0 + 5.0 * u(rng);
    }
    const double m = normalized_mae(a, b, r);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
  }
}

TEST(Wasserstein, Examples) {
  EXPECT_EQ(wasserstein_1d({0.3, 0.1, 0.7}, {0.7, 0.3, 0.1}), 0.0);
  EXPECT_EQ(wasserstein_1d({0.0}, {1.0}), 1.0);
  nn::Matrix<double> a(2, 2), b(3, 2);
  a << 0, 0, 1, 1;
  b << 0, 2, 0.5, 2, 1, 2;
  // Column 0: {0,1} vs {0,.5,1} -> 1/6; column 1: {0,1} vs {2,2,2} -> 1.5.
  EXPECT_NEAR(wasserstein_marginals(a, b), (1.0 / 6.0 + 1.5) / 2.0, 1e-14);
}

TEST(Wasserstein, MatchesTransportLp) {
  EXPECT_LT(testing::w1_vs_lp(40, 5), 1e-8);
}

TEST(Wasserstein, MetricProperties) {
  Rng rng = make_stream(6, 0);
  std::normal_distribution<double> n;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(7 + t % 5), b(11), c(4 + t % 9);
    for (double& x : a) x = n(rng);
    for (double& x : b) x = 0.5 * n(rng) + 1.0;
    for (double& x : c) x = 2.0 * n(rng);
    const double ab = wasserstein_1d(a, b), ba = wasserstein_1d(b, a);
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_LE(ab, wasserstein_1d(a, c) + wasserstein_1d(c, b) + 1e-12);
  }
}

TEST(Kolmogorov, SurvivalValues) {
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_survival(0.5), 0.96394524, 1e-7);
  EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 2e-4);
  EXPECT_NEAR(kolmogorov_survival(0.0), 1.0, 1e-15);
  EXPECT_LT(kolmogorov_survival(5.0), 1e-20);
}

TEST(Kolmogorov, UniformTest) {
  std::vector<double> grid(500);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (i + 0.5) / 500.0;
  const KsResult g = ks_uniform(grid);
  EXPECT_NEAR(g.statistic, 0.001, 1e-12);
  EXPECT_GT(g.p_value, 0.99);
  std::vector<double> squeezed(500);
  for (std::size_t i = 0; i < squeezed.size(); ++i) squeezed[i] = 0.5 * grid[i];
  EXPECT_NEAR(ks_uniform(squeezed).statistic, 0.5, 1e-3);
  EXPECT_LT(ks_uniform(squeezed).p_value, 1e-10);
}

TEST(Sbc, PriorAsPosteriorIsCalibrated) {
  const PosteriorSampler prior = [](std::span<const double>, std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    nn::Matrix<double> m(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  const ForwardPipeline pipeline = [](std::span<const double> y, Rng&) { return std::vector<double>(y.begin(), y.end()); };
  Rng rng = make_stream(7, 0);
  const SbcResult r = sbc_calibration(prior, pipeline, 3, 200, 100, rng);
  ASSERT_EQ(r.ranks.size(), 3u);
  for (const auto& dim : r.ranks) {
    EXPECT_EQ(dim.size(), 200u);
    for (std::size_t v : dim) EXPECT_LE(v, 100u);
  }
  for (double p : r.p_values) EXPECT_GT(p, 0.01);
}

TEST(Sbc, ConstantPosteriorFails) {
  const PosteriorSampler constant = [](std::span<const double>, std::size_t n, Rng&) {
    return nn::Matrix<double>::Constant(static_cast<Eigen::Index>(n), 2, 0.999999);
  };
  const ForwardPipeline pipeline = [](std::span<const double> y, Rng&) { return std::vector<double>(y.begin(), y.end()); };
  Rng rng = make_stream(8, 0);
  const SbcResult r = sbc_calibration(constant, pipeline, 2, 150, 50, rng);
  for (double p : r.p_values) EXPECT_LT(p, 1e-6);
  EXPECT_THROW(sbc_calibration(constant, pipeline, 2, 99, 50, rng), std::invalid_argument);
}

TEST(Sbc, RefusesUntrainedFlow) {
  FlowConfig c;
  c.param_dim = 2;
  c.signal_len = 2;
  const MafFlow<float> flow(c, 1);
  const ForwardPipeline pipeline = [](std::span<const double> y, Rng&) { return std::vector<double>(y.begin(), y.end()); };
  Rng rng = make_stream(9, 0);
  EXPECT_THROW(sbc_calibration(flow, pipeline, 100, 10, rng), std::invalid_argument);
}

TEST(FlowMap, SeededPointInsideTheCube) {
  FlowConfig c;
  c.param_dim = 2;
  c.signal_len = 3;
  c.latent_dim = 2;
  c.n_transforms = 2;
  c.hidden = 8;
  MafFlow<float> flow(c, 10);
  Rng rng = make_stream(10, 0);
  testing::randomize(flow.parameters(), rng, 0.3);
  const std::vector<double> zeta{0.1, 0.2, 0.3};
  Rng a = make_stream(1, 0), b = make_stream(1, 0);
  const std::vector<double> map = flow_map(flow, zeta, 300, a);
  EXPECT_EQ(map, flow_map(flow, zeta, 300, b));
  ASSERT_EQ(map.size(), 2u);
  for (double v : map) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_THROW(flow_map(flow, zeta, 0, a), std::invalid_argument);
}

// A flow whose conditioners are switched off is a diagonal Gaussian in logit
// space with a known mode, so its MAP must land near that mode.
TEST(FlowMap, FindsTheModeOfAKnownDensity) {
  FlowConfig c;
  c.param_dim = 1;
  c.signal_len = 1;
  c.latent_dim = 1;
  c.n_transforms = 1;
  c.hidden = 4;
  c.embed_hidden = 4;
  c.context_dim = 2;
  MafFlow<float> flow(c, 12);
  flow.parameters().find("base.mean.bias").value.setConstant(0.8f);
  flow.parameters().find("base.logvar.bias").value.setConstant(std::log(0.04f));
  // Mode of logistic-normal(0.8, 0.2) in y: solve d/dy [log N(logit y) - log y(1-y)] = 0.
  double lo = 0.5, hi = 0.9;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double x = std::log(mid / (1.0 - mid));
    const double slope = -(x - 0.8) / 0.04 / (mid * (1.0 - mid)) - 1.0 / mid + 1.0 / (1.0 - mid);
    (slope > 0 ? lo : hi) = mid;
  }
  Rng rng = make_stream(12, 1);
  const std::vector<double> map = flow_map(flow, std::vector<double>{0.0}, 4000, rng);
  EXPECT_NEAR(map[0], lo, 0.01);
}

TEST(Speedup, ReportSchema) {
  FlowConfig fc;
  fc.param_dim = 18;
  fc.signal_len = 90;
  fc.hidden = 16;
  fc.n_transforms = 2;
  const MafFlow<float> flow(fc, 11);
  GenerationRequest req;
  req.geometry = desk_geometry();
  req.prior = PriorSpec::from_materials(default_material_sequence(3), silicon_substrate(req.geometry.wavelength));
  req.signal = desk_signal_config();
  req.n = 30;
  req.seed = 2;
  testing::ScratchDir dir("speed");
  generate_dataset(req, dir.path());
  const Dataset reuse = read_dataset(dir.path());
  const auto obs = reuse.signal_row(3);
  SpeedupOptions opt;
  opt.flow_draws = 200;
  opt.repetitions = 2;
  const SpeedupReport r = benchmark_speedup(flow, AbcConfig{}, req, reuse, std::vector<double>(obs.begin(), obs.end()), opt);
  const nlohmann::json j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j.at("timings").size(), 3u);
  EXPECT_EQ(j.at("ratios").size(), 2u);
  EXPECT_GE(r.abc_cold_seconds, r.abc_reuse_seconds);
  EXPECT_GT(r.flow_seconds, 0.0);
  EXPECT_NEAR(r.cold_over_flow, r.abc_cold_seconds / r.flow_seconds, 1e-12);
}

}  // namespace
}  // namespace ssbi
