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
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ssbi/adamw.hpp"
#include "ssbi/checkpoint.hpp"
#include "ssbi/error.hpp"
#include "ssbi/maf.hpp"
#include "ssbi/trainer.hpp"

namespace ssbi {
namespace {

FlowConfig small_config(std::size_t dim, bool logit) {
  FlowConfig c;
  c.param_dim = dim;
  c.signal_len = 4;
  c.latent_dim = 3;
  c.n_transforms = 3;
  c.hidden = 16;
  c.embed_hidden = 10;
  c.context_dim = 6;
  c.logit_transform = logit;
  return c;
}

template <typename T>
FlowBatch<T> batch_of(const nn::Matrix<double>& y, Rng& rng, std::size_t signal_len, std::size_t latent) {
  std::normal_distribution<double> n;
  FlowBatch<T> b;
  b.y = y.cast<T>();
  b.zeta.resize(y.rows(), static_cast<Eigen::Index>(signal_len));
  b.z.resize(y.rows(), static_cast<Eigen::Index>(latent));
  for (Eigen::Index i = 0; i < b.zeta.size(); ++i) b.zeta.data()[i] = static_cast<T>(n(rng));
  for (Eigen::Index i = 0; i < b.z.size(); ++i) b.z.data()[i] = static_cast<T>(n(rng));
  return b;
}

TEST(Flow, IdentityInitIsStandardNormal) {
  MafFlow<double> flow(small_config(2, false), 1);
  const std::vector<double> zeta{0.3, -1.0, 2.0, 0.1}, z{0.5, 0.5, -0.2};
  EXPECT_NEAR(maf_log_prob(flow, std::vector<double>{0.0, 0.0}, zeta, z), -std::log(2.0 * std::numbers::pi), 1e-12);
  MafFlow<float> f32(small_config(2, false), 1);
  EXPECT_NEAR(maf_log_prob(f32, std::vector<double>{0.0, 0.0}, zeta, z), -1.837877, 1e-6);
}

TEST(Flow, HiddenDegreesAndPermutations) {
  const MafFlow<float> flow(small_config(5, true), 2);
  for (int m : flow.hidden_degrees()) {
    EXPECT_GE(m, 0);
    EXPECT_LT(m, 5);
  }
  EXPECT_EQ(flow.permutations()[0], (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(flow.permutations()[1], (std::vector<int>{4, 3, 2, 1, 0}));
}

TEST(Flow, QuadratureNormalization) {
  EXPECT_LT(testing::flow_normalization_1d(3), 1e-3);
  EXPECT_LT(testing::flow_normalization_2d(4), 1e-2);
}

TEST(Flow, LogitDensityIntegratesOverUnitInterval) {
  MafFlow<double> flow(small_config(1, true), 5);
  Rng rng = make_stream(5, 1);
  testing::randomize(flow.parameters(), rng, 0.15);
  const std::vector<double> zeta{0.1, 0.2, -0.3, 0.4}, z{1.0, 0.0, -1.0};
  // Midpoint rule in logit coordinates x, where dy = sigmoid'(x) dx.
  const std::size_t steps = 20000;
  const double lo = -20.0, hi = 20.0, h = (hi - lo) / steps;
  double acc = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double x = lo + h * (s + 0.5);
    const double y = 1.0 / (1.0 + std::exp(-x));
    acc += std::exp(maf_log_prob(flow, std::vector<double>{y}, zeta, z)) * y * (1.0 - y) * h;
  }
  EXPECT_NEAR(acc, 1.0, 1e-3);
}

TEST(Flow, AutoregressiveMasks) {
  EXPECT_EQ(testing::flow_autoregressive_violations(6), 0u);
}

TEST(Flow, Invertibility) {
  EXPECT_LT(testing::flow_invertibility(1000, 7), 1e-5);
}

TEST(Flow, InvertibilityFloat32) {
  MafFlow<float> flow(small_config(6, true), 8);
  Rng rng = make_stream(8, 1);
  testing::randomize(flow.parameters(), rng, 0.3);
  std::normal_distribution<double> n;
  nn::Matrix<float> base(1000, 6);
  for (Eigen::Index i = 0; i < base.size(); ++i) base.data()[i] = static_cast<float>(n(rng));
  const std::vector<double> zeta{1, 2, 3, 4}, z{0, 0, 1};
  const nn::Matrix<double> y = flow.from_base(base, zeta, z);
  FlowBatch<float> b;
  b.y = y.cast<float>();
  b.zeta = Eigen::RowVector4f(1, 2, 3, 4).replicate(1000, 1);
  b.z = Eigen::RowVector3f(0, 0, 1).replicate(1000, 1);
  const nn::Matrix<float> back = flow.to_base(b);
  // Rounding y to float32 next to the cube boundary is amplified by the
  // logit slope, so only interior draws are compared.
  std::size_t compared = 0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (y.row(i).minCoeff() < 1e-3 || y.row(i).maxCoeff() > 1.0 - 1e-3) continue;
    EXPECT_LT((back.row(i) - base.row(i)).cwiseAbs().maxCoeff(), 1e-3) << i;
    ++compared;
  }
  EXPECT_GT(compared, 500u);
}

TEST(Flow, CarriedLogProbsMatchRecomputation) {
  MafFlow<double> flow(small_config(4, true), 9);
  Rng rng = make_stream(9, 1);
  testing::randomize(flow.parameters(), rng, 0.3);
  const std::vector<double> zeta{0.5, -0.5, 0.25, 2.0}, z{0.1, 0.2, 0.3};
  Rng draw = make_stream(9, 2);
  const PosteriorSampleSet set = maf_sample(flow, zeta, z, 1000, draw);
  ASSERT_EQ(set.size(), 1000u);
  double worst = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto row = set.samples.row(static_cast<Eigen::Index>(i));
    const std::vector<double> y(row.data(), row.data() + row.size());
    worst = std::max(worst, std::abs(maf_log_prob(flow, y, zeta, z) - set.log_probs[i]));
    for (double v : y) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Flow, CarriedLogProbsFloat32) {
  MafFlow<float> flow(small_config(5, true), 10);
  Rng rng = make_stream(10, 1);
  testing::randomize(flow.parameters(), rng, 0.3);
  const std::vector<double> zeta{0.5, -0.5, 0.25, 2.0}, z{0.1, 0.2, 0.3};
  Rng draw = make_stream(10, 2);
  const PosteriorSampleSet set = flow.sample(zeta, z, 500, draw);
  double worst = 0.0;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto row = set.samples.row(static_cast<Eigen::Index>(i));
    if (row.minCoeff() < 1e-3 || row.maxCoeff() > 1.0 - 1e-3) continue;  // see InvertibilityFloat32
    const std::vector<double> y(row.data(), row.data() + row.size());
    worst = std::max(worst, std::abs(maf_log_prob(flow, y, zeta, z) - set.log_probs[i]));
    ++compared;
  }
  EXPECT_GT(compared, 250u);
  EXPECT_LT(worst, 1e-3);
}

TEST(Flow, IdentityFlowSamplesAreBaseDraws) {
  MafFlow<double> flow(small_config(2, false), 11);
  flow.parameters().find("base.mean.bias").value << 0.7, -1.2;
  const std::vector<double> zeta{0, 0, 0, 0}, z{0, 0, 0};
  Rng draw = make_stream(11, 0);
  const std::size_t n = 100000;
  const PosteriorSampleSet set = maf_sample(flow, zeta, z, n, draw);
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  EXPECT_LT(std::abs(set.samples.col(0).mean() - 0.7), 3.0 * se);
  EXPECT_LT(std::abs(set.samples.col(1).mean() + 1.2), 3.0 * se);
}

TEST(Flow, SamplingIsSeeded) {
  MafFlow<float> flow(small_config(3, true), 12);
  Rng rng = make_stream(12, 1);
  testing::randomize(flow.parameters(), rng, 0.2);
  const std::vector<double> zeta{1, 1, 1, 1}, z{0, 1, 0};
  Rng a = make_stream(3, 3), b = make_stream(3, 3);
  EXPECT_EQ(flow.sample(zeta, z, 50, a).samples, flow.sample(zeta, z, 50, b).samples);
}

TEST(NfLoss, SingleItemAndBatchMean) {
  MafFlow<double> flow(small_config(3, true), 13);
  Rng rng = make_stream(13, 1);
  testing::randomize(flow.parameters(), rng, 0.3);
  nn::Matrix<double> y(5, 3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = u(rng);
  const FlowBatch<double> batch = batch_of<double>(y, rng, 4, 3);
  const std::vector<double> per_item = flow.log_prob(batch);
  nn::Tape<double> tape(false);
  const double loss = nf_loss(flow, tape, batch).value()(0, 0);
  double mean = 0.0;
  for (double v : per_item) mean -= v / 5.0;
  EXPECT_NEAR(loss, mean, 1e-6);

  FlowBatch<double> one{batch.y.topRows(1), batch.zeta.topRows(1), batch.z.topRows(1)};
  nn::Tape<double> t1(false);
  EXPECT_NEAR(nf_loss(flow, t1, one).value()(0, 0), -per_item[0], 1e-12);
}

TEST(NfLoss, GradientMatchesFiniteDifferences) {
  EXPECT_LT(testing::nf_loss_gradient_error(14), 1e-4);
}

TEST(NfLoss, NonFiniteRaisesTrainingError) {
  MafFlow<double> flow(small_config(2, false), 15);
  nn::Matrix<double> y(1, 2);
  y << std::numeric_limits<double>::quiet_NaN(), 0.0;
  Rng rng = make_stream(15, 0);
  const FlowBatch<double> batch = batch_of<double>(y, rng, 4, 3);
  nn::Tape<double> tape;
  try {
    nf_loss(flow, tape, batch, 41);
    FAIL() << "expected a training error";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.batch_index(), 41u);
  }
}

TEST(Flow, ShapeErrors) {
  const MafFlow<float> flow(small_config(2, true), 16);
  EXPECT_THROW(maf_log_prob(flow, std::vector<double>{0.5}, std::vector<double>(4), std::vector<double>(3)), ShapeError);
  EXPECT_THROW(maf_log_prob(flow, std::vector<double>{0.5, 0.5}, std::vector<double>(3), std::vector<double>(3)), ShapeError);
  EXPECT_THROW(maf_log_prob(flow, std::vector<double>{0.5, 0.5}, std::vector<double>(4), std::vector<double>(2)), ShapeError);
}

TEST(Flow, CheckpointRoundTrip) {
  MafFlow<float> flow(small_config(3, true), 17);
  Rng rng = make_stream(17, 1);
  testing::randomize(flow.parameters(), rng, 0.3);
  const std::vector<double> mean{0.1, 0.2, 0.3, 0.4}, scale{1.0, 2.0, 0.5, 1.5};
  flow.set_signal_normalization(mean, scale);
  flow.set_trained(true);
  testing::ScratchDir dir("flow-ckpt");
  write_checkpoint(dir.path() / "f.ckpt", flow.to_checkpoint());
  const MafFlow<float> back = MafFlow<float>::from_checkpoint(read_checkpoint(dir.path() / "f.ckpt"));
  EXPECT_TRUE(back.trained());
  EXPECT_EQ(back.permutations(), flow.permutations());
  const std::vector<double> y{0.2, 0.5, 0.9}, zeta{1, 2, 3, 4}, z{0, 1, 0};
  EXPECT_EQ(maf_log_prob(back, y, zeta, z), maf_log_prob(flow, y, zeta, z));
}

TEST(Flow, CheckpointKindMismatchIsRejected) {
  Checkpoint cp = MafFlow<float>(small_config(2, true), 18).to_checkpoint();
  cp.kind = "cvae";
  EXPECT_THROW(MafFlow<float>::from_checkpoint(cp), ConfigError);
}

// Fits y | s ~ N(m(s), C) with m(s) = (1 + s, 2 - 0.5 s) and a fixed full
// covariance, then checks the conditional moments of the flow's samples.
TEST(Flow, RecoversConditionalGaussian) {
  FlowConfig c;
  c.param_dim = 2;
  c.signal_len = 1;
  c.latent_dim = 1;
  c.n_transforms = 4;
  c.hidden = 32;
  c.embed_hidden = 32;
  c.context_dim = 8;
  c.logit_transform = false;
  MafFlow<float> flow(c, 19);

  // 10^4 training items plus an equally large validation set for early stopping.
  const std::size_t n = 20000;
  const double c00 = 1.0, c01 = 0.6, c11 = 0.8;
  const double l00 = std::sqrt(c00), l10 = c01 / l00, l11 = std::sqrt(c11 - l10 * l10);
  Rng rng = make_stream(19, 1);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  nn::Matrix<float> y(n, 2), s(n, 1), z(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double sig = unit(rng), e0 = normal(rng), e1 = normal(rng);
    s(r, 0) = static_cast<float>(sig);
    y(r, 0) = static_cast<float>(1.0 + sig + l00 * e0);
    y(r, 1) = static_cast<float>(2.0 - 0.5 * sig + l10 * e0 + l11 * e1);
    z(r, 0) = static_cast<float>(normal(rng));
  }
  const std::size_t n_train = 10000;
  auto gather = [&](std::span<const std::size_t> items) {
    FlowBatch<float> b;
    b.y.resize(static_cast<Eigen::Index>(items.size()), 2);
    b.zeta.resize(static_cast<Eigen::Index>(items.size()), 1);
    b.z.resize(static_cast<Eigen::Index>(items.size()), 1);
    for (std::size_t k = 0; k < items.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k), src = static_cast<Eigen::Index>(items[k]);
      b.y.row(r) = y.row(src);
      b.zeta.row(r) = s.row(src);
      b.z.row(r) = z.row(src);
    }
    return b;
  };
  const BatchLossFn batch_loss = [&](std::span<const std::size_t> items, std::size_t index, Rng&) {
    nn::Tape<float> tape;
    const nn::Var<float> l = nf_loss(flow, tape, gather(items), index);
    tape.backward(l);
    return static_cast<double>(l.value()(0, 0));
  };
  std::vector<std::size_t> validation(n - n_train);
  for (std::size_t k = 0; k < validation.size(); ++k) validation[k] = n_train + k;
  const ValidationFn val = [&] {
    const std::vector<double> lp = flow.log_prob(gather(validation));
    double m = 0.0;
    for (double v : lp) m -= v / static_cast<double>(lp.size());
    return m;
  };
  TrainConfig tc = TrainConfig::for_phase(TrainPhase::kFlow);
  tc.seed = 19;
  tc.patience = tc.epochs;  // let the decay schedule run
  const TrainResult result = train_model(flow.parameters(), n_train, batch_loss, val, tc);
  ASSERT_FALSE(result.failure);

  for (double sig : {-0.5, 0.5}) {
    // The latent was independent noise during training, so the posterior
    // marginalizes it: 200 latent draws with 100 samples each.
    Rng draw = make_stream(19, 2);
    nn::Matrix<double> samples(20000, 2);
    for (Eigen::Index k = 0; k < 200; ++k) {
      const std::vector<double> latent{normal(draw)};
      samples.middleRows(100 * k, 100) = flow.sample(std::vector<double>{sig}, latent, 100, draw).samples;
    }
    const Eigen::RowVector2d m = samples.colwise().mean();
    const nn::Matrix<double> centred = samples.rowwise() - m;
    const Eigen::Matrix2d cov = centred.transpose() * centred / static_cast<double>(samples.rows() - 1);
    // Means are judged on the scale of the conditional standard deviation.
    EXPECT_NEAR(m(0), 1.0 + sig, 0.05 * std::sqrt(c00)) << sig;
    EXPECT_NEAR(m(1), 2.0 - 0.5 * sig, 0.05 * std::sqrt(c11)) << sig;
    EXPECT_NEAR(cov(0, 0), c00, 0.05 * c00) << sig;
    EXPECT_NEAR(cov(0, 1), c01, 0.05 * c01) << sig;
    EXPECT_NEAR(cov(1, 1), c11, 0.05 * c11) << sig;
  }
}

}  // namespace
}  // namespace ssbi
