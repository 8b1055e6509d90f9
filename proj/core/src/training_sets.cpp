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

#include "ssbi/training_sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ssbi/error.hpp"

namespace ssbi {

nn::Matrix<float> unit_param_rows(const Dataset& data, std::span<const std::size_t> items) {
  const std::size_t d = data.dimension();
  const auto& ranges = data.manifest.param_ranges;
  nn::Matrix<float> out(static_cast<Eigen::Index>(items.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < items.size(); ++r) {
    const auto row = data.param_row(items[r]);
    for (std::size_t j = 0; j < d; ++j) {
      const double u = (row[j] - ranges[j].lo) / ranges[j].width();
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          static_cast<float>(std::clamp(u, 0.0, 1.0));
    }
  }
  return out;
}

nn::Matrix<float> signal_rows(const Dataset& data, std::span<const std::size_t> items) {
  const std::size_t len = data.manifest.signal_len;
  nn::Matrix<float> out(static_cast<Eigen::Index>(items.size()), static_cast<Eigen::Index>(len));
  for (std::size_t r = 0; r < items.size(); ++r) {
    const auto row = data.signal_row(items[r]);
    std::copy(row.begin(), row.end(), out.row(static_cast<Eigen::Index>(r)).data());
  }
  return out;
}

nn::Matrix<float> image_rows(const Dataset& data, std::span<const std::size_t> items) {
  if (data.images.empty()) throw ShapeError("dataset does not store images");
  const std::size_t pixels = data.image_pixels();
  nn::Matrix<float> out(static_cast<Eigen::Index>(items.size()), static_cast<Eigen::Index>(pixels));
  for (std::size_t r = 0; r < items.size(); ++r) {
    const auto row = data.image_row(items[r]);
    float* dst = out.row(static_cast<Eigen::Index>(r)).data();
    for (std::size_t k = 0; k < pixels; ++k) {
      dst[k] = static_cast<float>(std::log10(1.0 + std::max(static_cast<double>(row[k]), 0.0)));
    }
  }
  return out;
}

SignalStatistics signal_statistics(const Dataset& data, std::span<const std::size_t> items) {
  const std::size_t len = data.manifest.signal_len;
  SignalStatistics s{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
  if (items.empty()) throw std::invalid_argument("signal statistics need at least one record");
  for (std::size_t i : items) {
    const auto row = data.signal_row(i);
    for (std::size_t k = 0; k < len; ++k) s.mean[k] += row[k];
  }
  for (double& m : s.mean) m /= static_cast<double>(items.size());
  for (std::size_t i : items) {
    const auto row = data.signal_row(i);
    for (std::size_t k = 0; k < len; ++k) s.scale[k] += (row[k] - s.mean[k]) * (row[k] - s.mean[k]);
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(items.size()));
    if (!(v > 1e-12)) v = 1.0;
  }
  return s;
}

namespace {

std::vector<std::size_t> pick(const std::vector<std::size_t>& pool, std::span<const std::size_t> positions) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(pool[p]);
  return out;
}

void fill_normal(nn::Matrix<float>& m, Rng& rng) {
  std::normal_distribution<double> normal;
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<float>(normal(rng));
}

// Encoder posteriors of the listed records, evaluated in chunks.
std::pair<nn::Matrix<float>, nn::Matrix<float>> encode_all(const CvaeModel<float>& encoder,
                                                           const Dataset& data,
                                                           const std::vector<std::size_t>& items) {
  const Eigen::Index latent = static_cast<Eigen::Index>(encoder.config().latent_dim);
  nn::Matrix<float> mu(static_cast<Eigen::Index>(items.size()), latent);
  nn::Matrix<float> lv(static_cast<Eigen::Index>(items.size()), latent);
  constexpr std::size_t kChunk = 64;
  for (std::size_t s = 0; s < items.size(); s += kChunk) {
    const std::span<const std::size_t> part(items.data() + s, std::min(kChunk, items.size() - s));
    const auto [m, v] = encoder.encode(image_rows(data, part), signal_rows(data, part));
    mu.middleRows(static_cast<Eigen::Index>(s), m.rows()) = m;
    lv.middleRows(static_cast<Eigen::Index>(s), v.rows()) = v;
  }
  return {mu, lv};
}

}  // namespace

TrainResult train_flow(MafFlow<float>& model, const Dataset& data, const DatasetSplits& splits,
                       const TrainConfig& config, const FlowTrainingOptions& options,
                       const std::function<void(const EpochLog&)>& on_epoch) {
  if (splits.train.empty() || splits.validation.empty()) {
    throw std::invalid_argument("flow training needs non-empty train and validation splits");
  }
  const FlowConfig& fc = model.config();
  if (fc.param_dim != data.dimension() || fc.signal_len != data.manifest.signal_len) {
    throw ShapeError("flow dimensions do not match the dataset");
  }
  const SignalStatistics stats = signal_statistics(data, splits.train);
  model.set_signal_normalization(stats.mean, stats.scale);

  const Eigen::Index latent = static_cast<Eigen::Index>(fc.latent_dim);
  const bool use_encoder = options.encoder != nullptr && !data.images.empty();
  nn::Matrix<float> train_mu, train_lv, val_mu, val_lv;
  if (use_encoder) {
    if (options.encoder->config().latent_dim != fc.latent_dim) {
      throw ShapeError("encoder latent dimension differs from the flow");
    }
    std::tie(train_mu, train_lv) = encode_all(*options.encoder, data, splits.train);
    std::tie(val_mu, val_lv) = encode_all(*options.encoder, data, splits.validation);
  }
  auto draw_latent = [&](const nn::Matrix<float>& mu, const nn::Matrix<float>& lv,
                         std::span<const std::size_t> positions, Rng& rng) {
    nn::Matrix<float> z(static_cast<Eigen::Index>(positions.size()), latent);
    fill_normal(z, rng);
    if (use_encoder) {
      for (std::size_t r = 0; r < positions.size(); ++r) {
        const Eigen::Index i = static_cast<Eigen::Index>(positions[r]);
        const Eigen::Index row = static_cast<Eigen::Index>(r);
        z.row(row) = (mu.row(i).array() + (0.5f * lv.row(i).array()).exp() * z.row(row).array()).matrix();
      }
    }
    return z;
  };

  const BatchLossFn batch_loss = [&](std::span<const std::size_t> positions, std::size_t batch_index, Rng& rng) {
    const std::vector<std::size_t> items = pick(splits.train, positions);
    FlowBatch<float> batch{unit_param_rows(data, items), signal_rows(data, items),
                           draw_latent(train_mu, train_lv, positions, rng)};
    nn::Tape<float> tape;
    const nn::Var<float> loss = nf_loss(model, tape, batch, batch_index);
    tape.backward(loss);
    return static_cast<double>(loss.value()(0, 0));
  };
  const ValidationFn validation = [&]() {
    Rng rng = make_stream(config.seed, 0, salt::kLatent);
    double total = 0.0;
    const auto& val = splits.validation;
    std::vector<std::size_t> positions;
    for (std::size_t s = 0; s < val.size(); s += options.eval_chunk) {
      const std::size_t count = std::min(options.eval_chunk, val.size() - s);
      positions.resize(count);
      std::iota(positions.begin(), positions.end(), s);
      const std::vector<std::size_t> items = pick(val, positions);
      FlowBatch<float> batch{unit_param_rows(data, items), signal_rows(data, items),
                             draw_latent(val_mu, val_lv, positions, rng)};
      for (double lp : model.log_prob(batch)) total -= lp;
    }
    return total / static_cast<double>(val.size());
  };

  TrainResult result = train_model(model.parameters(), splits.train.size(), batch_loss, validation, config, on_epoch);
  result.n_validation = splits.validation.size();
  if (!result.log.empty()) model.set_trained(true);
  return result;
}

TrainResult train_cvae(CvaeModel<float>& model, const Dataset& data, const DatasetSplits& splits,
                       const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  if (splits.train.empty() || splits.validation.empty()) {
    throw std::invalid_argument("cvae training needs non-empty train and validation splits");
  }
  if (data.images.empty()) throw ShapeError("cvae training needs a dataset with images");
  const CvaeConfig& cc = model.config();
  if (cc.pixels() != data.image_pixels() || cc.signal_len != data.manifest.signal_len) {
    throw ShapeError("cvae dimensions do not match the dataset");
  }
  const SignalStatistics stats = signal_statistics(data, splits.train);
  model.set_signal_normalization(stats.mean, stats.scale);

  const BatchLossFn batch_loss = [&](std::span<const std::size_t> positions, std::size_t batch_index, Rng& rng) {
    const std::vector<std::size_t> items = pick(splits.train, positions);
    model.set_training(true);
    nn::Tape<float> tape;
    const nn::Var<float> loss =
        cvae_loss(model, tape, image_rows(data, items), signal_rows(data, items), rng, batch_index);
    tape.backward(loss);
    return static_cast<double>(loss.value()(0, 0));
  };
  const ValidationFn validation = [&]() {
    model.set_training(false);
    Rng rng = make_stream(config.seed, 0, salt::kLatent);
    double total = 0.0;
    const auto& val = splits.validation;
    constexpr std::size_t kChunk = 32;
    for (std::size_t s = 0; s < val.size(); s += kChunk) {
      const std::span<const std::size_t> items(val.data() + s, std::min(kChunk, val.size() - s));
      nn::Tape<float> tape(false);
      const nn::Var<float> loss = cvae_loss(model, tape, image_rows(data, items), signal_rows(data, items), rng, 0);
      total += static_cast<double>(loss.value()(0, 0)) * static_cast<double>(items.size());
    }
    return total / static_cast<double>(val.size());
  };

  TrainResult result = train_model(model.parameters(), splits.train.size(), batch_loss, validation, config, on_epoch);
  result.n_validation = splits.validation.size();
  model.set_training(false);
  if (!result.log.empty()) model.set_trained(true);
  return result;
}

}  // namespace ssbi
