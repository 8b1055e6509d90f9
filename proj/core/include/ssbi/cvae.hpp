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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssbi/autodiff.hpp"
#include "ssbi/checkpoint.hpp"
#include "ssbi/parameters.hpp"
#include "ssbi/rng.hpp"
#include "ssbi/simulate.hpp"

namespace ssbi {

struct CvaeConfig {
  std::size_t image_rows = 256;  // detector rows (z)
  std::size_t image_cols = 128;  // detector columns (y)
  std::size_t signal_len = 90;
  std::size_t latent_dim = 16;
  std::vector<int> widths{16, 32, 64, 128, 128, 128};  // one entry per encoder block
  std::size_t cond_hidden = 128;
  std::size_t cond_dim = 64;

  std::size_t blocks() const { return widths.size(); }
  std::size_t pixels() const { return image_rows * image_cols; }
  /// Throws ConfigError unless both image sides are divisible by 2^blocks.
  void validate() const;
  std::string to_json() const;
  static CvaeConfig from_json(const std::string& text);
};

/// Pixel values as seen by the model: log10(1 + I).
std::vector<double> to_model_space(std::span<const double> intensities);

/// Conditional VAE over detector images. The encoder stacks stride-2
/// convolution blocks (3x3, batch norm, SiLU); the decoder mirrors it with
/// transposed convolutions and ends in a 3x3 convolution producing per-pixel
/// mean and log-variance. A small MLP embeds the signal for both halves.
template <typename T>
class CvaeModel {
 public:
  struct Gaussian {
    nn::Var<T> mean;
    nn::Var<T> logvar;
  };

  CvaeModel(const CvaeConfig& config, std::uint64_t seed);

  const CvaeConfig& config() const { return config_; }
  nn::ParameterSet<T>& parameters() { return params_; }
  const nn::ParameterSet<T>& parameters() const { return params_; }

  /// Batch statistics (and running-buffer updates) in training mode, running
  /// statistics otherwise.
  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }
  bool trained() const { return trained_; }
  void set_trained(bool trained) { trained_ = trained; }

  void set_signal_normalization(std::span<const double> mean, std::span<const double> scale);

  /// images: N x pixels in model space; zeta: N x signal_len.
  Gaussian encode(nn::Tape<T>& tape, const nn::Matrix<T>& images, const nn::Matrix<T>& zeta);
  /// z: N x latent_dim. The log-variance is clamped to [-7, 7].
  Gaussian decode(nn::Tape<T>& tape, const nn::Var<T>& z, const nn::Matrix<T>& zeta);

  /// Gradient-free evaluation with running batch-norm statistics.
  std::pair<nn::Matrix<T>, nn::Matrix<T>> encode(const nn::Matrix<T>& images,
                                                 const nn::Matrix<T>& zeta) const;
  std::pair<nn::Matrix<T>, nn::Matrix<T>> decode(const nn::Matrix<T>& z,
                                                 const nn::Matrix<T>& zeta) const;

  /// (rows, cols) entering each encoder block and leaving each decoder block,
  /// the latter listed in encoder order.
  std::vector<std::pair<int, int>> encoder_input_shapes() const;
  std::vector<std::pair<int, int>> decoder_output_shapes() const;

  Checkpoint to_checkpoint() const;
  static CvaeModel from_checkpoint(const Checkpoint& checkpoint);

 private:
  struct BlockIds {
    std::size_t weight, bias, gamma, beta, running_mean, running_var;
  };

  void build(std::uint64_t seed);
  Gaussian encode_impl(nn::Tape<T>& tape, const nn::Matrix<T>& images,
                       const nn::Matrix<T>& zeta, bool batch_stats);
  Gaussian decode_impl(nn::Tape<T>& tape, const nn::Var<T>& z, const nn::Matrix<T>& zeta,
                       bool batch_stats);
  nn::Var<T> condition(nn::Tape<T>& tape, const nn::Matrix<T>& zeta);
  nn::Var<T> block(nn::Tape<T>& tape, const nn::Var<T>& x, const BlockIds& ids,
                   const nn::ConvShape& shape, bool transposed, bool batch_stats);
  std::pair<int, int> base_shape() const;

  CvaeConfig config_;
  nn::ParameterSet<T> params_;
  std::size_t cond0_w_ = 0, cond0_b_ = 0, cond1_w_ = 0, cond1_b_ = 0;
  std::vector<BlockIds> enc_, dec_;
  std::size_t mu_w_ = 0, mu_b_ = 0, lv_w_ = 0, lv_b_ = 0;
  std::size_t dec_in_w_ = 0, dec_in_b_ = 0, head_w_ = 0, head_b_ = 0;
  std::size_t signal_mean_ = 0, signal_scale_ = 0;
  bool training_ = true;
  bool trained_ = false;
};

/// Negative ELBO averaged over the batch, using one reparameterized latent
/// draw per item. Throws TrainingError carrying `batch_index` if not finite.
template <typename T>
nn::Var<T> cvae_loss(CvaeModel<T>& model, nn::Tape<T>& tape, const nn::Matrix<T>& images,
                     const nn::Matrix<T>& zeta, Rng& rng, std::size_t batch_index = 0);

/// Decoder mean for a latent drawn from N(0, I), mapped back to intensities.
template <typename T>
DetectorImage reconstruct_from_signal(const CvaeModel<T>& model, std::span<const double> zeta,
                                      const ExperimentGeometry& geometry, Rng& rng);

}  // namespace ssbi
