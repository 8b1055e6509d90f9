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
#include <vector>

#include "ssbi/autodiff.hpp"
#include "ssbi/checkpoint.hpp"
#include "ssbi/parameters.hpp"
#include "ssbi/posterior.hpp"
#include "ssbi/rng.hpp"

namespace ssbi {

struct FlowConfig {
  std::size_t param_dim = 1;
  std::size_t signal_len = 1;
  std::size_t latent_dim = 16;
  std::size_t n_transforms = 8;
  std::size_t hidden = 128;         // conditioner hidden units
  std::size_t embed_hidden = 128;   // context embedder hidden units
  std::size_t context_dim = 64;
  bool logit_transform = true;      // parameters live in the unit cube

  void validate() const;
  std::string to_json() const;
  static FlowConfig from_json(const std::string& text);
};

/// Boundary clamp used by the logit pre-transform.
inline constexpr double kLogitEpsilon = 1e-6;

/// A batch of flow training items, one row each.
template <typename T>
struct FlowBatch {
  nn::Matrix<T> y;     // N x param_dim
  nn::Matrix<T> zeta;  // N x signal_len
  nn::Matrix<T> z;     // N x latent_dim
};

/// Conditional masked autoregressive flow. Each transform maps its input
/// h to (h - mu) exp(-alpha), where (mu, alpha) come from a masked one-hidden-
/// layer network of the preceding coordinates and the context. The context is
/// an MLP embedding of concat(normalized signal, latent). Fixed reversal
/// permutations separate the transforms.
template <typename T>
class MafFlow {
 public:
  MafFlow(const FlowConfig& config, std::uint64_t seed);

  const FlowConfig& config() const { return config_; }
  nn::ParameterSet<T>& parameters() { return params_; }
  const nn::ParameterSet<T>& parameters() const { return params_; }
  const std::vector<std::vector<int>>& permutations() const { return perms_; }
  /// Degree of every conditioner hidden unit: unit h sees inputs j < degree.
  const std::vector<int>& hidden_degrees() const { return degrees_; }

  bool trained() const { return trained_; }
  void set_trained(bool trained) { trained_ = trained; }

  /// Per-feature standardization applied to the signal before embedding.
  void set_signal_normalization(std::span<const double> mean, std::span<const double> scale);

  /// Per-row log density (N x 1) recorded on `tape`.
  nn::Var<T> log_prob(nn::Tape<T>& tape, const FlowBatch<T>& batch);
  /// Per-row log densities without gradient tracking.
  std::vector<double> log_prob(const FlowBatch<T>& batch) const;
  /// Density direction: data (unit cube when logit is on) to base space.
  nn::Matrix<T> to_base(const FlowBatch<T>& batch) const;
  /// Sampling direction for a single context: base points (n x d) to data.
  nn::Matrix<double> from_base(const nn::Matrix<T>& base, std::span<const double> zeta,
                               std::span<const double> z) const;

  /// n draws for one observation, each carrying its log density.
  PosteriorSampleSet sample(std::span<const double> zeta, std::span<const double> z,
                            std::size_t n, Rng& rng) const;

  Checkpoint to_checkpoint() const;
  static MafFlow from_checkpoint(const Checkpoint& checkpoint);

 private:
  struct TransformIds {
    std::size_t in_weight, ctx_weight, in_bias, out_weight, out_bias;
  };
  struct Forward {
    nn::Var<T> base;
    nn::Var<T> log_prob;
  };

  void build(std::uint64_t seed, bool initialize);
  Forward forward(nn::Tape<T>& tape, const FlowBatch<T>& batch);
  nn::Matrix<T> context_row(std::span<const double> zeta, std::span<const double> z) const;
  void check_batch(const FlowBatch<T>& batch) const;
  nn::Matrix<double> invert(const nn::Matrix<T>& base, const nn::Matrix<T>& ctx,
                            std::vector<double>* sum_alpha) const;

  FlowConfig config_;
  nn::ParameterSet<T> params_;
  std::vector<std::vector<int>> perms_;
  std::vector<int> degrees_;
  nn::Matrix<T> in_mask_;   // hidden x d
  nn::Matrix<T> out_mask_;  // 2d x hidden
  std::vector<TransformIds> transforms_;
  std::size_t embed0_w_ = 0, embed0_b_ = 0, embed1_w_ = 0, embed1_b_ = 0;
  std::size_t base_mean_w_ = 0, base_mean_b_ = 0, base_logvar_w_ = 0, base_logvar_b_ = 0;
  std::size_t signal_mean_ = 0, signal_scale_ = 0;
  bool trained_ = false;
};

/// Log density of unit-cube parameters `y` given a signal and a latent.
template <typename T>
double maf_log_prob(const MafFlow<T>& model, std::span<const double> y,
                    std::span<const double> zeta, std::span<const double> z);

template <typename T>
PosteriorSampleSet maf_sample(const MafFlow<T>& model, std::span<const double> zeta,
                              std::span<const double> z, std::size_t n, Rng& rng);

/// Mean negative log density over the batch, as a 1 x 1 tape node. Throws
/// TrainingError carrying `batch_index` when the value is not finite.
template <typename T>
nn::Var<T> nf_loss(MafFlow<T>& model, nn::Tape<T>& tape, const FlowBatch<T>& batch,
                   std::size_t batch_index = 0);

}  // namespace ssbi
