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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssbi/adamw.hpp"
#include "ssbi/parameters.hpp"
#include "ssbi/rng.hpp"

namespace ssbi {

enum class TrainPhase { kFlow, kCvae };

struct TrainConfig {
  TrainPhase phase = TrainPhase::kFlow;
  std::size_t epochs = 100;
  double decay_factor = 0.1;
  std::size_t decay_period = 30;
  std::size_t batch_size = 32;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  AdamWOptions optimizer;

  /// Epoch count and decay period of the given phase (flow 100/30, cvae 30/10).
  static TrainConfig for_phase(TrainPhase phase);
  void validate() const;
  /// lr0 * factor^floor(epoch / period), epochs counted from 0.
  double learning_rate(std::size_t epoch) const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  /// Set when training aborted on a non-finite loss; parameters then hold the
  /// best values seen before the failure.
  std::optional<std::string> failure;
  std::size_t failed_batch = 0;
};

/// Evaluates the loss of the listed training items, accumulates gradients in
/// the parameter set and returns the mean loss. `batch_index` counts batches
/// across epochs; `rng` is private to the batch.
using BatchLossFn =
    std::function<double(std::span<const std::size_t> items, std::size_t batch_index, Rng& rng)>;
/// Mean validation loss under the current parameters.
using ValidationFn = std::function<double()>;

/// Mini-batch AdamW over items [0, n_train) with a per-epoch shuffle derived
/// from (seed, epoch), step learning-rate decay and early stopping on the
/// validation loss. On return the parameters hold the best-validation values.
template <typename T>
TrainResult train_model(nn::ParameterSet<T>& params, std::size_t n_train, const BatchLossFn& batch_loss,
                        const ValidationFn& validation, const TrainConfig& config,
                        const std::function<void(const EpochLog&)>& on_epoch = {});

/// CSV with header epoch,train_loss,val_loss,lr.
void write_training_log(const std::filesystem::path& path, const TrainResult& result);

}  // namespace ssbi
