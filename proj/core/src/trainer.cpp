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

#include "ssbi/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "ssbi/error.hpp"

namespace ssbi {

TrainConfig TrainConfig::for_phase(TrainPhase phase) {
  TrainConfig c;
  c.phase = phase;
  if (phase == TrainPhase::kFlow) {
    c.epochs = 100;
    c.decay_period = 30;
  } else {
    c.epochs = 30;
    c.decay_period = 10;
  }
  return c;
}

void TrainConfig::validate() const {
  if (epochs == 0 || decay_period == 0 || batch_size == 0 || patience == 0) {
    throw ConfigError("epochs, decay period, batch size and patience must be positive");
  }
  if (!(decay_factor > 0.0 && decay_factor < 1.0)) throw ConfigError("decay factor must lie in (0, 1)");
  if (!(optimizer.lr > 0.0)) throw ConfigError("learning rate must be positive");
}

double TrainConfig::learning_rate(std::size_t epoch) const {
  return optimizer.lr * std::pow(decay_factor, static_cast<double>(epoch / decay_period));
}

namespace {

template <typename T>
std::vector<nn::Matrix<T>> snapshot(const nn::ParameterSet<T>& params) {
  std::vector<nn::Matrix<T>> out;
  out.reserve(params.size());
  for (const auto& t : params) out.push_back(t.value);
  return out;
}

template <typename T>
void restore(nn::ParameterSet<T>& params, const std::vector<nn::Matrix<T>>& values) {
  for (std::size_t k = 0; k < params.size(); ++k) params[k].value = values[k];
}

}  // namespace

template <typename T>
TrainResult train_model(nn::ParameterSet<T>& params, std::size_t n_train, const BatchLossFn& batch_loss,
                        const ValidationFn& validation, const TrainConfig& config,
                        const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (n_train == 0) throw std::invalid_argument("training split is empty");
  OptimizerState<T> state = make_optimizer(params, config.optimizer);
  TrainResult result;
  result.n_train = n_train;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<nn::Matrix<T>> best = snapshot(params);
  std::size_t since_best = 0;
  std::size_t batch_counter = 0;
  std::vector<std::size_t> order(n_train);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    state.options.lr = config.learning_rate(epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_stream(config.seed, epoch, salt::kShuffle);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    try {
      for (std::size_t start = 0; start < n_train; start += config.batch_size, ++batch_counter) {
        const std::size_t count = std::min(config.batch_size, n_train - start);
        const std::span<const std::size_t> items(order.data() + start, count);
        params.zero_grad();
        Rng rng = make_stream(config.seed, batch_counter, salt::kBatch);
        const double loss = batch_loss(items, batch_counter, rng);
        if (!std::isfinite(loss)) throw TrainingError("non-finite training loss", batch_counter);
        adamw_step(params, state);
        loss_sum += loss * static_cast<double>(count);
      }
    } catch (const TrainingError& e) {
      restore(params, best);
      result.failure = e.what();
      result.failed_batch = e.batch_index();
      return result;
    }

    const double val = validation();
    if (!std::isfinite(val)) {
      restore(params, best);
      result.failure = "non-finite validation loss";
      result.failed_batch = batch_counter;
      return result;
    }
    EpochLog entry{epoch, loss_sum / static_cast<double>(n_train), val, state.options.lr};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (val < result.best_val_loss) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      best = snapshot(params);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  restore(params, best);
  return result;
}

void write_training_log(const std::filesystem::path& path, const TrainResult& result) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log " + path.string());
  out.precision(9);
  out << "epoch,train_loss,val_loss,lr\n";
  for (const EpochLog& e : result.log) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.lr << '\n';
  }
}

template TrainResult train_model(nn::ParameterSet<float>&, std::size_t, const BatchLossFn&,
                                 const ValidationFn&, const TrainConfig&,
                                 const std::function<void(const EpochLog&)>&);
template TrainResult train_model(nn::ParameterSet<double>&, std::size_t, const BatchLossFn&,
                                 const ValidationFn&, const TrainConfig&,
                                 const std::function<void(const EpochLog&)>&);

}  // namespace ssbi
