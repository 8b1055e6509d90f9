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
#include <functional>
#include <span>
#include <vector>

#include "ssbi/cvae.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/maf.hpp"
#include "ssbi/trainer.hpp"

namespace ssbi {

/// Rows of the listed records: parameters mapped to the unit cube, signals,
/// and images in model space.
nn::Matrix<float> unit_param_rows(const Dataset& data, std::span<const std::size_t> items);
nn::Matrix<float> signal_rows(const Dataset& data, std::span<const std::size_t> items);
nn::Matrix<float> image_rows(const Dataset& data, std::span<const std::size_t> items);

struct SignalStatistics {
  std::vector<double> mean;
  std::vector<double> scale;  // standard deviation, 1 where it vanishes
};
SignalStatistics signal_statistics(const Dataset& data, std::span<const std::size_t> items);

struct FlowTrainingOptions {
  /// When set (and the dataset stores images) z is drawn from this encoder's
  /// posterior; otherwise from N(0, I).
  const CvaeModel<float>* encoder = nullptr;
  std::size_t eval_chunk = 512;
};

/// Fits the flow on splits.train, early-stopping on splits.validation. Sets
/// the signal normalization from the training split and marks the model as
/// trained unless training failed before the first epoch completed.
TrainResult train_flow(MafFlow<float>& model, const Dataset& data, const DatasetSplits& splits,
                       const TrainConfig& config, const FlowTrainingOptions& options = {},
                       const std::function<void(const EpochLog&)>& on_epoch = {});

/// Same contract for the CVAE; the dataset must store images.
TrainResult train_cvae(CvaeModel<float>& model, const Dataset& data, const DatasetSplits& splits,
                       const TrainConfig& config,
                       const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace ssbi
