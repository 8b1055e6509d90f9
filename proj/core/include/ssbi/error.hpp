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
#include <stdexcept>
#include <string>

namespace ssbi {

/// Array or tensor dimensions that do not agree with what an operation expects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A persisted file whose contents disagree with its manifest or header.
class CorruptionError : public std::runtime_error {
 public:
  CorruptionError(const std::string& what, std::string blob)
      : std::runtime_error(what), blob_(std::move(blob)) {}
  const std::string& blob() const noexcept { return blob_; }

 private:
  std::string blob_;
};

/// Non-finite loss or forward value encountered while optimizing.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t batch_index)
      : std::runtime_error(what), batch_index_(batch_index) {}
  std::size_t batch_index() const noexcept { return batch_index_; }

 private:
  std::size_t batch_index_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Beamstop/crop settings leave no detector rows to build a signal from.
class EmptySignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while writing or reading one record of a dataset.
class RecordIoError : public std::runtime_error {
 public:
  RecordIoError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace ssbi
