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

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/error.hpp"
#include "ssbi/posterior.hpp"

namespace ssbi {

using nlohmann::json;

void PosteriorSampleSet::validate() const {
  if (samples.rows() < 1) throw std::invalid_argument("posterior sample set is empty");
  if (log_probs.size() != size()) {
    throw std::invalid_argument("posterior log_probs length differs from sample count");
  }
  for (double lp : log_probs) {
    if (!std::isfinite(lp)) throw std::invalid_argument("posterior log_prob is not finite");
  }
  if (!param_names.empty() && param_names.size() != dimension()) {
    throw std::invalid_argument("posterior parameter names do not match the dimension");
  }
}

std::size_t PosteriorSampleSet::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < log_probs.size(); ++i) {
    if (log_probs[i] > log_probs[best]) best = i;
  }
  return best;
}

void write_posterior(const std::filesystem::path& dir, const PosteriorSampleSet& set) {
  set.validate();
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["version"] = 1;
  manifest["n_samples"] = set.size();
  manifest["dim"] = set.dimension();
  manifest["param_names"] = set.param_names;
  json ranges = json::array();
  for (const ParamRange& r : set.param_ranges) ranges.push_back({r.lo, r.hi});
  manifest["param_ranges"] = ranges;
  manifest["space"] = "unit";
  manifest["dtype"] = "f32le";
  {
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  std::vector<float> buf(set.samples.data(), set.samples.data() + set.samples.size());
  std::ofstream samples(dir / "samples.bin", std::ios::binary);
  write_f32le(samples, buf);
  buf.assign(set.log_probs.begin(), set.log_probs.end());
  std::ofstream lps(dir / "log_probs.bin", std::ios::binary);
  write_f32le(lps, buf);
  if (!samples || !lps) throw std::runtime_error("failed writing posterior to " + dir.string());
}

PosteriorSampleSet read_posterior(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "manifest.json").string());
  std::stringstream text;
  text << in.rdbuf();
  json manifest;
  try {
    manifest = json::parse(text.str());
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("posterior manifest is not JSON: ") + e.what(), "manifest.json");
  }
  const auto n = manifest.at("n_samples").get<std::size_t>();
  const auto d = manifest.at("dim").get<std::size_t>();
  PosteriorSampleSet set;
  set.param_names = manifest.value("param_names", std::vector<std::string>{});
  for (const json& r : manifest.value("param_ranges", json::array())) {
    set.param_ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  }
  const std::vector<float> samples = read_f32le_file(dir / "samples.bin");
  const std::vector<float> lps = read_f32le_file(dir / "log_probs.bin");
  if (samples.size() != n * d) throw CorruptionError("samples.bin size mismatch", "samples.bin");
  if (lps.size() != n) throw CorruptionError("log_probs.bin size mismatch", "log_probs.bin");
  set.samples.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < samples.size(); ++k) set.samples.data()[k] = samples[k];
  set.log_probs.assign(lps.begin(), lps.end());
  return set;
}

}  // namespace ssbi
