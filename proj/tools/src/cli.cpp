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

#include "ssbi_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssbi/abc.hpp"
#include "ssbi/config.hpp"
#include "ssbi/cvae.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/error.hpp"
#include "ssbi/inplane.hpp"
#include "ssbi/maf.hpp"
#include "ssbi/metrics.hpp"
#include "ssbi/parallel.hpp"
#include "ssbi/posterior.hpp"
#include "ssbi/speedup.hpp"
#include "ssbi/training_sets.hpp"

namespace ssbi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

RunConfig load_config(const Common& common) {
  RunConfig c = common.config_path.empty() ? RunConfig() : RunConfig::load(common.config_path);
  if (common.seed) c.seed = *common.seed;
  return c;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

void write_signal(const fs::path& path, const InPlaneSignal& signal) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << json{{"values", signal.values},
              {"part_boundary", signal.part_boundary},
              {"geometry_tag", signal.geometry_tag}}
             .dump()
      << '\n';
}

InPlaneSignal read_signal(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open signal " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("signal file is not JSON: ") + e.what(), path.filename().string());
  }
  InPlaneSignal s;
  s.values = j.at("values").get<std::vector<double>>();
  s.part_boundary = j.value("part_boundary", std::size_t{0});
  s.geometry_tag = j.value("geometry_tag", std::string{});
  if (s.values.empty()) throw EmptySignalError("signal file holds no values");
  return s;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<double> prior_latent(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> z(dim);
  for (double& v : z) v = normal(rng);
  return z;
}

FlowConfig flow_config(const RunConfig& c, std::size_t dim, std::size_t signal_len) {
  FlowConfig f;
  f.param_dim = dim;
  f.signal_len = signal_len;
  f.latent_dim = c.model.latent_dim;
  f.n_transforms = c.model.n_transforms;
  f.hidden = c.model.hidden;
  f.embed_hidden = c.model.embed_hidden;
  f.context_dim = c.model.context_dim;
  return f;
}

// ---- subcommands ------------------------------------------------------------------

struct SimulateArgs {
  std::string params;
  bool unit = false;
  bool noise = false;
  std::string out;
  std::string signal_out;
};

int cmd_simulate(const Common& common, const SimulateArgs& a, std::ostream& out) {
  const RunConfig c = load_config(common);
  std::vector<double> values = parse_list(a.params);
  if (values.size() != c.prior.dimension()) {
    throw ShapeError("expected " + std::to_string(c.prior.dimension()) + " parameter values, got " +
                     std::to_string(values.size()));
  }
  const auto ranges = c.prior.parameter_ranges();
  if (a.unit) values = map_params_unit(values, ranges, MapDirection::kFromUnit);
  const MultilayerSample sample = c.prior.to_sample(values);
  Rng rng = make_stream(c.seed, 0, salt::kNoise);
  const DetectorImage image = simulate_image(sample, c.geometry, a.noise || c.noise, rng);
  write_image(a.out, image);
  if (!a.signal_out.empty()) write_signal(a.signal_out, extract_inplane(image, c.signal));
  out << "wrote " << image.rows() << "x" << image.cols() << " image to " << a.out << "\n";
  return kExitOk;
}

struct DatasetArgs {
  std::size_t n = 0;
  std::string out;
  bool images = false;
  std::size_t chunk = 256;
};

int cmd_dataset(const Common& common, const DatasetArgs& a, std::ostream& out) {
  const RunConfig c = load_config(common);
  GenerationRequest request = c.generation(a.n, resolve_threads(common.threads, 0));
  request.store_images = a.images;
  request.chunk = a.chunk;
  const DatasetManifest m = generate_dataset(request, a.out);
  out << "wrote " << m.n_samples << " records (signal length " << m.signal_len << ", "
      << m.param_names.size() << " parameters) to " << a.out << "\n";
  return kExitOk;
}

struct ExtractArgs {
  std::string image;
  std::string out;
};

int cmd_extract(const Common& common, const ExtractArgs& a, std::ostream& out) {
  const RunConfig c = load_config(common);
  const DetectorImage image = read_image(a.image, c.geometry);
  std::optional<BackgroundCurve> bg;
  if (c.background) bg = read_background_curve(*c.background);
  const InPlaneSignal signal = extract_inplane(image, c.signal, bg ? &*bg : nullptr);
  write_signal(a.out, signal);
  out << "wrote signal of length " << signal.values.size() << " to " << a.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string phase;
  std::string data;
  std::string out;
  std::string log;
  std::string encoder;
  std::optional<std::size_t> epochs;
};

int cmd_train(const Common& common, const TrainArgs& a, std::ostream& out) {
  const RunConfig c = load_config(common);
  const LoadedDataset loaded = dataset_roundtrip(a.data, c.split);
  const Dataset& data = loaded.data;
  const DatasetSplits& splits = loaded.splits;
  out << "train items: " << splits.train.size() << ", validation items: " << splits.validation.size()
      << ", test items: " << splits.test.size() << "\n";
  const fs::path log_path = a.log.empty() ? fs::path(a.out).replace_extension(".csv") : fs::path(a.log);
  const auto report = [&out](const EpochLog& e) {
    out << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << " lr " << e.lr << "\n";
  };

  TrainResult result;
  Checkpoint checkpoint;
  if (a.phase == "flow") {
    TrainConfig tc = c.flow;
    tc.seed = c.seed;
    if (a.epochs) tc.epochs = *a.epochs;
    MafFlow<float> flow(flow_config(c, data.dimension(), data.manifest.signal_len), c.seed);
    std::optional<CvaeModel<float>> encoder;
    FlowTrainingOptions options;
    if (!a.encoder.empty()) {
      encoder.emplace(CvaeModel<float>::from_checkpoint(read_checkpoint(a.encoder)));
      options.encoder = &*encoder;
    }
    result = train_flow(flow, data, splits, tc, options, report);
    checkpoint = flow.to_checkpoint();
  } else {
    TrainConfig tc = c.cvae;
    tc.seed = c.seed;
    if (a.epochs) tc.epochs = *a.epochs;
    if (!data.manifest.image_shape) throw ShapeError("cvae training needs a dataset generated with --images");
    CvaeConfig cc;
    cc.image_rows = data.manifest.image_shape->first;
    cc.image_cols = data.manifest.image_shape->second;
    cc.signal_len = data.manifest.signal_len;
    cc.latent_dim = c.model.latent_dim;
    cc.widths = c.model.widths;
    CvaeModel<float> model(cc, c.seed);
    result = train_cvae(model, data, splits, tc, report);
    checkpoint = model.to_checkpoint();
  }
  write_checkpoint(a.out, checkpoint);
  write_training_log(log_path, result);
  fs::path summary_path = log_path;
  summary_path.replace_extension(".summary.json");
  write_json(summary_path, json{{"phase", a.phase},
                                {"n_train", result.n_train},
                                {"n_validation", result.n_validation},
                                {"n_test", splits.test.size()},
                                {"epochs_run", result.log.size()},
                                {"best_epoch", result.best_epoch},
                                {"best_val_loss", result.best_val_loss},
                                {"stopped_early", result.stopped_early}});
  if (result.failure) {
    throw TrainingError(*result.failure + " (best checkpoint kept in " + a.out + ")", result.failed_batch);
  }
  out << "best validation loss " << result.best_val_loss << " at epoch " << result.best_epoch << "\n";
  return kExitOk;
}

struct InferArgs {
  std::string checkpoint;
  std::string signal;
  std::string image;
  std::string cvae;
  std::size_t n_samples = 10000;
  std::string out;
};

int cmd_infer(const Common& common, const InferArgs& a, std::ostream& out) {
  const RunConfig c = load_config(common);
  const MafFlow<float> flow = MafFlow<float>::from_checkpoint(read_checkpoint(a.checkpoint));
  const InPlaneSignal signal = read_signal(a.signal);
  Rng rng = make_stream(c.seed, 0, salt::kLatent);
  std::vector<double> z;
  if (!a.image.empty()) {
    if (a.cvae.empty()) throw ConfigError("--image needs --cvae to encode the latent");
    const CvaeModel<float> cvae = CvaeModel<float>::from_checkpoint(read_checkpoint(a.cvae));
    const DetectorImage image = read_image(a.image, c.geometry);
    const std::vector<double> pixels = to_model_space(image.intensities);
    nn::Matrix<float> x = Eigen::Map<const Eigen::RowVectorXd>(pixels.data(), static_cast<Eigen::Index>(pixels.size())).cast<float>();
    nn::Matrix<float> zeta = Eigen::Map<const Eigen::RowVectorXd>(signal.values.data(), static_cast<Eigen::Index>(signal.values.size())).cast<float>();
    const auto [mu, logvar] = cvae.encode(x, zeta);
    z = prior_latent(flow.config().latent_dim, rng);
    for (std::size_t k = 0; k < z.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      z[k] = mu(0, i) + std::exp(0.5 * logvar(0, i)) * z[k];
    }
  } else {
    z = prior_latent(flow.config().latent_dim, rng);
  }
  PosteriorSampleSet set = flow.sample(signal.values, z, a.n_samples, rng);
  set.param_names = c.prior.parameter_names();
  set.param_ranges = c.prior.parameter_ranges();
  if (set.param_names.size() != set.dimension()) {
    set.param_names.clear();
    set.param_ranges.clear();
  }
  write_posterior(a.out, set);
  out << "wrote " << set.size() << " posterior samples to " << a.out << "\n";
  return kExitOk;
}

struct AbcArgs {
  std::string data;
  std::string signal;
  std::string out;
};

int cmd_abc(const Common& common, const AbcArgs& a, std::ostream& out) {
  RunConfig c = load_config(common);
  c.abc.threads = resolve_threads(common.threads, 0);
  const Dataset data = read_dataset(a.data);
  const InPlaneSignal signal = read_signal(a.signal);
  const PosteriorSampleSet set = abc_posterior(signal.values, data, c.abc);
  write_posterior(a.out, set);
  out << "accepted " << set.size() << " of " << data.size() << " records; wrote " << a.out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string posterior;
  std::string compare;
  std::string truth;
  bool truth_unit = false;
  std::string checkpoint;
  std::string data;
  std::size_t max_items = 200;
  std::string out;
  std::string csv;
};

int cmd_eval(const Common& common, const EvalArgs& a, std::ostream& out) {
  RunConfig c = load_config(common);
  c.abc.threads = resolve_threads(common.threads, 0);
  json report;
  if (!a.posterior.empty()) {
    const PosteriorSampleSet set = read_posterior(a.posterior);
    const std::size_t best = set.argmax();
    const auto row = set.samples.row(static_cast<Eigen::Index>(best));
    const std::vector<double> map(row.data(), row.data() + row.size());
    report["n_samples"] = set.size();
    report["map_unit"] = map;
    if (!a.truth.empty()) {
      std::vector<double> truth = parse_list(a.truth);
      if (!a.truth_unit) {
        if (set.param_ranges.size() != truth.size()) throw ShapeError("posterior lacks ranges for a physical truth");
        truth = map_params_unit(truth, set.param_ranges, MapDirection::kToUnit);
      }
      const std::vector<ParamRange> unit(truth.size(), ParamRange{0.0, 1.0});
      report["normalized_mae"] = normalized_mae(map, truth, unit);
    }
    if (!a.compare.empty()) {
      report["wasserstein"] = wasserstein_marginals(set.samples, read_posterior(a.compare).samples);
    }
  }
  if (!a.checkpoint.empty()) {
    if (a.data.empty()) throw ConfigError("--checkpoint needs --data for a test-set evaluation");
    const MafFlow<float> flow = MafFlow<float>::from_checkpoint(read_checkpoint(a.checkpoint));
    const LoadedDataset loaded = dataset_roundtrip(a.data, c.split);
    std::vector<std::size_t> test = loaded.splits.test;
    if (test.size() > a.max_items) test.resize(a.max_items);
    // The ABC reference set is every record outside the test split.
    Dataset reference = loaded.data;
    const std::size_t keep = loaded.splits.train.size() + loaded.splits.validation.size();
    std::vector<std::size_t> pool = loaded.splits.train;
    pool.insert(pool.end(), loaded.splits.validation.begin(), loaded.splits.validation.end());
    std::sort(pool.begin(), pool.end());
    reference.params.clear();
    reference.signals.clear();
    reference.images.clear();
    for (std::size_t i : pool) {
      const auto p = loaded.data.param_row(i);
      const auto s = loaded.data.signal_row(i);
      reference.params.insert(reference.params.end(), p.begin(), p.end());
      reference.signals.insert(reference.signals.end(), s.begin(), s.end());
    }
    reference.manifest.n_samples = keep;
    reference.manifest.image_shape.reset();
    const std::vector<TestItem> items = test_items(loaded.data, test);
    const std::vector<double> flow_lp = test_log_probs(flow_estimator(flow, c.seed), items);
    const std::vector<double> abc_lp = test_log_probs(abc_kde_estimator(reference, c.abc), items);
    std::size_t wins = 0;
    double flow_mean = 0.0, abc_mean = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      wins += flow_lp[i] > abc_lp[i] ? 1 : 0;
      flow_mean += flow_lp[i];
      abc_mean += abc_lp[i];
    }
    flow_mean /= static_cast<double>(items.size());
    abc_mean /= static_cast<double>(items.size());
    report["test_items"] = items.size();
    report["flow_log_prob"] = flow_mean;
    report["abc_log_prob"] = abc_mean;
    report["flow_win_fraction"] = static_cast<double>(wins) / static_cast<double>(items.size());
    if (!a.csv.empty()) {
      std::ofstream csv(a.csv);
      csv << "index,flow_log_prob,abc_log_prob\n";
      for (std::size_t i = 0; i < items.size(); ++i) csv << test[i] << ',' << flow_lp[i] << ',' << abc_lp[i] << '\n';
    }
  }
  if (report.empty()) throw ConfigError("eval needs --posterior or --checkpoint");
  if (!a.out.empty()) write_json(a.out, report);
  out << report.dump(2) << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string checkpoint;
  std::string data;
  std::string signal;
  std::size_t simulations = 10000;
  std::size_t draws = 10000;
  std::size_t repetitions = 3;
  std::string out;
};

int cmd_bench(const Common& common, const BenchArgs& a, std::ostream& out) {
  RunConfig c = load_config(common);
  const unsigned threads = resolve_threads(common.threads, 1);
  c.abc.threads = threads;
  const MafFlow<float> flow = MafFlow<float>::from_checkpoint(read_checkpoint(a.checkpoint));
  const Dataset reuse = read_dataset(a.data);
  std::vector<double> observation;
  if (!a.signal.empty()) {
    observation = read_signal(a.signal).values;
  } else {
    // A fresh observation simulated outside the dataset's seed stream.
    GenerationRequest one = c.generation(1, 1);
    one.seed = c.seed ^ 0x9e3779b97f4a7c15ULL;
    const DatasetRecord rec = simulate_record(one, 0);
    observation.assign(rec.signal.begin(), rec.signal.end());
  }
  GenerationRequest cold = c.generation(a.simulations, threads);
  SpeedupOptions options;
  options.flow_draws = a.draws;
  options.repetitions = a.repetitions;
  const SpeedupReport report = benchmark_speedup(flow, c.abc, cold, reuse, observation, options);
  if (!a.out.empty()) write_json(a.out, json::parse(report.to_json()));
  out << report.to_json() << "\n";
  return kExitOk;
}

struct ReconstructArgs {
  std::string checkpoint;
  std::string signal;
  std::string out;
};

int cmd_reconstruct(const Common& common, const ReconstructArgs& a, std::ostream& out) {
  const RunConfig c = load_config(common);
  const CvaeModel<float> model = CvaeModel<float>::from_checkpoint(read_checkpoint(a.checkpoint));
  const InPlaneSignal signal = read_signal(a.signal);
  Rng rng = make_stream(c.seed, 0, salt::kLatent);
  const DetectorImage image = reconstruct_from_signal(model, signal.values, c.geometry, rng);
  write_image(a.out, image);
  out << "wrote reconstructed " << image.rows() << "x" << image.cols() << " image to " << a.out << "\n";
  return kExitOk;
}

void add_common(CLI::App* app, Common& common) {
  app->add_option("--config", common.config_path, "Run configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", common.seed, "Override the configured seed");
  app->add_option("--threads", common.threads, "Worker threads (SCATTER_SBI_THREADS takes precedence)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation-based inference for grazing-incidence scattering from multilayers", "ssbi"};
  app.require_subcommand(1);
  Common common;

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one detector image from explicit parameters");
  add_common(simulate, common);
  simulate->add_option("--params", sim.params, "Comma-separated free parameters in prior order")->required();
  simulate->add_flag("--unit", sim.unit, "Parameters are given in the unit cube");
  simulate->add_flag("--noise", sim.noise, "Apply Poisson counting noise");
  simulate->add_option("--out", sim.out, "Output image (.bin, with a .json sidecar)")->required();
  simulate->add_option("--signal-out", sim.signal_out, "Also write the extracted signal (JSON)");

  DatasetArgs ds;
  auto* dataset = app.add_subcommand("dataset", "Generate a simulated dataset from the prior");
  add_common(dataset, common);
  dataset->add_option("--n", ds.n, "Number of records")->required()->check(CLI::PositiveNumber);
  dataset->add_option("--out", ds.out, "Output directory")->required();
  dataset->add_flag("--images", ds.images, "Store detector images");
  dataset->add_option("--chunk", ds.chunk, "Records simulated per write")->check(CLI::PositiveNumber);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Extract the in-plane signal from an image");
  add_common(extract, common);
  extract->add_option("--image", ex.image, "Input image (.bin)")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", ex.out, "Output signal (JSON)")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train the flow or the CVAE on a dataset");
  add_common(train, common);
  train->add_option("--phase", tr.phase, "flow or cvae")->required()->check(CLI::IsMember({"flow", "cvae"}));
  train->add_option("--data", tr.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", tr.out, "Checkpoint path")->required();
  train->add_option("--log", tr.log, "Training log CSV (default: checkpoint path with .csv)");
  train->add_option("--encoder", tr.encoder, "CVAE checkpoint supplying z for flow training")->check(CLI::ExistingFile);
  train->add_option("--epochs", tr.epochs, "Override the phase's epoch count")->check(CLI::PositiveNumber);

  InferArgs inf;
  auto* infer = app.add_subcommand("infer", "Draw flow posterior samples for an observed signal");
  add_common(infer, common);
  infer->add_option("--checkpoint", inf.checkpoint, "Flow checkpoint")->required()->check(CLI::ExistingFile);
  infer->add_option("--signal", inf.signal, "Observed signal (JSON)")->required()->check(CLI::ExistingFile);
  infer->add_option("--image", inf.image, "Observed image; z then comes from the CVAE encoder")->check(CLI::ExistingFile);
  infer->add_option("--cvae", inf.cvae, "CVAE checkpoint used with --image")->check(CLI::ExistingFile);
  infer->add_option("--n-samples", inf.n_samples, "Posterior draws")->check(CLI::PositiveNumber);
  infer->add_option("--out", inf.out, "Output posterior directory")->required();

  AbcArgs ab;
  auto* abc = app.add_subcommand("abc", "Rejection ABC against a precomputed dataset");
  add_common(abc, common);
  abc->add_option("--data", ab.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  abc->add_option("--signal", ab.signal, "Observed signal (JSON)")->required()->check(CLI::ExistingFile);
  abc->add_option("--out", ab.out, "Output posterior directory")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Metrics over posterior files or a flow test set");
  add_common(eval, common);
  eval->add_option("--posterior", ev.posterior, "Posterior directory")->check(CLI::ExistingDirectory);
  eval->add_option("--compare", ev.compare, "Second posterior for the marginal Wasserstein distance")->check(CLI::ExistingDirectory);
  eval->add_option("--truth", ev.truth, "True parameters, comma-separated (physical units)");
  eval->add_flag("--truth-unit", ev.truth_unit, "--truth is given in the unit cube");
  eval->add_option("--checkpoint", ev.checkpoint, "Flow checkpoint for test log-probabilities")->check(CLI::ExistingFile);
  eval->add_option("--data", ev.data, "Dataset directory (its test split is evaluated)")->check(CLI::ExistingDirectory);
  eval->add_option("--max-items", ev.max_items, "Test items evaluated")->check(CLI::PositiveNumber);
  eval->add_option("--out", ev.out, "Write the report as JSON");
  eval->add_option("--csv", ev.csv, "Per-item log-probabilities as CSV");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Time flow inference against reuse and cold-start ABC");
  add_common(bench, common);
  bench->add_option("--checkpoint", be.checkpoint, "Flow checkpoint")->required()->check(CLI::ExistingFile);
  bench->add_option("--data", be.data, "Precomputed dataset for reuse-mode ABC")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--signal", be.signal, "Observed signal (default: a fresh simulation)")->check(CLI::ExistingFile);
  bench->add_option("--simulations", be.simulations, "Cold-start simulations")->check(CLI::PositiveNumber);
  bench->add_option("--draws", be.draws, "Flow posterior draws")->check(CLI::PositiveNumber);
  bench->add_option("--repetitions", be.repetitions, "Timing repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--out", be.out, "Write the report as JSON");

  ReconstructArgs re;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct an image from a signal with the CVAE");
  add_common(reconstruct, common);
  reconstruct->add_option("--checkpoint", re.checkpoint, "CVAE checkpoint")->required()->check(CLI::ExistingFile);
  reconstruct->add_option("--signal", re.signal, "Signal (JSON)")->required()->check(CLI::ExistingFile);
  reconstruct->add_option("--out", re.out, "Output image (.bin)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as CallForHelp from the subcommand.
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(common, sim, out);
    if (*dataset) return cmd_dataset(common, ds, out);
    if (*extract) return cmd_extract(common, ex, out);
    if (*train) return cmd_train(common, tr, out);
    if (*infer) return cmd_infer(common, inf, out);
    if (*abc) return cmd_abc(common, ab, out);
    if (*eval) return cmd_eval(common, ev, out);
    if (*bench) return cmd_bench(common, be, out);
    if (*reconstruct) return cmd_reconstruct(common, re, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << "error: no subcommand given\n";
  return kExitUsage;
}

}  // namespace ssbi::cli
