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

#include "ssbi/cvae.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "ssbi/error.hpp"

namespace ssbi {

using nlohmann::json;

void CvaeConfig::validate() const {
  if (widths.empty()) throw ConfigError("cvae needs at least one encoder block");
  for (int w : widths) {
    if (w <= 0) throw ConfigError("cvae block widths must be positive");
  }
  if (signal_len == 0 || latent_dim == 0 || cond_hidden == 0 || cond_dim == 0) {
    throw ConfigError("cvae dimensions must be positive");
  }
  const std::size_t factor = std::size_t{1} << widths.size();
  if (image_rows == 0 || image_cols == 0 || image_rows % factor != 0 || image_cols % factor != 0) {
    throw ConfigError("cvae image " + std::to_string(image_rows) + "x" + std::to_string(image_cols) +
                      " is not divisible by 2^" + std::to_string(widths.size()));
  }
}

std::string CvaeConfig::to_json() const {
  json j{{"image_rows", image_rows}, {"image_cols", image_cols}, {"signal_len", signal_len},
         {"latent_dim", latent_dim}, {"widths", widths},         {"cond_hidden", cond_hidden},
         {"cond_dim", cond_dim}};
  return j.dump();
}

CvaeConfig CvaeConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  CvaeConfig c;
  c.image_rows = j.at("image_rows").get<std::size_t>();
  c.image_cols = j.at("image_cols").get<std::size_t>();
  c.signal_len = j.at("signal_len").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.widths = j.at("widths").get<std::vector<int>>();
  c.cond_hidden = j.at("cond_hidden").get<std::size_t>();
  c.cond_dim = j.at("cond_dim").get<std::size_t>();
  return c;
}

std::vector<double> to_model_space(std::span<const double> intensities) {
  std::vector<double> out(intensities.size());
  for (std::size_t k = 0; k < intensities.size(); ++k) {
    out[k] = std::log10(1.0 + std::max(intensities[k], 0.0));
  }
  return out;
}

namespace {

int as_int(std::size_t v) { return static_cast<int>(v); }

template <typename T>
void uniform_fill(nn::Matrix<T>& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<T>(dist(rng));
}

}  // namespace

template <typename T>
CvaeModel<T>::CvaeModel(const CvaeConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  build(seed);
}

template <typename T>
std::pair<int, int> CvaeModel<T>::base_shape() const {
  const int factor = 1 << config_.blocks();
  return {as_int(config_.image_rows) / factor, as_int(config_.image_cols) / factor};
}

template <typename T>
void CvaeModel<T>::build(std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, salt::kInit);
  const int len = as_int(config_.signal_len);
  const int latent = as_int(config_.latent_dim);
  const int cond_h = as_int(config_.cond_hidden);
  const int cond = as_int(config_.cond_dim);
  const std::size_t nb = config_.blocks();
  const auto [h0, w0] = base_shape();
  const int top = config_.widths.back();

  auto dense = [&](const std::string& name, int out, int in) {
    const std::size_t w = params_.add(name + ".weight", {out, in});
    const std::size_t b = params_.add(name + ".bias", {out});
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    uniform_fill(params_[w].value, bound, rng);
    uniform_fill(params_[b].value, bound, rng);
    return std::pair{w, b};
  };
  auto conv_block = [&](const std::string& name, int rows, int cols, int fan_in, int channels) {
    BlockIds ids{};
    ids.weight = params_.add(name + ".weight", {rows, cols});
    ids.bias = params_.add(name + ".bias", {channels});
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    uniform_fill(params_[ids.weight].value, bound, rng);
    uniform_fill(params_[ids.bias].value, bound, rng);
    ids.gamma = params_.add(name + ".bn.weight", {channels});
    ids.beta = params_.add(name + ".bn.bias", {channels});
    ids.running_mean = params_.add(name + ".bn.running_mean", {channels}, false);
    ids.running_var = params_.add(name + ".bn.running_var", {channels}, false);
    params_[ids.gamma].value.setOnes();
    params_[ids.running_var].value.setOnes();
    return ids;
  };

  std::tie(cond0_w_, cond0_b_) = dense("cond.0", cond_h, len);
  std::tie(cond1_w_, cond1_b_) = dense("cond.1", cond, cond_h);

  int in_ch = 1;
  for (std::size_t b = 0; b < nb; ++b) {
    const int out_ch = config_.widths[b];
    enc_.push_back(conv_block("encoder." + std::to_string(b), out_ch, in_ch * 9, in_ch * 9, out_ch));
    in_ch = out_ch;
  }
  const int flat = top * h0 * w0;
  mu_w_ = params_.add("encoder.mu.weight", {latent, flat + cond});
  mu_b_ = params_.add("encoder.mu.bias", {latent});
  lv_w_ = params_.add("encoder.logvar.weight", {latent, flat + cond});
  lv_b_ = params_.add("encoder.logvar.bias", {latent});

  std::tie(dec_in_w_, dec_in_b_) = dense("decoder.input", flat, latent + cond);
  in_ch = top;
  for (std::size_t j = 0; j < nb; ++j) {
    const int out_ch = (j + 1 < nb) ? config_.widths[nb - 2 - j] : config_.widths[0];
    dec_.push_back(conv_block("decoder." + std::to_string(j), in_ch, out_ch * 9, out_ch * 9, out_ch));
    in_ch = out_ch;
  }
  head_w_ = params_.add("decoder.head.weight", {2, in_ch * 9});
  head_b_ = params_.add("decoder.head.bias", {2});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch * 9));
  nn::Matrix<T> mean_row(1, in_ch * 9);
  uniform_fill(mean_row, bound, rng);
  params_[head_w_].value.row(0) = mean_row;  // the log-variance row stays zero

  signal_mean_ = params_.add("signal.mean", {len}, false);
  signal_scale_ = params_.add("signal.scale", {len}, false);
  params_[signal_scale_].value.setOnes();
}

template <typename T>
void CvaeModel<T>::set_signal_normalization(std::span<const double> mean,
                                            std::span<const double> scale) {
  if (mean.size() != config_.signal_len || scale.size() != config_.signal_len) {
    throw ShapeError("signal normalization length differs from the signal length");
  }
  for (std::size_t k = 0; k < mean.size(); ++k) {
    params_[signal_mean_].value(0, static_cast<Eigen::Index>(k)) = static_cast<T>(mean[k]);
    params_[signal_scale_].value(0, static_cast<Eigen::Index>(k)) =
        static_cast<T>(scale[k] > 0 ? scale[k] : 1.0);
  }
}

template <typename T>
nn::Var<T> CvaeModel<T>::condition(nn::Tape<T>& tape, const nn::Matrix<T>& zeta) {
  if (zeta.cols() != static_cast<Eigen::Index>(config_.signal_len)) {
    throw ShapeError("signal length " + std::to_string(zeta.cols()) + " does not match the cvae (" +
                     std::to_string(config_.signal_len) + ")");
  }
  nn::Matrix<T> normalized = ((zeta.rowwise() - params_[signal_mean_].value.row(0)).array().rowwise() /
                              params_[signal_scale_].value.row(0).array())
                                 .matrix();
  const nn::Var<T> in = tape.constant(std::move(normalized));
  const nn::Var<T> hidden = nn::silu(nn::add_row(nn::matmul_nt(in, tape.parameter(params_[cond0_w_])),
                                                 tape.parameter(params_[cond0_b_])));
  return nn::add_row(nn::matmul_nt(hidden, tape.parameter(params_[cond1_w_])),
                     tape.parameter(params_[cond1_b_]));
}

template <typename T>
nn::Var<T> CvaeModel<T>::block(nn::Tape<T>& tape, const nn::Var<T>& x, const BlockIds& ids,
                               const nn::ConvShape& shape, bool transposed, bool batch_stats) {
  const nn::Var<T> w = tape.parameter(params_[ids.weight]);
  const nn::Var<T> b = tape.parameter(params_[ids.bias]);
  const nn::Var<T> y = transposed ? nn::conv_transpose2d(x, w, b, shape) : nn::conv2d(x, w, b, shape);
  nn::BatchNormState<T> state;
  state.running_mean = &params_[ids.running_mean].value;
  state.running_var = &params_[ids.running_var].value;
  state.training = batch_stats;
  return nn::silu(nn::batch_norm2d(y, tape.parameter(params_[ids.gamma]),
                                   tape.parameter(params_[ids.beta]), shape.out_channels, state));
}

template <typename T>
typename CvaeModel<T>::Gaussian CvaeModel<T>::encode_impl(nn::Tape<T>& tape,
                                                          const nn::Matrix<T>& images,
                                                          const nn::Matrix<T>& zeta,
                                                          bool batch_stats) {
  if (images.cols() != static_cast<Eigen::Index>(config_.pixels())) {
    throw ShapeError("image has " + std::to_string(images.cols()) + " pixels, the cvae expects " +
                     std::to_string(config_.pixels()));
  }
  if (images.rows() != zeta.rows()) throw ShapeError("image and signal batch sizes differ");
  const nn::Var<T> cond = condition(tape, zeta);
  nn::Var<T> x = tape.constant(images);
  int ch = 1, h = as_int(config_.image_rows), w = as_int(config_.image_cols);
  for (std::size_t b = 0; b < enc_.size(); ++b) {
    const nn::ConvShape shape = nn::conv_shape(ch, config_.widths[b], h, w, 3, 2, 1);
    x = block(tape, x, enc_[b], shape, false, batch_stats);
    ch = shape.out_channels;
    h = shape.out_h;
    w = shape.out_w;
  }
  const std::array<nn::Var<T>, 2> parts{x, cond};
  const nn::Var<T> feat = nn::concat_cols(std::span<const nn::Var<T>>(parts));
  Gaussian g;
  g.mean = nn::add_row(nn::matmul_nt(feat, tape.parameter(params_[mu_w_])), tape.parameter(params_[mu_b_]));
  g.logvar = nn::add_row(nn::matmul_nt(feat, tape.parameter(params_[lv_w_])), tape.parameter(params_[lv_b_]));
  return g;
}

template <typename T>
typename CvaeModel<T>::Gaussian CvaeModel<T>::decode_impl(nn::Tape<T>& tape, const nn::Var<T>& z,
                                                          const nn::Matrix<T>& zeta,
                                                          bool batch_stats) {
  if (z.cols() != static_cast<Eigen::Index>(config_.latent_dim)) {
    throw ShapeError("latent has " + std::to_string(z.cols()) + " entries, the cvae expects " +
                     std::to_string(config_.latent_dim));
  }
  if (z.rows() != zeta.rows()) throw ShapeError("latent and signal batch sizes differ");
  const nn::Var<T> cond = condition(tape, zeta);
  const std::array<nn::Var<T>, 2> parts{z, cond};
  const nn::Var<T> in = nn::concat_cols(std::span<const nn::Var<T>>(parts));
  nn::Var<T> x = nn::silu(nn::add_row(nn::matmul_nt(in, tape.parameter(params_[dec_in_w_])),
                                      tape.parameter(params_[dec_in_b_])));
  auto [h, w] = base_shape();
  int ch = config_.widths.back();
  const std::size_t nb = config_.blocks();
  for (std::size_t j = 0; j < nb; ++j) {
    const int out_ch = (j + 1 < nb) ? config_.widths[nb - 2 - j] : config_.widths[0];
    const nn::ConvShape shape = nn::conv_transpose_shape(ch, out_ch, h, w, 3, 2, 1, 1);
    x = block(tape, x, dec_[j], shape, true, batch_stats);
    ch = out_ch;
    h = shape.out_h;
    w = shape.out_w;
  }
  const nn::ConvShape head = nn::conv_shape(ch, 2, h, w, 3, 1, 1);
  const nn::Var<T> out = nn::conv2d(x, tape.parameter(params_[head_w_]), tape.parameter(params_[head_b_]), head);
  const Eigen::Index pixels = static_cast<Eigen::Index>(config_.pixels());
  Gaussian g;
  g.mean = nn::slice_cols(out, 0, pixels);
  g.logvar = nn::clamp(nn::slice_cols(out, pixels, pixels), T(-7), T(7));
  return g;
}

template <typename T>
typename CvaeModel<T>::Gaussian CvaeModel<T>::encode(nn::Tape<T>& tape, const nn::Matrix<T>& images,
                                                     const nn::Matrix<T>& zeta) {
  return encode_impl(tape, images, zeta, training_);
}

template <typename T>
typename CvaeModel<T>::Gaussian CvaeModel<T>::decode(nn::Tape<T>& tape, const nn::Var<T>& z,
                                                     const nn::Matrix<T>& zeta) {
  return decode_impl(tape, z, zeta, training_);
}

template <typename T>
std::pair<nn::Matrix<T>, nn::Matrix<T>> CvaeModel<T>::encode(const nn::Matrix<T>& images,
                                                             const nn::Matrix<T>& zeta) const {
  nn::Tape<T> tape(false);
  const Gaussian g = const_cast<CvaeModel*>(this)->encode_impl(tape, images, zeta, false);
  return {g.mean.value(), g.logvar.value()};
}

template <typename T>
std::pair<nn::Matrix<T>, nn::Matrix<T>> CvaeModel<T>::decode(const nn::Matrix<T>& z,
                                                             const nn::Matrix<T>& zeta) const {
  nn::Tape<T> tape(false);
  const nn::Var<T> zv = tape.constant(z);
  const Gaussian g = const_cast<CvaeModel*>(this)->decode_impl(tape, zv, zeta, false);
  return {g.mean.value(), g.logvar.value()};
}

template <typename T>
std::vector<std::pair<int, int>> CvaeModel<T>::encoder_input_shapes() const {
  std::vector<std::pair<int, int>> out;
  int h = as_int(config_.image_rows), w = as_int(config_.image_cols), ch = 1;
  for (std::size_t b = 0; b < config_.blocks(); ++b) {
    out.emplace_back(h, w);
    const nn::ConvShape s = nn::conv_shape(ch, config_.widths[b], h, w, 3, 2, 1);
    h = s.out_h;
    w = s.out_w;
    ch = s.out_channels;
  }
  return out;
}

template <typename T>
std::vector<std::pair<int, int>> CvaeModel<T>::decoder_output_shapes() const {
  std::vector<std::pair<int, int>> out;
  auto [h, w] = base_shape();
  for (std::size_t j = 0; j < config_.blocks(); ++j) {
    const nn::ConvShape s = nn::conv_transpose_shape(1, 1, h, w, 3, 2, 1, 1);
    h = s.out_h;
    w = s.out_w;
    out.emplace_back(h, w);
  }
  return {out.rbegin(), out.rend()};
}

template <typename T>
Checkpoint CvaeModel<T>::to_checkpoint() const {
  json config = json::parse(config_.to_json());
  config["trained"] = trained_;
  Checkpoint cp;
  cp.kind = "cvae";
  cp.config_json = config.dump();
  cp.tensors = params_.template cast<float>();
  return cp;
}

template <typename T>
CvaeModel<T> CvaeModel<T>::from_checkpoint(const Checkpoint& checkpoint) {
  if (checkpoint.kind != "cvae") throw ConfigError("checkpoint holds a " + checkpoint.kind + " model, not a cvae");
  const json config = json::parse(checkpoint.config_json);
  CvaeModel<T> model(CvaeConfig::from_json(checkpoint.config_json), 0);
  for (auto& t : model.params_) {
    const auto& src = checkpoint.tensors.find(t.name);
    if (src.value.rows() != t.value.rows() || src.value.cols() != t.value.cols()) {
      throw CorruptionError("tensor " + t.name + " has the wrong shape", t.name);
    }
    t.value = src.value.template cast<T>();
  }
  model.trained_ = config.value("trained", false);
  model.training_ = false;
  return model;
}

template <typename T>
nn::Var<T> cvae_loss(CvaeModel<T>& model, nn::Tape<T>& tape, const nn::Matrix<T>& images,
                     const nn::Matrix<T>& zeta, Rng& rng, std::size_t batch_index) {
  if (images.rows() == 0) throw ShapeError("cvae batch is empty");
  const auto q = model.encode(tape, images, zeta);
  std::normal_distribution<double> normal;
  nn::Matrix<T> eps(images.rows(), static_cast<Eigen::Index>(model.config().latent_dim));
  for (Eigen::Index k = 0; k < eps.size(); ++k) eps.data()[k] = static_cast<T>(normal(rng));
  const nn::Var<T> z =
      nn::add(q.mean, nn::mul(nn::exp(nn::scale(q.logvar, T(0.5))), tape.constant(std::move(eps))));
  const auto p = model.decode(tape, z, zeta);
  const nn::Var<T> recon = nn::gaussian_log_density(tape.constant(images), p.mean, p.logvar);
  const nn::Var<T> kl = nn::kl_standard_normal(q.mean, q.logvar);
  const nn::Var<T> loss = nn::mean(nn::sub(kl, recon));
  if (!std::isfinite(static_cast<double>(loss.value()(0, 0)))) {
    throw TrainingError("non-finite cvae loss", batch_index);
  }
  return loss;
}

template <typename T>
DetectorImage reconstruct_from_signal(const CvaeModel<T>& model, std::span<const double> zeta,
                                      const ExperimentGeometry& geometry, Rng& rng) {
  const CvaeConfig& c = model.config();
  if (geometry.n_pixels_z != c.image_rows || geometry.n_pixels_y != c.image_cols) {
    throw ShapeError("geometry does not match the cvae image shape");
  }
  if (zeta.size() != c.signal_len) throw ShapeError("signal length does not match the cvae");
  std::normal_distribution<double> normal;
  nn::Matrix<T> z(1, static_cast<Eigen::Index>(c.latent_dim));
  for (Eigen::Index k = 0; k < z.size(); ++k) z.data()[k] = static_cast<T>(normal(rng));
  nn::Matrix<T> zm(1, static_cast<Eigen::Index>(c.signal_len));
  for (std::size_t k = 0; k < zeta.size(); ++k) zm(0, static_cast<Eigen::Index>(k)) = static_cast<T>(zeta[k]);
  const auto [mean, logvar] = model.decode(z, zm);
  DetectorImage image;
  image.geometry = geometry;
  image.intensities.resize(c.pixels());
  for (std::size_t k = 0; k < c.pixels(); ++k) {
    image.intensities[k] = std::pow(10.0, static_cast<double>(mean(0, static_cast<Eigen::Index>(k)))) - 1.0;
  }
  return image;
}

#define SSBI_INSTANTIATE_CVAE(T)                                                               \
  template class CvaeModel<T>;                                                                 \
  template nn::Var<T> cvae_loss(CvaeModel<T>&, nn::Tape<T>&, const nn::Matrix<T>&,             \
                                const nn::Matrix<T>&, Rng&, std::size_t);                      \
  template DetectorImage reconstruct_from_signal(const CvaeModel<T>&, std::span<const double>, \
                                                 const ExperimentGeometry&, Rng&);

SSBI_INSTANTIATE_CVAE(float)
SSBI_INSTANTIATE_CVAE(double)

}  // namespace ssbi
