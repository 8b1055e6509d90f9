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

#include "ssbi/maf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "ssbi/error.hpp"

namespace ssbi {

using nlohmann::json;

void FlowConfig::validate() const {
  if (param_dim == 0 || signal_len == 0 || n_transforms == 0 || hidden == 0 ||
      embed_hidden == 0 || context_dim == 0) {
    throw ConfigError("flow dimensions must be positive");
  }
}

std::string FlowConfig::to_json() const {
  json j{{"param_dim", param_dim},       {"signal_len", signal_len},
         {"latent_dim", latent_dim},     {"n_transforms", n_transforms},
         {"hidden", hidden},             {"embed_hidden", embed_hidden},
         {"context_dim", context_dim},   {"logit_transform", logit_transform}};
  return j.dump();
}

FlowConfig FlowConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  FlowConfig c;
  c.param_dim = j.at("param_dim").get<std::size_t>();
  c.signal_len = j.at("signal_len").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.n_transforms = j.at("n_transforms").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.embed_hidden = j.at("embed_hidden").get<std::size_t>();
  c.context_dim = j.at("context_dim").get<std::size_t>();
  c.logit_transform = j.at("logit_transform").get<bool>();
  return c;
}

namespace {

int as_int(std::size_t v) { return static_cast<int>(v); }

template <typename T>
void uniform_fill(nn::Matrix<T>& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<T>(dist(rng));
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

template <typename T>
MafFlow<T>::MafFlow(const FlowConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  build(seed, true);
}

template <typename T>
void MafFlow<T>::build(std::uint64_t seed, bool initialize) {
  const int d = as_int(config_.param_dim);
  const int hidden = as_int(config_.hidden);
  const int ctx_in = as_int(config_.signal_len + config_.latent_dim);
  const int ctx = as_int(config_.context_dim);
  const int emb = as_int(config_.embed_hidden);

  params_ = nn::ParameterSet<T>();
  embed0_w_ = params_.add("embed.0.weight", {emb, ctx_in});
  embed0_b_ = params_.add("embed.0.bias", {emb});
  embed1_w_ = params_.add("embed.1.weight", {ctx, emb});
  embed1_b_ = params_.add("embed.1.bias", {ctx});
  transforms_.clear();
  for (std::size_t k = 0; k < config_.n_transforms; ++k) {
    const std::string p = "transform." + std::to_string(k) + ".";
    TransformIds ids{};
    ids.in_weight = params_.add(p + "in.weight", {hidden, d});
    ids.ctx_weight = params_.add(p + "context.weight", {hidden, ctx});
    ids.in_bias = params_.add(p + "in.bias", {hidden});
    ids.out_weight = params_.add(p + "out.weight", {2 * d, hidden});
    ids.out_bias = params_.add(p + "out.bias", {2 * d});
    transforms_.push_back(ids);
  }
  base_mean_w_ = params_.add("base.mean.weight", {d, ctx});
  base_mean_b_ = params_.add("base.mean.bias", {d});
  base_logvar_w_ = params_.add("base.logvar.weight", {d, ctx});
  base_logvar_b_ = params_.add("base.logvar.bias", {d});
  signal_mean_ = params_.add("signal.mean", {as_int(config_.signal_len)}, false);
  signal_scale_ = params_.add("signal.scale", {as_int(config_.signal_len)}, false);
  params_[signal_scale_].value.setOnes();

  degrees_.resize(config_.hidden);
  for (int h = 0; h < hidden; ++h) {
    degrees_[static_cast<std::size_t>(h)] =
        static_cast<int>((static_cast<long long>(h) * d) / hidden);
  }
  in_mask_ = nn::Matrix<T>::Zero(hidden, d);
  out_mask_ = nn::Matrix<T>::Zero(2 * d, hidden);
  for (int h = 0; h < hidden; ++h) {
    const int m = degrees_[static_cast<std::size_t>(h)];
    for (int j = 0; j < m; ++j) in_mask_(h, j) = T(1);
    for (int i = m; i < d; ++i) {
      out_mask_(i, h) = T(1);
      out_mask_(d + i, h) = T(1);
    }
  }

  perms_.assign(config_.n_transforms, std::vector<int>(config_.param_dim));
  for (std::size_t k = 0; k < config_.n_transforms; ++k) {
    for (int j = 0; j < d; ++j) perms_[k][static_cast<std::size_t>(j)] = (k == 0) ? j : d - 1 - j;
  }

  if (!initialize) return;
  Rng rng = make_stream(seed, 0, salt::kInit);
  auto init_layer = [&](std::size_t w, std::size_t b, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    uniform_fill(params_[w].value, bound, rng);
    uniform_fill(params_[b].value, bound, rng);
  };
  init_layer(embed0_w_, embed0_b_, ctx_in);
  init_layer(embed1_w_, embed1_b_, emb);
  for (const TransformIds& ids : transforms_) {
    init_layer(ids.in_weight, ids.in_bias, std::max(d, 1) + ctx);
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(d, 1) + ctx));
    uniform_fill(params_[ids.ctx_weight].value, bound, rng);
    // Output layers start at zero: every transform is the identity.
  }
}

template <typename T>
void MafFlow<T>::set_signal_normalization(std::span<const double> mean,
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
void MafFlow<T>::check_batch(const FlowBatch<T>& batch) const {
  const Eigen::Index n = batch.y.rows();
  if (n == 0) throw ShapeError("flow batch is empty");
  if (batch.y.cols() != static_cast<Eigen::Index>(config_.param_dim)) {
    throw ShapeError("parameter dimension " + std::to_string(batch.y.cols()) +
                     " does not match the flow (" + std::to_string(config_.param_dim) + ")");
  }
  if (batch.zeta.rows() != n || batch.zeta.cols() != static_cast<Eigen::Index>(config_.signal_len)) {
    throw ShapeError("signal length does not match the flow");
  }
  if (batch.z.rows() != n || batch.z.cols() != static_cast<Eigen::Index>(config_.latent_dim)) {
    throw ShapeError("latent dimension does not match the flow");
  }
}

template <typename T>
typename MafFlow<T>::Forward MafFlow<T>::forward(nn::Tape<T>& tape, const FlowBatch<T>& batch) {
  using nn::Var;
  check_batch(batch);
  const Eigen::Index n = batch.y.rows();
  const Eigen::Index d = static_cast<Eigen::Index>(config_.param_dim);
  const Eigen::Index len = static_cast<Eigen::Index>(config_.signal_len);

  nn::Matrix<T> ctx_in(n, len + static_cast<Eigen::Index>(config_.latent_dim));
  ctx_in.leftCols(len) = ((batch.zeta.rowwise() - params_[signal_mean_].value.row(0)).array().rowwise() /
                          params_[signal_scale_].value.row(0).array())
                             .matrix();
  ctx_in.rightCols(static_cast<Eigen::Index>(config_.latent_dim)) = batch.z;
  const Var<T> c_in = tape.constant(std::move(ctx_in));
  const Var<T> e0 = nn::tanh(nn::add_row(nn::matmul_nt(c_in, tape.parameter(params_[embed0_w_])),
                                           tape.parameter(params_[embed0_b_])));
  const Var<T> ctx = nn::add_row(nn::matmul_nt(e0, tape.parameter(params_[embed1_w_])),
                                  tape.parameter(params_[embed1_b_]));

  nn::Matrix<T> x(n, d);
  nn::Matrix<T> jac = nn::Matrix<T>::Zero(n, 1);
  if (config_.logit_transform) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double yc = std::clamp(static_cast<double>(batch.y(i, j)), kLogitEpsilon, 1.0 - kLogitEpsilon);
        const double ly = std::log(yc), l1y = std::log1p(-yc);
        x(i, j) = static_cast<T>(ly - l1y);
        jac(i, 0) -= static_cast<T>(ly + l1y);
      }
    }
  } else {
    x = batch.y;
  }

  Var<T> h = tape.constant(std::move(x));
  Var<T> sum_alpha;
  for (std::size_t k = 0; k < transforms_.size(); ++k) {
    const TransformIds& ids = transforms_[k];
    h = nn::permute_cols(h, perms_[k]);
    const Var<T> pre = nn::add_row(
        nn::add(nn::matmul_nt(h, nn::hadamard_const(tape.parameter(params_[ids.in_weight]), in_mask_)),
                 nn::matmul_nt(ctx, tape.parameter(params_[ids.ctx_weight]))),
        tape.parameter(params_[ids.in_bias]));
    const Var<T> hidden = nn::tanh(pre);
    const Var<T> out = nn::add_row(
        nn::matmul_nt(hidden, nn::hadamard_const(tape.parameter(params_[ids.out_weight]), out_mask_)),
        tape.parameter(params_[ids.out_bias]));
    const Var<T> mu = nn::slice_cols(out, 0, d);
    const Var<T> alpha = nn::scale(nn::tanh(nn::scale(nn::slice_cols(out, d, d), T(1) / T(3))), T(3));
    h = nn::mul(nn::sub(h, mu), nn::exp(nn::scale(alpha, T(-1))));
    const Var<T> s = nn::row_sum(alpha);
    sum_alpha = (k == 0) ? s : nn::add(sum_alpha, s);
  }
  const Var<T> mean = nn::add_row(nn::matmul_nt(ctx, tape.parameter(params_[base_mean_w_])),
                                   tape.parameter(params_[base_mean_b_]));
  const Var<T> logvar = nn::add_row(nn::matmul_nt(ctx, tape.parameter(params_[base_logvar_w_])),
                                     tape.parameter(params_[base_logvar_b_]));
  Var<T> lp = nn::sub(nn::gaussian_log_density(h, mean, logvar), sum_alpha);
  if (config_.logit_transform) lp = nn::add(lp, tape.constant(std::move(jac)));
  return {h, lp};
}

template <typename T>
nn::Var<T> MafFlow<T>::log_prob(nn::Tape<T>& tape, const FlowBatch<T>& batch) {
  return forward(tape, batch).log_prob;
}

template <typename T>
std::vector<double> MafFlow<T>::log_prob(const FlowBatch<T>& batch) const {
  nn::Tape<T> tape(false);
  const nn::Matrix<T>& lp = const_cast<MafFlow*>(this)->forward(tape, batch).log_prob.value();
  std::vector<double> out(static_cast<std::size_t>(lp.rows()));
  for (Eigen::Index i = 0; i < lp.rows(); ++i) out[static_cast<std::size_t>(i)] = lp(i, 0);
  return out;
}

template <typename T>
nn::Matrix<T> MafFlow<T>::to_base(const FlowBatch<T>& batch) const {
  nn::Tape<T> tape(false);
  return const_cast<MafFlow*>(this)->forward(tape, batch).base.value();
}

template <typename T>
nn::Matrix<T> MafFlow<T>::context_row(std::span<const double> zeta, std::span<const double> z) const {
  if (zeta.size() != config_.signal_len) throw ShapeError("signal length does not match the flow");
  if (z.size() != config_.latent_dim) throw ShapeError("latent dimension does not match the flow");
  const Eigen::Index len = static_cast<Eigen::Index>(config_.signal_len);
  nn::Matrix<T> in(1, len + static_cast<Eigen::Index>(config_.latent_dim));
  for (Eigen::Index k = 0; k < len; ++k) {
    in(0, k) = (static_cast<T>(zeta[static_cast<std::size_t>(k)]) - params_[signal_mean_].value(0, k)) /
               params_[signal_scale_].value(0, k);
  }
  for (std::size_t k = 0; k < z.size(); ++k) in(0, len + static_cast<Eigen::Index>(k)) = static_cast<T>(z[k]);
  nn::Matrix<T> e0 = in * params_[embed0_w_].value.transpose() + params_[embed0_b_].value;
  e0 = e0.array().tanh().matrix();
  return e0 * params_[embed1_w_].value.transpose() + params_[embed1_b_].value;
}

template <typename T>
nn::Matrix<double> MafFlow<T>::invert(const nn::Matrix<T>& base, const nn::Matrix<T>& ctx,
                                       std::vector<double>* sum_alpha) const {
  using ColMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using ColVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const Eigen::Index n = base.rows();
  const int d = as_int(config_.param_dim);
  const Eigen::Index hidden_units = static_cast<Eigen::Index>(config_.hidden);

  // Units with degree g occupy [group[g], group[g + 1]).
  std::vector<Eigen::Index> group(static_cast<std::size_t>(d) + 1, hidden_units);
  for (Eigen::Index h = hidden_units; h-- > 0;) {
    group[static_cast<std::size_t>(degrees_[static_cast<std::size_t>(h)])] = h;
  }
  for (int g = d - 1; g >= 0; --g) {
    group[static_cast<std::size_t>(g)] =
        std::min(group[static_cast<std::size_t>(g)], group[static_cast<std::size_t>(g) + 1]);
  }

  ColMat v = base;
  ColMat hin(n, d);
  ColMat hidden(n, hidden_units);
  ColVec alpha_total = ColVec::Zero(n);
  ColVec mu(n), araw(n);
  for (std::size_t k = transforms_.size(); k-- > 0;) {
    const TransformIds& ids = transforms_[k];
    const ColMat w_in = params_[ids.in_weight].value.cwiseProduct(in_mask_);
    const ColMat w_out = params_[ids.out_weight].value.cwiseProduct(out_mask_);
    const nn::Matrix<T>& b_out = params_[ids.out_bias].value;
    const nn::Matrix<T> ctx_proj =
        ctx * params_[ids.ctx_weight].value.transpose() + params_[ids.in_bias].value;
    for (int i = 0; i < d; ++i) {
      const Eigen::Index g0 = group[static_cast<std::size_t>(i)];
      const Eigen::Index g1 = group[static_cast<std::size_t>(i) + 1];
      if (g1 > g0) {
        auto block = hidden.middleCols(g0, g1 - g0);
        block.rowwise() = ctx_proj.row(0).segment(g0, g1 - g0);
        if (i > 0) block.noalias() += hin.leftCols(i) * w_in.block(g0, 0, g1 - g0, i).transpose();
        block = block.array().tanh().matrix();
      }
      mu.noalias() = hidden.leftCols(g1) * w_out.row(i).head(g1).transpose();
      araw.noalias() = hidden.leftCols(g1) * w_out.row(d + i).head(g1).transpose();
      mu.array() += b_out(0, i);
      const auto alpha = (T(3) * ((araw.array() + b_out(0, d + i)) / T(3)).tanh()).eval();
      hin.col(i) = (v.col(i).array() * alpha.exp() + mu.array()).matrix();
      alpha_total.array() += alpha;
    }
    const std::vector<int>& perm = perms_[k];
    for (int j = 0; j < d; ++j) v.col(perm[static_cast<std::size_t>(j)]) = hin.col(j);
  }
  if (sum_alpha) {
    sum_alpha->resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) (*sum_alpha)[static_cast<std::size_t>(i)] = alpha_total(i);
  }
  return v.template cast<double>();
}

template <typename T>
nn::Matrix<double> MafFlow<T>::from_base(const nn::Matrix<T>& base, std::span<const double> zeta,
                                          std::span<const double> z) const {
  if (base.cols() != static_cast<Eigen::Index>(config_.param_dim)) {
    throw ShapeError("base points have the wrong dimension");
  }
  nn::Matrix<double> x = invert(base, context_row(zeta, z), nullptr);
  if (config_.logit_transform) x = (1.0 / (1.0 + (-x.array()).exp())).matrix();
  return x;
}

template <typename T>
PosteriorSampleSet MafFlow<T>::sample(std::span<const double> zeta, std::span<const double> z,
                                      std::size_t n, Rng& rng) const {
  if (n == 0) throw std::invalid_argument("sample count must be at least 1");
  const Eigen::Index d = static_cast<Eigen::Index>(config_.param_dim);
  const nn::Matrix<T> ctx = context_row(zeta, z);
  const nn::Matrix<T> mean = ctx * params_[base_mean_w_].value.transpose() + params_[base_mean_b_].value;
  const nn::Matrix<T> logvar =
      ctx * params_[base_logvar_w_].value.transpose() + params_[base_logvar_b_].value;
  const double log2pi = std::log(2.0 * std::numbers::pi);

  std::normal_distribution<double> normal;
  nn::Matrix<T> base(static_cast<Eigen::Index>(n), d);
  std::vector<double> log_base(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double eps = normal(rng);
      const double lv = logvar(0, j);
      base(static_cast<Eigen::Index>(i), j) = static_cast<T>(mean(0, j) + std::exp(0.5 * lv) * eps);
      log_base[i] -= 0.5 * (lv + log2pi + eps * eps);
    }
  }
  std::vector<double> sum_alpha;
  nn::Matrix<double> x = invert(base, ctx, &sum_alpha);

  PosteriorSampleSet out;
  out.samples.resize(static_cast<Eigen::Index>(n), d);
  out.log_probs.resize(n);
  std::vector<std::size_t> clamped;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i);
    double lp = log_base[i] - sum_alpha[i];
    bool hit = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      double v = x(r, j);
      if (config_.logit_transform) {
        lp += softplus(v) + softplus(-v);
        v = 1.0 / (1.0 + std::exp(-v));
        if (v < kLogitEpsilon || v > 1.0 - kLogitEpsilon) {
          v = std::clamp(v, kLogitEpsilon, 1.0 - kLogitEpsilon);
          hit = true;
        }
      }
      out.samples(r, j) = v;
    }
    out.log_probs[i] = lp;
    if (hit) clamped.push_back(i);
  }
  // Draws pushed onto the boundary clamp take the density of the clamped point.
  if (!clamped.empty()) {
    FlowBatch<T> batch;
    const Eigen::Index m = static_cast<Eigen::Index>(clamped.size());
    batch.y.resize(m, d);
    batch.zeta.resize(m, static_cast<Eigen::Index>(config_.signal_len));
    batch.z.resize(m, static_cast<Eigen::Index>(config_.latent_dim));
    for (Eigen::Index r = 0; r < m; ++r) {
      batch.y.row(r) = out.samples.row(static_cast<Eigen::Index>(clamped[static_cast<std::size_t>(r)]))
                           .template cast<T>();
      for (std::size_t k = 0; k < zeta.size(); ++k) batch.zeta(r, static_cast<Eigen::Index>(k)) = static_cast<T>(zeta[k]);
      for (std::size_t k = 0; k < z.size(); ++k) batch.z(r, static_cast<Eigen::Index>(k)) = static_cast<T>(z[k]);
    }
    const std::vector<double> lps = log_prob(batch);
    for (std::size_t r = 0; r < clamped.size(); ++r) out.log_probs[clamped[r]] = lps[r];
  }
  return out;
}

template <typename T>
Checkpoint MafFlow<T>::to_checkpoint() const {
  json config = json::parse(config_.to_json());
  config["permutations"] = perms_;
  config["trained"] = trained_;
  Checkpoint cp;
  cp.kind = "flow";
  cp.config_json = config.dump();
  cp.tensors = params_.template cast<float>();
  return cp;
}

template <typename T>
MafFlow<T> MafFlow<T>::from_checkpoint(const Checkpoint& checkpoint) {
  if (checkpoint.kind != "flow") throw ConfigError("checkpoint holds a " + checkpoint.kind + " model, not a flow");
  const json config = json::parse(checkpoint.config_json);
  MafFlow<T> model(FlowConfig::from_json(checkpoint.config_json), 0);
  model.perms_ = config.at("permutations").get<std::vector<std::vector<int>>>();
  if (model.perms_.size() != model.config_.n_transforms) {
    throw CorruptionError("checkpoint permutation count does not match the flow", "header");
  }
  for (auto& t : model.params_) {
    const auto& src = checkpoint.tensors.find(t.name);
    if (src.value.rows() != t.value.rows() || src.value.cols() != t.value.cols()) {
      throw CorruptionError("tensor " + t.name + " has the wrong shape", t.name);
    }
    t.value = src.value.template cast<T>();
  }
  model.trained_ = config.value("trained", false);
  return model;
}

template <typename T>
double maf_log_prob(const MafFlow<T>& model, std::span<const double> y,
                    std::span<const double> zeta, std::span<const double> z) {
  FlowBatch<T> batch;
  batch.y = Eigen::Map<const Eigen::RowVectorXd>(y.data(), static_cast<Eigen::Index>(y.size())).template cast<T>();
  batch.zeta = Eigen::Map<const Eigen::RowVectorXd>(zeta.data(), static_cast<Eigen::Index>(zeta.size())).template cast<T>();
  batch.z = Eigen::Map<const Eigen::RowVectorXd>(z.data(), static_cast<Eigen::Index>(z.size())).template cast<T>();
  return model.log_prob(batch)[0];
}

template <typename T>
PosteriorSampleSet maf_sample(const MafFlow<T>& model, std::span<const double> zeta,
                              std::span<const double> z, std::size_t n, Rng& rng) {
  return model.sample(zeta, z, n, rng);
}

template <typename T>
nn::Var<T> nf_loss(MafFlow<T>& model, nn::Tape<T>& tape, const FlowBatch<T>& batch,
                    std::size_t batch_index) {
  const nn::Var<T> lp = model.log_prob(tape, batch);
  const nn::Var<T> loss = nn::scale(nn::mean(lp), T(-1));
  if (!std::isfinite(static_cast<double>(loss.value()(0, 0)))) {
    throw TrainingError("non-finite flow loss", batch_index);
  }
  return loss;
}

#define SSBI_INSTANTIATE_FLOW(T)                                                              \
  template class MafFlow<T>;                                                                  \
  template double maf_log_prob(const MafFlow<T>&, std::span<const double>,                    \
                               std::span<const double>, std::span<const double>);             \
  template PosteriorSampleSet maf_sample(const MafFlow<T>&, std::span<const double>,          \
                                         std::span<const double>, std::size_t, Rng&);         \
  template nn::Var<T> nf_loss(MafFlow<T>&, nn::Tape<T>&, const FlowBatch<T>&, std::size_t);

SSBI_INSTANTIATE_FLOW(float)
SSBI_INSTANTIATE_FLOW(double)

}  // namespace ssbi
