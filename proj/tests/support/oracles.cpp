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

#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <stdexcept>

#include "ssbi/abc.hpp"
#include "ssbi/cvae.hpp"
#include "ssbi/dataset.hpp"
#include "ssbi/grad_check.hpp"
#include "ssbi/inplane.hpp"
#include "ssbi/metrics.hpp"
#include "ssbi/prior.hpp"
#include "ssbi/roughness.hpp"
#include "ssbi/simulate.hpp"

namespace ssbi::testing {

namespace fs = std::filesystem;
using C = std::complex<double>;

TmmFields tmm_amplitudes(const MultilayerSample& sample, double angle, double wavelength) {
  const std::size_t n_layers = sample.layers.size();
  const std::size_t media = n_layers + 2;
  const double k = 2.0 * std::numbers::pi / wavelength;
  const double s2 = std::sin(angle) * std::sin(angle);
  std::vector<C> kz(media);
  std::vector<double> depth(media - 1, 0.0);  // depth of interface j (media j | j+1)
  auto vertical = [&](double delta, double beta) {
    C v = k * std::sqrt(C(s2 - 2.0 * delta, 2.0 * beta));
    return v.imag() < 0.0 ? -v : v;
  };
  kz[0] = vertical(0.0, 0.0);
  for (std::size_t j = 1; j <= n_layers; ++j) {
    kz[j] = vertical(sample.layers[j - 1].dispersion, sample.layers[j - 1].absorption);
    depth[j] = depth[j - 1] + sample.layers[j - 1].thickness;
  }
  kz[media - 1] = vertical(sample.substrate.dispersion, sample.substrate.absorption);

  // Unknowns: R_0, (T_j, R_j) for the layers, T_sub.
  const Eigen::Index n = static_cast<Eigen::Index>(2 * media - 2);
  auto t_index = [&](std::size_t j) -> Eigen::Index { return static_cast<Eigen::Index>(2 * j - 1); };
  auto r_index = [&](std::size_t j) -> Eigen::Index { return static_cast<Eigen::Index>(2 * j); };
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  const C i1(0.0, 1.0);
  for (std::size_t j = 0; j + 1 < media; ++j) {
    const double x = depth[j];
    const Eigen::Index e_field = static_cast<Eigen::Index>(2 * j);
    const Eigen::Index e_deriv = e_field + 1;
    for (int side = 0; side < 2; ++side) {
      const std::size_t m = j + static_cast<std::size_t>(side);
      const double sign = side == 0 ? 1.0 : -1.0;
      const C down = std::exp(i1 * kz[m] * x);
      const C up = std::exp(-i1 * kz[m] * x);
      // Transmitted part.
      if (m == 0) {
        rhs(e_field) -= sign * down;
        rhs(e_deriv) -= sign * kz[m] * down;
      } else {
        a(e_field, t_index(m)) += sign * down;
        a(e_deriv, t_index(m)) += sign * kz[m] * down;
      }
      // Reflected part; none in the substrate.
      if (m == media - 1) continue;
      a(e_field, r_index(m)) += sign * up;
      a(e_deriv, r_index(m)) -= sign * kz[m] * up;
    }
  }
  const Eigen::VectorXcd sol = a.fullPivLu().solve(rhs);
  TmmFields out;
  out.transmitted.assign(media, C{});
  out.reflected.assign(media, C{});
  out.transmitted[0] = 1.0;
  out.reflected[0] = sol(0);
  for (std::size_t j = 1; j < media; ++j) {
    out.transmitted[j] = sol(t_index(j));
    if (j + 1 < media) out.reflected[j] = sol(r_index(j));
  }
  return out;
}

double psd_second_moment(double sigma, double xi, double hurst) {
  // Integrand in u = ln q is PSD(q) q^2. Upper limit keeps (q xi)^2 finite.
  const double lo = std::log(1e-10 / xi);
  const double hi = std::log(1e150 / xi);
  const std::size_t steps = 200000;  // even
  const double h = (hi - lo) / static_cast<double>(steps);
  double acc = 0.0;
  for (std::size_t s = 0; s <= steps; ++s) {
    const double u = lo + h * static_cast<double>(s);
    const double q = std::exp(u);
    const double f = psd_selfaffine(q, sigma, xi, hurst) * q * q;
    const double w = (s == 0 || s == steps) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
    acc += w * f;
  }
  return acc * h / 3.0 / (2.0 * std::numbers::pi);
}

double transport_lp(std::span<const double> a, std::span<const double> b) {
  // Supplies of m units per source and n units per sink make every vertex an
  // integer, so successive shortest paths solve the LP exactly.
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) throw std::invalid_argument("transport_lp: empty input");
  const std::size_t source = n + m, sink = n + m + 1, nodes = n + m + 2;
  struct Edge {
    std::size_t to;
    long long cap;
    double cost;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> adj(nodes);
  auto add_edge = [&](std::size_t u, std::size_t v, long long cap, double cost) {
    adj[u].push_back(edges.size());
    edges.push_back({v, cap, cost});
    adj[v].push_back(edges.size());
    edges.push_back({u, 0, -cost});
  };
  for (std::size_t i = 0; i < n; ++i) add_edge(source, i, static_cast<long long>(m), 0.0);
  for (std::size_t j = 0; j < m; ++j) add_edge(n + j, sink, static_cast<long long>(n), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      add_edge(i, n + j, static_cast<long long>(n * m), std::abs(a[i] - b[j]));
    }
  }
  long long remaining = static_cast<long long>(n * m);
  double cost = 0.0;
  while (remaining > 0) {
    // Bellman-Ford over the residual graph (negative reverse costs allowed).
    std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> via(nodes, edges.size());
    dist[source] = 0.0;
    for (std::size_t round = 0; round + 1 < nodes; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (!std::isfinite(dist[u])) continue;
        for (std::size_t e : adj[u]) {
          if (edges[e].cap <= 0) continue;
          const double nd = dist[u] + edges[e].cost;
          if (nd < dist[edges[e].to] - 1e-15) {
            dist[edges[e].to] = nd;
            via[edges[e].to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (!std::isfinite(dist[sink])) throw std::runtime_error("transport_lp: infeasible");
    long long push = remaining;
    for (std::size_t v = sink; v != source; v = edges[via[v] ^ 1].to) push = std::min(push, edges[via[v]].cap);
    for (std::size_t v = sink; v != source; v = edges[via[v] ^ 1].to) {
      edges[via[v]].cap -= push;
      edges[via[v] ^ 1].cap += push;
    }
    cost += static_cast<double>(push) * dist[sink];
    remaining -= push;
  }
  return cost / static_cast<double>(n * m);
}

double kde_direct(const nn::Matrix<double>& samples, double bandwidth, std::span<const double> query) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    double product = 1.0;
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      const double diff = query[static_cast<std::size_t>(j)] - samples(i, j);
      product *= std::exp(-diff * diff / (2.0 * bandwidth * bandwidth)) /
                 std::sqrt(2.0 * std::numbers::pi * bandwidth * bandwidth);
    }
    total += product;
  }
  return std::log(total / static_cast<double>(samples.rows()));
}

template <typename T>
void randomize(nn::ParameterSet<T>& params, Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (nn::Tensor<T>& t : params) {
    if (!t.trainable) continue;
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = static_cast<T>(normal(rng));
  }
}
template void randomize<float>(nn::ParameterSet<float>&, Rng&, double);
template void randomize<double>(nn::ParameterSet<double>&, Rng&, double);

// ---- invariant probes -------------------------------------------------------------

double parratt_vs_tmm(std::size_t n_stacks, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 4);
  const double wavelength = 0.14073;
  double worst = 0.0;
  for (std::size_t s = 0; s < n_stacks; ++s) {
    MultilayerSample sample;
    const int layers = count(rng);
    for (int l = 0; l < layers; ++l) {
      Layer layer;
      layer.dispersion = 1e-6 + 4e-5 * unit(rng);
      layer.absorption = 5e-6 * unit(rng);
      layer.thickness = 0.3 + 20.0 * unit(rng);
      layer.roughness = 0.0;
      sample.layers.push_back(layer);
    }
    sample.substrate.dispersion = 1e-6 + 2e-5 * unit(rng);
    sample.substrate.absorption = 1e-6 * unit(rng);
    const double angle = 5e-4 + 2e-2 * unit(rng);
    const FieldAmplitudes got = parratt_amplitudes(sample, angle, wavelength);
    const TmmFields want = tmm_amplitudes(sample, angle, wavelength);
    for (std::size_t j = 0; j < want.transmitted.size(); ++j) {
      const double scale = std::max({std::abs(want.transmitted[j]), std::abs(want.reflected[j]), 1e-300});
      worst = std::max(worst, std::abs(got.transmitted[j] - want.transmitted[j]) / scale);
      worst = std::max(worst, std::abs(got.reflected[j] - want.reflected[j]) / scale);
    }
  }
  return worst;
}

double single_interface_energy() {
  const double wavelength = 0.14073;
  const double delta = 7.6e-6;
  MultilayerSample sample;
  Layer film;  // index-matched to the substrate: one effective interface at depth 0
  film.dispersion = delta;
  film.absorption = 0.0;
  film.thickness = 5.0;
  film.roughness = 0.0;
  sample.layers.push_back(film);
  sample.substrate.dispersion = delta;
  sample.substrate.absorption = 0.0;
  const double critical = critical_angle(delta);
  double worst = 0.0;
  for (int s = 1; s <= 400; ++s) {
    const double angle = critical * 4.0 * s / 400.0;
    if (std::abs(angle - critical) < 1e-9) continue;
    const FieldAmplitudes f = parratt_amplitudes(sample, angle, wavelength);
    const double r2 = std::norm(f.reflected[0]);
    const double flux = f.kz[1].real() / f.kz[0].real() * std::norm(f.transmitted[1]);
    worst = std::max(worst, std::abs(r2 + flux - 1.0));
    if (angle < critical) worst = std::max(worst, std::abs(std::abs(f.reflected[0]) - 1.0));
  }
  return worst;
}

double psd_variance_identity(std::size_t n_triples, std::uint64_t seed) {
  Rng rng = make_stream(seed, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < n_triples; ++t) {
    const double sigma = 0.1 + 2.0 * unit(rng);
    const double xi = 1.0 + 99.0 * unit(rng);
    const double hurst = 0.1 + 0.8 * unit(rng);
    const double moment = psd_second_moment(sigma, xi, hurst);
    worst = std::max(worst, std::abs(moment - sigma * sigma) / (sigma * sigma));
  }
  return worst;
}

namespace {

FlowConfig toy_flow_config(std::size_t dim, bool logit) {
  FlowConfig c;
  c.param_dim = dim;
  c.signal_len = 5;
  c.latent_dim = 3;
  c.n_transforms = 4;
  c.hidden = 16;
  c.embed_hidden = 12;
  c.context_dim = 6;
  c.logit_transform = logit;
  return c;
}

std::vector<double> normal_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

template <typename T>
FlowBatch<T> single_context_batch(const nn::Matrix<T>& y, std::span<const double> zeta,
                                  std::span<const double> z) {
  FlowBatch<T> b;
  b.y = y;
  b.zeta.resize(y.rows(), static_cast<Eigen::Index>(zeta.size()));
  b.z.resize(y.rows(), static_cast<Eigen::Index>(z.size()));
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (std::size_t k = 0; k < zeta.size(); ++k) b.zeta(i, static_cast<Eigen::Index>(k)) = static_cast<T>(zeta[k]);
    for (std::size_t k = 0; k < z.size(); ++k) b.z(i, static_cast<Eigen::Index>(k)) = static_cast<T>(z[k]);
  }
  return b;
}

double flow_integral(std::size_t dim, std::uint64_t seed) {
  MafFlow<double> flow(toy_flow_config(dim, false), seed);
  Rng rng = make_stream(seed, 2);
  randomize(flow.parameters(), rng, 0.15);
  const std::vector<double> zeta = normal_vector(5, rng);
  const std::vector<double> z = normal_vector(3, rng);
  // Trapezoid rule on [-6, 6]^dim in data space.
  const double lo = -6.0, hi = 6.0;
  const std::size_t steps = dim == 1 ? 4000 : 400;
  const double h = (hi - lo) / static_cast<double>(steps);
  const std::size_t per_axis = steps + 1;
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= per_axis;
  nn::Matrix<double> y(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dim));
  std::vector<double> weight(total, 1.0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t k = 0; k < dim; ++k) {
      const std::size_t g = rest % per_axis;
      rest /= per_axis;
      y(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(k)) = lo + h * static_cast<double>(g);
      if (g == 0 || g == steps) weight[idx] *= 0.5;
    }
  }
  const std::vector<double> lp = flow.log_prob(single_context_batch(y, zeta, z));
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) acc += weight[i] * std::exp(lp[i]);
  for (std::size_t k = 0; k < dim; ++k) acc *= h;
  return std::abs(acc - 1.0);
}

}  // namespace

double flow_invertibility(std::size_t n_points, std::uint64_t seed) {
  double worst = 0.0;
  for (const bool logit : {false, true}) {
    MafFlow<double> flow(toy_flow_config(4, logit), seed);
    Rng rng = make_stream(seed, 3);
    randomize(flow.parameters(), rng, 0.3);
    const std::vector<double> zeta = normal_vector(5, rng);
    const std::vector<double> z = normal_vector(3, rng);
    std::normal_distribution<double> normal;
    nn::Matrix<double> base(static_cast<Eigen::Index>(n_points), 4);
    for (Eigen::Index i = 0; i < base.size(); ++i) base.data()[i] = normal(rng);
    const nn::Matrix<double> y = flow.from_base(base, zeta, z);
    const nn::Matrix<double> back = flow.to_base(single_context_batch(y, zeta, z));
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      // Draws that reach the logit clamp are saturated on purpose and have no inverse.
      if (logit && (y.row(i).minCoeff() <= kLogitEpsilon || y.row(i).maxCoeff() >= 1.0 - kLogitEpsilon)) continue;
      worst = std::max(worst, (back.row(i) - base.row(i)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double flow_normalization_1d(std::uint64_t seed) { return flow_integral(1, seed); }
double flow_normalization_2d(std::uint64_t seed) { return flow_integral(2, seed); }

std::size_t flow_autoregressive_violations(std::uint64_t seed) {
  const std::size_t d = 5;
  FlowConfig config = toy_flow_config(d, false);
  MafFlow<double> flow(config, seed);
  Rng rng = make_stream(seed, 4);
  randomize(flow.parameters(), rng, 0.5);
  const nn::ParameterSet<double> full = flow.parameters();
  const std::vector<double> zeta = normal_vector(5, rng);
  const std::vector<double> z = normal_vector(3, rng);
  const nn::Matrix<double> y0 = Eigen::Map<const Eigen::RowVectorXd>(normal_vector(d, rng).data(), d);

  std::size_t violations = 0;
  for (std::size_t k = 0; k < config.n_transforms; ++k) {
    // Silence every other transform so the map is (perms) o transform k o (perms).
    flow.parameters().assign_values(full);
    for (std::size_t other = 0; other < config.n_transforms; ++other) {
      if (other == k) continue;
      const std::string prefix = "transform." + std::to_string(other) + ".out.";
      flow.parameters().find(prefix + "weight").value.setZero();
      flow.parameters().find(prefix + "bias").value.setZero();
    }
    // Column maps: input coordinate j of transform k reads y[before[j]];
    // output coordinate i of transform k lands in u[after_inv[i]].
    std::vector<int> before(d), after(d);
    for (std::size_t j = 0; j < d; ++j) before[j] = after[j] = static_cast<int>(j);
    for (std::size_t t = 0; t <= k; ++t) {
      std::vector<int> next(d);
      for (std::size_t j = 0; j < d; ++j) next[j] = before[static_cast<std::size_t>(flow.permutations()[t][j])];
      before = next;
    }
    for (std::size_t t = k + 1; t < config.n_transforms; ++t) {
      std::vector<int> next(d);
      for (std::size_t j = 0; j < d; ++j) next[j] = after[static_cast<std::size_t>(flow.permutations()[t][j])];
      after = next;
    }
    std::vector<int> lands(d);  // output coordinate i of transform k sits at u[lands[i]]
    for (std::size_t j = 0; j < d; ++j) lands[static_cast<std::size_t>(after[j])] = static_cast<int>(j);

    const nn::Matrix<double> u0 = flow.to_base(single_context_batch(y0, zeta, z));
    for (std::size_t j = 0; j < d; ++j) {
      nn::Matrix<double> y1 = y0;
      y1(0, before[j]) += 1e-3;
      const nn::Matrix<double> u1 = flow.to_base(single_context_batch(y1, zeta, z));
      for (std::size_t i = 0; i < j; ++i) {
        if (u1(0, lands[i]) != u0(0, lands[i])) ++violations;
      }
    }
  }
  flow.parameters().assign_values(full);
  return violations;
}

double nf_loss_gradient_error(std::uint64_t seed) {
  FlowConfig config = toy_flow_config(3, true);
  config.n_transforms = 2;
  config.hidden = 8;
  MafFlow<double> flow(config, seed);
  Rng rng = make_stream(seed, 5);
  randomize(flow.parameters(), rng, 0.4);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::normal_distribution<double> normal;
  FlowBatch<double> batch;
  batch.y.resize(4, 3);
  batch.zeta.resize(4, 5);
  batch.z.resize(4, 3);
  for (Eigen::Index i = 0; i < batch.y.size(); ++i) batch.y.data()[i] = unit(rng);
  for (Eigen::Index i = 0; i < batch.zeta.size(); ++i) batch.zeta.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < batch.z.size(); ++i) batch.z.data()[i] = normal(rng);
  const DifferentiableLoss loss = [&](nn::ParameterSet<double>&, bool with_grad) {
    nn::Tape<double> tape(with_grad);
    const nn::Var<double> l = nf_loss(flow, tape, batch);
    if (with_grad) tape.backward(l);
    return l.value()(0, 0);
  };
  Rng probes = make_stream(seed, 6);
  return grad_check(loss, flow.parameters(), 300, probes);
}

double cvae_loss_gradient_error(std::uint64_t seed) {
  CvaeConfig config;
  config.image_rows = 8;
  config.image_cols = 8;
  config.signal_len = 5;
  config.latent_dim = 3;
  config.widths = {2, 3, 4};
  config.cond_hidden = 6;
  config.cond_dim = 4;
  CvaeModel<double> model(config, seed);
  Rng rng = make_stream(seed, 7);
  randomize(model.parameters(), rng, 0.3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  nn::Matrix<double> images(3, 64), zeta(3, 5);
  for (Eigen::Index i = 0; i < images.size(); ++i) images.data()[i] = unit(rng);
  for (Eigen::Index i = 0; i < zeta.size(); ++i) zeta.data()[i] = normal(rng);
  const DifferentiableLoss loss = [&](nn::ParameterSet<double>&, bool with_grad) {
    Rng draw = make_stream(seed, 8);  // same latent noise on every evaluation
    nn::Tape<double> tape(with_grad);
    const nn::Var<double> l = cvae_loss(model, tape, images, zeta, draw);
    if (with_grad) tape.backward(l);
    return l.value()(0, 0);
  };
  Rng probes = make_stream(seed, 9);
  return grad_check(loss, model.parameters(), 300, probes);
}

double kde_vs_direct(std::size_t n_cases, std::uint64_t seed) {
  Rng rng = make_stream(seed, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> rows(1, 50), cols(1, 4);
  double worst = 0.0;
  for (std::size_t c = 0; c < n_cases; ++c) {
    nn::Matrix<double> samples(rows(rng), cols(rng));
    for (Eigen::Index i = 0; i < samples.size(); ++i) samples.data()[i] = unit(rng);
    std::vector<double> query(static_cast<std::size_t>(samples.cols()));
    for (double& q : query) q = unit(rng);
    const double bandwidth = 0.1 + 0.3 * unit(rng);
    worst = std::max(worst, std::abs(kde_log_prob(samples, bandwidth, query) - kde_direct(samples, bandwidth, query)));
  }
  return worst;
}

double w1_vs_lp(std::size_t n_cases, std::uint64_t seed) {
  Rng rng = make_stream(seed, 11);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> size(5, 20);
  double worst = 0.0;
  for (std::size_t c = 0; c < n_cases; ++c) {
    std::vector<double> a(c % 2 == 0 ? 20 : static_cast<std::size_t>(size(rng)));
    std::vector<double> b(20);
    for (double& x : a) x = normal(rng);
    for (double& x : b) x = 0.5 + 1.5 * normal(rng);
    worst = std::max(worst, std::abs(wasserstein_1d(a, b) - transport_lp(a, b)));
  }
  return worst;
}

namespace {

GenerationRequest small_request(std::size_t n, std::uint64_t seed, bool images) {
  GenerationRequest r;
  r.geometry = desk_geometry();
  r.prior = PriorSpec::from_materials(default_material_sequence(3), silicon_substrate(r.geometry.wavelength));
  r.signal = desk_signal_config();
  r.n = n;
  r.seed = seed;
  r.store_images = images;
  r.chunk = 7;  // several chunks with a ragged tail
  return r;
}

}  // namespace

bool dataset_roundtrip_exact(const fs::path& dir) {
  const GenerationRequest request = small_request(20, 17, true);
  generate_dataset(request, dir);
  const Dataset back = read_dataset(dir);
  if (back.size() != request.n) return false;
  for (std::size_t i = 0; i < request.n; ++i) {
    const DatasetRecord rec = simulate_record(request, i);
    const auto p = back.param_row(i), s = back.signal_row(i), im = back.image_row(i);
    if (!std::equal(p.begin(), p.end(), rec.params.begin(), rec.params.end())) return false;
    if (!std::equal(s.begin(), s.end(), rec.signal.begin(), rec.signal.end())) return false;
    if (!std::equal(im.begin(), im.end(), rec.image.begin(), rec.image.end())) return false;
  }
  // Rewriting what was read must reproduce the files byte for byte.
  const fs::path copy = dir / "rewrite";
  write_dataset(copy, back);
  for (const char* blob : {"params.bin", "signals.bin", "images.bin", "manifest.json"}) {
    if (!files_equal(dir / blob, copy / blob)) return false;
  }
  return true;
}

bool parallel_generation_exact(const fs::path& dir, unsigned threads) {
  GenerationRequest request = small_request(100, 23, false);
  request.threads = 1;
  generate_dataset(request, dir / "serial");
  request.threads = threads;
  generate_dataset(request, dir / "parallel");
  for (const char* blob : {"params.bin", "signals.bin", "manifest.json"}) {
    if (!files_equal(dir / "serial" / blob, dir / "parallel" / blob)) return false;
  }
  return true;
}

ScratchDir::ScratchDir(const std::string& tag) {
  Rng rng(std::random_device{}());
  path_ = fs::temp_directory_path() / ("ssbi-" + tag + "-" + std::to_string(rng() % 1000000007ULL));
  fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

bool files_equal(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  const std::vector<char> da((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::vector<char> db((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return da == db;
}

}  // namespace ssbi::testing
