// Copyright 2026 The beamdrl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent reference implementations used by the tests. They follow the
// defining formulas literally (plain loops, no shared helpers from the
// library) so agreement is meaningful.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "beamdrl.hpp"

namespace oracle {

using beamdrl::CMatrix;
using beamdrl::Complex;

// sum_m (-x^2/4)^m / (m!)^2
inline double j0_series(double x, int terms = 30) {
  long double sum = 0.0L, term = 1.0L;
  const long double q = -static_cast<long double>(x) * x / 4.0L;
  for (int m = 0; m < terms; ++m) {
    if (m > 0) term *= q / (static_cast<long double>(m) * m);
    sum += term;
  }
  return static_cast<double>(sum);
}

// (1/pi) int_0^pi cos(x sin t) dt by the trapezoidal rule, which converges
// geometrically for this smooth periodic integrand.
inline double j0_integral(double x, int intervals = 4000) {
  const double h = std::numbers::pi / intervals;
  double s = 0.5 * (1.0 + std::cos(x * std::sin(std::numbers::pi)));
  for (int i = 1; i < intervals; ++i) s += std::cos(x * std::sin(i * h));
  return s * h / std::numbers::pi;
}

inline CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline CMatrix random_matrix(beamdrl::RngStream& rng, std::size_t r, std::size_t c) {
  CMatrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = Complex(rng.normal(), rng.normal());
  return m;
}

inline CMatrix random_unit(beamdrl::RngStream& rng, std::size_t n) {
  CMatrix v = random_matrix(rng, n, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(v[i]);
  v *= 1.0 / std::sqrt(s);
  return v;
}

// exp(j 2 pi (d/lambda) p cos phi) / sqrt(n), d/lambda = 1/2
inline CMatrix steering(std::size_t n, double phi) {
  CMatrix v(n, 1);
  for (std::size_t p = 0; p < n; ++p) {
    v[p] = std::exp(Complex(0.0, 2.0 * std::numbers::pi * 0.5 * p * std::cos(phi))) / std::sqrt(double(n));
  }
  return v;
}

inline CMatrix channel(const beamdrl::PathState& s, double eta_linear, std::size_t m, std::size_t n) {
  const std::size_t l = s.alphas.size();
  CMatrix h(n, m);
  for (std::size_t p = 0; p < l; ++p) {
    const CMatrix u = steering(n, s.aoas[p]);
    const CMatrix v = steering(m, s.aods[p]);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < m; ++c) h(r, c) += s.alphas[p] * u[r] * std::conj(v[c]);
  }
  h *= std::sqrt(eta_linear * double(m * n) / double(l));
  return h;
}

inline Complex codebook_entry(std::size_t p, std::size_t q, std::size_t s, std::size_t t, std::size_t antennas) {
  const double shifted = std::fmod(double(q) + double(s) / 2.0, double(s));
  const double level = std::floor(double(p) * shifted / (double(s) / double(t)));
  return std::exp(Complex(0.0, 2.0 * std::numbers::pi / double(t) * level)) / std::sqrt(double(antennas));
}

// |w^H H p|^2
inline double gain(const CMatrix& w, const CMatrix& h, const CMatrix& p) {
  Complex s = 0.0;
  for (std::size_t r = 0; r < h.rows(); ++r)
    for (std::size_t c = 0; c < h.cols(); ++c) s += std::conj(w[r]) * h(r, c) * p[c];
  return std::norm(s);
}

struct Beams {
  std::size_t users = 0, streams = 0;
  std::vector<CMatrix> p, w;  // k-major
};

inline Beams from(const beamdrl::BeamAssignment& b) {
  Beams o{b.users(), b.streams(), {}, {}};
  for (std::size_t s = 0; s < b.stream_count(); ++s) {
    o.p.push_back(b.precoder(s));
    o.w.push_back(b.combiner(s));
  }
  return o;
}

// Per-stream rates: signal over inter-stream plus multi-user interference
// plus ||w||^2 sigma^2, written out term by term.
inline std::vector<double> rates(const Beams& b, const std::vector<CMatrix>& h, double power_w, double noise_w) {
  const double ps = power_w / double(b.users * b.streams);
  std::vector<double> g;
  for (std::size_t k = 0; k < b.users; ++k)
    for (std::size_t n = 0; n < b.streams; ++n) {
      const std::size_t v = k * b.streams + n;
      const double sig = ps * gain(b.w[v], h[k], b.p[v]);
      double intra = 0.0, multi = 0.0;
      for (std::size_t i = 0; i < b.streams; ++i)
        if (i != n) intra += ps * gain(b.w[v], h[k], b.p[k * b.streams + i]);
      for (std::size_t j = 0; j < b.users; ++j)
        if (j != k)
          for (std::size_t i = 0; i < b.streams; ++i) multi += ps * gain(b.w[v], h[k], b.p[j * b.streams + i]);
      double wn = 0.0;
      for (std::size_t r = 0; r < b.w[v].size(); ++r) wn += std::norm(b.w[v][r]);
      g.push_back(std::log2(1.0 + sig / (intra + multi + wn * noise_w)));
    }
  return g;
}

// Rate gain of every other stream when stream s stops transmitting.
inline double zero_out_penalty(const Beams& b, std::size_t s, const std::vector<CMatrix>& h, double power_w,
                               double noise_w) {
  const auto before = rates(b, h, power_w, noise_w);
  Beams z = b;
  z.p[s] *= 0.0;
  const auto after = rates(z, h, power_w, noise_w);
  double pen = 0.0;
  for (std::size_t v = 0; v < before.size(); ++v)
    if (v != s) pen += after[v] - before[v];
  return pen;
}

// Plain per-sample forward pass of a ReLU network.
inline std::vector<double> forward(const beamdrl::Mlp& net, const std::vector<double>& x) {
  std::vector<double> a = x;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double> z(layers[l].out);
    for (std::size_t o = 0; o < layers[l].out; ++o) {
      double s = layers[l].b[o];
      for (std::size_t i = 0; i < layers[l].in; ++i) s += layers[l].w[o * layers[l].in + i] * a[i];
      z[o] = (l + 1 < layers.size()) ? (s > 0.0 ? s : 0.0) : s;
    }
    a = std::move(z);
  }
  return a;
}

inline double loss(const beamdrl::Mlp& net, const beamdrl::Batch& batch, const std::vector<double>& targets) {
  double s = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double e = targets[i] - forward(net, batch[i]->s)[batch[i]->a];
    s += e * e;
  }
  return s / (2.0 * batch.size());
}

// The same loss carried in extended precision, for finite differences.
inline long double loss_extended(const beamdrl::Mlp& net, const beamdrl::Batch& batch,
                                 const std::vector<double>& targets) {
  const auto& layers = net.layers();
  long double total = 0.0L;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::vector<long double> a(batch[i]->s.begin(), batch[i]->s.end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      std::vector<long double> z(layers[l].out);
      for (std::size_t o = 0; o < layers[l].out; ++o) {
        long double s = layers[l].b[o];
        for (std::size_t j = 0; j < layers[l].in; ++j) s += (long double)layers[l].w[o * layers[l].in + j] * a[j];
        z[o] = (l + 1 < layers.size()) ? (s > 0.0L ? s : 0.0L) : s;
      }
      a = std::move(z);
    }
    const long double e = targets[i] - a[batch[i]->a];
    total += e * e;
  }
  return total / (2.0L * batch.size());
}

// Codebook beams for an action tuple.
inline Beams codebook_beams(const beamdrl::Environment& env, const std::vector<std::size_t>& actions) {
  Beams b{env.users(), env.streams(), {}, {}};
  for (std::size_t a : actions) {
    b.p.push_back(env.tx_codeword(a / env.action_space().s_r));
    b.w.push_back(env.rx_codeword(a % env.action_space().s_r));
  }
  return b;
}

inline double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Best sum rate over every joint action tuple.
inline double joint_exhaustive(const beamdrl::Environment& env, const std::vector<CMatrix>& h) {
  const std::size_t agents = env.agents(), s = env.action_space().size();
  std::vector<std::size_t> a(agents, 0);
  double best = -1.0;
  while (true) {
    best = std::max(best, sum(rates(codebook_beams(env, a), h, env.budget().power_w, env.budget().noise_w)));
    std::size_t i = 0;
    while (i < agents && ++a[i] == s) a[i++] = 0;
    if (i == agents) break;
  }
  return best;
}

}  // namespace oracle
