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

// Received power, interference, SINR and Shannon rates of the downlink.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "beamdrl/errors.hpp"
#include "beamdrl/numerics.hpp"

namespace beamdrl {

// Precoder p (M x 1) and combiner w (N x 1) of every stream, indexed
// user-major: stream (k, n) lives at k * streams + n.
class BeamAssignment {
 public:
  BeamAssignment() = default;
  BeamAssignment(std::size_t users, std::size_t streams)
      : users_(users), streams_(streams), precoders_(users * streams), combiners_(users * streams) {}

  std::size_t users() const { return users_; }
  std::size_t streams() const { return streams_; }
  std::size_t stream_count() const { return users_ * streams_; }
  std::size_t index(std::size_t k, std::size_t n) const {
    if (k >= users_ || n >= streams_) throw IndexError("BeamAssignment: stream out of range");
    return k * streams_ + n;
  }

  void set(std::size_t k, std::size_t n, CMatrix precoder, CMatrix combiner) {
    const std::size_t i = index(k, n);
    precoders_[i] = std::move(precoder);
    combiners_[i] = std::move(combiner);
  }

  const CMatrix& precoder(std::size_t k, std::size_t n) const { return precoders_[index(k, n)]; }
  const CMatrix& combiner(std::size_t k, std::size_t n) const { return combiners_[index(k, n)]; }
  const CMatrix& precoder(std::size_t s) const { return precoders_.at(s); }
  const CMatrix& combiner(std::size_t s) const { return combiners_.at(s); }
  CMatrix& mutable_precoder(std::size_t s) { return precoders_.at(s); }

  // Throws CompletenessError for a missing beam and ShapeError for a wrong length.
  void check_complete(std::size_t tx_antennas, std::size_t rx_antennas) const {
    for (std::size_t s = 0; s < stream_count(); ++s) {
      if (precoders_[s].empty() || combiners_[s].empty()) {
        throw CompletenessError("BeamAssignment: stream (" + std::to_string(s / streams_) + ", " +
                                std::to_string(s % streams_) + ") has no beam");
      }
      if (precoders_[s].size() != tx_antennas || precoders_[s].cols() != 1 ||
          combiners_[s].size() != rx_antennas || combiners_[s].cols() != 1) {
        throw ShapeError("BeamAssignment: beam length does not match antenna count");
      }
    }
  }

  bool unit_norm(double tol = 1e-9) const {
    for (std::size_t s = 0; s < stream_count(); ++s) {
      if (std::fabs(frobenius_norm(precoders_[s]) - 1.0) > tol) return false;
      if (std::fabs(frobenius_norm(combiners_[s]) - 1.0) > tol) return false;
    }
    return true;
  }

 private:
  std::size_t users_ = 0;
  std::size_t streams_ = 0;
  std::vector<CMatrix> precoders_;
  std::vector<CMatrix> combiners_;
};

struct LinkBudget {
  double power_w = 0.1;    // total transmit power P
  double noise_w = 0.0;    // sigma^2
  std::size_t users = 1;   // K
  std::size_t streams = 1; // N_s

  static LinkBudget from_dbm(double power_dbm, double noise_dbm, std::size_t users,
                             std::size_t streams) {
    LinkBudget b{dbm_to_watts(power_dbm), dbm_to_watts(noise_dbm), users, streams};
    b.validate();
    return b;
  }

  void validate() const {
    if (!(power_w > 0.0) || !(noise_w > 0.0)) throw ConfigError("LinkBudget: power and noise must be positive");
    if (users == 0 || streams == 0) throw ConfigError("LinkBudget: counts must be positive");
  }

  // Uniform allocation P / (K N_s).
  double stream_power() const { return power_w / static_cast<double>(users * streams); }
};

struct RateReport {
  std::size_t users = 0;
  std::size_t streams = 0;
  std::vector<double> per_stream;  // G_{k,n}, bits/s/Hz
  std::vector<double> per_user;    // R_k
  double average = 0.0;            // sum_k R_k / K
  double sum = 0.0;

  double stream(std::size_t k, std::size_t n) const { return per_stream.at(k * streams + n); }
};

// |w^H H p|^2 without any power scaling.
inline double beam_gain(const CMatrix& w, const CMatrix& h, const CMatrix& p) {
  if (w.cols() != 1 || p.cols() != 1 || w.rows() != h.rows() || p.rows() != h.cols()) {
    throw ShapeError("beam_gain: expected w (N x 1), H (N x M), p (M x 1)");
  }
  Complex acc{};
  for (std::size_t r = 0; r < h.rows(); ++r) {
    Complex row{};
    for (std::size_t c = 0; c < h.cols(); ++c) row += h(r, c) * p[c];
    acc += std::conj(w[r]) * row;
  }
  return std::norm(acc);
}

// (P / K N_s) |w^H H p|^2.
inline double received_power(const CMatrix& w, const CMatrix& h, const CMatrix& p,
                             const LinkBudget& budget) {
  return budget.stream_power() * beam_gain(w, h, p);
}

inline double inter_stream_interference(std::size_t k, std::size_t n, const BeamAssignment& beams,
                                        const CMatrix& h_k, const LinkBudget& budget) {
  double sum = 0.0;
  for (std::size_t i = 0; i < beams.streams(); ++i) {
    if (i == n) continue;
    sum += received_power(beams.combiner(k, n), h_k, beams.precoder(k, i), budget);
  }
  return sum;
}

inline double multi_user_interference(std::size_t k, std::size_t n, const BeamAssignment& beams,
                                      const CMatrix& h_k, const LinkBudget& budget) {
  double sum = 0.0;
  for (std::size_t j = 0; j < beams.users(); ++j) {
    if (j == k) continue;
    for (std::size_t i = 0; i < beams.streams(); ++i) {
      sum += received_power(beams.combiner(k, n), h_k, beams.precoder(j, i), budget);
    }
  }
  return sum;
}

inline double sinr(std::size_t k, std::size_t n, const BeamAssignment& beams, const CMatrix& h_k,
                   const LinkBudget& budget) {
  const CMatrix& w = beams.combiner(k, n);
  const double signal = received_power(w, h_k, beams.precoder(k, n), budget);
  const double denom = inter_stream_interference(k, n, beams, h_k, budget) +
                       multi_user_interference(k, n, beams, h_k, budget) +
                       frobenius_norm_sq(w) * budget.noise_w;
  return signal / denom;
}

inline double stream_rate(double sinr_value) {
  if (!(sinr_value >= 0.0)) throw DomainError("stream_rate: SINR must be non-negative");
  return std::log2(1.0 + sinr_value);
}

// Square table X(v, a) = (P / K N_s) |w_v^H H_{user(v)} p_a|^2 over all
// victim/aggressor stream pairs. Every rate, interference and penalty term of
// a slot is a sum over entries of this table.
class CrossPower {
 public:
  CrossPower() = default;
  explicit CrossPower(std::size_t n) : n_(n), x_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t victim, std::size_t aggressor) { return x_[victim * n_ + aggressor]; }
  double operator()(std::size_t victim, std::size_t aggressor) const {
    return x_[victim * n_ + aggressor];
  }

  double interference(std::size_t victim) const {
    double s = 0.0;
    for (std::size_t a = 0; a < n_; ++a) {
      if (a != victim) s += (*this)(victim, a);
    }
    return s;
  }

  friend bool operator==(const CrossPower&, const CrossPower&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> x_;
};

inline CrossPower cross_powers(const BeamAssignment& beams, const std::vector<CMatrix>& channels,
                               const LinkBudget& budget) {
  if (channels.size() != beams.users()) throw ShapeError("cross_powers: one channel per user required");
  const std::size_t total = beams.stream_count();
  const double ps = budget.stream_power();
  CrossPower x(total);
  for (std::size_t v = 0; v < total; ++v) {
    const CMatrix& h = channels[v / beams.streams()];
    const CMatrix& w = beams.combiner(v);
    if (w.size() != h.rows()) throw ShapeError("cross_powers: combiner length mismatch");
    // Effective row g = w^H H.
    std::vector<Complex> g(h.cols());
    for (std::size_t r = 0; r < h.rows(); ++r) {
      const Complex wc = std::conj(w[r]);
      for (std::size_t c = 0; c < h.cols(); ++c) g[c] += wc * h(r, c);
    }
    for (std::size_t a = 0; a < total; ++a) {
      const CMatrix& p = beams.precoder(a);
      if (p.size() != h.cols()) throw ShapeError("cross_powers: precoder length mismatch");
      Complex acc{};
      for (std::size_t c = 0; c < g.size(); ++c) acc += g[c] * p[c];
      x(v, a) = ps * std::norm(acc);
    }
  }
  return x;
}

// Noise term ||w_v||^2 sigma^2 of every stream.
inline std::vector<double> noise_terms(const BeamAssignment& beams, const LinkBudget& budget) {
  std::vector<double> out(beams.stream_count());
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s] = frobenius_norm_sq(beams.combiner(s)) * budget.noise_w;
  }
  return out;
}

inline std::vector<double> stream_rates(const CrossPower& x, std::span<const double> noise) {
  std::vector<double> g(x.size());
  for (std::size_t v = 0; v < x.size(); ++v) {
    g[v] = std::log2(1.0 + x(v, v) / (x.interference(v) + noise[v]));
  }
  return g;
}

inline RateReport make_rate_report(std::vector<double> per_stream, std::size_t users,
                                   std::size_t streams) {
  RateReport rep;
  rep.users = users;
  rep.streams = streams;
  rep.per_stream = std::move(per_stream);
  rep.per_user.assign(users, 0.0);
  for (std::size_t k = 0; k < users; ++k) {
    for (std::size_t n = 0; n < streams; ++n) rep.per_user[k] += rep.per_stream[k * streams + n];
  }
  for (double r : rep.per_user) rep.sum += r;
  rep.average = rep.sum / static_cast<double>(users);
  return rep;
}

inline RateReport rate_report(const BeamAssignment& beams, const std::vector<CMatrix>& channels,
                              const LinkBudget& budget) {
  if (channels.empty()) throw ShapeError("rate_report: no channels");
  beams.check_complete(channels.front().cols(), channels.front().rows());
  const CrossPower x = cross_powers(beams, channels, budget);
  const std::vector<double> noise = noise_terms(beams, budget);
  return make_rate_report(stream_rates(x, noise), beams.users(), beams.streams());
}

}  // namespace beamdrl
