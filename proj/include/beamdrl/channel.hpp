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

// Geometric multipath channel with Gauss-Markov aging of the path gains.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "beamdrl/errors.hpp"
#include "beamdrl/numerics.hpp"

namespace beamdrl {

struct UserGeometry {
  double distance_m = 10.0;
  std::vector<double> mean_aoa;  // radians, one per path
  std::vector<double> mean_aod;
  double spread_aoa = 0.0;  // full width of the uniform spread, radians
  double spread_aod = 0.0;
};

// Hidden per-path state of one user. Only the gains evolve.
struct PathState {
  std::vector<Complex> alphas;
  std::vector<double> aoas;
  std::vector<double> aods;
};

struct LargeScale {
  double eta_db = 0.0;     // path loss plus shadowing
  double shadow_db = 0.0;  // realized log-normal term
  double linear_gain() const { return std::pow(10.0, -eta_db / 10.0); }
};

struct ChannelRealization {
  std::int64_t slot = 0;
  std::vector<CMatrix> per_user;  // N x M each
};

// Temporal correlation J0(2 pi f_d dt) of Jakes' Doppler spectrum.
inline double jakes_rho(double f_d_max_hz, double delta_t_s) {
  if (!(f_d_max_hz >= 0.0) || !(delta_t_s > 0.0)) {
    throw DomainError("jakes_rho: need f_d >= 0 and delta_t > 0");
  }
  return bessel_j0(2.0 * std::numbers::pi * f_d_max_hz * delta_t_s);
}

// Half-wavelength ULA response exp(j pi p cos(phi)) / sqrt(n), p = 0..n-1.
inline CMatrix steering_vector(std::size_t n, double phi) {
  if (n == 0) throw DomainError("steering_vector: need at least one antenna");
  CMatrix v(n, 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double c = std::numbers::pi * std::cos(phi);
  for (std::size_t p = 0; p < n; ++p) {
    v[p] = std::polar(scale, c * static_cast<double>(p));
  }
  return v;
}

inline CMatrix steering_tx(std::size_t m, double phi_d) { return steering_vector(m, phi_d); }
inline CMatrix steering_rx(std::size_t n, double phi_a) { return steering_vector(n, phi_a); }

// Log-distance path loss L(d0) + 10 omega log10(d / d0), in dB.
inline double path_loss_db(double d, double d0, double l0_db, double omega) {
  if (!(d0 > 0.0) || !(d >= d0)) throw DomainError("path_loss_db: need d >= d0 > 0");
  return l0_db + 10.0 * omega * std::log10(d / d0);
}

// Draws gains ~ CN(0,1) and angles uniformly within the spread around each mean.
inline PathState init_user(RngStream& rng, const UserGeometry& g, std::size_t l) {
  if (l == 0) throw DomainError("init_user: need at least one path");
  if (g.mean_aoa.size() != l || g.mean_aod.size() != l) {
    throw ShapeError("init_user: geometry must list one mean angle per path");
  }
  PathState s;
  s.alphas.reserve(l);
  s.aoas.reserve(l);
  s.aods.reserve(l);
  for (std::size_t i = 0; i < l; ++i) s.alphas.push_back(cgauss(rng));
  for (std::size_t i = 0; i < l; ++i) {
    const double half = g.spread_aoa / 2.0;
    s.aoas.push_back(half > 0.0 ? rng.uniform(g.mean_aoa[i] - half, g.mean_aoa[i] + half)
                                : g.mean_aoa[i]);
  }
  for (std::size_t i = 0; i < l; ++i) {
    const double half = g.spread_aod / 2.0;
    s.aods.push_back(half > 0.0 ? rng.uniform(g.mean_aod[i] - half, g.mean_aod[i] + half)
                                : g.mean_aod[i]);
  }
  return s;
}

// One Gauss-Markov step alpha' = rho alpha + sqrt(1 - rho^2) e.
inline PathState evolve(const PathState& state, double rho, RngStream& rng) {
  if (!(std::fabs(rho) <= 1.0)) throw DomainError("evolve: |rho| must not exceed 1");
  PathState next = state;
  if (rho == 1.0) return next;
  const double innov = std::sqrt(1.0 - rho * rho);
  for (auto& a : next.alphas) a = rho * a + innov * cgauss(rng);
  return next;
}

// Cached steering vectors for one user; angles are frozen after init_user.
struct PathSteering {
  std::vector<CMatrix> rx;  // u_l, N x 1
  std::vector<CMatrix> tx;  // v_l, M x 1

  PathSteering() = default;
  PathSteering(const PathState& s, std::size_t m, std::size_t n) {
    for (double a : s.aoas) rx.push_back(steering_rx(n, a));
    for (double d : s.aods) tx.push_back(steering_tx(m, d));
  }
};

// H = sqrt(eta M N / L) sum_l alpha_l u_l v_l^H.
inline CMatrix assemble(const PathState& state, const PathSteering& steer, const LargeScale& large,
                        std::size_t m, std::size_t n) {
  const std::size_t l = state.alphas.size();
  if (l == 0 || steer.rx.size() != l || steer.tx.size() != l) {
    throw ShapeError("assemble: path count mismatch");
  }
  CMatrix h(n, m);
  for (std::size_t p = 0; p < l; ++p) {
    const CMatrix& u = steer.rx[p];
    const CMatrix& v = steer.tx[p];
    if (u.size() != n || v.size() != m) throw ShapeError("assemble: steering length mismatch");
    for (std::size_t r = 0; r < n; ++r) {
      const Complex au = state.alphas[p] * u[r];
      for (std::size_t c = 0; c < m; ++c) h(r, c) += au * std::conj(v[c]);
    }
  }
  const double scale = std::sqrt(large.linear_gain() * static_cast<double>(m * n) /
                                 static_cast<double>(l));
  h *= scale;
  if (!h.all_finite()) throw DomainError("assemble: non-finite channel entry");
  return h;
}

inline CMatrix assemble(const PathState& state, const LargeScale& large, std::size_t m,
                        std::size_t n, std::size_t l) {
  if (state.alphas.size() != l || state.aoas.size() != l || state.aods.size() != l) {
    throw ShapeError("assemble: path state does not hold L paths");
  }
  return assemble(state, PathSteering(state, m, n), large, m, n);
}

struct ChannelParams {
  std::size_t tx_antennas = 32;  // M
  std::size_t rx_antennas = 4;   // N
  std::size_t users = 4;         // K
  std::size_t paths = 20;        // L
  double distance_m = 10.0;
  double ref_distance_m = 1.0;
  double ref_loss_db = 68.0;
  double path_loss_exponent = 1.7;
  double shadowing_std_db = 1.8;
  double angular_spread_rad = 10.0 * std::numbers::pi / 180.0;
  double rho = 0.6514;
  // One shared mean angle per user (true) or an independent mean per path.
  bool clustered = false;
};

// Mean angles uniform in [0, 2 pi): one pair per user when clustered,
// otherwise one pair per path.
inline UserGeometry draw_geometry(RngStream& rng, const ChannelParams& p) {
  UserGeometry g;
  g.distance_m = p.distance_m;
  const std::size_t draws = p.clustered ? 1 : p.paths;
  for (std::size_t l = 0; l < draws; ++l) {
    g.mean_aoa.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
    g.mean_aod.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  g.mean_aoa.resize(p.paths, g.mean_aoa.front());
  g.mean_aod.resize(p.paths, g.mean_aod.front());
  g.spread_aoa = p.angular_spread_rad;
  g.spread_aod = p.angular_spread_rad;
  return g;
}

inline LargeScale draw_large_scale(RngStream& rng, const ChannelParams& p, double distance_m) {
  LargeScale ls;
  ls.shadow_db = p.shadowing_std_db > 0.0 ? rng.normal(0.0, p.shadowing_std_db) : 0.0;
  ls.eta_db = path_loss_db(distance_m, p.ref_distance_m, p.ref_loss_db, p.path_loss_exponent) +
              ls.shadow_db;
  return ls;
}

// Seeded channel timeline for all users.
//
// The channel sequence depends only on the seed and on the slot/reschedule
// calls, never on the beams chosen, so every policy run from the same seed
// sees the same channels.
class ChannelProcess {
 public:
  ChannelProcess(const ChannelParams& params, const RngStream& root)
      : params_(params), geometry_rng_(root.substream("geometry")) {
    if (params_.users == 0 || params_.tx_antennas == 0 || params_.rx_antennas == 0 ||
        params_.paths == 0) {
      throw ConfigError("ChannelProcess: all counts must be positive");
    }
    if (!(std::fabs(params_.rho) <= 1.0)) throw ConfigError("ChannelProcess: |rho| > 1");
    for (std::size_t k = 0; k < params_.users; ++k) {
      fading_rng_.push_back(root.substream("fading/" + std::to_string(k)));
    }
    draw_users();
  }

  const ChannelParams& params() const { return params_; }

  // Channel at the most recent slot (the slot before the first advance()
  // after construction or reschedule).
  const ChannelRealization& current() const { return current_; }

  const ChannelRealization& advance() {
    for (std::size_t k = 0; k < params_.users; ++k) {
      users_[k].state = evolve(users_[k].state, params_.rho, fading_rng_[k]);
    }
    ++slot_;
    assemble_all();
    return current_;
  }

  // Redraws geometry, shadowing and path gains of every user.
  void reschedule() { draw_users(); }

  std::vector<UserGeometry> geometries() const {
    std::vector<UserGeometry> out;
    for (const auto& u : users_) out.push_back(u.geometry);
    return out;
  }
  const LargeScale& large_scale(std::size_t k) const { return users_.at(k).large; }
  const PathState& path_state(std::size_t k) const { return users_.at(k).state; }
  std::int64_t slot() const { return slot_; }

 private:
  struct User {
    UserGeometry geometry;
    LargeScale large;
    PathState state;
    PathSteering steering;
  };

  void draw_users() {
    users_.clear();
    for (std::size_t k = 0; k < params_.users; ++k) {
      User u;
      u.geometry = draw_geometry(geometry_rng_, params_);
      u.large = draw_large_scale(geometry_rng_, params_, u.geometry.distance_m);
      u.state = init_user(geometry_rng_, u.geometry, params_.paths);
      u.steering = PathSteering(u.state, params_.tx_antennas, params_.rx_antennas);
      users_.push_back(std::move(u));
    }
    assemble_all();
  }

  void assemble_all() {
    current_.slot = slot_;
    current_.per_user.clear();
    for (const auto& u : users_) {
      current_.per_user.push_back(
          assemble(u.state, u.steering, u.large, params_.tx_antennas, params_.rx_antennas));
    }
  }

  ChannelParams params_;
  RngStream geometry_rng_;
  std::vector<RngStream> fading_rng_;
  std::vector<User> users_;
  ChannelRealization current_;
  std::int64_t slot_ = -1;
};

}  // namespace beamdrl
