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

// Reference policies: zero-forcing with genie CSI, sample-and-hold
// zero-forcing, uniform random codewords and greedy codeword search.

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "beamdrl/codebook.hpp"
#include "beamdrl/env.hpp"
#include "beamdrl/errors.hpp"
#include "beamdrl/metrics.hpp"
#include "beamdrl/numerics.hpp"

namespace beamdrl {

enum class BaselineKind { kZfPcsi, kSah, kRandom, kGreedy };

namespace detail {

// Leading `count` eigenvectors of a Hermitian PSD matrix, by power iteration
// with deflation against the vectors already found.
inline std::vector<CMatrix> dominant_eigenvectors(const CMatrix& a, std::size_t count) {
  const std::size_t n = a.rows();
  if (count > n) throw ShapeError("dominant_eigenvectors: more vectors than dimensions");
  constexpr int kMaxIters = 5000;
  constexpr double kTol = 1e-14;
  std::vector<CMatrix> found;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Complex> v = probe_vector(n);
    v[i % n] += 1.0;
    auto deflate = [&](std::vector<Complex>& x) {
      for (const CMatrix& u : found) {
        Complex proj{};
        for (std::size_t r = 0; r < n; ++r) proj += std::conj(u[r]) * x[r];
        for (std::size_t r = 0; r < n; ++r) x[r] -= proj * u[r];
      }
    };
    deflate(v);
    if (normalize_in_place(v) == 0.0) throw SingularityError("dominant_eigenvectors: zero start vector");
    for (int it = 0; it < kMaxIters; ++it) {
      std::vector<Complex> next(n);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) next[r] += a(r, c) * v[c];
      }
      deflate(next);
      if (normalize_in_place(next) == 0.0) {
        throw SingularityError("dominant_eigenvectors: matrix rank below " + std::to_string(count));
      }
      // Fix the global phase so convergence can be measured entrywise.
      std::size_t piv = 0;
      for (std::size_t r = 1; r < n; ++r) {
        if (std::abs(next[r]) > std::abs(next[piv])) piv = r;
      }
      const Complex phase = std::abs(next[piv]) > 0.0 ? std::conj(next[piv]) / std::abs(next[piv])
                                                      : Complex{1.0, 0.0};
      double change = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        next[r] *= phase;
        change = std::max(change, std::abs(next[r] - v[r]));
      }
      v = std::move(next);
      if (change < kTol) break;
    }
    found.push_back(CMatrix::column(std::move(v)));
  }
  return found;
}

inline CMatrix gram(const CMatrix& h) { return matmul(h, hermitian(h)); }

}  // namespace detail

// Zero-forcing on the given channels: combiners are the dominant left singular
// directions of each H_k, precoders the normalized columns of the
// pseudo-inverse of the stacked effective rows w^H H_k.
inline BeamAssignment zero_forcing(const std::vector<CMatrix>& channels, std::size_t streams) {
  const std::size_t users = channels.size();
  if (users == 0 || streams == 0) throw ShapeError("zero_forcing: empty layout");
  const std::size_t m = channels.front().cols();
  const std::size_t total = users * streams;
  if (total > m) throw SingularityError("zero_forcing: more streams than transmit antennas");
  std::vector<CMatrix> combiners;
  CMatrix g(total, m);
  for (std::size_t k = 0; k < users; ++k) {
    const CMatrix& h = channels[k];
    if (h.cols() != m) throw ShapeError("zero_forcing: inconsistent transmit dimension");
    if (streams > h.rows()) throw ShapeError("zero_forcing: more streams than receive antennas");
    std::vector<CMatrix> ws = detail::dominant_eigenvectors(detail::gram(h), streams);
    for (std::size_t n = 0; n < streams; ++n) {
      const std::size_t s = k * streams + n;
      const CMatrix& w = ws[n];
      for (std::size_t r = 0; r < h.rows(); ++r) {
        const Complex wc = std::conj(w[r]);
        for (std::size_t c = 0; c < m; ++c) g(s, c) += wc * h(r, c);
      }
      combiners.push_back(w);
    }
  }
  const CMatrix pinv = pseudo_inverse(g);
  BeamAssignment beams(users, streams);
  for (std::size_t s = 0; s < total; ++s) {
    CMatrix p = pinv.col(s);
    if (frobenius_norm(p) == 0.0) throw SingularityError("zero_forcing: null precoder column");
    beams.set(s / streams, s % streams, normalized(std::move(p)), combiners[s]);
  }
  return beams;
}

// Genie baseline: zero-forcing on the true slot-t channels.
inline BeamAssignment zf_pcsi(const ChannelRealization& now, std::size_t streams) {
  return zero_forcing(now.per_user, streams);
}

// Sample-and-hold: zero-forcing on the slot t-1 channels, to be applied at t.
inline BeamAssignment sah(const ChannelRealization& previous, std::size_t streams) {
  return zero_forcing(previous.per_user, streams);
}

// One uniform action per stream, k-major.
inline std::vector<std::size_t> random_actions(RngStream& rng, const ActionSpace& space,
                                               std::size_t agents) {
  std::vector<std::size_t> a(agents);
  for (auto& x : a) x = rng.index(space.size());
  return a;
}

inline BeamAssignment random_policy(RngStream& rng, const Environment& env) {
  return env.beams_for(random_actions(rng, env.action_space(), env.agents()));
}

inline constexpr std::size_t kGreedyMaxActions = 4096;

struct GreedyResult {
  std::vector<std::size_t> actions;
  double sum_rate = 0.0;
  double one_pass_sum_rate = 0.0;
  double initial_sum_rate = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> trace;  // sum rate after every single-agent step
};

// Received powers of every (user, receive codeword, transmit codeword)
// triple, computed with the same arithmetic as cross_powers().
class GainTable {
 public:
  GainTable(const std::vector<CMatrix>& channels, const std::vector<CMatrix>& tx_words,
            const std::vector<CMatrix>& rx_words, double stream_power)
      : users_(channels.size()), st_(tx_words.size()), sr_(rx_words.size()),
        table_(users_ * sr_ * st_) {
    for (std::size_t k = 0; k < users_; ++k) {
      const CMatrix& h = channels[k];
      for (std::size_t r = 0; r < sr_; ++r) {
        const CMatrix& w = rx_words[r];
        if (w.size() != h.rows()) throw ShapeError("GainTable: combiner length mismatch");
        std::vector<Complex> g(h.cols());
        for (std::size_t i = 0; i < h.rows(); ++i) {
          const Complex wc = std::conj(w[i]);
          for (std::size_t c = 0; c < h.cols(); ++c) g[c] += wc * h(i, c);
        }
        for (std::size_t q = 0; q < st_; ++q) {
          const CMatrix& p = tx_words[q];
          if (p.size() != h.cols()) throw ShapeError("GainTable: precoder length mismatch");
          Complex acc{};
          for (std::size_t c = 0; c < g.size(); ++c) acc += g[c] * p[c];
          table_[(k * sr_ + r) * st_ + q] = stream_power * std::norm(acc);
        }
      }
    }
  }

  double operator()(std::size_t user, std::size_t rx, std::size_t tx) const {
    return table_[(user * sr_ + rx) * st_ + tx];
  }

 private:
  std::size_t users_, st_, sr_;
  std::vector<double> table_;
};

// Coordinate ascent over codeword actions on the true slot-t channels.
// Starts from action 0 everywhere; each agent in k-major order moves to the
// action with the highest sum rate (others frozen), switching only on strict
// improvement; sweeps repeat until nothing changes or max_sweeps is reached.
inline GreedyResult greedy_beam_selection(const std::vector<CMatrix>& channels,
                                          const Environment& env, std::size_t max_sweeps = 10) {
  const ActionSpace& space = env.action_space();
  if (space.size() > kGreedyMaxActions) {
    throw ConfigError("greedy_beam_selection: " + std::to_string(space.size()) +
                      " actions per agent exceed the limit of " + std::to_string(kGreedyMaxActions));
  }
  if (max_sweeps == 0) throw ConfigError("greedy_beam_selection: max_sweeps must be positive");
  const std::size_t streams = env.streams();
  const std::size_t agents = env.agents();
  std::vector<CMatrix> tx_words, rx_words;
  for (std::size_t q = 0; q < space.s_t; ++q) tx_words.push_back(env.tx_codeword(q));
  for (std::size_t q = 0; q < space.s_r; ++q) rx_words.push_back(env.rx_codeword(q));
  const GainTable table(channels, tx_words, rx_words, env.budget().stream_power());
  std::vector<double> rx_noise(space.s_r);
  for (std::size_t r = 0; r < space.s_r; ++r) {
    rx_noise[r] = frobenius_norm_sq(rx_words[r]) * env.budget().noise_w;
  }

  GreedyResult res;
  res.actions.assign(agents, 0);
  CrossPower x(agents);
  std::vector<double> noise(agents);
  auto evaluate = [&](const std::vector<std::size_t>& act) {
    for (std::size_t v = 0; v < agents; ++v) {
      const auto [tx_v, rx_v] = space.split(act[v]);
      (void)tx_v;
      noise[v] = rx_noise[rx_v];
      for (std::size_t a = 0; a < agents; ++a) {
        x(v, a) = table(v / streams, rx_v, space.split(act[a]).first);
      }
    }
    double sum = 0.0;
    for (double g : stream_rates(x, noise)) sum += g;
    return sum;
  };

  double best = evaluate(res.actions);
  res.initial_sum_rate = best;
  std::vector<std::size_t> trial = res.actions;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t s = 0; s < agents; ++s) {
      const std::size_t keep = res.actions[s];
      std::size_t choice = keep;
      for (std::size_t a = 0; a < space.size(); ++a) {
        if (a == keep) continue;
        trial[s] = a;
        const double v = evaluate(trial);
        if (v > best) {
          best = v;
          choice = a;
        }
      }
      trial[s] = choice;
      if (choice != keep) {
        res.actions[s] = choice;
        changed = true;
      }
      res.trace.push_back(best);
    }
    ++res.sweeps;
    if (sweep == 0) res.one_pass_sum_rate = best;
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  res.sum_rate = best;
  return res;
}

}  // namespace beamdrl
