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

// Slot-level MDP environment: delayed-feedback agent states, interference
// penalty and reward, rescheduling.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamdrl/channel.hpp"
#include "beamdrl/codebook.hpp"
#include "beamdrl/errors.hpp"
#include "beamdrl/metrics.hpp"
#include "beamdrl/numerics.hpp"

namespace beamdrl {

// Marks a beam that did not come from the codebooks (e.g. zero-forcing).
inline constexpr std::size_t kNoCodeword = std::numeric_limits<std::size_t>::max();

// Everything the base station learns about one finished slot.
struct SlotRecord {
  ChannelRealization channels;
  std::vector<std::size_t> tx_index;  // U per stream
  std::vector<std::size_t> rx_index;  // V per stream
  CrossPower current;                 // this slot's beams on this slot's channel
  CrossPower stale;                   // previous slot's beams on this slot's channel
  std::vector<double> noise;          // ||w||^2 sigma^2 per stream
  std::vector<double> rates;          // G per stream
};

// The last three finished slots, most recent first.
class SlotHistory {
 public:
  static constexpr std::size_t kDepth = 3;

  void push(SlotRecord rec) {
    slots_.push_front(std::move(rec));
    if (slots_.size() > kDepth) slots_.pop_back();
  }
  void clear() { slots_.clear(); }
  std::size_t size() const { return slots_.size(); }

  // Slot t - lag, where t is the slot about to be transmitted (lag >= 1).
  const SlotRecord& lag(std::size_t u) const {
    if (u == 0 || u > slots_.size()) {
      throw NotReadyError("SlotHistory: slot t-" + std::to_string(u) + " not available");
    }
    return slots_[u - 1];
  }

 private:
  std::deque<SlotRecord> slots_;
};

// Raw (un-normalized) observation of one agent; length 10 K N_s + 3.
struct AgentState {
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct Experience {
  std::vector<double> s;       // network input (possibly normalized)
  std::size_t a = 0;
  double r = 0.0;
  std::vector<double> s_next;
};

struct RewardBreakdown {
  double own_rate = 0.0;
  double penalty = 0.0;
  double reward = 0.0;
  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

enum class FeatureKind { kPower, kTxIndex, kRxIndex, kRate };

inline std::size_t state_dimension(std::size_t users, std::size_t streams) {
  return 10 * users * streams + 3;
}

// Semantic of every state entry, in the order build_state writes them:
//   [0..4]   own: received power, U, V, G, interference-plus-noise (slot t-1)
//   [5..12]  for u = 1, 2: inter-stream (beams t-u), inter-stream (beams t-1-u),
//            multi-user (beams t-u), multi-user (beams t-1-u); all on channel t-u
//   then per other agent (k-major), for u = 1, 2:
//            U, V, G, its received power, power it receives from this agent
inline std::vector<FeatureKind> state_layout(std::size_t users, std::size_t streams) {
  using enum FeatureKind;
  std::vector<FeatureKind> kinds = {kPower, kTxIndex, kRxIndex, kRate, kPower};
  for (int i = 0; i < 8; ++i) kinds.push_back(kPower);
  for (std::size_t o = 1; o < users * streams; ++o) {
    for (int u = 0; u < 2; ++u) {
      kinds.insert(kinds.end(), {kTxIndex, kRxIndex, kRate, kPower, kPower});
    }
  }
  return kinds;
}

inline AgentState build_state(std::size_t k, std::size_t n, const SlotHistory& history,
                              std::size_t users, std::size_t streams) {
  if (history.size() < 2) {
    throw NotReadyError("build_state: need slots t-1 and t-2 (have " +
                        std::to_string(history.size()) + ")");
  }
  if (k >= users || n >= streams) throw IndexError("build_state: agent out of range");
  const std::size_t total = users * streams;
  const std::size_t me = k * streams + n;
  const SlotRecord& r1 = history.lag(1);
  if (r1.current.size() != total) throw ShapeError("build_state: history has wrong stream count");
  auto index_value = [](std::size_t idx) {
    return idx == kNoCodeword ? -1.0 : static_cast<double>(idx);
  };

  AgentState st;
  st.values.reserve(state_dimension(users, streams));
  auto& v = st.values;
  v.push_back(r1.current(me, me));
  v.push_back(index_value(r1.tx_index[me]));
  v.push_back(index_value(r1.rx_index[me]));
  v.push_back(r1.rates[me]);
  v.push_back(r1.current.interference(me) + r1.noise[me]);

  for (std::size_t u = 1; u <= 2; ++u) {
    const SlotRecord& rec = history.lag(u);
    double intra_now = 0.0, intra_old = 0.0, multi_now = 0.0, multi_old = 0.0;
    for (std::size_t a = 0; a < total; ++a) {
      if (a == me) continue;
      if (a / streams == k) {
        intra_now += rec.current(me, a);
        intra_old += rec.stale(me, a);
      } else {
        multi_now += rec.current(me, a);
        multi_old += rec.stale(me, a);
      }
    }
    v.insert(v.end(), {intra_now, intra_old, multi_now, multi_old});
  }

  for (std::size_t o = 0; o < total; ++o) {
    if (o == me) continue;
    for (std::size_t u = 1; u <= 2; ++u) {
      const SlotRecord& rec = history.lag(u);
      v.insert(v.end(), {index_value(rec.tx_index[o]), index_value(rec.rx_index[o]), rec.rates[o],
                         rec.current(o, o), rec.current(o, me)});
    }
  }
  return st;
}

// Network input: powers become log10(1 + x / sigma^2), codeword indices are
// scaled into [0, 1], rates pass through.
inline std::vector<double> normalize_state(const AgentState& st, std::span<const FeatureKind> layout,
                                           double noise_w, std::size_t s_t, std::size_t s_r) {
  if (layout.size() != st.size()) throw ShapeError("normalize_state: layout length mismatch");
  std::vector<double> out(st.size());
  const double tx_scale = s_t > 1 ? 1.0 / static_cast<double>(s_t - 1) : 1.0;
  const double rx_scale = s_r > 1 ? 1.0 / static_cast<double>(s_r - 1) : 1.0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    const double x = st.values[i];
    switch (layout[i]) {
      case FeatureKind::kPower: out[i] = std::log10(1.0 + x / noise_w); break;
      case FeatureKind::kTxIndex: out[i] = x * tx_scale; break;
      case FeatureKind::kRxIndex: out[i] = x * rx_scale; break;
      case FeatureKind::kRate: out[i] = x; break;
    }
  }
  return out;
}

// Sum over all other streams of the rate gained if stream `acting` stopped
// interfering. Each term is computed from a sub-sum of non-negative powers, so
// the result is never negative.
inline double penalty_from_cross(const CrossPower& x, std::span<const double> noise,
                                 std::span<const double> rates, std::size_t acting) {
  double total = 0.0;
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (v == acting) continue;
    double without = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (a != v && a != acting) without += x(v, a);
    }
    const double relieved = std::log2(1.0 + x(v, v) / (without + noise[v]));
    total += std::max(0.0, relieved - rates[v]);
  }
  return total;
}

inline double penalty(std::size_t k, std::size_t n, const BeamAssignment& beams,
                      const std::vector<CMatrix>& channels, const LinkBudget& budget) {
  const CrossPower x = cross_powers(beams, channels, budget);
  const std::vector<double> noise = noise_terms(beams, budget);
  const std::vector<double> rates = stream_rates(x, noise);
  return penalty_from_cross(x, noise, rates, beams.index(k, n));
}

inline RewardBreakdown reward(std::size_t k, std::size_t n, const BeamAssignment& beams,
                              const std::vector<CMatrix>& channels, const LinkBudget& budget,
                              double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("reward: penalty weight must be non-negative");
  const CrossPower x = cross_powers(beams, channels, budget);
  const std::vector<double> noise = noise_terms(beams, budget);
  const std::vector<double> rates = stream_rates(x, noise);
  RewardBreakdown b;
  b.own_rate = rates[beams.index(k, n)];
  b.penalty = penalty_from_cross(x, noise, rates, beams.index(k, n));
  b.reward = b.own_rate - lambda * b.penalty;
  return b;
}

struct EnvConfig {
  ChannelParams channel;
  std::size_t streams = 1;  // N_s
  double power_dbm = 20.0;
  double noise_dbm = -114.0;
  std::size_t tx_codebook = 32;  // S_t
  std::size_t rx_codebook = 4;   // S_r
  std::size_t phases = 4;        // T
  double penalty_weight = 1.0;   // lambda
};

struct SlotOutcome {
  RateReport rates;
  std::vector<RewardBreakdown> rewards;  // per stream
};

struct StepResult {
  std::vector<RewardBreakdown> rewards;
  std::vector<AgentState> next_states;
  RateReport rates;
};

// Sequential slot machine.
//
// A slot is begin_slot() (channel moves to t) followed by commit() (beams
// meet channel t, rates and rewards are computed, the slot enters history).
// Agent states only read history, i.e. slots t-1 and t-2.
class Environment {
 public:
  Environment(const EnvConfig& cfg, const RngStream& root)
      : cfg_(cfg),
        process_(cfg.channel, root.substream("channel")),
        budget_(LinkBudget::from_dbm(cfg.power_dbm, cfg.noise_dbm, cfg.channel.users, cfg.streams)),
        tx_book_(build_codebook(cfg.channel.tx_antennas, cfg.tx_codebook, cfg.phases)),
        rx_book_(build_codebook(cfg.channel.rx_antennas, cfg.rx_codebook, cfg.phases)),
        space_{cfg.tx_codebook, cfg.rx_codebook},
        layout_(state_layout(cfg.channel.users, cfg.streams)) {
    if (cfg.streams == 0) throw ConfigError("Environment: need at least one stream per user");
    if (!(cfg.penalty_weight >= 0.0)) throw ConfigError("Environment: penalty weight must be >= 0");
    for (std::size_t q = 0; q < tx_book_.size(); ++q) tx_words_.push_back(tx_book_.codeword(q));
    for (std::size_t q = 0; q < rx_book_.size(); ++q) rx_words_.push_back(rx_book_.codeword(q));
  }

  const EnvConfig& config() const { return cfg_; }
  std::size_t users() const { return cfg_.channel.users; }
  std::size_t streams() const { return cfg_.streams; }
  std::size_t agents() const { return users() * streams(); }
  const ActionSpace& action_space() const { return space_; }
  const LinkBudget& budget() const { return budget_; }
  const Codebook& tx_codebook() const { return tx_book_; }
  const Codebook& rx_codebook() const { return rx_book_; }
  const std::vector<FeatureKind>& layout() const { return layout_; }
  std::size_t state_dim() const { return state_dimension(users(), streams()); }
  const SlotHistory& history() const { return history_; }
  const ChannelProcess& channel_process() const { return process_; }
  // Number of committed slots.
  std::int64_t slot() const { return committed_; }

  bool ready() const { return history_.size() >= 2; }

  AgentState state(std::size_t k, std::size_t n) const {
    return build_state(k, n, history_, users(), streams());
  }

  std::vector<AgentState> states() const {
    std::vector<AgentState> out;
    out.reserve(agents());
    for (std::size_t k = 0; k < users(); ++k) {
      for (std::size_t n = 0; n < streams(); ++n) out.push_back(state(k, n));
    }
    return out;
  }

  std::vector<double> features(const AgentState& st) const {
    return normalize_state(st, layout_, budget_.noise_w, space_.s_t, space_.s_r);
  }

  BeamAssignment beams_for(std::span<const std::size_t> actions) const {
    if (actions.size() != agents()) {
      throw CompletenessError("Environment: expected " + std::to_string(agents()) +
                              " actions, got " + std::to_string(actions.size()));
    }
    BeamAssignment beams(users(), streams());
    for (std::size_t s = 0; s < agents(); ++s) {
      const auto [tx, rx] = space_.split(actions[s]);
      beams.set(s / streams(), s % streams(), tx_words_[tx], rx_words_[rx]);
    }
    return beams;
  }

  const CMatrix& tx_codeword(std::size_t q) const { return tx_words_.at(q); }
  const CMatrix& rx_codeword(std::size_t q) const { return rx_words_.at(q); }

  // Channel of the last finished slot (what a delayed-CSI transmitter knows).
  const ChannelRealization& previous_channels() const {
    return in_flight_ ? previous_ : process_.current();
  }

  // Moves the channel to the next slot and returns it.
  const ChannelRealization& begin_slot() {
    if (in_flight_) throw NotReadyError("Environment: begin_slot called twice without commit");
    previous_ = process_.current();
    in_flight_ = true;
    return process_.advance();
  }

  SlotOutcome commit(const BeamAssignment& beams, std::span<const std::size_t> actions = {}) {
    if (!in_flight_) throw NotReadyError("Environment: commit without begin_slot");
    beams.check_complete(cfg_.channel.tx_antennas, cfg_.channel.rx_antennas);
    if (beams.users() != users() || beams.streams() != streams()) {
      throw ShapeError("Environment: assignment has wrong stream layout");
    }
    const ChannelRealization& ch = process_.current();
    SlotRecord rec;
    rec.channels = ch;
    rec.current = cross_powers(beams, ch.per_user, budget_);
    rec.stale = last_beams_ ? cross_powers(*last_beams_, ch.per_user, budget_) : rec.current;
    rec.noise = noise_terms(beams, budget_);
    rec.rates = stream_rates(rec.current, rec.noise);
    if (actions.empty()) {
      rec.tx_index.assign(agents(), kNoCodeword);
      rec.rx_index.assign(agents(), kNoCodeword);
    } else {
      if (actions.size() != agents()) throw CompletenessError("Environment: action count mismatch");
      for (std::size_t a : actions) {
        const auto [tx, rx] = space_.split(a);
        rec.tx_index.push_back(tx);
        rec.rx_index.push_back(rx);
      }
    }

    SlotOutcome out;
    out.rates = make_rate_report(rec.rates, users(), streams());
    out.rewards.resize(agents());
    for (std::size_t s = 0; s < agents(); ++s) {
      auto& rb = out.rewards[s];
      rb.own_rate = rec.rates[s];
      rb.penalty = penalty_from_cross(rec.current, rec.noise, rec.rates, s);
      rb.reward = rb.own_rate - cfg_.penalty_weight * rb.penalty;
    }

    history_.push(std::move(rec));
    last_beams_ = beams;
    in_flight_ = false;
    ++committed_;
    return out;
  }

  // Ends an in-flight slot without transmitting (no beams could be formed).
  // The slot is not added to the history.
  void abandon_slot() {
    if (!in_flight_) throw NotReadyError("Environment: abandon_slot without begin_slot");
    in_flight_ = false;
    ++committed_;
  }

  // Codebook actions for every agent, chosen from the current (delayed) states.
  StepResult step(std::span<const std::size_t> actions) {
    if (!ready()) throw NotReadyError("Environment: step needs two slots of history");
    const BeamAssignment beams = beams_for(actions);
    begin_slot();
    SlotOutcome o = commit(beams, actions);
    StepResult r;
    r.rewards = std::move(o.rewards);
    r.rates = std::move(o.rates);
    r.next_states = states();
    return r;
  }

  // New users: geometry, shadowing and path gains are redrawn and the history
  // is discarded, so two slots must pass before states are available again.
  void reschedule() {
    if (in_flight_) throw NotReadyError("Environment: reschedule during a slot");
    process_.reschedule();
    history_.clear();
  }

 private:
  EnvConfig cfg_;
  ChannelProcess process_;
  LinkBudget budget_;
  Codebook tx_book_;
  Codebook rx_book_;
  ActionSpace space_;
  std::vector<FeatureKind> layout_;
  std::vector<CMatrix> tx_words_;
  std::vector<CMatrix> rx_words_;
  SlotHistory history_;
  std::optional<BeamAssignment> last_beams_;
  ChannelRealization previous_;
  bool in_flight_ = false;
  std::int64_t committed_ = 0;
};

}  // namespace beamdrl
