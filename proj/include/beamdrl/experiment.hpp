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

// Experiment orchestration. Every policy runs on its own Environment built
// from the same seed; the channel process never looks at the beams, so all
// policies of one seed see identical channel sequences.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "beamdrl/agents.hpp"
#include "beamdrl/baselines.hpp"
#include "beamdrl/config.hpp"
#include "beamdrl/env.hpp"
#include "beamdrl/records.hpp"

namespace beamdrl {

using RowSink = std::function<void(const RunRow&)>;

inline bool is_learning_policy(const std::string& p) { return p == "ddrl" || p == "pdrl" || p == "cdrl"; }

inline Topology topology_of(const std::string& p) {
  if (p == "ddrl") return Topology::kPerStream;
  if (p == "pdrl") return Topology::kPerUser;
  if (p == "cdrl") return Topology::kCentral;
  throw ConfigError("policies: '" + p + "' is not a learning policy");
}

namespace detail {

inline RunRow make_row(std::int64_t slot, const std::string& policy, std::uint64_t seed,
                       const SlotOutcome& o) {
  RunRow row;
  row.slot = slot;
  row.policy = policy;
  row.seed = seed;
  row.average_rate = o.rates.average;
  row.user_rate = o.rates.per_user;
  for (const auto& b : o.rewards) {
    row.reward.push_back(b.reward);
    row.penalty.push_back(b.penalty);
  }
  return row;
}

inline RunRow failed_row(std::int64_t slot, const std::string& policy, std::uint64_t seed,
                         std::size_t users, std::size_t agents) {
  RunRow row;
  row.slot = slot;
  row.policy = policy;
  row.seed = seed;
  row.ok = false;
  row.user_rate.assign(users, 0.0);
  row.reward.assign(agents, 0.0);
  row.penalty.assign(agents, 0.0);
  return row;
}

inline bool reschedules_at(const ExperimentConfig& cfg, std::size_t t) {
  return std::find(cfg.reschedule_slots.begin(), cfg.reschedule_slots.end(), t) !=
         cfg.reschedule_slots.end();
}

}  // namespace detail

// One policy, one seed, cfg.slots rows.
inline std::vector<RunRow> run_policy(const ExperimentConfig& cfg, const std::string& policy,
                                      std::uint64_t seed, const RowSink& sink = {}) {
  const RngStream root(seed, "beamdrl");
  Environment env(cfg.resolved_env(), root);
  std::vector<RunRow> rows;
  rows.reserve(cfg.slots);
  auto emit = [&](RunRow row) {
    if (sink) sink(row);
    rows.push_back(std::move(row));
  };

  if (is_learning_policy(policy)) {
    Trainer trainer(topology_of(policy), env, cfg.dqn, root.substream("agents"));
    for (std::size_t t = 0; t < cfg.slots; ++t) {
      if (detail::reschedules_at(cfg, t)) trainer.reschedule();
      const SlotLog log = trainer.run_slot();
      RunRow row;
      row.slot = log.slot;
      row.policy = policy;
      row.seed = seed;
      row.average_rate = log.average_rate;
      row.user_rate = log.user_rate;
      row.reward = log.reward;
      row.penalty = log.penalty;
      row.epsilon = log.epsilon;
      row.lr = log.lr;
      emit(std::move(row));
    }
    return rows;
  }

  RngStream random_rng = root.substream("random");
  const std::size_t streams = env.streams();
  for (std::size_t t = 0; t < cfg.slots; ++t) {
    if (detail::reschedules_at(cfg, t)) env.reschedule();
    const ChannelRealization& now = env.begin_slot();
    const std::int64_t slot = env.slot();
    if (policy == "zf" || policy == "sah") {
      try {
        const BeamAssignment beams =
            policy == "zf" ? zf_pcsi(now, streams) : sah(env.previous_channels(), streams);
        emit(detail::make_row(slot, policy, seed, env.commit(beams)));
      } catch (const SingularityError&) {
        env.abandon_slot();
        emit(detail::failed_row(slot, policy, seed, env.users(), env.agents()));
      }
    } else if (policy == "greedy") {
      const GreedyResult g = greedy_beam_selection(now.per_user, env, cfg.greedy_max_sweeps);
      RunRow row = detail::make_row(slot, policy, seed, env.commit(env.beams_for(g.actions), g.actions));
      row.one_pass_rate = g.one_pass_sum_rate / static_cast<double>(env.users());
      emit(std::move(row));
    } else if (policy == "random") {
      const auto actions = random_actions(random_rng, env.action_space(), env.agents());
      emit(detail::make_row(slot, policy, seed, env.commit(env.beams_for(actions), actions)));
    } else {
      throw ConfigError("policies: unknown policy '" + policy + "'");
    }
  }
  return rows;
}

struct RunRecord {
  std::vector<RunRow> rows;  // seed-major, then policy, then slot
  std::vector<PolicySummary> summaries;

  // True when some (policy, seed) could not transmit in any slot.
  bool fully_failed() const {
    for (const auto& s : summaries) {
      if (s.ok_slots == 0) return true;
    }
    return false;
  }
};

inline RunRecord run_experiment(const ExperimentConfig& cfg, const RowSink& sink = {}) {
  cfg.validate();
  RunRecord rec;
  for (std::uint64_t seed : cfg.seeds) {
    for (const auto& policy : cfg.policies) {
      auto rows = run_policy(cfg, policy, seed, sink);
      rec.rows.insert(rec.rows.end(), std::make_move_iterator(rows.begin()),
                      std::make_move_iterator(rows.end()));
    }
  }
  rec.summaries = summarize(rec.rows, cfg.ma_window);
  return rec;
}

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

// Parses "key=v1,v2,..." into an axis; the key must be a config key.
inline SweepAxis parse_sweep_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("sweep: expected key=v1,v2,... in '" + spec + "'");
  SweepAxis axis{detail::trim(std::string_view(spec).substr(0, eq)),
                 detail::split_list(std::string_view(spec).substr(eq + 1))};
  detail::find_key(axis.key);
  if (axis.values.empty()) throw ConfigError("sweep: no values for '" + axis.key + "'");
  return axis;
}

struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> assignment;
  ExperimentConfig config;
};

// Cartesian product of the axes, first axis varying slowest.
inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& base, const std::vector<SweepAxis>& axes) {
  std::vector<SweepPoint> pts{SweepPoint{{}, base}};
  for (const auto& axis : axes) {
    std::vector<SweepPoint> next;
    for (const auto& p : pts) {
      for (const auto& v : axis.values) {
        SweepPoint q = p;
        set_config_value(q.config, axis.key, v);
        q.assignment.emplace_back(axis.key, v);
        next.push_back(std::move(q));
      }
    }
    pts = std::move(next);
  }
  for (const auto& p : pts) p.config.validate();
  return pts;
}

inline std::string sweep_label(const SweepPoint& p) {
  std::string s;
  for (const auto& [k, v] : p.assignment) {
    if (!s.empty()) s += "_";
    s += k + "=" + v;
  }
  return s.empty() ? "base" : s;
}

}  // namespace beamdrl
