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

// Multi-agent Q-learning over the environment. One Trainer drives every
// stream agent; the topology decides which network and which replay pool
// each agent uses:
//   per-stream  owner(k, n) = k * N_s + n
//   per-user    owner(k, n) = k
//   central     owner(k, n) = 0
// Random streams are keyed by owner and by agent, not by topology, so
// topologies with the same ownership map produce identical runs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "beamdrl/dqn.hpp"
#include "beamdrl/env.hpp"
#include "beamdrl/errors.hpp"

namespace beamdrl {

enum class Topology { kPerStream, kPerUser, kCentral };

inline std::string to_string(Topology t) {
  switch (t) {
    case Topology::kPerStream: return "ddrl";
    case Topology::kPerUser: return "pdrl";
    case Topology::kCentral: return "cdrl";
  }
  return "?";
}

struct DqnConfig {
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 256;
  std::size_t replay_capacity = 1000;  // E_m
  std::size_t warmup_slots = 200;      // E_s
  std::size_t batch_size = 32;         // E_b
  std::size_t target_sync = 120;       // T_s, in training steps
  double discount = 0.1;               // gamma
  std::size_t updates_per_slot = 1;
  bool normalize_state = true;
  Schedules schedules;

  void validate() const {
    if (hidden1 == 0 || hidden2 == 0) throw ConfigError("hidden1/hidden2: must be positive");
    if (replay_capacity == 0) throw ConfigError("replay_capacity: must be positive");
    if (batch_size == 0) throw ConfigError("batch_size: must be positive");
    if (batch_size > replay_capacity) throw ConfigError("batch_size: exceeds replay_capacity");
    if (target_sync == 0) throw ConfigError("target_sync_interval: must be positive");
    if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount: must lie in [0, 1]");
    if (updates_per_slot == 0) throw ConfigError("updates_per_slot: must be positive");
    const Schedules& s = schedules;
    if (!(s.eps0 >= 0.0 && s.eps0 <= 1.0)) throw ConfigError("epsilon_initial: must lie in [0, 1]");
    if (!(s.eps_min >= 0.0 && s.eps_min <= s.eps0)) {
      throw ConfigError("epsilon_min: must lie in [0, epsilon_initial]");
    }
    if (!(s.eps_decay >= 0.0)) throw ConfigError("epsilon_decay: must be >= 0");
    if (!(s.lr0 > 0.0)) throw ConfigError("lr_initial: must be positive");
    if (!(s.lr_decay >= 0.0)) throw ConfigError("lr_decay: must be >= 0");
  }
};

// What one slot looked like to the agents.
struct SlotLog {
  std::int64_t slot = 0;
  bool learning = false;  // false for priming slots (random actions, nothing stored)
  std::vector<std::size_t> actions;
  std::vector<double> reward;   // per stream
  std::vector<double> penalty;  // per stream
  std::vector<double> user_rate;
  double average_rate = 0.0;
  double epsilon = 0.0;
  double lr = 0.0;
  std::uint64_t updates = 0;  // cumulative gradient steps over all owners

  friend bool operator==(const SlotLog&, const SlotLog&) = default;
};

using TrainingLog = std::vector<SlotLog>;

class Trainer {
 public:
  Trainer(Topology topology, Environment& env, const DqnConfig& cfg, const RngStream& root)
      : topology_(topology), env_(&env), cfg_(cfg) {
    cfg_.validate();
    const std::size_t dim = env.state_dim();
    if (env.layout().size() != dim) throw ConfigError("Trainer: state layout does not match D_in");
    const std::vector<std::size_t> dims{dim, cfg_.hidden1, cfg_.hidden2, env.action_space().size()};
    for (std::size_t o = 0; o < owner_count(); ++o) {
      const std::string id = std::to_string(o);
      RngStream init = root.substream("init/" + id);
      pairs_.emplace_back(Mlp::glorot(dims, init), cfg_.target_sync);
      pools_.emplace_back(cfg_.replay_capacity);
      replay_rng_.push_back(root.substream("replay/" + id));
    }
    for (std::size_t k = 0; k < env.users(); ++k) {
      for (std::size_t n = 0; n < env.streams(); ++n) {
        act_rng_.push_back(root.substream("act/" + std::to_string(k) + "/" + std::to_string(n)));
      }
    }
  }

  Topology topology() const { return topology_; }
  const DqnConfig& config() const { return cfg_; }
  std::size_t owner_count() const {
    switch (topology_) {
      case Topology::kPerStream: return env_->agents();
      case Topology::kPerUser: return env_->users();
      case Topology::kCentral: return 1;
    }
    return 0;
  }
  std::size_t owner_of(std::size_t agent) const {
    switch (topology_) {
      case Topology::kPerStream: return agent;
      case Topology::kPerUser: return agent / env_->streams();
      case Topology::kCentral: return 0;
    }
    return 0;
  }

  const QNetworkPair& network(std::size_t owner) const { return pairs_.at(owner); }
  QNetworkPair& network(std::size_t owner) { return pairs_.at(owner); }
  const ReplayBuffer& pool(std::size_t owner) const { return pools_.at(owner); }
  // The network an agent acts with: its owner's trained weights after the
  // end-of-slot broadcast.
  const Mlp& inference_net(std::size_t agent) const { return pairs_.at(owner_of(agent)).trained; }

  // Learning slots so far (the t of the schedules).
  std::uint64_t learning_slots() const { return t_; }
  std::uint64_t updates() const { return updates_; }

  std::vector<double> input(const AgentState& st) const {
    return cfg_.normalize_state ? env_->features(st) : st.values;
  }

  // Runs one slot. Without two slots of history (start, or right after a
  // reschedule) agents act uniformly at random and nothing is stored.
  SlotLog run_slot() {
    SlotLog log;
    const std::size_t agents = env_->agents();
    log.actions.resize(agents);
    if (!env_->ready()) {
      for (std::size_t s = 0; s < agents; ++s) {
        log.actions[s] = act_rng_[s].index(env_->action_space().size());
      }
      env_->begin_slot();
      const SlotOutcome o = env_->commit(env_->beams_for(log.actions), log.actions);
      fill(log, o.rewards, o.rates);
      log.epsilon = 1.0;
      log.lr = cfg_.schedules.learning_rate(t_);
      log.updates = updates_;
      return log;
    }

    log.learning = true;
    // Warm-up slots only fill the pools, with uniformly random actions.
    const double eps = t_ < cfg_.warmup_slots ? 1.0 : cfg_.schedules.epsilon(t_);
    const double lr = cfg_.schedules.learning_rate(t_);
    std::vector<std::vector<double>> inputs;
    inputs.reserve(agents);
    for (const AgentState& st : env_->states()) inputs.push_back(input(st));
    for (std::size_t s = 0; s < agents; ++s) {
      log.actions[s] = act(inference_net(s), inputs[s], eps, act_rng_[s]);
    }
    StepResult r = env_->step(log.actions);
    for (std::size_t s = 0; s < agents; ++s) {
      pools_[owner_of(s)].push(
          Experience{std::move(inputs[s]), log.actions[s], r.rewards[s].reward, input(r.next_states[s])});
    }
    if (t_ >= cfg_.warmup_slots) {
      for (std::size_t o = 0; o < pairs_.size(); ++o) {
        for (std::size_t u = 0; u < cfg_.updates_per_slot; ++u) {
          if (pools_[o].size() < cfg_.batch_size) break;
          pairs_[o].train(pools_[o].sample(cfg_.batch_size, replay_rng_[o]), cfg_.discount, lr);
          ++updates_;
        }
      }
    }
    ++t_;
    fill(log, r.rewards, r.rates);
    log.epsilon = eps;
    log.lr = lr;
    log.updates = updates_;
    return log;
  }

  // New users; weights, pools and schedules carry over.
  void reschedule() { env_->reschedule(); }

 private:
  void fill(SlotLog& log, const std::vector<RewardBreakdown>& rewards, const RateReport& rates) const {
    log.slot = env_->slot() - 1;
    for (const auto& b : rewards) {
      log.reward.push_back(b.reward);
      log.penalty.push_back(b.penalty);
    }
    log.user_rate = rates.per_user;
    log.average_rate = rates.average;
  }

  Topology topology_;
  Environment* env_;
  DqnConfig cfg_;
  std::vector<QNetworkPair> pairs_;
  std::vector<ReplayBuffer> pools_;
  std::vector<RngStream> replay_rng_;
  std::vector<RngStream> act_rng_;
  std::uint64_t t_ = 0;
  std::uint64_t updates_ = 0;
};

struct TrainingRun {
  std::size_t slots = 1000;
  std::vector<std::size_t> reschedule_at;  // slot indices where users are redrawn
  std::function<void(const SlotLog&)> on_slot;  // optional streaming sink
};

inline TrainingLog train(Topology topology, const EnvConfig& env_cfg, const DqnConfig& dqn_cfg,
                         const TrainingRun& run, std::uint64_t seed) {
  const RngStream root(seed, "beamdrl");
  Environment env(env_cfg, root);
  Trainer trainer(topology, env, dqn_cfg, root.substream("agents"));
  TrainingLog log;
  log.reserve(run.slots);
  for (std::size_t t = 0; t < run.slots; ++t) {
    for (std::size_t r : run.reschedule_at) {
      if (r == t && t > 0) trainer.reschedule();
    }
    log.push_back(trainer.run_slot());
    if (run.on_slot) run.on_slot(log.back());
  }
  return log;
}

inline TrainingLog run_ddrl(const EnvConfig& e, const DqnConfig& d, const TrainingRun& r, std::uint64_t seed) {
  return train(Topology::kPerStream, e, d, r, seed);
}
inline TrainingLog run_pdrl(const EnvConfig& e, const DqnConfig& d, const TrainingRun& r, std::uint64_t seed) {
  return train(Topology::kPerUser, e, d, r, seed);
}
inline TrainingLog run_cdrl(const EnvConfig& e, const DqnConfig& d, const TrainingRun& r, std::uint64_t seed) {
  return train(Topology::kCentral, e, d, r, seed);
}

}  // namespace beamdrl
