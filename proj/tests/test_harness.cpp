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

#include <gtest/gtest.h>

#include <clocale>
#include <locale>
#include <sstream>

#include "oracles.hpp"

using namespace beamdrl;

namespace {

ExperimentConfig tiny() {
  ExperimentConfig c = desk_profile();
  c.dqn.hidden1 = 16;
  c.dqn.hidden2 = 16;
  c.dqn.warmup_slots = 5;
  c.dqn.batch_size = 4;
  c.slots = 10;
  c.ma_window = 4;
  return c;
}

std::string csv_text(const RunRecord& rec, const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_csv(rec.rows, cfg.env.channel.users, cfg.env.channel.users * cfg.env.streams, os);
  return os.str();
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  std::istringstream empty("");
  EXPECT_EQ(parse_config(empty), full_profile());
  const ExperimentConfig p = full_profile();
  EXPECT_EQ(p.env.channel.tx_antennas, 32u);
  EXPECT_EQ(p.env.channel.rx_antennas, 4u);
  EXPECT_EQ(p.env.channel.users, 4u);
  EXPECT_EQ(p.env.channel.paths, 20u);
  EXPECT_EQ(p.env.tx_codebook, 32u);
  EXPECT_EQ(p.env.rx_codebook, 4u);
  EXPECT_EQ(p.dqn.hidden1, 256u);
  EXPECT_EQ(p.dqn.replay_capacity, 1000u);
  EXPECT_EQ(p.dqn.batch_size, 32u);
  EXPECT_EQ(p.dqn.target_sync, 120u);
  EXPECT_NEAR(p.rho(), 0.6514, 1e-4);
  p.validate();
}

TEST(Config, CommentsAndWhitespace) {
  std::istringstream is("# header\n  users = 3 # trailing\n\npolicies = zf, random\n");
  const ExperimentConfig c = parse_config(is);
  EXPECT_EQ(c.env.channel.users, 3u);
  EXPECT_EQ(c.policies, (std::vector<std::string>{"zf", "random"}));
}

TEST(Config, Rejections) {
  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return parse_config(is).validate();
  };
  EXPECT_THROW(parse("tx_antennas = 4\nusers = 3\nstreams_per_user = 2\n"), ConfigError);
  EXPECT_THROW(parse("no_such_key = 1\n"), ConfigError);
  EXPECT_THROW(parse("users = 2\nusers = 3\n"), ConfigError);
  EXPECT_THROW(parse("users = two\n"), ConfigError);
  EXPECT_THROW(parse("policies = ddrl, magic\n"), ConfigError);
  EXPECT_THROW(parse("policies = zf, zf\n"), ConfigError);
  EXPECT_THROW(parse("streams_per_user = 5\n"), ConfigError);
  EXPECT_THROW(parse("reschedule_slots = 20000\n"), ConfigError);
  EXPECT_THROW(parse("correlation_override = 1.5\n"), ConfigError);
  EXPECT_THROW(parse("lr_schedule = cosine\n"), ConfigError);
  try {
    parse("users = 2\n\nbogus\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, RoundTrip) {
  ExperimentConfig c = desk_profile();
  c.correlation_override = 0.25;
  c.seeds = {3, 9};
  c.reschedule_slots = {100};
  c.dqn.schedules.lr_mode = LrSchedule::kRecurrence;
  c.dqn.schedules.eps_decay = 1.0 / 3.0;
  std::stringstream ss;
  write_config(c, ss);
  const ExperimentConfig back = parse_config(ss);
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.dqn.schedules.eps_decay, 1.0 / 3.0);
  EXPECT_EQ(back.rho(), 0.25);
  EXPECT_EQ(get_config_value(back, "lr_schedule"), "recurrence");
}

TEST(Config, DeskProfileValid) {
  const ExperimentConfig d = desk_profile();
  d.validate();
  EXPECT_EQ(d.resolved_env().channel.rho, d.rho());
}

TEST(Experiment, RowsPerPolicy) {
  ExperimentConfig c = tiny();
  c.policies = {"ddrl", "zf", "sah", "greedy", "random"};
  const RunRecord rec = run_experiment(c);
  ASSERT_EQ(rec.rows.size(), 50u);
  for (std::size_t i = 0; i < rec.rows.size(); ++i) {
    EXPECT_EQ(rec.rows[i].slot, std::int64_t(i % 10));
    EXPECT_EQ(rec.rows[i].policy, c.policies[i / 10]);
    EXPECT_TRUE(rec.rows[i].ok);
  }
  EXPECT_EQ(rec.summaries.size(), 5u);
  EXPECT_FALSE(rec.fully_failed());
  for (const RunRow& r : rec.rows) {
    if (r.policy == "greedy") EXPECT_GT(r.one_pass_rate, 0.0);
    else EXPECT_EQ(r.one_pass_rate, 0.0);
  }
}

// Every policy of a seed sees the same channel sequence.
TEST(Experiment, PairedChannels) {
  ExperimentConfig c = tiny();
  c.slots = 20;
  const auto zf_rows = run_policy(c, "zf", 4);
  Environment env(c.resolved_env(), RngStream(4, "beamdrl"));
  for (std::size_t t = 0; t < c.slots; ++t) {
    const ChannelRealization& now = env.begin_slot();
    const BeamAssignment b = zf_pcsi(now, 1);
    const oracle::Beams ob = oracle::from(b);
    const auto rates = oracle::rates(ob, now.per_user, env.budget().power_w, env.budget().noise_w);
    EXPECT_NEAR(zf_rows[t].average_rate, oracle::sum(rates) / 2.0, 1e-9);
    env.commit(b);
  }
}

TEST(Experiment, RescheduleRestartsLearning) {
  ExperimentConfig c = tiny();
  c.slots = 100;
  c.reschedule_slots = {50};
  c.policies = {"ddrl", "sah"};
  const RunRecord rec = run_experiment(c);
  for (const RunRow& r : rec.rows) {
    if (r.policy != "ddrl") continue;
    const bool priming = r.slot < 2 || r.slot == 50 || r.slot == 51;
    if (priming) {
      EXPECT_EQ(r.epsilon, 1.0) << r.slot;
    }
    // Warm-up is not repeated: the schedules keep counting.
    if (r.slot >= 52) {
      EXPECT_LT(r.epsilon, 1.0) << r.slot;
    }
  }
  EXPECT_EQ(rec.rows.size(), 200u);
}

TEST(Experiment, ByteIdenticalReruns) {
  ExperimentConfig c = tiny();
  c.slots = 40;
  c.policies = {"ddrl", "cdrl", "zf", "greedy", "random"};
  c.seeds = {1, 2};
  EXPECT_EQ(csv_text(run_experiment(c), c), csv_text(run_experiment(c), c));
}

TEST(Experiment, SweepGrid) {
  const auto a = parse_sweep_axis("users=1,2");
  const auto b = parse_sweep_axis("penalty_weight=0,0.5,1");
  const auto pts = sweep_points(tiny(), {a, b});
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[5].config.env.channel.users, 2u);
  EXPECT_EQ(pts[5].config.env.penalty_weight, 1.0);
  EXPECT_EQ(sweep_label(pts[0]), "users=1_penalty_weight=0");
  EXPECT_THROW(parse_sweep_axis("users"), ConfigError);
  EXPECT_THROW(sweep_points(tiny(), {parse_sweep_axis("bogus=1")}), ConfigError);
}

TEST(Stats, MovingAverage) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_EQ(moving_average(x, 2), (std::vector<double>{1, 1.5, 2.5, 3.5, 4.5}));
  EXPECT_EQ(moving_average(x, 500), (std::vector<double>{1, 1.5, 2, 2.5, 3}));
  EXPECT_THROW(moving_average(x, 0), DomainError);
  const std::vector<double> constant(3000, 0.1);
  for (double v : moving_average(constant, 500)) ASSERT_NEAR(v, 0.1, 1e-15);
  const std::vector<std::size_t> cut{2};
  EXPECT_EQ(segmented_moving_average(x, 500, cut), (std::vector<double>{1, 1.5, 3, 3.5, 4}));
}

TEST(Stats, Distribution) {
  std::vector<double> x;
  for (int i = 100; i >= 1; --i) x.push_back(i);
  const DistributionStats d = distribution_stats(x);
  EXPECT_EQ(d.count, 100u);
  EXPECT_EQ(d.median, 50.5);
  EXPECT_EQ(d.q1, 25.75);
  EXPECT_EQ(d.q3, 75.25);
  EXPECT_EQ(d.min, 1.0);
  EXPECT_EQ(d.max, 100.0);
  EXPECT_EQ(d.mean, 50.5);
  ASSERT_EQ(d.cdf.size(), 101u);
  EXPECT_EQ(d.cdf.back(), 1.0);
  for (std::size_t i = 1; i < d.cdf.size(); ++i) ASSERT_GE(d.cdf[i], d.cdf[i - 1]);
  EXPECT_THROW(distribution_stats(std::vector<double>{}), DomainError);
}

TEST(Csv, EmptyAndRoundTrip) {
  std::ostringstream empty;
  write_csv(std::vector<RunRow>{}, 2, 2, empty);
  std::istringstream back_empty(empty.str());
  EXPECT_TRUE(read_csv(back_empty).empty());

  ExperimentConfig c = tiny();
  c.policies = {"ddrl", "greedy"};
  const RunRecord rec = run_experiment(c);
  const std::string text = csv_text(rec, c);
  std::istringstream is(text);
  const auto rows = read_csv(is);
  ASSERT_EQ(rows.size(), rec.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].average_rate, rec.rows[i].average_rate);
    EXPECT_EQ(rows[i].reward, rec.rows[i].reward);
    EXPECT_EQ(rows[i].lr, rec.rows[i].lr);
  }
  EXPECT_EQ(summarize(rows, c.ma_window), rec.summaries);
}

TEST(Csv, IndependentOfGlobalLocale) {
  ExperimentConfig c = tiny();
  c.policies = {"random"};
  const std::string plain = csv_text(run_experiment(c), c);
  std::locale keep;
  try {
    std::locale::global(std::locale("de_DE.UTF-8"));
  } catch (const std::runtime_error&) {
    GTEST_SKIP() << "de_DE locale not installed";
  }
  std::setlocale(LC_ALL, "de_DE.UTF-8");
  const std::string german = csv_text(run_experiment(c), c);
  std::locale::global(keep);
  std::setlocale(LC_ALL, "C");
  EXPECT_EQ(plain, german);
  EXPECT_EQ(plain.find(';'), std::string::npos);
}

TEST(Summary, MatchesRecomputation) {
  ExperimentConfig c = tiny();
  c.slots = 30;
  c.policies = {"zf", "random"};
  const RunRecord rec = run_experiment(c);
  for (const PolicySummary& s : rec.summaries) {
    const auto x = rate_series(rec.rows, s.policy, s.seed);
    EXPECT_EQ(s.ok_slots, x.size());
    EXPECT_EQ(s.final_moving_average, moving_average(x, c.ma_window).back());
    EXPECT_EQ(s.rates.median, distribution_stats(x).median);
  }
}
