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

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "oracles.hpp"

using namespace beamdrl;

namespace {

std::vector<double> random_input(RngStream& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

std::vector<Experience> random_experiences(RngStream& rng, std::size_t count, std::size_t dim, std::size_t actions) {
  std::vector<Experience> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(Experience{random_input(rng, dim), rng.index(actions), rng.normal(), random_input(rng, dim)});
  }
  return out;
}

Batch view(const std::vector<Experience>& e) {
  Batch b;
  for (const auto& x : e) b.push_back(&x);
  return b;
}

// Random biases too, so no unit sits at the rectifier kink by construction.
Mlp random_net(std::vector<std::size_t> dims, RngStream& rng) {
  Mlp net = Mlp::glorot(std::move(dims), rng);
  for (auto& l : net.layers())
    for (auto& b : l.b) b = rng.uniform(-0.1, 0.1);
  return net;
}

}  // namespace

TEST(Forward, ZeroNetGivesZeros) {
  const Mlp net({13, 8, 8, 4});
  const auto q = net.forward(std::vector<double>(13, 1.5));
  EXPECT_EQ(q, std::vector<double>(4, 0.0));
}

TEST(Forward, IdentityLayersPassThroughRectifier) {
  Mlp net({3, 3, 3});
  for (auto& l : net.layers())
    for (std::size_t i = 0; i < 3; ++i) l.w[i * 3 + i] = 1.0;
  EXPECT_EQ(net.forward(std::vector<double>{1.0, -2.0, 0.5}), (std::vector<double>{1.0, 0.0, 0.5}));
}

TEST(Forward, MatchesScalarOracle) {
  RngStream rng(1, "fw");
  const Mlp net = random_net({13, 32, 32, 16}, rng);
  for (int t = 0; t < 20; ++t) {
    const auto x = random_input(rng, 13);
    const auto q = net.forward(x), ref = oracle::forward(net, x);
    for (std::size_t i = 0; i < q.size(); ++i) ASSERT_NEAR(q[i], ref[i], 1e-10);
  }
}

TEST(Forward, LengthMismatch) {
  const Mlp net({4, 2, 2, 3});
  EXPECT_THROW(net.forward(std::vector<double>(5)), ShapeError);
  EXPECT_THROW(Mlp(std::vector<std::size_t>{4}), ConfigError);
}

TEST(Act, GreedyAndTies) {
  RngStream rng(2, "act");
  Mlp net({2, 4, 4, 5});
  EXPECT_EQ(act(net, std::vector<double>{1.0, 2.0}, 0.0, rng), 0u);  // all-equal Q
  net.layers().back().b = {0.1, 0.3, 0.3, -1.0, 0.2};
  for (int i = 0; i < 100; ++i) ASSERT_EQ(act(net, std::vector<double>{1.0, 2.0}, 0.0, rng), 1u);
  EXPECT_THROW(act(net, std::vector<double>{1.0, 2.0}, 1.5, rng), DomainError);
}

TEST(Act, ArgmaxInvariantToConstantShift) {
  RngStream rng(3, "shift");
  Mlp net = random_net({6, 8, 8, 7}, rng);
  Mlp shifted = net;
  for (auto& b : shifted.layers().back().b) b += 3.25;
  RngStream r1(4, "r"), r2(4, "r");
  for (int t = 0; t < 200; ++t) {
    const auto x = random_input(rng, 6);
    ASSERT_EQ(act(net, x, 0.0, r1), act(shifted, x, 0.0, r2));
  }
}

TEST(Act, FullExplorationIsUniform) {
  RngStream rng(5, "uni");
  const Mlp net({2, 3, 3, 8});
  const int n = 100000;
  std::vector<int> hist(8, 0);
  for (int i = 0; i < n; ++i) ++hist[act(net, std::vector<double>{0.0, 0.0}, 1.0, rng)];
  const double expect = n / 8.0, sigma = std::sqrt(n * (1.0 / 8) * (7.0 / 8));
  for (int c : hist) EXPECT_LE(std::fabs(c - expect), 3.0 * sigma);
}

TEST(TdTargets, Cases) {
  RngStream rng(6, "td");
  const auto exps = random_experiences(rng, 16, 5, 4);
  const Batch b = view(exps);
  const Mlp target = random_net({5, 8, 8, 4}, rng);
  const auto g0 = td_targets(b, target, 0.0);
  const auto zero = td_targets(b, Mlp({5, 8, 8, 4}), 0.9);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(g0[i], b[i]->r);
    EXPECT_EQ(zero[i], b[i]->r);
  }
  const auto t = td_targets(b, target, 0.1);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto q = oracle::forward(target, b[i]->s_next);
    EXPECT_NEAR(t[i], b[i]->r + 0.1 * *std::max_element(q.begin(), q.end()), 1e-12);
  }
  EXPECT_THROW(td_targets(b, target, 1.5), DomainError);
}

TEST(LossAndGrads, PerfectPredictionIsZero) {
  RngStream rng(7, "pp");
  const Mlp net = random_net({5, 8, 8, 4}, rng);
  const auto exps = random_experiences(rng, 8, 5, 4);
  const Batch b = view(exps);
  std::vector<double> targets;
  for (const auto* e : b) targets.push_back(oracle::forward(net, e->s)[e->a]);
  const LossAndGrads lg = loss_and_grads(net, b, targets);
  EXPECT_NEAR(lg.loss, 0.0, 1e-24);
  lg.grads.for_each_parameter([](double g) { ASSERT_NEAR(g, 0.0, 1e-12); });
}

TEST(LossAndGrads, OneParameterQuadratic) {
  Mlp net({1, 1});
  net.layers()[0].w[0] = 2.0;
  net.layers()[0].b[0] = 0.5;
  const Experience e{{3.0}, 0, 0.0, {0.0}};
  const LossAndGrads lg = loss_and_grads(net, Batch{&e}, std::vector<double>{4.0});
  // q = 6.5, error 2.5: loss 3.125, dL/dw = 2.5 * 3, dL/db = 2.5.
  EXPECT_DOUBLE_EQ(lg.loss, 3.125);
  EXPECT_DOUBLE_EQ(lg.grads.layers()[0].w[0], 7.5);
  EXPECT_DOUBLE_EQ(lg.grads.layers()[0].b[0], 2.5);
}

TEST(LossAndGrads, FiniteDifferences) {
  RngStream rng(8, "fd");
  for (int trial = 0; trial < 3; ++trial) {
    Mlp net = random_net({7, 12, 10, 5}, rng);
    const auto exps = random_experiences(rng, 6, 7, 5);
    const Batch b = view(exps);
    std::vector<double> targets;
    for (std::size_t i = 0; i < b.size(); ++i) targets.push_back(rng.normal());
    const LossAndGrads lg = loss_and_grads(net, b, targets);
    EXPECT_NEAR(lg.loss, oracle::loss(net, b, targets), 1e-12);
    std::vector<double> analytic;
    lg.grads.for_each_parameter([&](double g) { analytic.push_back(g); });
    std::size_t i = 0;
    const double h = 1e-7;
    net.for_each_parameter([&](double& p) {
      const double keep = p;
      p = keep + h;
      const long double up = oracle::loss_extended(net, b, targets);
      const long double hi = p;
      p = keep - h;
      const long double down = oracle::loss_extended(net, b, targets);
      const long double lo = p;
      p = keep;
      const double fd = double((up - down) / (hi - lo));
      const double scale = std::max(std::fabs(fd), std::fabs(analytic[i]));
      const double rel = scale > 0.0 ? std::fabs(fd - analytic[i]) / scale : 0.0;
      ASSERT_LE(rel, 1e-4) << "parameter " << i;
      ++i;
    });
  }
}

TEST(LossAndGrads, SmallStepDecreasesLoss) {
  RngStream rng(9, "ls");
  Mlp net = random_net({6, 16, 16, 4}, rng);
  const auto exps = random_experiences(rng, 16, 6, 4);
  const Batch b = view(exps);
  const std::vector<double> targets(16, 1.0);
  const double before = oracle::loss(net, b, targets);
  const LossAndGrads lg = loss_and_grads(net, b, targets);
  Mlp sgd = net;
  std::vector<double> g;
  lg.grads.for_each_parameter([&](double x) { g.push_back(x); });
  std::size_t i = 0;
  sgd.for_each_parameter([&](double& p) { p -= 1e-6 * g[i++]; });
  EXPECT_LT(oracle::loss(sgd, b, targets), before);
  AdamState st;
  adam_step(net, lg.grads, st, 1e-6);
  EXPECT_LT(oracle::loss(net, b, targets), before);
}

TEST(Adam, ZeroGradsLeaveParameters) {
  RngStream rng(10, "az");
  Mlp net = random_net({3, 4, 4, 2}, rng);
  const Mlp before = net;
  AdamState st;
  for (int i = 0; i < 3; ++i) adam_step(net, zeros_like(net), st, 1e-2);
  EXPECT_EQ(net, before);
  EXPECT_EQ(st.step, 3u);
}

TEST(Adam, FirstStepIsLrTimesSign) {
  Mlp net({2, 2});
  Mlp g({2, 2});
  g.layers()[0].w = {0.5, -3.0, 1e-3, 0.0};
  g.layers()[0].b = {-2.0, 7.0};
  AdamState st;
  const double lr = 0.01;
  adam_step(net, g, st, lr);
  std::vector<double> grads, params;
  g.for_each_parameter([&](double x) { grads.push_back(x); });
  net.for_each_parameter([&](double x) { params.push_back(x); });
  for (std::size_t i = 0; i < grads.size(); ++i) {
    // m_hat = g and v_hat = g^2 after bias correction.
    const double expect = -lr * grads[i] / (std::fabs(grads[i]) + 1e-8);
    EXPECT_NEAR(params[i], expect, 1e-15);
  }
}

TEST(Adam, ShapeMismatch) {
  Mlp net({2, 2});
  AdamState st;
  EXPECT_THROW(adam_step(net, Mlp({3, 2}), st, 0.1), ShapeError);
}

TEST(QNetworkPair, SyncAndDivergence) {
  RngStream rng(11, "pair");
  QNetworkPair pair(random_net({4, 8, 8, 3}, rng), 120);
  const auto exps = random_experiences(rng, 32, 4, 3);
  const Batch b = view(exps);
  pair.train(b, 0.1, 1e-2);
  const auto x = random_input(rng, 4);
  EXPECT_NE(pair.trained.forward(x), pair.target.forward(x));
  sync_target(pair);
  for (int t = 0; t < 10; ++t) {
    const auto s = random_input(rng, 4);
    ASSERT_EQ(pair.trained.forward(s), pair.target.forward(s));
  }
  pair.train(b, 0.1, 1e-2);
  EXPECT_NE(pair.trained, pair.target);
}

TEST(QNetworkPair, SyncEvery120Steps) {
  RngStream rng(12, "cad");
  QNetworkPair pair(random_net({3, 4, 4, 2}, rng), 120);
  const auto exps = random_experiences(rng, 8, 3, 2);
  const Batch b = view(exps);
  for (int step = 1; step <= 360; ++step) {
    pair.train(b, 0.1, 1e-3);
    ASSERT_EQ(pair.syncs, std::uint64_t(step / 120));
    if (step % 120 == 0) ASSERT_EQ(pair.target, pair.trained);
    else ASSERT_NE(pair.target, pair.trained);
  }
}

TEST(QNetworkPair, DeterministicTraining) {
  auto run = [] {
    RngStream rng(13, "det");
    QNetworkPair pair(random_net({5, 8, 8, 3}, rng), 7);
    const auto exps = random_experiences(rng, 64, 5, 3);
    ReplayBuffer buf(64);
    for (const auto& e : exps) buf.push(e);
    RngStream srng(14, "s");
    for (int i = 0; i < 50; ++i) pair.train(buf.sample(16, srng), 0.1, 1e-3);
    return pair.trained;
  };
  EXPECT_EQ(run(), run());
}

TEST(Schedules, DefaultEndpoints) {
  Schedules s;
  EXPECT_EQ(s.values(0), std::make_pair(0.7, 5e-3));
  EXPECT_EQ(s.epsilon(1000000), 0.001);
  for (std::uint64_t t : {0u, 10u, 1000u, 50000u}) {
    ASSERT_GE(s.epsilon(t), s.eps_min);
    ASSERT_LE(s.epsilon(t), s.eps0);
    ASSERT_GT(s.learning_rate(t), 0.0);
    ASSERT_LT(s.learning_rate(t + 1), s.learning_rate(t));
  }
}

TEST(Schedules, RecurrenceAndInverseTime) {
  Schedules rec;
  rec.lr_mode = LrSchedule::kRecurrence;
  Schedules inv;
  double a = 5e-3;
  for (std::uint64_t t = 1; t <= 50; ++t) {
    a = a / (1.0 + 1e-4 * double(t));
    ASSERT_EQ(rec.learning_rate(t), a);
    ASSERT_EQ(inv.learning_rate(t), 5e-3 / (1.0 + 1e-4 * double(t)));
  }
  EXPECT_EQ(rec.learning_rate(1), 5e-3 / (1.0 + 1e-4));
  EXPECT_EQ(inv.learning_rate(1), 5e-3 / (1.0 + 1e-4));
  EXPECT_EQ(schedule_values(inv, 1).first, 0.7 * std::exp(-1e-4));
}

TEST(Replay, FifoEviction) {
  ReplayBuffer buf(1000);
  for (int i = 0; i <= 1000; ++i) {
    buf.push(Experience{{double(i)}, 0, 0.0, {}});
    ASSERT_LE(buf.size(), 1000u);
  }
  EXPECT_EQ(buf.size(), 1000u);
  for (std::size_t i = 0; i < 1000; ++i) ASSERT_EQ(buf[i].s[0], double(i + 1));
  EXPECT_THROW(ReplayBuffer(0), ConfigError);
}

TEST(Replay, FullSampleIsPermutation) {
  ReplayBuffer buf(50);
  for (int i = 0; i < 50; ++i) buf.push(Experience{{double(i)}, 0, 0.0, {}});
  RngStream rng(15, "perm");
  const Batch b = buf.sample(50, rng);
  std::set<double> seen;
  for (const auto* e : b) seen.insert(e->s[0]);
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_THROW(buf.sample(51, rng), NotReadyError);
}

TEST(Replay, UniformSampling) {
  const std::size_t n = 20;
  ReplayBuffer buf(n);
  for (std::size_t i = 0; i < n; ++i) buf.push(Experience{{double(i)}, 0, 0.0, {}});
  RngStream rng(16, "chi");
  std::vector<double> count(n, 0.0);
  const int draws = 100000 / 4;
  for (int d = 0; d < draws; ++d) {
    const Batch b = buf.sample(4, rng);
    std::set<const Experience*> uniq(b.begin(), b.end());
    ASSERT_EQ(uniq.size(), 4u);
    for (const auto* e : b) count[std::size_t(e->s[0])] += 1.0;
  }
  const double expect = 4.0 * draws / n;
  double chi2 = 0.0;
  for (double c : count) chi2 += (c - expect) * (c - expect) / expect;
  // 19 degrees of freedom; 0.1% critical value is 43.8.
  EXPECT_LT(chi2, 43.8);
}

TEST(Checkpoint, RoundTripBitExact) {
  RngStream rng(17, "ck");
  const Mlp net = random_net({13, 16, 16, 8}, rng);
  std::stringstream ss;
  write_checkpoint(net, ss);
  const Mlp back = read_checkpoint(ss);
  EXPECT_EQ(back, net);
  const std::string path = ::testing::TempDir() + "/beamdrl_ck.txt";
  save_checkpoint(net, path);
  EXPECT_EQ(load_checkpoint(path), net);
  std::remove(path.c_str());
}

TEST(Checkpoint, RejectsBadInput) {
  std::stringstream bad("not-a-net 1\n");
  EXPECT_THROW(read_checkpoint(bad), ConfigError);
  std::stringstream version("beamdrl-mlp 9\ndims 1 1\n");
  EXPECT_THROW(read_checkpoint(version), ConfigError);
  std::stringstream truncated("beamdrl-mlp 1\ndims 2 1\n0x1p+0\n");
  EXPECT_THROW(read_checkpoint(truncated), ConfigError);
}
