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

// Per-slot run records and their CSV form. Numbers are written in the
// shortest form that reads back to the same double, independent of locale.

#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "beamdrl/config.hpp"
#include "beamdrl/errors.hpp"
#include "beamdrl/stats.hpp"

namespace beamdrl {

struct RunRow {
  std::int64_t slot = 0;
  std::string policy;
  std::uint64_t seed = 0;
  bool ok = true;  // false when the policy could not form beams in this slot
  double average_rate = 0.0;
  std::vector<double> user_rate;
  std::vector<double> reward;   // per stream
  std::vector<double> penalty;  // per stream
  double epsilon = 0.0;
  double lr = 0.0;
  double one_pass_rate = 0.0;  // greedy only: average rate after the first sweep

  friend bool operator==(const RunRow&, const RunRow&) = default;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline double csv_real(const std::string& s, std::size_t line) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return x;
}

template <typename T>
T csv_int(const std::string& s, std::size_t line) {
  T x{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error("csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return x;
}

}  // namespace detail

inline std::string csv_header(std::size_t users, std::size_t streams_total) {
  std::string h = "slot,policy,seed,ok,average_rate";
  for (std::size_t k = 0; k < users; ++k) h += ",rate_u" + std::to_string(k);
  for (std::size_t s = 0; s < streams_total; ++s) h += ",reward_s" + std::to_string(s);
  for (std::size_t s = 0; s < streams_total; ++s) h += ",penalty_s" + std::to_string(s);
  h += ",epsilon,lr,one_pass_rate";
  return h;
}

inline void write_csv(std::span<const RunRow> rows, std::size_t users, std::size_t streams_total,
                      std::ostream& os) {
  os << csv_header(users, streams_total) << '\n';
  for (const RunRow& r : rows) {
    if (r.user_rate.size() != users || r.reward.size() != streams_total ||
        r.penalty.size() != streams_total) {
      throw ShapeError("write_csv: row width does not match header");
    }
    os << r.slot << ',' << r.policy << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ','
       << detail::format_real(r.average_rate);
    for (double v : r.user_rate) os << ',' << detail::format_real(v);
    for (double v : r.reward) os << ',' << detail::format_real(v);
    for (double v : r.penalty) os << ',' << detail::format_real(v);
    os << ',' << detail::format_real(r.epsilon) << ',' << detail::format_real(r.lr) << ','
       << detail::format_real(r.one_pass_rate) << '\n';
  }
  if (!os) throw Error("write_csv: stream error");
}

inline void emit_csv(std::span<const RunRow> rows, std::size_t users, std::size_t streams_total,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("emit_csv: cannot open " + path);
  write_csv(rows, users, streams_total, os);
}

inline std::vector<RunRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("read_csv: missing header");
  const auto head = detail::split_csv_line(line);
  std::size_t users = 0, streams = 0;
  for (const auto& h : head) {
    if (h.rfind("rate_u", 0) == 0) ++users;
    if (h.rfind("reward_s", 0) == 0) ++streams;
  }
  if (detail::split_csv_line(csv_header(users, streams)) != head) {
    throw Error("read_csv: unrecognized header");
  }
  std::vector<RunRow> rows;
  for (std::size_t ln = 2; std::getline(is, line); ++ln) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != head.size()) throw Error("read_csv: line " + std::to_string(ln) + " has wrong width");
    RunRow r;
    std::size_t i = 0;
    r.slot = detail::csv_int<std::int64_t>(f[i++], ln);
    r.policy = f[i++];
    r.seed = detail::csv_int<std::uint64_t>(f[i++], ln);
    r.ok = detail::csv_int<int>(f[i++], ln) != 0;
    r.average_rate = detail::csv_real(f[i++], ln);
    for (std::size_t k = 0; k < users; ++k) r.user_rate.push_back(detail::csv_real(f[i++], ln));
    for (std::size_t s = 0; s < streams; ++s) r.reward.push_back(detail::csv_real(f[i++], ln));
    for (std::size_t s = 0; s < streams; ++s) r.penalty.push_back(detail::csv_real(f[i++], ln));
    r.epsilon = detail::csv_real(f[i++], ln);
    r.lr = detail::csv_real(f[i++], ln);
    r.one_pass_rate = detail::csv_real(f[i++], ln);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<RunRow> load_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_csv: cannot open " + path);
  return read_csv(is);
}

struct PolicySummary {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t slots = 0;
  std::size_t ok_slots = 0;
  double final_moving_average = 0.0;
  DistributionStats rates;  // over ok slots

  friend bool operator==(const PolicySummary& a, const PolicySummary& b) {
    return a.policy == b.policy && a.seed == b.seed && a.slots == b.slots && a.ok_slots == b.ok_slots &&
           a.final_moving_average == b.final_moving_average && a.rates.mean == b.rates.mean &&
           a.rates.min == b.rates.min && a.rates.q1 == b.rates.q1 && a.rates.median == b.rates.median &&
           a.rates.q3 == b.rates.q3 && a.rates.max == b.rates.max;
  }
};

// Average-rate series of one (policy, seed), ok slots only.
inline std::vector<double> rate_series(std::span<const RunRow> rows, const std::string& policy,
                                       std::uint64_t seed) {
  std::vector<double> out;
  for (const RunRow& r : rows) {
    if (r.policy == policy && r.seed == seed && r.ok) out.push_back(r.average_rate);
  }
  return out;
}

// One summary per (policy, seed) in order of first appearance.
inline std::vector<PolicySummary> summarize(std::span<const RunRow> rows, std::size_t window) {
  std::vector<std::pair<std::string, std::uint64_t>> order;
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> slots;
  for (const RunRow& r : rows) {
    const auto key = std::make_pair(r.policy, r.seed);
    if (slots[key]++ == 0) order.push_back(key);
  }
  std::vector<PolicySummary> out;
  for (const auto& [policy, seed] : order) {
    PolicySummary s;
    s.policy = policy;
    s.seed = seed;
    s.slots = slots[{policy, seed}];
    const std::vector<double> x = rate_series(rows, policy, seed);
    s.ok_slots = x.size();
    if (!x.empty()) {
      s.final_moving_average = moving_average(x, window).back();
      s.rates = distribution_stats(x);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_summary_csv(std::span<const PolicySummary> sums, std::ostream& os) {
  os << "policy,seed,slots,ok_slots,final_moving_average,mean,min,q1,median,q3,max\n";
  for (const auto& s : sums) {
    os << s.policy << ',' << s.seed << ',' << s.slots << ',' << s.ok_slots << ','
       << detail::format_real(s.final_moving_average) << ',' << detail::format_real(s.rates.mean) << ','
       << detail::format_real(s.rates.min) << ',' << detail::format_real(s.rates.q1) << ','
       << detail::format_real(s.rates.median) << ',' << detail::format_real(s.rates.q3) << ','
       << detail::format_real(s.rates.max) << '\n';
  }
  if (!os) throw Error("write_summary_csv: stream error");
}

}  // namespace beamdrl
