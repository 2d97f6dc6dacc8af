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

// Trains per-stream agents on the small profile and compares them with the
// sample-and-hold and random baselines over the last 500 slots.

#include <iostream>

#include "beamdrl.hpp"

int main() {
  beamdrl::ExperimentConfig cfg = beamdrl::desk_profile();
  cfg.slots = 5000;
  cfg.policies = {"ddrl", "sah", "random"};
  const beamdrl::RunRecord rec = beamdrl::run_experiment(cfg);
  for (const auto& s : rec.summaries) {
    std::cout << s.policy << ": moving-average rate " << s.final_moving_average << " bit/s/Hz\n";
  }
}
