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

// Umbrella header.

#pragma once

#include "beamdrl/agents.hpp"
#include "beamdrl/baselines.hpp"
#include "beamdrl/channel.hpp"
#include "beamdrl/codebook.hpp"
#include "beamdrl/config.hpp"
#include "beamdrl/dqn.hpp"
#include "beamdrl/env.hpp"
#include "beamdrl/errors.hpp"
#include "beamdrl/experiment.hpp"
#include "beamdrl/metrics.hpp"
#include "beamdrl/numerics.hpp"
#include "beamdrl/records.hpp"
#include "beamdrl/stats.hpp"
