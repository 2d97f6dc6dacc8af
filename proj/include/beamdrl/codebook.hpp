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

// Constant-modulus beamsteering codebooks and the joint (precoder, combiner)
// action space.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>

#include "beamdrl/errors.hpp"
#include "beamdrl/numerics.hpp"

namespace beamdrl {

class Codebook {
 public:
  Codebook() = default;
  Codebook(CMatrix mat, std::size_t num_phases) : mat_(std::move(mat)), num_phases_(num_phases) {}

  const CMatrix& matrix() const { return mat_; }
  std::size_t antennas() const { return mat_.rows(); }
  std::size_t size() const { return mat_.cols(); }
  std::size_t num_phases() const { return num_phases_; }

  CMatrix codeword(std::size_t q) const {
    if (q >= size()) throw IndexError("Codebook: codeword " + std::to_string(q) + " out of range");
    return mat_.col(q);
  }

 private:
  CMatrix mat_;
  std::size_t num_phases_ = 0;
};

// Entry (p, q) = exp(j (2 pi / T) floor(p * mod(q + S/2, S) / (S / T))) / sqrt(antennas).
//
// Row p is the antenna index; without it in the phase every row would be equal.
inline Codebook build_codebook(std::size_t antennas, std::size_t num_codewords,
                               std::size_t num_phases) {
  if (antennas == 0) throw ConfigError("build_codebook: need at least one antenna");
  if (num_codewords == 0) throw ConfigError("build_codebook: need at least one codeword");
  if (num_phases < 2) throw ConfigError("build_codebook: need at least two phase values");
  const double s = static_cast<double>(num_codewords);
  const double t = static_cast<double>(num_phases);
  const double step = s / t;
  if (!(step > 0.0)) throw ConfigError("build_codebook: S/T must be positive");
  const double amp = 1.0 / std::sqrt(static_cast<double>(antennas));
  CMatrix mat(antennas, num_codewords);
  for (std::size_t p = 0; p < antennas; ++p) {
    for (std::size_t q = 0; q < num_codewords; ++q) {
      const double shifted = std::fmod(static_cast<double>(q) + s / 2.0, s);
      const double level = std::floor(static_cast<double>(p) * shifted / step);
      mat(p, q) = std::polar(amp, 2.0 * std::numbers::pi / t * level);
    }
  }
  return Codebook(std::move(mat), num_phases);
}

// Joint action index a <-> (tx, rx) = (a / s_r, a % s_r).
struct ActionSpace {
  std::size_t s_t = 1;
  std::size_t s_r = 1;

  std::size_t size() const { return s_t * s_r; }

  std::pair<std::size_t, std::size_t> split(std::size_t a) const {
    if (a >= size()) {
      throw IndexError("ActionSpace: action " + std::to_string(a) + " outside [0, " +
                       std::to_string(size()) + ")");
    }
    return {a / s_r, a % s_r};
  }

  std::size_t join(std::size_t tx, std::size_t rx) const {
    if (tx >= s_t || rx >= s_r) throw IndexError("ActionSpace: codeword index out of range");
    return tx * s_r + rx;
  }
};

inline std::pair<std::size_t, std::size_t> split_action(std::size_t a, const ActionSpace& space) {
  return space.split(a);
}

inline std::size_t join_action(std::size_t tx, std::size_t rx, const ActionSpace& space) {
  return space.join(tx, rx);
}

}  // namespace beamdrl
