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

// Dependency-free deep Q-network: ReLU multilayer perceptron, squared TD loss
// with analytic gradients, Adam, FIFO replay, target network, epsilon-greedy.

#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iomanip>
#include <ios>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "beamdrl/env.hpp"
#include "beamdrl/errors.hpp"
#include "beamdrl/numerics.hpp"

namespace beamdrl {

namespace detail {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// y += alpha * x
inline void axpy(double* y, double alpha, const double* x, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace detail

// Fully connected layer; weights are row-major (out x in).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;
  std::vector<double> b;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Activations of a batched forward pass, kept for backpropagation.
struct ForwardCache {
  std::size_t batch = 0;
  std::vector<std::vector<double>> acts;  // acts[0] input, acts[l + 1] output of layer l
  const std::vector<double>& output() const { return acts.back(); }
};

// Affine layers with ReLU between them and a linear output.
class Mlp {
 public:
  Mlp() = default;

  // All-zero parameters.
  explicit Mlp(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw ConfigError("Mlp: need at least input and output dimensions");
    for (std::size_t d : dims_) {
      if (d == 0) throw ConfigError("Mlp: layer widths must be positive");
    }
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      DenseLayer layer;
      layer.in = dims_[l];
      layer.out = dims_[l + 1];
      layer.w.assign(layer.in * layer.out, 0.0);
      layer.b.assign(layer.out, 0.0);
      layers_.push_back(std::move(layer));
    }
  }

  // Uniform Glorot weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Mlp glorot(std::vector<std::size_t> dims, RngStream& rng) {
    Mlp net(std::move(dims));
    for (auto& layer : net.layers_) {
      const double lim = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
      for (auto& w : layer.w) w = rng.uniform(-lim, lim);
    }
    return net;
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.w.size() + l.b.size();
    return n;
  }

  // Visits every parameter in a fixed order (per layer: weights, then biases).
  template <typename F>
  void for_each_parameter(F&& f) {
    for (auto& l : layers_) {
      for (auto& w : l.w) f(w);
      for (auto& b : l.b) f(b);
    }
  }
  template <typename F>
  void for_each_parameter(F&& f) const {
    for (const auto& l : layers_) {
      for (const auto& w : l.w) f(w);
      for (const auto& b : l.b) f(b);
    }
  }

  void forward_batch(std::span<const double> inputs, std::size_t batch, ForwardCache& cache) const {
    if (inputs.size() != batch * input_dim()) {
      throw ShapeError("Mlp: input has " + std::to_string(inputs.size()) + " values, expected " +
                       std::to_string(batch * input_dim()));
    }
    cache.batch = batch;
    cache.acts.resize(layers_.size() + 1);
    cache.acts[0].assign(inputs.begin(), inputs.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const DenseLayer& layer = layers_[l];
      const bool hidden = l + 1 < layers_.size();
      const std::vector<double>& x = cache.acts[l];
      std::vector<double>& y = cache.acts[l + 1];
      y.resize(batch * layer.out);
      for (std::size_t s = 0; s < batch; ++s) {
        const double* xs = x.data() + s * layer.in;
        double* ys = y.data() + s * layer.out;
        for (std::size_t o = 0; o < layer.out; ++o) {
          const double z = layer.b[o] + detail::dot(layer.w.data() + o * layer.in, xs, layer.in);
          ys[o] = hidden ? std::max(0.0, z) : z;
        }
      }
    }
  }

  std::vector<double> forward(std::span<const double> x) const {
    if (x.size() != input_dim()) {
      throw ShapeError("Mlp: state has length " + std::to_string(x.size()) + ", network expects " +
                       std::to_string(input_dim()));
    }
    ForwardCache cache;
    forward_batch(x, 1, cache);
    return cache.acts.back();
  }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

inline Mlp zeros_like(const Mlp& net) { return Mlp(net.dims()); }

inline std::vector<double> forward(const Mlp& net, std::span<const double> state) {
  return net.forward(state);
}

// Greedy action, ties broken toward the lowest index.
inline std::size_t argmax(std::span<const double> q) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

// Epsilon-greedy. Always draws the exploration coin, then an action index
// only when exploring.
inline std::size_t act(const Mlp& net, std::span<const double> state, double eps, RngStream& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("act: epsilon must lie in [0, 1]");
  const double omega = rng.uniform();
  if (omega < eps) return rng.index(net.output_dim());
  const std::vector<double> q = net.forward(state);
  return argmax(q);
}

using Batch = std::vector<const Experience*>;

namespace detail {

inline std::vector<double> stack_states(const Batch& batch, bool next, std::size_t dim) {
  std::vector<double> out;
  out.reserve(batch.size() * dim);
  for (const Experience* e : batch) {
    const auto& v = next ? e->s_next : e->s;
    if (v.size() != dim) throw ShapeError("stack_states: experience has wrong state length");
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace detail

// r' = r + gamma max_a' q(s', a'; target).
inline std::vector<double> td_targets(const Batch& batch, const Mlp& target_net, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("td_targets: gamma must lie in [0, 1]");
  std::vector<double> out(batch.size());
  if (batch.empty()) return out;
  if (gamma == 0.0) {
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = batch[i]->r;
    return out;
  }
  ForwardCache cache;
  target_net.forward_batch(detail::stack_states(batch, true, target_net.input_dim()), batch.size(),
                           cache);
  const std::size_t s = target_net.output_dim();
  const auto& q = cache.output();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double* row = q.data() + i * s;
    out[i] = batch[i]->r + gamma * *std::max_element(row, row + s);
  }
  return out;
}

struct LossAndGrads {
  double loss = 0.0;
  Mlp grads;
};

// L = 1/(2B) sum (r' - q(s, a))^2; only the taken action's output carries gradient.
inline LossAndGrads loss_and_grads(const Mlp& net, const Batch& batch,
                                   std::span<const double> targets) {
  const std::size_t bsz = batch.size();
  if (bsz == 0) throw DomainError("loss_and_grads: empty batch");
  if (targets.size() != bsz) throw ShapeError("loss_and_grads: one target per sample required");
  ForwardCache cache;
  net.forward_batch(detail::stack_states(batch, false, net.input_dim()), bsz, cache);

  LossAndGrads out{0.0, zeros_like(net)};
  const auto& layers = net.layers();
  const std::size_t nout = net.output_dim();
  std::vector<double> delta(bsz * nout, 0.0);
  const double inv_b = 1.0 / static_cast<double>(bsz);
  for (std::size_t i = 0; i < bsz; ++i) {
    const std::size_t a = batch[i]->a;
    if (a >= nout) throw IndexError("loss_and_grads: action outside network output");
    const double err = cache.output()[i * nout + a] - targets[i];
    out.loss += 0.5 * inv_b * err * err;
    delta[i * nout + a] = err * inv_b;
  }

  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    DenseLayer& g = out.grads.layers()[l];
    const std::vector<double>& x = cache.acts[l];
    std::vector<double> dx(l > 0 ? bsz * layer.in : 0, 0.0);
    for (std::size_t s = 0; s < bsz; ++s) {
      const double* xs = x.data() + s * layer.in;
      const double* ds = delta.data() + s * layer.out;
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = ds[o];
        if (d == 0.0) continue;
        g.b[o] += d;
        detail::axpy(g.w.data() + o * layer.in, d, xs, layer.in);
        if (l > 0) detail::axpy(dx.data() + s * layer.in, d, layer.w.data() + o * layer.in, layer.in);
      }
    }
    if (l > 0) {
      // ReLU derivative from the stored post-activation.
      for (std::size_t i = 0; i < dx.size(); ++i) {
        if (!(x[i] > 0.0)) dx[i] = 0.0;
      }
      delta = std::move(dx);
    }
  }
  return out;
}

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_num = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// Bias-corrected Adam update in place.
inline void adam_step(Mlp& net, const Mlp& grads, AdamState& st, double lr) {
  const std::size_t n = net.parameter_count();
  if (grads.dims() != net.dims()) throw ShapeError("adam_step: gradient shape mismatch");
  if (st.m.empty()) {
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
  }
  if (st.m.size() != n || st.v.size() != n) throw ShapeError("adam_step: moment shape mismatch");
  ++st.step;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  std::size_t i = 0;
  auto& layers = net.layers();
  const auto& glayers = grads.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto update = [&](std::vector<double>& p, const std::vector<double>& g) {
      for (std::size_t j = 0; j < p.size(); ++j, ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g[j];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g[j] * g[j];
        const double mhat = st.m[i] / c1;
        const double vhat = st.v[i] / c2;
        p[j] -= lr * mhat / (std::sqrt(vhat) + st.eps_num);
      }
    };
    update(layers[l].w, glayers[l].w);
    update(layers[l].b, glayers[l].b);
  }
}

// FIFO experience pool.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1000) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("ReplayBuffer: capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  const Experience& operator[](std::size_t i) const { return items_[i]; }

  void push(Experience e) {
    items_.push_back(std::move(e));
    if (items_.size() > capacity_) items_.pop_front();
  }

  // Uniform draw without replacement (partial Fisher-Yates).
  Batch sample(std::size_t n, RngStream& rng) const {
    if (n > items_.size()) {
      throw NotReadyError("ReplayBuffer: " + std::to_string(items_.size()) +
                          " experiences, batch needs " + std::to_string(n));
    }
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Batch out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + rng.index(idx.size() - i);
      std::swap(idx[i], idx[j]);
      out.push_back(&items_[idx[i]]);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<Experience> items_;
};

enum class LrSchedule {
  kInverseTime,  // alpha(t) = alpha(0) / (1 + d_c t)
  kRecurrence,   // alpha(t) = alpha(t - 1) / (1 + d_c t)
};

class Schedules {
 public:
  double eps0 = 0.7;
  double eps_min = 0.001;
  double eps_decay = 1e-4;
  double lr0 = 5e-3;
  double lr_decay = 1e-4;
  LrSchedule lr_mode = LrSchedule::kInverseTime;

  double epsilon(std::uint64_t t) const {
    return std::max(eps_min, eps0 * std::exp(-eps_decay * static_cast<double>(t)));
  }

  double learning_rate(std::uint64_t t) const {
    if (lr_mode == LrSchedule::kInverseTime) {
      return lr0 / (1.0 + lr_decay * static_cast<double>(t));
    }
    if (lr_cache_.empty() || lr_cache_.front() != lr0 || cached_decay_ != lr_decay) {
      lr_cache_.assign(1, lr0);
      cached_decay_ = lr_decay;
    }
    while (lr_cache_.size() <= t) {
      const double s = static_cast<double>(lr_cache_.size());
      lr_cache_.push_back(lr_cache_.back() / (1.0 + lr_decay * s));
    }
    return lr_cache_[t];
  }

  std::pair<double, double> values(std::uint64_t t) const { return {epsilon(t), learning_rate(t)}; }

 private:
  mutable std::vector<double> lr_cache_;
  mutable double cached_decay_ = 0.0;
};

inline std::pair<double, double> schedule_values(const Schedules& s, std::uint64_t t) {
  return s.values(t);
}

// Trained and target networks with their optimizer state.
struct QNetworkPair {
  Mlp trained;
  Mlp target;
  AdamState adam;
  std::uint64_t train_steps = 0;
  std::uint64_t sync_interval = 120;
  std::uint64_t syncs = 0;

  QNetworkPair() = default;
  QNetworkPair(Mlp net, std::uint64_t sync_every)
      : trained(std::move(net)), target(trained), sync_interval(sync_every) {
    if (sync_interval == 0) throw ConfigError("QNetworkPair: sync interval must be positive");
  }

  void sync_target() {
    target = trained;
    ++syncs;
  }

  // One minibatch step; the target copy is refreshed every sync_interval steps.
  double train(const Batch& batch, double gamma, double lr) {
    const std::vector<double> targets = td_targets(batch, target, gamma);
    LossAndGrads lg = loss_and_grads(trained, batch, targets);
    adam_step(trained, lg.grads, adam, lr);
    ++train_steps;
    if (train_steps % sync_interval == 0) sync_target();
    return lg.loss;
  }
};

inline void sync_target(QNetworkPair& pair) { pair.sync_target(); }

// Checkpoint text format, version 1:
//   beamdrl-mlp 1
//   dims <d0> <d1> ... <dL>
//   one hexadecimal float per line: per layer the (out x in) weights, then biases
inline void write_checkpoint(const Mlp& net, std::ostream& os) {
  os << "beamdrl-mlp 1\ndims";
  for (std::size_t d : net.dims()) os << ' ' << d;
  os << '\n' << std::hexfloat;
  net.for_each_parameter([&](double p) { os << p << '\n'; });
  os << std::defaultfloat;
  if (!os) throw Error("write_checkpoint: stream error");
}

inline Mlp read_checkpoint(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "beamdrl-mlp") {
    throw ConfigError("read_checkpoint: not a beamdrl network file");
  }
  if (version != 1) throw ConfigError("read_checkpoint: unsupported version " + std::to_string(version));
  std::string line;
  std::getline(is, line);
  if (!std::getline(is, line)) throw ConfigError("read_checkpoint: missing dims line");
  std::istringstream dl(line);
  std::string tag;
  dl >> tag;
  if (tag != "dims") throw ConfigError("read_checkpoint: expected dims line");
  std::vector<std::size_t> dims;
  for (std::size_t d; dl >> d;) dims.push_back(d);
  Mlp net(dims);
  std::size_t read = 0;
  net.for_each_parameter([&](double& p) {
    if (!std::getline(is, line)) throw ConfigError("read_checkpoint: truncated parameter list");
    errno = 0;
    char* end = nullptr;
    p = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || errno == ERANGE) {
      throw ConfigError("read_checkpoint: bad value '" + line + "'");
    }
    ++read;
  });
  return net;
}

inline void save_checkpoint(const Mlp& net, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("save_checkpoint: cannot open " + path);
  write_checkpoint(net, os);
}

inline Mlp load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("load_checkpoint: cannot open " + path);
  return read_checkpoint(is);
}

}  // namespace beamdrl
