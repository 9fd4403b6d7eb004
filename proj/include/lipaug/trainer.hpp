/* Copyright 2026 The lipaug Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Synthetic datasets and SGD training of SmoothNet classifiers on
// cross-entropy plus the gated margin-Jacobian penalty
//   lambda * sum_{i in S} 1(||J^(i)||_F^2 >= sigma) ||J^(i)||_F^2,
// J^(i) = d margin / d h_i. The gate is held constant within a step; the
// penalty gradient is an exact backward-over-backward pass.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipaug/smoothnet.hpp"

namespace lipaug {

struct DatasetSpec {
  std::string name = "two_moons";  // two_moons | circles | gaussian_blobs
  std::size_t n = 512;
  double noise = 0.15;
  std::uint64_t seed = 0;
  // Append a constant 1 to every point. The networks carry no biases, so
  // without it the logits are odd in x and e.g. circles cannot be fit.
  bool bias_feature = true;
};

struct SplitDataset {
  Examples train;
  Examples test;
  std::size_t num_classes = 2;
  std::size_t dim = 2;
};

// Deterministic in the spec. Points are 2-d (3-d with the bias feature).
// Shuffled with the spec seed and split 80/20
// (floor(0.8 n) training points). Throws UsageError on an unknown name or
// n < 2.
SplitDataset make_dataset(const DatasetSpec& spec);

struct TrainConfig {
  DatasetSpec dataset;
  std::size_t depth = 4;
  std::size_t width = 32;
  Activation activation = Activation::kTanh;
  double lambda = 0.0;
  double sigma_threshold = 0.1;
  // Hidden layers i in [1, r-1]; empty means all of them.
  std::vector<std::size_t> regularized_layers;
  std::size_t epochs = 100;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double lr_decay_factor = 0.2;
  std::vector<std::size_t> lr_decay_epochs{60};
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;

  // Throws UsageError when a field is out of range.
  void validate() const;
  // Regularized layers with the default applied.
  std::vector<std::size_t> penalty_layers() const;
  // Stable text form used for the model digest.
  std::string canonical() const;
};

// d margin(F(x), y) / d h_i for i in [0, r]; h_0 = x, h_r = logits. The
// runner-up class is fixed by the lowest-index tie rule.
DenseVector margin_jacobian(const SmoothNet& net, const DenseVector& x, std::size_t y,
                            std::size_t layer);

double reg_penalty(const SmoothNet& net, const DenseVector& x, std::size_t y,
                   const TrainConfig& config);

struct LossGradient {
  double cross_entropy = 0.0;
  double penalty = 0.0;
  double jac_frob_sq = 0.0;  // sum over penalty layers, ungated
  std::vector<DenseMatrix> grad;  // d(cross_entropy + penalty) / d W^(i)
};

// Per-example objective and exact gradient. Set include_cross_entropy to
// false for the penalty alone.
LossGradient loss_gradient(const SmoothNet& net, const DenseVector& x, std::size_t y,
                           const TrainConfig& config, bool include_cross_entropy = true);

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
SmoothNet init_net(std::size_t input_dim, std::size_t width, std::size_t depth,
                   std::size_t num_classes, Activation activation, std::uint64_t seed);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double jac_frob_sq = 0.0;
  double leading_term = 0.0;  // NaN when no training margin is positive
};

struct RunMetrics {
  std::vector<EpochMetrics> rows;
  // Header epoch,train_loss,train_acc,test_acc,jac_frob_sq,leading_term.
  std::string to_csv() const;
};

struct TrainResult {
  SmoothNet net;
  RunMetrics metrics;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(const std::string& what, std::shared_ptr<const SmoothNet> last)
      : std::runtime_error(what), last_(std::move(last)) {}
  // Network at the end of the last finished epoch.
  const std::shared_ptr<const SmoothNet>& last_checkpoint() const { return last_; }

 private:
  std::shared_ptr<const SmoothNet> last_;
};

double mean_jac_frob_sq(const SmoothNet& net, const Examples& data, const TrainConfig& config);
double accuracy(const SmoothNet& net, const Examples& data);

TrainResult train(const TrainConfig& config, const SplitDataset& data);
TrainResult train(const TrainConfig& config);

}  // namespace lipaug
