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

// Feedforward network F(x) = W_r phi(... phi(W_1 x)) with a smooth
// 1-Lipschitz activation. Matrix products and activations are separate
// layers: layer 0 is the input, odd layer 2i-1 applies W_i, even layer 2i
// applies phi. There are 2r-1 non-input layers.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lipaug/linalg.hpp"

namespace lipaug {

enum class Activation { kTanh, kSoftplus };

double activate(Activation act, double x);
double activate_deriv(Activation act, double x);
double activate_second_deriv(Activation act, double x);
// sup |phi''|: 4/(3 sqrt 3) for tanh, 1/4 for softplus.
double default_deriv_lipschitz(Activation act);
std::string activation_name(Activation act);
// Throws UsageError on unknown names.
Activation parse_activation(std::string_view name);

class SmoothNet {
 public:
  // Throws ShapeError unless cols(W_{i+1}) == rows(W_i) for all i and at
  // least one matrix is given.
  SmoothNet(std::vector<DenseMatrix> weights, Activation activation);
  SmoothNet(std::vector<DenseMatrix> weights, Activation activation,
            double activation_deriv_lipschitz);

  // Number of weight matrices r.
  std::size_t depth() const { return weights_.size(); }
  // Number of non-input layers, 2r - 1.
  std::size_t num_layers() const { return 2 * weights_.size() - 1; }
  std::size_t input_dim() const { return weights_.front().cols(); }
  std::size_t output_dim() const { return weights_.back().rows(); }
  // Dimension of layer j in [0, 2r-1].
  std::size_t layer_dim(std::size_t j) const;

  const std::vector<DenseMatrix>& weights() const { return weights_; }
  Activation activation() const { return activation_; }
  double activation_deriv_lipschitz() const { return deriv_lipschitz_; }

  // Logits only, without recording the trace.
  DenseVector forward(const DenseVector& x) const;

 private:
  std::vector<DenseMatrix> weights_;
  Activation activation_;
  double deriv_lipschitz_;
};

// Per-example record of every layer value F_{j<-1}(x) and every interlayer
// Jacobian Q_{j'<-j}(x).
class LayerTrace {
 public:
  std::size_t depth() const { return preactivation_min_.size(); }
  std::size_t num_layers() const { return values_.size() - 1; }

  // F_{j<-1}(x), j in [0, 2r-1]; j = 0 is the input.
  const DenseVector& value(std::size_t j) const;
  // Q_{j<-j}: W_i at odd layers, diag(phi'(preactivation)) at even layers.
  const DenseMatrix& local_jacobian(std::size_t j) const;
  // Q_{to<-from} for 1 <= from <= to + 1; from == to + 1 is the identity
  // (convention F_{j-1<-j} = id). Throws UsageError when composites were
  // not materialized or indices are out of range.
  const DenseMatrix& jacobian(std::size_t to, std::size_t from) const;
  bool has_composites() const { return !composite_.empty(); }
  // min_k |[F_{2i-1<-1}(x)]_k| for matrix layer i in [1, r].
  double preactivation_min(std::size_t i) const;
  const DenseVector& logits() const { return values_.back(); }

 private:
  friend LayerTrace forward_trace(const SmoothNet&, const DenseVector&, bool);
  std::size_t tri_index(std::size_t from, std::size_t to) const;

  std::vector<DenseVector> values_;
  std::vector<DenseMatrix> local_;       // index j - 1
  std::vector<DenseMatrix> composite_;   // upper-triangular (from <= to)
  std::vector<DenseMatrix> identities_;  // identity of layer dim j
  std::vector<double> preactivation_min_;
};

// Runs the network on x and materializes values, local Jacobians and (when
// with_composites) every composite Q_{j'<-j}, built right to left.
// Throws ShapeError on an input of the wrong dimension.
LayerTrace forward_trace(const SmoothNet& net, const DenseVector& x, bool with_composites = true);

// Q_{2r-1<-j}(x) for j in [1, 2r]; entry j-1 of the result. Entry 2r-1
// (j = 2r) is the identity. Cheaper than a full trace when only the
// Jacobians of the output are needed.
std::vector<DenseMatrix> output_jacobians(const SmoothNet& net, const DenseVector& x);

struct Example {
  DenseVector x;
  std::size_t y = 0;
};
using Examples = std::vector<Example>;

// Largest logit among classes other than y; ties go to the lowest index.
std::size_t runner_up(const DenseVector& logits, std::size_t y);
// [logits]_y - max_{j != y} [logits]_j. Throws UsageError for fewer than
// two classes or y out of range.
double margin(const DenseVector& logits, std::size_t y);
// Standard ramp: 1 for m <= 0, 1 - m/gamma on (0, gamma], 0 beyond.
double ramp_from_margin(double m, double gamma);
double ramp_loss(const DenseVector& logits, std::size_t y, double gamma);
// 1 iff margin <= 0 (ties count as errors).
int zero_one_loss(const DenseVector& logits, std::size_t y);

}  // namespace lipaug
