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

#include "lipaug/smoothnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipaug/errors.hpp"

namespace lipaug {

double activate(Activation act, double x) {
  switch (act) {
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kSoftplus:
      // log(1 + e^x) without overflow.
      return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return 0.0;
}

double activate_deriv(Activation act, double x) {
  switch (act) {
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::kSoftplus:
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return 0.0;
}

double activate_second_deriv(Activation act, double x) {
  switch (act) {
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return -2.0 * t * (1.0 - t * t);
    }
    case Activation::kSoftplus: {
      const double s = activate_deriv(act, x);
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

double default_deriv_lipschitz(Activation act) {
  switch (act) {
    case Activation::kTanh:
      return 4.0 / (3.0 * std::sqrt(3.0));
    case Activation::kSoftplus:
      return 0.25;
  }
  return 0.0;
}

std::string activation_name(Activation act) {
  return act == Activation::kTanh ? "tanh" : "softplus";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "softplus") return Activation::kSoftplus;
  throw UsageError("unknown activation '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

SmoothNet::SmoothNet(std::vector<DenseMatrix> weights, Activation activation)
    : SmoothNet(std::move(weights), activation, default_deriv_lipschitz(activation)) {}

SmoothNet::SmoothNet(std::vector<DenseMatrix> weights, Activation activation,
                     double activation_deriv_lipschitz)
    : weights_(std::move(weights)),
      activation_(activation),
      deriv_lipschitz_(activation_deriv_lipschitz) {
  if (weights_.empty()) throw ShapeError("SmoothNet: at least one weight matrix required");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i].rows() == 0 || weights_[i].cols() == 0) {
      throw ShapeError("SmoothNet: empty weight matrix");
    }
    if (i > 0 && weights_[i].cols() != weights_[i - 1].rows()) {
      std::ostringstream msg;
      msg << "SmoothNet: W" << i + 1 << " has " << weights_[i].cols() << " columns but W" << i
          << " has " << weights_[i - 1].rows() << " rows";
      throw ShapeError(msg.str());
    }
  }
  if (!(deriv_lipschitz_ >= 0.0) || !std::isfinite(deriv_lipschitz_)) {
    throw DomainError("SmoothNet: activation derivative Lipschitz constant must be finite and >= 0");
  }
}

std::size_t SmoothNet::layer_dim(std::size_t j) const {
  if (j > num_layers()) throw UsageError("SmoothNet::layer_dim: layer out of range");
  if (j == 0) return input_dim();
  return weights_[(j - 1) / 2].rows();
}

DenseVector SmoothNet::forward(const DenseVector& x) const {
  if (x.size() != input_dim()) throw ShapeError("SmoothNet::forward: input dimension mismatch");
  DenseVector h = x;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    h = weights_[i] * h;
    if (i + 1 < weights_.size()) {
      std::vector<double> a(h.size());
      for (std::size_t k = 0; k < h.size(); ++k) a[k] = activate(activation_, h[k]);
      h = DenseVector(std::move(a));
    }
  }
  return h;
}

// ---------------------------------------------------------------------------

const DenseVector& LayerTrace::value(std::size_t j) const {
  if (j >= values_.size()) throw UsageError("LayerTrace::value: layer out of range");
  return values_[j];
}

const DenseMatrix& LayerTrace::local_jacobian(std::size_t j) const {
  if (j == 0 || j > local_.size()) throw UsageError("LayerTrace::local_jacobian: layer out of range");
  return local_[j - 1];
}

std::size_t LayerTrace::tri_index(std::size_t from, std::size_t to) const {
  const std::size_t q = num_layers();
  return (from - 1) * q + (to - 1);
}

const DenseMatrix& LayerTrace::jacobian(std::size_t to, std::size_t from) const {
  const std::size_t q = num_layers();
  if (from == 0 || from > q + 1 || to > q || to + 1 < from) {
    std::ostringstream msg;
    msg << "LayerTrace::jacobian: invalid pair (" << to << " <- " << from << ")";
    throw UsageError(msg.str());
  }
  if (to + 1 == from) return identities_[to];
  if (composite_.empty()) throw UsageError("LayerTrace::jacobian: composites not materialized");
  return composite_[tri_index(from, to)];
}

double LayerTrace::preactivation_min(std::size_t i) const {
  if (i == 0 || i > preactivation_min_.size()) {
    throw UsageError("LayerTrace::preactivation_min: matrix layer out of range");
  }
  return preactivation_min_[i - 1];
}

LayerTrace forward_trace(const SmoothNet& net, const DenseVector& x, bool with_composites) {
  if (x.size() != net.input_dim()) throw ShapeError("forward_trace: input dimension mismatch");
  const std::size_t r = net.depth();
  const std::size_t q = net.num_layers();
  const Activation act = net.activation();

  LayerTrace trace;
  trace.values_.reserve(q + 1);
  trace.local_.reserve(q);
  trace.values_.push_back(x);
  std::vector<DenseVector> diag_derivs(q + 1);

  for (std::size_t i = 1; i <= r; ++i) {
    const DenseMatrix& w = net.weights()[i - 1];
    DenseVector pre = w * trace.values_.back();
    double pre_min = std::numeric_limits<double>::infinity();
    for (double v : pre) pre_min = std::min(pre_min, std::abs(v));
    trace.preactivation_min_.push_back(pre_min);
    trace.local_.push_back(w);
    if (i < r) {
      std::vector<double> post(pre.size()), deriv(pre.size());
      for (std::size_t k = 0; k < pre.size(); ++k) {
        post[k] = activate(act, pre[k]);
        deriv[k] = activate_deriv(act, pre[k]);
      }
      trace.values_.push_back(std::move(pre));
      DenseVector d(std::move(deriv));
      trace.local_.push_back(DenseMatrix::diagonal(d));
      diag_derivs[2 * i] = std::move(d);
      trace.values_.push_back(DenseVector(std::move(post)));
    } else {
      trace.values_.push_back(std::move(pre));
    }
  }

  trace.identities_.reserve(q + 1);
  for (std::size_t j = 0; j <= q; ++j) {
    trace.identities_.push_back(DenseMatrix::identity(trace.values_[j].size()));
  }

  if (with_composites) {
    trace.composite_.resize(q * q);
    for (std::size_t from = 1; from <= q; ++from) {
      DenseMatrix product = trace.local_[from - 1];
      trace.composite_[trace.tri_index(from, from)] = product;
      for (std::size_t to = from + 1; to <= q; ++to) {
        product = (to % 2 == 0) ? scale_rows(diag_derivs[to], product)
                                : trace.local_[to - 1] * product;
        trace.composite_[trace.tri_index(from, to)] = product;
      }
    }
  }
  return trace;
}

std::vector<DenseMatrix> output_jacobians(const SmoothNet& net, const DenseVector& x) {
  const LayerTrace trace = forward_trace(net, x, /*with_composites=*/false);
  const std::size_t q = net.num_layers();
  std::vector<DenseMatrix> out(q + 1);
  out[q] = DenseMatrix::identity(net.output_dim());
  for (std::size_t j = q; j >= 1; --j) {
    // Q_{q<-j} = Q_{q<-j+1} Q_{j<-j}
    out[j - 1] = out[j] * trace.local_jacobian(j);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t runner_up(const DenseVector& logits, std::size_t y) {
  if (logits.size() < 2) throw UsageError("margin: at least two classes required");
  if (y >= logits.size()) throw UsageError("margin: label out of range");
  std::size_t best = y == 0 ? 1 : 0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (j == y) continue;
    if (logits[j] > logits[best]) best = j;
  }
  return best;
}

double margin(const DenseVector& logits, std::size_t y) {
  const std::size_t other = runner_up(logits, y);
  return logits[y] - logits[other];
}

double ramp_from_margin(double m, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("ramp_loss: gamma must be positive");
  if (m <= 0.0) return 1.0;
  if (m >= gamma) return 0.0;
  return 1.0 - m / gamma;
}

double ramp_loss(const DenseVector& logits, std::size_t y, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("ramp_loss: gamma must be positive");
  return ramp_from_margin(margin(logits, y), gamma);
}

int zero_one_loss(const DenseVector& logits, std::size_t y) {
  return margin(logits, y) <= 0.0 ? 1 : 0;
}

}  // namespace lipaug
