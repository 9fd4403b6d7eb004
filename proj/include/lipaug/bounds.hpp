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

// Data-dependent generalization bound for smooth feedforward nets: dataset
// measurements, the hidden-layer and Jacobian constants, covering-number
// combination, Dudley's entropy integral and the comparison quantities.
//
// Layer conventions follow smoothnet.hpp. Matrix layer i in [1, r] is layer
// 2i - 1, hidden layer h_i = F_{2i<-1}(x) for i in [1, r-1] and h_0 = x.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lipaug/graph.hpp"
#include "lipaug/linalg.hpp"
#include "lipaug/smoothnet.hpp"

namespace lipaug {

struct DataMeasurements {
  // Zero-filled tables for a depth-r net.
  explicit DataMeasurements(std::size_t depth);

  std::size_t depth() const { return r; }
  std::size_t num_layers() const { return 2 * r - 1; }
  // sigma_{to<-from}; reads 1 when to < from.
  double sigma(std::size_t to, std::size_t from) const;
  void set_sigma(std::size_t to, std::size_t from, double value);

  std::size_t r;
  std::vector<double> t;          // t^(i) = max ||h_i|| + xi, i in [0, r-1]
  std::vector<double> gamma_pre;  // gamma^(i) for matrix layer i, index i-1
  double gamma = 0.0;             // minimum margin
  double xi = 0.0;
  double sigma_bar = 0.0;         // Lipschitz constant of phi'
  std::size_t n = 0;

 private:
  std::vector<double> sigma_;  // (from - 1) * q + (to - 1)
};

// Exact maxima and minima over the dataset. A nonpositive margin is recorded
// as is; formulas that need gamma > 0 refuse later. Throws UsageError on an
// empty dataset and DomainError unless xi > 0.
DataMeasurements measure(const SmoothNet& net, const Examples& data, double xi);

// Thresholds s_{2i} = t^(i), kappa = sigma.
AugmentationParams params_from_measurements(const DataMeasurements& m);

// i in [1, r]. Throw MarginError when gamma <= 0 and DivisionError on a zero
// sigma in a denominator.
double kappa_hidden(std::size_t i, const DataMeasurements& m);
double kappa_jacobian(std::size_t i, const DataMeasurements& m);
// ReLU variant. Throws PreactivationMarginError when some gamma^(i') <= 0.
double kappa_hidden_relu(std::size_t i, const DataMeasurements& m);

enum class ReferenceKind { kZero, kSelf };

struct MatrixNormTerms {
  std::vector<double> a;  // ||W^T - A^T||_{2,1} + xi
  std::vector<double> b;  // ||W - B||_{1,1} + xi
};

// Explicit references (empty means zero matrices).
MatrixNormTerms matrix_norm_terms(const SmoothNet& net, double xi,
                                  const std::vector<DenseMatrix>& ref_a = {},
                                  const std::vector<DenseMatrix>& ref_b = {});
MatrixNormTerms matrix_norm_terms(const SmoothNet& net, double xi, ReferenceKind refs);

// One covering contribution: a rule with Lipschitz constant kappa whose
// parameter class has log-covering (c / eps)^2 at scale eps. log_factor is
// the dimension factor of the count and is informational.
struct CoveringTerm {
  double kappa = 0.0;
  double c = 0.0;
  double log_factor = 1.0;
};

class CoveringCombination {
 public:
  // Throws DomainError on negative or non-finite entries.
  explicit CoveringCombination(std::vector<CoveringTerm> terms);

  // (sum_k (kappa_k c_k)^(2/3))^(3/2)
  double beta_star() const { return beta_star_; }
  const std::vector<CoveringTerm>& terms() const { return terms_; }
  // eps_k = eps kappa_k^(-1/3) c_k^(2/3) / beta*^(2/3), so that
  // sum_k eps_k kappa_k = eps. Terms with kappa = 0 get +inf, terms with
  // c = 0 get 0.
  std::vector<double> allocation(double eps) const;
  // sum_k (c_k / eps_k)^2 for any allocation; 0/0 counts as 0.
  double exponent(const std::vector<double>& allocation) const;
  // Exponent of the optimal allocation, (beta* / eps)^2.
  double log_covering(double eps) const;
  // Same with each term weighted by its log_factor.
  double log_covering_with_factors(double eps) const;

 private:
  std::vector<CoveringTerm> terms_;
  double beta_star_ = 0.0;
};

// Lemma-style cover counts at scale eps for a d_out x d_in matrix class.
// V rules: 2 (a t / eps)^2 log(2 d_out d_in); J rules: (b / eps)^2 log(2 d_out d_in).
double value_cover_log_count(double a_times_t, double eps, std::size_t d_out, std::size_t d_in);
double jacobian_cover_log_count(double b, double eps, std::size_t d_out, std::size_t d_in);

// inf_alpha (alpha + int_alpha^cap sqrt(log_n(eps) / n) d eps) on a 256
// point log grid over [lo, cap] refined by golden section; the integral is
// adaptive Simpson in log eps and stops early where log_n reaches 0.
double dudley(const std::function<double(double)>& log_n, std::size_t n, double lo, double cap);
// log N(eps) = (beta_star / eps)^2, lo = beta_star / (n 1e6). 0 when
// beta_star = 0.
double dudley(double beta_star, std::size_t n, double cap);

struct LeadingTerms {
  // Per-example sum_i ||h_i|| ||Q_{2r-1<-2i+1}||_op / margin(x) for the
  // examples with positive margin, in dataset order.
  std::vector<std::size_t> index;
  std::vector<double> value;
  std::vector<std::size_t> excluded;  // nonpositive margins
  // sum_i max ||h_i|| max ||Q_{2r-1<-2i+1}||_op / (smallest positive margin)
  double aggregate = 0.0;
};

// Throws MarginError when no example has positive margin.
LeadingTerms leading_term(const SmoothNet& net, const Examples& data);

// prod_i ||W^(i)||_op / gamma. Throws MarginError unless gamma > 0.
double spectral_baseline(const SmoothNet& net, double gamma);

struct BoundConfig {
  std::optional<double> xi;  // default 1/r^2
  double delta = 0.01;
  ReferenceKind references = ReferenceKind::kZero;
  bool relu_variant = false;
  double loss_range = 1.0;  // upper limit of the entropy integral
};

struct BoundReport {
  std::vector<double> kappa_h;
  std::vector<double> kappa_j;
  std::vector<double> a;
  std::vector<double> b;
  double beta_star = 0.0;
  double raw_complexity = 0.0;  // beta* / sqrt(n)
  double rademacher = 0.0;      // Dudley value
  double generalization_gap = 0.0;
  double log_factor = 0.0;
  double leading_term = 0.0;
  double spectral_baseline = 0.0;
  double gamma = 0.0;
  std::size_t n = 0;
  double delta = 0.0;
  double xi = 0.0;
  bool relu_variant = false;
};

// measure -> matrix norm terms -> kappa_h, kappa_j -> beta* -> Dudley ->
// gap = rademacher + r sqrt(log(1/delta) / n). Throws MarginError when the
// dataset margin is not positive.
BoundReport generalization_bound(const SmoothNet& net, const Examples& data,
                                 const BoundConfig& config = {});
// Same from precomputed measurements.
BoundReport generalization_bound(const SmoothNet& net, const Examples& data,
                                 const DataMeasurements& m, const BoundConfig& config);

// Flat JSON object, keys sorted, trailing newline.
std::string to_json(const BoundReport& report);

}  // namespace lipaug
