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

// Numerical checks of the augmentation guarantees and of the calculus
// identities the bounds rest on. Violations are report content, not errors.
//
// Slack is (allowed - observed) with the check's tolerance folded in, so a
// check passes iff its worst slack is >= 0. formula_scale multiplies the
// bound side of each check; values other than 1 are used to confirm that a
// check can fail.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lipaug/graph.hpp"
#include "lipaug/smoothnet.hpp"

namespace lipaug {

struct VerifyOptions {
  std::uint64_t seed = 0;
  double formula_scale = 1.0;
};

struct VerificationReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;
  // Compact JSON of the first violating trial; empty when none.
  std::string witness;
  // Informational reports never fail.
  bool informational = false;
  std::vector<std::pair<std::string, double>> details;

  bool passed() const { return informational || violations == 0; }
};

// z_tilde >= z on the dataset and on `trials` Gaussian perturbations (scale
// 0.1) of dataset points, and z_tilde == z on the dataset when thresholds are
// the dataset measurements with offset xi.
VerificationReport verify_upper_bound(const SmoothNet& net, const Examples& data,
                                      const AugmentationParams& params, double gamma,
                                      std::size_t trials, double xi,
                                      const VerifyOptions& options = {});

// Releases V_1, J_1, ..., V_q, J_q in order and probes the secant slope of
// the augmented output in each released node around the values realized at
// x. Bounds are the V' and J release-Lipschitz constants; J nodes use the
// operator norm. Violating pairs are shrunk 10x up to three times before
// counting.
VerificationReport verify_release_lipschitz(const SmoothNet& net, const DenseVector& x,
                                            std::size_t y, double gamma,
                                            const AugmentationParams& params,
                                            std::size_t probes,
                                            const VerifyOptions& options = {});

// Telescoping expansion of Q_{j'<-j}(x) - Q_{j'<-j}(x + nu) for every pair,
// entrywise to 1e-8.
VerificationReport verify_telescoping(const SmoothNet& net, const DenseVector& x,
                                      const DenseVector& nu, const VerifyOptions& options = {});

// ||F_j(x) - F_j(x + nu)|| <= (||Q_{j<-1}(x)||_op + (k/2) ||nu||) ||nu|| with
// k the largest sampled secant ratio of Q_{j<-1} along the segment, x 1.1.
// Relative tolerance 1e-12, so a linear layer along its top singular
// direction passes.
VerificationReport verify_finite_change(const SmoothNet& net, std::size_t layer,
                                        const DenseVector& x, const DenseVector& nu,
                                        const VerifyOptions& options = {});

// Central differences of every layer value w.r.t. the input against
// Q_{j<-1}(x), and of the output w.r.t. each layer's input against
// Q_{q<-j}(x). Relative Frobenius error <= 1e-5. Informational reports flag
// degraded agreement without failing.
VerificationReport verify_jacobian_fd(const SmoothNet& net, const DenseVector& x, double step,
                                      bool informational = false,
                                      const VerifyOptions& options = {});

// Cached right-to-left products against left-to-right re-association,
// relative Frobenius error <= 1e-9.
VerificationReport verify_chain_rule(const SmoothNet& net, const DenseVector& x,
                                     const VerifyOptions& options = {});

// u(u(a, b), c) == u(a, b c) to 1e-15 and u(a, b) >= a on random triples.
VerificationReport verify_stack_upper(std::size_t trials, const VerifyOptions& options = {});

// One JSON object per line: details, name, passed, trials, violations,
// witness_path, worst_slack.
std::string to_json_line(const VerificationReport& report, const std::string& witness_path);

}  // namespace lipaug
