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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lipaug/bounds.hpp"
#include "lipaug/errors.hpp"
#include "lipaug/verify.hpp"
#include "support/oracles.hpp"

using namespace lipaug;

namespace {

Examples self_labelled(const SmoothNet& net, Rng& rng, std::size_t n) {
  Examples data;
  for (std::size_t k = 0; k < n; ++k) {
    const DenseVector x = oracle::random_vector(rng, net.input_dim());
    const DenseVector z = net.forward(x);
    data.push_back({x, static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin())});
  }
  return data;
}

AugmentationParams halved(const DataMeasurements& m) {
  AugmentationParams p(m.num_layers());
  for (std::size_t i = 1; i < m.r; ++i) p.set_s(2 * i, 0.5 * m.t[i]);
  for (std::size_t to = 1; to <= m.num_layers(); ++to)
    for (std::size_t from = 1; from <= to; ++from) p.set_kappa(to, from, 0.5 * m.sigma(to, from));
  return p;
}

VerifyOptions mutated(double scale) {
  VerifyOptions o;
  o.formula_scale = scale;
  return o;
}

void check_failed_with_witness(const VerificationReport& r) {
  CHECK_FALSE(r.passed());
  CHECK(r.violations > 0);
  CHECK(r.worst_slack < 0.0);
  CHECK_FALSE(r.witness.empty());
}

void check_clean(const VerificationReport& r) {
  CHECK(r.passed());
  CHECK(r.violations == 0);
  CHECK(r.worst_slack >= 0.0);
  CHECK(r.witness.empty());
  CHECK(r.trials > 0);
}

}  // namespace

TEST_CASE("upper bound: measured and halved thresholds") {
  Rng rng(157);
  const SmoothNet net = oracle::random_net(rng, {3, 6, 6, 3}, Activation::kTanh, 1.5);
  const Examples data = self_labelled(net, rng, 64);
  const double xi = 1.0 / 9.0;
  const DataMeasurements m = measure(net, data, xi);
  const double gamma = 2.0 * m.gamma + 0.5;

  const VerificationReport exact =
      verify_upper_bound(net, data, params_from_measurements(m), gamma, 200, xi);
  check_clean(exact);
  CHECK(exact.details.at(0).first == "equality_max_gap");
  CHECK(exact.details.at(0).second <= 1e-12);

  check_clean(verify_upper_bound(net, data, halved(m), gamma, 200, xi));
  // Huge gamma: z = 1 everywhere.
  check_clean(verify_upper_bound(net, data, halved(m), 1e12, 50, xi));

  check_failed_with_witness(verify_upper_bound(net, data, params_from_measurements(m), gamma, 50, xi,
                                               mutated(1.01)));
}

TEST_CASE("release Lipschitz: healthy nets pass, a divided constant is caught") {
  Rng rng(163);
  for (int k = 0; k < 3; ++k) {
    const SmoothNet net = oracle::random_net(rng, {3, 4, 4, 3}, Activation::kTanh, 1.0 + rng.uniform());
    DenseVector x = oracle::random_vector(rng, 3);
    const DenseVector z = net.forward(x);
    const auto y = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    const double gamma = 2.0 * margin(z, y);
    const AugmentationParams p = params_from_trace(forward_trace(net, x), 1.0 / 9.0);
    VerifyOptions opts;
    opts.seed = 11 + k;
    const VerificationReport ok = verify_release_lipschitz(net, x, y, gamma, p, 300, opts);
    check_clean(ok);
    CHECK(ok.trials == 300 * 2 * net.num_layers());
    CHECK(ok.details.size() == 2 * net.num_layers());
    for (const auto& [name, ratio] : ok.details) CHECK(ratio <= 1.0 + 1e-6);
    opts.formula_scale = 0.01;
    check_failed_with_witness(verify_release_lipschitz(net, x, y, gamma, p, 300, opts));
  }
}

TEST_CASE("telescoping") {
  Rng rng(167);
  {
    const SmoothNet net = oracle::random_net(rng, {3, 4, 2});
    const DenseVector x = oracle::random_vector(rng, 3);
    DenseVector nu = oracle::random_vector(rng, 3);
    nu = (0.1 / nu.norm()) * nu;
    const VerificationReport r = verify_telescoping(net, x, nu);
    check_clean(r);
    CHECK(r.worst_slack >= 1e-8 - 1e-10);
  }
  const SmoothNet deep = oracle::random_net(rng, {3, 5, 5, 5, 3}, Activation::kSoftplus, 1.5);
  for (int k = 0; k < 100; ++k) {
    const DenseVector x = oracle::random_vector(rng, 3);
    const DenseVector nu = oracle::random_vector(rng, 3, 0.3);
    check_clean(verify_telescoping(deep, x, nu));
  }
  check_failed_with_witness(
      verify_telescoping(deep, oracle::random_vector(rng, 3), oracle::random_vector(rng, 3, 0.3), mutated(1.01)));
}

TEST_CASE("finite change") {
  Rng rng(173);
  const SmoothNet net = oracle::random_net(rng, {3, 5, 5, 2}, Activation::kTanh, 2.0);
  const DenseVector x = oracle::random_vector(rng, 3);
  const DenseVector zero = DenseVector::zeros(3);
  const VerificationReport still = verify_finite_change(net, 3, x, zero);
  check_clean(still);
  CHECK(still.worst_slack == 0.0);

  for (std::size_t layer = 1; layer <= net.num_layers(); ++layer)
    for (int k = 0; k < 10; ++k) check_clean(verify_finite_change(net, layer, x, oracle::random_vector(rng, 3, 0.05)));

  // Layer 1 is linear; along the top right singular vector the bound is tight.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(oracle::to_eigen(net.weights()[0]), Eigen::ComputeFullV);
  std::vector<double> top(3);
  for (int i = 0; i < 3; ++i) top[i] = 0.1 * svd.matrixV()(i, 0);
  const DenseVector nu(top);
  const VerificationReport tight = verify_finite_change(net, 1, x, nu);
  check_clean(tight);
  CHECK(tight.worst_slack <= 1e-11);
  check_failed_with_witness(verify_finite_change(net, 1, x, nu, mutated(0.99)));
  CHECK_THROWS_AS(verify_finite_change(net, 0, x, nu), UsageError);
}

TEST_CASE("jacobian finite differences") {
  const DenseMatrix eye = DenseMatrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  check_clean(verify_jacobian_fd(SmoothNet({eye, eye, eye}, Activation::kTanh), DenseVector::zeros(2), 1e-4));

  Rng rng(179);
  const SmoothNet net = oracle::random_net(rng, {3, 6, 6, 3}, Activation::kTanh, 2.0);
  const DenseVector x = oracle::random_vector(rng, 3);
  const VerificationReport fine = verify_jacobian_fd(net, x, 1e-4);
  check_clean(fine);
  const VerificationReport coarse = verify_jacobian_fd(net, x, 1e-1, /*informational=*/true);
  CHECK(coarse.passed());
  CHECK(coarse.informational);
  CHECK(coarse.violations > 0);
  CHECK(coarse.details.at(0).second > fine.details.at(0).second);
  check_failed_with_witness(verify_jacobian_fd(net, x, 1e-4, false, mutated(1.01)));
  CHECK_THROWS_AS(verify_jacobian_fd(net, x, 0.0), DomainError);
}

TEST_CASE("chain rule and stack_upper") {
  Rng rng(181);
  const SmoothNet net = oracle::random_net(rng, {4, 6, 6, 6, 3}, Activation::kSoftplus, 1.5);
  for (int k = 0; k < 20; ++k) check_clean(verify_chain_rule(net, oracle::random_vector(rng, 4)));
  check_failed_with_witness(verify_chain_rule(net, oracle::random_vector(rng, 4), mutated(1.01)));

  check_clean(verify_stack_upper(1000));
  check_failed_with_witness(verify_stack_upper(1000, mutated(1.01)));
}

TEST_CASE("reports are deterministic and serialize to one line") {
  Rng rng(191);
  const SmoothNet net = oracle::random_net(rng, {3, 4, 3});
  const DenseVector x = oracle::random_vector(rng, 3);
  const DenseVector z = net.forward(x);
  const auto y = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
  const AugmentationParams p = params_from_trace(forward_trace(net, x), 0.25);
  VerifyOptions opts;
  opts.seed = 5;
  opts.formula_scale = 0.01;
  const VerificationReport a = verify_release_lipschitz(net, x, y, 2.0 * margin(z, y), p, 50, opts);
  const VerificationReport b = verify_release_lipschitz(net, x, y, 2.0 * margin(z, y), p, 50, opts);
  const std::string line = to_json_line(a, "w.json");
  CHECK(line == to_json_line(b, "w.json"));
  CHECK(a.witness == b.witness);
  CHECK(std::count(line.begin(), line.end(), '\n') == 1);
  CHECK(line.back() == '\n');
  for (const char* key : {"\"name\"", "\"trials\"", "\"worst_slack\"", "\"witness_path\"", "\"passed\""})
    CHECK(line.find(key) != std::string::npos);
  CHECK(to_json_line(verify_stack_upper(10), "").find("\"witness_path\":null") != std::string::npos);
}
