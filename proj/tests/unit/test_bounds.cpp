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
#include <limits>
#include <numeric>

#include <json.hpp>

#include "lipaug/bounds.hpp"
#include "lipaug/errors.hpp"
#include "lipaug/io.hpp"
#include "support/oracles.hpp"

using namespace lipaug;

namespace {

// Labels every point by the net's own argmax so all margins are positive.
Examples self_labelled(const SmoothNet& net, Rng& rng, std::size_t n) {
  Examples data;
  for (std::size_t k = 0; k < n; ++k) {
    const DenseVector x = oracle::random_vector(rng, net.input_dim());
    const DenseVector z = net.forward(x);
    const auto y = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    data.push_back({x, y});
  }
  return data;
}

// Uniform measurements: every sigma and t equal to `v`.
DataMeasurements uniform_meas(std::size_t r, double v, double gamma, double xi, double sbar) {
  DataMeasurements m(r);
  const std::size_t q = 2 * r - 1;
  for (std::size_t to = 1; to <= q; ++to)
    for (std::size_t from = 1; from <= to; ++from) m.set_sigma(to, from, v);
  std::fill(m.t.begin(), m.t.end(), v);
  std::fill(m.gamma_pre.begin(), m.gamma_pre.end(), v);
  m.gamma = gamma;
  m.xi = xi;
  m.sigma_bar = sbar;
  m.n = 1;
  return m;
}

oracle::Meas to_oracle(const DataMeasurements& m) {
  oracle::Meas o;
  o.r = m.r;
  o.sig = [&m](std::size_t to, std::size_t from) { return m.sigma(to, from); };
  o.t = m.t;
  o.gamma_pre = m.gamma_pre;
  o.gamma = m.gamma;
  o.xi = m.xi;
  o.sigma_bar = m.sigma_bar;
  return o;
}

DataMeasurements random_meas(Rng& rng, std::size_t r) {
  DataMeasurements m(r);
  const std::size_t q = 2 * r - 1;
  for (std::size_t to = 1; to <= q; ++to)
    for (std::size_t from = 1; from <= to; ++from) m.set_sigma(to, from, std::exp(rng.uniform(-1, 1)));
  for (auto& v : m.t) v = std::exp(rng.uniform(-1, 1));
  for (auto& v : m.gamma_pre) v = std::exp(rng.uniform(-2, 0));
  m.gamma = std::exp(rng.uniform(-1, 1));
  m.xi = rng.uniform(0.01, 0.5);
  m.sigma_bar = rng.uniform(0, 1);
  m.n = 10;
  return m;
}

}  // namespace

TEST_CASE("measure: single linear layer") {
  const DenseMatrix w = DenseMatrix::from_rows({{3.0, 0.0}, {0.0, -1.0}});
  const SmoothNet net({w}, Activation::kTanh);
  const Examples data{{DenseVector{3.0, 4.0}, 0}};
  const DataMeasurements m = measure(net, data, 0.25);
  CHECK(m.sigma(1, 1) == doctest::Approx(3.25).epsilon(1e-14));
  CHECK(m.t[0] == doctest::Approx(5.25).epsilon(1e-14));
  CHECK(m.gamma == doctest::Approx(13.0));
  CHECK(m.sigma(0, 1) == 1.0);
  CHECK(m.sigma(1, 2) == 1.0);
  CHECK(m.n == 1);
  CHECK_THROWS_AS(measure(net, {}, 0.25), UsageError);
  CHECK_THROWS_AS(measure(net, data, 0.0), DomainError);
}

TEST_CASE("measure: a tie gives zero margin and the formulas refuse") {
  const DenseMatrix w = DenseMatrix::from_rows({{1.0, 0.0}, {1.0, 0.0}});
  const SmoothNet net({w}, Activation::kTanh);
  const Examples data{{DenseVector{1.0, 2.0}, 0}};
  const DataMeasurements m = measure(net, data, 0.1);
  CHECK(m.gamma == 0.0);
  CHECK_THROWS_AS(kappa_hidden(1, m), MarginError);
  CHECK_THROWS_AS(generalization_bound(net, data), MarginError);
}

TEST_CASE("measure matches a brute-force loop and is permutation invariant") {
  Rng rng(107);
  const SmoothNet net = oracle::random_net(rng, {3, 5, 4, 4, 3}, Activation::kSoftplus, 1.5);
  Examples data;
  for (int k = 0; k < 50; ++k) data.push_back({oracle::random_vector(rng, 3), rng.index(3)});
  const double xi = 0.0625;
  const DataMeasurements m = measure(net, data, xi);
  const std::size_t r = net.depth(), q = net.num_layers();

  std::vector<double> t(r, 0.0), gpre(r, std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> sig(q + 1, std::vector<double>(q + 1, 0.0));
  double gamma = std::numeric_limits<double>::infinity();
  for (const Example& ex : data) {
    const auto vals = oracle::eigen_forward(net, ex.x);
    for (std::size_t i = 0; i < r; ++i) {
      t[i] = std::max(t[i], vals[2 * i].norm());
      gpre[i] = std::min(gpre[i], vals[2 * i + 1].cwiseAbs().minCoeff());
    }
    for (std::size_t to = 1; to <= q; ++to)
      for (std::size_t from = 1; from <= to; ++from)
        sig[to][from] = std::max(sig[to][from], oracle::op_norm(oracle::eigen_jacobian(net, ex.x, to, from)));
    const Eigen::VectorXd& z = vals[q];
    double other = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < z.size(); ++c)
      if (static_cast<std::size_t>(c) != ex.y) other = std::max(other, z(c));
    gamma = std::min(gamma, z(static_cast<Eigen::Index>(ex.y)) - other);
  }
  for (std::size_t i = 0; i < r; ++i) {
    CHECK(oracle::rel_err(m.t[i], t[i] + xi) <= 1e-12);
    CHECK(oracle::rel_err(m.gamma_pre[i], gpre[i]) <= 1e-12);
  }
  for (std::size_t to = 1; to <= q; ++to)
    for (std::size_t from = 1; from <= to; ++from)
      CHECK(oracle::rel_err(m.sigma(to, from), sig[to][from] + xi) <= 1e-9);
  CHECK(std::abs(m.gamma - gamma) <= 1e-12);
  CHECK(m.xi == xi);
  CHECK(m.n == 50);
  CHECK(m.sigma_bar == net.activation_deriv_lipschitz());

  Examples shuffled(data.rbegin(), data.rend());
  std::rotate(shuffled.begin(), shuffled.begin() + 17, shuffled.end());
  const DataMeasurements p = measure(net, shuffled, xi);
  CHECK(p.t == m.t);
  CHECK(p.gamma_pre == m.gamma_pre);
  CHECK(p.gamma == m.gamma);
  for (std::size_t to = 1; to <= q; ++to)
    for (std::size_t from = 1; from <= to; ++from) CHECK(p.sigma(to, from) == m.sigma(to, from));
}

TEST_CASE("params_from_measurements") {
  DataMeasurements m = uniform_meas(2, 2.0, 1.0, 0.1, 0.0);
  m.t = {3.0, 5.0};
  m.set_sigma(3, 1, 7.0);
  const AugmentationParams p = params_from_measurements(m);
  CHECK(p.s(2) == 5.0);
  CHECK(p.s(1) == std::numeric_limits<double>::infinity());
  CHECK(p.kappa(3, 1) == 7.0);
  CHECK(p.kappa(2, 2) == 2.0);
}

TEST_CASE("kappa_hidden: hand examples") {
  // r = 1 leaves xi + 1 / gamma.
  CHECK(kappa_hidden(1, uniform_meas(1, 2.0, 0.5, 0.125, 0.3)) == doctest::Approx(2.125));
  // r = 3, i = 1, everything 1, no smoothness term: 1 + (r - 1).
  CHECK(kappa_hidden(1, uniform_meas(3, 1.0, 1.0, 0.0 + 1e-300, 0.0)) == doctest::Approx(3.0));
  // r = 2, i = 1, the triple sum counts admissible (j, j', j'') triples.
  const DataMeasurements m = uniform_meas(2, 1.0, 1.0, 1e-300, 0.5);
  std::size_t count = 0;
  for (std::size_t j = 1; j <= 3; ++j)
    for (std::size_t jp = j; jp <= 3; ++jp)
      for (std::size_t jpp = std::max<std::size_t>(2, j); jpp <= jp; jpp += 1)
        if (jpp % 2 == 0) ++count;
  CHECK(count == 4);
  CHECK(kappa_hidden(1, m) == doctest::Approx(2.0 + 0.5 * count));
  CHECK(kappa_hidden(1, m) == doctest::Approx(oracle::kappa_hidden(1, to_oracle(m))));
  CHECK_THROWS_AS(kappa_hidden(0, m), UsageError);
  CHECK_THROWS_AS(kappa_hidden(3, m), UsageError);
}

TEST_CASE("kappa_jacobian: hand examples") {
  DataMeasurements one = uniform_meas(1, 1.0, 1.0, 0.1, 0.0);
  one.set_sigma(1, 1, 2.5);
  CHECK(kappa_jacobian(1, one) == doctest::Approx(4.0 / 2.5));
  CHECK(kappa_jacobian(1, uniform_meas(2, 1.0, 1.0, 0.1, 0.0)) == doctest::Approx(12.0));
  DataMeasurements zero = uniform_meas(2, 1.0, 1.0, 0.1, 0.0);
  zero.set_sigma(3, 1, 0.0);
  CHECK_THROWS_AS(kappa_jacobian(1, zero), DivisionError);
}

TEST_CASE("kappa_hidden_relu: hand examples and errors") {
  CHECK(kappa_hidden_relu(1, uniform_meas(2, 1.0, 1.0, 1e-300, 0.0)) == doctest::Approx(3.0));
  CHECK(kappa_hidden_relu(1, uniform_meas(1, 4.0, 2.0, 0.25, 0.0)) == doctest::Approx(0.75));
  // Large pre-activation margins: the smooth formula without the triple sum.
  DataMeasurements big = uniform_meas(3, 1.5, 0.7, 0.1, 0.0);
  for (auto& g : big.gamma_pre) g = 1e300;
  CHECK(kappa_hidden_relu(1, big) == doctest::Approx(kappa_hidden(1, big)).epsilon(1e-14));
  DataMeasurements bad = uniform_meas(3, 1.0, 1.0, 0.1, 0.0);
  bad.gamma_pre[1] = 0.0;
  CHECK_THROWS_AS(kappa_hidden_relu(1, bad), PreactivationMarginError);
  try {
    (void)kappa_hidden_relu(1, bad);
  } catch (const PreactivationMarginError& e) {
    CHECK(e.layer() == 2);
  }
}

TEST_CASE("kappa formulas match the summation oracles") {
  Rng rng(109);
  for (int k = 0; k < 300; ++k) {
    const std::size_t r = 1 + rng.index(6);
    const DataMeasurements m = random_meas(rng, r);
    const oracle::Meas o = to_oracle(m);
    for (std::size_t i = 1; i <= r; ++i) {
      CHECK(oracle::rel_err(kappa_hidden(i, m), oracle::kappa_hidden(i, o)) <= 1e-12);
      CHECK(oracle::rel_err(kappa_jacobian(i, m), oracle::kappa_jacobian(i, o)) <= 1e-12);
      CHECK(oracle::rel_err(kappa_hidden_relu(i, m), oracle::kappa_hidden_relu(i, o)) <= 1e-12);
    }
  }
  // Scaling every sigma by 2.
  DataMeasurements m = random_meas(rng, 3);
  for (std::size_t to = 1; to <= 5; ++to)
    for (std::size_t from = 1; from <= to; ++from) m.set_sigma(to, from, 2.0 * m.sigma(to, from));
  for (std::size_t i = 1; i <= 3; ++i)
    CHECK(oracle::rel_err(kappa_jacobian(i, m), oracle::kappa_jacobian(i, to_oracle(m))) <= 1e-12);
}

TEST_CASE("kappa_hidden: t only divides, sigma_bar only multiplies") {
  Rng rng(113);
  for (int k = 0; k < 50; ++k) {
    DataMeasurements m = random_meas(rng, 4);
    const double base = kappa_hidden(1, m);
    DataMeasurements more_t = m;
    more_t.t[2] *= 2.0;
    CHECK(kappa_hidden(1, more_t) < base);
    DataMeasurements more_bar = m;
    more_bar.sigma_bar += 0.5;
    CHECK(kappa_hidden(1, more_bar) > base);
    // sigma_{q<-2} appears in the margin term with coefficient 1 / gamma.
    DataMeasurements more_s = m;
    more_s.sigma_bar = 0.0;
    m.sigma_bar = 0.0;
    more_s.set_sigma(7, 2, m.sigma(7, 2) + 1.0);
    CHECK(kappa_hidden(1, more_s) - kappa_hidden(1, m) == doctest::Approx(1.0 / m.gamma));
  }
}

TEST_CASE("covering combination: beta star") {
  CHECK(CoveringCombination({{2.0, 3.0, 1.0}}).beta_star() == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(CoveringCombination({{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}}).beta_star() ==
        doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-14));
  CHECK(CoveringCombination({{0.0, 1.0, 1.0}, {3.0, 0.0, 1.0}}).beta_star() == 0.0);
  CHECK(CoveringCombination({{0.0, 1.0, 1.0}}).log_covering(0.1) == 0.0);
  CHECK_THROWS_AS(CoveringCombination({{-1.0, 1.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(CoveringCombination({{1.0, std::nan(""), 1.0}}), DomainError);

  Rng rng(127);
  for (int k = 0; k < 100; ++k) {
    std::vector<CoveringTerm> terms, scaled;
    std::vector<double> kap, c;
    const double lambda = std::exp(rng.uniform(-2, 2));
    for (std::size_t i = 0; i < 1 + rng.index(6); ++i) {
      const CoveringTerm t{std::exp(rng.uniform(-2, 2)), std::exp(rng.uniform(-2, 2)), 1.0};
      terms.push_back(t);
      scaled.push_back({t.kappa * lambda, t.c, 1.0});
      kap.push_back(t.kappa);
      c.push_back(t.c);
    }
    const CoveringCombination base(terms);
    CHECK(oracle::rel_err(base.beta_star(), oracle::beta_star(kap, c)) <= 1e-13);
    CHECK(oracle::rel_err(CoveringCombination(scaled).beta_star(), lambda * base.beta_star()) <= 1e-13);
  }
}

TEST_CASE("covering combination: the allocation is exact and optimal") {
  Rng rng(131);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CoveringTerm> terms;
    for (int i = 0; i < 3; ++i)
      terms.push_back({std::exp(rng.uniform(-1, 1)), std::exp(rng.uniform(-1, 1)), 1.0});
    const CoveringCombination cover(terms);
    const double eps = rng.uniform(0.01, 1.0);
    const auto alloc = cover.allocation(eps);
    double used = 0.0;
    for (int i = 0; i < 3; ++i) used += alloc[i] * terms[i].kappa;
    CHECK(used == doctest::Approx(eps).epsilon(1e-13));
    const double best = cover.exponent(alloc);
    CHECK(oracle::rel_err(best, cover.log_covering(eps)) <= 1e-12);
    CHECK(oracle::rel_err(best, std::pow(cover.beta_star() / eps, 2)) <= 1e-12);
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> w(3);
      for (auto& v : w) v = rng.uniform(1e-3, 1.0);
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      std::vector<double> other(3);
      for (int i = 0; i < 3; ++i) other[i] = eps * w[i] / total / terms[i].kappa;
      CHECK(cover.exponent(other) >= best * (1 - 1e-12));
    }
  }
  const CoveringCombination degenerate({{0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, {1.0, 1.0, 1.0}});
  const auto a = degenerate.allocation(0.5);
  CHECK(a[0] == std::numeric_limits<double>::infinity());
  CHECK(a[1] == 0.0);
  CHECK(a[2] == doctest::Approx(0.5));
}

TEST_CASE("cover counts") {
  CHECK(value_cover_log_count(2.0, 0.5, 3, 4) == doctest::Approx(2.0 * 16.0 * std::log(24.0)));
  CHECK(jacobian_cover_log_count(1.0, 0.25, 2, 2) == doctest::Approx(16.0 * std::log(8.0)));
}

TEST_CASE("dudley") {
  CHECK(dudley(0.0, 10, 1.0) == 0.0);
  CHECK(dudley(1.0, 1, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  Rng rng(137);
  for (int k = 0; k < 50; ++k) {
    const double beta = std::exp(rng.uniform(-3, 3));
    const std::size_t n = 1 + rng.index(5000);
    const double got = dudley(beta, n, 1.0);
    CHECK(oracle::rel_err(got, oracle::dudley_closed_form(beta, static_cast<double>(n), 1.0)) <= 1e-6);
    CHECK(got >= 0.0);
  }
  for (double beta : {0.3, 2.0, 40.0}) {
    const double a = dudley(beta, 16, 1.0), b = dudley(beta, 64, 1.0), c = dudley(beta, 256, 1.0);
    CHECK(b <= a);
    CHECK(c <= b);
  }
  CHECK_THROWS_AS(dudley(1.0, 0, 1.0), DomainError);
  CHECK_THROWS_AS(dudley(-1.0, 5, 1.0), DomainError);
}

TEST_CASE("leading term") {
  const DenseMatrix w = DenseMatrix::from_rows({{2.0, 0.0}, {0.0, 1.0}});
  const SmoothNet lin({w}, Activation::kTanh);
  const Examples one{{DenseVector{3.0, 4.0}, 0}};
  const LeadingTerms lt = leading_term(lin, one);
  CHECK(lt.value.size() == 1);
  CHECK(lt.value[0] == doctest::Approx(5.0 * 2.0 / 2.0));
  CHECK(lt.aggregate == doctest::Approx(5.0));

  Rng rng(139);
  const SmoothNet net = oracle::random_net(rng, {3, 6, 5, 3}, Activation::kTanh, 1.3);
  Examples data;
  for (int k = 0; k < 32; ++k) data.push_back({oracle::random_vector(rng, 3), rng.index(3)});
  const LeadingTerms got = leading_term(net, data);
  const std::size_t r = net.depth(), q = net.num_layers();
  std::vector<double> max_h(r, 0.0), max_j(r, 0.0);
  double min_m = std::numeric_limits<double>::infinity();
  std::vector<double> per;
  std::vector<std::size_t> excluded;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto vals = oracle::eigen_forward(net, data[k].x);
    double sum = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      const double h = vals[2 * i].norm();
      const double j = oracle::op_norm(oracle::eigen_jacobian(net, data[k].x, q, 2 * i + 1));
      max_h[i] = std::max(max_h[i], h);
      max_j[i] = std::max(max_j[i], j);
      sum += h * j;
    }
    const double m = margin(net.forward(data[k].x), data[k].y);
    if (m > 0) {
      per.push_back(sum / m);
      min_m = std::min(min_m, m);
    } else {
      excluded.push_back(k);
    }
  }
  CHECK(!excluded.empty());
  CHECK(got.excluded == excluded);
  REQUIRE(got.value.size() == per.size());
  for (std::size_t k = 0; k < per.size(); ++k) CHECK(oracle::rel_err(got.value[k], per[k]) <= 1e-10);
  double agg = 0.0;
  for (std::size_t i = 0; i < r; ++i) agg += max_h[i] * max_j[i];
  CHECK(oracle::rel_err(got.aggregate, agg / min_m) <= 1e-10);

  Examples twice = data;
  twice.insert(twice.end(), data.begin(), data.end());
  CHECK(leading_term(net, twice).aggregate == got.aggregate);

  Examples hopeless;
  for (std::size_t k : excluded) hopeless.push_back(data[k]);
  CHECK_THROWS_AS(leading_term(net, hopeless), MarginError);
}

TEST_CASE("spectral baseline") {
  const DenseMatrix eye = DenseMatrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  const DenseMatrix two = DenseMatrix::from_rows({{2.0, 0.0}, {0.0, 2.0}});
  CHECK(spectral_baseline(SmoothNet({eye, eye}, Activation::kTanh), 1.0) == doctest::Approx(1.0));
  CHECK(spectral_baseline(SmoothNet({two, two, two}, Activation::kTanh), 0.5) == doctest::Approx(16.0));
  CHECK_THROWS_AS(spectral_baseline(SmoothNet({eye}, Activation::kTanh), 0.0), MarginError);

  Rng rng(149);
  for (int k = 0; k < 20; ++k) {
    const SmoothNet net = oracle::random_net(rng, {3, 5, 5, 5, 3}, k % 2 ? Activation::kTanh : Activation::kSoftplus,
                                             0.5 + rng.uniform() * 2);
    Examples data;
    for (int p = 0; p < 16; ++p) data.push_back({oracle::random_vector(rng, 3), 0});
    const DataMeasurements m = measure(net, data, 0.01);
    double product = 1.0;
    for (const DenseMatrix& w : net.weights()) product *= oracle::op_norm(w);
    CHECK(m.sigma(net.num_layers(), 1) - m.xi <= product * (1 + 1e-9));
  }
}

TEST_CASE("matrix norm terms") {
  const DenseMatrix w = DenseMatrix::from_rows({{3.0, -4.0}, {0.0, 1.0}});
  const SmoothNet net({w}, Activation::kTanh);
  const MatrixNormTerms zero = matrix_norm_terms(net, 0.5, ReferenceKind::kZero);
  // ||W^T||_{2,1} sums the row norms of W, 5 and 1.
  CHECK(zero.a[0] == doctest::Approx(6.5));
  CHECK(zero.b[0] == doctest::Approx(8.5));
  const MatrixNormTerms self = matrix_norm_terms(net, 0.5, ReferenceKind::kSelf);
  CHECK(self.a[0] == 0.5);
  CHECK(self.b[0] == 0.5);
  CHECK_THROWS_AS(matrix_norm_terms(net, 0.5, {w, w}, {}), ShapeError);
}

TEST_CASE("generalization bound pipeline") {
  Rng rng(151);
  const SmoothNet net = oracle::random_net(rng, {3, 6, 6, 3}, Activation::kTanh, 1.5);
  const Examples data = self_labelled(net, rng, 64);
  const BoundReport zero = generalization_bound(net, data);
  CHECK(zero.xi == doctest::Approx(1.0 / 9.0));
  CHECK(zero.n == 64);
  CHECK(zero.kappa_h.size() == 3);
  CHECK(zero.generalization_gap ==
        doctest::Approx(zero.rademacher + 3.0 * std::sqrt(std::log(100.0) / 64.0)).epsilon(1e-14));
  CHECK(zero.raw_complexity == doctest::Approx(zero.beta_star / 8.0).epsilon(1e-14));
  for (double v : {zero.beta_star, zero.rademacher, zero.leading_term, zero.spectral_baseline})
    CHECK((std::isfinite(v) && v >= 0.0));

  BoundConfig self_cfg;
  self_cfg.references = ReferenceKind::kSelf;
  const BoundReport self = generalization_bound(net, data, self_cfg);
  for (double a : self.a) CHECK(a == self.xi);
  CHECK(self.beta_star < zero.beta_star);

  // Halving n on the same measurements scales the explicit 1/sqrt(n) part.
  DataMeasurements m = measure(net, data, 1.0 / 9.0);
  const BoundReport full = generalization_bound(net, data, m, {});
  m.n /= 2;
  const BoundReport half = generalization_bound(net, data, m, {});
  CHECK(half.beta_star == full.beta_star);
  CHECK(half.raw_complexity / full.raw_complexity == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  BoundConfig relu;
  relu.relu_variant = true;
  const BoundReport rv = generalization_bound(net, data, relu);
  CHECK(rv.relu_variant);
  CHECK(rv.kappa_j == zero.kappa_j);

  BoundConfig bad;
  bad.delta = 1.0;
  CHECK_THROWS_AS(generalization_bound(net, data, bad), DomainError);

  const std::string json = to_json(zero);
  for (const char* key : {"\"kappa_h\"", "\"kappa_j\"", "\"beta_star\"", "\"rademacher\"",
                          "\"generalization_gap\"", "\"leading_term\"", "\"spectral_baseline\"",
                          "\"n\"", "\"delta\"", "\"xi\""})
    CHECK(json.find(key) != std::string::npos);
  CHECK(json == to_json(generalization_bound(net, data)));
}

TEST_CASE("golden report from the numpy rerun") {
  const std::string dir = LIPAUG_TEST_DATA_DIR;
  const ModelFile model = load_model(dir + "/golden_model.json");
  const Examples data = dataset_from_csv(read_file(dir + "/golden_data.csv"));
  const auto want = nlohmann::json::parse(read_file(dir + "/golden_report.json"));
  const BoundReport got = generalization_bound(model.net, data);

  const auto close = [](double g, double w, double tol) { return oracle::rel_err(g, w) <= tol; };
  const auto vec_close = [&](const std::vector<double>& g, const nlohmann::json& w) {
    if (g.size() != w.size()) return false;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (!close(g[k], w[k].get<double>(), 1e-9)) return false;
    return true;
  };
  CHECK(got.n == want["n"].get<std::size_t>());
  CHECK(close(got.xi, want["xi"], 1e-15));
  CHECK(close(got.gamma, want["gamma"], 1e-9));
  CHECK(vec_close(got.kappa_h, want["kappa_h"]));
  CHECK(vec_close(got.kappa_j, want["kappa_j"]));
  CHECK(vec_close(got.a, want["a"]));
  CHECK(vec_close(got.b, want["b"]));
  CHECK(close(got.beta_star, want["beta_star"], 1e-9));
  CHECK(close(got.raw_complexity, want["raw_complexity"], 1e-9));
  CHECK(close(got.log_factor, want["log_factor"], 1e-12));
  CHECK(close(got.leading_term, want["leading_term"], 1e-9));
  CHECK(close(got.spectral_baseline, want["spectral_baseline"], 1e-9));
  CHECK(close(got.rademacher, want["rademacher"], 1e-6));
  CHECK(close(got.generalization_gap, want["generalization_gap"], 1e-6));

  BoundConfig wide;
  wide.loss_range = want["wide_cap"].get<double>();
  CHECK(close(generalization_bound(model.net, data, wide).rademacher, want["rademacher_wide_cap"], 1e-6));
}
