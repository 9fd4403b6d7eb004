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

#include "lipaug/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lipaug/errors.hpp"

namespace lipaug {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_margin(const DataMeasurements& m) {
  if (!(m.gamma > 0.0)) {
    std::ostringstream msg;
    msg << "dataset margin is " << m.gamma << "; the bound needs every example classified "
        << "with positive margin";
    throw MarginError(msg.str());
  }
}

void require_hidden_index(std::size_t i, const DataMeasurements& m, const char* what) {
  if (i == 0 || i > m.r) throw UsageError(std::string(what) + ": layer out of range");
}

double ratio(double num, double den) {
  if (den == 0.0) throw DivisionError("zero sigma in a denominator");
  return num / den;
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = 1e-12 * std::max(1.0, std::abs(whole));
  return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

// ---------------------------------------------------------------------------
// Measurements

DataMeasurements::DataMeasurements(std::size_t depth)
    : r(depth), t(depth, 0.0), gamma_pre(depth, 0.0) {
  if (depth == 0) throw UsageError("DataMeasurements: depth must be positive");
  const std::size_t q = 2 * depth - 1;
  sigma_.assign(q * q, 0.0);
}

double DataMeasurements::sigma(std::size_t to, std::size_t from) const {
  const std::size_t q = num_layers();
  if (from == 0 || from > q + 1 || to > q) throw UsageError("DataMeasurements::sigma: out of range");
  if (to < from) return 1.0;
  return sigma_[(from - 1) * q + (to - 1)];
}

void DataMeasurements::set_sigma(std::size_t to, std::size_t from, double value) {
  const std::size_t q = num_layers();
  if (from == 0 || from > to || to > q) {
    throw UsageError("DataMeasurements::set_sigma: need 1 <= from <= to <= q");
  }
  sigma_[(from - 1) * q + (to - 1)] = value;
}

DataMeasurements measure(const SmoothNet& net, const Examples& data, double xi) {
  if (data.empty()) throw UsageError("measure: empty dataset");
  if (!(xi > 0.0)) throw DomainError("measure: xi must be positive");
  const std::size_t r = net.depth();
  const std::size_t q = net.num_layers();
  DataMeasurements m(r);
  m.xi = xi;
  m.n = data.size();
  m.sigma_bar = net.activation_deriv_lipschitz();
  m.gamma = kInf;
  std::vector<double> max_norm(r, 0.0);
  std::vector<double> max_op(q * q, 0.0);
  std::fill(m.gamma_pre.begin(), m.gamma_pre.end(), kInf);

  for (const Example& ex : data) {
    const LayerTrace trace = forward_trace(net, ex.x);
    for (std::size_t i = 0; i < r; ++i) max_norm[i] = std::max(max_norm[i], trace.value(2 * i).norm());
    for (std::size_t from = 1; from <= q; ++from)
      for (std::size_t to = from; to <= q; ++to) {
        double& slot = max_op[(from - 1) * q + (to - 1)];
        slot = std::max(slot, spectral_norm(trace.jacobian(to, from)));
      }
    for (std::size_t i = 1; i <= r; ++i) {
      m.gamma_pre[i - 1] = std::min(m.gamma_pre[i - 1], trace.preactivation_min(i));
    }
    m.gamma = std::min(m.gamma, margin(trace.logits(), ex.y));
  }
  for (std::size_t i = 0; i < r; ++i) m.t[i] = max_norm[i] + xi;
  for (std::size_t from = 1; from <= q; ++from)
    for (std::size_t to = from; to <= q; ++to)
      m.set_sigma(to, from, max_op[(from - 1) * q + (to - 1)] + xi);
  return m;
}

AugmentationParams params_from_measurements(const DataMeasurements& m) {
  const std::size_t q = m.num_layers();
  AugmentationParams params(q);
  for (std::size_t i = 1; i < m.r; ++i) params.set_s(2 * i, m.t[i]);
  for (std::size_t from = 1; from <= q; ++from)
    for (std::size_t to = from; to <= q; ++to) params.set_kappa(to, from, m.sigma(to, from));
  return params;
}

// ---------------------------------------------------------------------------
// Closed-form constants

double kappa_hidden(std::size_t i, const DataMeasurements& m) {
  require_hidden_index(i, m, "kappa_hidden");
  require_positive_margin(m);
  const std::size_t r = m.r;
  const std::size_t q = m.num_layers();
  double value = m.xi + m.sigma(q, 2 * i) / m.gamma;
  for (std::size_t ip = i; ip < r; ++ip) value += ratio(m.sigma(2 * ip, 2 * i), m.t[ip]);
  if (m.sigma_bar != 0.0) {
    double cross = 0.0;
    for (std::size_t j = 1; j <= q; ++j) {
      for (std::size_t jp = j; jp <= q; ++jp) {
        std::size_t jpp = std::max(2 * i, j);
        if (jpp % 2 == 1) ++jpp;
        for (; jpp <= jp; jpp += 2) {
          cross += ratio(m.sigma(jp, jpp + 1) * m.sigma(jpp - 1, 2 * i) * m.sigma(jpp - 1, j),
                         m.sigma(jp, j));
        }
      }
    }
    value += m.sigma_bar * cross;
  }
  return value;
}

double kappa_jacobian(std::size_t i, const DataMeasurements& m) {
  require_hidden_index(i, m, "kappa_jacobian");
  const std::size_t q = m.num_layers();
  double value = 0.0;
  for (std::size_t j = 1; j <= 2 * i - 1; ++j)
    for (std::size_t jp = 2 * i - 1; jp <= q; ++jp)
      value += 4.0 * ratio(m.sigma(jp, 2 * i) * m.sigma(2 * i - 2, j), m.sigma(jp, j));
  return value;
}

double kappa_hidden_relu(std::size_t i, const DataMeasurements& m) {
  require_hidden_index(i, m, "kappa_hidden_relu");
  require_positive_margin(m);
  const std::size_t r = m.r;
  for (std::size_t ip = i; ip < r; ++ip) {
    if (!(m.gamma_pre[ip - 1] > 0.0)) {
      std::ostringstream msg;
      msg << "pre-activation margin gamma^(" << ip << ") is " << m.gamma_pre[ip - 1]
          << "; the ReLU variant needs it positive";
      throw PreactivationMarginError(msg.str(), static_cast<int>(ip));
    }
  }
  double value = m.xi + m.sigma(2 * r - 1, 2 * i) / m.gamma;
  for (std::size_t ip = i; ip < r; ++ip) {
    value += ratio(m.sigma(2 * ip, 2 * i), m.t[ip]);
    value += m.sigma(2 * ip - 1, 2 * i) / m.gamma_pre[ip - 1];
  }
  return value;
}

MatrixNormTerms matrix_norm_terms(const SmoothNet& net, double xi,
                                  const std::vector<DenseMatrix>& ref_a,
                                  const std::vector<DenseMatrix>& ref_b) {
  const std::size_t r = net.depth();
  if ((!ref_a.empty() && ref_a.size() != r) || (!ref_b.empty() && ref_b.size() != r)) {
    throw ShapeError("matrix_norm_terms: one reference matrix per layer required");
  }
  MatrixNormTerms out;
  for (std::size_t i = 0; i < r; ++i) {
    const DenseMatrix& w = net.weights()[i];
    const DenseMatrix da = ref_a.empty() ? w : w - ref_a[i];
    const DenseMatrix db = ref_b.empty() ? w : w - ref_b[i];
    out.a.push_back(norm_pq(da.transpose(), 2.0, 1.0) + xi);
    out.b.push_back(norm_pq(db, 1.0, 1.0) + xi);
  }
  return out;
}

MatrixNormTerms matrix_norm_terms(const SmoothNet& net, double xi, ReferenceKind refs) {
  if (refs == ReferenceKind::kZero) return matrix_norm_terms(net, xi);
  return matrix_norm_terms(net, xi, net.weights(), net.weights());
}

// ---------------------------------------------------------------------------
// Covering numbers

CoveringCombination::CoveringCombination(std::vector<CoveringTerm> terms)
    : terms_(std::move(terms)) {
  double sum = 0.0;
  for (const CoveringTerm& t : terms_) {
    if (!(t.kappa >= 0.0) || !(t.c >= 0.0) || !std::isfinite(t.kappa) || !std::isfinite(t.c)) {
      throw DomainError("CoveringCombination: terms must be finite and nonnegative");
    }
    sum += std::cbrt(t.kappa * t.c * t.kappa * t.c);
  }
  beta_star_ = std::pow(sum, 1.5);
}

std::vector<double> CoveringCombination::allocation(double eps) const {
  if (!(eps > 0.0)) throw DomainError("CoveringCombination::allocation: eps must be positive");
  std::vector<double> out;
  out.reserve(terms_.size());
  const double scale = beta_star_ > 0.0 ? std::cbrt(beta_star_ * beta_star_) : 0.0;
  for (const CoveringTerm& t : terms_) {
    if (t.kappa == 0.0) {
      out.push_back(kInf);
    } else if (t.c == 0.0) {
      out.push_back(0.0);
    } else {
      out.push_back(eps * std::cbrt(t.c * t.c / t.kappa) / scale);
    }
  }
  return out;
}

double CoveringCombination::exponent(const std::vector<double>& allocation) const {
  if (allocation.size() != terms_.size()) {
    throw ShapeError("CoveringCombination::exponent: one scale per term required");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (terms_[k].c == 0.0) continue;
    const double ratio_k = terms_[k].c / allocation[k];
    sum += ratio_k * ratio_k;
  }
  return sum;
}

double CoveringCombination::log_covering(double eps) const {
  if (!(eps > 0.0)) throw DomainError("CoveringCombination::log_covering: eps must be positive");
  const double ratio_b = beta_star_ / eps;
  return ratio_b * ratio_b;
}

double CoveringCombination::log_covering_with_factors(double eps) const {
  const auto alloc = allocation(eps);
  double sum = 0.0;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (terms_[k].c == 0.0) continue;
    const double ratio_k = terms_[k].c / alloc[k];
    sum += ratio_k * ratio_k * terms_[k].log_factor;
  }
  return sum;
}

double value_cover_log_count(double a_times_t, double eps, std::size_t d_out, std::size_t d_in) {
  if (!(eps > 0.0)) throw DomainError("value_cover_log_count: eps must be positive");
  const double ratio_v = a_times_t / eps;
  return 2.0 * ratio_v * ratio_v * std::log(2.0 * static_cast<double>(d_out * d_in));
}

double jacobian_cover_log_count(double b, double eps, std::size_t d_out, std::size_t d_in) {
  if (!(eps > 0.0)) throw DomainError("jacobian_cover_log_count: eps must be positive");
  const double ratio_j = b / eps;
  return ratio_j * ratio_j * std::log(2.0 * static_cast<double>(d_out * d_in));
}

// ---------------------------------------------------------------------------
// Dudley

double dudley(const std::function<double(double)>& log_n, std::size_t n, double lo, double cap) {
  if (n == 0) throw DomainError("dudley: n must be positive");
  if (!(cap > 0.0)) throw DomainError("dudley: cap must be positive");
  const double dn = static_cast<double>(n);
  lo = std::min(lo, cap);
  if (!(lo > 0.0)) throw DomainError("dudley: lower grid end must be positive");

  // Upper limit of integration: cap, or the scale where log N reaches 0.
  double upper = cap;
  if (log_n(cap) <= 0.0) {
    double a = std::log(lo), b = std::log(cap);
    if (log_n(lo) <= 0.0) return lo;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (log_n(std::exp(mid)) > 0.0) a = mid; else b = mid;
    }
    upper = std::exp(b);
  }

  auto integrand = [&](double u) {
    const double eps = std::exp(u);
    return std::sqrt(std::max(0.0, log_n(eps)) / dn) * eps;
  };
  auto objective = [&](double log_alpha) {
    const double alpha = std::exp(log_alpha);
    if (alpha >= upper) return alpha;
    return alpha + integrate(integrand, log_alpha, std::log(upper));
  };

  constexpr int kGrid = 256;
  const double a0 = std::log(lo), a1 = std::log(cap);
  std::vector<double> grid(kGrid), values(kGrid);
  std::size_t best = 0;
  for (int k = 0; k < kGrid; ++k) {
    grid[k] = kGrid == 1 ? a1 : a0 + (a1 - a0) * k / (kGrid - 1);
    values[k] = objective(grid[k]);
    if (values[k] < values[best]) best = k;
  }
  double left = grid[best == 0 ? 0 : best - 1];
  double right = grid[std::min<std::size_t>(best + 1, kGrid - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = right - inv_phi * (right - left), x2 = left + inv_phi * (right - left);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 100 && right - left > 1e-14; ++it) {
    if (f1 < f2) {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - inv_phi * (right - left);
      f1 = objective(x1);
    } else {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + inv_phi * (right - left);
      f2 = objective(x2);
    }
  }
  return std::min({values[best], f1, f2});
}

double dudley(double beta_star, std::size_t n, double cap) {
  if (!(beta_star >= 0.0)) throw DomainError("dudley: beta_star must be nonnegative");
  if (beta_star == 0.0) return 0.0;
  if (n == 0) throw DomainError("dudley: n must be positive");
  const double lo = beta_star / (static_cast<double>(n) * 1e6);
  return dudley([beta_star](double eps) { return (beta_star / eps) * (beta_star / eps); }, n, lo,
                cap);
}

// ---------------------------------------------------------------------------
// Comparison quantities

LeadingTerms leading_term(const SmoothNet& net, const Examples& data) {
  if (data.empty()) throw UsageError("leading_term: empty dataset");
  const std::size_t r = net.depth();
  LeadingTerms out;
  std::vector<double> max_h(r, 0.0), max_j(r, 0.0);
  double min_margin = kInf;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const LayerTrace trace = forward_trace(net, data[k].x, /*with_composites=*/false);
    const auto jac = output_jacobians(net, data[k].x);
    double sum = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      const double h = trace.value(2 * i).norm();
      const double j = spectral_norm(jac[2 * i]);  // Q_{2r-1<-2i+1}
      max_h[i] = std::max(max_h[i], h);
      max_j[i] = std::max(max_j[i], j);
      sum += h * j;
    }
    const double m = margin(trace.logits(), data[k].y);
    if (m > 0.0) {
      out.index.push_back(k);
      out.value.push_back(sum / m);
      min_margin = std::min(min_margin, m);
    } else {
      out.excluded.push_back(k);
    }
  }
  if (out.index.empty()) throw MarginError("leading_term: no example has positive margin");
  double agg = 0.0;
  for (std::size_t i = 0; i < r; ++i) agg += max_h[i] * max_j[i];
  out.aggregate = agg / min_margin;
  return out;
}

double spectral_baseline(const SmoothNet& net, double gamma) {
  if (!(gamma > 0.0)) throw MarginError("spectral_baseline: gamma must be positive");
  double product = 1.0;
  for (const DenseMatrix& w : net.weights()) product *= spectral_norm(w);
  return product / gamma;
}

// ---------------------------------------------------------------------------
// Full pipeline

BoundReport generalization_bound(const SmoothNet& net, const Examples& data,
                                 const BoundConfig& config) {
  const double r = static_cast<double>(net.depth());
  const double xi = config.xi.value_or(1.0 / (r * r));
  return generalization_bound(net, data, measure(net, data, xi), config);
}

BoundReport generalization_bound(const SmoothNet& net, const Examples& data,
                                 const DataMeasurements& m, const BoundConfig& config) {
  require_positive_margin(m);
  if (!(config.delta > 0.0 && config.delta < 1.0)) {
    throw DomainError("generalization_bound: delta must lie in (0, 1)");
  }
  const std::size_t r = net.depth();
  BoundReport report;
  report.n = m.n;
  report.delta = config.delta;
  report.xi = m.xi;
  report.gamma = m.gamma;
  report.relu_variant = config.relu_variant;

  const MatrixNormTerms norms = matrix_norm_terms(net, m.xi, config.references);
  report.a = norms.a;
  report.b = norms.b;

  std::vector<CoveringTerm> terms;
  std::size_t d_max = net.input_dim();
  double magnitude = 1.0;
  for (std::size_t i = 1; i <= r; ++i) {
    const double kh = config.relu_variant ? kappa_hidden_relu(i, m) : kappa_hidden(i, m);
    const double kj = kappa_jacobian(i, m);
    report.kappa_h.push_back(kh);
    report.kappa_j.push_back(kj);
    const DenseMatrix& w = net.weights()[i - 1];
    const double dims = std::log(2.0 * static_cast<double>(w.rows() * w.cols()));
    terms.push_back({kh, norms.a[i - 1] * m.t[i - 1], 2.0 * dims});
    terms.push_back({kj, norms.b[i - 1], dims});
    d_max = std::max(d_max, w.rows());
    magnitude = std::max({magnitude, m.t[i - 1], m.sigma(2 * i - 1, 1)});
  }
  const CoveringCombination cover(std::move(terms));
  const double n = static_cast<double>(m.n);
  report.beta_star = cover.beta_star();
  report.raw_complexity = report.beta_star / std::sqrt(n);
  report.rademacher = dudley(report.beta_star, m.n, config.loss_range);
  report.generalization_gap =
      report.rademacher + r * std::sqrt(std::log(1.0 / config.delta) / n);
  report.log_factor = std::log(static_cast<double>(d_max * d_max) * static_cast<double>(r) * magnitude);
  report.leading_term = leading_term(net, data).aggregate;
  report.spectral_baseline = spectral_baseline(net, m.gamma);
  return report;
}

std::string to_json(const BoundReport& report) {
  nlohmann::json j;
  j["kappa_h"] = report.kappa_h;
  j["kappa_j"] = report.kappa_j;
  j["a"] = report.a;
  j["b"] = report.b;
  j["beta_star"] = report.beta_star;
  j["raw_complexity"] = report.raw_complexity;
  j["rademacher"] = report.rademacher;
  j["generalization_gap"] = report.generalization_gap;
  j["log_factor"] = report.log_factor;
  j["leading_term"] = report.leading_term;
  j["spectral_baseline"] = report.spectral_baseline;
  j["gamma"] = report.gamma;
  j["n"] = report.n;
  j["delta"] = report.delta;
  j["xi"] = report.xi;
  j["relu_variant"] = report.relu_variant;
  return j.dump(2) + "\n";
}

}  // namespace lipaug
