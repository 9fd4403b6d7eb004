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

#include "lipaug/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "lipaug/bounds.hpp"
#include "lipaug/errors.hpp"
#include "lipaug/random.hpp"

namespace lipaug {
namespace {

using nlohmann::json;

class Recorder {
 public:
  explicit Recorder(std::string name) { report_.name = std::move(name); }

  // Records one trial; `witness` is only built for the first violation.
  template <typename WitnessFn>
  void add(double slack, WitnessFn&& witness) {
    ++report_.trials;
    if (report_.trials == 1 || slack < report_.worst_slack) report_.worst_slack = slack;
    if (!(slack >= 0.0)) {
      if (report_.violations == 0) report_.witness = witness().dump();
      ++report_.violations;
    }
  }
  void detail(std::string key, double value) { report_.details.emplace_back(std::move(key), value); }
  VerificationReport& report() { return report_; }

 private:
  VerificationReport report_;
};

json vec_json(const DenseVector& v) { return json(v.vec()); }

DenseVector random_vector(Rng& rng, std::size_t dim, double scale) {
  std::vector<double> v = rng.normal_vector(dim);
  for (auto& e : v) e *= scale;
  return DenseVector(std::move(v));
}

// Random direction of Euclidean length `length`.
DenseVector random_direction(Rng& rng, std::size_t dim, double length) {
  DenseVector d(rng.normal_vector(dim));
  const double n = d.norm();
  return n > 0.0 ? (length / n) * d : DenseVector::basis(dim, 0);
}

double node_norm(const NodeSpec& spec, const DenseVector& v) {
  if (spec.norm == NodeNorm::kOperator) {
    return spectral_norm(DenseMatrix(spec.rows, spec.cols, v.vec()));
  }
  return v.norm();
}

// F_{to<-from}(v): layers from..to applied to a value of layer from-1.
DenseVector apply_layers(const SmoothNet& net, std::size_t from, std::size_t to, DenseVector v) {
  for (std::size_t j = from; j <= to; ++j) {
    if (j % 2 == 1) {
      v = net.weights()[(j - 1) / 2] * v;
    } else {
      std::vector<double> out(v.size());
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = activate(net.activation(), v[k]);
      v = DenseVector(std::move(out));
    }
  }
  return v;
}

double relative_frobenius(const DenseMatrix& approx, const DenseMatrix& exact) {
  const double den = exact.frobenius_norm();
  const double num = (approx - exact).frobenius_norm();
  return den > 0.0 ? num / den : num;
}

}  // namespace

VerificationReport verify_upper_bound(const SmoothNet& net, const Examples& data,
                                      const AugmentationParams& params, double gamma,
                                      std::size_t trials, double xi,
                                      const VerifyOptions& options) {
  constexpr double kTol = 1e-12;
  Recorder rec("upper_bound");
  const double scale = options.formula_scale;
  auto mutated = [scale](double value) { return (value - 1.0) * scale + 1.0; };

  auto check = [&](const DenseVector& x, std::size_t y, const char* kind) {
    const AugmentedLoss out = augmented_loss(net, x, y, gamma, params);
    const double z_tilde = mutated(out.value);
    rec.add(z_tilde - out.loss + kTol, [&] {
      return json{{"kind", kind}, {"x", vec_json(x)}, {"y", y}, {"z", out.loss},
                  {"z_tilde", z_tilde}};
    });
  };
  for (const Example& ex : data) check(ex.x, ex.y, "dataset");
  Rng rng(options.seed);
  for (std::size_t t = 0; t < trials && !data.empty(); ++t) {
    const Example& ex = data[rng.index(data.size())];
    check(ex.x + random_vector(rng, ex.x.size(), 0.1), ex.y, "perturbed");
  }

  const AugmentationParams measured = params_from_measurements(measure(net, data, xi));
  double worst_gap = 0.0;
  for (const Example& ex : data) {
    const AugmentedLoss out = augmented_loss(net, ex.x, ex.y, gamma, measured);
    const double z_tilde = mutated(out.value);
    const double gap = std::abs(z_tilde - out.loss);
    worst_gap = std::max(worst_gap, gap);
    rec.add(kTol - gap, [&] {
      return json{{"kind", "equality"}, {"x", vec_json(ex.x)}, {"y", ex.y}, {"z", out.loss},
                  {"z_tilde", z_tilde}};
    });
  }
  rec.detail("equality_max_gap", worst_gap);
  return rec.report();
}

VerificationReport verify_release_lipschitz(const SmoothNet& net, const DenseVector& x,
                                            std::size_t y, double gamma,
                                            const AugmentationParams& params,
                                            std::size_t probes, const VerifyOptions& options) {
  constexpr double kRelTol = 1e-6;
  constexpr int kShrinks = 3;
  Recorder rec("release_lipschitz");
  const std::size_t q = net.num_layers();
  const AugmentedLayout layout{q};
  const CompGraph full = lipschitz_augment(net, y, gamma, params);
  const LipschitzConstants constants = release_lipschitz_constants(net, gamma, params);
  const std::vector<DenseVector> base = evaluate_all(full, {{layout.input(), x}});

  Rng rng(options.seed);
  CompGraph graph = full;
  GraphInputs inputs{{layout.input(), x}};
  for (NodeId node : layout.forest_ordering()) {
    graph = release(graph, node);
    inputs[node] = base[node];
    const NodeSpec& spec = graph.node(node);
    const bool is_value = node <= q;
    const std::size_t layer = is_value ? node : node - q;
    const double bound = options.formula_scale * (is_value ? constants.kappa_tilde_V_prime[layer - 1]
                                                           : constants.kappa_tilde_J[layer - 1]);
    const double radius = 1e-2 * std::max(node_norm(spec, base[node]), 1e-3);
    double worst_ratio = 0.0;

    for (std::size_t p = 0; p < probes; ++p) {
      DenseVector d1 = random_direction(rng, spec.dim(), radius * rng.uniform());
      DenseVector d2 = random_direction(rng, spec.dim(), radius * rng.uniform());
      double ratio = 0.0, slope = 0.0, dist = 0.0;
      DenseVector v1, v2;
      double o1 = 0.0, o2 = 0.0;
      for (int shrink = 0; shrink <= kShrinks; ++shrink) {
        v1 = base[node] + d1;
        v2 = base[node] + d2;
        dist = node_norm(spec, v1 - v2);
        inputs[node] = v1;
        o1 = evaluate(graph, inputs)[0];
        inputs[node] = v2;
        o2 = evaluate(graph, inputs)[0];
        slope = dist > 0.0 ? std::abs(o1 - o2) / dist : 0.0;
        ratio = bound > 0.0 ? slope / bound : (slope > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (ratio <= 1.0 + kRelTol) break;
        d1 = 0.1 * d1;
        d2 = 0.1 * d2;
      }
      inputs[node] = base[node];
      worst_ratio = std::max(worst_ratio, ratio);
      rec.add(1.0 + kRelTol - ratio, [&] {
        return json{{"node", spec.name}, {"x", vec_json(x)},      {"y", y},
                    {"v", vec_json(v1)},  {"v_prime", vec_json(v2)}, {"output", o1},
                    {"output_prime", o2}, {"distance", dist},     {"slope", slope},
                    {"bound", bound}};
      });
    }
    rec.detail(spec.name + "_max_ratio", worst_ratio);
  }
  return rec.report();
}

VerificationReport verify_telescoping(const SmoothNet& net, const DenseVector& x,
                                      const DenseVector& nu, const VerifyOptions& options) {
  constexpr double kTol = 1e-8;
  Recorder rec("telescoping");
  const LayerTrace at_x = forward_trace(net, x);
  const LayerTrace at_shift = forward_trace(net, x + nu);
  const std::size_t q = net.num_layers();
  for (std::size_t j = 1; j <= q; ++j) {
    for (std::size_t jp = j; jp <= q; ++jp) {
      const DenseMatrix lhs = at_x.jacobian(jp, j) - at_shift.jacobian(jp, j);
      DenseMatrix rhs = DenseMatrix::zeros(lhs.rows(), lhs.cols());
      for (std::size_t ip = j; ip <= jp; ++ip) {
        const DenseMatrix diff = at_x.local_jacobian(ip) - at_shift.local_jacobian(ip);
        rhs = rhs + at_shift.jacobian(jp, ip + 1) * diff * at_x.jacobian(ip - 1, j);
      }
      const double dev = max_abs_diff(lhs, options.formula_scale * rhs);
      rec.add(kTol - dev, [&] {
        return json{{"from", j}, {"to", jp}, {"x", vec_json(x)}, {"nu", vec_json(nu)},
                    {"deviation", dev}};
      });
    }
  }
  return rec.report();
}

VerificationReport verify_finite_change(const SmoothNet& net, std::size_t layer,
                                        const DenseVector& x, const DenseVector& nu,
                                        const VerifyOptions& options) {
  constexpr int kSamples = 64;
  constexpr double kInflate = 1.1;
  constexpr double kRelTol = 1e-12;
  Recorder rec("finite_change");
  const std::size_t q = net.num_layers();
  if (layer == 0 || layer > q) throw UsageError("verify_finite_change: layer out of range");
  const double nu_norm = nu.norm();
  const LayerTrace at_x = forward_trace(net, x);
  const DenseMatrix& q_x = at_x.jacobian(layer, 1);

  double k_hat = 0.0;
  if (nu_norm > 0.0) {
    for (int s = 1; s <= kSamples; ++s) {
      const double t = static_cast<double>(s) / kSamples;
      const LayerTrace at_t = forward_trace(net, x + t * nu);
      k_hat = std::max(k_hat, spectral_norm(at_t.jacobian(layer, 1) - q_x) / (t * nu_norm));
    }
  }
  k_hat *= kInflate;
  const DenseVector shifted = apply_layers(net, 1, layer, x + nu);
  const double displacement = (at_x.value(layer) - shifted).norm();
  const double bound =
      options.formula_scale * (spectral_norm(q_x) + 0.5 * k_hat * nu_norm) * nu_norm;
  rec.add(bound * (1.0 + kRelTol) - displacement, [&] {
    return json{{"layer", layer}, {"x", vec_json(x)}, {"nu", vec_json(nu)},
                {"displacement", displacement}, {"bound", bound}, {"kappa", k_hat}};
  });
  rec.detail("kappa_hat", k_hat);
  return rec.report();
}

VerificationReport verify_jacobian_fd(const SmoothNet& net, const DenseVector& x, double step,
                                      bool informational, const VerifyOptions& options) {
  constexpr double kTol = 1e-5;
  if (!(step > 0.0)) throw DomainError("verify_jacobian_fd: step must be positive");
  Recorder rec("jacobian_fd");
  rec.report().informational = informational;
  const LayerTrace trace = forward_trace(net, x);
  const std::size_t q = net.num_layers();
  double worst = 0.0;

  // dF_{to<-from}/d(input of layer from) at the realized value of layer from-1.
  auto fd_check = [&](std::size_t from, std::size_t to) {
    const DenseVector& base = trace.value(from - 1);
    const std::size_t rows = trace.value(to).size(), cols = base.size();
    std::vector<double> fd(rows * cols);
    for (std::size_t k = 0; k < cols; ++k) {
      std::vector<double> plus = base.vec(), minus = base.vec();
      plus[k] += step;
      minus[k] -= step;
      const DenseVector fp = apply_layers(net, from, to, DenseVector(std::move(plus)));
      const DenseVector fm = apply_layers(net, from, to, DenseVector(std::move(minus)));
      for (std::size_t i = 0; i < rows; ++i) fd[i * cols + k] = (fp[i] - fm[i]) / (2.0 * step);
    }
    const DenseMatrix exact = options.formula_scale * trace.jacobian(to, from);
    const double err = relative_frobenius(DenseMatrix(rows, cols, std::move(fd)), exact);
    worst = std::max(worst, err);
    rec.add(kTol - err, [&] {
      return json{{"from", from}, {"to", to}, {"x", vec_json(x)}, {"step", step},
                  {"relative_error", err}};
    });
  };
  for (std::size_t j = 1; j <= q; ++j) fd_check(1, j);
  for (std::size_t j = 2; j <= q; ++j) fd_check(j, q);
  rec.detail("max_relative_error", worst);
  return rec.report();
}

VerificationReport verify_chain_rule(const SmoothNet& net, const DenseVector& x,
                                     const VerifyOptions& options) {
  constexpr double kTol = 1e-9;
  Recorder rec("chain_rule");
  const LayerTrace trace = forward_trace(net, x);
  const std::size_t q = net.num_layers();
  for (std::size_t j = 1; j <= q; ++j) {
    for (std::size_t jp = j; jp <= q; ++jp) {
      // Q_{jp<-jp} (Q_{jp-1<-jp-1} (... Q_{j<-j})) associated from the left.
      DenseMatrix left = trace.local_jacobian(jp);
      for (std::size_t k = jp; k-- > j;) left = left * trace.local_jacobian(k);
      const double err = relative_frobenius(options.formula_scale * left, trace.jacobian(jp, j));
      rec.add(kTol - err, [&] {
        return json{{"from", j}, {"to", jp}, {"x", vec_json(x)}, {"relative_error", err}};
      });
    }
  }
  return rec.report();
}

VerificationReport verify_stack_upper(std::size_t trials, const VerifyOptions& options) {
  constexpr double kTol = 1e-15;
  Recorder rec("stack_upper");
  const double scale = options.formula_scale;
  auto u = [scale](double a, double b) {
    return scale == 1.0 ? stack_upper(a, b) : (a - 1.0) * b * scale + 1.0;
  };
  Rng rng(options.seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    const double nested = u(u(a, b), c);
    const double direct = u(a, b * c);
    const double dev = std::abs(nested - direct);
    rec.add(std::min(kTol - dev, u(a, b) - a + kTol), [&] {
      return json{{"a", a}, {"b", b}, {"c", c}, {"nested", nested}, {"direct", direct}};
    });
  }
  return rec.report();
}

std::string to_json_line(const VerificationReport& report, const std::string& witness_path) {
  json details = json::object();
  for (const auto& [key, value] : report.details) details[key] = value;
  json j{{"name", report.name},
         {"trials", report.trials},
         {"violations", report.violations},
         {"worst_slack", report.worst_slack},
         {"passed", report.passed()},
         {"witness_path", witness_path.empty() ? json(nullptr) : json(witness_path)},
         {"details", details}};
  if (report.informational) j["informational"] = true;
  return j.dump() + "\n";
}

}  // namespace lipaug
