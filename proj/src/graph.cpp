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

#include "lipaug/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipaug/errors.hpp"

namespace lipaug {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string node_label(const NodeSpec& spec, NodeId id) {
  std::ostringstream out;
  out << "node " << id;
  if (!spec.name.empty()) out << " (" << spec.name << ")";
  return out.str();
}

DenseVector flatten(const DenseMatrix& m) {
  return DenseVector(std::vector<double>(m.entries().begin(), m.entries().end()));
}

// Shared by the graph output rule and augmented_loss so both paths run the
// same floating point operations.
AugmentedLoss augmented_output(std::span<const DenseVector* const> values,
                               std::span<const DenseMatrix> locals, std::size_t y, double gamma,
                               const AugmentationParams& params) {
  const std::size_t q = params.num_layers();
  AugmentedLoss out;
  out.loss = ramp_loss(*values[q - 1], y, gamma);
  out.indicators.reserve(q + q * (q + 1) / 2);
  double product = 1.0;
  for (std::size_t j = 1; j <= q; ++j) {
    const double s = params.s(j);
    const double ind = std::isinf(s) ? 1.0 : soft_indicator(values[j - 1]->norm(), s);
    out.indicators.push_back(ind);
    product *= ind;
  }
  for (std::size_t i = 1; i <= q; ++i) {
    DenseMatrix p = locals[i - 1];
    for (std::size_t j = i; j <= q; ++j) {
      if (j > i) p = locals[j - 1] * p;
      const double kappa = params.kappa(j, i);
      const double ind = std::isinf(kappa) ? 1.0 : soft_indicator(spectral_norm(p), kappa);
      out.indicators.push_back(ind);
      product *= ind;
    }
  }
  out.value = (out.loss - 1.0) * product + 1.0;
  return out;
}

void check_layer_count(const SmoothNet& net, const AugmentationParams& params) {
  if (params.num_layers() != net.num_layers()) {
    std::ostringstream msg;
    msg << "augmentation params cover " << params.num_layers() << " layers, net has "
        << net.num_layers();
    throw UsageError(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// CompGraph

CompGraph::CompGraph(std::vector<NodeSpec> nodes) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  if (n == 0) throw UsageError("CompGraph: no nodes");
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<NodeId>> succ(n);
  for (NodeId id = 0; id < n; ++id) {
    const NodeSpec& spec = nodes_[id];
    if (spec.dim() == 0) throw UsageError("CompGraph: " + node_label(spec, id) + " has no entries");
    if (spec.preds.empty()) {
      if (spec.rule) throw UsageError("CompGraph: input " + node_label(spec, id) + " has a rule");
      continue;
    }
    if (!spec.rule || !spec.rule->apply) {
      throw UsageError("CompGraph: " + node_label(spec, id) + " has no rule");
    }
    if (spec.rule->arity != spec.preds.size()) {
      throw UsageError("CompGraph: rule arity of " + node_label(spec, id) +
                       " differs from its predecessor count");
    }
    for (NodeId p : spec.preds) {
      if (p >= n) throw UsageError("CompGraph: unknown predecessor of " + node_label(spec, id));
      succ[p].push_back(id);
      ++indegree[id];
    }
  }

  // Releasing nodes can leave inputs without consumers; those do not
  // compete with the computed sink.
  std::vector<NodeId> sinks;
  for (NodeId id = 0; id < n; ++id)
    if (succ[id].empty()) sinks.push_back(id);
  if (sinks.size() > 1) {
    std::erase_if(sinks, [&](NodeId id) { return nodes_[id].preds.empty(); });
  }
  if (sinks.size() != 1) throw UsageError("CompGraph: expected exactly one sink");
  output_ = sinks.front();

  // Kahn's algorithm, smallest id first so the order is canonical.
  std::vector<NodeId> ready;
  for (NodeId id = n; id-- > 0;)
    if (indegree[id] == 0) ready.push_back(id);
  while (!ready.empty()) {
    const NodeId id = ready.back();
    ready.pop_back();
    order_.push_back(id);
    for (NodeId s : succ[id]) {
      if (--indegree[s] == 0) {
        ready.push_back(s);
        std::sort(ready.rbegin(), ready.rend());
      }
    }
  }
  if (order_.size() != n) throw UsageError("CompGraph: cycle detected");
}

const NodeSpec& CompGraph::node(NodeId id) const {
  if (id >= nodes_.size()) throw UsageError("CompGraph: unknown node id");
  return nodes_[id];
}

std::vector<NodeId> CompGraph::inputs() const {
  std::vector<NodeId> out;
  for (NodeId id = 0; id < nodes_.size(); ++id)
    if (nodes_[id].preds.empty()) out.push_back(id);
  return out;
}

std::vector<NodeId> CompGraph::internal_nodes() const {
  std::vector<NodeId> out;
  for (NodeId id = 0; id < nodes_.size(); ++id)
    if (!nodes_[id].preds.empty() && id != output_) out.push_back(id);
  return out;
}

std::optional<NodeId> CompGraph::find(const std::string& name) const {
  for (NodeId id = 0; id < nodes_.size(); ++id)
    if (nodes_[id].name == name) return id;
  return std::nullopt;
}

std::vector<DenseVector> evaluate_all(const CompGraph& graph, const GraphInputs& inputs) {
  std::vector<DenseVector> values(graph.size());
  std::vector<const DenseVector*> args;
  for (NodeId id : graph.topological_order()) {
    const NodeSpec& spec = graph.node(id);
    if (spec.preds.empty()) {
      const auto it = inputs.find(id);
      if (it == inputs.end()) throw UsageError("evaluate: missing value for " + node_label(spec, id));
      if (it->second.size() != spec.dim()) {
        throw ShapeError("evaluate: wrong dimension for " + node_label(spec, id));
      }
      values[id] = it->second;
      continue;
    }
    args.clear();
    for (NodeId p : spec.preds) args.push_back(&values[p]);
    values[id] = spec.rule->apply(args);
    if (values[id].size() != spec.dim()) {
      throw ShapeError("evaluate: rule of " + node_label(spec, id) + " returned wrong dimension");
    }
  }
  return values;
}

DenseVector evaluate(const CompGraph& graph, const GraphInputs& inputs) {
  return evaluate_all(graph, inputs)[graph.output()];
}

CompGraph release(const CompGraph& graph, NodeId node) {
  if (graph.is_input(node)) {
    throw UsageError("release: " + node_label(graph.node(node), node) + " is already an input");
  }
  std::vector<NodeSpec> nodes;
  nodes.reserve(graph.size());
  for (NodeId id = 0; id < graph.size(); ++id) nodes.push_back(graph.node(id));
  nodes[node].preds.clear();
  nodes[node].rule.reset();
  return CompGraph(std::move(nodes));
}

bool check_forest_ordering(const CompGraph& graph, std::span<const NodeId> ordering) {
  const auto internal = graph.internal_nodes();
  std::vector<int> position(graph.size(), -1);
  for (std::size_t k = 0; k < ordering.size(); ++k) {
    const NodeId id = ordering[k];
    if (id >= graph.size()) throw UsageError("check_forest_ordering: unknown node");
    if (!std::binary_search(internal.begin(), internal.end(), id)) {
      throw UsageError("check_forest_ordering: " + node_label(graph.node(id), id) +
                       " is not an internal node");
    }
    if (position[id] >= 0) throw UsageError("check_forest_ordering: repeated node");
    position[id] = static_cast<int>(k);
  }
  if (ordering.size() != internal.size()) {
    throw UsageError("check_forest_ordering: ordering does not cover every internal node");
  }
  for (std::size_t k = 0; k < ordering.size(); ++k) {
    for (NodeId p : graph.node(ordering[k]).preds) {
      if (graph.is_input(p)) continue;
      if (position[p] < 0 || position[p] >= static_cast<int>(k)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Sequential and augmented graphs

CompGraph sequential_graph(const SmoothNet& net) {
  const std::size_t q = net.num_layers();
  std::vector<NodeSpec> nodes(q + 1);
  nodes[0].name = "I";
  nodes[0].rows = net.input_dim();
  for (std::size_t j = 1; j <= q; ++j) {
    NodeSpec& spec = nodes[j];
    spec.name = "V" + std::to_string(j);
    spec.rows = net.layer_dim(j);
    spec.preds = {j - 1};
    auto rule = std::make_shared<Rule>();
    rule->arity = 1;
    if (j % 2 == 1) {
      const DenseMatrix w = net.weights()[(j - 1) / 2];
      rule->apply = [w](RuleArgs a) { return w * *a[0]; };
      rule->jacobian = [w](RuleArgs, std::size_t) { return w; };
    } else {
      const Activation act = net.activation();
      rule->apply = [act](RuleArgs a) {
        std::vector<double> out(a[0]->size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = activate(act, (*a[0])[k]);
        return DenseVector(std::move(out));
      };
      rule->jacobian = [act](RuleArgs a, std::size_t) {
        std::vector<double> d(a[0]->size());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = activate_deriv(act, (*a[0])[k]);
        return DenseMatrix::diagonal(DenseVector(std::move(d)));
      };
    }
    spec.rule = std::move(rule);
  }
  return CompGraph(std::move(nodes));
}

AugmentationParams::AugmentationParams(std::size_t num_layers)
    : q_(num_layers), s_(num_layers, kInf), kappa_(num_layers * num_layers, kInf) {
  if (num_layers == 0) throw UsageError("AugmentationParams: no layers");
}

double AugmentationParams::s(std::size_t j) const {
  if (j == 0 || j > q_) throw UsageError("AugmentationParams::s: layer out of range");
  return s_[j - 1];
}

double AugmentationParams::kappa(std::size_t to, std::size_t from) const {
  if (from == 0 || from > q_ + 1 || to > q_) {
    throw UsageError("AugmentationParams::kappa: layer out of range");
  }
  if (to < from) return 1.0;
  return kappa_[(from - 1) * q_ + (to - 1)];
}

void AugmentationParams::set_s(std::size_t j, double value) {
  if (j == 0 || j > q_) throw UsageError("AugmentationParams::set_s: layer out of range");
  if (!(value > 0.0)) throw DomainError("AugmentationParams: thresholds must be positive");
  s_[j - 1] = value;
}

void AugmentationParams::set_kappa(std::size_t to, std::size_t from, double value) {
  if (from == 0 || from > to || to > q_) {
    throw UsageError("AugmentationParams::set_kappa: need 1 <= from <= to <= q");
  }
  if (!(value > 0.0)) throw DomainError("AugmentationParams: thresholds must be positive");
  kappa_[(from - 1) * q_ + (to - 1)] = value;
}

AugmentationParams params_from_trace(const LayerTrace& trace, double xi) {
  const std::size_t q = trace.num_layers();
  AugmentationParams params(q);
  for (std::size_t j = 2; j <= q; j += 2) params.set_s(j, trace.value(j).norm() + xi);
  for (std::size_t from = 1; from <= q; ++from)
    for (std::size_t to = from; to <= q; ++to)
      params.set_kappa(to, from, spectral_norm(trace.jacobian(to, from)) + xi);
  return params;
}

std::vector<NodeId> AugmentedLayout::forest_ordering() const {
  std::vector<NodeId> out;
  for (std::size_t j = 1; j <= q; ++j) {
    out.push_back(value(j));
    out.push_back(jacobian(j));
  }
  return out;
}

CompGraph lipschitz_augment(const SmoothNet& net, std::size_t y, double gamma,
                            const AugmentationParams& params) {
  check_layer_count(net, params);
  if (!(gamma > 0.0)) throw DomainError("lipschitz_augment: gamma must be positive");
  if (y >= net.output_dim()) throw UsageError("lipschitz_augment: label out of range");
  const CompGraph base = sequential_graph(net);
  const std::size_t q = net.num_layers();
  const AugmentedLayout layout{q};

  std::vector<NodeSpec> nodes(2 * q + 2);
  for (std::size_t j = 0; j <= q; ++j) nodes[layout.value(j)] = base.node(j);

  std::vector<std::pair<std::size_t, std::size_t>> shapes(q);
  for (std::size_t j = 1; j <= q; ++j) {
    NodeSpec& spec = nodes[layout.jacobian(j)];
    spec.name = "J" + std::to_string(j);
    spec.rows = net.layer_dim(j);
    spec.cols = net.layer_dim(j - 1);
    spec.norm = NodeNorm::kOperator;
    spec.preds = {layout.value(j - 1)};
    auto rule = std::make_shared<Rule>();
    rule->arity = 1;
    // J_j = DR_{V_j} evaluated at V_{j-1}.
    const auto source = base.node(j).rule;
    rule->apply = [source](RuleArgs a) { return flatten(source->jacobian(a, 0)); };
    spec.rule = std::move(rule);
    shapes[j - 1] = {spec.rows, spec.cols};
  }

  NodeSpec& out = nodes[layout.output()];
  out.name = "O";
  out.rows = 1;
  for (std::size_t j = 1; j <= q; ++j) out.preds.push_back(layout.value(j));
  for (std::size_t j = 1; j <= q; ++j) out.preds.push_back(layout.jacobian(j));
  auto rule = std::make_shared<Rule>();
  rule->arity = 2 * q;
  rule->apply = [q, y, gamma, params, shapes](RuleArgs a) {
    std::vector<DenseMatrix> locals;
    locals.reserve(q);
    for (std::size_t j = 0; j < q; ++j) {
      locals.emplace_back(shapes[j].first, shapes[j].second, a[q + j]->vec());
    }
    const auto result = augmented_output(a.subspan(0, q), locals, y, gamma, params);
    return DenseVector{result.value};
  };
  out.rule = std::move(rule);
  return CompGraph(std::move(nodes));
}

AugmentedLoss augmented_loss(const SmoothNet& net, const DenseVector& x, std::size_t y,
                             double gamma, const AugmentationParams& params) {
  check_layer_count(net, params);
  const LayerTrace trace = forward_trace(net, x, /*with_composites=*/false);
  const std::size_t q = net.num_layers();
  std::vector<const DenseVector*> values;
  std::vector<DenseMatrix> locals;
  for (std::size_t j = 1; j <= q; ++j) {
    values.push_back(&trace.value(j));
    locals.push_back(trace.local_jacobian(j));
  }
  return augmented_output(values, locals, y, gamma, params);
}

// ---------------------------------------------------------------------------
// Release-Lipschitz constants

LipschitzConstants release_lipschitz_constants(const AugmentationParams& params,
                                               std::span<const double> c,
                                               std::span<const double> kappa_bar) {
  const std::size_t q = params.num_layers();
  if (c.size() != q || kappa_bar.size() != q) {
    throw UsageError("release_lipschitz_constants: c and kappa_bar need one entry per layer");
  }
  for (std::size_t from = 1; from <= q; ++from) {
    for (std::size_t to = from; to <= q; ++to) {
      const double k = params.kappa(to, from);
      if (k == 0.0) throw DivisionError("release_lipschitz_constants: zero kappa");
      if (std::isinf(k)) throw DomainError("release_lipschitz_constants: infinite kappa");
    }
  }
  auto kappa = [&](std::size_t to, std::size_t from) { return params.kappa(to, from); };

  LipschitzConstants out;
  out.kappa_tilde_V.resize(q);
  out.kappa_tilde_J.resize(q);
  out.kappa_tilde_V_prime.resize(q);
  for (std::size_t i = 1; i <= q; ++i) {
    double direct = 0.0;
    for (std::size_t j = i; j <= q; ++j) direct += 3.0 * c[j - 1] * kappa(j, i + 1);
    double cross = 0.0;
    for (std::size_t j = 1; j <= q; ++j) {
      for (std::size_t jp = j; jp <= q; ++jp) {
        for (std::size_t ip = std::max(i + 1, j); ip <= jp; ++ip) {
          const double kb = kappa_bar[ip - 1];
          if (kb == 0.0) continue;
          cross += kb * kappa(jp, ip + 1) * kappa(ip - 1, i + 1) * kappa(ip - 1, j) / kappa(jp, j);
        }
      }
    }
    out.kappa_tilde_V[i - 1] = direct + 18.0 * cross;

    double norms = 0.0;
    for (std::size_t j = i; j <= q; ++j) norms += kappa(j, i + 1) / params.s(j);
    out.kappa_tilde_V_prime[i - 1] = out.kappa_tilde_V[i - 1] + norms;

    double jac = 0.0;
    for (std::size_t j = 1; j <= i; ++j)
      for (std::size_t jp = i; jp <= q; ++jp)
        jac += 4.0 * kappa(jp, i + 1) * kappa(i - 1, j) / kappa(jp, j);
    out.kappa_tilde_J[i - 1] = jac;
  }
  return out;
}

LipschitzConstants release_lipschitz_constants(const SmoothNet& net, double gamma,
                                               const AugmentationParams& params) {
  check_layer_count(net, params);
  if (!(gamma > 0.0)) throw DomainError("release_lipschitz_constants: gamma must be positive");
  const std::size_t q = net.num_layers();
  std::vector<double> c(q, 0.0), kappa_bar(q, 0.0);
  c[q - 1] = 1.0 / gamma;
  for (std::size_t j = 2; j <= q; j += 2) kappa_bar[j - 1] = net.activation_deriv_lipschitz();
  return release_lipschitz_constants(params, c, kappa_bar);
}

}  // namespace lipaug
