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

// Computational graphs over dense values, node release, forest orderings and
// the Lipschitz augmentation of a sequential network graph.
//
// Every node value is a DenseVector. Matrix-valued nodes (the Jacobian nodes
// of an augmented graph) store their entries row-major and carry the shape
// and the norm (operator) used to measure them.

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipaug/linalg.hpp"
#include "lipaug/smoothnet.hpp"

namespace lipaug {

using NodeId = std::size_t;

enum class NodeNorm { kEuclidean, kOperator };

// Predecessor values in the order of NodeSpec::preds.
using RuleArgs = std::span<const DenseVector* const>;

struct Rule {
  std::size_t arity = 0;
  std::function<DenseVector(RuleArgs)> apply;
  // Exact Jacobian of apply with respect to argument k. Optional.
  std::function<DenseMatrix(RuleArgs, std::size_t k)> jacobian;
};

struct NodeSpec {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 1;
  NodeNorm norm = NodeNorm::kEuclidean;
  std::vector<NodeId> preds;
  std::shared_ptr<const Rule> rule;  // null for input nodes

  std::size_t dim() const { return rows * cols; }
};

class CompGraph {
 public:
  // Node ids are positions in `nodes`. Throws UsageError unless the edges
  // form a DAG with exactly one sink, every node with predecessors has a
  // rule of matching arity and every input node has none. Inputs without
  // consumers (left behind by release) are not counted as sinks.
  explicit CompGraph(std::vector<NodeSpec> nodes);

  std::size_t size() const { return nodes_.size(); }
  const NodeSpec& node(NodeId id) const;
  NodeId output() const { return output_; }
  bool is_input(NodeId id) const { return node(id).preds.empty(); }
  std::vector<NodeId> inputs() const;
  // Neither input nor output.
  std::vector<NodeId> internal_nodes() const;
  const std::vector<NodeId>& topological_order() const { return order_; }
  std::optional<NodeId> find(const std::string& name) const;

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<NodeId> order_;
  NodeId output_ = 0;
};

using GraphInputs = std::map<NodeId, DenseVector>;

// Values of every node, indexed by id. Throws UsageError for a missing input
// and ShapeError for an input or rule result of the wrong dimension.
std::vector<DenseVector> evaluate_all(const CompGraph& graph, const GraphInputs& inputs);
DenseVector evaluate(const CompGraph& graph, const GraphInputs& inputs);

// Removes the inward edges of `node`, which becomes an input. Throws
// UsageError when `node` already is an input.
CompGraph release(const CompGraph& graph, NodeId node);

// True iff every node depends only on inputs and earlier nodes of the
// ordering. Throws UsageError for unknown, non-internal or repeated nodes
// and when the ordering misses an internal node.
bool check_forest_ordering(const CompGraph& graph, std::span<const NodeId> ordering);

// I -> V_1 -> ... -> V_q with output V_q (the logits). V_j applies W_i at
// odd j and phi at even j; each rule carries its exact Jacobian.
CompGraph sequential_graph(const SmoothNet& net);

// Thresholds of the augmented loss. s(j) bounds ||V_j|| and kappa(to, from)
// bounds ||J_to ... J_from||_op. +inf disables an indicator. kappa(to, from)
// with to < from reads as 1.
class AugmentationParams {
 public:
  // All thresholds +inf.
  explicit AugmentationParams(std::size_t num_layers);

  std::size_t num_layers() const { return q_; }
  double s(std::size_t j) const;
  double kappa(std::size_t to, std::size_t from) const;
  // Throw DomainError unless value > 0 (inf allowed).
  void set_s(std::size_t j, double value);
  void set_kappa(std::size_t to, std::size_t from, double value);

 private:
  std::size_t q_;
  std::vector<double> s_;
  std::vector<double> kappa_;  // (from - 1) * q + (to - 1)
};

// s_{2i} = ||h_i|| + xi at activation layers (odd layers unbounded) and
// kappa(to, from) = ||Q_{to<-from}||_op + xi, from a single trace.
AugmentationParams params_from_trace(const LayerTrace& trace, double xi);

// Node ids of lipschitz_augment's result.
struct AugmentedLayout {
  std::size_t q;

  NodeId input() const { return 0; }
  NodeId value(std::size_t j) const { return j; }
  NodeId jacobian(std::size_t j) const { return q + j; }
  NodeId output() const { return 2 * q + 1; }
  // V_1, J_1, V_2, J_2, ...
  std::vector<NodeId> forest_ordering() const;
};

// Augmented graph with value nodes V_j, Jacobian nodes J_j = DR_{V_j}(V_{j-1})
// and output (l_gamma(V_q, y) - 1) * prod_j 1[<= s_j](||V_j||)
//   * prod_{i <= j} 1[<= kappa_{j<-i}](||J_j ... J_i||_op) + 1.
// Throws UsageError when params do not match the net's layer count.
CompGraph lipschitz_augment(const SmoothNet& net, std::size_t y, double gamma,
                            const AugmentationParams& params);

struct AugmentedLoss {
  double loss = 0.0;  // ramp loss z
  double value = 0.0;  // augmented loss
  // 1[<= s_j] for j = 1..q, then 1[<= kappa_{j<-i}] for i = 1..q, j = i..q.
  std::vector<double> indicators;
};

AugmentedLoss augmented_loss(const SmoothNet& net, const DenseVector& x, std::size_t y,
                             double gamma, const AugmentationParams& params);

struct LipschitzConstants {
  std::vector<double> kappa_tilde_V;        // index j - 1
  std::vector<double> kappa_tilde_J;        // index j - 1
  std::vector<double> kappa_tilde_V_prime;  // index j - 1
};

// Release-Lipschitz constants of an augmented sequential graph with output
// Lipschitz constants c_j in V_j and Lipschitz constants kappa_bar_j of the
// Jacobian rules, both indexed j - 1. Throws DivisionError on a zero kappa
// and DomainError on an infinite one.
LipschitzConstants release_lipschitz_constants(const AugmentationParams& params,
                                               std::span<const double> c,
                                               std::span<const double> kappa_bar);

// c_q = 1/gamma, other c_j = 0; kappa_bar = sigma_bar_phi at activation
// layers and 0 at matrix layers.
LipschitzConstants release_lipschitz_constants(const SmoothNet& net, double gamma,
                                               const AugmentationParams& params);

}  // namespace lipaug
