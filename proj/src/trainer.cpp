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

#include "lipaug/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lipaug/bounds.hpp"
#include "lipaug/errors.hpp"
#include "lipaug/io.hpp"
#include "lipaug/random.hpp"

namespace lipaug {
namespace {

using Vec = std::vector<double>;

std::vector<double> linspace(double a, double b, std::size_t k, bool endpoint) {
  std::vector<double> out(k);
  if (k == 0) return out;
  const double den = endpoint ? static_cast<double>(k > 1 ? k - 1 : 1) : static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = a + (b - a) * static_cast<double>(i) / den;
  return out;
}

// Raw weights: w[l] is rows[l] x cols[l] row-major, l = 0..r-1 for W^(l+1).
struct RawNet {
  std::vector<std::size_t> rows, cols;
  std::vector<Vec> w;
  Activation act;

  explicit RawNet(const SmoothNet& net) : act(net.activation()) {
    for (const DenseMatrix& m : net.weights()) {
      rows.push_back(m.rows());
      cols.push_back(m.cols());
      w.emplace_back(m.entries().begin(), m.entries().end());
    }
  }
  std::size_t depth() const { return w.size(); }
  SmoothNet to_net(double deriv_lipschitz) const {
    std::vector<DenseMatrix> mats;
    for (std::size_t l = 0; l < w.size(); ++l) mats.emplace_back(rows[l], cols[l], w[l]);
    return SmoothNet(std::move(mats), act, deriv_lipschitz);
  }
};

void matvec(const Vec& w, std::size_t rows, std::size_t cols, const Vec& x, Vec& out) {
  out.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w.data() + i * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
    out[i] = s;
  }
}

void matvec_t(const Vec& w, std::size_t rows, std::size_t cols, const Vec& x, Vec& out) {
  out.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w.data() + i * cols;
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j) out[j] += row[j] * xi;
  }
}

void add_outer(Vec& g, std::size_t rows, std::size_t cols, const Vec& u, const Vec& v) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double ui = u[i];
    if (ui == 0.0) continue;
    double* row = g.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += ui * v[j];
  }
}

struct ExampleResult {
  double cross_entropy = 0.0;
  double penalty = 0.0;
  double jac_frob_sq = 0.0;
  bool correct = false;
};

// Forward pass, margin Jacobians, penalty and (when grads != nullptr) the
// accumulated gradient of cross_entropy + penalty.
class ExampleEngine {
 public:
  ExampleEngine(const RawNet& net, std::vector<bool> penalized, double lambda, double sigma)
      : net_(net), penalized_(std::move(penalized)), lambda_(lambda), sigma_(sigma) {
    const std::size_t r = net.depth();
    z_.resize(r + 1);
    a_.resize(r + 1);
    d1_.resize(r + 1);
    d2_.resize(r + 1);
    ga_.resize(r + 1);
    b_.resize(r + 1);
    zbar_.resize(r + 1);
  }

  ExampleResult run(const Vec& x, std::size_t y, bool with_ce, std::vector<Vec>* grads) {
    const std::size_t r = net_.depth();
    forward(x);
    const Vec& logits = z_[r];
    const std::size_t k = logits.size();
    ExampleResult res;

    // Softmax cross-entropy.
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - top);
    res.cross_entropy = std::log(sum) + top - logits[y];

    std::size_t other = y == 0 ? 1 : 0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != y && logits[j] > logits[other]) other = j;
    res.correct = logits[y] - logits[other] > 0.0;

    margin_backward(y, other);

    std::vector<double> coef(r, 0.0);
    bool any = false;
    for (std::size_t i = 1; i < r; ++i) {
      if (!penalized_[i]) continue;
      double s = 0.0;
      for (double v : ga_[i]) s += v * v;
      res.jac_frob_sq += s;
      if (s >= sigma_ && lambda_ != 0.0) {
        res.penalty += lambda_ * s;
        coef[i] = lambda_;
        any = true;
      }
    }
    if (grads == nullptr) return res;

    for (std::size_t l = 1; l <= r; ++l) zbar_[l].assign(z_[l].size(), 0.0);
    if (any) penalty_backward(coef, *grads);

    // Backprop of the cross-entropy and the penalty's preactivation terms.
    Vec delta(k, 0.0);
    if (with_ce) {
      for (std::size_t j = 0; j < k; ++j) delta[j] = std::exp(logits[j] - top) / sum;
      delta[y] -= 1.0;
    }
    Vec up;
    for (std::size_t l = r; l >= 1; --l) {
      add_outer((*grads)[l - 1], net_.rows[l - 1], net_.cols[l - 1], delta, a_[l - 1]);
      if (l == 1) break;
      matvec_t(net_.w[l - 1], net_.rows[l - 1], net_.cols[l - 1], delta, up);
      for (std::size_t j = 0; j < up.size(); ++j) up[j] = d1_[l - 1][j] * up[j] + zbar_[l - 1][j];
      delta.swap(up);
    }
    return res;
  }

  const Vec& margin_grad(std::size_t layer) const { return ga_[layer]; }

 private:
  void forward(const Vec& x) {
    const std::size_t r = net_.depth();
    a_[0] = x;
    for (std::size_t l = 1; l <= r; ++l) {
      matvec(net_.w[l - 1], net_.rows[l - 1], net_.cols[l - 1], a_[l - 1], z_[l]);
      if (l < r) {
        const std::size_t n = z_[l].size();
        a_[l].resize(n);
        d1_[l].resize(n);
        d2_[l].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
          a_[l][j] = activate(net_.act, z_[l][j]);
          d1_[l][j] = activate_deriv(net_.act, z_[l][j]);
          d2_[l][j] = activate_second_deriv(net_.act, z_[l][j]);
        }
      } else {
        a_[l] = z_[l];
      }
    }
  }

  // ga_[l] = d margin / d a_l, b_[l] = d margin / d z_l.
  void margin_backward(std::size_t y, std::size_t other) {
    const std::size_t r = net_.depth();
    b_[r].assign(z_[r].size(), 0.0);
    b_[r][y] = 1.0;
    b_[r][other] = -1.0;
    ga_[r] = b_[r];
    for (std::size_t l = r; l >= 1; --l) {
      matvec_t(net_.w[l - 1], net_.rows[l - 1], net_.cols[l - 1], b_[l], ga_[l - 1]);
      if (l == 1) break;
      b_[l - 1].resize(ga_[l - 1].size());
      for (std::size_t j = 0; j < ga_[l - 1].size(); ++j) b_[l - 1][j] = d1_[l - 1][j] * ga_[l - 1][j];
    }
  }

  // Reverse pass of ga_{l} = W_{l+1}^T b_{l+1}, b_l = phi'(z_l) * ga_l for
  // the penalty sum_l coef_l ||ga_l||^2.
  void penalty_backward(const std::vector<double>& coef, std::vector<Vec>& grads) {
    const std::size_t r = net_.depth();
    Vec gabar(ga_[1].size());
    for (std::size_t j = 0; j < gabar.size(); ++j) gabar[j] = 2.0 * coef[1] * ga_[1][j];
    Vec bbar;
    for (std::size_t l = 1; l < r; ++l) {
      const std::size_t next = l + 1;
      add_outer(grads[next - 1], net_.rows[next - 1], net_.cols[next - 1], b_[next], gabar);
      if (next == r) break;
      matvec(net_.w[next - 1], net_.rows[next - 1], net_.cols[next - 1], gabar, bbar);
      Vec fresh(ga_[next].size());
      for (std::size_t j = 0; j < fresh.size(); ++j) {
        fresh[j] = 2.0 * coef[next] * ga_[next][j] + d1_[next][j] * bbar[j];
        zbar_[next][j] += d2_[next][j] * ga_[next][j] * bbar[j];
      }
      gabar.swap(fresh);
    }
  }

  const RawNet& net_;
  std::vector<bool> penalized_;
  double lambda_;
  double sigma_;
  std::vector<Vec> z_, a_, d1_, d2_, ga_, b_, zbar_;
};

std::vector<bool> penalty_mask(std::size_t depth, const TrainConfig& config) {
  std::vector<bool> mask(depth, false);
  for (std::size_t i : config.penalty_layers()) {
    if (i == 0 || i >= depth) throw UsageError("regularized layer out of range [1, r-1]");
    mask[i] = true;
  }
  return mask;
}

std::vector<Vec> zero_grads(const RawNet& net) {
  std::vector<Vec> g;
  for (std::size_t l = 0; l < net.depth(); ++l) g.emplace_back(net.rows[l] * net.cols[l], 0.0);
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// Datasets

SplitDataset make_dataset(const DatasetSpec& spec) {
  if (spec.n < 2) throw UsageError("make_dataset: n must be at least 2");
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
    throw UsageError("make_dataset: noise must be finite and nonnegative");
  }
  Rng rng(spec.seed);
  std::vector<std::array<double, 2>> points;
  std::vector<std::size_t> labels;
  SplitDataset out;
  const std::size_t n_out = spec.n / 2, n_in = spec.n - n_out;
  const double pi = std::numbers::pi;
  if (spec.name == "two_moons") {
    for (double t : linspace(0.0, pi, n_out, true)) {
      points.push_back({std::cos(t), std::sin(t)});
      labels.push_back(0);
    }
    for (double t : linspace(0.0, pi, n_in, true)) {
      points.push_back({1.0 - std::cos(t), 1.0 - std::sin(t) - 0.5});
      labels.push_back(1);
    }
  } else if (spec.name == "circles") {
    for (double t : linspace(0.0, 2.0 * pi, n_out, false)) {
      points.push_back({std::cos(t), std::sin(t)});
      labels.push_back(0);
    }
    for (double t : linspace(0.0, 2.0 * pi, n_in, false)) {
      points.push_back({0.8 * std::cos(t), 0.8 * std::sin(t)});
      labels.push_back(1);
    }
  } else if (spec.name == "gaussian_blobs") {
    const double centers[3][2] = {{0.0, 2.0}, {-std::sqrt(3.0), -1.0}, {std::sqrt(3.0), -1.0}};
    for (std::size_t i = 0; i < spec.n; ++i) {
      points.push_back({centers[i % 3][0], centers[i % 3][1]});
      labels.push_back(i % 3);
    }
    out.num_classes = 3;
  } else {
    throw UsageError("make_dataset: unknown dataset '" + spec.name + "'");
  }
  for (auto& p : points) {
    p[0] += spec.noise * rng.normal();
    p[1] += spec.noise * rng.normal();
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::size_t n_train = spec.n * 4 / 5;
  out.dim = spec.bias_feature ? 3 : 2;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& p = points[order[k]];
    Example ex{spec.bias_feature ? DenseVector{p[0], p[1], 1.0} : DenseVector{p[0], p[1]},
               labels[order[k]]};
    (k < n_train ? out.train : out.test).push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be >= 0");
  if (!(sigma_threshold > 0.0)) throw UsageError("sigma threshold must be > 0");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (depth < 1) throw UsageError("depth must be >= 1");
  if (width < 1 || width > 512) throw UsageError("width must lie in [1, 512]");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw UsageError("momentum must lie in [0, 1)");
  if (!(lr_decay_factor > 0.0)) throw UsageError("lr decay factor must be > 0");
  for (std::size_t i : regularized_layers) {
    if (i == 0 || i >= depth) throw UsageError("regularized layer out of range [1, r-1]");
  }
}

std::vector<std::size_t> TrainConfig::penalty_layers() const {
  if (!regularized_layers.empty()) return regularized_layers;
  std::vector<std::size_t> all;
  for (std::size_t i = 1; i < depth; ++i) all.push_back(i);
  return all;
}

std::string TrainConfig::canonical() const {
  std::ostringstream out;
  out << "dataset=" << dataset.name << ";n=" << dataset.n << ";noise=" << format_double(dataset.noise)
      << ";bias_feature=" << dataset.bias_feature
      << ";data_seed=" << dataset.seed << ";depth=" << depth << ";width=" << width
      << ";activation=" << activation_name(activation) << ";lambda=" << format_double(lambda)
      << ";sigma=" << format_double(sigma_threshold) << ";layers=";
  for (std::size_t i : penalty_layers()) out << i << ' ';
  out << ";epochs=" << epochs << ";lr=" << format_double(learning_rate)
      << ";momentum=" << format_double(momentum) << ";decay=" << format_double(lr_decay_factor)
      << '@';
  for (std::size_t e : lr_decay_epochs) out << e << ' ';
  out << ";batch=" << batch_size << ";seed=" << seed;
  return out.str();
}

// ---------------------------------------------------------------------------
// Margin Jacobian and penalty

DenseVector margin_jacobian(const SmoothNet& net, const DenseVector& x, std::size_t y,
                            std::size_t layer) {
  if (layer > net.depth()) throw UsageError("margin_jacobian: layer out of range");
  if (y >= net.output_dim()) throw UsageError("margin_jacobian: label out of range");
  if (x.size() != net.input_dim()) throw ShapeError("margin_jacobian: input dimension mismatch");
  const RawNet raw(net);
  ExampleEngine engine(raw, std::vector<bool>(net.depth(), false), 0.0, 1.0);
  engine.run(x.vec(), y, false, nullptr);
  return DenseVector(engine.margin_grad(layer));
}

double reg_penalty(const SmoothNet& net, const DenseVector& x, std::size_t y,
                   const TrainConfig& config) {
  const RawNet raw(net);
  ExampleEngine engine(raw, penalty_mask(net.depth(), config), config.lambda,
                       config.sigma_threshold);
  return engine.run(x.vec(), y, false, nullptr).penalty;
}

LossGradient loss_gradient(const SmoothNet& net, const DenseVector& x, std::size_t y,
                           const TrainConfig& config, bool include_cross_entropy) {
  if (y >= net.output_dim()) throw UsageError("loss_gradient: label out of range");
  const RawNet raw(net);
  ExampleEngine engine(raw, penalty_mask(net.depth(), config), config.lambda,
                       config.sigma_threshold);
  std::vector<Vec> grads = zero_grads(raw);
  const ExampleResult res = engine.run(x.vec(), y, include_cross_entropy, &grads);
  LossGradient out;
  out.cross_entropy = res.cross_entropy;
  out.penalty = res.penalty;
  out.jac_frob_sq = res.jac_frob_sq;
  for (std::size_t l = 0; l < raw.depth(); ++l) {
    out.grad.emplace_back(raw.rows[l], raw.cols[l], std::move(grads[l]));
  }
  return out;
}

SmoothNet init_net(std::size_t input_dim, std::size_t width, std::size_t depth,
                   std::size_t num_classes, Activation activation, std::uint64_t seed) {
  if (depth == 0) throw UsageError("init_net: depth must be positive");
  Rng rng(seed);
  std::vector<DenseMatrix> weights;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t cols = l == 0 ? input_dim : width;
    const std::size_t rows = l + 1 == depth ? num_classes : width;
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> e(rows * cols);
    for (auto& v : e) v = rng.uniform(-bound, bound);
    weights.emplace_back(rows, cols, std::move(e));
  }
  return SmoothNet(std::move(weights), activation);
}

// ---------------------------------------------------------------------------
// Metrics and training

std::string RunMetrics::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,test_acc,jac_frob_sq,leading_term\n";
  for (const EpochMetrics& m : rows) {
    out << m.epoch << ',' << format_double(m.train_loss) << ',' << format_double(m.train_acc)
        << ',' << format_double(m.test_acc) << ',' << format_double(m.jac_frob_sq) << ','
        << format_double(m.leading_term) << '\n';
  }
  return out.str();
}

double mean_jac_frob_sq(const SmoothNet& net, const Examples& data, const TrainConfig& config) {
  if (data.empty()) return 0.0;
  const RawNet raw(net);
  ExampleEngine engine(raw, penalty_mask(net.depth(), config), 0.0, config.sigma_threshold);
  double sum = 0.0;
  for (const Example& ex : data) sum += engine.run(ex.x.vec(), ex.y, false, nullptr).jac_frob_sq;
  return sum / static_cast<double>(data.size());
}

double accuracy(const SmoothNet& net, const Examples& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const Example& ex : data) correct += 1 - zero_one_loss(net.forward(ex.x), ex.y);
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(const TrainConfig& config) { return train(config, make_dataset(config.dataset)); }

TrainResult train(const TrainConfig& config, const SplitDataset& data) {
  config.validate();
  if (data.train.empty()) throw UsageError("train: empty training set");
  std::size_t classes = data.num_classes;
  for (const Example& ex : data.train) classes = std::max(classes, ex.y + 1);
  const std::size_t dim = data.train.front().x.size();

  const SmoothNet init =
      init_net(dim, config.width, config.depth, classes, config.activation, config.seed);
  const double deriv_lip = init.activation_deriv_lipschitz();
  RawNet raw(init);
  std::vector<Vec> velocity = zero_grads(raw);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  auto last = std::make_shared<const SmoothNet>(init);

  RunMetrics metrics;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double lr = config.learning_rate;
    for (std::size_t e : config.lr_decay_epochs)
      if (epoch >= e) lr *= config.lr_decay_factor;
    rng.shuffle(order);

    ExampleEngine engine(raw, penalty_mask(config.depth, config), config.lambda,
                         config.sigma_threshold);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<Vec> grads = zero_grads(raw);
      for (std::size_t k = start; k < stop; ++k) {
        const Example& ex = data.train[order[k]];
        const ExampleResult res = engine.run(ex.x.vec(), ex.y, true, &grads);
        loss_sum += res.cross_entropy + res.penalty;
      }
      if (!std::isfinite(loss_sum)) {
        std::ostringstream msg;
        msg << "training diverged in epoch " << epoch + 1;
        throw TrainingDivergedError(msg.str(), last);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (std::size_t l = 0; l < raw.depth(); ++l) {
        for (std::size_t p = 0; p < raw.w[l].size(); ++p) {
          velocity[l][p] = config.momentum * velocity[l][p] + scale * grads[l][p];
          raw.w[l][p] -= lr * velocity[l][p];
        }
      }
    }
    for (const Vec& w : raw.w) {
      for (double v : w) {
        if (!std::isfinite(v)) {
          std::ostringstream msg;
          msg << "training diverged in epoch " << epoch + 1;
          throw TrainingDivergedError(msg.str(), last);
        }
      }
    }

    const SmoothNet net = raw.to_net(deriv_lip);
    EpochMetrics row;
    row.epoch = epoch + 1;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.train_acc = accuracy(net, data.train);
    row.test_acc = accuracy(net, data.test);
    row.jac_frob_sq = mean_jac_frob_sq(net, data.train, config);
    try {
      row.leading_term = leading_term(net, data.train).aggregate;
    } catch (const MarginError&) {
      row.leading_term = std::numeric_limits<double>::quiet_NaN();
    }
    metrics.rows.push_back(row);
    last = std::make_shared<const SmoothNet>(net);
  }
  return TrainResult{*last, std::move(metrics)};
}

}  // namespace lipaug
