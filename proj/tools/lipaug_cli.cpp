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

// lipaug command line: train, bound, verify, depth-sweep, histogram and
// dataset. Exit codes: 0 ok, 2 usage, 3 io/training, 4 margin, 5
// verification failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lipaug/bounds.hpp"
#include "lipaug/errors.hpp"
#include "lipaug/io.hpp"
#include "lipaug/random.hpp"
#include "lipaug/trainer.hpp"
#include "lipaug/verify.hpp"

namespace {

using namespace lipaug;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitMargin = 4;
constexpr int kExitVerify = 5;

const char* const kBuiltins[] = {"two_moons", "circles", "gaussian_blobs"};

bool is_builtin(const std::string& name) {
  return std::find(std::begin(kBuiltins), std::end(kBuiltins), name) != std::end(kBuiltins);
}

struct DataFlags {
  std::string dataset = "two_moons";
  std::size_t n = 512;
  double noise = 0.15;
  std::uint64_t data_seed = 0;
  std::string split = "train";

  void add_to(CLI::App* cmd, bool with_split) {
    cmd->add_option("--dataset", dataset,
                    "two_moons, circles, gaussian_blobs or a CSV file (f1,...,fd,label)")
        ->capture_default_str();
    cmd->add_option("--n", n, "Points in a built-in dataset")->capture_default_str();
    cmd->add_option("--noise", noise, "Noise level of a built-in dataset")->capture_default_str();
    cmd->add_option("--data-seed", data_seed, "Seed of a built-in dataset")->capture_default_str();
    if (with_split) {
      cmd->add_option("--split", split, "Split of a built-in dataset")
          ->check(CLI::IsMember({"train", "test", "all"}))
          ->capture_default_str();
    }
  }
  DatasetSpec spec() const { return {dataset, n, noise, data_seed}; }
};

// Seeded 80/20 split of a loaded CSV.
SplitDataset split_examples(Examples all, std::uint64_t seed) {
  SplitDataset out;
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_train = std::max<std::size_t>(1, all.size() * 4 / 5);
  std::size_t classes = 2;
  for (std::size_t k = 0; k < order.size(); ++k) {
    classes = std::max(classes, all[order[k]].y + 1);
    (k < n_train ? out.train : out.test).push_back(std::move(all[order[k]]));
  }
  out.num_classes = classes;
  out.dim = out.train.front().x.size();
  return out;
}

SplitDataset load_split(const DataFlags& flags, std::uint64_t seed) {
  if (is_builtin(flags.dataset)) return make_dataset(flags.spec());
  return split_examples(dataset_from_csv(read_file(flags.dataset)), seed);
}

Examples load_examples(const DataFlags& flags) {
  if (!is_builtin(flags.dataset)) return dataset_from_csv(read_file(flags.dataset));
  SplitDataset split = make_dataset(flags.spec());
  if (flags.split == "train") return split.train;
  if (flags.split == "test") return split.test;
  Examples all = split.train;
  all.insert(all.end(), split.test.begin(), split.test.end());
  return all;
}

void check_compatible(const SmoothNet& net, const Examples& data) {
  for (const Example& ex : data) {
    if (ex.x.size() != net.input_dim() || ex.y >= net.output_dim()) {
      throw IoError("dataset does not match the model's input or output dimension");
    }
  }
}

// ---------------------------------------------------------------------------

struct TrainFlags {
  DataFlags data;
  TrainConfig config;
  std::string activation = "tanh";
  std::string out_model;
  std::string out_metrics;
};

int cmd_train(const TrainFlags& f) {
  TrainConfig config = f.config;
  config.activation = parse_activation(f.activation);
  config.dataset = f.data.spec();
  const SplitDataset split = load_split(f.data, config.seed);
  const TrainResult result = train(config, split);
  ModelFile model{result.net, {config.seed, fnv1a_hex(config.canonical())}};
  save_model(f.out_model, model);
  write_file(f.out_metrics, result.metrics.to_csv());
  const EpochMetrics& last = result.metrics.rows.back();
  std::cout << "train_acc " << format_double(last.train_acc) << "\n"
            << "test_acc " << format_double(last.test_acc) << "\n";
  return 0;
}

struct BoundFlags {
  DataFlags data;
  std::string model;
  double delta = 0.01;
  double xi = 0.0;
  bool relu_variant = false;
  std::string refs = "zero";
  std::string out;
};

int cmd_bound(const BoundFlags& f) {
  const ModelFile model = load_model(f.model);
  const Examples data = load_examples(f.data);
  check_compatible(model.net, data);
  BoundConfig config;
  if (f.xi > 0.0) config.xi = f.xi;
  config.delta = f.delta;
  config.relu_variant = f.relu_variant;
  config.references = f.refs == "self" ? ReferenceKind::kSelf : ReferenceKind::kZero;
  const BoundReport report = generalization_bound(model.net, data, config);
  const std::string json = to_json(report);
  if (f.out.empty()) {
    std::cout << json;
  } else {
    write_file(f.out, json);
  }
  std::cout << "beta_star " << format_double(report.beta_star) << "\n"
            << "leading_term " << format_double(report.leading_term) << "\n"
            << "spectral_baseline " << format_double(report.spectral_baseline) << "\n";
  return 0;
}

struct VerifyFlags {
  DataFlags data;
  std::string model;
  std::size_t probes = 200;
  std::uint64_t seed = 0;
  std::size_t points = 3;
  std::string out;
  std::string witness_dir;
};

int cmd_verify(const VerifyFlags& f) {
  const ModelFile model = load_model(f.model);
  const SmoothNet& net = model.net;
  const Examples data = load_examples(f.data);
  check_compatible(net, data);
  const double r = static_cast<double>(net.depth());
  const double xi = 1.0 / (r * r);
  const std::size_t q = net.num_layers();

  std::vector<VerificationReport> reports;
  VerifyOptions options;
  options.seed = f.seed;

  // Thresholds at half the measured values exercise the inequality branch.
  const DataMeasurements m = measure(net, data, xi);
  AugmentationParams half(q);
  for (std::size_t i = 1; i < net.depth(); ++i) half.set_s(2 * i, 0.5 * m.t[i]);
  for (std::size_t from = 1; from <= q; ++from)
    for (std::size_t to = from; to <= q; ++to) half.set_kappa(to, from, 0.5 * m.sigma(to, from));
  const double gamma = m.gamma > 0.0 ? m.gamma : 1.0;
  reports.push_back(verify_upper_bound(net, data, half, gamma, f.probes, xi, options));

  Rng rng(f.seed);
  std::size_t used = 0;
  for (std::size_t k = 0; k < data.size() && used < f.points; ++k) {
    const Example& ex = data[k];
    const double mx = margin(net.forward(ex.x), ex.y);
    if (!(mx > 0.0)) continue;
    ++used;
    VerifyOptions point = options;
    point.seed = rng.next_u64();
    const LayerTrace trace = forward_trace(net, ex.x);
    reports.push_back(verify_release_lipschitz(net, ex.x, ex.y, 2.0 * mx,
                                               params_from_trace(trace, xi), f.probes, point));
    std::vector<double> nu = rng.normal_vector(ex.x.size());
    DenseVector dir(std::move(nu));
    dir = (0.1 / std::max(dir.norm(), 1e-300)) * dir;
    reports.push_back(verify_telescoping(net, ex.x, dir, point));
    reports.push_back(verify_finite_change(net, q, ex.x, dir, point));
    reports.push_back(verify_jacobian_fd(net, ex.x, 1e-4, false, point));
    reports.push_back(verify_chain_rule(net, ex.x, point));
  }
  reports.push_back(verify_stack_upper(1000, options));

  std::filesystem::path witness_dir = f.witness_dir;
  if (witness_dir.empty()) {
    witness_dir = f.out.empty() ? std::filesystem::path("verify_witnesses")
                                : std::filesystem::path(f.out + ".witnesses");
  }
  std::string lines;
  bool ok = true;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    std::string path;
    if (!reports[k].witness.empty()) {
      std::filesystem::create_directories(witness_dir);
      path = (witness_dir / (std::to_string(k) + "_" + reports[k].name + ".json")).string();
      write_file(path, reports[k].witness + "\n");
    }
    lines += to_json_line(reports[k], path);
    ok = ok && reports[k].passed();
  }
  if (f.out.empty()) {
    std::cout << lines;
  } else {
    write_file(f.out, lines);
  }
  return ok ? 0 : kExitVerify;
}

struct SweepFlags {
  DataFlags data;
  std::string depths = "4,8,12,16";
  TrainConfig config;
  std::string out;
  std::string model_dir;
};

std::vector<std::size_t> parse_depths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.empty() || value == 0) {
      throw UsageError("--depths must be a comma-separated list of positive integers");
    }
    out.push_back(value);
  }
  if (out.empty()) throw UsageError("--depths is empty");
  return out;
}

int cmd_depth_sweep(const SweepFlags& f) {
  const std::vector<std::size_t> depths = parse_depths(f.depths);
  const SplitDataset split = load_split(f.data, f.config.seed);
  std::ostringstream csv;
  csv << "depth,leading_term,spectral_baseline,log_ratio\n";
  for (std::size_t depth : depths) {
    TrainConfig config = f.config;
    config.depth = depth;
    config.dataset = f.data.spec();
    const TrainResult result = train(config, split);
    if (!f.model_dir.empty()) {
      std::filesystem::create_directories(f.model_dir);
      const ModelFile model{result.net, {config.seed, fnv1a_hex(config.canonical())}};
      save_model((std::filesystem::path(f.model_dir) / ("depth_" + std::to_string(depth) + ".json")).string(),
                 model);
    }
    const LeadingTerms lead = leading_term(result.net, split.train);
    double gamma = std::numeric_limits<double>::infinity();
    for (std::size_t k : lead.index) {
      gamma = std::min(gamma, margin(result.net.forward(split.train[k].x), split.train[k].y));
    }
    const double spectral = spectral_baseline(result.net, gamma);
    csv << depth << ',' << format_double(lead.aggregate) << ',' << format_double(spectral) << ','
        << format_double(std::log(lead.aggregate) - std::log(spectral)) << '\n';
    std::cout << "depth " << depth << " train_acc "
              << format_double(result.metrics.rows.back().train_acc) << "\n";
  }
  write_file(f.out, csv.str());
  return 0;
}

struct HistogramFlags {
  DataFlags data;
  std::string model;
  std::size_t top_k = 100;
  std::string out;
};

int cmd_histogram(const HistogramFlags& f) {
  const ModelFile model = load_model(f.model);
  const Examples data = load_examples(f.data);
  check_compatible(model.net, data);
  const LeadingTerms lead = leading_term(model.net, data);
  std::vector<std::size_t> order(lead.value.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lead.value[a] > lead.value[b]; });
  std::ostringstream csv;
  csv << "# excluded_nonpositive_margin=" << lead.excluded.size() << "\n";
  csv << "index,leading_term\n";
  for (std::size_t k = 0; k < order.size() && k < f.top_k; ++k) {
    csv << lead.index[order[k]] << ',' << format_double(lead.value[order[k]]) << '\n';
  }
  write_file(f.out, csv.str());
  return 0;
}

struct DatasetFlags {
  DataFlags data;
  std::string out;
};

int cmd_dataset(const DatasetFlags& f) {
  if (!is_builtin(f.data.dataset)) throw UsageError("dataset: --dataset must be a built-in name");
  write_file(f.out, dataset_to_csv(load_examples(f.data)));
  return 0;
}

void add_train_options(CLI::App* cmd, TrainConfig& c) {
  cmd->add_option("--depth", c.depth, "Number of weight matrices")->capture_default_str();
  cmd->add_option("--width", c.width, "Hidden width")->capture_default_str();
  cmd->add_option("--lambda", c.lambda, "Penalty coefficient")->capture_default_str();
  cmd->add_option("--sigma-threshold", c.sigma_threshold, "Penalty gate on ||J||_F^2")
      ->capture_default_str();
  cmd->add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", c.learning_rate, "Initial learning rate")->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size, "Mini-batch size")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Initialization and shuffling seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lipaug: data-dependent generalization bounds for smooth networks"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a network and write model + metrics");
  train_flags.data.add_to(train_cmd, false);
  add_train_options(train_cmd, train_flags.config);
  train_cmd->add_option("--activation", train_flags.activation, "tanh or softplus")
      ->check(CLI::IsMember({"tanh", "softplus"}))
      ->capture_default_str();
  train_cmd->add_option("--out-model", train_flags.out_model, "Model JSON path")->required();
  train_cmd->add_option("--out-metrics", train_flags.out_metrics, "Metrics CSV path")->required();

  BoundFlags bound_flags;
  auto* bound_cmd = app.add_subcommand("bound", "Evaluate the generalization bound");
  bound_flags.data.add_to(bound_cmd, true);
  bound_cmd->add_option("--model", bound_flags.model, "Model JSON path")->required();
  bound_cmd->add_option("--delta", bound_flags.delta, "Confidence parameter")
      ->check(CLI::Range(1e-300, 1.0 - 1e-16))
      ->capture_default_str();
  bound_cmd->add_option("--xi", bound_flags.xi, "Offset xi (default 1/r^2)")
      ->check(CLI::PositiveNumber);
  bound_cmd->add_flag("--relu-variant", bound_flags.relu_variant,
                      "Use pre-activation margins instead of the smoothness term");
  bound_cmd->add_option("--ref-matrices", bound_flags.refs, "Reference matrices")
      ->check(CLI::IsMember({"zero", "self"}))
      ->capture_default_str();
  bound_cmd->add_option("--out", bound_flags.out, "Report JSON path (default stdout)");

  VerifyFlags verify_flags;
  auto* verify_cmd = app.add_subcommand("verify", "Run the verification checks on a model");
  verify_flags.data.add_to(verify_cmd, true);
  verify_cmd->add_option("--model", verify_flags.model, "Model JSON path")->required();
  verify_cmd->add_option("--probes", verify_flags.probes, "Probe pairs per released node")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_flags.seed, "Probe seed")->capture_default_str();
  verify_cmd->add_option("--points", verify_flags.points, "Dataset points for per-point checks")
      ->capture_default_str();
  verify_cmd->add_option("--out", verify_flags.out, "JSON-lines report path (default stdout)");
  verify_cmd->add_option("--witness-dir", verify_flags.witness_dir, "Directory for witnesses");

  SweepFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("depth-sweep", "Train one model per depth and compare");
  sweep_flags.data.add_to(sweep_cmd, false);
  add_train_options(sweep_cmd, sweep_flags.config);
  sweep_cmd->add_option("--depths", sweep_flags.depths, "Comma-separated depths")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_flags.out, "CSV path")->required();
  sweep_cmd->add_option("--model-dir", sweep_flags.model_dir,
                        "Also save each model as depth_<d>.json here");

  HistogramFlags hist_flags;
  auto* hist_cmd = app.add_subcommand("histogram", "Top-k per-example leading terms");
  hist_flags.data.add_to(hist_cmd, true);
  hist_cmd->add_option("--model", hist_flags.model, "Model JSON path")->required();
  hist_cmd->add_option("--top-k", hist_flags.top_k, "Rows to emit")->capture_default_str();
  hist_cmd->add_option("--out", hist_flags.out, "CSV path")->required();

  DatasetFlags dataset_flags;
  auto* dataset_cmd = app.add_subcommand("dataset", "Write a built-in dataset as CSV");
  dataset_flags.data.add_to(dataset_cmd, true);
  dataset_cmd->add_option("--out", dataset_flags.out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    for (auto* sub : app.get_subcommands()) std::cerr << sub->help();
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_flags);
    if (bound_cmd->parsed()) return cmd_bound(bound_flags);
    if (verify_cmd->parsed()) return cmd_verify(verify_flags);
    if (sweep_cmd->parsed()) return cmd_depth_sweep(sweep_flags);
    if (hist_cmd->parsed()) return cmd_histogram(hist_flags);
    if (dataset_cmd->parsed()) return cmd_dataset(dataset_flags);
  } catch (const PreactivationMarginError& e) {
    std::cerr << "error: " << e.what() << " (layer " << e.layer() << ")\n";
    return kExitMargin;
  } catch (const MarginError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMargin;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
