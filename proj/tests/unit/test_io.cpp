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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "lipaug/errors.hpp"
#include "lipaug/io.hpp"
#include "support/oracles.hpp"

using namespace lipaug;

namespace {

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("format_double and fnv1a") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("model files round-trip byte for byte") {
  Rng rng(211);
  for (Activation act : {Activation::kTanh, Activation::kSoftplus}) {
    const ModelFile model{oracle::random_net(rng, {3, 7, 5, 2}, act, 1.3), {42, "abc"}};
    const std::string text = model_to_json(model);
    CHECK(text.back() == '\n');
    const ModelFile back = model_from_json(text);
    CHECK(model_to_json(back) == text);
    CHECK(back.metadata.seed == 42);
    CHECK(back.metadata.config_digest == "abc");
    CHECK(back.net.activation() == act);
    CHECK(back.net.activation_deriv_lipschitz() == model.net.activation_deriv_lipschitz());
    for (std::size_t l = 0; l < 3; ++l) CHECK(back.net.weights()[l] == model.net.weights()[l]);
  }

  const auto path = (std::filesystem::temp_directory_path() / "lipaug_test_io_model.json").string();
  const ModelFile model{oracle::random_net(rng, {2, 3, 2}), {}};
  save_model(path, model);
  const std::string first = read_file(path);
  save_model(path, load_model(path));
  CHECK(read_file(path) == first);
  std::remove(path.c_str());
}

TEST_CASE("malformed model files raise IoError") {
  Rng rng(223);
  const std::string good = model_to_json({oracle::random_net(rng, {2, 3, 2}), {}});
  CHECK_THROWS_AS(model_from_json("{"), IoError);
  CHECK_THROWS_AS(model_from_json("{}"), IoError);
  // A weight hand-edited to NaN.
  const auto pos = good.find("\"weights\"");
  const auto num = good.find_first_of("-0123456789", pos);
  const auto end = good.find_first_of(",\n", num);
  std::string nan = good;
  nan.replace(num, end - num, "NaN");
  CHECK_THROWS_AS(model_from_json(nan), IoError);
  CHECK_THROWS_AS(model_from_json(replace_once(good, "\"format_version\": 1", "\"format_version\": 2")), IoError);
  CHECK_THROWS_AS(model_from_json(replace_once(good, "\"tanh\"", "\"relu\"")), IoError);
  // Drop one row of the first matrix so the layer shapes no longer chain.
  const ModelFile shaped{SmoothNet({DenseMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}}),
                                    DenseMatrix::from_rows({{1.0, 1.0}})},
                                   Activation::kTanh),
                         {}};
  const std::string two = model_to_json(shaped);
  CHECK_THROWS_AS(model_from_json(replace_once(two, "[\n        3.0,\n        4.0\n      ]", "[\n        3.0\n      ]")),
                  IoError);
  CHECK_THROWS_AS(load_model("/nonexistent/dir/model.json"), IoError);
}

TEST_CASE("dataset CSV round-trip and errors") {
  Rng rng(227);
  Examples data;
  for (int k = 0; k < 20; ++k) data.push_back({oracle::random_vector(rng, 3), rng.index(4)});
  const std::string csv = dataset_to_csv(data);
  CHECK(csv.rfind("f1,f2,f3,label\n", 0) == 0);
  const Examples back = dataset_from_csv(csv);
  REQUIRE(back.size() == data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    CHECK(back[k].x == data[k].x);
    CHECK(back[k].y == data[k].y);
  }
  CHECK(dataset_to_csv(back) == csv);
  CHECK(dataset_from_csv("f1,label\r\n0.5,1\r\n\r\n").size() == 1);

  CHECK_THROWS_AS(dataset_from_csv(""), IoError);
  CHECK_THROWS_AS(dataset_from_csv("x,label\n1,0\n"), IoError);
  CHECK_THROWS_AS(dataset_from_csv("f1,f2\n1,0\n"), IoError);
  CHECK_THROWS_AS(dataset_from_csv("f1,label\n"), IoError);
  CHECK_THROWS_AS(dataset_from_csv("f1,label\n1,2,0\n"), IoError);
  CHECK_THROWS_AS(dataset_from_csv("f1,label\nabc,0\n"), IoError);
  CHECK_THROWS_AS(dataset_from_csv("f1,label\ninf,0\n"), IoError);
  CHECK_THROWS_AS(dataset_from_csv("f1,label\n1,-1\n"), IoError);
  CHECK_THROWS_AS(dataset_from_csv("f1,label\n1,0.5\n"), IoError);
  CHECK_THROWS_AS(dataset_to_csv({{DenseVector{1.0}, 0}, {DenseVector{1.0, 2.0}, 0}}), ShapeError);
}
