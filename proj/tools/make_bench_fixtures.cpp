// Copyright 2026 The bayeskit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

// Regenerates tests/fixtures/bench_oracles.json: grid-oracle optima of the
// benchmark functions together with the grid resolution that produced them.
//
//   make_bench_fixtures [output-path]

#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "bayeskit/bench.hpp"
#include "json.hpp"

int main(int argc, char** argv) {
  // Roughly 10^6 evaluations per function.
  const std::vector<std::pair<std::string, int>> jobs = {
      {"sinus-1d", 1000001}, {"branin-2d", 1001}, {"sphere-2", 1001}};
  nlohmann::json out;
  out["generator"] = "make_bench_fixtures";
  out["method"] = "exhaustive grid (ends included) + local ascent polish with central differences";
  out["functions"] = nlohmann::json::array();
  for (const auto& [name, res] : jobs) {
    const auto opt = bayeskit::grid_oracle_optimum(bayeskit::make_test_function(name), res);
    // Doubles are written in shortest round-trip form.
    nlohmann::json x = nlohmann::json::array();
    for (Eigen::Index i = 0; i < opt.x.size(); ++i) x.push_back(opt.x[i]);
    out["functions"].push_back({{"name", name},
                                {"resolution", res},
                                {"x", x},
                                {"value", opt.value}});
  }
  const std::string text = out.dump(2) + "\n";
  if (argc > 1) {
    std::ofstream f(argv[1]);
    if (!f) {
      std::cerr << "cannot open " << argv[1] << "\n";
      return 1;
    }
    f << text;
  } else {
    std::cout << text;
  }
  return 0;
}
