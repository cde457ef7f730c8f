// Copyright 2026 The cbo-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test double for the external PPD protocol. Reads one JSON request per
// line and answers with uniform bucket probabilities.
//
//   fake_predictor [uniform | bad_sum | bad_shape | garbage |
//                   die_after N | slow MS]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "uniform";
  const long arg = argc > 2 ? std::strtol(argv[2], nullptr, 10) : 0;
  std::ios::sync_with_stdio(false);
  std::string line;
  long served = 0;
  while (std::getline(std::cin, line)) {
    if (mode == "die_after" && served >= arg) std::_Exit(3);
    if (mode == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(arg));
    if (mode == "garbage") {
      std::cout << "this is not json" << std::endl;
      ++served;
      continue;
    }
    const auto req = nlohmann::json::parse(line);
    const std::size_t m = req["query_x"].size();
    const std::size_t k = req["targets"].get<std::size_t>();
    std::size_t B = req["edges"].size() - 1;
    if (mode == "bad_shape") B += 1;
    const double p = (mode == "bad_sum" ? 0.9 : 1.0) / static_cast<double>(B);
    std::string bucket_row = "[";
    for (std::size_t b = 0; b < B; ++b) bucket_row += (b ? "," : "") + nlohmann::json(p).dump();
    bucket_row += "]";
    std::string target_block = "[";
    for (std::size_t t = 0; t < k; ++t) target_block += (t ? "," : "") + bucket_row;
    target_block += "]";
    std::string out = "{\"probs\":[";
    for (std::size_t q = 0; q < m; ++q) out += (q ? "," : "") + target_block;
    out += "]}";
    std::cout << out << std::endl;
    ++served;
  }
}
