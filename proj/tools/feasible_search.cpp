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

// Offline search for stored reference points. Rejection-samples uniform
// points in each problem box and prints the first feasible hit per errata
// mode in the format of src/reference_points.inc.

#include <cstdlib>
#include <iostream>

#include "cbo/format.hpp"
#include "cbo/problems.hpp"
#include "cbo/sampling.hpp"

int main(int argc, char** argv) {
  const std::size_t samples = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1000000;
  constexpr std::size_t kChunk = 100000;
  for (cbo::ProblemId id : cbo::all_problem_ids()) {
    for (cbo::ErrataMode mode : {cbo::ErrataMode::verbatim, cbo::ErrataMode::corrected}) {
      if (mode == cbo::ErrataMode::corrected && !cbo::has_errata(id)) continue;
      const cbo::ProblemSpec spec = cbo::make_problem(id, mode);
      std::size_t hits = 0;
      std::vector<double> first;
      for (std::size_t start = 0; start < samples; start += kChunk) {
        const auto design = cbo::uniform_design(kChunk, spec.dimension, 20260101 + start);
        const cbo::Matrix pts = cbo::scale_to_bounds(design, spec);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
          std::vector<double> x(pts.row(i).data(), pts.row(i).data() + pts.cols());
          if (cbo::evaluate(spec, x).feasible) {
            if (hits == 0) first = x;
            ++hits;
          }
        }
      }
      std::cerr << spec.name << " [" << cbo::to_string(mode) << "] feasible fraction "
                << static_cast<double>(hits) / static_cast<double>(samples) << '\n';
      if (hits == 0) continue;
      const cbo::ProblemSpec other = cbo::make_problem(
          id, mode == cbo::ErrataMode::verbatim ? cbo::ErrataMode::corrected
                                                : cbo::ErrataMode::verbatim);
      bool other_ok = false;
      try {
        other_ok = cbo::evaluate(other, first).feasible;
      } catch (const std::exception&) {
      }
      const bool verbatim_ok = mode == cbo::ErrataMode::verbatim || other_ok;
      const bool corrected_ok = mode == cbo::ErrataMode::corrected || other_ok;
      std::cout << "{ProblemId::" << spec.name << ", " << (verbatim_ok ? "true" : "false")
                << ", " << (corrected_ok ? "true" : "false") << ", {";
      for (std::size_t j = 0; j < first.size(); ++j)
        std::cout << (j ? ", " : "") << cbo::format_number(first[j]);
      std::cout << "}},\n";
    }
  }
}
