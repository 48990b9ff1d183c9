#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "kdv5/bvp_solver.hpp"
#include "kdv5/sech_series.hpp"

namespace kdv5 {

enum ExitCode : int { kExitOk = 0, kExitMath = 1, kExitValidation = 2 };

/// Optimal truncation measured against a direct solve at one point.
struct TruncationComparison {
  double epsilon = 0.0;
  double x = 0.0;
  int optimal_n = 0;          // rounding rule N = round(r / 2 eps)
  int smallest_term = 0;      // index of the smallest |eps^{2n} u_n(x)|
  double u_bvp = 0.0;
  std::vector<double> errors;           // |partial_sum(N) - u_bvp|, N = 0..size-1
  std::vector<double> term_magnitudes;  // |eps^{2n} u_n(x)|
  double tail_scale = 0.0;              // symmetric tail amplitude at eps
};

TruncationComparison compare_truncation(const SeriesTable& table, const MinimalTailResult& bvp, double x);
nlohmann::json to_json(const TruncationComparison& cmp);

/// Entry point of the `kdv5` tool. Returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kdv5
