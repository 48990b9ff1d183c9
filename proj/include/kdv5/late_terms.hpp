#pragma once

// Late-order behaviour of the series: u_n ~ (-1)^n Lambda Gamma(2n + beta) / chi^{2n + beta}
// with chi = x - sigma, sigma = i pi / (2 gamma).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kdv5/complex_eval.hpp"
#include "kdv5/sech_series.hpp"

namespace kdv5 {

/// Lambda_n = -a_{n,n+1} gamma^{-(2n+2)} / Gamma(2n+2): the strength of the
/// leading pole of u_n at x = sigma in units of the factorial/power ansatz.
std::vector<double> lambda_sequence(const SeriesTable& table);

struct Extrapolation {
  double estimate = 0.0;
  double error_bound = 0.0;
};

/// Richardson elimination of 1/k, ..., 1/k^order corrections, k = i + 1 the
/// 1-based position in seq, using the last order + 1 entries.
Extrapolation richardson_extrapolate(const std::vector<double>& seq, int order);

/// rows[k][j]: order-k extrapolant from the window ending at seq[j]
/// (j >= k). Rows k = 0..max_order.
std::vector<std::vector<double>> richardson_table(const std::vector<double>& seq, int max_order);

struct RatioRow {
  int n = 0;
  double measured = 0.0;   // u_{n+1}(x) / u_n(x)
  double predicted = 0.0;  // same ratio of the conjugate-pair late-term form
};

struct RatioTest {
  std::vector<RatioRow> rows;
  std::vector<int> gaps;  // n skipped because u_n(x) ~ 0
};

RatioTest ratio_test(const SeriesTable& table, double x);

/// chi^2 implied by a measured ratio at x = 0: -(2n+2)(2n+3) / ratio.
double chi_squared_from_ratio(const RatioRow& row);

struct BetaFitEntry {
  int beta = 0;
  double drift = 0.0;  // |slope| of log|a_{n,n+1}|/Gamma(2n+beta) against log n
};

struct BetaFit {
  std::vector<BetaFitEntry> entries;
  int best_beta = 0;
};

/// Tries beta in [beta_lo, beta_hi] and picks the one whose rescaled top
/// coefficients are closest to constant over n in [n_lo, n_hi].
BetaFit fit_beta(const SeriesTable& table, int n_lo, int n_hi, int beta_lo = 0, int beta_hi = 4);

struct StokesRay {
  Complex origin;
  Complex direction;  // unit vector
  Complex real_axis_crossing;
};

/// The Stokes lines Im[-chi^2] = 0, Re[-chi^2] >= 0: down the imaginary axis
/// from +sigma and up from -sigma.
std::array<StokesRay, 2> stokes_line_geometry(double gamma);

/// True when x lies on either Stokes line (to tolerance tol).
bool on_stokes_line(Complex x, double gamma, double tol = 1e-12);

/// For real x continued left to right: -1 before the crossing at 0, 0 on it, +1 past it.
int stokes_side(double x);

struct SingulantReport {
  Complex sigma;
  int chi_prime = 1;
  int beta_exponent = 2;
  std::vector<double> lambda_sequence;
  std::vector<std::vector<double>> lambda_extrapolants;
  Extrapolation lambda_final;
  BetaFit beta_fit;
  RatioTest ratio_table;
};

inline constexpr int kMinLambdaOrders = 5;

/// Full late-term analysis. Needs n_max >= 5 and more than `order` terms.
SingulantReport analyze_late_terms(const SeriesTable& table, int order = 3);

nlohmann::json to_json(const SingulantReport& report);
std::string lambda_csv(const SingulantReport& report);

}  // namespace kdv5
