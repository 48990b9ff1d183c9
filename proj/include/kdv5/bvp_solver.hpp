#pragma once

// Direct solve of eps^2 u'''' + u'' + 3u^2 - c u = 0 on [0, L] for the
// symmetric generalized solitary wave, and measurement of its oscillatory tail.
//
// Discretisation: uniform grid, 5-point fourth difference, 3-point second
// difference. Ghost values mirror about both ends (u_{-k} = u_k,
// u_{n+k} = u_{n-k}), which imposes u' = u''' = 0 at x = 0 and x = L.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kdv5/stokes_smoothing.hpp"

namespace kdv5 {

struct SolverConfig {
  double epsilon = 0.1;
  double c_value = 4.16;
  double half_length = 15.0;
  double grid_spacing = 0.005;
  double newton_tol = 1e-12;  // on the scaled residual, see GridSolution
  double step_tol = 1e-11;    // last Newton update relative to max|u|
  int max_iters = 50;
  double gamma = 1.0;  // sech width the comparison formulas use
};

/// c = 4 gamma^2 + 16 gamma^4 eps^2, L = max(15, 10 + 20 pi eps), h = eps / 20.
SolverConfig default_config(double epsilon, double gamma = 1.0);

/// Shortest admissible half length 10 + 10 (2 pi eps).
double minimum_half_length(double epsilon);

/// Throws ResolutionError unless h <= eps/10 and L >= 10 + 10 (2 pi eps).
void validate(const SolverConfig& config);

struct GridSolution {
  std::vector<double> nodes;
  std::vector<double> u;
  // max |R_i| / ((16 eps^2/h^4 + 4/h^2 + c + 3 max|u|) max|u|)
  double residual_norm = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<double> step_history;  // max|du| / max|u| per Newton step

  double spacing() const { return nodes.size() > 1 ? nodes[1] - nodes[0] : 0.0; }
  double half_length() const { return nodes.empty() ? 0.0 : nodes.back(); }
  /// Linear interpolation, extended evenly about both ends.
  double value_at(double x) const;
  /// Largest r_{k+1} / r_k^2 over the last Newton steps (quadratic-convergence constant).
  double newton_constant() const;
};

/// Discrete residual of the full equation at every node.
std::vector<double> discrete_residual(const SolverConfig& config, const std::vector<double>& u);
double scaled_residual_norm(const SolverConfig& config, const std::vector<double>& u);

/// Newton iteration until both the scaled residual and the last update meet
/// their tolerances. The residual alone is too lax at fine h, where its
/// scale is dominated by eps^2/h^4. Starts from initial_guess (interpolated onto the new grid) or,
/// when null, from 2 g^2 sech^2(g x) with c = 4 g^2.
GridSolution solve(const SolverConfig& config, const GridSolution* initial_guess = nullptr);

struct BoundaryClosure {
  std::array<std::string, 4> constraints;
  std::string ghost_rule;
};

BoundaryClosure boundary_conditions(const SolverConfig& config);

/// Centered-difference values of u'(0), u'''(0), u'(L), u'''(L) for a
/// function of x, step = config.grid_spacing.
std::array<double, 4> boundary_residuals(const std::function<double(double)>& u, const SolverConfig& config);

/// Phase x0 such that A sin((x - x0)/eps) is stationary at x = L.
double closure_tail_phase(double half_length, double epsilon);

/// Far-field wavenumber: positive root of eps^2 k^4 - k^2 - c = 0.
double tail_wavenumber(double epsilon, double c_value);

struct TailMeasurement {
  double epsilon = 0.0;
  double amplitude_measured = 0.0;
  double amplitude_predicted = 0.0;
  double wavelength_measured = 0.0;
  double half_length = 0.0;
  double grid_spacing = 0.0;
  double u_at_zero = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  double discretization_error = -1.0;  // < 0 when not estimated
};

/// |Lambda| pi eps^{-2} e^{-pi/(2 gamma eps)}: the symmetric solution carries
/// half of the one-sided tail on each side.
double symmetric_tail_amplitude(double epsilon, double gamma, double lambda_const);

/// Amplitude (max |u|) and wavelength (zero crossings) over the last two
/// nominal wavelengths [L - 4 pi eps, L]. Throws WindowContaminated when the
/// core there is not below 10% of the predicted tail.
TailMeasurement measure_tail(const GridSolution& sol, const SolverConfig& config,
                             double lambda_const = kDefaultLambda);

struct MinimalTailResult {
  SolverConfig config;
  GridSolution solution;
  TailMeasurement measurement;
  std::vector<std::array<double, 2>> scan;  // (L, amplitude)
};

struct MinimalTailOptions {
  int scan_points = 8;
  bool estimate_error = true;
  double lambda_const = kDefaultLambda;
};

/// Picks the member of the symmetric family with the smallest tail: scans L
/// over half a tail wavelength from base.half_length, fits
/// 1/A^2 = a + b cos 2kL + c sin 2kL and re-solves at the maximiser.
MinimalTailResult solve_minimal_tail(const SolverConfig& base, const GridSolution* guess = nullptr,
                                     const MinimalTailOptions& options = {});

struct SweepOptions {
  double gamma = 1.0;
  double grid_ratio = 20.0;     // h = eps / grid_ratio
  double domain_length = 0.0;   // <= 0: default_config's L
  bool continuation = true;     // largest eps first, previous solution as guess
  MinimalTailOptions tail;
};

/// One minimal-tail solve per eps, returned in the order solved (descending eps).
std::vector<MinimalTailResult> measure_sweep(std::vector<double> epsilons, const SweepOptions& options = {});

struct ExponentFit {
  double slope = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  double predicted_slope = 0.0;  // -pi / (2 gamma)
};

inline constexpr std::size_t kMinFitMeasurements = 4;
inline constexpr double kMinFitRSquared = 0.99;

/// Least squares of log(amplitude eps^2) on 1/eps.
ExponentFit fit_exponent(const std::vector<TailMeasurement>& measurements, double gamma);

nlohmann::json to_json(const TailMeasurement& m);
std::string solution_csv(const GridSolution& sol);

}  // namespace kdv5
