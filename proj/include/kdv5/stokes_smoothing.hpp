#pragma once

// Smooth switching of the exponentially small remainder R_N ~ S(theta) e^{-i(x - sigma)/eps}
// across the Stokes line theta = -pi/2, chi = x - sigma = r e^{i theta}.

#include <string>
#include <vector>

#include "kdv5/complex_eval.hpp"

namespace kdv5 {

inline constexpr double kDefaultLambda = -19.97;
inline constexpr int kBetaExponent = 2;

struct StokesFrame {
  double r = 0.0;      // |chi|, fixed while crossing
  double theta = 0.0;  // reference angle (the crossing sits at -pi/2)
  double rho = 0.0;    // N = r / (2 eps) + rho
  double epsilon = 0.0;
  double lambda_const = kDefaultLambda;
  int beta_exponent = kBetaExponent;
};

/// Frame for the crossing of the real axis at x = 0: r = pi / (2 gamma) and
/// rho taken from optimal_N.
StokesFrame crossing_frame(double epsilon, double gamma = 1.0, double lambda_const = kDefaultLambda);

/// Throws ValidationError unless r > 0, eps > 0 and |rho| <= 1.
void validate(const StokesFrame& frame);

/// dS/dtheta = K exp[-(r/eps){1 - i e^{i theta} + i theta + i pi/2}
///                   + i{-2 rho (theta + pi/2) - theta (beta + 1)}],
/// K = Lambda sqrt(r pi) / (sqrt 2 eps^{beta + 1/2}).
Complex multiplier_rhs(const StokesFrame& frame, double theta);

struct StokesSample {
  double theta = 0.0;
  double eta = 0.0;  // (theta + pi/2) / sqrt(eps)
  Complex S;
  Complex S_closed;  // erf_profile at the same eta
};

struct StokesProfile {
  std::vector<StokesSample> samples;
  Complex jump_numeric;
  Complex jump_closed_form;
  Complex pre_stokes_constant{0.0, 0.0};
  int worst_refinements = 0;
};

struct ThetaSpan {
  double lo;
  double hi;
};

inline constexpr int kMinProfileSteps = 1000;
inline constexpr double kQuadratureTolerance = 1e-8;

/// Integrates multiplier_rhs over theta_span, sampling S at steps + 1 evenly
/// spaced angles. Each sample interval is refined by interval doubling until
/// the relative change falls below kQuadratureTolerance.
StokesProfile integrate_multiplier(const StokesFrame& frame, ThetaSpan span, int steps);

/// Inner-zone smoothing in closed form (pre-Stokes constant 0):
///   S = Lambda sqrt(pi) / (sqrt 2 eps^beta) e^{pi i (beta+1)/2} int_{-inf}^{sqrt(r) eta} e^{-s^2/2} ds.
Complex erf_profile(double eta, const StokesFrame& frame);

/// [S] = Lambda pi e^{pi i (beta+1)/2} / eps^beta  (= Lambda pi e^{3 pi i/2} / eps^2).
Complex stokes_jump(double epsilon, double lambda_const, int beta_exponent = kBetaExponent);

/// Real tail from both Stokes lines: -(2 Lambda pi / eps^2) e^{-pi/(2 gamma eps)} sin(x / eps).
double exp_tail(double x, double epsilon, double gamma, double lambda_const);

/// One-sided amplitude 2 |Lambda| pi eps^{-2} e^{-pi/(2 gamma eps)}.
double exp_tail_amplitude(double epsilon, double gamma, double lambda_const);

/// Switched-on remainder from the upper singularity,
/// [S] e^{-i(x - sigma)/eps}; its conjugate comes from the lower one.
Complex upper_remainder(double x, double epsilon, double gamma, double lambda_const);

/// upper_remainder plus its conjugate partner; real for real x.
Complex assembled_tail(double x, double epsilon, double gamma, double lambda_const);

/// eta, Re S, Im S, closed-form Re S, closed-form Im S.
std::string profile_csv(const StokesProfile& profile);

}  // namespace kdv5
