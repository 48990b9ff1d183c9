#include "kdv5/stokes_smoothing.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kdv5/errors.hpp"

namespace kdv5 {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

double prefactor_modulus(const StokesFrame& f) {
  return std::sqrt(f.r * kPi) / (std::sqrt(2.0) * std::pow(f.epsilon, f.beta_exponent + 0.5));
}

// Simpson on n panels (n even).
Complex simpson(const StokesFrame& f, double a, double b, int n) {
  const double h = (b - a) / n;
  Complex acc = multiplier_rhs(f, a) + multiplier_rhs(f, b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * multiplier_rhs(f, a + i * h);
  return acc * (h / 3.0);
}

}  // namespace

StokesFrame crossing_frame(double epsilon, double gamma, double lambda_const) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  StokesFrame f;
  f.r = kPi / (2.0 * gamma);
  f.theta = -kPi / 2.0;
  f.epsilon = epsilon;
  f.lambda_const = lambda_const;
  f.rho = optimal_N(Complex(0.0, 0.0), epsilon, gamma) - f.r / (2.0 * epsilon);
  return f;
}

void validate(const StokesFrame& f) {
  if (!(f.r > 0.0)) throw ValidationError("Stokes frame: r must be positive");
  if (!(f.epsilon > 0.0)) throw ValidationError("Stokes frame: epsilon must be positive");
  if (!(std::abs(f.rho) <= 1.0)) throw ValidationError("Stokes frame: |rho| must not exceed 1");
  if (!std::isfinite(f.lambda_const)) throw ValidationError("Stokes frame: Lambda must be finite");
}

Complex multiplier_rhs(const StokesFrame& f, double theta) {
  // Valid in the wedge around the line; the real part of the exponent,
  // -(r/eps)(1 + sin theta), is non-positive throughout it.
  if (!(theta > -1.5 * kPi && theta < 0.5 * kPi)) {
    std::ostringstream msg;
    msg << "theta = " << theta << " outside the validity wedge (-3pi/2, pi/2)";
    throw ValidationError(msg.str());
  }
  if (f.lambda_const == 0.0) return {0.0, 0.0};
  const Complex braces = 1.0 - kI * std::exp(kI * theta) + kI * theta + kI * (kPi / 2.0);
  const Complex exponent = -(f.r / f.epsilon) * braces +
                           kI * (-2.0 * f.rho * (theta + kPi / 2.0) - theta * (f.beta_exponent + 1.0));
  if (exponent.real() > 1e-9 * (f.r / f.epsilon)) {
    throw MathError("multiplier_rhs: growing exponent");
  }
  return f.lambda_const * prefactor_modulus(f) * std::exp(exponent);
}

StokesProfile integrate_multiplier(const StokesFrame& f, ThetaSpan span, int steps) {
  validate(f);
  const double line = -kPi / 2.0;
  if (!(span.lo < line && line < span.hi)) {
    throw ValidationError("theta span must contain the Stokes line -pi/2 strictly inside");
  }
  if (steps < kMinProfileSteps) {
    throw ValidationError("integrate_multiplier needs at least " + std::to_string(kMinProfileSteps) + " steps");
  }
  // validity wedge check on the end points
  multiplier_rhs(f, span.lo);
  multiplier_rhs(f, span.hi);

  StokesProfile profile;
  profile.pre_stokes_constant = {0.0, 0.0};
  profile.jump_closed_form = stokes_jump(f.epsilon, f.lambda_const, f.beta_exponent);
  profile.samples.reserve(steps + 1);

  const double sqrt_eps = std::sqrt(f.epsilon);
  const double width = (span.hi - span.lo) / steps;
  const double floor_scale = 1e-12 * std::abs(f.lambda_const) * prefactor_modulus(f) * width;
  constexpr int kMaxDoublings = 20;

  Complex S = profile.pre_stokes_constant;
  auto push = [&](double theta) {
    const double eta = (theta - line) / sqrt_eps;
    profile.samples.push_back({theta, eta, S, profile.pre_stokes_constant + erf_profile(eta, f)});
  };
  push(span.lo);
  for (int i = 0; i < steps; ++i) {
    const double a = span.lo + i * width;
    const double b = (i + 1 == steps) ? span.hi : span.lo + (i + 1) * width;
    int panels = 2;
    Complex coarse = simpson(f, a, b, panels);
    bool converged = false;
    int doublings = 0;
    for (; doublings < kMaxDoublings; ++doublings) {
      panels *= 2;
      const Complex fine = simpson(f, a, b, panels);
      const Complex delta = fine - coarse;
      coarse = fine + delta / 15.0;
      if (std::abs(delta) <= kQuadratureTolerance * std::max(std::abs(fine), floor_scale)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "Stokes multiplier quadrature did not converge on [" << a << ", " << b << "]";
      throw QuadratureFailure(msg.str(), a, b);
    }
    profile.worst_refinements = std::max(profile.worst_refinements, doublings + 1);
    S += coarse;
    push(b);
  }
  profile.jump_numeric = profile.samples.back().S - profile.samples.front().S;
  return profile;
}

Complex erf_profile(double eta, const StokesFrame& f) {
  const double scale = std::abs(f.lambda_const) == 0.0
                           ? 0.0
                           : f.lambda_const * std::sqrt(kPi) / (std::sqrt(2.0) * std::pow(f.epsilon, f.beta_exponent));
  const Complex phase = std::exp(kI * (kPi * (f.beta_exponent + 1.0) / 2.0));
  double gaussian_integral;  // int_{-inf}^{sqrt(r) eta} e^{-s^2/2} ds
  if (eta == -std::numeric_limits<double>::infinity()) {
    gaussian_integral = 0.0;
  } else if (eta == std::numeric_limits<double>::infinity()) {
    gaussian_integral = std::sqrt(2.0 * kPi);
  } else {
    gaussian_integral = std::sqrt(kPi / 2.0) * std::erfc(-std::sqrt(f.r) * eta / std::sqrt(2.0));
  }
  return scale * phase * gaussian_integral;
}

Complex stokes_jump(double epsilon, double lambda_const, int beta_exponent) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  const Complex phase = std::exp(kI * (kPi * (beta_exponent + 1.0) / 2.0));
  return lambda_const * kPi * phase / std::pow(epsilon, beta_exponent);
}

double exp_tail_amplitude(double epsilon, double gamma, double lambda_const) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  return 2.0 * std::abs(lambda_const) * kPi / (epsilon * epsilon) * std::exp(-kPi / (2.0 * gamma * epsilon));
}

double exp_tail(double x, double epsilon, double gamma, double lambda_const) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  return -(2.0 * lambda_const * kPi / (epsilon * epsilon)) * std::exp(-kPi / (2.0 * gamma * epsilon)) *
         std::sin(x / epsilon);
}

Complex upper_remainder(double x, double epsilon, double gamma, double lambda_const) {
  const Complex sigma = upper_singularity(gamma);
  // exactly e^{3 pi i/2} = -i for beta = 2
  const Complex jump = lambda_const * kPi / (epsilon * epsilon) * Complex(0.0, -1.0);
  return jump * std::exp(-kI * (Complex(x, 0.0) - sigma) / epsilon);
}

Complex assembled_tail(double x, double epsilon, double gamma, double lambda_const) {
  const Complex upper = upper_remainder(x, epsilon, gamma, lambda_const);
  return upper + std::conj(upper);
}

std::string profile_csv(const StokesProfile& profile) {
  std::ostringstream out;
  out.precision(17);
  out << "eta,re_S,im_S,re_S_closed,im_S_closed\n";
  for (const auto& s : profile.samples) {
    out << s.eta << ',' << s.S.real() << ',' << s.S.imag() << ',' << s.S_closed.real() << ','
        << s.S_closed.imag() << '\n';
  }
  return out.str();
}

}  // namespace kdv5
