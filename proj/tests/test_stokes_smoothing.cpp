#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "kdv5/errors.hpp"
#include "kdv5/stokes_smoothing.hpp"

using namespace kdv5;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kLine = -kPi / 2;

StokesFrame frame(double eps, double rho = 0.0, double lambda = kDefaultLambda) {
  StokesFrame f;
  f.r = kPi / 2;
  f.theta = kLine;
  f.rho = rho;
  f.epsilon = eps;
  f.lambda_const = lambda;
  return f;
}

// plain composite trapezoid on a fine grid, independent of the library's Simpson
Complex trapezoid(const StokesFrame& f, double a, double b, int n) {
  const double h = (b - a) / n;
  Complex acc = 0.5 * (multiplier_rhs(f, a) + multiplier_rhs(f, b));
  for (int i = 1; i < n; ++i) acc += multiplier_rhs(f, a + i * h);
  return acc * h;
}
}  // namespace

TEST_CASE("multiplier integrand") {
  const auto f = frame(0.1);
  const double K = std::abs(f.lambda_const) * std::sqrt(f.r * kPi) / (std::sqrt(2.0) * std::pow(0.1, 2.5));
  CHECK(std::abs(multiplier_rhs(f, kLine)) == doctest::Approx(K).epsilon(1e-12));
  CHECK(K == doctest::Approx(9919.5).epsilon(1e-4));
  // |dS/dtheta| = K exp(-(r/eps)(1 + sin theta))
  for (double d : {-0.5, 0.5}) {
    const double expected = K * std::exp(-(f.r / f.epsilon) * (1.0 + std::sin(kLine + d)));
    CHECK(std::abs(multiplier_rhs(f, kLine + d)) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(multiplier_rhs(f, kLine + d)) < 0.2 * K);
  }
  CHECK(multiplier_rhs(frame(0.1, 0.0, 0.0), kLine) == Complex(0.0, 0.0));
  CHECK_THROWS_AS(multiplier_rhs(f, 0.5 * kPi), ValidationError);
  CHECK_THROWS_AS(multiplier_rhs(f, -1.5 * kPi), ValidationError);
}

TEST_CASE("closed-form profile") {
  const auto f = frame(0.1);
  const double inf = std::numeric_limits<double>::infinity();
  const Complex jump = stokes_jump(0.1, f.lambda_const);
  CHECK(std::abs(erf_profile(-inf, f)) == 0.0);
  CHECK(std::abs(erf_profile(inf, f) - jump) < 1e-9 * std::abs(jump));
  CHECK(std::abs(erf_profile(0.0, f) - 0.5 * jump) < 1e-12 * std::abs(jump));
  CHECK(std::abs(erf_profile(-8.0, f)) < 1e-6 * std::abs(jump));
  CHECK(std::abs(erf_profile(8.0, f) - jump) < 1e-6 * std::abs(jump));
  // monotone in the imaginary direction of the jump
  double last = -1.0;
  for (double eta = -4.0; eta <= 4.0; eta += 0.25) {
    const double v = erf_profile(eta, f).imag();
    CHECK(v > last);
    last = v;
  }
}

TEST_CASE("jump constant") {
  const Complex jump = stokes_jump(0.1, -19.97);
  CHECK(std::abs(jump.real()) < 1e-9);
  CHECK(jump.imag() == doctest::Approx(19.97 * kPi * 100.0).epsilon(1e-12));
  CHECK(jump.imag() == doctest::Approx(6273.76).epsilon(1e-5));
  CHECK(std::abs(stokes_jump(0.05, -19.97)) == doctest::Approx(4.0 * std::abs(jump)).epsilon(1e-12));
  CHECK_THROWS_AS(stokes_jump(0.0, 1.0), ValidationError);
}

TEST_CASE("exponentially small tail") {
  CHECK(exp_tail_amplitude(0.1, 1.0, -19.97) == doctest::Approx(1.889e-3).epsilon(1e-3));
  CHECK(exp_tail_amplitude(0.05, 1.0, -19.97) == doctest::Approx(1.13e-9).epsilon(5e-3));
  CHECK(exp_tail(0.0, 0.1, 1.0, -19.97) == 0.0);
  const double eps = 0.1;
  for (double x : {0.3, 1.7, 4.2}) {
    CAPTURE(x);
    const double v = exp_tail(x, eps, 1.0, -19.97);
    CHECK(exp_tail(x + 2 * kPi * eps, eps, 1.0, -19.97) == doctest::Approx(v).epsilon(1e-9));
    CHECK(std::abs(v) <= exp_tail_amplitude(eps, 1.0, -19.97) * (1 + 1e-12));
    const Complex assembled = assembled_tail(x, eps, 1.0, -19.97);
    CHECK(std::abs(assembled.imag()) < 1e-15 * exp_tail_amplitude(eps, 1.0, -19.97));
    CHECK(assembled.real() == doctest::Approx(v).epsilon(1e-12));
    CHECK(std::abs(upper_remainder(x, eps, 1.0, -19.97)) ==
          doctest::Approx(0.5 * exp_tail_amplitude(eps, 1.0, -19.97)).epsilon(1e-12));
  }
  // gamma enters through the exponent only
  CHECK(exp_tail_amplitude(0.1, 2.0, -19.97) / exp_tail_amplitude(0.1, 1.0, -19.97) ==
        doctest::Approx(std::exp(kPi / 0.2 - kPi / 0.4)).epsilon(1e-12));
  CHECK_THROWS_AS(exp_tail(0.0, 0.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("crossing frame") {
  const auto f = crossing_frame(0.1);
  CHECK(f.r == doctest::Approx(kPi / 2));
  CHECK(f.theta == doctest::Approx(kLine));
  CHECK(f.rho == doctest::Approx(8.0 - kPi / 0.4));
  CHECK(std::abs(f.rho) <= 0.5 + 1e-12);
  CHECK(crossing_frame(0.1, 2.0).r == doctest::Approx(kPi / 4));
  CHECK_THROWS_AS(crossing_frame(0.0), ValidationError);

  auto bad = f;
  bad.rho = 1.5;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = f;
  bad.r = 0.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  CHECK_NOTHROW(validate(f));
}

TEST_CASE("numerical profile against an independent quadrature") {
  const auto f = crossing_frame(0.1);
  const ThetaSpan span{kLine - 1.0, kLine + 1.0};
  const auto p = integrate_multiplier(f, span, 1000);
  REQUIRE(p.samples.size() == 1001);
  CHECK(p.samples.front().S == Complex(0.0, 0.0));
  CHECK(p.samples.front().theta == doctest::Approx(span.lo));
  CHECK(p.samples.back().theta == doctest::Approx(span.hi));
  CHECK(p.samples[500].eta == doctest::Approx(0.0).epsilon(1e-12));

  const Complex oracle = trapezoid(f, span.lo, span.hi, 200000);
  CHECK(std::abs(p.jump_numeric - oracle) < 1e-7 * std::abs(oracle));
  const Complex half = trapezoid(f, span.lo, kLine, 100000);
  CHECK(std::abs(p.samples[500].S - half) < 1e-7 * std::abs(oracle));
  CHECK(p.worst_refinements >= 1);
}

TEST_CASE("profile symmetry about the Stokes line") {
  for (double eps : {0.1, 0.05}) {
    auto f = crossing_frame(eps);
    const auto p = integrate_multiplier(f, {kLine - 1.0, kLine + 1.0}, 2000);
    CAPTURE(eps);
    // Im S reaches half its jump on the line; Re S returns to zero
    CHECK(p.samples[1000].S.imag() == doctest::Approx(0.5 * p.jump_numeric.imag()).epsilon(1e-9));
    CHECK(std::abs(p.jump_numeric.real()) < 1e-9 * std::abs(p.jump_numeric));
    // purely imaginary jump in the direction of the closed form
    CHECK(p.jump_numeric.imag() * p.jump_closed_form.imag() > 0.0);
  }
}

TEST_CASE("numerical jump approaches the closed form as eps shrinks") {
  // Regression on the observed finite-eps deficit of the integrand: the ratio
  // was 0.655, 0.776, 0.946 at eps = 0.1, 0.05, 0.025 with rho from crossing_frame.
  double last = 0.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto f = crossing_frame(eps);
    const auto p = integrate_multiplier(f, {kLine - 1.0, kLine + 1.0}, 2000);
    const double ratio = p.jump_numeric.imag() / p.jump_closed_form.imag();
    CAPTURE(eps);
    CHECK(ratio > last);
    CHECK(ratio < 1.0);
    last = ratio;
  }
  CHECK(last == doctest::Approx(0.946).epsilon(0.01));
}

TEST_CASE("zero strength gives a flat profile") {
  const auto f = frame(0.1, 0.0, 0.0);
  const auto p = integrate_multiplier(f, {kLine - 0.5, kLine + 0.5}, 1000);
  for (const auto& s : p.samples) {
    CHECK(s.S == Complex(0.0, 0.0));
    CHECK(s.S_closed == Complex(0.0, 0.0));
  }
  CHECK(p.jump_numeric == Complex(0.0, 0.0));
}

TEST_CASE("integration argument checks") {
  const auto f = crossing_frame(0.1);
  CHECK_THROWS_AS(integrate_multiplier(f, {kLine + 0.1, kLine + 1.0}, 1000), ValidationError);
  CHECK_THROWS_AS(integrate_multiplier(f, {kLine - 1.0, kLine + 1.0}, 999), ValidationError);
  CHECK_THROWS_AS(integrate_multiplier(f, {-1.6 * kPi, kLine + 1.0}, 1000), ValidationError);
  auto bad = f;
  bad.rho = -2.0;
  CHECK_THROWS_AS(integrate_multiplier(bad, {kLine - 1.0, kLine + 1.0}, 1000), ValidationError);
}

TEST_CASE("CSV layout") {
  const auto p = integrate_multiplier(crossing_frame(0.1), {kLine - 0.5, kLine + 0.5}, 1000);
  const auto csv = profile_csv(p);
  CHECK(csv.rfind("eta,re_S,im_S,re_S_closed,im_S_closed\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1002);
}
