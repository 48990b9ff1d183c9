#include <cmath>
#include <random>

#include "doctest.h"
#include "kdv5/errors.hpp"
#include "kdv5/sech_series.hpp"

using namespace kdv5;

namespace {

SechPolynomial poly(std::initializer_list<std::pair<int, long>> terms, Rational gamma = 1) {
  SechPolynomial p(gamma);
  for (auto [m, a] : terms) p.set(m, Rational(a));
  return p;
}

// Independent oracle: evaluate in long double and differentiate by a
// five-point centered stencil; no use of the closed S-basis identity.
long double eval_ld(const SechPolynomial& p, long double x) {
  const long double g = p.gamma().get_d();
  const long double s = 1.0L / std::cosh(g * x);
  long double acc = 0.0L;
  for (const auto& [m, a] : p.coeffs()) acc += static_cast<long double>(a.get_d()) * std::pow(s * s, m);
  return acc;
}

long double abs_scale(const SechPolynomial& p, long double x) {
  const long double g = p.gamma().get_d();
  const long double s = 1.0L / std::cosh(g * x);
  long double acc = 0.0L;
  for (const auto& [m, a] : p.coeffs()) acc += std::abs(static_cast<long double>(a.get_d())) * std::pow(s * s, m);
  return acc;
}

long double fd_second(const SechPolynomial& p, long double x, long double h = 2e-4L) {
  // 4th-order accurate
  return (-eval_ld(p, x + 2 * h) + 16 * eval_ld(p, x + h) - 30 * eval_ld(p, x) + 16 * eval_ld(p, x - h) -
          eval_ld(p, x - 2 * h)) /
         (12 * h * h);
}

void check_against_fd(const SechPolynomial& p, const SechPolynomial& d2, double rel_tol) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double x = dist(rng);
    const long double oracle = fd_second(p, x);
    const long double value = eval_ld(d2, x);
    const long double scale = std::max<long double>(1.0L, abs_scale(d2, x));
    CHECK(std::abs(static_cast<double>((value - oracle) / scale)) < rel_tol);
  }
}

}  // namespace

TEST_CASE("second derivative in the S basis") {
  SUBCASE("2S -> 8S - 12S^2") {
    const auto p = poly({{1, 2}});
    const auto d2 = second_derivative(p);
    CHECK(d2 == poly({{1, 8}, {2, -12}}));
    check_against_fd(p, d2, 1e-10);
  }
  SUBCASE("S^2 -> 16S^2 - 20S^3") {
    const auto p = poly({{2, 1}});
    const auto d2 = second_derivative(p);
    CHECK(d2 == poly({{2, 16}, {3, -20}}));
    check_against_fd(p, d2, 1e-10);
  }
  SUBCASE("zero maps to zero") { CHECK(second_derivative(SechPolynomial()).is_zero()); }
  SUBCASE("gamma enters as gamma^2") {
    const auto p = poly({{1, 1}}, Rational(3, 2));
    const auto d2 = second_derivative(p);
    CHECK(d2.coefficient(1) == Rational(9));
    CHECK(d2.coefficient(2) == Rational(-27, 2));
    check_against_fd(p, d2, 1e-10);
  }
  SUBCASE("degree rises by exactly one") {
    const auto p = poly({{1, 3}, {4, -7}});
    CHECK(second_derivative(p).degree() == 5);
  }
}

TEST_CASE("fourth derivative") {
  CHECK(fourth_derivative(poly({{1, 2}})) == poly({{1, 32}, {2, -240}, {3, 240}}));
  CHECK(fourth_derivative(poly({{1, 1}})) == poly({{1, 16}, {2, -120}, {3, 120}}));
  CHECK(fourth_derivative(SechPolynomial()).is_zero());

  // cross-check 2S by differencing the finite-difference second derivative
  const auto p = poly({{1, 2}});
  const auto d4 = fourth_derivative(p);
  for (double x : {-1.3, 0.2, 0.9, 2.1}) {
    const long double h = 2e-2L;
    const auto d2 = [&](long double y) { return static_cast<long double>(eval_ld(second_derivative(p), y)); };
    const long double oracle = (-d2(x + 2 * h) + 16 * d2(x + h) - 30 * d2(x) + 16 * d2(x - h) - d2(x - 2 * h)) / (12 * h * h);
    CHECK(static_cast<double>(eval_ld(d4, x)) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-5));
  }
}

TEST_CASE("SechPolynomial invariants") {
  SechPolynomial p;
  CHECK_THROWS_AS(p.set(0, Rational(1)), ValidationError);
  p.set(2, Rational(5));
  p.set(2, Rational(0));
  CHECK(p.is_zero());
  CHECK_THROWS_AS(SechPolynomial(Rational(-1)), ValidationError);
  CHECK_THROWS_AS(poly({{1, 1}}) + poly({{1, 1}}, Rational(2)), ValidationError);
  const auto prod = poly({{1, 2}}) * poly({{1, 3}, {2, 1}});
  CHECK(prod == poly({{2, 6}, {3, 2}}));
}

TEST_CASE("early orders match the closed forms") {
  SeriesTable table;
  auto [u0, c0] = solve_order(table, 0);
  CHECK(u0 == poly({{1, 2}}));
  CHECK(c0 == Rational(4));

  const auto t1 = build_series(1);
  CHECK(t1.u[0] == poly({{1, 2}}));
  CHECK(t1.u[1] == poly({{1, -20}, {2, 30}}));
  CHECK(t1.c == std::vector<Rational>{Rational(4), Rational(16)});

  // u_1 = -10 gamma^2 u_0 + (15/2) u_0^2 and c_1 = c_0^2 at gamma = 2
  const auto t2 = build_series(1, Rational(2));
  CHECK(t2.u[0] == poly({{1, 8}}, Rational(2)));
  CHECK(t2.c[0] == Rational(16));
  const auto expected = t2.u[0] * Rational(-40) + (t2.u[0] * t2.u[0]) * Rational(15, 2);
  CHECK(t2.u[1] == expected);
  CHECK(t2.u[1] == poly({{1, -320}, {2, 480}}, Rational(2)));
  CHECK(t2.c[1] == t2.c[0] * t2.c[0]);

  const auto t0 = build_series(0, Rational(2));
  CHECK(t0.size() == 1);
  CHECK(t0.u[0] == poly({{1, 8}}, Rational(2)));
}

TEST_CASE("frozen fixtures for n = 2, 3 (verified by symbolic differentiation of sech^2)") {
  const auto t = build_series(3);
  CHECK(t.u[2] == poly({{1, 60}, {2, -930}, {3, 930}}));
  CHECK(t.c[2] == Rational(0));
  CHECK(t.u[3] == poly({{1, -2472}, {2, 21036}, {3, -66216}, {4, 49662}}));
  CHECK(t.c[3] == Rational(0));
}

TEST_CASE("structure of the 31-term table") {
  const auto t = build_series(30);
  REQUIRE(t.size() == 31);
  for (int n = 0; n <= 30; ++n) {
    CAPTURE(n);
    CHECK(t.u[n].degree() == n + 1);
    CHECK(sgn(t.u[n].coefficient(n + 1)) != 0);
    CHECK(order_residual(t, n).is_zero());
    if (n >= 2) CHECK(t.c[n] == Rational(0));
  }
}

TEST_CASE("exact residual vanishes at non-unit gamma") {
  const auto t = build_series(10, Rational(3, 2));
  for (int n = 0; n <= 10; ++n) {
    CAPTURE(n);
    CHECK(order_residual(t, n).is_zero());
    CHECK(t.u[n].degree() == n + 1);
  }
}

TEST_CASE("second derivative agrees with finite differences on table entries") {
  const auto t = build_series(10);
  for (int n = 0; n <= 10; ++n) {
    CAPTURE(n);
    check_against_fd(t.u[n], second_derivative(t.u[n]), 1e-8);
  }
}

TEST_CASE("coefficients are even in x") {
  const auto t = build_series(8);
  for (const auto& u : t.u) {
    for (double x : {0.3, 1.1, 2.7}) CHECK(evaluate_real(u, x) == evaluate_real(u, -x));
  }
}

TEST_CASE("build is deterministic") { CHECK(build_series(25) == build_series(25)); }

TEST_CASE("build errors") {
  CHECK_THROWS_AS(build_series(-1), ValidationError);
  CHECK_THROWS_AS(build_series(12, Rational(1), 10), ResourceLimit);
  CHECK_THROWS_AS(build_series(2, Rational(0)), ValidationError);
  SeriesTable empty;
  CHECK_THROWS_AS(solve_order(empty, 2), ValidationError);
}

TEST_CASE("JSON serialisation keeps rationals exact") {
  const auto t = build_series(12, Rational(3, 2));
  const auto doc = to_json(t);
  CHECK(doc["gamma"] == "3/2");
  CHECK(doc["c"][0] == "9");
  CHECK(doc["u"][0][0][0] == "1");
  CHECK(doc["u"][0][0][1] == "9/2");
  CHECK(series_from_json(nlohmann::json::parse(doc.dump())) == t);
  CHECK(parse_rational("6/4") == Rational(3, 2));
  CHECK_THROWS_AS(parse_rational("x/2"), ValidationError);
  CHECK_THROWS_AS(series_from_json(nlohmann::json{{"gamma", "1"}}), ValidationError);
}
