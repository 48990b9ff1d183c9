#pragma once

// Exact asymptotic series for the fifth-order KdV solitary wave
//
//   eps^2 u'''' + u'' + 3 u^2 - c u = 0,   u -> 0 as x -> +-inf,
//
// expanded as u = sum eps^{2n} u_n(x), c = sum eps^{2n} c_n. Every u_n is a
// polynomial in S = sech^2(gamma x) with no constant term, so all arithmetic
// happens on exact rational coefficients of S^m.

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"

namespace kdv5 {

using Rational = mpq_class;

/// Polynomial sum_{m>=1} a_m S^m in S = sech^2(gamma x).
///
/// Zero coefficients are never stored and m = 0 is rejected, so every value
/// of this type decays as x -> +-inf.
class SechPolynomial {
 public:
  SechPolynomial() : gamma_(1) {}
  explicit SechPolynomial(Rational gamma);

  const Rational& gamma() const { return gamma_; }
  const std::map<int, Rational>& coeffs() const { return coeffs_; }

  /// Coefficient of S^m (zero when absent).
  Rational coefficient(int m) const;
  /// Sets a_m; a zero value erases the term. Throws for m < 1.
  void set(int m, const Rational& value);
  void add_to(int m, const Rational& value);

  bool is_zero() const { return coeffs_.empty(); }
  /// Highest power present; 0 for the zero polynomial.
  int degree() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first; }

  SechPolynomial& operator+=(const SechPolynomial& other);
  SechPolynomial& operator-=(const SechPolynomial& other);
  SechPolynomial& operator*=(const Rational& scalar);

  friend SechPolynomial operator+(SechPolynomial a, const SechPolynomial& b) { return a += b; }
  friend SechPolynomial operator-(SechPolynomial a, const SechPolynomial& b) { return a -= b; }
  friend SechPolynomial operator*(SechPolynomial a, const Rational& s) { return a *= s; }
  friend SechPolynomial operator*(const Rational& s, SechPolynomial a) { return a *= s; }
  /// Product in S (degrees add).
  friend SechPolynomial operator*(const SechPolynomial& a, const SechPolynomial& b);

  friend bool operator==(const SechPolynomial& a, const SechPolynomial& b) {
    return a.gamma_ == b.gamma_ && a.coeffs_ == b.coeffs_;
  }

 private:
  void check_gamma(const SechPolynomial& other) const;

  Rational gamma_;
  std::map<int, Rational> coeffs_;
};

/// d^2/dx^2 in the closed S basis:
///   (S^m)'' = gamma^2 [4m^2 S^m - (4m^2 + 2m) S^{m+1}].
SechPolynomial second_derivative(const SechPolynomial& p);
SechPolynomial fourth_derivative(const SechPolynomial& p);

/// The family {u_n, c_n}, n = 0..n_max. Built once by build_series and
/// treated as read-only afterwards.
struct SeriesTable {
  Rational gamma{1};
  std::vector<SechPolynomial> u;
  std::vector<Rational> c;

  std::size_t size() const { return u.size(); }
  int n_max() const { return static_cast<int>(u.size()) - 1; }

  friend bool operator==(const SeriesTable&, const SeriesTable&) = default;
};

/// Upper bound on n_max accepted by build_series.
inline constexpr int kDefaultOrderLimit = 200;

/// Solves the order-eps^{2n} problem given u_0..u_{n-1}, c_0..c_{n-1}.
///
/// The S^1 row of L u_n = c_n u_0 - F (L = d^2/dx^2 + 6u_0 - c_0 has a zero
/// diagonal there) fixes c_n; the remaining rows are triangular and are
/// back-substituted from S^{n+2} downwards.
std::pair<SechPolynomial, Rational> solve_order(const SeriesTable& table, int n);

SeriesTable build_series(int n_max, const Rational& gamma = Rational(1),
                         int order_limit = kDefaultOrderLimit);

/// Coefficient of eps^{2n} after substituting the truncated series into the
/// equation. Identically zero for a correct table.
SechPolynomial order_residual(const SeriesTable& table, int n);

/// Plain double evaluation at real x; fine while the coefficients fit a double.
double evaluate_real(const SechPolynomial& p, double x);

Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& q);

// {"gamma": "p/q", "c": ["p/q", ...], "u": [[["m", "p/q"], ...], ...]}
nlohmann::json to_json(const SeriesTable& table);
SeriesTable series_from_json(const nlohmann::json& doc);

}  // namespace kdv5
