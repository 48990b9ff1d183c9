#include "kdv5/sech_series.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "kdv5/errors.hpp"

namespace kdv5 {

SechPolynomial::SechPolynomial(Rational gamma) : gamma_(std::move(gamma)) {
  gamma_.canonicalize();
  if (sgn(gamma_) <= 0) throw ValidationError("sech width gamma must be positive");
}

Rational SechPolynomial::coefficient(int m) const {
  auto it = coeffs_.find(m);
  return it == coeffs_.end() ? Rational(0) : it->second;
}

void SechPolynomial::set(int m, const Rational& value) {
  if (m < 1) throw ValidationError("SechPolynomial has no S^0 term (m = " + std::to_string(m) + ")");
  if (sgn(value) == 0) {
    coeffs_.erase(m);
  } else {
    coeffs_[m] = value;
  }
}

void SechPolynomial::add_to(int m, const Rational& value) {
  if (sgn(value) == 0) return;
  if (m < 1) throw ValidationError("SechPolynomial has no S^0 term (m = " + std::to_string(m) + ")");
  auto [it, inserted] = coeffs_.try_emplace(m, value);
  if (!inserted) {
    it->second += value;
    if (sgn(it->second) == 0) coeffs_.erase(it);
  }
}

void SechPolynomial::check_gamma(const SechPolynomial& other) const {
  if (gamma_ != other.gamma_) throw ValidationError("SechPolynomial operands have different gamma");
}

SechPolynomial& SechPolynomial::operator+=(const SechPolynomial& other) {
  check_gamma(other);
  for (const auto& [m, a] : other.coeffs_) add_to(m, a);
  return *this;
}

SechPolynomial& SechPolynomial::operator-=(const SechPolynomial& other) {
  check_gamma(other);
  for (const auto& [m, a] : other.coeffs_) add_to(m, -a);
  return *this;
}

SechPolynomial& SechPolynomial::operator*=(const Rational& scalar) {
  if (sgn(scalar) == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [m, a] : coeffs_) a *= scalar;
  return *this;
}

namespace {

// Coefficients over a common denominator: p = (sum num[m] S^m) / den.
struct IntegerForm {
  mpz_class den = 1;
  std::vector<std::pair<int, mpz_class>> num;
};

IntegerForm integer_form(const std::map<int, Rational>& coeffs) {
  IntegerForm f;
  for (const auto& [m, a] : coeffs) mpz_lcm(f.den.get_mpz_t(), f.den.get_mpz_t(), a.get_den_mpz_t());
  f.num.reserve(coeffs.size());
  for (const auto& [m, a] : coeffs) f.num.emplace_back(m, a.get_num() * (f.den / a.get_den()));
  return f;
}

}  // namespace

SechPolynomial operator*(const SechPolynomial& a, const SechPolynomial& b) {
  a.check_gamma(b);
  SechPolynomial out(a.gamma_);
  if (a.coeffs_.empty() || b.coeffs_.empty()) return out;
  // integer convolution avoids a gcd per partial product
  const IntegerForm fa = integer_form(a.coeffs_);
  const IntegerForm fb = integer_form(b.coeffs_);
  const int lo = fa.num.front().first + fb.num.front().first;
  const int hi = fa.num.back().first + fb.num.back().first;
  std::vector<mpz_class> acc(hi - lo + 1);
  for (const auto& [m, x] : fa.num) {
    for (const auto& [k, y] : fb.num) mpz_addmul(acc[m + k - lo].get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
  }
  const mpz_class den = fa.den * fb.den;
  for (int i = 0; i <= hi - lo; ++i) {
    if (sgn(acc[i]) == 0) continue;
    Rational q(acc[i], den);
    q.canonicalize();
    out.coeffs_.emplace(lo + i, std::move(q));
  }
  return out;
}

SechPolynomial second_derivative(const SechPolynomial& p) {
  const Rational g2 = p.gamma() * p.gamma();
  SechPolynomial out(p.gamma());
  for (const auto& [m, a] : p.coeffs()) {
    const Rational mm(m);
    out.add_to(m, g2 * 4 * mm * mm * a);
    out.add_to(m + 1, -g2 * (4 * mm * mm + 2 * mm) * a);
  }
  return out;
}

SechPolynomial fourth_derivative(const SechPolynomial& p) {
  return second_derivative(second_derivative(p));
}

namespace {

SechPolynomial leading_order(const Rational& gamma) {
  SechPolynomial u0(gamma);
  u0.set(1, 2 * gamma * gamma);
  return u0;
}

}  // namespace

std::pair<SechPolynomial, Rational> solve_order(const SeriesTable& table, int n) {
  if (n < 0) throw ValidationError("order must be non-negative");
  const Rational& gamma = table.gamma;
  if (n == 0) return {leading_order(gamma), Rational(4 * gamma * gamma)};
  if (table.u.size() < static_cast<std::size_t>(n) || table.c.size() < static_cast<std::size_t>(n)) {
    throw ValidationError("solve_order(" + std::to_string(n) + ") needs orders 0.." +
                          std::to_string(n - 1));
  }

  const SechPolynomial& u0 = table.u[0];
  const Rational& c0 = table.c[0];
  const Rational g2 = gamma * gamma;
  const Rational u0_lin = u0.coefficient(1);
  if (u0.degree() != 1 || sgn(u0_lin) == 0) throw StructuralFailure("u_0 is not a multiple of S");

  // Known part F of the order-eps^{2n} equation; the unknowns enter as
  // L u_n - c_n u_0 with L = d^2/dx^2 + 6 u_0 - c_0.
  SechPolynomial forcing = fourth_derivative(table.u[n - 1]);
  SechPolynomial quadratic(gamma);
  for (int k = 1; 2 * k <= n; ++k) {
    // pair k with n - k once
    SechPolynomial prod = table.u[k] * table.u[n - k];
    if (2 * k != n) prod *= Rational(2);
    quadratic += prod;
  }
  forcing += quadratic * Rational(3);
  for (int k = 1; k <= n - 1; ++k) {
    if (sgn(table.c[k]) != 0) forcing -= table.u[n - k] * table.c[k];
  }

  // L S^m = diag(m) S^m + shift(m) S^{m+1}
  auto diag = [&](int m) { return Rational(g2 * 4 * m * m - c0); };
  auto shift = [&](int m) { return Rational(-g2 * (4 * m * m + 2 * m) + 6 * u0_lin); };

  if (sgn(diag(1)) != 0) throw StructuralFailure("linearised operator has no zero at S^1");

  // S^1 row: 0 = c_n u0_lin - F_1.
  const Rational c_n = forcing.coefficient(1) / u0_lin;

  SechPolynomial rhs = u0 * c_n;
  rhs -= forcing;
  if (sgn(rhs.coefficient(1)) != 0) throw StructuralFailure("S^1 solvability row inconsistent");

  const int top = n + 1;
  if (rhs.degree() > top + 1) {
    throw StructuralFailure("forcing degree " + std::to_string(rhs.degree()) + " exceeds n + 2");
  }

  SechPolynomial u_n(gamma);
  Rational above(0);  // a_{j} while solving row j for a_{j-1}
  for (int j = top + 1; j >= 2; --j) {
    const Rational s = shift(j - 1);
    if (sgn(s) == 0) throw StructuralFailure("vanishing shift coefficient at m = " + std::to_string(j - 1));
    Rational a = (rhs.coefficient(j) - (j <= top ? diag(j) * above : Rational(0))) / s;
    u_n.set(j - 1, a);
    above = a;
  }
  if (u_n.degree() != top) {
    throw StructuralFailure("u_" + std::to_string(n) + " has degree " + std::to_string(u_n.degree()));
  }
  return {std::move(u_n), c_n};
}

SeriesTable build_series(int n_max, const Rational& gamma, int order_limit) {
  if (n_max < 0) throw ValidationError("n_max must be non-negative");
  if (n_max > order_limit) {
    throw ResourceLimit("n_max = " + std::to_string(n_max) + " exceeds the configured limit " +
                        std::to_string(order_limit));
  }
  Rational g(gamma);
  g.canonicalize();
  if (sgn(g) <= 0) throw ValidationError("gamma must be positive");

  SeriesTable table;
  table.gamma = g;
  table.u.reserve(n_max + 1);
  table.c.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    auto [u_n, c_n] = solve_order(table, n);
    table.u.push_back(std::move(u_n));
    table.c.push_back(std::move(c_n));
  }
  return table;
}

SechPolynomial order_residual(const SeriesTable& table, int n) {
  if (n < 0 || static_cast<std::size_t>(n) >= table.size()) {
    throw ValidationError("order_residual: order out of range");
  }
  SechPolynomial r = second_derivative(table.u[n]);
  if (n >= 1) r += fourth_derivative(table.u[n - 1]);
  for (int k = 0; k <= n; ++k) {
    r += (table.u[k] * table.u[n - k]) * Rational(3);
    r -= table.u[n - k] * table.c[k];
  }
  return r;
}

double evaluate_real(const SechPolynomial& p, double x) {
  const double s = 1.0 / std::cosh(p.gamma().get_d() * x);
  const double S = s * s;
  double acc = 0.0;
  for (auto it = p.coeffs().rbegin(); it != p.coeffs().rend(); ++it) {
    acc += it->second.get_d() * std::pow(S, it->first);
  }
  return acc;
}

Rational parse_rational(const std::string& text) {
  Rational q;
  if (text.empty() || q.set_str(text, 10) != 0) throw ValidationError("not a rational: '" + text + "'");
  if (sgn(q.get_den()) == 0) throw ValidationError("zero denominator: '" + text + "'");
  q.canonicalize();
  return q;
}

std::string format_rational(const Rational& q) { return q.get_str(10); }

nlohmann::json to_json(const SeriesTable& table) {
  nlohmann::json doc;
  doc["gamma"] = format_rational(table.gamma);
  auto& c = doc["c"] = nlohmann::json::array();
  for (const auto& cn : table.c) c.push_back(format_rational(cn));
  auto& u = doc["u"] = nlohmann::json::array();
  for (const auto& un : table.u) {
    auto terms = nlohmann::json::array();
    for (const auto& [m, a] : un.coeffs()) terms.push_back({std::to_string(m), format_rational(a)});
    u.push_back(std::move(terms));
  }
  return doc;
}

SeriesTable series_from_json(const nlohmann::json& doc) {
  try {
    SeriesTable table;
    table.gamma = parse_rational(doc.at("gamma").get<std::string>());
    for (const auto& cn : doc.at("c")) table.c.push_back(parse_rational(cn.get<std::string>()));
    for (const auto& terms : doc.at("u")) {
      SechPolynomial p(table.gamma);
      for (const auto& term : terms) {
        p.set(std::stoi(term.at(0).get<std::string>()), parse_rational(term.at(1).get<std::string>()));
      }
      table.u.push_back(std::move(p));
    }
    if (table.u.size() != table.c.size()) throw ValidationError("u and c lengths differ");
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed series JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("malformed series JSON: ") + e.what());
  }
}

}  // namespace kdv5
