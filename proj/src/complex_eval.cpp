#include "kdv5/complex_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <mpfr.h>

#include "kdv5/errors.hpp"

namespace kdv5 {
namespace {

struct Scaled {
  double mantissa;  // |mantissa| in [0.25, 1) or 0
  long exponent;    // value = mantissa * 2^exponent
};

Scaled to_scaled(const Rational& q) {
  if (sgn(q) == 0) return {0.0, 0};
  long en = 0, ed = 0;
  const double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  const double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return {mn / md, en - ed};
}

Complex sech_squared(Complex x, double gamma, double pole_threshold) {
  const Complex ch = std::cosh(gamma * x);
  if (std::abs(ch) < pole_threshold) {
    std::ostringstream msg;
    msg << "x = " << x << " is within |cosh(gamma x)| < " << pole_threshold << " of a pole";
    throw PoleProximity(msg.str());
  }
  return 1.0 / (ch * ch);
}

// Real x: the alternating coefficients cancel by many orders of magnitude,
// so S and the sum are carried with as many bits as the coefficients have.
double eval_real_precise(const SechPolynomial& p, double x, double log2_scale) {
  if (p.is_zero()) return 0.0;
  std::size_t bits = 64;
  for (const auto& [m, a] : p.coeffs()) {
    bits = std::max(bits, mpz_sizeinbase(a.get_num_mpz_t(), 2) + mpz_sizeinbase(a.get_den_mpz_t(), 2));
  }
  const auto prec = static_cast<mpfr_prec_t>(bits + 128);
  mpfr_t s, acc;
  mpfr_inits2(prec, s, acc, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(s, x, MPFR_RNDN);
  mpfr_mul_q(s, s, p.gamma().get_mpq_t(), MPFR_RNDN);
  mpfr_sech(s, s, MPFR_RNDN);
  mpfr_sqr(s, s, MPFR_RNDN);
  // Horner from the top power down to S^1
  mpfr_set_zero(acc, 1);
  const int top = p.degree();
  for (int m = top; m >= 1; --m) {
    const Rational a = p.coefficient(m);
    mpfr_add_q(acc, acc, a.get_mpq_t(), MPFR_RNDN);
    mpfr_mul(acc, acc, s, MPFR_RNDN);
  }
  long exponent = 0;
  const double mantissa = mpfr_get_d_2exp(&exponent, acc, MPFR_RNDN);
  mpfr_clears(s, acc, static_cast<mpfr_ptr>(nullptr));
  if (mantissa == 0.0) return 0.0;
  return mantissa * std::exp2(static_cast<double>(exponent) + log2_scale);
}

}  // namespace

Complex upper_singularity(double gamma) {
  return {0.0, std::numbers::pi / (2.0 * gamma)};
}

Complex eval_scaled(const SechPolynomial& p, Complex x, double log2_scale, double pole_threshold) {
  if (x.imag() == 0.0 && std::isfinite(x.real())) return {eval_real_precise(p, x.real(), log2_scale), 0.0};
  const Complex S = sech_squared(x, p.gamma().get_d(), pole_threshold);
  // Keep S^m and its binary exponent apart so that neither |S| >> 1 near a
  // pole nor |a_m| >> 1 at high order overflows.
  const double abs_s = std::abs(S);
  if (abs_s == 0.0) return {0.0, 0.0};
  const double log2_abs_s = std::log2(abs_s);
  const Complex phase = S / abs_s;
  Complex acc{0.0, 0.0};
  for (const auto& [m, a] : p.coeffs()) {
    const Scaled c = to_scaled(a);
    const double log2_mag = static_cast<double>(c.exponent) + m * log2_abs_s + log2_scale;
    const Complex term = c.mantissa * std::pow(phase, m);
    acc += term * std::exp2(log2_mag);
  }
  return acc;
}

Complex eval_coefficient(const SechPolynomial& p, Complex x, double pole_threshold) {
  return eval_scaled(p, x, 0.0, pole_threshold);
}

int optimal_N(Complex x, double epsilon, double gamma) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  const Complex sigma = upper_singularity(gamma);
  const double r = std::min(std::abs(x - sigma), std::abs(x + sigma));
  return std::max(1, static_cast<int>(std::lround(r / (2.0 * epsilon))));
}

PartialSum partial_sum(const SeriesTable& table, const EvalPoint& point, int N, double pole_threshold) {
  if (!(point.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (N < 0) throw ValidationError("truncation index must be non-negative");
  if (static_cast<std::size_t>(N) > table.size()) {
    throw InsufficientData("N = " + std::to_string(N) + " exceeds the " + std::to_string(table.size()) +
                           " available coefficients");
  }
  PartialSum out;
  out.N = N;
  out.term_magnitudes.reserve(N);
  const double log2_eps2 = 2.0 * std::log2(point.epsilon);
  for (int n = 0; n < N; ++n) {
    const Complex term = eval_scaled(table.u[n], point.x, n * log2_eps2, pole_threshold);
    out.value += term;
    out.term_magnitudes.push_back(std::abs(term));
  }
  return out;
}

int smallest_term_index(const PartialSum& sum) {
  if (sum.term_magnitudes.empty()) throw InsufficientData("no terms to compare");
  const auto it = std::min_element(sum.term_magnitudes.begin(), sum.term_magnitudes.end());
  return static_cast<int>(it - sum.term_magnitudes.begin());
}

}  // namespace kdv5
