#include "kdv5/late_terms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kdv5/errors.hpp"

namespace kdv5 {
namespace {

double log_abs(const Rational& q) {
  long en = 0, ed = 0;
  const double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  const double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log(std::abs(mn / md)) + static_cast<double>(en - ed) * std::numbers::ln2;
}

// Lagrange-type Richardson step on seq[end-order..end] with 1-based k.
double richardson_window(const std::vector<double>& seq, std::size_t end, int order) {
  double acc = 0.0;
  double binom = 1.0;  // C(order, j)
  double fact = std::tgamma(order + 1.0);
  for (int j = 0; j <= order; ++j) {
    const std::size_t i = end - order + j;
    const double k = static_cast<double>(i + 1);
    const double sign = ((order - j) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * binom * std::pow(k, order) * seq[i];
    binom = binom * (order - j) / (j + 1);
  }
  return acc / fact;
}

}  // namespace

std::vector<double> lambda_sequence(const SeriesTable& table) {
  std::vector<double> out;
  out.reserve(table.size());
  mpz_class factorial(1);  // (2n+1)!
  Rational gamma_pow(1);   // gamma^{2n+2}
  const Rational g2 = table.gamma * table.gamma;
  for (std::size_t n = 0; n < table.size(); ++n) {
    if (n > 0) factorial *= (2 * n) * (2 * n + 1);
    gamma_pow *= g2;
    Rational lam = -table.u[n].coefficient(static_cast<int>(n) + 1) / (gamma_pow * Rational(factorial));
    out.push_back(lam.get_d());
  }
  return out;
}

std::vector<std::vector<double>> richardson_table(const std::vector<double>& seq, int max_order) {
  if (max_order < 0) throw ValidationError("extrapolation order must be non-negative");
  std::vector<std::vector<double>> rows(max_order + 1);
  for (int k = 0; k <= max_order; ++k) {
    rows[k].assign(seq.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = k; j < seq.size(); ++j) rows[k][j] = richardson_window(seq, j, k);
  }
  return rows;
}

Extrapolation richardson_extrapolate(const std::vector<double>& seq, int order) {
  if (order < 1) throw ValidationError("extrapolation order must be >= 1");
  if (seq.size() <= static_cast<std::size_t>(order)) {
    throw InsufficientData("richardson_extrapolate: " + std::to_string(seq.size()) +
                           " terms is not enough for order " + std::to_string(order));
  }
  const std::size_t last = seq.size() - 1;
  Extrapolation out;
  out.estimate = richardson_window(seq, last, order);
  const double previous = (last > static_cast<std::size_t>(order))
                              ? richardson_window(seq, last - 1, order)
                              : richardson_window(seq, last, order - 1);
  out.error_bound = std::abs(out.estimate - previous);
  return out;
}

RatioTest ratio_test(const SeriesTable& table, double x) {
  if (table.size() < 6) throw InsufficientData("ratio_test needs a table of depth >= 5");
  const double gamma = table.gamma.get_d();
  const Complex chi = Complex(x, 0.0) - upper_singularity(gamma);

  // Late-term form summed over the conjugate pair, up to the common constant:
  // P_n = (-1)^n Gamma(2n+2) 2 Re[chi^{-(2n+2)}]; ratio P_{n+1} / P_n.
  auto pair_factor = [&](int n) {
    const double log_mod = -(2.0 * n + 2.0) * std::log(std::abs(chi));
    const double arg = -(2.0 * n + 2.0) * std::arg(chi);
    return std::exp(log_mod) * std::cos(arg);
  };

  RatioTest out;
  std::vector<double> values;
  values.reserve(table.size());
  for (const auto& u : table.u) values.push_back(eval_coefficient(u, x).real());

  for (std::size_t n = 0; n + 1 < values.size(); ++n) {
    const double scale = std::abs(values[n]) + std::abs(values[n + 1]);
    const double pn = pair_factor(static_cast<int>(n));
    if (std::abs(values[n]) <= 1e-300 || std::abs(values[n]) < 1e-14 * scale || pn == 0.0) {
      out.gaps.push_back(static_cast<int>(n));
      continue;
    }
    const double two_n = 2.0 * n;
    RatioRow row;
    row.n = static_cast<int>(n);
    row.measured = values[n + 1] / values[n];
    row.predicted = -(two_n + 2.0) * (two_n + 3.0) * pair_factor(static_cast<int>(n) + 1) / pn;
    out.rows.push_back(row);
  }
  return out;
}

double chi_squared_from_ratio(const RatioRow& row) {
  const double two_n = 2.0 * row.n;
  return -(two_n + 2.0) * (two_n + 3.0) / row.measured;
}

BetaFit fit_beta(const SeriesTable& table, int n_lo, int n_hi, int beta_lo, int beta_hi) {
  if (n_lo < 1 || n_hi <= n_lo + 1 || static_cast<std::size_t>(n_hi) >= table.size()) {
    throw InsufficientData("fit_beta: range [" + std::to_string(n_lo) + ", " + std::to_string(n_hi) +
                           "] not covered by the table");
  }
  const double log_gamma2 = 2.0 * std::log(table.gamma.get_d());
  BetaFit fit;
  double best = std::numeric_limits<double>::infinity();
  for (int beta = beta_lo; beta <= beta_hi; ++beta) {
    // least-squares slope of y_n = log|a_{n,n+1}| - (2n+2) log gamma - lgamma(2n+beta) on log n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int count = n_hi - n_lo + 1;
    for (int n = n_lo; n <= n_hi; ++n) {
      const double y = log_abs(table.u[n].coefficient(n + 1)) - (2.0 * n + 2.0) * 0.5 * log_gamma2 -
                       std::lgamma(2.0 * n + beta);
      const double t = std::log(static_cast<double>(n));
      sx += t;
      sy += y;
      sxx += t * t;
      sxy += t * y;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    fit.entries.push_back({beta, std::abs(slope)});
    if (std::abs(slope) < best) {
      best = std::abs(slope);
      fit.best_beta = beta;
    }
  }
  return fit;
}

std::array<StokesRay, 2> stokes_line_geometry(double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  const Complex sigma = upper_singularity(gamma);
  return {StokesRay{sigma, Complex(0.0, -1.0), Complex(0.0, 0.0)},
          StokesRay{-sigma, Complex(0.0, 1.0), Complex(0.0, 0.0)}};
}

bool on_stokes_line(Complex x, double gamma, double tol) {
  const Complex sigma = upper_singularity(gamma);
  for (const Complex& s : {sigma, -sigma}) {
    const Complex chi = x - s;
    const Complex minus_chi2 = -chi * chi;
    const double scale = std::max(1.0, std::abs(minus_chi2));
    if (std::abs(minus_chi2.imag()) <= tol * scale && minus_chi2.real() >= -tol * scale) {
      // between the singularity and the real axis only
      if (std::abs(x.imag()) <= std::abs(s.imag()) + tol && x.imag() * s.imag() >= -tol) return true;
    }
  }
  return false;
}

int stokes_side(double x) { return (x > 0.0) - (x < 0.0); }

SingulantReport analyze_late_terms(const SeriesTable& table, int order) {
  if (table.n_max() < kMinLambdaOrders) {
    throw InsufficientData("late-term analysis needs n_max >= " + std::to_string(kMinLambdaOrders) +
                           " (got " + std::to_string(table.n_max()) + ")");
  }
  SingulantReport report;
  report.sigma = upper_singularity(table.gamma.get_d());
  report.lambda_sequence = lambda_sequence(table);
  report.lambda_final = richardson_extrapolate(report.lambda_sequence, order);
  report.lambda_extrapolants = richardson_table(report.lambda_sequence, std::max(order, 1) + 2);
  const int n_hi = table.n_max();
  const int n_lo = std::max(1, std::min(10, n_hi - 4));
  report.beta_fit = fit_beta(table, n_lo, n_hi);
  report.ratio_table = ratio_test(table, 0.0);
  return report;
}

nlohmann::json to_json(const SingulantReport& report) {
  using nlohmann::json;
  json doc;
  doc["sigma"] = {report.sigma.real(), report.sigma.imag()};
  doc["chi_prime"] = report.chi_prime;
  doc["beta_exponent"] = report.beta_exponent;
  doc["lambda_sequence"] = report.lambda_sequence;
  auto& ex = doc["extrapolants"] = json::array();
  for (std::size_t k = 0; k < report.lambda_extrapolants.size(); ++k) {
    const auto& row = report.lambda_extrapolants[k];
    json values = json::array();
    for (std::size_t j = k; j < row.size(); ++j) values.push_back({{"end", j}, {"value", row[j]}});
    ex.push_back({{"order", k}, {"values", values}});
  }
  doc["lambda_final"] = {{"estimate", report.lambda_final.estimate},
                         {"error_bound", report.lambda_final.error_bound}};
  json beta = json::array();
  for (const auto& e : report.beta_fit.entries) beta.push_back({{"beta", e.beta}, {"drift", e.drift}});
  doc["beta_fit"] = {{"best_beta", report.beta_fit.best_beta}, {"candidates", beta}};
  json ratios = json::array();
  for (const auto& r : report.ratio_table.rows) {
    ratios.push_back({{"n", r.n}, {"measured", r.measured}, {"predicted", r.predicted}});
  }
  doc["ratio_table"] = {{"x", 0.0}, {"rows", ratios}, {"gaps", report.ratio_table.gaps}};
  return doc;
}

std::string lambda_csv(const SingulantReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "n,lambda_n\n";
  for (std::size_t n = 0; n < report.lambda_sequence.size(); ++n) {
    out << n << ',' << report.lambda_sequence[n] << '\n';
  }
  return out.str();
}

}  // namespace kdv5
