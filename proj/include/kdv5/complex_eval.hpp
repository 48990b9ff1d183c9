#pragma once

#include <complex>
#include <vector>

#include "kdv5/sech_series.hpp"

namespace kdv5 {

using Complex = std::complex<double>;

inline constexpr double kDefaultPoleThreshold = 1e-8;

/// Complexified position and small parameter.
struct EvalPoint {
  Complex x;
  double epsilon;
};

/// Truncated sum sum_{n<N} eps^{2n} u_n(x) with the individual term sizes.
struct PartialSum {
  Complex value{0.0, 0.0};
  int N = 0;
  std::vector<double> term_magnitudes;
};

/// Upper singularity sigma = i pi / (2 gamma) of sech^2(gamma x).
Complex upper_singularity(double gamma);

/// sum a_m S^m at complex x, S = sech^2(gamma x). Throws PoleProximity when
/// |cosh(gamma x)| < pole_threshold.
Complex eval_coefficient(const SechPolynomial& p, Complex x,
                         double pole_threshold = kDefaultPoleThreshold);

/// 2^{log2_scale} * p(x) without overflow for huge coefficients. Real x is
/// summed in multiprecision because the coefficients alternate and cancel.
Complex eval_scaled(const SechPolynomial& p, Complex x, double log2_scale,
                    double pole_threshold = kDefaultPoleThreshold);

/// Truncation index N = round(r / 2 eps), r the distance to the nearer of the
/// singularities +-i pi / (2 gamma). Never below 1.
int optimal_N(Complex x, double epsilon, double gamma);

PartialSum partial_sum(const SeriesTable& table, const EvalPoint& point, int N,
                       double pole_threshold = kDefaultPoleThreshold);

/// Index of the smallest entry of term_magnitudes (classical optimal
/// truncation point). Throws InsufficientData on an empty list.
int smallest_term_index(const PartialSum& sum);

}  // namespace kdv5
