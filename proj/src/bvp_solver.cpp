#include "kdv5/bvp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "kdv5/banded.hpp"
#include "kdv5/errors.hpp"

namespace kdv5 {
namespace {

constexpr double kPi = std::numbers::pi;

int reflect(int j, int n) {
  if (j < 0) return -j;
  if (j > n) return 2 * n - j;
  return j;
}

struct Stencil {
  std::array<double, 5> w;  // offsets -2..2
};

Stencil make_stencil(const SolverConfig& cfg, double h) {
  const double e4 = cfg.epsilon * cfg.epsilon / (h * h * h * h);
  const double s2 = 1.0 / (h * h);
  return {{e4, -4.0 * e4 + s2, 6.0 * e4 - 2.0 * s2, -4.0 * e4 + s2, e4}};
}

int interval_count(const SolverConfig& cfg) {
  const double ratio = cfg.half_length / cfg.grid_spacing;
  return std::max(4, static_cast<int>(std::ceil(ratio - 1e-9)));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sech2(double x) {
  const double s = 1.0 / std::cosh(x);
  return s * s;
}

}  // namespace

SolverConfig default_config(double epsilon, double gamma) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  SolverConfig cfg;
  cfg.epsilon = epsilon;
  cfg.gamma = gamma;
  const double g2 = gamma * gamma;
  cfg.c_value = 4.0 * g2 + 16.0 * g2 * g2 * epsilon * epsilon;
  cfg.half_length = std::max(15.0, minimum_half_length(epsilon));
  cfg.grid_spacing = epsilon / 20.0;
  return cfg;
}

double minimum_half_length(double epsilon) { return 10.0 + 10.0 * (2.0 * kPi * epsilon); }

void validate(const SolverConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw ResolutionError("epsilon must be positive");
  if (!(cfg.c_value > 0.0)) throw ResolutionError("c must be positive");
  if (!(cfg.grid_spacing > 0.0) || cfg.grid_spacing > cfg.epsilon / 10.0 * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "grid spacing h = " << cfg.grid_spacing << " does not resolve the tail (need h <= eps/10 = "
        << cfg.epsilon / 10.0 << ")";
    throw ResolutionError(msg.str());
  }
  if (!(cfg.half_length >= minimum_half_length(cfg.epsilon) * (1.0 - 1e-12))) {
    std::ostringstream msg;
    msg << "half length L = " << cfg.half_length << " is below 10 + 10(2 pi eps) = "
        << minimum_half_length(cfg.epsilon);
    throw ResolutionError(msg.str());
  }
  if (!(cfg.newton_tol > 0.0) || !(cfg.step_tol > 0.0) || cfg.max_iters < 1) throw ResolutionError("bad Newton controls");
}

double GridSolution::value_at(double x) const {
  if (nodes.size() < 2) throw ValidationError("empty grid solution");
  const double L = half_length();
  // even extension about 0 and L (period 2L)
  double y = std::fmod(std::abs(x), 2.0 * L);
  if (y > L) y = 2.0 * L - y;
  const double h = spacing();
  const auto n = static_cast<int>(nodes.size()) - 1;
  const int i = std::min(n - 1, static_cast<int>(y / h));
  const double t = (y - nodes[i]) / h;
  return (1.0 - t) * u[i] + t * u[i + 1];
}

double GridSolution::newton_constant() const {
  double c = 0.0;
  const std::size_t k = residual_history.size();
  for (std::size_t i = (k > 3 ? k - 3 : 1); i < k; ++i) {
    const double prev = residual_history[i - 1];
    if (prev > 0.0) c = std::max(c, residual_history[i] / (prev * prev));
  }
  return c;
}

namespace {

// The residual is evaluated in long double: the fourth-difference weights
// are ~eps^2/h^4 and the cancellation they cause leaves double-precision
// noise of the same size as the smallest tails being measured.
template <class T>
std::vector<T> residual_impl(const SolverConfig& cfg, const std::vector<T>& u) {
  const int n = static_cast<int>(u.size()) - 1;
  if (n < 2) throw ValidationError("grid too small");
  const T h = static_cast<T>(cfg.half_length) / n;
  const T e4 = static_cast<T>(cfg.epsilon) * static_cast<T>(cfg.epsilon) / (h * h * h * h);
  const T s2 = 1 / (h * h);
  const T c = cfg.c_value;
  std::vector<T> r(u.size());
  for (int i = 0; i <= n; ++i) {
    const T d4 = u[reflect(i - 2, n)] - 4 * u[reflect(i - 1, n)] + 6 * u[i] - 4 * u[reflect(i + 1, n)] +
                 u[reflect(i + 2, n)];
    const T d2 = u[reflect(i - 1, n)] - 2 * u[i] + u[reflect(i + 1, n)];
    r[i] = e4 * d4 + s2 * d2 + 3 * u[i] * u[i] - c * u[i];
  }
  return r;
}

template <class T>
double scaled_norm_impl(const SolverConfig& cfg, const std::vector<T>& u) {
  const int n = static_cast<int>(u.size()) - 1;
  const double h = cfg.half_length / n;
  double umax = 0.0;
  for (const T& v : u) umax = std::max(umax, static_cast<double>(std::abs(v)));
  if (umax == 0.0) return 0.0;
  double rmax = 0.0;
  for (const T& v : residual_impl(cfg, u)) rmax = std::max(rmax, static_cast<double>(std::abs(v)));
  const double scale =
      (16.0 * cfg.epsilon * cfg.epsilon / std::pow(h, 4) + 4.0 / (h * h) + cfg.c_value + 3.0 * umax) * umax;
  return rmax / scale;
}

}  // namespace

std::vector<double> discrete_residual(const SolverConfig& cfg, const std::vector<double>& u) {
  return residual_impl(cfg, u);
}

double scaled_residual_norm(const SolverConfig& cfg, const std::vector<double>& u) {
  return scaled_norm_impl(cfg, u);
}

GridSolution solve(const SolverConfig& cfg, const GridSolution* initial_guess) {
  validate(cfg);
  const int n = interval_count(cfg);
  const double h = cfg.half_length / n;

  GridSolution sol;
  sol.nodes.resize(n + 1);
  std::vector<long double> u(n + 1);
  const double g = std::sqrt(cfg.c_value) / 2.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    sol.nodes[i] = x;
    u[i] = initial_guess ? initial_guess->value_at(x) : 2.0 * g * g * sech2(g * x);
  }
  sol.nodes[n] = cfg.half_length;

  // Newton with the Jacobian solved in double and the iterate and residual
  // carried in long double (iterative refinement).
  const Stencil st = make_stencil(cfg, h);
  for (int it = 0;; ++it) {
    const double norm = scaled_norm_impl(cfg, u);
    sol.residual_history.push_back(norm);
    if (!std::isfinite(norm)) throw NonConvergence("Newton iteration diverged (non-finite residual)");
    const bool stepped = !sol.step_history.empty() && sol.step_history.back() <= cfg.step_tol;
    if (norm <= cfg.newton_tol && stepped) {
      sol.residual_norm = norm;
      sol.iterations = it;
      break;
    }
    if (it >= cfg.max_iters) {
      std::ostringstream msg;
      msg << "Newton did not converge in " << cfg.max_iters << " iterations (scaled residual " << norm
          << ", last step " << (sol.step_history.empty() ? 0.0 : sol.step_history.back()) << ")";
      throw NonConvergence(msg.str());
    }
    const std::vector<long double> r = residual_impl(cfg, u);
    std::vector<double> step(n + 1);
    for (int i = 0; i <= n; ++i) step[i] = static_cast<double>(-r[i]);
    BandedMatrix jac(n + 1, 2, 2);
    for (int i = 0; i <= n; ++i) {
      for (int off = -2; off <= 2; ++off) jac.add(i, reflect(i + off, n), st.w[off + 2]);
      jac.add(i, i, 6.0 * static_cast<double>(u[i]) - cfg.c_value);
    }
    jac.solve_in_place(step);
    double umax = 0.0;
    for (int i = 0; i <= n; ++i) {
      u[i] += step[i];
      umax = std::max(umax, static_cast<double>(std::abs(u[i])));
    }
    sol.step_history.push_back(max_abs(step) / std::max(umax, 1e-300));
  }
  sol.u.assign(u.begin(), u.end());
  if (!(sol.u[0] > 1.0)) {
    throw NonConvergence("Newton converged to the trivial branch (u(0) = " + std::to_string(sol.u[0]) + ")");
  }
  return sol;
}

BoundaryClosure boundary_conditions(const SolverConfig& cfg) {
  std::ostringstream at_l;
  at_l << "u'(" << cfg.half_length << ") = 0";
  std::ostringstream at_l3;
  at_l3 << "u'''(" << cfg.half_length << ") = 0";
  return {{"u'(0) = 0", "u'''(0) = 0", at_l.str(), at_l3.str()},
          "ghost nodes mirror about x = 0 and x = L: u_{-k} = u_k, u_{n+k} = u_{n-k}"};
}

std::array<double, 4> boundary_residuals(const std::function<double(double)>& u, const SolverConfig& cfg) {
  const double h = cfg.grid_spacing;
  auto d1 = [&](double x) { return (u(x + h) - u(x - h)) / (2.0 * h); };
  auto d3 = [&](double x) {
    return (u(x + 2 * h) - 2.0 * u(x + h) + 2.0 * u(x - h) - u(x - 2 * h)) / (2.0 * h * h * h);
  };
  const double L = cfg.half_length;
  return {d1(0.0), d3(0.0), d1(L), d3(L)};
}

double closure_tail_phase(double half_length, double epsilon) {
  return half_length - 0.5 * kPi * epsilon;
}

double tail_wavenumber(double epsilon, double c_value) {
  const double e2 = epsilon * epsilon;
  return std::sqrt((1.0 + std::sqrt(1.0 + 4.0 * e2 * c_value)) / (2.0 * e2));
}

double symmetric_tail_amplitude(double epsilon, double gamma, double lambda_const) {
  return 0.5 * exp_tail_amplitude(epsilon, gamma, lambda_const);
}

TailMeasurement measure_tail(const GridSolution& sol, const SolverConfig& cfg, double lambda_const) {
  if (sol.nodes.size() < 5 || sol.u.size() != sol.nodes.size()) throw ValidationError("empty grid solution");
  TailMeasurement m;
  m.epsilon = cfg.epsilon;
  m.half_length = sol.half_length();
  m.grid_spacing = sol.spacing();
  m.u_at_zero = sol.u.front();
  m.residual_norm = sol.residual_norm;
  m.iterations = sol.iterations;
  m.amplitude_predicted = symmetric_tail_amplitude(cfg.epsilon, cfg.gamma, lambda_const);

  const double L = m.half_length;
  const double window_start = L - 4.0 * kPi * cfg.epsilon;
  const double g = cfg.gamma;
  const double core = 2.0 * g * g * sech2(g * window_start);
  if (!(core < 0.1 * m.amplitude_predicted)) {
    std::ostringstream msg;
    msg << "tail window [" << window_start << ", " << L << "] contaminated by the core (" << core
        << " vs 10% of predicted tail " << 0.1 * m.amplitude_predicted << "); increase L";
    throw WindowContaminated(msg.str());
  }

  const int n = static_cast<int>(sol.u.size()) - 1;
  const double h = m.grid_spacing;
  int first = n;
  while (first > 0 && sol.nodes[first - 1] >= window_start) --first;

  // amplitude: largest |u| refined by a parabola through its neighbours
  int best = first;
  for (int i = first; i <= n; ++i) {
    if (std::abs(sol.u[i]) > std::abs(sol.u[best])) best = i;
  }
  const double um = sol.u[reflect(best - 1, n)];
  const double u0 = sol.u[best];
  const double up = sol.u[reflect(best + 1, n)];
  const double curv = um - 2.0 * u0 + up;
  double peak = std::abs(u0);
  if (curv != 0.0) {
    const double shift = 0.5 * (um - up) / curv;
    if (std::abs(shift) <= 1.0) peak = std::abs(u0 - 0.25 * (um - up) * shift);
  }
  m.amplitude_measured = peak;

  std::vector<double> crossings;
  for (int i = first; i < n; ++i) {
    const double a = sol.u[i], b = sol.u[i + 1];
    if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) {
      crossings.push_back(sol.nodes[i] + h * a / (a - b));
    }
  }
  if (crossings.size() < 2) throw MathError("tail window holds fewer than two zero crossings");
  m.wavelength_measured = 2.0 * (crossings.back() - crossings.front()) / (crossings.size() - 1);

  if (!(m.amplitude_measured > 0.0)) throw MathError("tail amplitude is zero");
  const double nominal = 2.0 * kPi * cfg.epsilon;
  if (std::abs(m.wavelength_measured - nominal) > 0.2 * nominal) {
    std::ostringstream msg;
    msg << "tail wavelength " << m.wavelength_measured << " is not within 20% of 2 pi eps = " << nominal;
    throw MathError(msg.str());
  }
  return m;
}

MinimalTailResult solve_minimal_tail(const SolverConfig& base, const GridSolution* guess,
                                     const MinimalTailOptions& options) {
  validate(base);
  if (options.scan_points < 4) throw ValidationError("minimal-tail scan needs at least 4 points");
  const double k = tail_wavenumber(base.epsilon, base.c_value);
  const double half_wave = kPi / k;

  MinimalTailResult result;
  // 1/A^2 = a + b cos(2kL) + c sin(2kL); normal equations accumulated directly
  std::array<std::array<double, 4>, 3> ne{};
  for (int j = 0; j < options.scan_points; ++j) {
    SolverConfig cfg = base;
    cfg.half_length = base.half_length + j * half_wave / options.scan_points;
    const GridSolution sol = solve(cfg, guess);
    const TailMeasurement m = measure_tail(sol, cfg, options.lambda_const);
    result.scan.push_back({cfg.half_length, m.amplitude_measured});
    const std::array<double, 3> row{1.0, std::cos(2.0 * k * cfg.half_length), std::sin(2.0 * k * cfg.half_length)};
    const double y = 1.0 / (m.amplitude_measured * m.amplitude_measured);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ne[r][c] += row[r] * row[c];
      ne[r][3] += row[r] * y;
    }
  }
  // Gaussian elimination on the 3x3 system
  for (int p = 0; p < 3; ++p) {
    int piv = p;
    for (int r = p + 1; r < 3; ++r) {
      if (std::abs(ne[r][p]) > std::abs(ne[piv][p])) piv = r;
    }
    std::swap(ne[p], ne[piv]);
    if (ne[p][p] == 0.0) throw MathError("minimal-tail fit is degenerate");
    for (int r = p + 1; r < 3; ++r) {
      const double f = ne[r][p] / ne[p][p];
      for (int c = p; c < 4; ++c) ne[r][c] -= f * ne[p][c];
    }
  }
  std::array<double, 3> coef{};
  for (int p = 2; p >= 0; --p) {
    double acc = ne[p][3];
    for (int c = p + 1; c < 3; ++c) acc -= ne[p][c] * coef[c];
    coef[p] = acc / ne[p][p];
  }
  const double phi = std::atan2(coef[2], coef[1]);
  double offset = std::fmod(phi / (2.0 * k) - base.half_length, half_wave);
  if (offset < 0.0) offset += half_wave;

  result.config = base;
  result.config.half_length = base.half_length + offset;
  result.solution = solve(result.config, guess);
  result.measurement = measure_tail(result.solution, result.config, options.lambda_const);

  if (options.estimate_error) {
    SolverConfig coarse = result.config;
    coarse.grid_spacing = 2.0 * result.config.grid_spacing;
    if (coarse.grid_spacing > coarse.epsilon / 10.0 * (1.0 + 1e-12)) {
      // the coarse grid would violate the resolution rule; refine instead
      coarse.grid_spacing = 0.5 * result.config.grid_spacing;
    }
    const GridSolution other = solve(coarse, &result.solution);
    const TailMeasurement mo = measure_tail(other, coarse, options.lambda_const);
    result.measurement.discretization_error = std::abs(result.measurement.amplitude_measured - mo.amplitude_measured) / 3.0;
  }
  return result;
}

std::vector<MinimalTailResult> measure_sweep(std::vector<double> epsilons, const SweepOptions& options) {
  if (epsilons.empty()) throw ValidationError("empty epsilon list");
  if (!(options.grid_ratio >= 10.0)) throw ResolutionError("grid ratio eps/h must be at least 10");
  std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
  std::vector<SolverConfig> configs;
  for (double eps : epsilons) {
    SolverConfig cfg = default_config(eps, options.gamma);
    cfg.grid_spacing = eps / options.grid_ratio;
    if (options.domain_length > 0.0) cfg.half_length = options.domain_length;
    validate(cfg);
    configs.push_back(cfg);
  }

  std::vector<MinimalTailResult> out;
  out.reserve(configs.size());
  if (options.continuation) {
    for (const auto& cfg : configs) {
      const GridSolution* guess = out.empty() ? nullptr : &out.back().solution;
      out.push_back(solve_minimal_tail(cfg, guess, options.tail));
    }
  } else {
    std::vector<std::future<MinimalTailResult>> jobs;
    for (const auto& cfg : configs) {
      jobs.push_back(std::async(std::launch::async, [cfg, &options] { return solve_minimal_tail(cfg, nullptr, options.tail); }));
    }
    for (auto& job : jobs) out.push_back(job.get());
  }
  return out;
}

ExponentFit fit_exponent(const std::vector<TailMeasurement>& ms, double gamma) {
  if (ms.size() < kMinFitMeasurements) {
    throw InsufficientData("fit_exponent needs at least " + std::to_string(kMinFitMeasurements) +
                           " measurements (got " + std::to_string(ms.size()) + ")");
  }
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::array<double, 2>> pts;
  for (const auto& m : ms) {
    if (!(m.epsilon > 0.0) || !(m.amplitude_measured > 0.0)) throw ValidationError("measurement must be positive");
    const double x = 1.0 / m.epsilon;
    const double y = std::log(m.amplitude_measured * m.epsilon * m.epsilon);
    pts.push_back({x, y});
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(ms.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InsufficientData("fit_exponent: all measurements at the same epsilon");
  ExponentFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.log_prefactor = (sy - fit.slope * sx) / n;
  fit.predicted_slope = -kPi / (2.0 * gamma);
  const double mean = sy / n;
  double ss_tot = 0, ss_res = 0;
  for (const auto& [x, y] : pts) {
    const double e = y - (fit.log_prefactor + fit.slope * x);
    ss_res += e * e;
    ss_tot += (y - mean) * (y - mean);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (fit.r_squared < kMinFitRSquared) {
    std::ostringstream msg;
    msg << "tail fit unreliable: r^2 = " << fit.r_squared << " < " << kMinFitRSquared << " (slope " << fit.slope << ")";
    throw PoorFit(msg.str());
  }
  return fit;
}

nlohmann::json to_json(const TailMeasurement& m) {
  nlohmann::json j;
  j["epsilon"] = m.epsilon;
  j["amplitude_measured"] = m.amplitude_measured;
  j["amplitude_predicted"] = m.amplitude_predicted;
  j["wavelength_measured"] = m.wavelength_measured;
  j["half_length"] = m.half_length;
  j["grid_spacing"] = m.grid_spacing;
  j["u_at_zero"] = m.u_at_zero;
  j["residual_norm"] = m.residual_norm;
  j["iterations"] = m.iterations;
  if (m.discretization_error >= 0.0) j["discretization_error"] = m.discretization_error;
  return j;
}

std::string solution_csv(const GridSolution& sol) {
  std::ostringstream out;
  out.precision(17);
  out << "x,u\n";
  for (std::size_t i = 0; i < sol.nodes.size(); ++i) out << sol.nodes[i] << ',' << sol.u[i] << '\n';
  return out.str();
}

}  // namespace kdv5
