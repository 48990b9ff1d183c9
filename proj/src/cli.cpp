#include "kdv5/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kdv5/complex_eval.hpp"
#include "kdv5/errors.hpp"
#include "kdv5/io.hpp"
#include "kdv5/late_terms.hpp"
#include "kdv5/stokes_smoothing.hpp"

namespace kdv5 {

TruncationComparison compare_truncation(const SeriesTable& table, const MinimalTailResult& bvp, double x) {
  const double L = bvp.solution.half_length();
  if (!(std::abs(x) <= L)) {
    std::ostringstream msg;
    msg << "x = " << x << " lies beyond the solved domain [0, " << L << "]";
    throw ValidationError(msg.str());
  }
  TruncationComparison cmp;
  cmp.epsilon = bvp.config.epsilon;
  cmp.x = x;
  cmp.optimal_n = optimal_N(Complex(x, 0.0), cmp.epsilon, table.gamma.get_d());
  cmp.u_bvp = bvp.solution.value_at(x);
  cmp.tail_scale = bvp.measurement.amplitude_predicted;
  const int terms = static_cast<int>(table.size());
  const PartialSum full = partial_sum(table, {Complex(x, 0.0), cmp.epsilon}, terms);
  cmp.term_magnitudes = full.term_magnitudes;
  cmp.smallest_term = smallest_term_index(full);
  double running = 0.0;
  cmp.errors.push_back(std::abs(cmp.u_bvp));
  for (int n = 0; n < terms; ++n) {
    running += eval_scaled(table.u[n], Complex(x, 0.0), 2.0 * n * std::log2(cmp.epsilon)).real();
    cmp.errors.push_back(std::abs(running - cmp.u_bvp));
  }
  cmp.errors.pop_back();  // keep N = 0..terms-1 so errors[N] pairs with term N
  return cmp;
}

nlohmann::json to_json(const TruncationComparison& cmp) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t n = 0; n < cmp.errors.size(); ++n) {
    rows.push_back({{"N", n}, {"error", cmp.errors[n]}, {"next_term", cmp.term_magnitudes[n]}});
  }
  return {{"epsilon", cmp.epsilon},
          {"x", cmp.x},
          {"optimal_N", cmp.optimal_n},
          {"smallest_term_index", cmp.smallest_term},
          {"u_bvp", cmp.u_bvp},
          {"error_at_optimal_N", cmp.errors.at(cmp.optimal_n)},
          {"error_at_smallest_term", cmp.errors.at(cmp.smallest_term)},
          {"tail_scale", cmp.tail_scale},
          {"error_over_tail_scale", cmp.errors.at(cmp.smallest_term) / cmp.tail_scale},
          {"truncations", rows}};
}

namespace {

constexpr double kPi = std::numbers::pi;

std::string number_tag(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Session {
  std::ostream& out;
  std::ostream& err;
  std::filesystem::path dir;
  RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void emit(const std::string& name, const std::string& content) {
    write_atomic(dir / name, content);
    manifest.outputs.push_back((dir / name).string());
  }

  void finish() {
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_atomic(dir / ("manifest_" + manifest.command + ".json"), dump(to_json(manifest)));
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exponential asymptotics laboratory for the fifth-order KdV equation", "kdv5"};
  app.require_subcommand(1);

  std::string out_dir;
  std::string gamma_text = "1";
  int n_max = 30;
  int order = 3;
  bool emit_csv = false;
  std::vector<double> epsilons;
  double r_value = 0.0;
  double lambda_const = kDefaultLambda;
  double rho_override = std::nan("");
  int steps = 4000;
  double span_half_width = 1.0;
  double domain_length = 0.0;
  double grid_h = 0.0;
  double grid_ratio = 20.0;
  bool no_continuation = false;
  double x_value = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory (default $KDV5_OUT_DIR or .)");
    sub->add_option("--gamma", gamma_text, "Sech width gamma, exact rational (default 1)");
  };

  std::function<void(Session&)> action;
  std::string command;

  auto* series = app.add_subcommand("series", "Generate the exact coefficient table");
  add_common(series);
  series->add_option("--n-max", n_max, "Highest order")->check(CLI::NonNegativeNumber);
  series->callback([&] { command = "series"; });

  auto* lambda = app.add_subcommand("lambda", "Late-term analysis and Lambda extrapolation");
  add_common(lambda);
  lambda->add_option("--n-max", n_max, "Highest order");
  lambda->add_option("--order", order, "Richardson order")->check(CLI::PositiveNumber);
  lambda->add_flag("--emit-csv", emit_csv, "Also write (n, Lambda_n) as CSV");
  lambda->callback([&] { command = "lambda"; });

  auto* stokes = app.add_subcommand("stokes-profile", "Stokes multiplier across the Stokes line");
  add_common(stokes);
  stokes->add_option("--epsilon", epsilons, "One or more epsilon values")->required();
  stokes->add_option("--r", r_value, "|chi| (default pi / (2 gamma))");
  stokes->add_option("--lambda", lambda_const, "Lambda (default -19.97)");
  stokes->add_option("--rho", rho_override, "Override rho (default from optimal_N)");
  stokes->add_option("--steps", steps, "Profile samples");
  stokes->add_option("--span", span_half_width, "Half width of the theta span about -pi/2");
  stokes->callback([&] { command = "stokes-profile"; });

  auto* tails = app.add_subcommand("tails", "Direct BVP solves and tail measurements");
  add_common(tails);
  tails->add_option("--epsilon", epsilons, "One or more epsilon values")->required();
  tails->add_option("--domain-length", domain_length, "Base half length L (default max(15, 10 + 20 pi eps))");
  tails->add_option("--grid-h", grid_h, "Grid spacing applied to every epsilon");
  tails->add_option("--grid-ratio", grid_ratio, "eps / h when --grid-h is not given (default 20)");
  tails->add_option("--lambda", lambda_const, "Lambda for the predicted amplitude");
  tails->add_flag("--no-continuation", no_continuation, "Solve every epsilon independently (in parallel)");
  tails->callback([&] { command = "tails"; });

  auto* compare = app.add_subcommand("compare", "Optimal truncation against the direct solve");
  add_common(compare);
  compare->add_option("--epsilon", epsilons, "Epsilon")->required()->expected(1);
  compare->add_option("--x", x_value, "Evaluation point");
  compare->add_option("--n-max", n_max, "Series depth");
  compare->add_option("--domain-length", domain_length, "Base half length L");
  compare->add_option("--grid-h", grid_h, "Grid spacing");
  compare->add_option("--lambda", lambda_const, "Lambda for the tail scale");
  compare->callback([&] { command = "compare"; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    // parameter validation; nothing is written before this block succeeds
    const Rational gamma = parse_rational(gamma_text);
    if (sgn(gamma) <= 0) throw ValidationError("--gamma must be positive");
    const double gamma_d = gamma.get_d();
    for (double e : epsilons) {
      if (!(e > 0.0)) throw ValidationError("--epsilon values must be positive");
    }
    if (n_max < 0) throw ValidationError("--n-max must be non-negative");
    if (n_max > kDefaultOrderLimit) throw ResourceLimit("--n-max exceeds " + std::to_string(kDefaultOrderLimit));

    Session session{out, err, resolve_output_dir(out_dir), {}};
    session.manifest.command = command;
    auto& params = session.manifest.parameters;
    params["gamma"] = format_rational(gamma);

    if (command == "series") {
      params["n_max"] = n_max;
      const SeriesTable table = build_series(n_max, gamma);
      session.emit("series.json", dump(to_json(table)));
      out << "c = [";
      for (std::size_t n = 0; n < table.c.size(); ++n) out << (n ? ", " : "") << format_rational(table.c[n]);
      out << "]\n";
    } else if (command == "lambda") {
      params["n_max"] = n_max;
      params["order"] = order;
      params["emit_csv"] = emit_csv;
      if (n_max < kMinLambdaOrders || n_max + 1 <= order) {
        throw InsufficientData("insufficient data: lambda needs n_max >= " + std::to_string(kMinLambdaOrders) +
                               " and more than --order terms");
      }
      const SeriesTable table = build_series(n_max, gamma);
      const SingulantReport report = analyze_late_terms(table, order);
      session.emit("lambda_report.json", dump(to_json(report)));
      if (emit_csv) session.emit("lambda.csv", lambda_csv(report));
      out << std::setprecision(10) << "lambda_final = " << report.lambda_final.estimate << " +- "
          << report.lambda_final.error_bound << "  (beta fit: " << report.beta_fit.best_beta << ")\n";
    } else if (command == "stokes-profile") {
      params["epsilon"] = epsilons;
      params["lambda"] = lambda_const;
      params["steps"] = steps;
      params["span"] = span_half_width;
      if (!(span_half_width > 0.0 && span_half_width < kPi)) throw ValidationError("--span must lie in (0, pi)");
      if (steps < kMinProfileSteps) throw ValidationError("--steps must be at least 1000");
      std::vector<StokesFrame> frames;
      for (double e : epsilons) {
        StokesFrame f = crossing_frame(e, gamma_d, lambda_const);
        if (r_value > 0.0) {
          f.r = r_value;
          f.rho = std::max(1, static_cast<int>(std::lround(f.r / (2.0 * e)))) - f.r / (2.0 * e);
        }
        if (!std::isnan(rho_override)) f.rho = rho_override;
        validate(f);
        frames.push_back(f);
      }
      for (const auto& f : frames) {
        const StokesProfile p = integrate_multiplier(f, {-kPi / 2 - span_half_width, -kPi / 2 + span_half_width}, steps);
        session.emit("stokes_profile_eps" + number_tag(f.epsilon) + ".csv", profile_csv(p));
        const double denom = std::abs(p.jump_closed_form);
        out << std::setprecision(8) << "eps=" << f.epsilon << " r=" << f.r << " rho=" << f.rho
            << " jump_numeric=" << p.jump_numeric << " jump_closed=" << p.jump_closed_form << " ratio="
            << (denom > 0.0 ? std::abs(p.jump_numeric) / denom : 0.0) << '\n';
      }
    } else if (command == "tails") {
      params["epsilon"] = epsilons;
      params["lambda"] = lambda_const;
      params["domain_length"] = domain_length;
      params["grid_h"] = grid_h;
      params["grid_ratio"] = grid_ratio;
      params["continuation"] = !no_continuation;
      SweepOptions opts;
      opts.gamma = gamma_d;
      opts.domain_length = domain_length;
      opts.continuation = !no_continuation;
      opts.tail.lambda_const = lambda_const;
      std::vector<MinimalTailResult> results;
      if (grid_h > 0.0) {
        // common absolute spacing: validate each epsilon up front
        for (double e : epsilons) {
          SolverConfig cfg = default_config(e, gamma_d);
          cfg.grid_spacing = grid_h;
          if (domain_length > 0.0) cfg.half_length = domain_length;
          validate(cfg);
        }
        std::vector<double> sorted = epsilons;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        for (double e : sorted) {
          SolverConfig cfg = default_config(e, gamma_d);
          cfg.grid_spacing = grid_h;
          if (domain_length > 0.0) cfg.half_length = domain_length;
          const GridSolution* guess = (opts.continuation && !results.empty()) ? &results.back().solution : nullptr;
          results.push_back(solve_minimal_tail(cfg, guess, opts.tail));
        }
      } else {
        opts.grid_ratio = grid_ratio;
        results = measure_sweep(epsilons, opts);
      }
      std::string log;
      std::vector<TailMeasurement> ms;
      for (const auto& r : results) {
        log += to_json(r.measurement).dump() + "\n";
        ms.push_back(r.measurement);
        session.emit("solution_eps" + number_tag(r.config.epsilon) + ".csv", solution_csv(r.solution));
        out << std::setprecision(6) << "eps=" << r.config.epsilon << " L=" << r.config.half_length
            << " amplitude=" << r.measurement.amplitude_measured << " predicted=" << r.measurement.amplitude_predicted
            << " wavelength=" << r.measurement.wavelength_measured << '\n';
      }
      session.emit("tails.jsonl", log);
      if (ms.size() >= kMinFitMeasurements) {
        const ExponentFit fit = fit_exponent(ms, gamma_d);
        nlohmann::json j = {{"slope", fit.slope},
                            {"log_prefactor", fit.log_prefactor},
                            {"r_squared", fit.r_squared},
                            {"predicted_slope", fit.predicted_slope}};
        session.emit("fit.json", dump(j));
        out << std::setprecision(6) << "slope=" << fit.slope << " (predicted " << fit.predicted_slope
            << ") r2=" << fit.r_squared << '\n';
      }
    } else if (command == "compare") {
      const double eps = epsilons.front();
      params["epsilon"] = eps;
      params["x"] = x_value;
      params["n_max"] = n_max;
      params["domain_length"] = domain_length;
      params["grid_h"] = grid_h;
      SolverConfig cfg = default_config(eps, gamma_d);
      if (domain_length > 0.0) cfg.half_length = domain_length;
      if (grid_h > 0.0) cfg.grid_spacing = grid_h;
      validate(cfg);
      if (!(std::abs(x_value) <= cfg.half_length)) {
        std::ostringstream msg;
        msg << "--x " << x_value << " lies beyond the domain half length " << cfg.half_length;
        throw ValidationError(msg.str());
      }
      const SeriesTable table = build_series(n_max, gamma);
      MinimalTailOptions topts;
      topts.lambda_const = lambda_const;
      topts.estimate_error = false;
      const MinimalTailResult bvp = solve_minimal_tail(cfg, nullptr, topts);
      const TruncationComparison cmp = compare_truncation(table, bvp, x_value);
      session.emit("compare.json", dump(to_json(cmp)));
      out << std::setprecision(6) << "optimal_N=" << cmp.optimal_n << " smallest_term=" << cmp.smallest_term
          << " error(optimal_N)=" << cmp.errors.at(cmp.optimal_n)
          << " error(smallest_term)=" << cmp.errors.at(cmp.smallest_term) << " tail_scale=" << cmp.tail_scale << '\n';
    }
    session.finish();
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const MathError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMath;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitMath;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitMath;
  }
}

}  // namespace kdv5
