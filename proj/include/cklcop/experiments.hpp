#pragma once

#include <map>
#include <optional>

#include "cklcop/estimation.hpp"

// Error-curve experiments: for each N in a grid, run `trials`
// independent sample -> pair -> estimate trials, record |theta_hat -
// theta_true|, and fit log(error) ~ a log(N) + b by least squares.
// Every trial draws fresh data with seed derive_seed(base_seed, N, t),
// so results are reproducible and independent of scheduling; --nested
// instead reuses one sample of 2*max(N) points per trial, taking
// prefixes (seed derive_seed(base_seed, max(N), t)).

namespace cklcop {

enum class Scenario { gaussian_exact, gaussian_approx, minfo_approx };

struct ExperimentConfig {
  Scenario scenario = Scenario::gaussian_exact;
  std::string basis_tag = "gauss";
  double true_theta = 0.0;  // derived from rho for gaussian scenarios
  std::optional<double> rho;
  std::vector<int> n_grid;  // empty -> desk_scale_grid()
  int trials = 20;
  std::string estimator = "ckl";  // "ckl" | "mle" | "both"
  std::uint64_t base_seed = 1;
  int sweeps = kDefaultSweeps;  // approx scenarios only
  bool nested = false;
  int jobs = 0;  // worker threads; 0 -> hardware concurrency
};

// {40, 63, 100, 158, 251, 398, 631, 1000, 1585, 2000}: ten
// log-spaced sizes, fast enough for a desk run.
std::vector<int> desk_scale_grid();

// Step-10 grids up to 2000: gaussian scenarios start at 40,
// minfo_approx at 20.
std::vector<int> full_grid(Scenario scenario);

// Validating parse of the JSON mirror of ExperimentConfig; error
// messages name the offending field. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

struct ErrorCurveRow {
  int n = 0;
  double mean_abs_error = 0.0;
  double std_error = 0.0;   // sample std of |error| / sqrt(trials_used)
  int trials_used = 0;      // converged trials; failures are excluded
  int trials_failed = 0;    // and counted, never silently averaged
};

struct LogLogFit {
  double a = 0.0;  // slope:     error ~ N^a e^b
  double b = 0.0;  // intercept
};

struct ErrorCurve {
  std::string estimator;
  std::vector<ErrorCurveRow> rows;
  std::optional<LogLogFit> fit;  // present when >= 3 usable rows
};

// OLS of log(error) on log(N). Rows with non-finite or non-positive
// error are excluded with a warning on stderr; fewer than 3 usable
// rows is an error.
LogLogFit loglog_fit(const std::vector<std::pair<double, double>>& points);

// Keys are estimator names ("ckl", "mle"). Identical configs produce
// identical curves regardless of the jobs setting.
std::map<std::string, ErrorCurve> run_experiment(const ExperimentConfig& config);

// CSV with header "N,mean_abs_error,std_error,trials_used" plus a fit
// sidecar {"a": ..., "b": ...} (nulls when no fit) at
// <path with extension replaced by ".fit.json">.
void emit_csv(const ErrorCurve& curve, const std::filesystem::path& csv_path);

// Reads (N, mean_abs_error) back from a curve CSV.
std::vector<std::pair<double, double>> read_curve_csv(
    const std::filesystem::path& csv_path);

}  // namespace cklcop
