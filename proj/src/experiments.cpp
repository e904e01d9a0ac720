#include "cklcop/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

namespace cklcop {

namespace {

constexpr const char* kScenarioNames[] = {"gaussian-exact", "gaussian-approx",
                                          "minfo-approx"};

std::string scenario_name(Scenario s) {
  return kScenarioNames[static_cast<int>(s)];
}

Scenario scenario_from_name(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == kScenarioNames[i]) return static_cast<Scenario>(i);
  }
  throw std::invalid_argument(
      "scenario: expected one of gaussian-exact, gaussian-approx, minfo-approx; "
      "got '" +
      name + "'");
}

bool is_gaussian(Scenario s) { return s != Scenario::minfo_approx; }

// Resolves the true theta and validates scenario-dependent fields.
double resolve_true_theta(const ExperimentConfig& config) {
  if (is_gaussian(config.scenario)) {
    if (!config.rho) {
      throw std::invalid_argument("rho: required for gaussian scenarios");
    }
    return rho_to_theta(*config.rho);
  }
  if (!std::isfinite(config.true_theta)) {
    throw std::invalid_argument("true_theta: required for minfo-approx");
  }
  return config.true_theta;
}

void validate(const ExperimentConfig& config) {
  if (config.trials < 1) {
    throw std::invalid_argument("trials: must be >= 1");
  }
  if (config.estimator != "ckl" && config.estimator != "mle" &&
      config.estimator != "both") {
    throw std::invalid_argument("estimator: expected ckl, mle or both; got '" +
                                config.estimator + "'");
  }
  if (config.estimator != "ckl" && !is_gaussian(config.scenario)) {
    throw std::invalid_argument(
        "estimator: the mle baseline is only defined for gaussian scenarios");
  }
  if (config.sweeps < 1 && config.scenario != Scenario::gaussian_exact) {
    throw std::invalid_argument("sweeps: must be >= 1 for approximate sampling");
  }
  if (config.jobs < 0) {
    throw std::invalid_argument("jobs: must be >= 0");
  }
  const auto& grid = config.n_grid;
  if (grid.empty()) throw std::invalid_argument("N_grid: must be nonempty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 2) throw std::invalid_argument("N_grid: entries must be >= 2");
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw std::invalid_argument("N_grid: must be strictly increasing");
    }
  }
}

struct TrialSlot {
  double err_ckl = 0.0;
  double err_mle = 0.0;
  bool ok_ckl = false;
  bool ok_mle = false;
};

SampleBatch draw(const ExperimentConfig& config, const BasisSet& basis,
                 double theta_true, std::size_t count, RandomSource& rng) {
  switch (config.scenario) {
    case Scenario::gaussian_exact:
      return sample_gaussian_copula(GaussianCopulaParams(*config.rho), count, rng);
    case Scenario::gaussian_approx:
    case Scenario::minfo_approx: {
      ThetaVector theta = ThetaVector::Constant(1, theta_true);
      return sample_minfo_approx(basis, theta, count, config.sweeps, rng);
    }
  }
  throw std::logic_error("unreachable");
}

// The harness uses Newton steps: same optimum as the default gradient
// descent (agreement is a tested invariant) at a fraction of the
// iterations across thousands of trials.
OptimizerConfig harness_optimizer() {
  OptimizerConfig config;
  config.method = OptimMethod::newton;
  return config;
}

void run_estimators(const ExperimentConfig& config, const BasisSet& basis,
                    double theta_true, const std::vector<UnitPoint>& points,
                    RandomSource& rng, TrialSlot& slot) {
  const bool want_ckl = config.estimator != "mle";
  const bool want_mle = config.estimator != "ckl";
  if (want_ckl) {
    try {
      PairedDataset data = pair_randomly(points, rng);
      EstimationResult res = estimate_ckl(data, basis, harness_optimizer());
      if (res.converged) {
        slot.err_ckl = std::fabs(res.theta_hat[0] - theta_true);
        slot.ok_ckl = true;
      }
    } catch (const std::exception&) {
      // counted as a failed trial below
    }
  }
  if (want_mle) {
    try {
      EstimationResult res = estimate_mle_gaussian(points, harness_optimizer());
      if (res.converged) {
        slot.err_mle = std::fabs(res.theta_hat[0] - theta_true);
        slot.ok_mle = true;
      }
    } catch (const std::exception&) {
    }
  }
}

ErrorCurve aggregate(const ExperimentConfig& config, const std::string& name,
                     const std::vector<TrialSlot>& slots, bool use_mle) {
  const int trials = config.trials;
  ErrorCurve curve;
  curve.estimator = name;
  for (std::size_t row = 0; row < config.n_grid.size(); ++row) {
    ErrorCurveRow r;
    r.n = config.n_grid[row];
    long double sum = 0.0L;
    std::vector<double> errs;
    errs.reserve(trials);
    for (int t = 0; t < trials; ++t) {
      const TrialSlot& s = slots[row * trials + t];
      const bool ok = use_mle ? s.ok_mle : s.ok_ckl;
      if (!ok) continue;
      double e = use_mle ? s.err_mle : s.err_ckl;
      errs.push_back(e);
      sum += e;
    }
    r.trials_used = static_cast<int>(errs.size());
    r.trials_failed = trials - r.trials_used;
    if (!errs.empty()) {
      r.mean_abs_error =
          static_cast<double>(sum / static_cast<long double>(errs.size()));
      if (errs.size() > 1) {
        long double ss = 0.0L;
        for (double e : errs) {
          long double d = static_cast<long double>(e) - r.mean_abs_error;
          ss += d * d;
        }
        double sd = std::sqrt(static_cast<double>(
            ss / static_cast<long double>(errs.size() - 1)));
        r.std_error = sd / std::sqrt(static_cast<double>(errs.size()));
      }
    } else {
      r.mean_abs_error = std::nan("");
      r.std_error = std::nan("");
    }
    curve.rows.push_back(r);
  }

  std::vector<std::pair<double, double>> usable;
  for (const auto& r : curve.rows) {
    if (r.trials_used > 0 && std::isfinite(r.mean_abs_error) &&
        r.mean_abs_error > 0.0) {
      usable.emplace_back(static_cast<double>(r.n), r.mean_abs_error);
    }
  }
  if (usable.size() >= 3) curve.fit = loglog_fit(usable);
  return curve;
}

}  // namespace

std::vector<int> desk_scale_grid() {
  return {40, 63, 100, 158, 251, 398, 631, 1000, 1585, 2000};
}

std::vector<int> full_grid(Scenario scenario) {
  std::vector<int> grid;
  for (int n = is_gaussian(scenario) ? 40 : 20; n <= 2000; n += 10) {
    grid.push_back(n);
  }
  return grid;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("experiment config: expected a JSON object");
  }
  static const std::set<std::string> known = {
      "scenario", "basis",     "true_theta", "rho",    "N_grid", "trials",
      "estimator", "base_seed", "sweeps",     "nested", "jobs"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw std::invalid_argument("experiment config: unknown field '" + key +
                                  "'");
    }
  }

  ExperimentConfig config;
  if (!j.contains("scenario") || !j["scenario"].is_string()) {
    throw std::invalid_argument("scenario: required string");
  }
  config.scenario = scenario_from_name(j["scenario"].get<std::string>());

  if (j.contains("basis")) {
    if (!j["basis"].is_string()) {
      throw std::invalid_argument("basis: expected a string tag");
    }
    config.basis_tag = j["basis"].get<std::string>();
  }
  if (j.contains("rho")) {
    if (!j["rho"].is_number()) throw std::invalid_argument("rho: expected a number");
    config.rho = j["rho"].get<double>();
    if (!(std::fabs(*config.rho) < 1.0)) {
      throw std::invalid_argument("rho: |rho| must be < 1");
    }
  }
  if (j.contains("true_theta")) {
    if (!j["true_theta"].is_number()) {
      throw std::invalid_argument("true_theta: expected a number");
    }
    config.true_theta = j["true_theta"].get<double>();
  } else if (!is_gaussian(config.scenario)) {
    throw std::invalid_argument("true_theta: required for minfo-approx");
  } else {
    config.true_theta = std::nan("");
  }
  if (is_gaussian(config.scenario)) {
    if (!config.rho) {
      throw std::invalid_argument("rho: required for gaussian scenarios");
    }
    double derived = rho_to_theta(*config.rho);
    if (std::isfinite(config.true_theta) &&
        std::fabs(config.true_theta - derived) > 1e-6) {
      throw std::invalid_argument(
          "true_theta: inconsistent with rho (expected rho/(1-rho^2))");
    }
    config.true_theta = derived;
  }

  if (j.contains("N_grid")) {
    if (!j["N_grid"].is_array()) {
      throw std::invalid_argument("N_grid: expected an array of integers");
    }
    config.n_grid.clear();
    for (const auto& v : j["N_grid"]) {
      if (!v.is_number_integer()) {
        throw std::invalid_argument("N_grid: entries must be integers");
      }
      config.n_grid.push_back(v.get<int>());
    }
  } else {
    config.n_grid = desk_scale_grid();
  }
  if (j.contains("trials")) {
    if (!j["trials"].is_number_integer()) {
      throw std::invalid_argument("trials: expected an integer");
    }
    config.trials = j["trials"].get<int>();
  }
  if (j.contains("estimator")) {
    if (!j["estimator"].is_string()) {
      throw std::invalid_argument("estimator: expected a string");
    }
    config.estimator = j["estimator"].get<std::string>();
  }
  if (j.contains("base_seed")) {
    if (!j["base_seed"].is_number_integer()) {
      throw std::invalid_argument("base_seed: expected an integer");
    }
    config.base_seed = j["base_seed"].get<std::uint64_t>();
  }
  if (j.contains("sweeps")) {
    if (!j["sweeps"].is_number_integer()) {
      throw std::invalid_argument("sweeps: expected an integer");
    }
    config.sweeps = j["sweeps"].get<int>();
  }
  if (j.contains("nested")) {
    if (!j["nested"].is_boolean()) {
      throw std::invalid_argument("nested: expected a boolean");
    }
    config.nested = j["nested"].get<bool>();
  }
  if (j.contains("jobs")) {
    if (!j["jobs"].is_number_integer()) {
      throw std::invalid_argument("jobs: expected an integer");
    }
    config.jobs = j["jobs"].get<int>();
  }

  // Surface validation problems at parse time, with field names.
  validate(config);
  BasisSet::from_tags({config.basis_tag});
  resolve_true_theta(config);
  return config;
}

LogLogFit loglog_fit(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> usable;
  for (const auto& [x, y] : points) {
    if (std::isfinite(x) && std::isfinite(y) && x > 0.0 && y > 0.0) {
      usable.emplace_back(x, y);
    } else {
      std::cerr << "loglog_fit: excluding row (N=" << x << ", error=" << y
                << ")\n";
    }
  }
  if (usable.size() < 3) {
    throw std::invalid_argument("loglog_fit: need at least 3 usable rows");
  }
  long double sx = 0.0L, sy = 0.0L, sxx = 0.0L, sxy = 0.0L;
  for (const auto& [x, y] : usable) {
    long double lx = std::log(static_cast<long double>(x));
    long double ly = std::log(static_cast<long double>(y));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const long double n = static_cast<long double>(usable.size());
  const long double det = n * sxx - sx * sx;
  if (!(det > 0.0L)) {
    throw std::invalid_argument("loglog_fit: N values must not all coincide");
  }
  const long double slope = (n * sxy - sx * sy) / det;
  LogLogFit fit;
  fit.a = static_cast<double>(slope);
  fit.b = static_cast<double>((sy - slope * sx) / n);
  return fit;
}

std::map<std::string, ErrorCurve> run_experiment(const ExperimentConfig& config) {
  validate(config);
  const BasisSet basis = BasisSet::from_tags({config.basis_tag});
  const double theta_true = resolve_true_theta(config);

  const std::size_t rows = config.n_grid.size();
  const int trials = config.trials;
  std::vector<TrialSlot> slots(rows * static_cast<std::size_t>(trials));

  // (row, trial) tasks in fresh mode; one whole-grid task per trial in
  // nested mode. Slots are indexed deterministically, so scheduling has
  // no effect on the output.
  const std::size_t tasks =
      config.nested ? static_cast<std::size_t>(trials) : slots.size();
  std::atomic<std::size_t> next{0};
  std::atomic<bool> panic{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run_task = [&](std::size_t idx) {
    if (config.nested) {
      const int t = static_cast<int>(idx);
      const int max_n = config.n_grid.back();
      RandomSource rng(
          derive_seed(config.base_seed, static_cast<std::uint64_t>(max_n),
                      static_cast<std::uint64_t>(t)));
      SampleBatch batch = draw(config, basis, theta_true,
                               2 * static_cast<std::size_t>(max_n), rng);
      for (std::size_t row = 0; row < rows; ++row) {
        std::vector<UnitPoint> prefix(
            batch.points.begin(),
            batch.points.begin() + 2 * static_cast<std::ptrdiff_t>(
                                           config.n_grid[row]));
        run_estimators(config, basis, theta_true, prefix, rng,
                       slots[row * trials + t]);
      }
    } else {
      const std::size_t row = idx / trials;
      const int t = static_cast<int>(idx % trials);
      const int n = config.n_grid[row];
      RandomSource rng(derive_seed(config.base_seed,
                                   static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(t)));
      SampleBatch batch =
          draw(config, basis, theta_true, 2 * static_cast<std::size_t>(n), rng);
      run_estimators(config, basis, theta_true, batch.points, rng, slots[idx]);
    }
  };

  auto worker = [&] {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= tasks || panic.load()) break;
      try {
        run_task(idx);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        panic.store(true);
        break;
      }
    }
  };

  unsigned workers = config.jobs > 0
                         ? static_cast<unsigned>(config.jobs)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, std::max<std::size_t>(tasks, 1)));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  std::map<std::string, ErrorCurve> out;
  if (config.estimator != "mle") {
    out["ckl"] = aggregate(config, "ckl", slots, /*use_mle=*/false);
  }
  if (config.estimator != "ckl") {
    out["mle"] = aggregate(config, "mle", slots, /*use_mle=*/true);
  }
  return out;
}

void emit_csv(const ErrorCurve& curve, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + csv_path.string());
  }
  out << "N,mean_abs_error,std_error,trials_used\n";
  char line[128];
  for (const auto& r : curve.rows) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%d\n", r.n,
                  r.mean_abs_error, r.std_error, r.trials_used);
    out << line;
  }
  out.close();
  if (!out) throw std::runtime_error("failed writing: " + csv_path.string());

  nlohmann::json fit;
  if (curve.fit) {
    fit["a"] = curve.fit->a;
    fit["b"] = curve.fit->b;
  } else {
    fit["a"] = nullptr;
    fit["b"] = nullptr;
  }
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".fit.json");
  std::ofstream side(sidecar);
  if (!side) {
    throw std::runtime_error("cannot open for writing: " + sidecar.string());
  }
  side << fit.dump(2) << "\n";
}

std::vector<std::pair<double, double>> read_curve_csv(
    const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open: " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(csv_path.string() + ": empty file");
  }
  auto strip = [](std::string s) {
    s.erase(s.find_last_not_of(" \t\r\n") + 1);
    return s;
  };
  if (strip(line) != "N,mean_abs_error,std_error,trials_used") {
    throw std::runtime_error(csv_path.string() +
                             ": expected header 'N,mean_abs_error,std_error,"
                             "trials_used'");
  }
  std::vector<std::pair<double, double>> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string row = strip(line);
    if (row.empty()) continue;
    double n = 0.0, err = 0.0;
    if (std::sscanf(row.c_str(), "%lf,%lf", &n, &err) != 2) {
      throw std::runtime_error(csv_path.string() + ":" + std::to_string(lineno) +
                               ": malformed row");
    }
    out.emplace_back(n, err);
  }
  return out;
}

}  // namespace cklcop
