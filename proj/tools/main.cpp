#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cklcop/experiments.hpp"
#include "json.hpp"

namespace {

using namespace cklcop;

int cmd_sample_gaussian(double rho, std::size_t count, std::uint64_t seed,
                        const std::string& out) {
  RandomSource rng(seed);
  SampleBatch batch = sample_gaussian_copula(GaussianCopulaParams(rho), count, rng);
  write_batch_csv(batch, out);
  std::cerr << "wrote " << batch.points.size() << " points to " << out << "\n";
  return 0;
}

int cmd_sample_minfo(const std::string& basis_tag, double theta,
                     std::size_t count, int sweeps, std::uint64_t seed,
                     const std::string& out) {
  BasisSet basis = BasisSet::from_tags({basis_tag});
  RandomSource rng(seed);
  SampleBatch batch = sample_minfo_approx(
      basis, ThetaVector::Constant(1, theta), count, sweeps, rng);
  write_batch_csv(batch, out);
  std::cerr << "wrote " << batch.points.size() << " points to " << out << "\n";
  return 0;
}

int cmd_estimate(const std::string& input, const std::string& basis_tag,
                 const std::string& method, std::uint64_t seed) {
  std::vector<UnitPoint> points = read_points_csv(input);
  EstimationResult result;
  if (method == "ckl") {
    RandomSource rng(seed);
    result = estimate_ckl(pair_randomly(points, rng),
                          BasisSet::from_tags({basis_tag}));
  } else if (method == "ckl-allpairs") {
    result = estimate_ckl(all_pairs_dataset(points),
                          BasisSet::from_tags({basis_tag}));
  } else {  // "mle", enforced by CLI11
    result = estimate_mle_gaussian(points);
  }
  std::cout << result_to_json(result).dump(2) << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   bool full, bool nested, int jobs) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open: " + config_path);
  nlohmann::json j = nlohmann::json::parse(in);
  ExperimentConfig config = config_from_json(j);
  if (full) {
    config.n_grid = full_grid(config.scenario);
    config.trials = 100;
  }
  if (nested) config.nested = true;
  if (jobs > 0) config.jobs = jobs;

  std::filesystem::create_directories(out_dir);
  auto curves = run_experiment(config);

  nlohmann::json summary;
  summary["out_dir"] = out_dir;
  for (const auto& [name, curve] : curves) {
    std::filesystem::path csv = std::filesystem::path(out_dir) / (name + ".csv");
    emit_csv(curve, csv);
    nlohmann::json c;
    c["csv"] = csv.string();
    if (curve.fit) {
      c["a"] = curve.fit->a;
      c["b"] = curve.fit->b;
    } else {
      c["a"] = nullptr;
      c["b"] = nullptr;
    }
    int failed = 0;
    for (const auto& r : curve.rows) failed += r.trials_failed;
    c["trials_failed"] = failed;
    summary["curves"][name] = c;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_fit(const std::string& input) {
  LogLogFit fit = loglog_fit(read_curve_csv(input));
  nlohmann::json j;
  j["a"] = fit.a;
  j["b"] = fit.b;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scoring, sampling and estimation for minimum information copulas"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "Draw a sample and write it as CSV");
  sample->require_subcommand(1);

  double rho = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::string out;
  auto* gaussian = sample->add_subcommand("gaussian", "Exact Gaussian copula draws");
  gaussian->add_option("--rho", rho, "Correlation parameter, |rho| < 1")
      ->required()
      ->check(CLI::Range(-0.9999999, 0.9999999));
  gaussian->add_option("--count", count, "Number of points")
      ->required()
      ->check(CLI::PositiveNumber);
  gaussian->add_option("--seed", seed, "Random seed (default 1)");
  gaussian->add_option("--out", out, "Output CSV path")->required();

  std::string basis_tag = "gauss";
  double theta = 0.0;
  int sweeps = kDefaultSweeps;
  auto* minfo = sample->add_subcommand(
      "minfo", "Approximate minimum-information-copula draws (pair-swap chain)");
  minfo->add_option("--basis", basis_tag, "Basis tag (default gauss)");
  minfo->add_option("--theta", theta, "Natural parameter")->required();
  minfo->add_option("--count", count, "Number of points")
      ->required()
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  minfo->add_option("--sweeps", sweeps, "Swap sweeps; one sweep = count proposals")
      ->check(CLI::NonNegativeNumber);
  minfo->add_option("--seed", seed, "Random seed (default 1)");
  minfo->add_option("--out", out, "Output CSV path")->required();

  // estimate
  std::string input, method = "ckl";
  auto* estimate =
      app.add_subcommand("estimate", "Estimate theta from an x,y CSV; JSON on stdout");
  estimate->add_option("--input", input, "Input CSV (header x,y)")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("--basis", basis_tag,
                       "Basis tag for CKL methods (default gauss)");
  estimate->add_option("--method", method, "ckl | mle | ckl-allpairs")
      ->check(CLI::IsMember({"ckl", "mle", "ckl-allpairs"}));
  estimate->add_option("--seed", seed, "Seed for the random pairing (default 1)");

  // experiment
  std::string config_path, out_dir;
  bool full = false, nested = false;
  int jobs = 0;
  auto* experiment = app.add_subcommand(
      "experiment", "Run an error-curve experiment from a JSON config");
  experiment->add_option("--config", config_path, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  experiment->add_option("--out-dir", out_dir, "Output directory")->required();
  experiment->add_flag("--full", full,
                       "Full-scale grid (step 10 up to 2000, 100 trials)");
  experiment->add_flag("--nested", nested,
                       "Reuse one 2*max(N) sample per trial (prefix subsets)");
  experiment->add_option("--jobs", jobs, "Worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);

  // fit
  std::string curve_input;
  auto* fit =
      app.add_subcommand("fit", "Fit log(error) ~ a log(N) + b from a curve CSV");
  fit->add_option("--input", curve_input, "Curve CSV path")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gaussian->parsed()) return cmd_sample_gaussian(rho, count, seed, out);
    if (minfo->parsed()) {
      return cmd_sample_minfo(basis_tag, theta, count, sweeps, seed, out);
    }
    if (estimate->parsed()) return cmd_estimate(input, basis_tag, method, seed);
    if (experiment->parsed()) {
      return cmd_experiment(config_path, out_dir, full, nested, jobs);
    }
    if (fit->parsed()) return cmd_fit(curve_input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
