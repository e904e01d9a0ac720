#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cklcop/experiments.hpp"

using namespace cklcop;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

ExperimentConfig tiny_gaussian_config() {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::gaussian_exact;
  cfg.rho = 0.7;
  cfg.n_grid = {40, 63, 100};
  cfg.trials = 3;
  cfg.estimator = "both";
  cfg.base_seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("grids") {
  auto desk = desk_scale_grid();
  CHECK(desk == std::vector<int>{40, 63, 100, 158, 251, 398, 631, 1000, 1585,
                                 2000});
  auto full_g = full_grid(Scenario::gaussian_exact);
  CHECK(full_g.front() == 40);
  CHECK(full_g.back() == 2000);
  CHECK(full_g.size() == 197);
  CHECK(full_g[1] - full_g[0] == 10);
  auto full_m = full_grid(Scenario::minfo_approx);
  CHECK(full_m.front() == 20);
  CHECK(full_m.back() == 2000);
  CHECK(full_m.size() == 199);
}

TEST_CASE("log log fit recovers exact power laws") {
  std::vector<std::pair<double, double>> rows;
  for (double n : {10.0, 40.0, 160.0, 640.0}) {
    rows.emplace_back(n, std::exp(1.0 - 0.5 * std::log(n)));
  }
  auto fit = loglog_fit(rows);
  CHECK(fit.a == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.b == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<std::pair<double, double>> flat = {
      {10.0, 0.25}, {100.0, 0.25}, {1000.0, 0.25}};
  auto flat_fit = loglog_fit(flat);
  CHECK(flat_fit.a == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(flat_fit.b == doctest::Approx(std::log(0.25)).epsilon(1e-12));
}

TEST_CASE("log log fit excludes unusable rows") {
  std::vector<std::pair<double, double>> rows = {
      {10.0, std::exp(1.0 - 0.5 * std::log(10.0))},
      {40.0, std::exp(1.0 - 0.5 * std::log(40.0))},
      {80.0, 0.0},  // dropped with a warning
      {160.0, std::exp(1.0 - 0.5 * std::log(160.0))}};
  auto fit = loglog_fit(rows);
  CHECK(fit.a == doctest::Approx(-0.5).epsilon(1e-12));

  std::vector<std::pair<double, double>> too_few = {{10.0, 0.5}, {20.0, 0.3}};
  CHECK_THROWS_AS((void)loglog_fit(too_few), std::invalid_argument);
  std::vector<std::pair<double, double>> all_bad = {
      {10.0, 0.0}, {20.0, -1.0}, {30.0, 0.0}, {40.0, 0.0}};
  CHECK_THROWS_AS((void)loglog_fit(all_bad), std::invalid_argument);
}

TEST_CASE("config parsing") {
  auto j = nlohmann::json::parse(R"({
    "scenario": "gaussian-exact",
    "rho": 0.7,
    "N_grid": [40, 100, 400],
    "trials": 5,
    "estimator": "both",
    "base_seed": 99
  })");
  auto cfg = config_from_json(j);
  CHECK(cfg.scenario == Scenario::gaussian_exact);
  CHECK(cfg.rho.has_value());
  CHECK(*cfg.rho == 0.7);
  CHECK(cfg.true_theta == doctest::Approx(0.7 / 0.51).epsilon(1e-15));
  CHECK(cfg.n_grid == std::vector<int>{40, 100, 400});
  CHECK(cfg.trials == 5);
  CHECK(cfg.estimator == "both");
  CHECK(cfg.base_seed == 99);
  CHECK(cfg.sweeps == kDefaultSweeps);
  CHECK_FALSE(cfg.nested);

  auto m = nlohmann::json::parse(R"({
    "scenario": "minfo-approx",
    "basis": "xy",
    "true_theta": 5.0,
    "trials": 2,
    "sweeps": 9,
    "nested": true,
    "jobs": 2
  })");
  auto mcfg = config_from_json(m);
  CHECK(mcfg.scenario == Scenario::minfo_approx);
  CHECK(mcfg.basis_tag == "xy");
  CHECK(mcfg.true_theta == 5.0);
  CHECK(mcfg.n_grid == desk_scale_grid());  // default grid
  CHECK(mcfg.sweeps == 9);
  CHECK(mcfg.nested);
  CHECK(mcfg.jobs == 2);
}

TEST_CASE("config parsing rejects bad input") {
  using nlohmann::json;
  CHECK_THROWS_AS((void)config_from_json(json::parse(R"({})")),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)config_from_json(json::parse(
                      R"({"scenario": "gaussian-exact"})")),
                  std::invalid_argument);  // rho required
  CHECK_THROWS_AS((void)config_from_json(json::parse(
                      R"({"scenario": "minfo-approx", "basis": "xy"})")),
                  std::invalid_argument);  // true_theta required
  CHECK_THROWS_WITH_AS(
      (void)config_from_json(json::parse(
          R"({"scenario": "gaussian-exact", "rho": 0.7, "typo_key": 1})")),
      doctest::Contains("typo_key"), std::invalid_argument);
  CHECK_THROWS_AS((void)config_from_json(json::parse(
                      R"({"scenario": "minfo-approx", "basis": "xy",
                          "true_theta": 5.0, "estimator": "mle"})")),
                  std::invalid_argument);  // mle needs a gaussian scenario
  CHECK_THROWS_AS((void)config_from_json(json::parse(
                      R"({"scenario": "gaussian-exact", "rho": 0.7,
                          "true_theta": 99.0})")),
                  std::invalid_argument);  // contradicts rho
  CHECK_THROWS_AS((void)config_from_json(json::parse(
                      R"({"scenario": "gaussian-exact", "rho": 0.7,
                          "N_grid": [100, 40]})")),
                  std::invalid_argument);  // not increasing
}

TEST_CASE("experiment runs are deterministic and scheduler independent") {
  auto cfg = tiny_gaussian_config();
  cfg.jobs = 1;
  auto one = run_experiment(cfg);
  cfg.jobs = 3;
  auto three = run_experiment(cfg);
  REQUIRE(one.count("ckl") == 1);
  REQUIRE(one.count("mle") == 1);
  REQUIRE(three.count("ckl") == 1);

  for (const auto& name : {"ckl", "mle"}) {
    const auto& a = one.at(name);
    const auto& b = three.at(name);
    REQUIRE(a.rows.size() == 3);
    REQUIRE(b.rows.size() == 3);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].n == b.rows[i].n);
      CHECK(a.rows[i].mean_abs_error == b.rows[i].mean_abs_error);
      CHECK(a.rows[i].std_error == b.rows[i].std_error);
      CHECK(a.rows[i].trials_used == b.rows[i].trials_used);
      CHECK(a.rows[i].trials_failed == 0);
    }
  }

  // identical bytes on disk as well
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cklcop_test_experiments";
  fs::create_directories(dir);
  emit_csv(one.at("ckl"), dir / "a.csv");
  emit_csv(three.at("ckl"), dir / "b.csv");
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  fs::remove_all(dir);
}

TEST_CASE("single cell experiment") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::gaussian_exact;
  cfg.rho = 0.7;
  cfg.n_grid = {100};
  cfg.trials = 1;
  cfg.estimator = "ckl";
  cfg.base_seed = 7;
  auto curves = run_experiment(cfg);
  REQUIRE(curves.count("ckl") == 1);
  const auto& curve = curves.at("ckl");
  REQUIRE(curve.rows.size() == 1);
  CHECK(curve.rows[0].n == 100);
  CHECK(curve.rows[0].trials_used == 1);
  CHECK(curve.rows[0].mean_abs_error >= 0.0);
  CHECK_FALSE(curve.fit.has_value());  // needs 3 usable rows

  auto rerun = run_experiment(cfg);
  CHECK(rerun.at("ckl").rows[0].mean_abs_error == curve.rows[0].mean_abs_error);
}

TEST_CASE("error shrinks between the grid ends") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::gaussian_exact;
  cfg.rho = 0.7;
  cfg.n_grid = {40, 400};
  cfg.trials = 8;
  cfg.estimator = "ckl";
  cfg.base_seed = 11;
  auto curves = run_experiment(cfg);
  const auto& rows = curves.at("ckl").rows;
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].mean_abs_error < rows[0].mean_abs_error);
}

TEST_CASE("approximate scenarios run end to end") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::minfo_approx;
  cfg.basis_tag = "xy";
  cfg.true_theta = 5.0;
  cfg.n_grid = {40, 63, 100};
  cfg.trials = 2;
  cfg.sweeps = 10;
  cfg.base_seed = 13;
  auto curves = run_experiment(cfg);
  const auto& curve = curves.at("ckl");
  REQUIRE(curve.rows.size() == 3);
  for (const auto& row : curve.rows) {
    CHECK(row.trials_used + row.trials_failed == 2);
    CHECK(row.mean_abs_error >= 0.0);
  }

  ExperimentConfig ga = cfg;
  ga.scenario = Scenario::gaussian_approx;
  ga.basis_tag = "gauss";
  ga.true_theta = 0.0;
  ga.rho = 0.6;
  auto ga_curves = run_experiment(ga);
  CHECK(ga_curves.at("ckl").rows.size() == 3);
}

TEST_CASE("nested reuse mode") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::gaussian_exact;
  cfg.rho = 0.7;
  cfg.n_grid = {40, 100, 251};
  cfg.trials = 3;
  cfg.estimator = "ckl";
  cfg.base_seed = 17;
  cfg.nested = true;
  auto curves = run_experiment(cfg);
  REQUIRE(curves.at("ckl").rows.size() == 3);

  auto rerun = run_experiment(cfg);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rerun.at("ckl").rows[i].mean_abs_error ==
          curves.at("ckl").rows[i].mean_abs_error);
  }
}

TEST_CASE("csv emission and readback") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cklcop_test_emit";
  fs::create_directories(dir);

  ErrorCurve curve;
  curve.estimator = "ckl";
  std::vector<std::pair<double, double>> rows;
  for (double n : {10.0, 100.0, 1000.0}) {
    const double err = std::exp(1.0 - 0.5 * std::log(n));
    curve.rows.push_back({static_cast<int>(n), err, err / 10.0, 20, 0});
    rows.emplace_back(n, err);
  }
  curve.fit = loglog_fit(rows);

  const fs::path csv = dir / "curve.csv";
  emit_csv(curve, csv);

  const std::string body = slurp(csv);
  CHECK(body.rfind("N,mean_abs_error,std_error,trials_used\n", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 4);

  auto readback = read_curve_csv(csv);
  REQUIRE(readback.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(readback[i].first == rows[i].first);
    CHECK(readback[i].second == rows[i].second);
  }

  auto sidecar = nlohmann::json::parse(slurp(dir / "curve.fit.json"));
  CHECK(sidecar.at("a").get<double>() == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(sidecar.at("b").get<double>() == doctest::Approx(1.0).epsilon(1e-12));

  // no fit -> null coefficients in the sidecar
  ErrorCurve unfit;
  unfit.estimator = "ckl";
  unfit.rows = {{100, 0.5, 0.1, 5, 0}};
  emit_csv(unfit, dir / "unfit.csv");
  auto side2 = nlohmann::json::parse(slurp(dir / "unfit.fit.json"));
  CHECK(side2.at("a").is_null());
  CHECK(side2.at("b").is_null());

  fs::remove_all(dir);
}
