#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cklcop/estimation.hpp"
#include "cklcop/experiments.hpp"
#include "cklcop/normal.hpp"

namespace py = pybind11;
using namespace cklcop;

namespace {

std::vector<UnitPoint> points_from_matrix(const Eigen::MatrixXd& m) {
  if (m.cols() != 2) {
    throw std::invalid_argument("points: expected an (n, 2) array");
  }
  std::vector<UnitPoint> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m(i, 0), m(i, 1));
  return out;
}

Eigen::MatrixXd matrix_from_points(const std::vector<UnitPoint>& points) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = points[i].x;
    m(static_cast<Eigen::Index>(i), 1) = points[i].y;
  }
  return m;
}

PairedDataset pairs_from_matrix(const Eigen::MatrixXd& m) {
  if (m.cols() != 4) {
    throw std::invalid_argument("pairs: expected an (N, 4) array of x1,y1,x2,y2");
  }
  PairedDataset data;
  data.n_original = 2 * static_cast<std::size_t>(m.rows());
  data.pairs.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    data.pairs.emplace_back(m(i, 0), m(i, 1), m(i, 2), m(i, 3));
  }
  return data;
}

Eigen::MatrixXd matrix_from_pairs(const PairedDataset& data) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.pairs.size()), 4);
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    const auto& p = data.pairs[i];
    auto r = static_cast<Eigen::Index>(i);
    m(r, 0) = p.x1;
    m(r, 1) = p.y1;
    m(r, 2) = p.x2;
    m(r, 3) = p.y2;
  }
  return m;
}

OptimizerConfig make_config(const std::optional<Eigen::VectorXd>& theta0,
                            double step, double grad_tol, long max_iters,
                            const std::string& method) {
  OptimizerConfig config;
  if (theta0) config.theta0 = *theta0;
  config.step = step;
  config.grad_tol = grad_tol;
  config.max_iters = max_iters;
  if (method == "newton") {
    config.method = OptimMethod::newton;
  } else if (method != "gradient-descent") {
    throw std::invalid_argument(
        "method: expected 'gradient-descent' or 'newton'");
  }
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Conditional Kullback-Leibler scoring, sampling and estimation for "
      "minimum information copulas";
  m.attr("__version__") = "0.1.0";
  m.attr("DEFAULT_SWEEPS") = kDefaultSweeps;

  py::class_<EstimationResult>(m, "EstimationResult")
      .def_readonly("theta_hat", &EstimationResult::theta_hat)
      .def_readonly("iterations", &EstimationResult::iterations)
      .def_readonly("final_grad_norm", &EstimationResult::final_grad_norm)
      .def_readonly("converged", &EstimationResult::converged)
      .def_readonly("score", &EstimationResult::score_at_optimum)
      .def("__repr__", [](const EstimationResult& r) {
        std::string theta = "[";
        for (Eigen::Index i = 0; i < r.theta_hat.size(); ++i) {
          if (i) theta += ", ";
          theta += std::to_string(r.theta_hat[i]);
        }
        theta += "]";
        return "EstimationResult(theta_hat=" + theta +
               ", iterations=" + std::to_string(r.iterations) +
               ", converged=" + (r.converged ? "True" : "False") + ")";
      });

  m.def("std_normal_cdf", &std_normal_cdf, py::arg("z"));
  m.def("std_normal_quantile", &std_normal_quantile, py::arg("p"));
  m.def("rho_to_theta", &rho_to_theta, py::arg("rho"));
  m.def("theta_to_rho", &theta_to_rho, py::arg("theta"));
  m.def(
      "gaussian_copula_log_density",
      [](double rho, double x, double y) {
        return gaussian_copula_log_density(GaussianCopulaParams(rho), x, y);
      },
      py::arg("rho"), py::arg("x"), py::arg("y"));
  m.def(
      "gaussian_normalizing_function",
      [](double rho, double x) {
        return gaussian_normalizing_function(GaussianCopulaParams(rho), x);
      },
      py::arg("rho"), py::arg("x"));

  m.def("known_basis_tags", &BasisSet::known_tags);
  m.def(
      "register_basis",
      [](const std::string& tag, py::function fn) {
        // The registry is a C++ static that outlives the interpreter, so
        // the callable is held through a deliberately leaked handle:
        // destroying a py::function during static teardown would touch a
        // finalized runtime.
        auto* leaked = new py::function(std::move(fn));
        BasisSet::register_function(tag, [leaked](double x, double y) {
          py::gil_scoped_acquire gil;
          return (*leaked)(x, y).cast<double>();
        });
      },
      py::arg("tag"), py::arg("fn"),
      "Register a user basis function under a new tag (python callables "
      "hold the GIL while evaluating)");

  m.def(
      "h_vector",
      [](double x1, double y1, double x2, double y2,
         const std::vector<std::string>& basis) {
        return h_vector(ObservationPair(x1, y1, x2, y2),
                        BasisSet::from_tags(basis));
      },
      py::arg("x1"), py::arg("y1"), py::arg("x2"), py::arg("y2"),
      py::arg("basis"));
  m.def(
      "ckl_score",
      [](double x1, double y1, double x2, double y2,
         const std::vector<std::string>& basis, const Eigen::VectorXd& theta) {
        return ckl_score(
            ObservationPair(x1, y1, x2, y2),
            UnnormalizedLogDensity(BasisSet::from_tags(basis), theta));
      },
      py::arg("x1"), py::arg("y1"), py::arg("x2"), py::arg("y2"),
      py::arg("basis"), py::arg("theta"));

  m.def(
      "empirical_ckl_score",
      [](const Eigen::MatrixXd& pairs, const std::vector<std::string>& basis,
         const Eigen::VectorXd& theta) {
        return empirical_ckl_score(pairs_from_matrix(pairs),
                                   BasisSet::from_tags(basis), theta);
      },
      py::arg("pairs"), py::arg("basis"), py::arg("theta"));
  m.def(
      "empirical_ckl_gradient",
      [](const Eigen::MatrixXd& pairs, const std::vector<std::string>& basis,
         const Eigen::VectorXd& theta) {
        return empirical_ckl_gradient(pairs_from_matrix(pairs),
                                      BasisSet::from_tags(basis), theta);
      },
      py::arg("pairs"), py::arg("basis"), py::arg("theta"));
  m.def(
      "empirical_ckl_hessian",
      [](const Eigen::MatrixXd& pairs, const std::vector<std::string>& basis,
         const Eigen::VectorXd& theta) {
        return empirical_ckl_hessian(pairs_from_matrix(pairs),
                                     BasisSet::from_tags(basis), theta);
      },
      py::arg("pairs"), py::arg("basis"), py::arg("theta"));
  m.def(
      "all_pairs_ckl_score",
      [](const Eigen::MatrixXd& points, const std::vector<std::string>& basis,
         const Eigen::VectorXd& theta) {
        return all_pairs_ckl_score(points_from_matrix(points),
                                   BasisSet::from_tags(basis), theta);
      },
      py::arg("points"), py::arg("basis"), py::arg("theta"));

  m.def(
      "sample_gaussian_copula",
      [](double rho, std::size_t count, std::uint64_t seed) {
        RandomSource rng(seed);
        return matrix_from_points(
            sample_gaussian_copula(GaussianCopulaParams(rho), count, rng).points);
      },
      py::arg("rho"), py::arg("count"), py::arg("seed"));
  m.def(
      "sample_minfo_approx",
      [](const std::vector<std::string>& basis, const Eigen::VectorXd& theta,
         std::size_t count, int sweeps, std::uint64_t seed) {
        RandomSource rng(seed);
        return matrix_from_points(
            sample_minfo_approx(BasisSet::from_tags(basis), theta, count, sweeps,
                                rng)
                .points);
      },
      py::arg("basis"), py::arg("theta"), py::arg("count"),
      py::arg("sweeps") = kDefaultSweeps, py::arg("seed") = 1);
  m.def(
      "swap_probability",
      [](const std::vector<std::string>& basis, const Eigen::VectorXd& theta,
         double xi, double yi, double xj, double yj) {
        return swap_probability(BasisSet::from_tags(basis), theta,
                                UnitPoint(xi, yi), UnitPoint(xj, yj));
      },
      py::arg("basis"), py::arg("theta"), py::arg("xi"), py::arg("yi"),
      py::arg("xj"), py::arg("yj"));

  m.def(
      "pair_randomly",
      [](const Eigen::MatrixXd& points, std::uint64_t seed) {
        RandomSource rng(seed);
        return matrix_from_pairs(pair_randomly(points_from_matrix(points), rng));
      },
      py::arg("points"), py::arg("seed"));
  m.def(
      "estimate_ckl",
      [](const Eigen::MatrixXd& pairs, const std::vector<std::string>& basis,
         const std::optional<Eigen::VectorXd>& theta0, double step,
         double grad_tol, long max_iters, const std::string& method) {
        return estimate_ckl(pairs_from_matrix(pairs), BasisSet::from_tags(basis),
                            make_config(theta0, step, grad_tol, max_iters, method));
      },
      py::arg("pairs"), py::arg("basis"), py::arg("theta0") = std::nullopt,
      py::arg("step") = 0.1, py::arg("grad_tol") = 1e-8,
      py::arg("max_iters") = 100000, py::arg("method") = "gradient-descent");
  m.def(
      "estimate_mle_gaussian",
      [](const Eigen::MatrixXd& points, const std::optional<Eigen::VectorXd>& theta0,
         double step, double grad_tol, long max_iters, const std::string& method) {
        return estimate_mle_gaussian(
            points_from_matrix(points),
            make_config(theta0, step, grad_tol, max_iters, method));
      },
      py::arg("points"), py::arg("theta0") = std::nullopt, py::arg("step") = 0.1,
      py::arg("grad_tol") = 1e-8, py::arg("max_iters") = 100000,
      py::arg("method") = "gradient-descent");

  m.def(
      "loglog_fit",
      [](const Eigen::VectorXd& n, const Eigen::VectorXd& error) {
        if (n.size() != error.size()) {
          throw std::invalid_argument("loglog_fit: n and error lengths differ");
        }
        std::vector<std::pair<double, double>> points;
        points.reserve(static_cast<std::size_t>(n.size()));
        for (Eigen::Index i = 0; i < n.size(); ++i) {
          points.emplace_back(n[i], error[i]);
        }
        LogLogFit fit = loglog_fit(points);
        return py::make_tuple(fit.a, fit.b);
      },
      py::arg("n"), py::arg("error"));
  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("a"), py::arg("b"));
}
