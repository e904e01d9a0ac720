#include "cklcop/estimation.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "cklcop/normal.hpp"

namespace cklcop {

namespace {

void check_config(const OptimizerConfig& config) {
  if (!(config.step > 0.0)) {
    throw std::invalid_argument("OptimizerConfig: step must be positive");
  }
  if (!(config.grad_tol > 0.0)) {
    throw std::invalid_argument("OptimizerConfig: grad_tol must be positive");
  }
  if (config.max_iters < 0) {
    throw std::invalid_argument("OptimizerConfig: max_iters must be >= 0");
  }
}

ThetaVector starting_point(const OptimizerConfig& config, Eigen::Index k) {
  if (config.theta0.size() == 0) return ThetaVector::Zero(k);
  if (config.theta0.size() != k) {
    throw std::invalid_argument("OptimizerConfig: theta0 length mismatch");
  }
  if (!config.theta0.allFinite()) {
    throw std::invalid_argument("OptimizerConfig: theta0 must be finite");
  }
  return config.theta0;
}

std::string format_iterate(const ThetaVector& theta) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (i) os << ", ";
    os << theta[i];
  }
  os << "]";
  return os.str();
}

using ValueFn = std::function<double(const ThetaVector&)>;
using GradFn = std::function<ThetaVector(const ThetaVector&)>;
using HessFn = std::function<Eigen::MatrixXd(const ThetaVector&)>;

// Shared descent loop. Gradient descent takes theta - step * grad;
// Newton solves H d = g (ridge 1e-10 I when the solve is unusable) and
// takes a unit step. Either way a halving line search only accepts
// iterates with score <= current + 1e-12, so accepted scores are
// monotone. Convergence means ||grad||_inf <= grad_tol; hitting
// max_iters or a stalled line search reports converged = false.
EstimationResult minimize(const ValueFn& value, const GradFn& grad,
                          const HessFn& hess, const OptimizerConfig& config,
                          Eigen::Index k) {
  check_config(config);
  ThetaVector theta = starting_point(config, k);
  double score = value(theta);
  if (!std::isfinite(score)) {
    throw std::runtime_error("estimation: objective not finite at start " +
                             format_iterate(theta));
  }
  ThetaVector g = grad(theta);
  double gnorm = g.lpNorm<Eigen::Infinity>();

  EstimationResult result;
  result.iterations = 0;
  while (true) {
    if (gnorm <= config.grad_tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= config.max_iters) break;

    ThetaVector direction = g;
    double step = config.step;
    if (config.method == OptimMethod::newton && hess) {
      Eigen::MatrixXd h = hess(theta);
      ThetaVector d = h.ldlt().solve(g);
      if (!d.allFinite() || d.dot(g) <= 0.0) {
        Eigen::MatrixXd ridged =
            h + 1e-10 * Eigen::MatrixXd::Identity(h.rows(), h.cols());
        d = ridged.ldlt().solve(g);
      }
      if (d.allFinite() && d.dot(g) > 0.0) {
        direction = d;
        step = 1.0;
      }
    }

    bool accepted = false;
    for (int halving = 0; halving < 64; ++halving) {
      ThetaVector candidate = theta - step * direction;
      double s = value(candidate);
      if (std::isnan(s)) {
        throw std::runtime_error("estimation: objective is NaN at iterate " +
                                 format_iterate(candidate));
      }
      if (s <= score + 1e-12) {
        theta = std::move(candidate);
        score = s;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search exhausted below machine scale

    g = grad(theta);
    gnorm = g.lpNorm<Eigen::Infinity>();
    ++result.iterations;
  }

  result.theta_hat = std::move(theta);
  result.final_grad_norm = gnorm;
  result.score_at_optimum = score;
  return result;
}

}  // namespace

nlohmann::json result_to_json(const EstimationResult& result) {
  nlohmann::json j;
  j["theta_hat"] =
      std::vector<double>(result.theta_hat.begin(), result.theta_hat.end());
  j["iterations"] = result.iterations;
  j["final_grad_norm"] = result.final_grad_norm;
  j["converged"] = result.converged;
  j["score"] = result.score_at_optimum;
  return j;
}

PairedDataset pair_randomly(const std::vector<UnitPoint>& points,
                            RandomSource& rng) {
  const std::size_t n = points.size();
  if (n < 2) {
    throw std::invalid_argument("pair_randomly: need at least 2 points");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = rng.index_below(i + 1);
    std::swap(perm[i], perm[j]);
  }
  // Odd n: the point left at the end of the shuffle is the uniformly
  // random discard.
  PairedDataset data;
  data.n_original = n;
  data.pairs.reserve(n / 2);
  for (std::size_t i = 0; i + 1 < n; i += 2) {
    const UnitPoint& a = points[perm[i]];
    const UnitPoint& b = points[perm[i + 1]];
    data.pairs.emplace_back(a.x, a.y, b.x, b.y);
  }
  return data;
}

EstimationResult estimate_ckl(const PairedDataset& data, const BasisSet& basis,
                              const OptimizerConfig& config) {
  if (data.pairs.empty()) {
    throw std::invalid_argument("estimate_ckl: dataset is empty");
  }
  const Eigen::MatrixXd h = h_matrix(data, basis);
  auto value = [&h](const ThetaVector& th) {
    return empirical_score_from_h(h, th);
  };
  auto grad = [&h](const ThetaVector& th) {
    return empirical_gradient_from_h(h, th);
  };
  auto hess = [&h](const ThetaVector& th) {
    return empirical_hessian_from_h(h, th);
  };
  return minimize(value, grad, hess, config,
                  static_cast<Eigen::Index>(basis.size()));
}

EstimationResult estimate_mle_gaussian(const std::vector<UnitPoint>& points,
                                       const OptimizerConfig& config) {
  if (points.size() < 2) {
    throw std::invalid_argument("estimate_mle_gaussian: need at least 2 points");
  }
  long double sum_xy = 0.0L;
  long double sum_ss = 0.0L;
  for (const auto& p : points) {
    if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0)) {
      throw std::domain_error(
          "estimate_mle_gaussian: points must be strictly inside (0,1)^2");
    }
    double xi = std_normal_quantile(p.x);
    double eta = std_normal_quantile(p.y);
    sum_xy += static_cast<long double>(xi) * static_cast<long double>(eta);
    sum_ss += static_cast<long double>(xi) * xi +
              static_cast<long double>(eta) * eta;
  }
  const double m_xy =
      static_cast<double>(sum_xy / static_cast<long double>(points.size()));
  const double m_ss =
      static_cast<double>(sum_ss / static_cast<long double>(points.size()));

  // Mean of -log c_rho over the points, through the two sufficient
  // moments of the normal scores.
  auto value = [m_xy, m_ss](const ThetaVector& th) {
    double rho = theta_to_rho(th[0]);
    double one_minus = 1.0 - rho * rho;
    return 0.5 * std::log1p(-rho * rho) -
           (2.0 * rho * m_xy - rho * rho * m_ss) / (2.0 * one_minus);
  };
  auto grad = [&value](const ThetaVector& th) {
    constexpr double fd = 1e-6;
    ThetaVector up = th, down = th;
    up[0] += fd;
    down[0] -= fd;
    ThetaVector g(1);
    g[0] = (value(up) - value(down)) / (2.0 * fd);
    return g;
  };
  auto hess = [&value](const ThetaVector& th) {
    constexpr double fd = 1e-4;
    ThetaVector up = th, down = th;
    up[0] += fd;
    down[0] -= fd;
    Eigen::MatrixXd h(1, 1);
    h(0, 0) = (value(up) - 2.0 * value(th) + value(down)) / (fd * fd);
    return h;
  };
  return minimize(value, grad, hess, config, 1);
}

}  // namespace cklcop
