#include "cklcop/scoring.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cklcop {

namespace {

void check_theta(const Eigen::MatrixXd& h, const ThetaVector& theta) {
  if (theta.size() != h.cols()) {
    throw std::invalid_argument("theta length does not match basis size");
  }
  if (!theta.allFinite()) {
    throw std::invalid_argument("theta must be finite");
  }
}

// Labels the four corners of a pair in evaluation order.
constexpr const char* kCornerName[4] = {"(x1, y1)", "(x1, y2)", "(x2, y1)",
                                        "(x2, y2)"};

// Neumaier-compensated sum in fixed index order. Plain accumulation
// drifts by an ulp once the running sum outgrows the 64-bit mantissa
// (~3e3 terms of size 1), which would break the exact
// mean-of-identical-values identity the score relies on at theta = 0.
struct CompensatedSum {
  long double sum = 0.0L;
  long double comp = 0.0L;
  void add(long double v) {
    const long double t = sum + v;
    if (fabsl(sum) >= fabsl(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  long double value() const { return sum + comp; }
};

}  // namespace

double softplus(double t) {
  if (t > 30.0) return t + std::exp(-t);
  if (t < -30.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

ObservationPair::ObservationPair(double x1_, double y1_, double x2_, double y2_)
    : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
  for (double v : {x1, y1, x2, y2}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(
          "ObservationPair: coordinates must lie in [0,1]");
    }
  }
}

double ckl_score(const ObservationPair& pair, const UnnormalizedLogDensity& log_q) {
  const double corners[4] = {
      log_q(pair.x1, pair.y1), log_q(pair.x1, pair.y2),
      log_q(pair.x2, pair.y1), log_q(pair.x2, pair.y2)};
  for (int c = 0; c < 4; ++c) {
    if (!std::isfinite(corners[c])) {
      throw std::runtime_error(std::string("ckl_score: log-density not finite "
                                           "at corner ") +
                               kCornerName[c]);
    }
  }
  // The score depends on log q only through theta . H: the additive
  // components cancel identically, so they are never part of the sum.
  double t = log_q.theta().dot(h_vector(pair, log_q.basis()));
  if (!std::isfinite(t)) {
    throw std::runtime_error(
        "ckl_score: basis evaluation not finite at a corner");
  }
  return softplus(t);
}

double kl_score(const UnitPoint& point, const UnnormalizedLogDensity& log_q) {
  double v = log_q(point.x, point.y);
  if (!std::isfinite(v)) {
    throw std::runtime_error("kl_score: log-density not finite at the point");
  }
  return -v;
}

Eigen::VectorXd h_vector(const ObservationPair& pair, const BasisSet& basis) {
  Eigen::VectorXd h12 = basis.evaluate_all(pair.x1, pair.y2);
  Eigen::VectorXd h21 = basis.evaluate_all(pair.x2, pair.y1);
  Eigen::VectorXd h11 = basis.evaluate_all(pair.x1, pair.y1);
  Eigen::VectorXd h22 = basis.evaluate_all(pair.x2, pair.y2);
  return (h12 + h21) - (h11 + h22);
}

Eigen::MatrixXd h_matrix(const PairedDataset& data, const BasisSet& basis) {
  if (data.pairs.empty()) {
    throw std::invalid_argument("h_matrix: dataset is empty");
  }
  Eigen::MatrixXd h(static_cast<Eigen::Index>(data.pairs.size()),
                    static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    Eigen::VectorXd row = h_vector(data.pairs[i], basis);
    if (!row.allFinite()) {
      throw std::runtime_error("h_matrix: basis evaluation not finite for pair " +
                               std::to_string(i));
    }
    h.row(static_cast<Eigen::Index>(i)) = row;
  }
  return h;
}

double empirical_score_from_h(const Eigen::MatrixXd& h, const ThetaVector& theta) {
  check_theta(h, theta);
  const Eigen::Index n = h.rows();
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc.add(static_cast<long double>(softplus(h.row(i).dot(theta))));
  }
  return static_cast<double>(acc.value() / static_cast<long double>(n));
}

Eigen::VectorXd empirical_gradient_from_h(const Eigen::MatrixXd& h,
                                          const ThetaVector& theta) {
  check_theta(h, theta);
  const Eigen::Index n = h.rows();
  const Eigen::Index k = h.cols();
  Eigen::Matrix<long double, Eigen::Dynamic, 1> acc =
      Eigen::Matrix<long double, Eigen::Dynamic, 1>::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    long double s = static_cast<long double>(logistic(h.row(i).dot(theta)));
    for (Eigen::Index j = 0; j < k; ++j) {
      acc[j] += s * static_cast<long double>(h(i, j));
    }
  }
  Eigen::VectorXd out(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    out[j] = static_cast<double>(acc[j] / static_cast<long double>(n));
  }
  return out;
}

Eigen::MatrixXd empirical_hessian_from_h(const Eigen::MatrixXd& h,
                                         const ThetaVector& theta) {
  check_theta(h, theta);
  const Eigen::Index n = h.rows();
  const Eigen::Index k = h.cols();
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> acc =
      Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = h.row(i).dot(theta);
    long double w =
        static_cast<long double>(logistic(t)) * static_cast<long double>(logistic(-t));
    for (Eigen::Index j = 0; j < k; ++j) {
      long double hj = w * static_cast<long double>(h(i, j));
      for (Eigen::Index l = j; l < k; ++l) {
        acc(j, l) += hj * static_cast<long double>(h(i, l));
      }
    }
  }
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index l = j; l < k; ++l) {
      double v = static_cast<double>(acc(j, l) / static_cast<long double>(n));
      out(j, l) = v;
      out(l, j) = v;
    }
  }
  return out;
}

double empirical_ckl_score(const PairedDataset& data, const BasisSet& basis,
                           const ThetaVector& theta) {
  return empirical_score_from_h(h_matrix(data, basis), theta);
}

Eigen::VectorXd empirical_ckl_gradient(const PairedDataset& data,
                                       const BasisSet& basis,
                                       const ThetaVector& theta) {
  return empirical_gradient_from_h(h_matrix(data, basis), theta);
}

Eigen::MatrixXd empirical_ckl_hessian(const PairedDataset& data,
                                      const BasisSet& basis,
                                      const ThetaVector& theta) {
  return empirical_hessian_from_h(h_matrix(data, basis), theta);
}

double all_pairs_ckl_score(const std::vector<UnitPoint>& points,
                           const BasisSet& basis, const ThetaVector& theta) {
  const std::size_t n = points.size();
  if (n < 2) {
    throw std::invalid_argument("all_pairs_ckl_score: need at least 2 points");
  }
  if (static_cast<std::size_t>(theta.size()) != basis.size()) {
    throw std::invalid_argument("theta length does not match basis size");
  }
  if (!theta.allFinite()) {
    throw std::invalid_argument("theta must be finite");
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ObservationPair pair(points[i].x, points[i].y, points[j].x, points[j].y);
      double t = theta.dot(h_vector(pair, basis));
      if (!std::isfinite(t)) {
        throw std::runtime_error(
            "all_pairs_ckl_score: basis evaluation not finite for points " +
            std::to_string(i) + ", " + std::to_string(j));
      }
      acc.add(static_cast<long double>(softplus(t)));
    }
  }
  long double count = 0.5L * static_cast<long double>(n) *
                      static_cast<long double>(n - 1);
  return static_cast<double>(acc.value() / count);
}

PairedDataset all_pairs_dataset(const std::vector<UnitPoint>& points) {
  const std::size_t n = points.size();
  if (n < 2) {
    throw std::invalid_argument("all_pairs_dataset: need at least 2 points");
  }
  PairedDataset out;
  out.n_original = n;
  out.pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.pairs.emplace_back(points[i].x, points[i].y, points[j].x, points[j].y);
    }
  }
  return out;
}

}  // namespace cklcop
