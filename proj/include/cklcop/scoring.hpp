#pragma once

#include "cklcop/copula.hpp"

// Conditional Kullback-Leibler (CKL) score for pairs of observations,
// its empirical mean over a paired dataset, and the analytic gradient
// and Hessian in theta. The score of one pair is
//   S = softplus(L),  L = log q(x1,y2) + log q(x2,y1)
//                         - log q(x1,y1) - log q(x2,y2),
// which depends on the model only through H = h12 + h21 - h11 - h22:
// additive a(x) + b(y) components cancel identically, so all routines
// below work on H alone and never evaluate normalizing functions.

namespace cklcop {

// log(1 + e^t); for t > 30 returns t + e^{-t}, for t < -30 returns e^t.
double softplus(double t);

// 1 / (1 + e^{-t}), evaluated without overflow for any t.
double logistic(double t);

// Two observations treated as one scoring unit.
struct ObservationPair {
  double x1, y1, x2, y2;
  ObservationPair(double x1_, double y1_, double x2_, double y2_);
};

struct PairedDataset {
  std::vector<ObservationPair> pairs;
  std::size_t n_original = 0;  // number of points the pairs were formed from
  std::size_t size() const { return pairs.size(); }
};

// CKL score of one pair. Requires log_q finite at all four corners
// (x^i, y^j); a non-finite corner raises an error naming the corner.
// Degenerate pairs (x1 == x2 or y1 == y2) give exactly log 2.
double ckl_score(const ObservationPair& pair, const UnnormalizedLogDensity& log_q);

// Plain log score -log q(x, y). Only meaningful when log_q is fully
// normalized (e.g. gaussian_copula_model).
double kl_score(const UnitPoint& point, const UnnormalizedLogDensity& log_q);

// H = (h(x1,y2) + h(x2,y1)) - (h(x1,y1) + h(x2,y2)), componentwise.
// Symmetric grouping keeps h_vector bitwise invariant under swapping
// the two observations.
Eigen::VectorXd h_vector(const ObservationPair& pair, const BasisSet& basis);

// Rows are H_i^T for each pair; errors if any row is non-finite.
Eigen::MatrixXd h_matrix(const PairedDataset& data, const BasisSet& basis);

// Kernels on a precomputed H matrix. Sums run in index order with
// extended-precision accumulation: results are deterministic and do not
// depend on how callers distribute work across threads.
double empirical_score_from_h(const Eigen::MatrixXd& h, const ThetaVector& theta);
Eigen::VectorXd empirical_gradient_from_h(const Eigen::MatrixXd& h,
                                          const ThetaVector& theta);
Eigen::MatrixXd empirical_hessian_from_h(const Eigen::MatrixXd& h,
                                         const ThetaVector& theta);

// (1/N) sum_i softplus(theta . H_i); smooth, convex, nonnegative.
double empirical_ckl_score(const PairedDataset& data, const BasisSet& basis,
                           const ThetaVector& theta);
// (1/N) sum_i logistic(theta . H_i) H_i.
Eigen::VectorXd empirical_ckl_gradient(const PairedDataset& data,
                                       const BasisSet& basis,
                                       const ThetaVector& theta);
// (1/N) sum_i w_i H_i H_i^T, w_i = logistic(t_i) logistic(-t_i); PSD.
Eigen::MatrixXd empirical_ckl_hessian(const PairedDataset& data,
                                      const BasisSet& basis,
                                      const ThetaVector& theta);

// Mean CKL score over all n(n-1)/2 unordered pairs of points.
// O(n^2 k) time, O(1) extra memory.
double all_pairs_ckl_score(const std::vector<UnitPoint>& points,
                           const BasisSet& basis, const ThetaVector& theta);

// Materializes every unordered pair; O(n^2) memory. Lets the all-pairs
// objective reuse the paired estimation machinery.
PairedDataset all_pairs_dataset(const std::vector<UnitPoint>& points);

}  // namespace cklcop
