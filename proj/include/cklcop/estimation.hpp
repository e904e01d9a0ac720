#pragma once

#include "cklcop/sampling.hpp"
#include "cklcop/scoring.hpp"
#include "json.hpp"

// Estimators: minimize the empirical CKL score over theta (analytic
// gradient, optional Newton steps), and the Gaussian-copula maximum
// likelihood baseline (KL score with finite-difference gradient).
// Both share one descent loop: fixed step scaled by the gradient, a
// backtracking halving safeguard so every accepted iterate weakly
// decreases the objective, convergence when ||grad||_inf <= grad_tol.

namespace cklcop {

enum class OptimMethod { gradient_descent, newton };

struct OptimizerConfig {
  ThetaVector theta0;  // empty -> zeros(k)
  double step = 0.1;
  double grad_tol = 1e-8;
  long max_iters = 100000;
  OptimMethod method = OptimMethod::gradient_descent;
};

struct EstimationResult {
  ThetaVector theta_hat;
  long iterations = 0;  // accepted parameter updates
  double final_grad_norm = 0.0;
  bool converged = false;  // true iff the gradient tolerance was met
  double score_at_optimum = 0.0;
};

// {"theta_hat": [...], "iterations": n, "final_grad_norm": g,
//  "converged": bool, "score": s}
nlohmann::json result_to_json(const EstimationResult& result);

// Uniformly random perfect matching of the points: shuffle, pair
// consecutive. Odd n discards exactly one point, uniformly at random.
PairedDataset pair_randomly(const std::vector<UnitPoint>& points,
                            RandomSource& rng);

EstimationResult estimate_ckl(const PairedDataset& data, const BasisSet& basis,
                              const OptimizerConfig& config = {});

// MLE of the Gaussian copula parameter (k = 1) on raw points, all of
// which must be strictly inside the unit square. The empirical KL score
// reduces to two normal-score moments, so each objective evaluation is
// O(1) after one pass; the gradient is a central difference (step 1e-6).
EstimationResult estimate_mle_gaussian(const std::vector<UnitPoint>& points,
                                       const OptimizerConfig& config = {});

}  // namespace cklcop
