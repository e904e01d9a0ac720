#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

// Core model types: points on the unit square, basis sets with symbolic
// tags, unnormalized log-densities of exponential-family copulas
//   c_theta(x, y) = exp( sum_i theta_i h_i(x, y) + a(x) + b(y) ),
// and the Gaussian copula closed forms.

namespace cklcop {

using ThetaVector = Eigen::VectorXd;

struct UnitPoint {
  double x;
  double y;
  UnitPoint(double x_, double y_);  // requires finite coordinates in [0,1]
};

struct GaussianCopulaParams {
  double rho;
  explicit GaussianCopulaParams(double rho_);  // requires |rho| < 1
};

// Ordered collection of basis functions h_i : [0,1]^2 -> R.
// Construction through from_tags checks each function is finite on an
// interior grid; linear independence is assumed, not checked.
// Catalog tags: "gauss" (Phi^{-1}(x) Phi^{-1}(y)), "xy", "x2y" (x^2 y).
// register_function adds user-supplied tags; replacing an existing tag
// is rejected. Instances are immutable and safe to share across threads.
class BasisSet {
 public:
  using Fn = std::function<double(double, double)>;

  static BasisSet from_tags(const std::vector<std::string>& tags);
  static void register_function(const std::string& tag, Fn fn);
  static std::vector<std::string> known_tags();

  std::size_t size() const { return fns_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  double evaluate(std::size_t i, double x, double y) const;
  Eigen::VectorXd evaluate_all(double x, double y) const;

 private:
  BasisSet(std::vector<std::string> tags, std::vector<Fn> fns);

  std::vector<std::string> tags_;
  std::vector<Fn> fns_;
};

// log q(x, y) = theta . h(x, y) + a(x) + b(y), with a and b optional
// (absent means 0). a and b need not be normalizing functions; every
// scoring operation that only needs the density up to a(x) + b(y)
// ignores them by construction.
class UnnormalizedLogDensity {
 public:
  using Additive = std::function<double(double)>;

  UnnormalizedLogDensity(BasisSet basis, ThetaVector theta);
  UnnormalizedLogDensity(BasisSet basis, ThetaVector theta, Additive additive_x,
                         Additive additive_y);

  double operator()(double x, double y) const;

  const BasisSet& basis() const { return basis_; }
  const ThetaVector& theta() const { return theta_; }

 private:
  BasisSet basis_;
  ThetaVector theta_;
  Additive additive_x_;  // may be empty
  Additive additive_y_;
};

// Natural parameter of the Gaussian copula under the h(x,y) =
// Phi^{-1}(x) Phi^{-1}(y) basis: theta = rho / (1 - rho^2), and its
// inverse rho = 2 theta / (1 + sqrt(1 + 4 theta^2)). Mutually inverse
// bijections (-1,1) <-> R, strictly increasing.
double rho_to_theta(double rho);
double theta_to_rho(double theta);

// log of the Gaussian copula density at a strictly interior point.
double gaussian_copula_log_density(const GaussianCopulaParams& params, double x,
                                   double y);

// The normalizing function a(x) of the Gaussian copula written in the
// exponential-family form above (b(y) = a(y) by symmetry).
double gaussian_normalizing_function(const GaussianCopulaParams& params,
                                     double x);

// The fully normalized Gaussian copula as an UnnormalizedLogDensity:
// basis {"gauss"}, theta = rho/(1-rho^2), additive parts both a(.).
UnnormalizedLogDensity gaussian_copula_model(const GaussianCopulaParams& params);

}  // namespace cklcop
