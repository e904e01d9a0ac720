#include "cklcop/copula.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "cklcop/normal.hpp"

namespace cklcop {

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

// Tag -> basis function. Seeded with the catalog; extended through
// BasisSet::register_function. Guarded by registry_mutex().
std::map<std::string, BasisSet::Fn>& registry() {
  static std::map<std::string, BasisSet::Fn> reg = {
      {"gauss",
       [](double x, double y) {
         return std_normal_quantile_extended(x) * std_normal_quantile_extended(y);
       }},
      {"xy", [](double x, double y) { return x * y; }},
      {"x2y", [](double x, double y) { return x * x * y; }},
  };
  return reg;
}

void check_finite_on_grid(const std::string& tag, const BasisSet::Fn& fn) {
  // Interior grid only: catalog functions like "gauss" legitimately
  // diverge on the boundary of the unit square.
  constexpr int m = 16;
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) {
      double x = static_cast<double>(i) / (m + 1);
      double y = static_cast<double>(j) / (m + 1);
      if (!std::isfinite(fn(x, y))) {
        throw std::invalid_argument("basis function '" + tag +
                                    "' is not finite at interior point (" +
                                    std::to_string(x) + ", " + std::to_string(y) +
                                    ")");
      }
    }
  }
}

}  // namespace

UnitPoint::UnitPoint(double x_, double y_) : x(x_), y(y_) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw std::invalid_argument("UnitPoint: coordinates must lie in [0,1]");
  }
}

GaussianCopulaParams::GaussianCopulaParams(double rho_) : rho(rho_) {
  if (!(std::fabs(rho) < 1.0)) {
    throw std::invalid_argument("GaussianCopulaParams: |rho| must be < 1");
  }
}

BasisSet::BasisSet(std::vector<std::string> tags, std::vector<Fn> fns)
    : tags_(std::move(tags)), fns_(std::move(fns)) {}

BasisSet BasisSet::from_tags(const std::vector<std::string>& tags) {
  if (tags.empty()) {
    throw std::invalid_argument("BasisSet: need at least one basis tag");
  }
  std::vector<Fn> fns;
  fns.reserve(tags.size());
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    for (const auto& tag : tags) {
      auto it = registry().find(tag);
      if (it == registry().end()) {
        std::ostringstream msg;
        msg << "unknown basis tag '" << tag << "'; known tags:";
        for (const auto& [known, fn] : registry()) msg << " " << known;
        throw std::invalid_argument(msg.str());
      }
      fns.push_back(it->second);
    }
  }
  for (std::size_t i = 0; i < tags.size(); ++i) {
    check_finite_on_grid(tags[i], fns[i]);
  }
  return BasisSet(tags, std::move(fns));
}

void BasisSet::register_function(const std::string& tag, Fn fn) {
  if (tag.empty()) throw std::invalid_argument("basis tag must be nonempty");
  if (!fn) throw std::invalid_argument("basis function must be callable");
  std::lock_guard<std::mutex> lock(registry_mutex());
  if (!registry().emplace(tag, std::move(fn)).second) {
    throw std::invalid_argument("basis tag '" + tag + "' is already registered");
  }
}

std::vector<std::string> BasisSet::known_tags() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> out;
  out.reserve(registry().size());
  for (const auto& [tag, fn] : registry()) out.push_back(tag);
  return out;
}

double BasisSet::evaluate(std::size_t i, double x, double y) const {
  return fns_.at(i)(x, y);
}

Eigen::VectorXd BasisSet::evaluate_all(double x, double y) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(fns_.size()));
  for (std::size_t i = 0; i < fns_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = fns_[i](x, y);
  }
  return out;
}

UnnormalizedLogDensity::UnnormalizedLogDensity(BasisSet basis, ThetaVector theta)
    : UnnormalizedLogDensity(std::move(basis), std::move(theta), nullptr,
                             nullptr) {}

UnnormalizedLogDensity::UnnormalizedLogDensity(BasisSet basis, ThetaVector theta,
                                               Additive additive_x,
                                               Additive additive_y)
    : basis_(std::move(basis)),
      theta_(std::move(theta)),
      additive_x_(std::move(additive_x)),
      additive_y_(std::move(additive_y)) {
  if (static_cast<std::size_t>(theta_.size()) != basis_.size()) {
    throw std::invalid_argument(
        "UnnormalizedLogDensity: theta length must match basis size");
  }
  if (!theta_.allFinite()) {
    throw std::invalid_argument("UnnormalizedLogDensity: theta must be finite");
  }
}

double UnnormalizedLogDensity::operator()(double x, double y) const {
  double v = theta_.dot(basis_.evaluate_all(x, y));
  if (additive_x_) v += additive_x_(x);
  if (additive_y_) v += additive_y_(y);
  return v;
}

double rho_to_theta(double rho) {
  if (!(std::fabs(rho) < 1.0)) {
    throw std::domain_error("rho_to_theta: |rho| must be < 1");
  }
  return rho / (1.0 - rho * rho);
}

double theta_to_rho(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("theta_to_rho: theta must be finite");
  }
  // Stable root of theta rho^2 + rho - theta = 0 in (-1, 1).
  return 2.0 * theta / (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
}

double gaussian_copula_log_density(const GaussianCopulaParams& params, double x,
                                   double y) {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
    throw std::domain_error(
        "gaussian_copula_log_density: point must be strictly inside (0,1)^2");
  }
  double rho = params.rho;
  double xi = std_normal_quantile(x);
  double eta = std_normal_quantile(y);
  double one_minus = 1.0 - rho * rho;
  // log of 1/(2 pi sqrt(1-rho^2) phi(xi) phi(eta)) *
  //        exp(-(xi^2 - 2 rho xi eta + eta^2)/(2(1-rho^2))),
  // with log phi expanded analytically.
  return -0.5 * std::log1p(-rho * rho) + 0.5 * (xi * xi + eta * eta) -
         (xi * xi - 2.0 * rho * xi * eta + eta * eta) / (2.0 * one_minus);
}

double gaussian_normalizing_function(const GaussianCopulaParams& params,
                                     double x) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::domain_error(
        "gaussian_normalizing_function: x must be strictly inside (0,1)");
  }
  double rho = params.rho;
  double xi = std_normal_quantile(x);
  double one_minus = 1.0 - rho * rho;
  // log of 1/(sqrt(2 pi) (1-rho^2)^{1/4} phi(xi)) * exp(-xi^2/(2(1-rho^2))).
  return -0.25 * std::log1p(-rho * rho) + 0.5 * xi * xi -
         (xi * xi) / (2.0 * one_minus);
}

UnnormalizedLogDensity gaussian_copula_model(const GaussianCopulaParams& params) {
  ThetaVector theta(1);
  theta[0] = rho_to_theta(params.rho);
  auto a = [params](double u) { return gaussian_normalizing_function(params, u); };
  return UnnormalizedLogDensity(BasisSet::from_tags({"gauss"}), std::move(theta),
                                a, a);
}

}  // namespace cklcop
