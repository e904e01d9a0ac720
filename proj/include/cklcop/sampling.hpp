#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "cklcop/copula.hpp"

// Samplers: exact Gaussian copula draws, and the approximate
// pair-swap sampler for minimum information copulas (start from an
// i.i.d. uniform cloud, repeatedly swap y-coordinates of random point
// pairs with the heat-bath probability). The swap chain leaves both
// coordinate multisets untouched, so marginals stay exactly uniform
// in the empirical sense.

namespace cklcop {

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t v);

// Stated hash for per-trial seeds: chained splitmix64 mixes of
// (base, a, b). Any change here changes every derived stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

// Counter-based generator (splitmix64): each output is a hash of an
// incrementing 64-bit state, so identical seeds reproduce identical
// streams bit for bit on every platform.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();

  // (k + 0.5) * 2^-53 for k in [0, 2^53): strictly inside (0,1).
  double next_uniform();

  // Two independent standard normals, Marsaglia polar method.
  std::pair<double, double> next_normal_pair();

  // Uniform on {0, ..., n-1}, unbiased via rejection.
  std::uint64_t index_below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

inline constexpr int kDefaultSweeps = 50;
// Sampler transforms clamp coordinates into
// [kBoundaryClamp, 1 - kBoundaryClamp]; nothing else clamps.
inline constexpr double kBoundaryClamp = 1e-12;

struct SampleBatch {
  std::vector<UnitPoint> points;
  std::string provenance;  // "exact-gaussian" | "approx-swap"
  std::uint64_t seed = 0;  // construction seed of the RandomSource used
  int sweeps = 0;          // 0 for exact draws
  std::vector<std::string> basis_tags;
  ThetaVector theta;
};

// count i.i.d. Gaussian copula points: (xi, eta) = (z1, rho z1 +
// sqrt(1-rho^2) z2), then (Phi(xi), Phi(eta)), clamped. Consumes one
// normal pair per point.
SampleBatch sample_gaussian_copula(const GaussianCopulaParams& params,
                                   std::size_t count, RandomSource& rng);

// Heat-bath probability of swapping the y-coordinates of points
// pi = (xi, yi), pj = (xj, yj):
//   logistic( theta . [h(xi,yj) + h(xj,yi) - h(xi,yi) - h(xj,yj)] ).
double swap_probability(const BasisSet& basis, const ThetaVector& theta,
                        const UnitPoint& pi, const UnitPoint& pj);

// Approximate minimum-information-copula sample of size count.
// Draw order: the initial cloud consumes uniforms as x0,y0,x1,y1,...;
// each of sweeps*count proposals then consumes two index draws (i, then
// j among the remaining count-1) and one uniform. One sweep = count
// proposals.
SampleBatch sample_minfo_approx(const BasisSet& basis, const ThetaVector& theta,
                                std::size_t count, int sweeps, RandomSource& rng);

// CSV with header "x,y", one row per point, 17 significant digits
// (doubles round-trip exactly). A metadata sidecar (provenance, seed,
// basis tags, theta, sweeps) is written next to it with the extension
// replaced by ".json".
void write_batch_csv(const SampleBatch& batch,
                     const std::filesystem::path& csv_path);

// Reads a CSV in the format written above; rejects anything outside
// the closed unit square, reporting the offending line.
std::vector<UnitPoint> read_points_csv(const std::filesystem::path& csv_path);

}  // namespace cklcop
