#include "cklcop/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cklcop/normal.hpp"
#include "cklcop/scoring.hpp"
#include "json.hpp"

namespace cklcop {

namespace {

double clamp_unit(double v) {
  return std::min(1.0 - kBoundaryClamp, std::max(kBoundaryClamp, v));
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double_field(const std::string& field) {
  std::string f = trim(field);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(f, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number: '" + f + "'");
  }
  if (used != f.size()) {
    throw std::invalid_argument("trailing characters in '" + f + "'");
  }
  return v;
}

}  // namespace

std::uint64_t mix64(std::uint64_t v) {
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ mix64(a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ mix64(b + 0x6a09e667f3bcc909ULL));
  return h;
}

std::uint64_t RandomSource::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double RandomSource::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::pair<double, double> RandomSource::next_normal_pair() {
  for (;;) {
    double u = 2.0 * next_uniform() - 1.0;
    double v = 2.0 * next_uniform() - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      double f = std::sqrt(-2.0 * std::log(s) / s);
      return {u * f, v * f};
    }
  }
}

std::uint64_t RandomSource::index_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("index_below: n must be positive");
  std::uint64_t threshold = (-n) % n;  // 2^64 mod n
  for (;;) {
    std::uint64_t v = next_u64();
    if (v >= threshold) return v % n;
  }
}

SampleBatch sample_gaussian_copula(const GaussianCopulaParams& params,
                                   std::size_t count, RandomSource& rng) {
  if (count == 0) {
    throw std::invalid_argument("sample_gaussian_copula: count must be positive");
  }
  double rho = params.rho;
  double tail = std::sqrt(1.0 - rho * rho);
  SampleBatch batch;
  batch.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto [z1, z2] = rng.next_normal_pair();
    double xi = z1;
    double eta = rho * z1 + tail * z2;
    batch.points.emplace_back(clamp_unit(std_normal_cdf(xi)),
                              clamp_unit(std_normal_cdf(eta)));
  }
  batch.provenance = "exact-gaussian";
  batch.seed = rng.seed();
  batch.sweeps = 0;
  batch.basis_tags = {"gauss"};
  batch.theta = ThetaVector::Constant(1, rho_to_theta(rho));
  return batch;
}

double swap_probability(const BasisSet& basis, const ThetaVector& theta,
                        const UnitPoint& pi, const UnitPoint& pj) {
  if (static_cast<std::size_t>(theta.size()) != basis.size()) {
    throw std::invalid_argument("theta length does not match basis size");
  }
  ObservationPair pair(pi.x, pi.y, pj.x, pj.y);
  double t = theta.dot(h_vector(pair, basis));
  if (!std::isfinite(t)) {
    throw std::runtime_error("swap_probability: basis evaluation not finite");
  }
  return logistic(t);
}

SampleBatch sample_minfo_approx(const BasisSet& basis, const ThetaVector& theta,
                                std::size_t count, int sweeps, RandomSource& rng) {
  if (count < 2) {
    throw std::invalid_argument("sample_minfo_approx: count must be at least 2");
  }
  if (sweeps < 0) {
    throw std::invalid_argument("sample_minfo_approx: sweeps must be >= 0");
  }
  if (static_cast<std::size_t>(theta.size()) != basis.size()) {
    throw std::invalid_argument("theta length does not match basis size");
  }
  if (!theta.allFinite()) {
    throw std::invalid_argument("theta must be finite");
  }

  std::vector<double> xs(count), ys(count);
  for (std::size_t i = 0; i < count; ++i) {
    xs[i] = clamp_unit(rng.next_uniform());
    ys[i] = clamp_unit(rng.next_uniform());
  }

  // Swaps permute ys in place: both coordinate multisets are exactly
  // those of the initial cloud, whatever the chain does.
  const std::uint64_t proposals =
      static_cast<std::uint64_t>(sweeps) * static_cast<std::uint64_t>(count);
  for (std::uint64_t p = 0; p < proposals; ++p) {
    std::uint64_t i = rng.index_below(count);
    std::uint64_t j = rng.index_below(count - 1);
    if (j >= i) ++j;
    double pr = swap_probability(basis, theta, UnitPoint(xs[i], ys[i]),
                                 UnitPoint(xs[j], ys[j]));
    if (rng.next_uniform() < pr) std::swap(ys[i], ys[j]);
  }

  SampleBatch batch;
  batch.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) batch.points.emplace_back(xs[i], ys[i]);
  batch.provenance = "approx-swap";
  batch.seed = rng.seed();
  batch.sweeps = sweeps;
  batch.basis_tags = basis.tags();
  batch.theta = theta;
  return batch;
}

void write_batch_csv(const SampleBatch& batch,
                     const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + csv_path.string());
  }
  out << "x,y\n";
  char line[80];
  for (const auto& p : batch.points) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", p.x, p.y);
    out << line;
  }
  out.close();
  if (!out) {
    throw std::runtime_error("failed writing: " + csv_path.string());
  }

  nlohmann::json meta;
  meta["provenance"] = batch.provenance;
  meta["seed"] = batch.seed;
  meta["sweeps"] = batch.sweeps;
  meta["basis"] = batch.basis_tags;
  meta["theta"] = std::vector<double>(batch.theta.begin(), batch.theta.end());
  std::filesystem::path sidecar = csv_path;
  sidecar.replace_extension(".json");
  std::ofstream side(sidecar);
  if (!side) {
    throw std::runtime_error("cannot open for writing: " + sidecar.string());
  }
  side << meta.dump(2) << "\n";
}

std::vector<UnitPoint> read_points_csv(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) {
    throw std::runtime_error("cannot open: " + csv_path.string());
  }
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,y") {
    throw std::runtime_error(csv_path.string() + ": expected header 'x,y'");
  }
  std::vector<UnitPoint> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string row = trim(line);
    if (row.empty()) continue;
    auto comma = row.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(csv_path.string() + ":" + std::to_string(lineno) +
                               ": expected 'x,y' row");
    }
    try {
      double x = parse_double_field(row.substr(0, comma));
      double y = parse_double_field(row.substr(comma + 1));
      points.emplace_back(x, y);
    } catch (const std::exception& e) {
      throw std::runtime_error(csv_path.string() + ":" + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  return points;
}

}  // namespace cklcop
