#include "spca/data.hpp"

#include <algorithm>
#include <cmath>

#include "spca/errors.hpp"
#include "spca/rng.hpp"

namespace spca {

std::string to_string(Family f) {
  switch (f) {
    case Family::SpikedCovariance:
      return "spiked";
    case Family::SyntheticExample:
      return "synthetic";
    case Family::ControllingSparsity:
      return "sparsity";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "spiked" || s == "SpikedCovariance") return Family::SpikedCovariance;
  if (s == "synthetic" || s == "SyntheticExample") return Family::SyntheticExample;
  if (s == "sparsity" || s == "controlling-sparsity" || s == "ControllingSparsity") {
    return Family::ControllingSparsity;
  }
  throw ValidationError("unknown generator family '" + s + "'");
}

void GeneratorSpec::validate() const {
  if (n < 1) throw ValidationError("generator: n must be positive");
  if (m < 1) throw ValidationError("generator: m must be positive");
  switch (family) {
    case Family::SpikedCovariance:
      if (n < 20) throw ValidationError("spiked covariance needs n >= 20 (planted supports use indices 1-20)");
      if (spike1 < 0 || spike2 < 0) throw ValidationError("spike eigenvalues must be nonnegative");
      break;
    case Family::SyntheticExample:
      if (n < 3) throw ValidationError("synthetic example needs n >= 3");
      break;
    case Family::ControllingSparsity:
      if (planted_k < 1 || planted_k > n) throw ValidationError("planted cardinality must lie in [1, n]");
      if (sigma < 0) throw ValidationError("signal-to-noise ratio must be nonnegative");
      break;
  }
}

namespace {

// Block sizes n1, n2, n3 in {floor(n/3), ceil(n/3)}; the first n % 3 blocks get the extra row.
std::array<int, 3> block_sizes(int n) {
  std::array<int, 3> s{n / 3, n / 3, n / 3};
  for (int i = 0; i < n % 3; ++i) ++s[i];
  return s;
}

std::uint64_t stream_of(Family f) { return static_cast<std::uint64_t>(f) + 1; }

}  // namespace

Matrix population_covariance(const GeneratorSpec& spec) {
  spec.validate();
  const int n = spec.n;
  Matrix sigma = Matrix::Identity(n, n);
  switch (spec.family) {
    case Family::SpikedCovariance: {
      Vector v1 = Vector::Zero(n);
      Vector v2 = Vector::Zero(n);
      v1.head(10).setConstant(1.0 / std::sqrt(10.0));
      v2.segment(10, 10).setConstant(1.0 / std::sqrt(10.0));
      sigma += spec.spike1 * v1 * v1.transpose() + spec.spike2 * v2 * v2.transpose();
      break;
    }
    case Family::SyntheticExample: {
      const auto sz = block_sizes(n);
      const int o2 = sz[0];
      const int o3 = sz[0] + sz[1];
      sigma.block(0, 0, sz[0], sz[0]).array() += spec.block11;
      sigma.block(o2, o2, sz[1], sz[1]).array() += spec.block22;
      sigma.block(o3, o3, sz[2], sz[2]).array() += spec.block33;
      sigma.block(0, o3, sz[0], sz[2]).array() += spec.block13;
      sigma.block(o3, 0, sz[2], sz[0]).array() += spec.block13;
      sigma.block(o2, o3, sz[1], sz[2]).array() += spec.block23;
      sigma.block(o3, o2, sz[2], sz[1]).array() += spec.block23;
      break;
    }
    case Family::ControllingSparsity: {
      CounterRng rng(spec.seed, 100 + stream_of(spec.family));
      Matrix u(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) u(i, j) = rng.uniform();
      }
      Vector v = Vector::Zero(n);
      v.head(spec.planted_k).setOnes();
      sigma = u.transpose() * u + spec.sigma * v * v.transpose();
      break;
    }
  }
  return sigma;
}

Vector planted_direction(const GeneratorSpec& spec) {
  spec.validate();
  Vector v = Vector::Zero(spec.n);
  switch (spec.family) {
    case Family::SpikedCovariance:
      v.head(10).setConstant(1.0);
      break;
    case Family::SyntheticExample:
      v.tail(block_sizes(spec.n)[2]).setConstant(1.0);
      break;
    case Family::ControllingSparsity:
      v.head(spec.planted_k).setConstant(1.0);
      break;
  }
  return v.normalized();
}

CovarianceMatrix generate(const GeneratorSpec& spec) {
  const Matrix sigma = population_covariance(spec);
  const int n = spec.n;
  // Sigma^{1/2} from the eigendecomposition; tolerates singular populations.
  const Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  if (es.info() != Eigen::Success) throw NumericalError("population eigendecomposition failed", 0.0);
  const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  CounterRng rng(spec.seed, stream_of(spec.family));
  Matrix samples(spec.m, n);
  Vector z(n);
  for (int s = 0; s < spec.m; ++s) {
    for (int j = 0; j < n; ++j) z(j) = rng.normal();
    samples.row(s) = (root * z).transpose();
  }
  Matrix cov = samples.transpose() * samples / static_cast<double>(spec.m);
  return CovarianceMatrix(0.5 * (cov + cov.transpose()));
}

nlohmann::json manifest(const GeneratorSpec& spec) {
  nlohmann::json j;
  j["family"] = to_string(spec.family);
  j["n"] = spec.n;
  j["m"] = spec.m;
  j["seed"] = spec.seed;
  j["generator"] = "splitmix64 counter stream, Box-Muller normals, raw (uncentered) second moment";
  switch (spec.family) {
    case Family::SpikedCovariance:
      j["params"] = {{"spike1", spec.spike1}, {"spike2", spec.spike2}, {"planted_supports", "1-10, 11-20"}};
      break;
    case Family::SyntheticExample: {
      const auto sz = block_sizes(spec.n);
      j["params"] = {{"block11", spec.block11}, {"block22", spec.block22}, {"block33", spec.block33},
                     {"block13", spec.block13}, {"block23", spec.block23}, {"block_sizes", sz}};
      break;
    }
    case Family::ControllingSparsity:
      j["params"] = {{"sigma", spec.sigma}, {"planted_k", spec.planted_k}};
      break;
  }
  return j;
}

}  // namespace spca
