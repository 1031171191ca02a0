#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "spca/spectra.hpp"

namespace spca {

enum class Family { SpikedCovariance, SyntheticExample, ControllingSparsity };

std::string to_string(Family f);
/// Accepts "spiked", "synthetic", "sparsity" and the enum spellings.
Family family_from_string(const std::string& s);

struct GeneratorSpec {
  Family family = Family::SpikedCovariance;
  int n = 200;
  int m = 50;
  std::uint64_t seed = 0;

  // Spiked covariance: two planted unit eigenvectors on indices 1-10 and 11-20.
  double spike1 = 399.0;
  double spike2 = 299.0;

  // Synthetic example: three constant blocks plus identity.
  double block11 = 290.0;
  double block22 = 300.0;
  double block33 = 582.7875;
  double block13 = -87.0;
  double block23 = 277.5;

  // Controlling sparsity: U^T U + sigma v v^T with v the indicator of the first k coordinates.
  double sigma = 15.0;
  int planted_k = 10;

  /// Throws ValidationError on inconsistent parameters.
  void validate() const;
};

/// Population covariance of the family (before sampling).
Matrix population_covariance(const GeneratorSpec& spec);

/// Planted sparse direction (unit norm) of the family.
Vector planted_direction(const GeneratorSpec& spec);

/// Raw empirical second moment (1/m) sum x_i x_i^T of m draws x_i ~ N(0, Sigma).
CovarianceMatrix generate(const GeneratorSpec& spec);

/// Spec, seed and generator description for the manifest written next to a matrix.
nlohmann::json manifest(const GeneratorSpec& spec);

/// The 13x13 Pitprops correlation matrix (Jeffers, 1967; 180 observations).
CovarianceMatrix pitprops();

/// Variable names of the Pitprops matrix in row order.
const std::array<const char*, 13>& pitprops_labels();

}  // namespace spca
