// Pitprops correlation matrix, J. N. R. Jeffers, "Two case studies in the
// application of principal component analysis", Applied Statistics 16 (1967).
// 180 pit props, 13 measured variables. Values as distributed with the
// R packages `elasticnet` and `PMA` (lower triangle, three decimals).

#include <array>

#include "spca/data.hpp"

namespace spca {

namespace {

constexpr std::array<double, 91> kLower = {
    1.000,                                                                                          //
    0.954,  1.000,                                                                                  //
    0.364,  0.297,  1.000,                                                                          //
    0.342,  0.284,  0.882,  1.000,                                                                  //
    -0.129, -0.118, -0.148, 0.220,  1.000,                                                          //
    0.313,  0.291,  0.153,  0.381,  0.364,  1.000,                                                  //
    0.496,  0.503,  -0.029, 0.174,  0.296,  0.813,  1.000,                                          //
    0.424,  0.419,  -0.054, -0.059, 0.004,  0.090,  0.372,  1.000,                                  //
    0.592,  0.648,  0.125,  0.137,  -0.039, 0.211,  0.465,  0.482,  1.000,                          //
    0.545,  0.569,  -0.081, -0.014, 0.037,  0.274,  0.679,  0.557,  0.526,  1.000,                  //
    0.084,  0.076,  0.162,  0.097,  -0.091, -0.036, -0.113, 0.061,  0.085,  -0.319, 1.000,          //
    -0.019, -0.036, 0.220,  0.169,  -0.145, 0.024,  -0.232, -0.357, -0.127, -0.368, 0.029,  1.000,  //
    0.134,  0.144,  0.126,  0.015,  -0.208, -0.329, -0.424, -0.202, -0.076, -0.291, 0.007,  0.184, 1.000,
};

constexpr std::array<const char*, 13> kLabels = {"topdiam", "length",  "moist",   "testsg", "ovensg",
                                                 "ringtop", "ringbut", "bowmax",  "bowdist", "whorls",
                                                 "clear",   "knots",   "diaknot"};

}  // namespace

CovarianceMatrix pitprops() {
  Matrix a(13, 13);
  std::size_t p = 0;
  for (int i = 0; i < 13; ++i) {
    for (int j = 0; j <= i; ++j) {
      a(i, j) = kLower[p];
      a(j, i) = kLower[p];
      ++p;
    }
  }
  return CovarianceMatrix(a);
}

const std::array<const char*, 13>& pitprops_labels() { return kLabels; }

}  // namespace spca
