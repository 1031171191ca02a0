#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spca/errors.hpp"
#include "spca/spectra.hpp"

namespace spca {

CovarianceMatrix parse_matrix_text(const std::string& text) {
  std::string cleaned = text;
  for (char& c : cleaned) {
    if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
  }
  std::istringstream in(cleaned);
  long long n = 0;
  if (!(in >> n) || n <= 0) throw IoError("matrix file: first token must be a positive dimension");
  if (n > 20000) throw IoError("matrix file: dimension " + std::to_string(n) + " is unreasonably large");
  Matrix m(n, n);
  for (long long i = 0; i < n; ++i) {
    for (long long j = 0; j < n; ++j) {
      std::string tok;
      if (!(in >> tok)) {
        throw IoError("matrix file: expected " + std::to_string(n * n) + " entries, found " +
                      std::to_string(i * n + j));
      }
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw IoError("matrix file: cannot parse entry '" + tok + "'");
      }
    }
  }
  std::string extra;
  if (in >> extra) throw IoError("matrix file: trailing data after " + std::to_string(n * n) + " entries");
  for (long long i = 0; i < n; ++i) {
    for (long long j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-9) {
        throw ValidationError("matrix file: asymmetric entry at (" + std::to_string(i + 1) + ", " +
                              std::to_string(j + 1) + ")");
      }
    }
  }
  // Entries within 1e-9 of symmetric are accepted; average them before validation.
  return CovarianceMatrix(0.5 * (m + m.transpose()));
}

CovarianceMatrix read_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open matrix file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_matrix_text(buf.str());
}

std::string format_matrix_text(const CovarianceMatrix& a) {
  std::string out = std::to_string(a.n()) + "\n";
  char cell[40];
  for (int i = 0; i < a.n(); ++i) {
    for (int j = 0; j < a.n(); ++j) {
      std::snprintf(cell, sizeof cell, "%.17g", a(i, j));
      if (j > 0) out += ' ';
      out += cell;
    }
    out += '\n';
  }
  return out;
}

void write_matrix_file(const std::string& path, const CovarianceMatrix& a) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write matrix file '" + path + "'");
  f << format_matrix_text(a);
  if (!f) throw IoError("write failed for '" + path + "'");
}

}  // namespace spca
