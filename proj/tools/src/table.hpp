#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace spca::cli {

/// Identity of a result row; reruns with the same key never touch the stored row.
struct RowKey {
  std::string case_name;
  std::string method;
  std::string preset;
  int k = 0;
  std::uint64_t seed = 0;

  auto operator<=>(const RowKey&) const = default;
};

std::vector<std::string> split_csv_line(const std::string& line);

/// Replaces separators so free text fits in one CSV field.
std::string sanitize_field(std::string s);

/// Append-only CSV table. The first five columns of every row form its RowKey.
class ResultTable {
 public:
  explicit ResultTable(std::string header) : header_(std::move(header)) {}

  /// Loads existing rows; throws IoError when the header differs.
  void load(const std::filesystem::path& path);
  bool contains(const RowKey& key) const { return keys_.contains(key); }
  /// Returns false (and keeps the old row) when the key is already present.
  bool append(const RowKey& key, std::string line);
  void save(const std::filesystem::path& path) const;

  const std::vector<std::string>& lines() const noexcept { return lines_; }
  const std::string& header() const noexcept { return header_; }

 private:
  std::string header_;
  std::vector<std::string> lines_;
  std::set<RowKey> keys_;
};

RowKey key_of(const std::vector<std::string>& fields);

}  // namespace spca::cli
