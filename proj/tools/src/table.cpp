#include "table.hpp"

#include <algorithm>
#include <fstream>

#include "spca/errors.hpp"

namespace spca::cli {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  for (char ch : line) {
    if (ch == ',')
      out.emplace_back();
    else if (ch != '\r')
      out.back() += ch;
  }
  return out;
}

std::string sanitize_field(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return s;
}

RowKey key_of(const std::vector<std::string>& f) {
  if (f.size() < 5) throw IoError("result row has fewer than five fields");
  try {
    return RowKey{f[0], f[1], f[2], std::stoi(f[3]), std::stoull(f[4])};
  } catch (const std::logic_error&) {
    throw IoError("malformed key in result row");
  }
}

void ResultTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  if (!std::getline(in, line)) return;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header_) throw IoError(path.string() + ": unexpected header '" + line + "'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    append(key_of(split_csv_line(line)), line);
  }
}

bool ResultTable::append(const RowKey& key, std::string line) {
  if (!keys_.insert(key).second) return false;
  lines_.push_back(std::move(line));
  return true;
}

void ResultTable::save(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << header_ << '\n';
    for (const auto& l : lines_) out << l << '\n';
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace spca::cli
