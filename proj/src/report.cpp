#include "vlab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "vlab/errors.hpp"

namespace vlab {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= std::uint64_t(b);
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string header_json(const ReportHeader& header) {
  nlohmann::ordered_json j;
  j["tool"] = header.tool;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "0x%016llx",
                static_cast<unsigned long long>(header.configHash));
  j["configHash"] = hash;
  // Seeds are full 64-bit values; keep them as strings so no JSON reader
  // rounds them through a double.
  j["seed"] = std::to_string(header.seed);
  if (!header.constants.empty()) {
    nlohmann::ordered_json c;
    for (const auto& [k, v] : header.constants) c[k] = format_g17(v);
    j["constants"] = c;
  }
  for (const auto& [k, v] : header.extra) j[k] = v;
  return j.dump();
}

CsvReport::CsvReport(ReportHeader header, std::vector<std::string> columns)
    : header_(std::move(header)), columns_(std::move(columns)) {
  if (columns_.empty()) throw ConfigError("CSV report needs at least one column");
}

void CsvReport::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw ConfigError("CSV row width does not match the column list");
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  rows_.push_back(std::move(row));
}

std::string CsvReport::to_string() const {
  std::string out = header_json(header_);
  out += '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const std::string& row : rows_) {
    out += row;
    out += '\n';
  }
  return out;
}

void CsvReport::write_file(const std::string& path) const {
  write_text_file(path, to_string());
}

void write_text_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec)
      throw Error("cannot create output directory " +
                  target.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), std::streamsize(content.size()));
    f.flush();
    if (!f) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
}

} // namespace vlab
