#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vlab {

// 64-bit FNV-1a over the byte string.
std::uint64_t fnv1a(const std::string& bytes);

// Fixed formatting used everywhere a double reaches an output file: %.17g
// round-trips the bit pattern.
std::string format_g17(double v);

struct ReportHeader {
  std::string tool = "vlab 1.0.0";
  std::uint64_t configHash = 0;
  std::uint64_t seed = 0;
  // Full constants record (key, value), emitted in the given order.
  std::vector<std::pair<std::string, double>> constants;
  // Free-form metadata strings (sampling scheme, lane, ...).
  std::vector<std::pair<std::string, std::string>> extra;
};

// CSV block with a single JSON header line, then a column-name line, then
// data rows. to_string() is the canonical byte stream; write_file() stages
// to a temp file and renames, so failures never leave partial outputs.
class CsvReport {
 public:
  CsvReport(ReportHeader header, std::vector<std::string> columns);

  void add_row(const std::vector<std::string>& cells);
  std::size_t row_count() const { return rows_.size(); }

  std::string to_string() const;
  void write_file(const std::string& path) const;

 private:
  ReportHeader header_;
  std::vector<std::string> columns_;
  std::vector<std::string> rows_;
};

// Serializes the header alone (one JSON line) for non-CSV outputs.
std::string header_json(const ReportHeader& header);

// Atomic small-file writer shared by every artifact emitter.
void write_text_file(const std::string& path, const std::string& content);

} // namespace vlab
