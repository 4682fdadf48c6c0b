#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace sdepi {

/// Shortest decimal that round-trips; independent of the C++ locale.
std::string format_double(double v);

/// Minimal comma-separated writer. Cells are written verbatim, so callers
/// pass labels that contain no commas or quotes (validated on load).
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& columns);
  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double v) { return cell(format_double(v)); }
  CsvWriter& cell(std::uint64_t v) { return cell(std::to_string(v)); }
  void end_row();
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  bool first_ = true;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace sdepi
