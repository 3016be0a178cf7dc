#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace identlab {

// Shortest round-trip decimal form, so reruns produce identical bytes.
std::string format_number(double v);
std::string format_number(std::size_t v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  CsvTable& row(std::vector<std::string> cells);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string str() const;
  void write(const std::filesystem::path& path) const;
  static CsvTable read(const std::filesystem::path& path);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct PlotSpec {
  std::string title{};
  std::string x{};                    // column name
  std::string y{};                    // column name
  std::optional<std::string> y_lo{};  // error bar columns
  std::optional<std::string> y_hi{};
  std::optional<std::string> group{};  // one line per distinct value
  bool log_x = false;
  std::optional<double> reference_y{};  // horizontal reference line
};

// Line plot with optional interval bars, built purely from a CSV file.
void plot_csv(const std::filesystem::path& csv, const PlotSpec& spec, const std::filesystem::path& svg);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string file_checksum(const std::filesystem::path& path);

}  // namespace identlab
