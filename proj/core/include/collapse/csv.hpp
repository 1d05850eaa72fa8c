#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "collapse/dataset.hpp"

namespace collapse {

/// Shortest decimal form that round-trips to the same double.
std::string format_real(double value);

/// Minimal CSV table: ',' delimiter, '.' decimal point, one header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);

  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] std::size_t rows() const { return rows_.size(); }
  [[nodiscard]] const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

  [[nodiscard]] std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parsed CSV with a header row and numeric body.
struct NumericCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

NumericCsv read_numeric_csv(const std::filesystem::path& path);

/// Header `dim0,dim1,...`, one sample per row.
void write_dataset_csv(const Matrix& points, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace collapse
