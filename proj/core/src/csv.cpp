#include "collapse/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "collapse/error.hpp"

namespace collapse {

std::string format_real(double value) { return fmt::format("{}", value); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw ParameterError(
        fmt::format("csv row has {} cells, header has {}", cells.size(), header_.size()));
  }
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_real(v));
  add_row(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out = fmt::format("{}\n", fmt::join(header_, ","));
  for (const auto& row : rows_) out += fmt::format("{}\n", fmt::join(row, ","));
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  file << str();
  if (!file) throw Error(fmt::format("failed writing '{}'", path.string()));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  while (begin < end && *begin == ' ') ++begin;
  if (begin < end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw LoadError(fmt::format("{}:{}: '{}' is not a number", path.string(), line, cell));
  }
  return value;
}

}  // namespace

NumericCsv read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw LoadError(fmt::format("cannot open '{}'", path.string()));
  NumericCsv out;
  std::string line;
  if (!std::getline(file, line)) throw LoadError(fmt::format("{}: missing header row", path.string()));
  out.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(file, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != out.header.size()) {
      throw LoadError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), lineno,
                                  out.header.size(), cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_real(c, path, lineno));
    out.rows.push_back(std::move(row));
  }
  return out;
}

void write_dataset_csv(const Matrix& points, const std::filesystem::path& path) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < points.cols(); ++j) header.push_back(fmt::format("dim{}", j));
  CsvTable table(std::move(header));
  std::vector<double> row(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) row[j] = points(i, j);
    table.add_row(row);
  }
  table.write(path);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const auto csv = read_numeric_csv(path);
  if (csv.header.empty()) throw LoadError(fmt::format("{}: empty header", path.string()));
  Dataset out;
  out.points = Matrix(static_cast<Eigen::Index>(csv.rows.size()),
                      static_cast<Eigen::Index>(csv.header.size()));
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
      if (!std::isfinite(csv.rows[i][j])) {
        throw LoadError(fmt::format("{}: non-finite entry at row {}", path.string(), i + 1));
      }
      out.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = csv.rows[i][j];
    }
  }
  return out;
}

}  // namespace collapse
