#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bed/regression.hpp"

namespace bed {

/// Numeric CSV with a header row. Lines starting with '#' are kept as comments.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::vector<std::string> comments;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// Throws DataError for an unknown column name.
  const std::vector<double>& column(const std::string& name) const;
};

/// `source` names the input in error messages ("file.csv:12: ...").
CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Design from every column except `response` (default: the last column),
/// with an intercept prepended.
RegressionData regression_from_table(const CsvTable& table, const std::optional<std::string>& response = std::nullopt);

struct Dataset {
  std::string name;
  /// Univariate observations (empty for regression data).
  std::vector<double> values;
  std::optional<RegressionData> regression;
  /// Column names for regression data, response last.
  std::vector<std::string> columns;
  std::string provenance;

  bool is_regression() const { return regression.has_value(); }
};

/// Built-in names are telephone-fault, telephone-fault-289, drosophila,
/// belgium-calls and salinity. Anything else is read as a CSV path: one
/// column gives univariate data, more give a regression on the last column.
Dataset load_dataset(const std::string& name_or_path);
std::vector<std::string> dataset_names();

/// $BED_DATA_DIR if set, else the data/ directory of the source tree.
std::filesystem::path data_directory();

/// n·pmf(k) for k = 0..4 and n·P(X ≥ 5); the last cell is n minus the others.
std::vector<double> poisson_expected_frequencies(double lambda, double n);

}  // namespace bed
