#include "bed/datasets.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bed {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

// ordered differences of inverse test and control rates, 14 matched areas
const std::vector<double> kTelephone = {-988, -135, -78, 3, 59, 83, 93, 110, 189, 197, 204, 229, 269, 310};

std::vector<double> drosophila_counts() {
  std::vector<double> d(23, 0.0);
  d.insert(d.end(), 7, 1.0);
  d.insert(d.end(), 3, 2.0);
  d.push_back(91.0);
  return d;
}

std::string comments_as_provenance(const CsvTable& t, const std::string& fallback) {
  if (t.comments.empty()) return fallback;
  std::string out;
  for (const auto& c : t.comments) {
    if (!out.empty()) out += ' ';
    out += c;
  }
  return out;
}

Dataset regression_dataset(const std::string& name, const std::filesystem::path& path) {
  const CsvTable t = read_csv_file(path);
  Dataset d;
  d.name = name;
  d.regression = regression_from_table(t);
  d.columns = t.header;
  d.provenance = comments_as_provenance(t, path.string());
  return d;
}

}  // namespace

const std::vector<double>& CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("no column named '" + name + "'");
  return columns[static_cast<std::size_t>(it - header.begin())];
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      t.comments.push_back(trim(s.substr(1)));
      continue;
    }
    auto fields = split_fields(s);
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (t.header.empty()) {
      for (auto& f : fields) {
        f = unquote(f);
        if (f.empty()) throw DataError(where + "empty column name in header");
      }
      t.header = std::move(fields);
      t.columns.assign(t.header.size(), {});
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataError(where + "expected " + std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || errno == ERANGE || !std::isfinite(v))
        throw DataError(where + "column '" + t.header[j] + "': '" + f + "' is not a finite number");
      t.columns[j].push_back(v);
    }
  }
  if (t.header.empty()) throw DataError(source + ": no header row");
  if (t.rows() == 0) throw DataError(source + ": no data rows");
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_csv(in, path.string());
}

RegressionData regression_from_table(const CsvTable& table, const std::optional<std::string>& response) {
  if (table.header.size() < 2) throw DataError("regression needs a response and at least one predictor column");
  const std::string y_name = response.value_or(table.header.back());
  const auto& y = table.column(y_name);
  std::vector<std::vector<double>> covariates;
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (table.header[j] != y_name) covariates.push_back(table.columns[j]);
  try {
    return RegressionData::from_columns(covariates, y);
  } catch (const DomainError& e) {
    throw DataError(e.what());
  }
}

std::vector<std::string> dataset_names() {
  return {"telephone-fault", "telephone-fault-289", "drosophila", "belgium-calls", "salinity"};
}

std::filesystem::path data_directory() {
  if (const char* env = std::getenv("BED_DATA_DIR"); env && *env) return env;
  return BED_SOURCE_DATA_DIR;
}

Dataset load_dataset(const std::string& name) {
  if (name == "telephone-fault") {
    return {name, kTelephone, std::nullopt, {},
            "telephone line faults, ordered differences of inverse test and control rates in 14 matched "
            "pairs of areas (Welch 1987)"};
  }
  if (name == "telephone-fault-289") {
    auto v = kTelephone;
    v[12] = 289;
    return {name, v, std::nullopt, {},
            "telephone-fault with 289 in place of 269 for the 13th pair; the published estimates for "
            "these data (mean 40.36 = 565/14) correspond to this record"};
  }
  if (name == "drosophila") {
    return {name, drosophila_counts(), std::nullopt, {},
            "Drosophila recessive lethal counts: 23 zeros, 7 ones, 3 twos and one spurious 91 "
            "(Simpson 1987)"};
  }
  if (name == "belgium-calls") return regression_dataset(name, data_directory() / "belgium-calls.csv");
  if (name == "salinity") return regression_dataset(name, data_directory() / "salinity.csv");

  const std::filesystem::path path(name);
  if (!std::filesystem::exists(path))
    throw DataError("unknown dataset '" + name + "' (not a built-in name and no such file)");
  const CsvTable t = read_csv_file(path);
  Dataset d;
  d.name = path.stem().string();
  d.provenance = comments_as_provenance(t, path.string());
  if (t.header.size() == 1) {
    d.values = t.columns.front();
  } else {
    d.regression = regression_from_table(t);
    d.columns = t.header;
  }
  return d;
}

std::vector<double> poisson_expected_frequencies(double lambda, double n) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw DomainError("poisson_expected_frequencies: lambda must be positive");
  if (!(n >= 0)) throw DomainError("poisson_expected_frequencies: n must be non-negative");
  std::vector<double> cells(6);
  double pmf = std::exp(-lambda), head = 0.0;
  for (int k = 0; k < 5; ++k) {
    if (k > 0) pmf *= lambda / k;
    cells[static_cast<std::size_t>(k)] = n * pmf;
    head += cells[static_cast<std::size_t>(k)];
  }
  cells[5] = std::max(0.0, n - head);
  return cells;
}

}  // namespace bed
