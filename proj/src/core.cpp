#include "youden_napg/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace youden {

IngestionError::IngestionError(const std::string& what, std::size_t line, std::string column)
    : std::runtime_error(fmt::format("{} (line {}, column '{}')", what, line, column)),
      line_(line),
      column_(std::move(column)) {}

void BiomarkerDataset::validate() const {
  if (diseased.rows() < 1) throw ValidationError("dataset has no diseased rows");
  if (healthy.rows() < 1) throw ValidationError("dataset has no healthy rows");
  if (diseased.cols() < 1) throw ValidationError("dataset has no feature columns");
  if (diseased.cols() != healthy.cols()) {
    throw ValidationError(fmt::format("diseased has {} columns but healthy has {}",
                                      diseased.cols(), healthy.cols()));
  }
  if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != diseased.cols()) {
    throw ValidationError("feature_names length does not match column count");
  }
  if (!diseased.allFinite() || !healthy.allFinite()) {
    throw ValidationError("dataset contains non-finite entries");
  }
}

BiomarkerDataset make_dataset(Matrix diseased, Matrix healthy,
                              std::vector<std::string> feature_names) {
  BiomarkerDataset data{std::move(diseased), std::move(healthy), std::move(feature_names)};
  data.validate();
  return data;
}

Vector RulePoint::stacked() const {
  Vector v(omega.size() + 1);
  v.head(omega.size()) = omega;
  v(omega.size()) = cutoff;
  return v;
}

RulePoint RulePoint::from_stacked(const Vector& v) {
  if (v.size() < 2) throw ContractViolation("stacked rule needs at least one weight and a cutoff");
  return RulePoint{v.head(v.size() - 1), v(v.size() - 1)};
}

bool RulePoint::is_normalized(double tol) const { return std::abs(omega.norm() - 1.0) <= tol; }

void HyperParams::validate() const {
  if (!(pi > 0.0 && pi < 1.0)) throw ValidationError(fmt::format("pi must lie in (0,1), got {}", pi));
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ValidationError(fmt::format("bandwidth must be positive, got {}", bandwidth));
  }
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw ValidationError("penalty weights must be non-negative");
  }
  if (!(scad_a > 2.0)) throw ValidationError(fmt::format("SCAD shape a must exceed 2, got {}", scad_a));
}

namespace {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

BiomarkerDataset load_dataset(const std::string& path, const std::string& label_column,
                              const std::string& positive_label) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path));

  std::string line;
  if (!std::getline(in, line)) throw IngestionError("empty file", 1, "");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw ValidationError(fmt::format("label column '{}' not found in header", label_column));
  }
  const std::size_t label_pos = static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_pos) names.push_back(header[j]);
  }
  if (names.empty()) throw ValidationError("CSV has no feature columns");

  std::vector<std::vector<double>> pos_rows, neg_rows;
  std::set<std::string> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw IngestionError(fmt::format("expected {} fields, found {}", header.size(), fields.size()),
                           line_no, "");
    }
    std::vector<double> row;
    row.reserve(names.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == label_pos) continue;
      const std::string cell = trim(fields[j]);
      if (cell.empty()) throw IngestionError("missing value", line_no, header[j]);
      double value = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      if (*begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || ptr != end) {
        throw IngestionError(fmt::format("non-numeric value '{}'", cell), line_no, header[j]);
      }
      if (!std::isfinite(value)) {
        throw IngestionError(fmt::format("non-finite value '{}'", cell), line_no, header[j]);
      }
      row.push_back(value);
    }
    const std::string label = trim(fields[label_pos]);
    if (label.empty()) throw IngestionError("missing label", line_no, label_column);
    labels.insert(label);
    (label == positive_label ? pos_rows : neg_rows).push_back(std::move(row));
  }

  if (labels.size() != 2) {
    throw ValidationError(
        fmt::format("label column must contain exactly two distinct values, found {}", labels.size()));
  }
  if (!labels.count(positive_label)) {
    throw ValidationError(fmt::format("positive label '{}' does not occur", positive_label));
  }

  auto to_matrix = [&](const std::vector<std::vector<double>>& rows) {
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < names.size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
  };
  Matrix diseased = to_matrix(pos_rows);
  Matrix healthy = to_matrix(neg_rows);
  return make_dataset(std::move(diseased), std::move(healthy), std::move(names));
}

void write_dataset(const BiomarkerDataset& data, const std::string& path,
                   const std::string& label_column) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path));
  const Index p = data.n_features();
  for (Index j = 0; j < p; ++j) {
    if (data.feature_names.empty()) {
      out << "x" << (j + 1);
    } else {
      out << data.feature_names[static_cast<std::size_t>(j)];
    }
    out << ',';
  }
  out << label_column << '\n';
  auto emit = [&](const Matrix& m, const char* label) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < p; ++j) out << fmt::format("{}", m(i, j)) << ',';
      out << label << '\n';
    }
  };
  emit(data.diseased, "1");
  emit(data.healthy, "0");
}

namespace {

void split_one_class(Index n, double fraction, std::mt19937_64& rng, std::vector<Index>& first,
                     std::vector<Index>& second) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto k = std::clamp<Index>(static_cast<Index>(std::llround(fraction * static_cast<double>(n))),
                                   1, n - 1);
  first.assign(idx.begin(), idx.begin() + k);
  second.assign(idx.begin() + k, idx.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
}

}  // namespace

SplitIndices stratified_split_indices(Index n_diseased, Index n_healthy, double fraction,
                                      std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError(fmt::format("split fraction must lie in (0,1), got {}", fraction));
  }
  if (n_diseased < 2 || n_healthy < 2) {
    throw ValidationError("each class needs at least two rows to split");
  }
  std::mt19937_64 rng(seed);
  SplitIndices s;
  split_one_class(n_diseased, fraction, rng, s.diseased_first, s.diseased_second);
  split_one_class(n_healthy, fraction, rng, s.healthy_first, s.healthy_second);
  return s;
}

BiomarkerDataset select_rows(const BiomarkerDataset& data, const std::vector<Index>& diseased_rows,
                             const std::vector<Index>& healthy_rows) {
  const Index p = data.n_features();
  Matrix d(static_cast<Index>(diseased_rows.size()), p);
  Matrix h(static_cast<Index>(healthy_rows.size()), p);
  for (std::size_t i = 0; i < diseased_rows.size(); ++i) d.row(i) = data.diseased.row(diseased_rows[i]);
  for (std::size_t i = 0; i < healthy_rows.size(); ++i) h.row(i) = data.healthy.row(healthy_rows[i]);
  return make_dataset(std::move(d), std::move(h), data.feature_names);
}

std::pair<BiomarkerDataset, BiomarkerDataset> split_train_test(const BiomarkerDataset& data,
                                                               double fraction,
                                                               std::uint64_t seed) {
  const SplitIndices s =
      stratified_split_indices(data.n_diseased(), data.n_healthy(), fraction, seed);
  return {select_rows(data, s.diseased_first, s.healthy_first),
          select_rows(data, s.diseased_second, s.healthy_second)};
}

}  // namespace youden
