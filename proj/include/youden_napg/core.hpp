#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace youden {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when user-supplied data or options break a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised while parsing a CSV file; carries 1-based line number and column name.
class IngestionError : public std::runtime_error {
 public:
  IngestionError(const std::string& what, std::size_t line, std::string column);

  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

/// Programming error: a caller broke a precondition (dimension mismatch, negative step, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Diseased (X_i) and healthy (Y_j) marker measurements, one row per subject.
struct BiomarkerDataset {
  Matrix diseased;
  Matrix healthy;
  std::vector<std::string> feature_names;

  Index n_diseased() const { return diseased.rows(); }
  Index n_healthy() const { return healthy.rows(); }
  Index n_features() const { return diseased.cols(); }

  /// Throws ValidationError unless both classes are non-empty, share p >= 1
  /// columns and every entry is finite.
  void validate() const;
};

BiomarkerDataset make_dataset(Matrix diseased, Matrix healthy,
                              std::vector<std::string> feature_names = {});

/// Linear decision rule omega^T T > cutoff.
struct RulePoint {
  Vector omega;
  double cutoff = 0.0;

  /// (omega, cutoff) packed as one vector of length p + 1.
  Vector stacked() const;
  static RulePoint from_stacked(const Vector& v);
  bool is_normalized(double tol = 1e-12) const;
};

struct HyperParams {
  double pi = 0.5;
  double bandwidth = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 1e-6;
  double scad_a = 3.7;

  void validate() const;
};

struct EvalMetrics {
  double weighted_youden = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  std::optional<double> detection_rate;
  std::optional<double> shrinkage_accuracy;
  int nonzero_count = 0;
};

inline double weighted_youden(double pi, double sensitivity, double specificity) {
  return 2.0 * (pi * sensitivity + (1.0 - pi) * specificity) - 1.0;
}

/// Reads a CSV with a header row. Rows whose label equals `positive_label`
/// become diseased rows; every other column must be numeric.
BiomarkerDataset load_dataset(const std::string& path, const std::string& label_column,
                              const std::string& positive_label);

/// Writes diseased rows (label "1") then healthy rows (label "0") with
/// round-trip precision.
void write_dataset(const BiomarkerDataset& data, const std::string& path,
                   const std::string& label_column = "label");

struct SplitIndices {
  std::vector<Index> diseased_first, diseased_second;
  std::vector<Index> healthy_first, healthy_second;
};

SplitIndices stratified_split_indices(Index n_diseased, Index n_healthy, double fraction,
                                      std::uint64_t seed);

BiomarkerDataset select_rows(const BiomarkerDataset& data, const std::vector<Index>& diseased_rows,
                             const std::vector<Index>& healthy_rows);

/// Stratified split; the first dataset receives `fraction` of each class.
std::pair<BiomarkerDataset, BiomarkerDataset> split_train_test(const BiomarkerDataset& data,
                                                               double fraction,
                                                               std::uint64_t seed);

}  // namespace youden
