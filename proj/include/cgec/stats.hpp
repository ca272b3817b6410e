#pragma once

// Pearson correlation across systems with exact two-sided significance from
// the Student t distribution.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cgec {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
/// Requires a, b > 0 and 0 <= x <= 1.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student t with df degrees of freedom (df > 0).
double student_t_two_sided(double t, double df);

/// Sample Pearson correlation. Throws UsageError on length mismatch or n < 2
/// and DataError when either vector is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a sample correlation r over n observations (n >= 3).
double two_sided_p(double r, std::size_t n);

struct MetricColumn {
  std::string name;
  std::vector<double> values;
};

struct MetricTable {
  std::vector<std::string> system_names;
  std::vector<MetricColumn> columns;

  std::size_t rows() const noexcept { return system_names.size(); }
  const MetricColumn& column(const std::string& name) const;
  /// Keeps only the named columns, in the given order.
  MetricTable select(const std::vector<std::string>& names) const;
  void validate() const;
};

struct CorrelationEntry {
  std::string first;
  std::string second;
  double r = 0.0;
  double p = 1.0;
};

struct CorrelationMatrix {
  std::vector<std::string> columns;
  std::vector<CorrelationEntry> entries;  // (i, j) for i < j in column order

  /// Symmetric lookup; the diagonal is r = 1, p = 0.
  CorrelationEntry at(const std::string& a, const std::string& b) const;
};

CorrelationMatrix correlation_matrix(const MetricTable& table);

}  // namespace cgec
