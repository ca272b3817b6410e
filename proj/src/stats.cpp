#include "cgec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgec/textcore.hpp"

namespace cgec {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction,
// valid for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) return h;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw UsageError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw UsageError("incomplete beta needs 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw UsageError("degrees of freedom must be positive");
  if (std::isnan(t)) throw UsageError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // I_{df/(df+t^2)}(df/2, 1/2); the complementary form keeps precision for small t.
  if (t2 < df) {
    return 1.0 - regularized_incomplete_beta(0.5, df / 2.0, t2 / (df + t2));
  }
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2));
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw UsageError("pearson_r: length mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw UsageError("pearson_r needs at least 2 observations");
  const auto constant = [](std::span<const double> v) {
    return std::ranges::all_of(v, [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) throw DataError("correlation undefined for a constant vector");

  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double two_sided_p(double r, std::size_t n) {
  if (n < 3) throw UsageError("p-value needs at least 3 observations");
  if (std::isnan(r) || std::abs(r) > 1.0) throw UsageError("correlation must lie in [-1, 1]");
  if (std::abs(r) == 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return std::clamp(student_t_two_sided(t, df), 0.0, 1.0);
}

const MetricColumn& MetricTable::column(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw UsageError("no metric column named '" + name + "'");
}

MetricTable MetricTable::select(const std::vector<std::string>& names) const {
  MetricTable out;
  out.system_names = system_names;
  for (const auto& n : names) out.columns.push_back(column(n));
  return out;
}

void MetricTable::validate() const {
  for (const auto& c : columns) {
    if (c.values.size() != system_names.size()) {
      throw DataError("column '" + c.name + "' has " + std::to_string(c.values.size()) +
                      " values for " + std::to_string(system_names.size()) + " systems");
    }
  }
}

CorrelationEntry CorrelationMatrix::at(const std::string& a, const std::string& b) const {
  if (a == b) return {a, b, 1.0, 0.0};
  for (const auto& e : entries) {
    if ((e.first == a && e.second == b) || (e.first == b && e.second == a)) return e;
  }
  throw UsageError("no correlation entry for '" + a + "' and '" + b + "'");
}

CorrelationMatrix correlation_matrix(const MetricTable& table) {
  table.validate();
  if (table.rows() < 3) {
    throw UsageError("need at least 3 systems, got " + std::to_string(table.rows()));
  }
  CorrelationMatrix out;
  for (const auto& c : table.columns) out.columns.push_back(c.name);
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    for (std::size_t j = i + 1; j < table.columns.size(); ++j) {
      const auto& a = table.columns[i];
      const auto& b = table.columns[j];
      double r = 0.0;
      try {
        r = pearson_r(a.values, b.values);
      } catch (const DataError&) {
        const auto& bad = std::ranges::all_of(a.values, [&](double v) { return v == a.values.front(); })
                              ? a
                              : b;
        throw DataError("column '" + bad.name + "' is constant; correlation undefined");
      }
      out.entries.push_back({a.name, b.name, r, two_sided_p(r, table.rows())});
    }
  }
  return out;
}

}  // namespace cgec
