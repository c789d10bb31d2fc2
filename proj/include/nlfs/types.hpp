#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace nlfs {

/// Closed interval on the real line.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool degenerate() const { return !(lo < hi); }
};

/// Observed regression data: covariates x and responses y of equal length.
struct Dataset {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  Eigen::Index size() const { return x.size(); }
};

/// Thrown when a linear-algebra or sampling step fails numerically
/// (non-SPD precision, Cholesky breakdown, non-finite target values).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when text input cannot be parsed; carries the 1-based line number
/// when one is known (0 otherwise).
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& msg, long line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}

  long line() const { return line_; }

 private:
  long line_ = 0;
};

}  // namespace nlfs
