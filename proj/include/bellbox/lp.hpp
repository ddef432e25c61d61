#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bellbox::lp {

enum class Sense { Minimize, Maximize };

/// Per-variable domain. Nonnegative is the default.
struct VariableBound {
  enum class Kind { NonNegative, Free, Boxed };
  Kind kind = Kind::NonNegative;
  double lower = 0.0;
  double upper = 0.0;

  static VariableBound nonnegative() { return {}; }
  static VariableBound free() { return {Kind::Free, 0.0, 0.0}; }
  static VariableBound boxed(double lo, double hi) { return {Kind::Boxed, lo, hi}; }
};

/// Equality-form program: A x = b with per-variable bounds and an optional
/// linear objective. Dense row-major storage.
class LinearProgram {
public:
  LinearProgram(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& a(std::size_t r, std::size_t c) { return matrix_[r * cols_ + c]; }
  double a(std::size_t r, std::size_t c) const { return matrix_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {matrix_.data() + r * cols_, cols_}; }

  double& b(std::size_t r) { return rhs_[r]; }
  double b(std::size_t r) const { return rhs_[r]; }
  std::span<const double> rhs() const { return rhs_; }

  void set_objective(std::vector<double> c, Sense sense);
  bool has_objective() const { return objective_.has_value(); }
  std::span<const double> objective() const;
  Sense sense() const { return sense_; }

  void set_bound(std::size_t col, VariableBound bound) { bounds_.at(col) = bound; }
  const VariableBound& bound(std::size_t col) const { return bounds_.at(col); }

  /// Throws ValidationError on non-finite data or inverted boxes.
  void check() const;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> matrix_;
  std::vector<double> rhs_;
  std::optional<std::vector<double>> objective_;
  Sense sense_ = Sense::Maximize;
  std::vector<VariableBound> bounds_;
};

enum class Status { Optimal, Feasible, Infeasible, Unbounded };

std::string to_string(Status status);

/// Result of re-solving the final basis in exact rational arithmetic.
struct ExactCheck {
  bool ok = false;
  std::string detail;
};

struct Outcome {
  Status status = Status::Infeasible;
  /// Feasible point (Optimal, Feasible, Unbounded).
  std::vector<double> primal;
  /// Optimal: dual multipliers y. Infeasible: Farkas vector with
  /// y^T b > max over the variable domain of y^T A x.
  std::vector<double> dual;
  /// Unbounded: improving recession direction.
  std::vector<double> ray;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::optional<ExactCheck> exact;
};

struct Options {
  double tol = 1e-9;
  double pivot_tol = 1e-10;
  std::size_t max_iters = 200000;
  std::size_t max_rows = 4096;
  std::size_t max_cols = 4096;
  /// Re-derive the final basic solution (or Farkas vector) over the rationals.
  bool exact_recheck = false;
};

/// Dense two-phase primal simplex with Bland's rule. Every outcome is run
/// through verify() before it is returned; StalledError when the iteration
/// limit is hit or the final answer fails its own check.
Outcome solve(const LinearProgram& lp, const Options& options = {});

struct CertificateReport {
  bool ok = false;
  /// ||A x - b||_inf for any returned point.
  double residual = 0.0;
  /// Largest amount by which the point leaves its variable domain.
  double bound_violation = 0.0;
  /// Infeasible: y^T b - sup over domain of y^T A x (must be > 0).
  double farkas_margin = 0.0;
  /// Optimal: dual bound minus primal objective in the maximization sense.
  double duality_gap = 0.0;
  /// Largest violated dual-feasibility (or Farkas sign) condition.
  double dual_violation = 0.0;
  std::string message;
};

inline constexpr double kResidualTol = 1e-7;

/// Recomputes every verification inequality of `outcome` against `lp`.
CertificateReport verify(const LinearProgram& lp, const Outcome& outcome);

} // namespace bellbox::lp
