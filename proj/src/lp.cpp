#include "bellbox/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <gmpxx.h>

#include "bellbox/error.hpp"
#include "dense_solve.hpp"

namespace bellbox::lp {

LinearProgram::LinearProgram(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), matrix_(rows * cols, 0.0), rhs_(rows, 0.0), bounds_(cols) {}

void LinearProgram::set_objective(std::vector<double> c, Sense sense) {
  if (c.size() != cols_)
    throw ValidationError("objective has " + std::to_string(c.size()) + " entries for " +
                          std::to_string(cols_) + " variables");
  objective_ = std::move(c);
  sense_ = sense;
}

std::span<const double> LinearProgram::objective() const {
  if (!objective_) return {};
  return *objective_;
}

void LinearProgram::check() const {
  for (double v : matrix_)
    if (!std::isfinite(v)) throw ValidationError("constraint matrix has a non-finite entry");
  for (double v : rhs_)
    if (!std::isfinite(v)) throw ValidationError("right-hand side has a non-finite entry");
  if (objective_)
    for (double v : *objective_)
      if (!std::isfinite(v)) throw ValidationError("objective has a non-finite entry");
  for (std::size_t j = 0; j < cols_; ++j) {
    const auto& bd = bounds_[j];
    if (bd.kind == VariableBound::Kind::Boxed &&
        (!std::isfinite(bd.lower) || !std::isfinite(bd.upper) || bd.lower > bd.upper))
      throw ValidationError("variable " + std::to_string(j) + " has an empty or non-finite box");
  }
}

std::string to_string(Status status) {
  switch (status) {
  case Status::Optimal: return "optimal";
  case Status::Feasible: return "feasible";
  case Status::Infeasible: return "infeasible";
  case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

using Kind = VariableBound::Kind;

/// min cost^T x, A x = b, x >= 0, rows already sign-normalized so b >= 0.
struct StandardForm {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> a; // m x n
  std::vector<double> b;
  std::vector<double> cost;
  std::vector<double> row_sign; // D
  std::size_t original_rows = 0;
  // Column of each original variable, and the negative part for free ones.
  std::vector<std::size_t> column;
  std::vector<std::size_t> negative_column;
  std::vector<double> shift;
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

StandardForm to_standard(const LinearProgram& lp) {
  StandardForm sf;
  sf.original_rows = lp.rows();
  std::size_t boxed = 0;
  sf.column.resize(lp.cols());
  sf.negative_column.assign(lp.cols(), kNone);
  sf.shift.assign(lp.cols(), 0.0);
  std::size_t n = 0;
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    sf.column[j] = n++;
    switch (lp.bound(j).kind) {
    case Kind::NonNegative: break;
    case Kind::Free: sf.negative_column[j] = n++; break;
    case Kind::Boxed:
      sf.shift[j] = lp.bound(j).lower;
      ++boxed;
      break;
    }
  }
  const std::size_t slack_start = n;
  n += boxed;
  sf.m = lp.rows() + boxed;
  sf.n = n;
  sf.a.assign(sf.m * sf.n, 0.0);
  sf.b.assign(sf.m, 0.0);
  sf.cost.assign(sf.n, 0.0);

  const double sense = lp.sense() == Sense::Maximize ? -1.0 : 1.0;
  const auto c = lp.objective();
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    double rhs = lp.b(i);
    for (std::size_t j = 0; j < lp.cols(); ++j) {
      const double v = lp.a(i, j);
      sf.a[i * n + sf.column[j]] = v;
      if (sf.negative_column[j] != kNone) sf.a[i * n + sf.negative_column[j]] = -v;
      rhs -= v * sf.shift[j];
    }
    sf.b[i] = rhs;
  }
  std::size_t box_row = lp.rows();
  std::size_t slack = slack_start;
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    if (!c.empty()) {
      sf.cost[sf.column[j]] = sense * c[j];
      if (sf.negative_column[j] != kNone) sf.cost[sf.negative_column[j]] = -sense * c[j];
    }
    if (lp.bound(j).kind != Kind::Boxed) continue;
    sf.a[box_row * n + sf.column[j]] = 1.0;
    sf.a[box_row * n + slack] = 1.0;
    sf.b[box_row] = lp.bound(j).upper - lp.bound(j).lower;
    ++box_row;
    ++slack;
  }
  sf.row_sign.assign(sf.m, 1.0);
  for (std::size_t i = 0; i < sf.m; ++i) {
    if (sf.b[i] >= 0.0) continue;
    sf.row_sign[i] = -1.0;
    sf.b[i] = -sf.b[i];
    for (std::size_t j = 0; j < n; ++j) sf.a[i * n + j] = -sf.a[i * n + j];
  }
  return sf;
}

/// Tableau over [A | I] with the artificial block kept for B^-1 and duals.
class Tableau {
public:
  explicit Tableau(const StandardForm& sf)
      : m_(sf.m), n_(sf.n), width_(sf.n + sf.m + 1), t_(sf.m * width_, 0.0), d_(width_, 0.0),
        basis_(sf.m) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sf.a[i * n_ + j];
      at(i, n_ + i) = 1.0;
      at(i, width_ - 1) = sf.b[i];
      basis_[i] = n_ + i;
    }
  }

  double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }
  double rhs(std::size_t i) const { return at(i, width_ - 1); }
  std::size_t rhs_col() const { return width_ - 1; }
  std::vector<double>& costs() { return d_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  std::size_t structural() const { return n_; }
  std::size_t rows() const { return m_; }

  /// Objective row for cost vector over all n+m columns.
  void price(const std::vector<double>& cost) {
    std::fill(d_.begin(), d_.end(), 0.0);
    for (std::size_t j = 0; j + 1 < width_; ++j) d_[j] = cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) d_[j] -= cb * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j < width_; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    const double f = d_[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j < width_; ++j) d_[j] -= f * at(r, j);
      d_[c] = 0.0;
    }
    basis_[r] = c;
  }

  void clear_row(std::size_t r, std::size_t upto) {
    for (std::size_t j = 0; j < upto; ++j) at(r, j) = 0.0;
  }

private:
  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<double> t_;
  std::vector<double> d_;
  std::vector<std::size_t> basis_;
};

enum class LoopResult { Optimal, Unbounded };

struct LoopState {
  std::size_t iterations = 0;
  std::size_t unbounded_column = kNone;
};

/// Bland's rule: lowest-index improving column, lowest-index leaving basic.
LoopResult run_simplex(Tableau& t, std::size_t entering_limit, const Options& opt, LoopState& state) {
  const std::size_t rhs = t.rhs_col();
  for (;;) {
    std::size_t enter = kNone;
    for (std::size_t j = 0; j < entering_limit; ++j)
      if (t.costs()[j] < -opt.tol) {
        enter = j;
        break;
      }
    if (enter == kNone) return LoopResult::Optimal;

    std::size_t leave = kNone;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double v = t.at(i, enter);
      if (v <= opt.pivot_tol) continue;
      const double ratio = std::max(t.at(i, rhs), 0.0) / v;
      if (ratio < best - 1e-12 ||
          (leave != kNone && std::abs(ratio - best) <= 1e-12 && t.basis()[i] < t.basis()[leave])) {
        best = std::min(best, ratio);
        leave = i;
      }
    }
    if (leave == kNone) {
      state.unbounded_column = enter;
      return LoopResult::Unbounded;
    }
    if (++state.iterations > opt.max_iters)
      throw StalledError("simplex stalled: iteration limit " + std::to_string(opt.max_iters) +
                         " reached");
    t.pivot(leave, enter);
  }
}

/// Basic solution of [A | I] x = b recomputed from the original data.
std::vector<double> basic_solution(const StandardForm& sf, const Tableau& t) {
  const std::size_t m = sf.m;
  std::vector<double> x(sf.n + m, 0.0);
  if (m == 0) return x;
  std::vector<double> bmat(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t col = t.basis()[k];
      bmat[i * m + k] = col < sf.n ? sf.a[i * sf.n + col] : (col - sf.n == i ? 1.0 : 0.0);
    }
  auto solved = detail::solve_square(std::move(bmat), sf.b, 1e-14);
  for (std::size_t k = 0; k < m; ++k) {
    double v = solved ? (*solved)[k] : t.rhs(k);
    if (v < 0.0 && v > -1e-9) v = 0.0;
    x[t.basis()[k]] = v;
  }
  return x;
}

std::vector<double> to_original(const LinearProgram& lp, const StandardForm& sf,
                                const std::vector<double>& xs, bool with_shift) {
  std::vector<double> x(lp.cols());
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    double v = xs[sf.column[j]];
    if (sf.negative_column[j] != kNone) v -= xs[sf.negative_column[j]];
    if (with_shift) v += sf.shift[j];
    x[j] = v;
  }
  return x;
}

/// y^T = c_B^T B^-1 over the rationals, plus the exact primal basic values.
struct ExactBasis {
  std::vector<mpq_class> x;
  std::vector<mpq_class> y;
  bool singular = false;
};

ExactBasis exact_basis(const StandardForm& sf, const std::vector<std::size_t>& basis,
                       const std::vector<double>& cost_all) {
  const std::size_t m = sf.m;
  ExactBasis out;
  std::vector<mpq_class> bm(m * m), bt(m * m), rhs(m), cb(m);
  for (std::size_t i = 0; i < m; ++i) {
    rhs[i] = mpq_class(sf.b[i]);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t col = basis[k];
      mpq_class v = col < sf.n ? mpq_class(sf.a[i * sf.n + col]) : mpq_class(col - sf.n == i ? 1 : 0);
      bm[i * m + k] = v;
      bt[k * m + i] = v;
    }
  }
  for (std::size_t k = 0; k < m; ++k) cb[k] = mpq_class(cost_all[basis[k]]);
  auto x = detail::solve_square(std::move(bm), std::move(rhs), mpq_class(0));
  auto y = detail::solve_square(std::move(bt), std::move(cb), mpq_class(0));
  if (!x || !y) {
    out.singular = true;
    return out;
  }
  out.x = std::move(*x);
  out.y = std::move(*y);
  return out;
}

mpq_class exact_column_product(const StandardForm& sf, const std::vector<mpq_class>& y, std::size_t j) {
  mpq_class s = 0;
  for (std::size_t i = 0; i < sf.m; ++i) {
    const double v = sf.a[i * sf.n + j];
    if (v != 0.0) s += y[i] * mpq_class(v);
  }
  return s;
}

ExactCheck exact_feasible(const StandardForm& sf, const std::vector<std::size_t>& basis,
                          const std::vector<double>& cost_all, bool check_dual) {
  ExactCheck check;
  const ExactBasis eb = exact_basis(sf, basis, cost_all);
  if (eb.singular) {
    check.detail = "final basis is singular over the rationals";
    return check;
  }
  for (std::size_t k = 0; k < sf.m; ++k) {
    if (eb.x[k] < 0) {
      check.detail = "basic variable " + std::to_string(basis[k]) + " is negative in exact arithmetic";
      return check;
    }
    if (basis[k] >= sf.n && eb.x[k] != 0) {
      check.detail = "artificial variable stays positive in exact arithmetic";
      return check;
    }
  }
  if (check_dual) {
    for (std::size_t j = 0; j < sf.n; ++j) {
      if (mpq_class(sf.cost[j]) - exact_column_product(sf, eb.y, j) < 0) {
        check.detail = "reduced cost of column " + std::to_string(j) + " is negative in exact arithmetic";
        return check;
      }
    }
  }
  check.ok = true;
  check.detail = check_dual ? "basis primal and dual feasible over the rationals"
                            : "basis primal feasible over the rationals";
  return check;
}

ExactCheck exact_farkas(const StandardForm& sf, const std::vector<std::size_t>& basis,
                        const std::vector<double>& cost_all) {
  ExactCheck check;
  const ExactBasis eb = exact_basis(sf, basis, cost_all);
  if (eb.singular) {
    check.detail = "final phase-one basis is singular over the rationals";
    return check;
  }
  for (std::size_t j = 0; j < sf.n; ++j)
    if (exact_column_product(sf, eb.y, j) > 0) {
      check.detail = "Farkas sign condition fails on column " + std::to_string(j);
      return check;
    }
  mpq_class yb = 0;
  for (std::size_t i = 0; i < sf.m; ++i) yb += eb.y[i] * mpq_class(sf.b[i]);
  if (yb <= 0) {
    check.detail = "Farkas margin is not positive in exact arithmetic";
    return check;
  }
  check.ok = true;
  std::ostringstream os;
  os.precision(17);
  os << "exact Farkas margin " << yb.get_d();
  check.detail = os.str();
  return check;
}

double column_product(const LinearProgram& lp, std::span<const double> y, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < lp.rows(); ++i) s += y[i] * lp.a(i, j);
  return s;
}

} // namespace

Outcome solve(const LinearProgram& lp, const Options& opt) {
  if (lp.rows() > opt.max_rows || lp.cols() > opt.max_cols)
    throw SizeError("linear program " + std::to_string(lp.rows()) + "x" + std::to_string(lp.cols()) +
                    " exceeds the configured cap " + std::to_string(opt.max_rows) + "x" +
                    std::to_string(opt.max_cols));
  lp.check();

  const StandardForm sf = to_standard(lp);
  Tableau t(sf);
  Outcome out;
  LoopState state;

  // Phase one: minimize the sum of artificials.
  std::vector<double> phase_one(sf.n + sf.m, 0.0);
  for (std::size_t i = 0; i < sf.m; ++i) phase_one[sf.n + i] = 1.0;
  t.price(phase_one);
  run_simplex(t, sf.n + sf.m, opt, state);

  double scale = 1.0;
  for (double v : sf.b) scale = std::max(scale, std::abs(v));
  const double infeasibility = -t.costs()[t.rhs_col()];
  if (infeasibility > opt.tol * scale) {
    out.status = Status::Infeasible;
    std::vector<double> y(lp.rows());
    for (std::size_t i = 0; i < lp.rows(); ++i)
      y[i] = sf.row_sign[i] * (1.0 - t.costs()[sf.n + i]);
    out.dual = std::move(y);
    out.iterations = state.iterations;
    if (opt.exact_recheck) out.exact = exact_farkas(sf, t.basis(), phase_one);
  } else {
    // Drive remaining artificials out of the basis where possible.
    for (std::size_t i = 0; i < sf.m; ++i) {
      if (t.basis()[i] < sf.n) continue;
      std::size_t best = kNone;
      double best_mag = opt.pivot_tol;
      for (std::size_t j = 0; j < sf.n; ++j)
        if (std::abs(t.at(i, j)) > best_mag) {
          best_mag = std::abs(t.at(i, j));
          best = j;
        }
      if (best != kNone)
        t.pivot(i, best);
      else
        t.clear_row(i, sf.n);
    }

    std::vector<double> phase_two(sf.n + sf.m, 0.0);
    std::copy(sf.cost.begin(), sf.cost.end(), phase_two.begin());
    LoopResult result = LoopResult::Optimal;
    if (lp.has_objective()) {
      t.price(phase_two);
      result = run_simplex(t, sf.n, opt, state);
    }
    out.iterations = state.iterations;
    const auto xs = basic_solution(sf, t);
    out.primal = to_original(lp, sf, xs, true);

    if (result == LoopResult::Unbounded) {
      out.status = Status::Unbounded;
      std::vector<double> rs(sf.n + sf.m, 0.0);
      rs[state.unbounded_column] = 1.0;
      for (std::size_t i = 0; i < sf.m; ++i) rs[t.basis()[i]] = -t.at(i, state.unbounded_column);
      out.ray = to_original(lp, sf, rs, false);
    } else if (lp.has_objective()) {
      out.status = Status::Optimal;
      const double sign = lp.sense() == Sense::Maximize ? -1.0 : 1.0;
      std::vector<double> y(lp.rows());
      for (std::size_t i = 0; i < lp.rows(); ++i)
        y[i] = sign * sf.row_sign[i] * (-t.costs()[sf.n + i]);
      out.dual = std::move(y);
      if (opt.exact_recheck) out.exact = exact_feasible(sf, t.basis(), phase_two, true);
    } else {
      out.status = Status::Feasible;
      if (opt.exact_recheck) out.exact = exact_feasible(sf, t.basis(), phase_two, false);
    }
    if (lp.has_objective()) {
      const auto c = lp.objective();
      double obj = 0.0;
      for (std::size_t j = 0; j < lp.cols(); ++j) obj += c[j] * out.primal[j];
      out.objective = obj;
    }
  }

  const CertificateReport report = verify(lp, out);
  if (!report.ok)
    throw StalledError("simplex result failed self-verification (" + to_string(out.status) +
                       "): " + report.message);
  return out;
}

CertificateReport verify(const LinearProgram& lp, const Outcome& outcome) {
  CertificateReport rep;
  std::ostringstream msg;
  msg.precision(3);
  bool ok = true;

  auto check_point = [&](const std::vector<double>& x) {
    if (x.size() != lp.cols()) {
      ok = false;
      msg << "point has wrong length; ";
      return;
    }
    for (std::size_t i = 0; i < lp.rows(); ++i) {
      double s = -lp.b(i);
      for (std::size_t j = 0; j < lp.cols(); ++j) s += lp.a(i, j) * x[j];
      rep.residual = std::max(rep.residual, std::abs(s));
    }
    for (std::size_t j = 0; j < lp.cols(); ++j) {
      const auto& bd = lp.bound(j);
      double v = 0.0;
      if (bd.kind == Kind::NonNegative) v = -x[j];
      if (bd.kind == Kind::Boxed) v = std::max(bd.lower - x[j], x[j] - bd.upper);
      rep.bound_violation = std::max(rep.bound_violation, v);
    }
    if (!(rep.residual <= kResidualTol)) {
      ok = false;
      msg << "residual " << rep.residual << " > 1e-7; ";
    }
    if (!(rep.bound_violation <= kResidualTol)) {
      ok = false;
      msg << "bound violation " << rep.bound_violation << "; ";
    }
  };

  switch (outcome.status) {
  case Status::Feasible: check_point(outcome.primal); break;

  case Status::Optimal: {
    check_point(outcome.primal);
    if (outcome.dual.size() != lp.rows() || !lp.has_objective()) {
      ok = false;
      msg << "optimal outcome without dual or objective; ";
      break;
    }
    // Work in the maximization sense.
    const double sign = lp.sense() == Sense::Maximize ? 1.0 : -1.0;
    const auto c = lp.objective();
    double dual_bound = 0.0;
    double primal = 0.0;
    for (std::size_t i = 0; i < lp.rows(); ++i) dual_bound += sign * outcome.dual[i] * lp.b(i);
    for (std::size_t j = 0; j < lp.cols(); ++j) {
      primal += sign * c[j] * outcome.primal[j];
      const double r = sign * (c[j] - column_product(lp, outcome.dual, j));
      const auto& bd = lp.bound(j);
      if (bd.kind == Kind::NonNegative) {
        rep.dual_violation = std::max(rep.dual_violation, r);
      } else if (bd.kind == Kind::Free) {
        rep.dual_violation = std::max(rep.dual_violation, std::abs(r));
      } else {
        dual_bound += std::max(r * bd.lower, r * bd.upper);
      }
    }
    rep.duality_gap = dual_bound - primal;
    const double scale = 1.0 + std::abs(primal);
    if (!(rep.dual_violation <= kResidualTol)) {
      ok = false;
      msg << "dual infeasibility " << rep.dual_violation << "; ";
    }
    if (!(rep.duality_gap >= -kResidualTol * scale)) {
      ok = false;
      msg << "weak duality violated by " << -rep.duality_gap << "; ";
    }
    if (!(rep.duality_gap <= 1e-6 * scale)) {
      ok = false;
      msg << "duality gap " << rep.duality_gap << "; ";
    }
    break;
  }

  case Status::Infeasible: {
    if (outcome.dual.size() != lp.rows()) {
      ok = false;
      msg << "infeasible outcome without certificate; ";
      break;
    }
    double margin = 0.0;
    double ymax = 0.0;
    for (std::size_t i = 0; i < lp.rows(); ++i) {
      margin += outcome.dual[i] * lp.b(i);
      ymax = std::max(ymax, std::abs(outcome.dual[i]));
    }
    for (std::size_t j = 0; j < lp.cols(); ++j) {
      const double a = column_product(lp, outcome.dual, j);
      const auto& bd = lp.bound(j);
      if (bd.kind == Kind::NonNegative)
        rep.dual_violation = std::max(rep.dual_violation, a);
      else if (bd.kind == Kind::Free)
        rep.dual_violation = std::max(rep.dual_violation, std::abs(a));
      else
        margin -= std::max(a * bd.lower, a * bd.upper);
    }
    rep.farkas_margin = margin;
    if (!(rep.dual_violation <= 1e-9 * std::max(1.0, ymax))) {
      ok = false;
      msg << "Farkas sign condition violated by " << rep.dual_violation << "; ";
    }
    if (!(margin > 0.0)) {
      ok = false;
      msg << "Farkas margin " << margin << " not positive; ";
    }
    break;
  }

  case Status::Unbounded: {
    check_point(outcome.primal);
    if (outcome.ray.size() != lp.cols() || !lp.has_objective()) {
      ok = false;
      msg << "unbounded outcome without ray; ";
      break;
    }
    double ray_residual = 0.0;
    for (std::size_t i = 0; i < lp.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < lp.cols(); ++j) s += lp.a(i, j) * outcome.ray[j];
      ray_residual = std::max(ray_residual, std::abs(s));
    }
    double cone = 0.0;
    double gain = 0.0;
    const double sign = lp.sense() == Sense::Maximize ? 1.0 : -1.0;
    for (std::size_t j = 0; j < lp.cols(); ++j) {
      const auto& bd = lp.bound(j);
      if (bd.kind == Kind::NonNegative) cone = std::max(cone, -outcome.ray[j]);
      if (bd.kind == Kind::Boxed) cone = std::max(cone, std::abs(outcome.ray[j]));
      gain += sign * lp.objective()[j] * outcome.ray[j];
    }
    rep.residual = std::max(rep.residual, ray_residual);
    rep.bound_violation = std::max(rep.bound_violation, cone);
    if (!(ray_residual <= kResidualTol) || !(cone <= kResidualTol) || !(gain > 0.0)) {
      ok = false;
      msg << "improving ray fails its check; ";
    }
    break;
  }
  }

  rep.ok = ok;
  rep.message = ok ? "verified" : msg.str();
  return rep;
}

} // namespace bellbox::lp
