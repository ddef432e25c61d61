#include "bellbox/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bellbox/collins_gisin.hpp"
#include "bellbox/error.hpp"

namespace bellbox {
namespace {

std::string num(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::vector<std::vector<std::size_t>> all_supports(const Scenario& s, std::size_t count) {
  std::vector<std::vector<std::size_t>> supports(count);
  for (std::size_t i = 0; i < count; ++i) supports[i] = strategy_support(strategy_at(s, i));
  return supports;
}

/// max t such that t*P + (1-t)*U is a local mixture; the optimal dual is a
/// hyperplane supporting the local polytope where the segment leaves it.
std::optional<BellFunctional> supporting_functional(const Behavior& behavior,
                                                    const std::vector<std::vector<std::size_t>>& supports,
                                                    const lp::Options& lp_options) {
  const Scenario& s = behavior.scenario();
  const Behavior uniform = named_behavior("uniform", s);
  const std::size_t dim = s.dimension();
  const std::size_t n = supports.size();
  lp::LinearProgram prog(dim + 1, n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i : supports[j]) prog.a(i, j) = 1.0;
    prog.a(dim, j) = 1.0;
  }
  for (std::size_t i = 0; i < dim; ++i) {
    prog.a(i, n) = -(behavior[i] - uniform[i]);
    prog.b(i) = uniform[i];
  }
  prog.b(dim) = 1.0;
  prog.set_bound(n, lp::VariableBound::free());
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  prog.set_objective(std::move(c), lp::Sense::Maximize);
  const auto out = lp::solve(prog, lp_options);
  if (out.status != lp::Status::Optimal) return std::nullopt;
  std::vector<double> coeffs(dim);
  for (std::size_t i = 0; i < dim; ++i) coeffs[i] = -out.dual[i];
  return BellFunctional(s, std::move(coeffs), "supporting hyperplane");
}

} // namespace

Membership membership(const Behavior& behavior, const MembershipOptions& options) {
  const Scenario& s = behavior.scenario();
  const std::size_t count = strategy_count(s, options.strategy_cap);
  const std::size_t dim = s.dimension();
  const auto supports = all_supports(s, count);

  lp::LinearProgram prog(dim + 1, count);
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t i : supports[j]) prog.a(i, j) = 1.0;
    prog.a(dim, j) = 1.0;
  }
  for (std::size_t i = 0; i < dim; ++i) prog.b(i) = behavior[i];
  prog.b(dim) = 1.0;

  lp::Options lp_options = options.lp;
  lp_options.tol = options.tol;
  const auto out = lp::solve(prog, lp_options);
  const auto report = lp::verify(prog, out);

  if (out.status == lp::Status::Feasible) {
    std::vector<std::pair<std::size_t, double>> weights;
    double total = 0.0;
    for (std::size_t j = 0; j < count; ++j)
      if (out.primal[j] > 1e-15) {
        weights.push_back({j, out.primal[j]});
        total += out.primal[j];
      }
    for (auto& [j, w] : weights) w /= total;
    LocalModel model(s, std::move(weights));
    const Behavior reproduced = model.behavior();
    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) err = std::max(err, std::abs(reproduced[i] - behavior[i]));
    if (err > 1e-7) throw StalledError("local model reproduces the behavior only to " + num(err));
    return LocalVerdict{std::move(model), err, report};
  }

  std::vector<double> raw(out.dual.begin(), out.dual.begin() + static_cast<std::ptrdiff_t>(dim));
  std::vector<BellFunctional> candidates;
  try {
    if (auto f = supporting_functional(behavior, supports, lp_options))
      candidates.push_back(canonical_functional(*f, "certificate"));
  } catch (const ValidationError&) {
  } catch (const StalledError&) {
  }
  try {
    candidates.push_back(canonical_functional(BellFunctional(s, raw), "certificate"));
  } catch (const ValidationError&) {
  }
  {
    double scale = 0.0;
    for (double v : raw) scale = std::max(scale, std::abs(v));
    if (scale > 0.0)
      for (double& v : raw) v /= scale;
    candidates.push_back(BellFunctional(s, raw, "certificate (raw gauge)"));
  }
  for (auto& f : candidates) {
    const double value = f.value(behavior);
    const double violation = value - f.local_bound();
    if (violation > options.tol) return NonlocalVerdict{std::move(f), value, violation, out.dual, report};
  }
  throw StalledError("membership LP reported infeasibility but no derived functional is violated");
}

bool is_local(const Behavior& behavior, const MembershipOptions& options) {
  return std::holds_alternative<LocalVerdict>(membership(behavior, options));
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
  case Verdict::Local: return "Local";
  case Verdict::WeaklyNonlocal: return "WeaklyNonlocal";
  case Verdict::Signalling: return "Signalling";
  }
  return "unknown";
}

Classification classify(const Behavior& behavior, const MembershipOptions& options) {
  Classification c;
  const auto ns = no_signalling_defect(behavior);
  if (ns.max_defect > options.tol) {
    const auto& w = ns.worst_marginal;
    c.verdict = Verdict::Signalling;
    c.summary = "Signalling: party " + std::to_string(w.party) + "'s probability of output " +
                std::to_string(w.output) + " on input " + std::to_string(w.input) + " shifts by " +
                num(ns.max_defect) + " when only the other parties' inputs change.";
    c.signalling = ns;
    return c;
  }
  auto m = membership(behavior, options);
  if (auto* local = std::get_if<LocalVerdict>(&m)) {
    c.verdict = Verdict::Local;
    c.summary = "Local: a mixture of " + std::to_string(local->model.weights().size()) +
                " local deterministic strategies reproduces every output probability (max error " +
                num(local->reproduction_error, 3) + ").";
    c.local = std::move(*local);
  } else {
    auto& nl = std::get<NonlocalVerdict>(m);
    c.verdict = Verdict::WeaklyNonlocal;
    c.summary = "WeaklyNonlocal: no party can signal (defect " + num(ns.max_defect, 3) +
                "), yet the inputs/outputs violate a Bell inequality: value " + num(nl.value) +
                " exceeds the local bound " + num(nl.functional.local_bound()) + ".";
    c.nonlocal = std::move(nl);
  }
  return c;
}

CriticalInequality derive_critical_inequality(const Behavior& behavior, const MembershipOptions& options) {
  auto m = membership(behavior, options);
  if (std::holds_alternative<LocalVerdict>(m))
    throw PreconditionError("no inequality exists: the behavior is a local mixture");
  auto& nl = std::get<NonlocalVerdict>(m);
  CriticalInequality out{nl.functional, nl.value, nl.violation, std::nullopt};
  const Scenario& s = behavior.scenario();
  bool binary = true;
  for (const auto& row : s.output_table())
    for (int n : row) binary = binary && n == 2;
  if (binary) {
    try {
      const auto form = correlator_form(s, out.functional.coeffs(), out.functional.local_bound());
      out.correlator_violation = correlator_value(form, behavior) - form.bound;
    } catch (const ValidationError&) {
    }
  }
  return out;
}

double chsh_value(const Behavior& behavior) {
  if (!(behavior.scenario() == Scenario::uniform(2, 2, 2)))
    throw ValidationError("CHSH needs the (2,2,2) scenario, got " + behavior.scenario().describe());
  double s = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double e = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int in[] = {x, y};
          const int out[] = {a, b};
          e += ((a ^ b) ? -1.0 : 1.0) * behavior.at(in, out);
        }
      s += (x == 1 && y == 1) ? -e : e;
    }
  return s;
}

namespace {

template <class IsLocal>
ThresholdResult bisect(std::string parameter, double tol, IsLocal&& local_at) {
  if (!(tol > 0.0)) throw RangeError("threshold tolerance must be positive");
  ThresholdResult r;
  r.parameter = std::move(parameter);
  r.tolerance = tol;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (local_at(mid))
      lo = mid;
    else
      hi = mid;
    ++r.iterations;
  }
  r.local_side = lo;
  r.nonlocal_side = hi;
  r.critical = lo;
  return r;
}

} // namespace

ThresholdResult visibility_threshold(const Behavior& pure, const Behavior& noise, double tol,
                                     const MembershipOptions& options) {
  if (!(pure.scenario() == noise.scenario()))
    throw ValidationError("pure and noise behaviors live on different scenarios");
  if (!is_local(noise, options)) throw PreconditionError("noise behavior is not local");
  if (is_local(pure, options)) throw PreconditionError("no threshold: the pure behavior is already local");
  return bisect("visibility", tol, [&](double v) {
    const std::pair<double, Behavior> parts[] = {{v, pure}, {1.0 - v, noise}};
    return is_local(mix(parts), options);
  });
}

ThresholdResult efficiency_threshold(const BellSetup& setup, double tol, const MembershipOptions& options) {
  if (is_local(behavior_from_setup(setup), options))
    throw PreconditionError("no threshold: the ideal behavior is already local");
  auto local_at = [&](double eta) { return is_local(behavior_from_setup(lift_setup(setup, eta)), options); };
  if (local_at(1.0)) throw PreconditionError("lifted behavior at efficiency 1 is local");
  if (!local_at(0.0)) throw PreconditionError("lifted behavior at efficiency 0 is not local");
  return bisect("efficiency", tol, local_at);
}

} // namespace bellbox
