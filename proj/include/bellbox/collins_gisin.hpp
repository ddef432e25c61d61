#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "bellbox/local_polytope.hpp"
#include "bellbox/scenario.hpp"

namespace bellbox {

/// Reduced full-dimensional coordinates of the no-signalling affine hull:
/// for every nonempty set of parties, their joint marginals with each party's
/// last output omitted.
///
/// Coordinates are ordered as a mixed-radix number over the parties (party 0
/// slowest), each party's digit being "absent" or one (input, output < last)
/// pair in lexicographic order; the all-absent digit string is skipped.
class CollinsGisin {
public:
  struct Coordinate {
    /// Per party: -1 when absent, otherwise the input.
    std::vector<int> inputs;
    std::vector<int> outputs;
  };

  explicit CollinsGisin(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  std::size_t dimension() const { return coords_.size(); }
  const std::vector<Coordinate>& coordinates() const { return coords_; }

  /// Marginals read off a behavior, absent parties fixed to input 0.
  std::vector<double> project(std::span<const double> probs) const;

  /// No-signalling behavior table with the given reduced coordinates.
  std::vector<double> lift(std::span<const double> reduced) const;

  /// Functional on full coordinates restricted to the affine hull:
  /// <coeffs, lift(r)> = <g, r> + constant.
  std::pair<std::vector<double>, double> pull_back(std::span<const double> coeffs) const;

  /// Full coefficients c with <c, P> = <g, project(P)> for every behavior.
  std::vector<double> push_forward(std::span<const double> reduced_coeffs) const;

private:
  Scenario scenario_;
  std::vector<Coordinate> coords_;
  // lift: p = L r + offset (dense, dimension() columns)
  std::vector<double> lift_matrix_;
  std::vector<double> lift_offset_;
  // project: r = M p, stored as the support of each row
  std::vector<std::vector<std::size_t>> project_support_;
};

/// Inequality <coeffs, r> <= bound in reduced coordinates, scaled so the
/// largest |coefficient| is 1 and, when every entry is within 1e-9 of a
/// multiple of 1/q for some q <= 64, rewritten as coprime integers.
struct CanonicalInequality {
  std::vector<double> coeffs;
  double bound = 0.0;
  bool integral = false;

  /// Entrywise comparison within `tol`.
  bool matches(const CanonicalInequality& other, double tol = 1e-9) const;
};

/// ValidationError when the functional is constant on the affine hull.
CanonicalInequality canonicalize(const Scenario& scenario, std::span<const double> coeffs, double bound);

/// canonicalize() on full coordinates, re-expressed as a BellFunctional in
/// the canonical gauge (bound recomputed by vertex enumeration).
BellFunctional canonical_functional(const BellFunctional& functional, const std::string& note);

/// Inequality expressed over correlators <A_x B_y ...> of binary-output
/// scenarios, scaled so the largest |correlator coefficient| is 1. CHSH reads
/// E00 + E01 + E10 - E11 <= 2 in this gauge.
struct CorrelatorForm {
  /// Indexed like CollinsGisin coordinates (output digit is always 0).
  std::vector<double> coeffs;
  double bound = 0.0;
  /// Multiplier from the canonical gauge to this one.
  double scale = 1.0;
};

/// ValidationError unless every (party, input) has two outputs.
CorrelatorForm correlator_form(const Scenario& scenario, std::span<const double> coeffs, double bound);

/// Value of the correlator form on a behavior.
double correlator_value(const CorrelatorForm& form, const Behavior& behavior);

} // namespace bellbox
