#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bellbox/scenario.hpp"

namespace bellbox {

inline constexpr std::size_t kDefaultStrategyCap = 10'000'000;

/// Local deterministic transfer function: every party maps its own input to
/// one of its outputs, independently of the other parties.
class DeterministicStrategy {
public:
  /// assignment[party][input] = output. Throws RangeError when out of range.
  DeterministicStrategy(Scenario scenario, std::vector<std::vector<int>> assignment);

  const Scenario& scenario() const { return scenario_; }
  const std::vector<std::vector<int>>& assignment() const { return assignment_; }

  /// Per-party outputs for per-party inputs.
  std::vector<int> apply(std::span<const int> inputs) const;

  /// Position of this strategy in enumeration order.
  std::size_t index() const;

private:
  Scenario scenario_;
  std::vector<std::vector<int>> assignment_;
};

/// Number of local deterministic strategies; SizeError past `cap`.
std::size_t strategy_count(const Scenario& scenario, std::size_t cap = kDefaultStrategyCap);

/// Strategy number `index` in enumeration order: the flattened assignment
/// (party 0 input 0, party 0 input 1, ..., party 1 input 0, ...) read as a
/// mixed-radix number with the first digit slowest.
DeterministicStrategy strategy_at(const Scenario& scenario, std::size_t index);

std::vector<DeterministicStrategy> enumerate_strategies(const Scenario& scenario,
                                                        std::size_t cap = kDefaultStrategyCap);

/// 0/1 table with a single 1 per input block, at the outputs `apply` gives.
Behavior strategy_behavior(const DeterministicStrategy& strategy);

/// Flat positions of the 1-entries of a strategy's behavior, one per joint input.
std::vector<std::size_t> strategy_support(const DeterministicStrategy& strategy);

/// Probability weights over deterministic strategies.
class LocalModel {
public:
  /// Weights must be positive, indices distinct and valid, sum 1 within 1e-9.
  LocalModel(Scenario scenario, std::vector<std::pair<std::size_t, double>> weights);

  const Scenario& scenario() const { return scenario_; }
  const std::vector<std::pair<std::size_t, double>>& weights() const { return weights_; }

  /// The observable statistics of this mixture.
  Behavior behavior() const;

private:
  Scenario scenario_;
  std::vector<std::pair<std::size_t, double>> weights_;
};

struct LocalBound {
  double value = 0.0;
  std::size_t argmax = 0;
};

/// max over deterministic strategies of <coeffs, strategy behavior>; ties go
/// to the smallest strategy index.
LocalBound local_bound(const Scenario& scenario, std::span<const double> coeffs,
                       std::size_t cap = kDefaultStrategyCap);

struct ExactLocalBound {
  std::int64_t value = 0;
  std::size_t argmax = 0;
};

/// Integer-coefficient variant, evaluated without floating point.
ExactLocalBound local_bound_exact(const Scenario& scenario, std::span<const std::int64_t> coeffs,
                                  std::size_t cap = kDefaultStrategyCap);

/// Linear inequality <coeffs, P> <= local_bound over behaviors of a scenario.
class BellFunctional {
public:
  /// Computes the local bound by vertex enumeration.
  BellFunctional(Scenario scenario, std::vector<double> coeffs, std::string note = {});

  /// Uses a stored bound; ValidationError unless it matches the recomputed
  /// bound within 1e-9.
  BellFunctional(Scenario scenario, std::vector<double> coeffs, double stored_bound, std::string note);

  const Scenario& scenario() const { return scenario_; }
  std::span<const double> coeffs() const { return coeffs_; }
  double local_bound() const { return bound_; }
  const std::string& note() const { return note_; }

  double value(const Behavior& behavior) const;
  double violation(const Behavior& behavior) const { return value(behavior) - bound_; }

private:
  Scenario scenario_;
  std::vector<double> coeffs_;
  double bound_ = 0.0;
  std::string note_;
};

/// E00 + E01 + E10 - E11 expanded into probabilities on (2,2,2).
BellFunctional chsh_functional();

/// Integer coefficients of the same functional.
std::vector<std::int64_t> chsh_coefficients();

struct FacetOptions {
  std::size_t max_vertices = 256;
  std::size_t max_dimension = 16;
};

/// Complete facet list of the local polytope, computed by double description
/// in Collins-Gisin coordinates and returned in canonical integer gauge,
/// lifted to full behavior coordinates. Sorted by canonical coefficients.
std::vector<BellFunctional> enumerate_facets(const Scenario& scenario, const FacetOptions& options = {});

/// Relabelling of parties, inputs and outputs.
struct Relabelling {
  /// party_map[p] = party that p becomes.
  std::vector<int> party_map;
  /// input_map[p][x] = new input label of party p's input x.
  std::vector<std::vector<int>> input_map;
  /// output_map[p][x][a] = new output label.
  std::vector<std::vector<std::vector<int>>> output_map;
};

/// Every relabelling that maps the scenario to itself; SizeError past `cap`.
std::vector<Relabelling> all_relabellings(const Scenario& scenario, std::size_t cap = 100000);

/// Coefficients (or probabilities) moved to their relabelled positions.
std::vector<double> relabel(const Scenario& scenario, const Relabelling& r, std::span<const double> values);

} // namespace bellbox
