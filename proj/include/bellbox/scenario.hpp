#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bellbox {

inline constexpr double kDefaultTol = 1e-9;

/// Classical interface of a black box: parties, inputs per party and
/// the number of outputs for every (party, input).
///
/// Flat layout used everywhere in the library: joint inputs are ordered
/// lexicographically with party 0 slowest; inside one joint-input block the
/// joint outputs are ordered the same way.
class Scenario {
public:
  /// Outputs may differ per (party, input).
  Scenario(std::vector<int> inputs_per_party, std::vector<std::vector<int>> outputs);

  /// Uniform shape: every party has `inputs` inputs with `outputs` outputs each.
  static Scenario uniform(int parties, int inputs, int outputs);

  int parties() const { return static_cast<int>(inputs_.size()); }
  int inputs(int party) const { return inputs_.at(party); }
  int outputs(int party, int input) const { return outputs_.at(party).at(input); }
  const std::vector<int>& inputs_per_party() const { return inputs_; }
  const std::vector<std::vector<int>>& output_table() const { return outputs_; }

  std::size_t joint_input_count() const { return block_offsets_.size(); }
  std::size_t dimension() const { return dimension_; }

  std::size_t block_offset(std::size_t joint_input) const { return block_offsets_.at(joint_input); }
  std::size_t block_size(std::size_t joint_input) const;

  /// Joint input index <-> per-party inputs.
  std::size_t joint_input_index(std::span<const int> inputs) const;
  std::vector<int> joint_inputs(std::size_t joint_input) const;

  /// Joint output offset inside the block of `inputs`, and its inverse.
  std::size_t joint_output_index(std::span<const int> inputs, std::span<const int> outputs) const;
  std::vector<int> joint_outputs(std::span<const int> inputs, std::size_t joint_output) const;

  /// Lexicographic index into a behavior table. Throws RangeError naming the
  /// offending party when a choice is out of range.
  std::size_t flat_index(std::span<const int> inputs, std::span<const int> outputs) const;

  /// Inverse of flat_index: (inputs, outputs) for a flat position.
  std::pair<std::vector<int>, std::vector<int>> decode(std::size_t flat) const;

  /// "(2,2,2)"-style label for uniform scenarios, explicit tables otherwise.
  std::string describe() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;

private:
  void check_inputs(std::span<const int> inputs) const;

  std::vector<int> inputs_;
  std::vector<std::vector<int>> outputs_;
  std::vector<std::size_t> block_offsets_;
  std::size_t dimension_ = 0;
};

/// Conditional probability table P(outputs | inputs). Immutable once built;
/// construct through validate_behavior().
class Behavior {
public:
  const Scenario& scenario() const { return scenario_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  double at(std::span<const int> inputs, std::span<const int> outputs) const {
    return probs_[scenario_.flat_index(inputs, outputs)];
  }

  friend Behavior validate_behavior(const Scenario&, std::span<const double>, double);

private:
  Behavior(Scenario scenario, std::vector<double> probs)
      : scenario_(std::move(scenario)), probs_(std::move(probs)) {}

  Scenario scenario_;
  std::vector<double> probs_;
};

/// Checks length, nonnegativity and per-block normalization to `tol`.
/// Entries in [-tol, 0) are clamped to 0 and each block is renormalized
/// (blocks already summing to 1 up to rounding are kept as given).
Behavior validate_behavior(const Scenario& scenario, std::span<const double> raw,
                           double tol = kDefaultTol);

/// Convex combination; weights must sum to 1 within 1e-12.
Behavior mix(std::span<const std::pair<double, Behavior>> components);

struct MarginalLocation {
  int party = 0;
  int input = 0;
  int output = 0;
  /// The two joint inputs of the remaining parties (party order, `party` skipped).
  std::vector<int> remote_first;
  std::vector<int> remote_second;
};

struct NoSignallingReport {
  double max_defect = 0.0;
  int worst_party = 0;
  MarginalLocation worst_marginal;
};

/// Largest change of any one-party marginal under a change of the remote inputs.
NoSignallingReport no_signalling_defect(const Behavior& behavior);

/// One-party marginal P_party(output | input) with remote parties' inputs fixed.
double marginal(const Behavior& behavior, int party, int input, int output,
                std::span<const int> remote_inputs);

/// Catalog: "uniform", "pr_box", "signalling_demo". Only "uniform" accepts
/// scenarios other than (2,2,2).
Behavior named_behavior(const std::string& name, const Scenario& scenario = Scenario::uniform(2, 2, 2));

/// Merges the last output of every (party, input) into output `into`; bins an
/// appended no-click outcome into a regular one. The result's scenario has one
/// output fewer per (party, input).
Behavior bin_last_outcome(const Behavior& behavior, int into = 0);

} // namespace bellbox
