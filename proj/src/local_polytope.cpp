#include "bellbox/local_polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "bellbox/error.hpp"

namespace bellbox {

DeterministicStrategy::DeterministicStrategy(Scenario scenario, std::vector<std::vector<int>> assignment)
    : scenario_(std::move(scenario)), assignment_(std::move(assignment)) {
  if (assignment_.size() != static_cast<std::size_t>(scenario_.parties()))
    throw RangeError("strategy assigns " + std::to_string(assignment_.size()) + " parties, scenario has " +
                     std::to_string(scenario_.parties()));
  for (int p = 0; p < scenario_.parties(); ++p) {
    if (assignment_[p].size() != static_cast<std::size_t>(scenario_.inputs(p)))
      throw RangeError("party " + std::to_string(p) + ": strategy table has wrong length");
    for (int x = 0; x < scenario_.inputs(p); ++x)
      if (assignment_[p][x] < 0 || assignment_[p][x] >= scenario_.outputs(p, x))
        throw RangeError("party " + std::to_string(p) + ": input " + std::to_string(x) +
                         " assigned output " + std::to_string(assignment_[p][x]) + " out of range");
  }
}

std::vector<int> DeterministicStrategy::apply(std::span<const int> inputs) const {
  if (inputs.size() != assignment_.size())
    throw RangeError("expected " + std::to_string(assignment_.size()) + " inputs");
  std::vector<int> out(inputs.size());
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    if (inputs[p] < 0 || inputs[p] >= scenario_.inputs(static_cast<int>(p)))
      throw RangeError("party " + std::to_string(p) + ": input " + std::to_string(inputs[p]) + " out of range");
    out[p] = assignment_[p][inputs[p]];
  }
  return out;
}

std::size_t DeterministicStrategy::index() const {
  std::size_t idx = 0;
  for (int p = 0; p < scenario_.parties(); ++p)
    for (int x = 0; x < scenario_.inputs(p); ++x)
      idx = idx * scenario_.outputs(p, x) + assignment_[p][x];
  return idx;
}

std::size_t strategy_count(const Scenario& scenario, std::size_t cap) {
  std::size_t count = 1;
  for (int p = 0; p < scenario.parties(); ++p)
    for (int x = 0; x < scenario.inputs(p); ++x) {
      const auto n = static_cast<std::size_t>(scenario.outputs(p, x));
      if (count > cap / n || count * n > cap)
        throw SizeError("scenario " + scenario.describe() + " has more than " + std::to_string(cap) +
                        " deterministic strategies");
      count *= n;
    }
  return count;
}

DeterministicStrategy strategy_at(const Scenario& scenario, std::size_t index) {
  std::vector<std::vector<int>> a(scenario.parties());
  for (int p = 0; p < scenario.parties(); ++p) a[p].resize(scenario.inputs(p));
  for (int p = scenario.parties() - 1; p >= 0; --p)
    for (int x = scenario.inputs(p) - 1; x >= 0; --x) {
      const auto n = static_cast<std::size_t>(scenario.outputs(p, x));
      a[p][x] = static_cast<int>(index % n);
      index /= n;
    }
  if (index != 0) throw RangeError("strategy index out of range");
  return DeterministicStrategy(scenario, std::move(a));
}

std::vector<DeterministicStrategy> enumerate_strategies(const Scenario& scenario, std::size_t cap) {
  const std::size_t count = strategy_count(scenario, cap);
  std::vector<DeterministicStrategy> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(strategy_at(scenario, i));
  return out;
}

std::vector<std::size_t> strategy_support(const DeterministicStrategy& strategy) {
  const Scenario& s = strategy.scenario();
  std::vector<std::size_t> support(s.joint_input_count());
  for (std::size_t j = 0; j < s.joint_input_count(); ++j) {
    const auto in = s.joint_inputs(j);
    support[j] = s.flat_index(in, strategy.apply(in));
  }
  return support;
}

Behavior strategy_behavior(const DeterministicStrategy& strategy) {
  std::vector<double> p(strategy.scenario().dimension(), 0.0);
  for (std::size_t i : strategy_support(strategy)) p[i] = 1.0;
  return validate_behavior(strategy.scenario(), p);
}

LocalModel::LocalModel(Scenario scenario, std::vector<std::pair<std::size_t, double>> weights)
    : scenario_(std::move(scenario)), weights_(std::move(weights)) {
  const std::size_t count = strategy_count(scenario_);
  std::set<std::size_t> seen;
  double total = 0.0;
  for (const auto& [idx, w] : weights_) {
    if (idx >= count) throw RangeError("local model: strategy index " + std::to_string(idx) + " out of range");
    if (!seen.insert(idx).second)
      throw ValidationError("local model: strategy " + std::to_string(idx) + " listed twice");
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("local model: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("local model: weights sum to " + std::to_string(total));
}

Behavior LocalModel::behavior() const {
  std::vector<double> p(scenario_.dimension(), 0.0);
  for (const auto& [idx, w] : weights_)
    for (std::size_t i : strategy_support(strategy_at(scenario_, idx))) p[i] += w;
  return validate_behavior(scenario_, p, 1e-9);
}

namespace {

/// Visits every strategy's support (flat positions of its 1-entries) in
/// enumeration order without materializing strategy objects.
template <class Visit>
void for_each_support(const Scenario& s, std::size_t count, Visit&& visit) {
  // digits of the flattened assignment, first digit slowest
  std::vector<int> radix;
  std::vector<std::size_t> party_start;
  for (int p = 0; p < s.parties(); ++p) {
    party_start.push_back(radix.size());
    for (int x = 0; x < s.inputs(p); ++x) radix.push_back(s.outputs(p, x));
  }
  std::vector<int> digits(radix.size(), 0);
  const std::size_t joint = s.joint_input_count();
  std::vector<std::vector<int>> joint_inputs(joint);
  for (std::size_t j = 0; j < joint; ++j) joint_inputs[j] = s.joint_inputs(j);
  std::vector<std::size_t> support(joint);
  std::vector<int> out(s.parties());
  for (std::size_t idx = 0; idx < count; ++idx) {
    for (std::size_t j = 0; j < joint; ++j) {
      const auto& in = joint_inputs[j];
      for (int p = 0; p < s.parties(); ++p) out[p] = digits[party_start[p] + in[p]];
      support[j] = s.flat_index(in, out);
    }
    visit(idx, std::as_const(support));
    for (std::size_t k = digits.size(); k-- > 0;) {
      if (++digits[k] < radix[k]) break;
      digits[k] = 0;
    }
  }
}

} // namespace

LocalBound local_bound(const Scenario& scenario, std::span<const double> coeffs, std::size_t cap) {
  if (coeffs.size() != scenario.dimension())
    throw ValidationError("functional has " + std::to_string(coeffs.size()) + " coefficients, scenario needs " +
                          std::to_string(scenario.dimension()));
  const std::size_t count = strategy_count(scenario, cap);
  LocalBound best{-std::numeric_limits<double>::infinity(), 0};
  for_each_support(scenario, count, [&](std::size_t idx, const std::vector<std::size_t>& support) {
    double v = 0.0;
    for (std::size_t i : support) v += coeffs[i];
    if (v > best.value) best = {v, idx};
  });
  return best;
}

ExactLocalBound local_bound_exact(const Scenario& scenario, std::span<const std::int64_t> coeffs,
                                  std::size_t cap) {
  if (coeffs.size() != scenario.dimension())
    throw ValidationError("functional has " + std::to_string(coeffs.size()) + " coefficients, scenario needs " +
                          std::to_string(scenario.dimension()));
  const std::size_t count = strategy_count(scenario, cap);
  ExactLocalBound best{std::numeric_limits<std::int64_t>::min(), 0};
  for_each_support(scenario, count, [&](std::size_t idx, const std::vector<std::size_t>& support) {
    std::int64_t v = 0;
    for (std::size_t i : support)
      if (__builtin_add_overflow(v, coeffs[i], &v)) throw SizeError("integer local bound overflows");
    if (v > best.value) best = {v, idx};
  });
  return best;
}

BellFunctional::BellFunctional(Scenario scenario, std::vector<double> coeffs, std::string note)
    : scenario_(std::move(scenario)), coeffs_(std::move(coeffs)), note_(std::move(note)) {
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw ValidationError("functional has a non-finite coefficient");
  bound_ = bellbox::local_bound(scenario_, coeffs_).value;
}

BellFunctional::BellFunctional(Scenario scenario, std::vector<double> coeffs, double stored_bound,
                               std::string note)
    : BellFunctional(std::move(scenario), std::move(coeffs), std::move(note)) {
  if (!(std::abs(stored_bound - bound_) <= 1e-9))
    throw ValidationError("local_bound " + std::to_string(stored_bound) +
                          " does not match the recomputed bound " + std::to_string(bound_));
}

double BellFunctional::value(const Behavior& behavior) const {
  if (!(behavior.scenario() == scenario_))
    throw ValidationError("functional and behavior live on different scenarios");
  double v = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) v += coeffs_[i] * behavior[i];
  return v;
}

std::vector<std::int64_t> chsh_coefficients() {
  const Scenario s = Scenario::uniform(2, 2, 2);
  std::vector<std::int64_t> c(s.dimension(), 0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int in[] = {x, y};
          const int out[] = {a, b};
          const int sign = (x == 1 && y == 1) ? -1 : 1;
          c[s.flat_index(in, out)] = sign * ((a ^ b) ? -1 : 1);
        }
  return c;
}

BellFunctional chsh_functional() {
  const auto ic = chsh_coefficients();
  return BellFunctional(Scenario::uniform(2, 2, 2), std::vector<double>(ic.begin(), ic.end()), "CHSH");
}

std::vector<Relabelling> all_relabellings(const Scenario& s, std::size_t cap) {
  const int n = s.parties();
  std::vector<Relabelling> out;

  std::vector<int> party_perm(n);
  std::iota(party_perm.begin(), party_perm.end(), 0);
  do {
    // party p becomes party_perm[p]: its shape must fit there after input
    // relabelling, i.e. the multisets of output counts agree.
    bool ok = true;
    for (int p = 0; p < n && ok; ++p) {
      auto a = s.output_table()[p];
      auto b = s.output_table()[party_perm[p]];
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      ok = a == b;
    }
    if (!ok) continue;

    // Enumerate input permutations then output permutations party by party.
    std::vector<Relabelling> partial(1);
    partial[0].party_map = party_perm;
    partial[0].input_map.resize(n);
    partial[0].output_map.resize(n);
    for (int p = 0; p < n; ++p) {
      const int target = party_perm[p];
      std::vector<Relabelling> next;
      std::vector<int> in_perm(s.inputs(p));
      std::iota(in_perm.begin(), in_perm.end(), 0);
      do {
        bool fits = true;
        for (int x = 0; x < s.inputs(p); ++x)
          if (s.outputs(p, x) != s.outputs(target, in_perm[x])) fits = false;
        if (!fits) continue;
        // cartesian product of output permutations per input
        std::vector<std::vector<std::vector<int>>> choices(1);
        for (int x = 0; x < s.inputs(p); ++x) {
          std::vector<std::vector<std::vector<int>>> grown;
          std::vector<int> op(s.outputs(p, x));
          std::iota(op.begin(), op.end(), 0);
          do {
            for (const auto& c : choices) {
              auto g = c;
              g.push_back(op);
              grown.push_back(std::move(g));
            }
          } while (std::next_permutation(op.begin(), op.end()));
          choices = std::move(grown);
          if (choices.size() * partial.size() > cap)
            throw SizeError("relabelling group exceeds " + std::to_string(cap) + " elements");
        }
        for (const auto& base : partial)
          for (const auto& c : choices) {
            Relabelling r = base;
            r.input_map[p] = in_perm;
            r.output_map[p] = c;
            next.push_back(std::move(r));
          }
        if (next.size() + out.size() > cap)
          throw SizeError("relabelling group exceeds " + std::to_string(cap) + " elements");
      } while (std::next_permutation(in_perm.begin(), in_perm.end()));
      partial = std::move(next);
    }
    for (auto& r : partial) out.push_back(std::move(r));
  } while (std::next_permutation(party_perm.begin(), party_perm.end()));
  return out;
}

std::vector<double> relabel(const Scenario& s, const Relabelling& r, std::span<const double> values) {
  if (values.size() != s.dimension()) throw ValidationError("relabel: wrong vector length");
  std::vector<double> out(values.size(), 0.0);
  const int n = s.parties();
  std::vector<int> in2(n), out2(n);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto [in, o] = s.decode(i);
    for (int p = 0; p < n; ++p) {
      in2[r.party_map[p]] = r.input_map[p][in[p]];
      out2[r.party_map[p]] = r.output_map[p][in[p]][o[p]];
    }
    out[s.flat_index(in2, out2)] = values[i];
  }
  return out;
}

} // namespace bellbox
