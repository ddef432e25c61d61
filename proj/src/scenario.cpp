#include "bellbox/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bellbox/error.hpp"

namespace bellbox {
namespace {

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (b != 0 && a > std::numeric_limits<std::size_t>::max() / b)
    throw SizeError("scenario too large: behavior dimension overflows");
  return a * b;
}

std::string join(std::span<const int> values) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  os << ')';
  return os.str();
}

} // namespace

Scenario::Scenario(std::vector<int> inputs_per_party, std::vector<std::vector<int>> outputs)
    : inputs_(std::move(inputs_per_party)), outputs_(std::move(outputs)) {
  if (inputs_.empty()) throw ValidationError("scenario needs at least one party");
  if (outputs_.size() != inputs_.size())
    throw ValidationError("output table has " + std::to_string(outputs_.size()) +
                          " rows for " + std::to_string(inputs_.size()) + " parties");
  for (std::size_t p = 0; p < inputs_.size(); ++p) {
    if (inputs_[p] < 1)
      throw ValidationError("party " + std::to_string(p) + " must have at least one input");
    if (outputs_[p].size() != static_cast<std::size_t>(inputs_[p]))
      throw ValidationError("party " + std::to_string(p) + " lists " +
                            std::to_string(outputs_[p].size()) + " output counts for " +
                            std::to_string(inputs_[p]) + " inputs");
    for (std::size_t x = 0; x < outputs_[p].size(); ++x)
      if (outputs_[p][x] < 1)
        throw ValidationError("party " + std::to_string(p) + " input " + std::to_string(x) +
                              " must have at least one output");
  }

  std::size_t joint = 1;
  for (int n : inputs_) joint = checked_mul(joint, static_cast<std::size_t>(n));
  block_offsets_.reserve(joint);
  std::vector<int> in(inputs_.size(), 0);
  std::size_t offset = 0;
  for (std::size_t j = 0; j < joint; ++j) {
    block_offsets_.push_back(offset);
    std::size_t size = 1;
    for (std::size_t p = 0; p < in.size(); ++p)
      size = checked_mul(size, static_cast<std::size_t>(outputs_[p][in[p]]));
    if (offset > std::numeric_limits<std::size_t>::max() - size)
      throw SizeError("scenario too large: behavior dimension overflows");
    offset += size;
    for (int p = static_cast<int>(in.size()) - 1; p >= 0; --p) {
      if (++in[p] < inputs_[p]) break;
      in[p] = 0;
    }
  }
  dimension_ = offset;
}

Scenario Scenario::uniform(int parties, int inputs, int outputs) {
  if (parties < 1) throw ValidationError("scenario needs at least one party");
  return Scenario(std::vector<int>(parties, inputs),
                  std::vector<std::vector<int>>(parties, std::vector<int>(std::max(inputs, 0), outputs)));
}

std::size_t Scenario::block_size(std::size_t joint_input) const {
  const std::size_t next =
      joint_input + 1 < block_offsets_.size() ? block_offsets_[joint_input + 1] : dimension_;
  return next - block_offsets_.at(joint_input);
}

void Scenario::check_inputs(std::span<const int> inputs) const {
  if (inputs.size() != inputs_.size())
    throw RangeError("expected " + std::to_string(inputs_.size()) + " inputs, got " +
                     std::to_string(inputs.size()));
  for (std::size_t p = 0; p < inputs.size(); ++p)
    if (inputs[p] < 0 || inputs[p] >= inputs_[p])
      throw RangeError("party " + std::to_string(p) + ": input " + std::to_string(inputs[p]) +
                       " outside 0.." + std::to_string(inputs_[p] - 1));
}

std::size_t Scenario::joint_input_index(std::span<const int> inputs) const {
  check_inputs(inputs);
  std::size_t idx = 0;
  for (std::size_t p = 0; p < inputs.size(); ++p) idx = idx * inputs_[p] + inputs[p];
  return idx;
}

std::vector<int> Scenario::joint_inputs(std::size_t joint_input) const {
  if (joint_input >= joint_input_count())
    throw RangeError("joint input " + std::to_string(joint_input) + " out of range");
  std::vector<int> in(inputs_.size());
  for (int p = static_cast<int>(in.size()) - 1; p >= 0; --p) {
    in[p] = static_cast<int>(joint_input % inputs_[p]);
    joint_input /= inputs_[p];
  }
  return in;
}

std::size_t Scenario::joint_output_index(std::span<const int> inputs,
                                         std::span<const int> outputs) const {
  check_inputs(inputs);
  if (outputs.size() != inputs_.size())
    throw RangeError("expected " + std::to_string(inputs_.size()) + " outputs, got " +
                     std::to_string(outputs.size()));
  std::size_t idx = 0;
  for (std::size_t p = 0; p < outputs.size(); ++p) {
    const int n = outputs_[p][inputs[p]];
    if (outputs[p] < 0 || outputs[p] >= n)
      throw RangeError("party " + std::to_string(p) + ": output " + std::to_string(outputs[p]) +
                       " outside 0.." + std::to_string(n - 1) + " for input " +
                       std::to_string(inputs[p]));
    idx = idx * n + outputs[p];
  }
  return idx;
}

std::vector<int> Scenario::joint_outputs(std::span<const int> inputs, std::size_t joint_output) const {
  check_inputs(inputs);
  std::vector<int> out(inputs_.size());
  for (int p = static_cast<int>(out.size()) - 1; p >= 0; --p) {
    const int n = outputs_[p][inputs[p]];
    out[p] = static_cast<int>(joint_output % n);
    joint_output /= n;
  }
  if (joint_output != 0) throw RangeError("joint output index out of range");
  return out;
}

std::size_t Scenario::flat_index(std::span<const int> inputs, std::span<const int> outputs) const {
  const std::size_t block = joint_input_index(inputs);
  return block_offsets_[block] + joint_output_index(inputs, outputs);
}

std::pair<std::vector<int>, std::vector<int>> Scenario::decode(std::size_t flat) const {
  if (flat >= dimension_) throw RangeError("flat index " + std::to_string(flat) + " out of range");
  const auto it = std::upper_bound(block_offsets_.begin(), block_offsets_.end(), flat);
  const auto block = static_cast<std::size_t>(it - block_offsets_.begin()) - 1;
  auto in = joint_inputs(block);
  auto out = joint_outputs(in, flat - block_offsets_[block]);
  return {std::move(in), std::move(out)};
}

std::string Scenario::describe() const {
  const int m = inputs_[0];
  const int o = outputs_[0][0];
  bool uniform_shape = true;
  for (std::size_t p = 0; p < inputs_.size(); ++p) {
    if (inputs_[p] != m) uniform_shape = false;
    for (int n : outputs_[p])
      if (n != o) uniform_shape = false;
  }
  std::ostringstream os;
  if (uniform_shape) {
    os << '(' << parties() << ',' << m << ',' << o << ')';
    return os.str();
  }
  os << "inputs " << join(inputs_) << " outputs ";
  for (std::size_t p = 0; p < outputs_.size(); ++p) os << (p ? ";" : "") << join(outputs_[p]);
  return os.str();
}

Behavior validate_behavior(const Scenario& scenario, std::span<const double> raw, double tol) {
  if (raw.size() != scenario.dimension())
    throw ValidationError("behavior has " + std::to_string(raw.size()) +
                          " entries, scenario " + scenario.describe() + " needs " +
                          std::to_string(scenario.dimension()));
  std::vector<double> probs(raw.begin(), raw.end());
  for (std::size_t b = 0; b < scenario.joint_input_count(); ++b) {
    const auto label = join(scenario.joint_inputs(b));
    const std::size_t lo = scenario.block_offset(b);
    const std::size_t hi = lo + scenario.block_size(b);
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!std::isfinite(probs[i]))
        throw ValidationError("input block " + label + ": non-finite entry");
      if (probs[i] < -tol)
        throw ValidationError("input block " + label + ": negative probability " +
                              std::to_string(probs[i]));
      probs[i] = std::max(probs[i], 0.0);
      sum += probs[i];
    }
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream os;
      os.precision(17);
      os << "input block " << label << ": probabilities sum to " << sum << ", not 1";
      throw ValidationError(os.str());
    }
    // Deviations at rounding level are left alone so that re-validating a
    // validated table is the identity.
    const double noise = 8.0 * static_cast<double>(hi - lo) * std::numeric_limits<double>::epsilon();
    if (std::abs(sum - 1.0) > noise)
      for (std::size_t i = lo; i < hi; ++i) probs[i] /= sum;
  }
  return Behavior(scenario, std::move(probs));
}

Behavior mix(std::span<const std::pair<double, Behavior>> components) {
  if (components.empty()) throw ValidationError("mix needs at least one component");
  const Scenario& scenario = components.front().second.scenario();
  double total = 0.0;
  std::vector<double> acc(scenario.dimension(), 0.0);
  for (const auto& [w, b] : components) {
    if (!(b.scenario() == scenario)) throw ValidationError("mix: components have different scenarios");
    if (w < 0.0 || !std::isfinite(w)) throw ValidationError("mix: weights must be nonnegative");
    total += w;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * b[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("mix: weights sum to " + std::to_string(total) + ", not 1");
  return validate_behavior(scenario, acc, 1e-9);
}

double marginal(const Behavior& behavior, int party, int input, int output,
                std::span<const int> remote_inputs) {
  const Scenario& s = behavior.scenario();
  if (party < 0 || party >= s.parties()) throw RangeError("party " + std::to_string(party) + " out of range");
  if (remote_inputs.size() + 1 != static_cast<std::size_t>(s.parties()))
    throw RangeError("marginal: wrong number of remote inputs");
  std::vector<int> in;
  in.reserve(s.parties());
  for (int p = 0, r = 0; p < s.parties(); ++p) in.push_back(p == party ? input : remote_inputs[r++]);
  const std::size_t block = s.joint_input_index(in);
  if (output < 0 || output >= s.outputs(party, input))
    throw RangeError("party " + std::to_string(party) + ": output out of range");
  double sum = 0.0;
  const std::size_t lo = s.block_offset(block);
  for (std::size_t k = 0; k < s.block_size(block); ++k)
    if (s.joint_outputs(in, k)[party] == output) sum += behavior[lo + k];
  return sum;
}

NoSignallingReport no_signalling_defect(const Behavior& behavior) {
  const Scenario& s = behavior.scenario();
  NoSignallingReport report;
  for (int party = 0; party < s.parties(); ++party) {
    std::vector<int> remote_sizes;
    for (int p = 0; p < s.parties(); ++p)
      if (p != party) remote_sizes.push_back(s.inputs(p));
    std::size_t remote_count = 1;
    for (int n : remote_sizes) remote_count *= n;
    auto decode_remote = [&](std::size_t r) {
      std::vector<int> v(remote_sizes.size());
      for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i) {
        v[i] = static_cast<int>(r % remote_sizes[i]);
        r /= remote_sizes[i];
      }
      return v;
    };
    for (int x = 0; x < s.inputs(party); ++x) {
      for (int a = 0; a < s.outputs(party, x); ++a) {
        std::vector<double> values(remote_count);
        for (std::size_t r = 0; r < remote_count; ++r)
          values[r] = marginal(behavior, party, x, a, decode_remote(r));
        for (std::size_t r1 = 0; r1 < remote_count; ++r1)
          for (std::size_t r2 = r1 + 1; r2 < remote_count; ++r2) {
            const double d = std::abs(values[r1] - values[r2]);
            if (d > report.max_defect) {
              report.max_defect = d;
              report.worst_party = party;
              report.worst_marginal = {party, x, a, decode_remote(r1), decode_remote(r2)};
            }
          }
      }
    }
  }
  return report;
}

Behavior named_behavior(const std::string& name, const Scenario& scenario) {
  const Scenario chsh = Scenario::uniform(2, 2, 2);
  if (name == "uniform") {
    std::vector<double> p(scenario.dimension());
    for (std::size_t b = 0; b < scenario.joint_input_count(); ++b)
      for (std::size_t k = 0; k < scenario.block_size(b); ++k)
        p[scenario.block_offset(b) + k] = 1.0 / static_cast<double>(scenario.block_size(b));
    return validate_behavior(scenario, p);
  }
  if (name != "pr_box" && name != "signalling_demo")
    throw ValidationError("unknown behavior '" + name + "' (known: uniform, pr_box, signalling_demo)");
  if (!(scenario == chsh)) throw ValidationError("'" + name + "' is defined on the (2,2,2) scenario only");
  std::vector<double> p(chsh.dimension(), 0.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int in[] = {x, y};
          const int out[] = {a, b};
          double v = 0.0;
          if (name == "pr_box")
            v = ((a ^ b) == (x & y)) ? 0.5 : 0.0;
          else
            v = (a == y && b == 0) ? 1.0 : 0.0;
          p[chsh.flat_index(in, out)] = v;
        }
  return validate_behavior(chsh, p);
}

Behavior bin_last_outcome(const Behavior& behavior, int into) {
  const Scenario& s = behavior.scenario();
  std::vector<std::vector<int>> outs = s.output_table();
  for (auto& row : outs)
    for (int& n : row) {
      if (n < 2) throw ValidationError("bin_last_outcome: every input needs at least two outputs");
      if (into < 0 || into >= n - 1) throw RangeError("bin_last_outcome: target output out of range");
      --n;
    }
  const Scenario binned(s.inputs_per_party(), outs);
  std::vector<double> p(binned.dimension(), 0.0);
  for (std::size_t i = 0; i < s.dimension(); ++i) {
    auto [in, out] = s.decode(i);
    for (int q = 0; q < s.parties(); ++q)
      if (out[q] == s.outputs(q, in[q]) - 1) out[q] = into;
    p[binned.flat_index(in, out)] += behavior[i];
  }
  return validate_behavior(binned, p);
}

} // namespace bellbox
