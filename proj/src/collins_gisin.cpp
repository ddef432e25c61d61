#include "bellbox/collins_gisin.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "bellbox/error.hpp"

namespace bellbox {
namespace {

/// Per-party digit choices: index 0 is "absent", then (input, output<last).
std::vector<std::vector<std::pair<int, int>>> party_digits(const Scenario& s) {
  std::vector<std::vector<std::pair<int, int>>> digits(s.parties());
  for (int p = 0; p < s.parties(); ++p) {
    digits[p].push_back({-1, -1});
    for (int x = 0; x < s.inputs(p); ++x)
      for (int a = 0; a + 1 < s.outputs(p, x); ++a) digits[p].push_back({x, a});
  }
  return digits;
}

} // namespace

CollinsGisin::CollinsGisin(Scenario scenario) : scenario_(std::move(scenario)) {
  const Scenario& s = scenario_;
  const int n = s.parties();
  const auto digits = party_digits(s);

  // Coordinates in mixed-radix order, skipping the all-absent string.
  std::vector<std::size_t> radix(n);
  std::size_t total = 1;
  for (int p = 0; p < n; ++p) {
    radix[p] = digits[p].size();
    total *= radix[p];
  }
  std::vector<std::size_t> coord_of_code(total, 0);
  for (std::size_t code = 1; code < total; ++code) {
    Coordinate c{std::vector<int>(n), std::vector<int>(n)};
    std::size_t rest = code;
    for (int p = n - 1; p >= 0; --p) {
      const auto& d = digits[p][rest % radix[p]];
      rest /= radix[p];
      c.inputs[p] = d.first;
      c.outputs[p] = d.second;
    }
    coord_of_code[code] = coords_.size();
    coords_.push_back(std::move(c));
  }
  const std::size_t dim = coords_.size();
  const std::size_t full = s.dimension();

  // project: each coordinate sums the entries of block (inputs, absent -> 0)
  // whose present parties show the listed outputs.
  project_support_.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const auto& c = coords_[k];
    std::vector<int> in(n);
    for (int p = 0; p < n; ++p) in[p] = c.inputs[p] < 0 ? 0 : c.inputs[p];
    const std::size_t block = s.joint_input_index(in);
    const std::size_t lo = s.block_offset(block);
    for (std::size_t o = 0; o < s.block_size(block); ++o) {
      const auto out = s.joint_outputs(in, o);
      bool match = true;
      for (int p = 0; p < n && match; ++p)
        if (c.inputs[p] >= 0 && out[p] != c.outputs[p]) match = false;
      if (match) project_support_[k].push_back(lo + o);
    }
  }

  // lift: P(a|x) = prod_p f_p with f_p = [a_p] for a_p < last, else
  // 1 - sum_{a' < last} [a'], expanded into signed marginal terms.
  lift_matrix_.assign(full * dim, 0.0);
  lift_offset_.assign(full, 0.0);
  for (std::size_t i = 0; i < full; ++i) {
    const auto [in, out] = s.decode(i);
    // terms[p]: list of (sign, digit index) alternatives for party p
    std::vector<std::vector<std::pair<int, std::size_t>>> terms(n);
    for (int p = 0; p < n; ++p) {
      const int last = s.outputs(p, in[p]) - 1;
      auto digit_index = [&](int a) {
        const auto& d = digits[p];
        return static_cast<std::size_t>(
            std::find(d.begin(), d.end(), std::pair<int, int>{in[p], a}) - d.begin());
      };
      if (out[p] < last) {
        terms[p].push_back({1, digit_index(out[p])});
      } else {
        terms[p].push_back({1, 0});
        for (int a = 0; a < last; ++a) terms[p].push_back({-1, digit_index(a)});
      }
    }
    std::vector<std::size_t> pick(n, 0);
    for (;;) {
      int sign = 1;
      std::size_t code = 0;
      for (int p = 0; p < n; ++p) {
        sign *= terms[p][pick[p]].first;
        code = code * radix[p] + terms[p][pick[p]].second;
      }
      if (code == 0)
        lift_offset_[i] += sign;
      else
        lift_matrix_[i * dim + coord_of_code[code]] += sign;
      int p = n - 1;
      for (; p >= 0; --p) {
        if (++pick[p] < terms[p].size()) break;
        pick[p] = 0;
      }
      if (p < 0) break;
    }
  }
}

std::vector<double> CollinsGisin::project(std::span<const double> probs) const {
  if (probs.size() != scenario_.dimension()) throw ValidationError("project: wrong behavior length");
  std::vector<double> r(coords_.size(), 0.0);
  for (std::size_t k = 0; k < r.size(); ++k)
    for (std::size_t i : project_support_[k]) r[k] += probs[i];
  return r;
}

std::vector<double> CollinsGisin::lift(std::span<const double> reduced) const {
  if (reduced.size() != coords_.size()) throw ValidationError("lift: wrong coordinate count");
  const std::size_t dim = coords_.size();
  std::vector<double> p(lift_offset_);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t k = 0; k < dim; ++k) p[i] += lift_matrix_[i * dim + k] * reduced[k];
  return p;
}

std::pair<std::vector<double>, double> CollinsGisin::pull_back(std::span<const double> coeffs) const {
  if (coeffs.size() != scenario_.dimension()) throw ValidationError("pull_back: wrong coefficient count");
  const std::size_t dim = coords_.size();
  std::vector<double> g(dim, 0.0);
  double constant = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    constant += coeffs[i] * lift_offset_[i];
    for (std::size_t k = 0; k < dim; ++k) g[k] += coeffs[i] * lift_matrix_[i * dim + k];
  }
  return {std::move(g), constant};
}

std::vector<double> CollinsGisin::push_forward(std::span<const double> reduced_coeffs) const {
  if (reduced_coeffs.size() != coords_.size()) throw ValidationError("push_forward: wrong coefficient count");
  std::vector<double> c(scenario_.dimension(), 0.0);
  for (std::size_t k = 0; k < coords_.size(); ++k)
    for (std::size_t i : project_support_[k]) c[i] += reduced_coeffs[k];
  return c;
}

bool CanonicalInequality::matches(const CanonicalInequality& other, double tol) const {
  if (coeffs.size() != other.coeffs.size()) return false;
  if (std::abs(bound - other.bound) > tol) return false;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (std::abs(coeffs[i] - other.coeffs[i]) > tol) return false;
  return true;
}

CanonicalInequality canonicalize(const Scenario& scenario, std::span<const double> coeffs, double bound) {
  const CollinsGisin cg(scenario);
  auto [g, constant] = cg.pull_back(coeffs);
  double beta = bound - constant;
  double scale = 0.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  if (scale < 1e-12) throw ValidationError("functional is constant on no-signalling behaviors");
  for (double& v : g) v /= scale;
  beta /= scale;

  CanonicalInequality out;
  for (int q = 1; q <= 64; ++q) {
    auto near_int = [q](double v) { return std::abs(v * q - std::round(v * q)) <= 1e-9 * q; };
    if (!std::all_of(g.begin(), g.end(), near_int) || !near_int(beta)) continue;
    long long common = 0;
    std::vector<long long> ints(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      ints[i] = std::llround(g[i] * q);
      common = std::gcd(common, ints[i]);
    }
    const long long ib = std::llround(beta * q);
    common = std::gcd(common, ib);
    if (common == 0) common = 1;
    out.coeffs.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out.coeffs[i] = static_cast<double>(ints[i] / common);
    out.bound = static_cast<double>(ib / common);
    out.integral = true;
    return out;
  }
  out.coeffs = std::move(g);
  out.bound = beta;
  return out;
}

BellFunctional canonical_functional(const BellFunctional& functional, const std::string& note) {
  const Scenario& s = functional.scenario();
  const auto canon = canonicalize(s, functional.coeffs(), functional.local_bound());
  const CollinsGisin cg(s);
  return BellFunctional(s, cg.push_forward(canon.coeffs), note);
}

CorrelatorForm correlator_form(const Scenario& scenario, std::span<const double> coeffs, double bound) {
  for (const auto& row : scenario.output_table())
    for (int n : row)
      if (n != 2) throw ValidationError("correlator form needs two outputs for every input");
  const auto canon = canonicalize(scenario, coeffs, bound);
  const CollinsGisin cg(scenario);
  const auto& coords = cg.coordinates();

  // P_S(0...0 | x_S) = 2^-|S| sum_{T subset S} E_T(x_T); with binary outputs
  // the CG coordinates are exactly these zero-outcome marginals.
  auto key = [](const CollinsGisin::Coordinate& c) { return c.inputs; };
  std::vector<double> h(coords.size(), 0.0);
  double offset = 0.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const auto& present = coords[k].inputs;
    std::vector<int> members;
    for (std::size_t p = 0; p < present.size(); ++p)
      if (present[p] >= 0) members.push_back(static_cast<int>(p));
    const double w = canon.coeffs[k] / std::pow(2.0, static_cast<double>(members.size()));
    const std::size_t subsets = std::size_t{1} << members.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask == 0) {
        offset += w;
        continue;
      }
      std::vector<int> sub(present.size(), -1);
      for (std::size_t b = 0; b < members.size(); ++b)
        if (mask & (std::size_t{1} << b)) sub[members[b]] = present[members[b]];
      const auto it = std::find_if(coords.begin(), coords.end(),
                                   [&](const CollinsGisin::Coordinate& c) { return key(c) == sub; });
      h[static_cast<std::size_t>(it - coords.begin())] += w;
    }
  }
  double scale = 0.0;
  for (double v : h) scale = std::max(scale, std::abs(v));
  if (scale < 1e-12) throw ValidationError("functional has no correlator content");
  CorrelatorForm form;
  form.scale = 1.0 / scale;
  form.coeffs.resize(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) form.coeffs[k] = h[k] / scale;
  form.bound = (canon.bound - offset) / scale;
  return form;
}

double correlator_value(const CorrelatorForm& form, const Behavior& behavior) {
  const CollinsGisin cg(behavior.scenario());
  if (form.coeffs.size() != cg.dimension()) throw ValidationError("correlator form does not fit the behavior");
  const auto r = cg.project(behavior.probs());
  const auto& coords = cg.coordinates();
  // E_T = sum_{U subset T} 2^|U| (-1)^{|T|-|U|} P_U(0|x_U), P_empty = 1.
  double value = 0.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (form.coeffs[k] == 0.0) continue;
    const auto& present = coords[k].inputs;
    std::vector<int> members;
    for (std::size_t p = 0; p < present.size(); ++p)
      if (present[p] >= 0) members.push_back(static_cast<int>(p));
    const std::size_t subsets = std::size_t{1} << members.size();
    double e = 0.0;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      const int size = std::popcount(mask);
      const double sign = ((static_cast<int>(members.size()) - size) % 2) ? -1.0 : 1.0;
      double marginal = 1.0;
      if (mask != 0) {
        std::vector<int> sub(present.size(), -1);
        for (std::size_t b = 0; b < members.size(); ++b)
          if (mask & (std::size_t{1} << b)) sub[members[b]] = present[members[b]];
        const auto it = std::find_if(coords.begin(), coords.end(),
                                     [&](const CollinsGisin::Coordinate& c) { return c.inputs == sub; });
        marginal = r[static_cast<std::size_t>(it - coords.begin())];
      }
      e += sign * std::pow(2.0, size) * marginal;
    }
    value += form.coeffs[k] * e;
  }
  return value;
}

} // namespace bellbox
