#include <gtest/gtest.h>

#include <random>

#include "bellbox/collins_gisin.hpp"
#include "bellbox/error.hpp"
#include "bellbox/local_polytope.hpp"
#include "oracles.hpp"

using namespace bellbox;

namespace {

const Scenario k222 = Scenario::uniform(2, 2, 2);

// Random point of the local polytope (hence no-signalling).
Behavior random_local(const Scenario& s, std::mt19937_64& rng) {
  const std::size_t n = strategy_count(s);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<std::size_t, double>> w;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (u(rng) < 0.5) {
      w.push_back({k, u(rng) + 1e-3});
      total += w.back().second;
    }
  if (w.empty()) w.push_back({0, total = 1.0});
  for (auto& [k, x] : w) x /= total;
  return LocalModel(s, w).behavior();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<Scenario> scenarios() {
  return {k222, Scenario::uniform(2, 2, 3), Scenario({2, 3}, {{2, 3}, {2, 2, 3}}), Scenario::uniform(3, 2, 2),
          Scenario({1}, {{2}})};
}

}  // namespace

TEST(CollinsGisin, Dimensions) {
  EXPECT_EQ(CollinsGisin(k222).dimension(), 8u);
  EXPECT_EQ(CollinsGisin(Scenario::uniform(2, 2, 3)).dimension(), 24u);
  EXPECT_EQ(CollinsGisin(Scenario::uniform(3, 2, 2)).dimension(), 26u);
  EXPECT_EQ(CollinsGisin(Scenario({1}, {{2}})).dimension(), 1u);
}

TEST(CollinsGisin, ProjectMatchesOracleCoordinates) {
  std::mt19937_64 rng(3);
  const CollinsGisin cg(k222);
  for (int t = 0; t < 20; ++t) {
    const Behavior b = random_local(k222, rng);
    oracle::Table tab;
    std::copy(b.probs().begin(), b.probs().end(), tab.begin());
    const auto ref = oracle::reduced(tab);
    auto r = cg.project(b.probs());
    std::sort(r.begin(), r.end());
    std::vector<double> sorted_ref(ref.begin(), ref.end());
    std::sort(sorted_ref.begin(), sorted_ref.end());
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(r[i], sorted_ref[i], 1e-15);
  }
}

// Property: lift inverts project on no-signalling behaviors, and pull_back /
// push_forward preserve functional values.
TEST(CollinsGisinProperty, RoundTripsAndAdjoints) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (const auto& s : scenarios()) {
    const CollinsGisin cg(s);
    for (int t = 0; t < 10; ++t) {
      const Behavior b = random_local(s, rng);
      const auto r = cg.project(b.probs());
      const auto p = cg.lift(r);
      for (std::size_t i = 0; i < s.dimension(); ++i) EXPECT_NEAR(p[i], b[i], 1e-12);
      std::vector<double> c(s.dimension());
      for (double& v : c) v = g(rng);
      const auto [gr, c0] = cg.pull_back(c);
      EXPECT_NEAR(dot(c, b.probs()), dot(gr, r) + c0, 1e-12);
      std::vector<double> h(cg.dimension());
      for (double& v : h) v = g(rng);
      EXPECT_NEAR(dot(cg.push_forward(h), b.probs()), dot(h, r), 1e-12);
    }
  }
}

// Property: the canonical form ignores positive scaling and terms that are
// constant on the no-signalling hull (block normalizations).
TEST(CanonicalizeProperty, GaugeInvariance) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto chsh = chsh_functional();
  const std::vector<double> base(chsh.coeffs().begin(), chsh.coeffs().end());
  const auto ref = canonicalize(k222, base, 2.0);
  EXPECT_TRUE(ref.integral);
  for (int t = 0; t < 50; ++t) {
    auto c = base;
    double bound = 2.0;
    const double scale = 0.1 + std::abs(u(rng));
    for (double& v : c) v *= scale;
    bound *= scale;
    for (std::size_t blk = 0; blk < 4; ++blk) {
      const double shift = u(rng);
      for (std::size_t i = 0; i < 4; ++i) c[4 * blk + i] += shift;
      bound += shift;
    }
    EXPECT_TRUE(canonicalize(k222, c, bound).matches(ref));
  }
}

TEST(Canonicalize, ConstantFunctionalRejected) {
  std::vector<double> c(16, 0.0);
  for (std::size_t i = 0; i < 4; ++i) c[i] = 1.0;
  EXPECT_THROW(canonicalize(k222, c, 1.0), ValidationError);
}

TEST(Canonicalize, CanonicalFunctionalKeepsValues) {
  std::mt19937_64 rng(29);
  const auto chsh = chsh_functional();
  const auto canon = canonical_functional(chsh, "chsh");
  // Same inequality up to a positive factor on every no-signalling behavior.
  const Behavior pr = named_behavior("pr_box");
  const double k = canon.violation(pr) / chsh.violation(pr);
  EXPECT_GT(k, 0.0);
  for (int t = 0; t < 20; ++t) {
    const Behavior b = random_local(k222, rng);
    EXPECT_NEAR(canon.violation(b), k * chsh.violation(b), 1e-12);
  }
}

TEST(CorrelatorForm, ChshReadsTwoAndPrBoxFour) {
  const auto f = chsh_functional();
  const auto form = correlator_form(k222, f.coeffs(), f.local_bound());
  EXPECT_NEAR(form.bound, 2.0, 1e-12);
  int unit = 0;
  for (double c : form.coeffs) {
    EXPECT_TRUE(c == 0.0 || std::abs(std::abs(c) - 1.0) < 1e-12);
    unit += c != 0.0;
  }
  EXPECT_EQ(unit, 4);
  EXPECT_NEAR(correlator_value(form, named_behavior("pr_box")), 4.0, 1e-12);
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const Behavior b = random_local(k222, rng);
    oracle::Table tab;
    std::copy(b.probs().begin(), b.probs().end(), tab.begin());
    EXPECT_NEAR(correlator_value(form, b), oracle::chsh(tab), 1e-12);
  }
}

TEST(CorrelatorForm, NeedsBinaryOutputs) {
  const Scenario s = Scenario::uniform(2, 2, 3);
  EXPECT_THROW(correlator_form(s, std::vector<double>(s.dimension(), 1.0), 0.0), ValidationError);
}
