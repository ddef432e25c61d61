#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "bellbox/collins_gisin.hpp"
#include "bellbox/error.hpp"
#include "bellbox/local_polytope.hpp"
#include "bellbox/lp.hpp"
#include "oracles.hpp"

using namespace bellbox;

namespace {

const Scenario k222 = Scenario::uniform(2, 2, 2);
using Mask = std::uint32_t;

// Brute-force facet oracle: every affinely independent 8-subset of the 16
// vertices (in 8 reduced coordinates) spans a hyperplane; it is a facet when
// all vertices lie on one side. Facets are identified by their tight sets.
std::set<Mask> oracle_facet_masks() {
  const auto verts = oracle::vertices();
  std::array<std::array<double, 8>, 16> r;
  for (int k = 0; k < 16; ++k) r[k] = oracle::reduced(verts[k]);
  std::set<Mask> masks;
  for (Mask subset = 0; subset < (1u << 16); ++subset) {
    if (std::popcount(subset) != 8) continue;
    // Rows [r_k, -1]; the normal (a, a0) solves a.r_k - a0 = 0.
    std::vector<std::vector<double>> m;
    for (int k = 0; k < 16; ++k)
      if (subset >> k & 1) {
        std::vector<double> row(r[k].begin(), r[k].end());
        row.push_back(-1.0);
        m.push_back(row);
      }
    // Reduced row echelon form.
    std::vector<int> pivot_col;
    std::size_t row = 0;
    for (std::size_t c = 0; c < 9 && row < m.size(); ++c) {
      std::size_t p = row;
      for (std::size_t i = row + 1; i < m.size(); ++i)
        if (std::abs(m[i][c]) > std::abs(m[p][c])) p = i;
      if (std::abs(m[p][c]) < 1e-9) continue;
      std::swap(m[p], m[row]);
      const double d = m[row][c];
      for (double& v : m[row]) v /= d;
      for (std::size_t i = 0; i < m.size(); ++i)
        if (i != row) {
          const double f = m[i][c];
          for (std::size_t k = 0; k < 9; ++k) m[i][k] -= f * m[row][k];
        }
      pivot_col.push_back(static_cast<int>(c));
      ++row;
    }
    if (row != 8) continue;
    int free_col = 0;
    while (std::find(pivot_col.begin(), pivot_col.end(), free_col) != pivot_col.end()) ++free_col;
    std::array<double, 9> normal{};
    normal[static_cast<std::size_t>(free_col)] = 1.0;
    for (std::size_t i = 0; i < 8; ++i) normal[static_cast<std::size_t>(pivot_col[i])] = -m[i][static_cast<std::size_t>(free_col)];
    bool pos = false, neg = false;
    Mask tight = 0;
    for (int k = 0; k < 16; ++k) {
      double h = -normal[8];
      for (int i = 0; i < 8; ++i) h += normal[static_cast<std::size_t>(i)] * r[k][static_cast<std::size_t>(i)];
      if (std::abs(h) < 1e-9)
        tight |= 1u << k;
      else
        (h > 0 ? pos : neg) = true;
    }
    if (!(pos && neg)) masks.insert(tight);
  }
  return masks;
}

Mask tight_mask(const BellFunctional& f) {
  const auto verts = oracle::vertices();
  Mask m = 0;
  for (int k = 0; k < 16; ++k) {
    double v = 0.0;
    for (int i = 0; i < 16; ++i) v += f.coeffs()[static_cast<std::size_t>(i)] * verts[k][static_cast<std::size_t>(i)];
    EXPECT_LE(v, f.local_bound() + 1e-9);
    if (std::abs(v - f.local_bound()) < 1e-9) m |= 1u << k;
  }
  return m;
}

int vertex_index(const oracle::Table& t) {
  for (int k = 0; k < 16; ++k)
    if (oracle::vertex(k) == t) return k;
  return -1;
}

// Generators of the relabelling group acting on tables.
std::vector<oracle::Table (*)(const oracle::Table&)> generators() {
  using oracle::flat;
  using oracle::Table;
  return {
      [](const Table& t) {
        Table o{};
        for (int x = 0; x < 2; ++x) for (int y = 0; y < 2; ++y) for (int a = 0; a < 2; ++a) for (int b = 0; b < 2; ++b)
          o[flat(y, x, b, a)] = t[flat(x, y, a, b)];
        return o;
      },
      [](const Table& t) {
        Table o{};
        for (int x = 0; x < 2; ++x) for (int y = 0; y < 2; ++y) for (int a = 0; a < 2; ++a) for (int b = 0; b < 2; ++b)
          o[flat(1 - x, y, a, b)] = t[flat(x, y, a, b)];
        return o;
      },
      [](const Table& t) {
        Table o{};
        for (int x = 0; x < 2; ++x) for (int y = 0; y < 2; ++y) for (int a = 0; a < 2; ++a) for (int b = 0; b < 2; ++b)
          o[flat(x, y, x == 0 ? 1 - a : a, b)] = t[flat(x, y, a, b)];
        return o;
      },
  };
}

Mask image(Mask m, oracle::Table (*g)(const oracle::Table&)) {
  Mask out = 0;
  for (int k = 0; k < 16; ++k)
    if (m >> k & 1) out |= 1u << vertex_index(g(oracle::vertex(k)));
  return out;
}

std::vector<Behavior> pr_variants() {
  std::vector<Behavior> out;
  for (int v = 0; v < 8; ++v) {
    const int al = v & 1, be = v >> 1 & 1, ga = v >> 2 & 1;
    oracle::Table t{};
    for (int x = 0; x < 2; ++x) for (int y = 0; y < 2; ++y) for (int a = 0; a < 2; ++a) for (int b = 0; b < 2; ++b)
      t[oracle::flat(x, y, a, b)] = ((a ^ b) == ((x & y) ^ (al & x) ^ (be & y) ^ ga)) ? 0.5 : 0.0;
    out.push_back(validate_behavior(k222, t));
  }
  return out;
}

}  // namespace

TEST(Strategies, Counts) {
  EXPECT_EQ(strategy_count(k222), 16u);
  EXPECT_EQ(strategy_count(Scenario::uniform(2, 2, 3)), 81u);
  EXPECT_EQ(strategy_count(Scenario({1}, {{5}})), 5u);
  EXPECT_THROW(strategy_count(Scenario::uniform(2, 2, 3), 80), SizeError);
}

TEST(Strategies, Apply) {
  const DeterministicStrategy identity(k222, {{0, 1}, {0, 1}});
  const int in01[] = {0, 1};
  EXPECT_EQ(identity.apply(in01), (std::vector<int>{0, 1}));
  const DeterministicStrategy zero(k222, {{0, 0}, {0, 0}});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const int in[] = {x, y};
      EXPECT_EQ(zero.apply(in), (std::vector<int>{0, 0}));
    }
  EXPECT_THROW(DeterministicStrategy(k222, {{0, 2}, {0, 0}}), RangeError);
}

TEST(Strategies, NumberSixOnInputsOneZero) {
  // 6 = 0110 in digits (p0x0, p0x1, p1x0, p1x1).
  const auto s = strategy_at(k222, 6);
  EXPECT_EQ(s.assignment(), (std::vector<std::vector<int>>{{0, 1}, {1, 0}}));
  const int in[] = {1, 0};
  EXPECT_EQ(s.apply(in), (std::vector<int>{1, 1}));
  EXPECT_EQ(s.index(), 6u);
}

TEST(Strategies, BehaviorsMatchOracleOrder) {
  for (std::size_t k = 0; k < 16; ++k) {
    const Behavior b = strategy_behavior(strategy_at(k222, k));
    const auto ref = oracle::vertex(static_cast<int>(k));
    for (int i = 0; i < 16; ++i) EXPECT_EQ(b[static_cast<std::size_t>(i)], ref[static_cast<std::size_t>(i)]) << k;
  }
  const auto zero = strategy_behavior(DeterministicStrategy(k222, {{0, 0}, {0, 0}}));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) EXPECT_EQ(zero[oracle::flat(x, y, 0, 0)], 1.0);
}

TEST(Strategies, BlocksSumToOneAndIndexRoundTrips) {
  const Scenario s({2, 3}, {{2, 3}, {2, 2, 4}});
  const auto all = enumerate_strategies(s);
  ASSERT_EQ(all.size(), 2u * 3u * 2u * 2u * 4u);
  for (std::size_t k = 0; k < all.size(); ++k) {
    EXPECT_EQ(all[k].index(), k);
    const Behavior b = strategy_behavior(all[k]);
    for (std::size_t j = 0; j < s.joint_input_count(); ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < s.block_size(j); ++i) sum += b[s.block_offset(j) + i];
      EXPECT_EQ(sum, 1.0);
    }
  }
}

TEST(LocalModel, UniformWeightsGiveUniform) {
  std::vector<std::pair<std::size_t, double>> w;
  for (std::size_t k = 0; k < 16; ++k) w.push_back({k, 1.0 / 16});
  const Behavior b = LocalModel(k222, w).behavior();
  for (double p : b.probs()) EXPECT_NEAR(p, 0.25, 1e-15);
  EXPECT_THROW(LocalModel(k222, {{0, 0.5}}), ValidationError);
  EXPECT_THROW(LocalModel(k222, {{16, 1.0}}), RangeError);
}

TEST(LocalBound, Chsh) {
  const auto exact = local_bound_exact(k222, chsh_coefficients());
  EXPECT_EQ(exact.value, 2);
  const auto f = chsh_functional();
  EXPECT_EQ(f.local_bound(), 2.0);
  // Oracle: enumerate the 16 vertex tables directly.
  double best = -1e9;
  for (const auto& v : oracle::vertices()) best = std::max(best, oracle::chsh(v));
  EXPECT_EQ(best, 2.0);
  for (const auto& v : oracle::vertices())
    EXPECT_NEAR(f.value(validate_behavior(k222, v)), oracle::chsh(v), 1e-15);
}

TEST(LocalBound, ZeroAndVertexCoefficients) {
  const std::vector<double> zero(16, 0.0);
  EXPECT_EQ(local_bound(k222, zero).value, 0.0);
  for (int k = 0; k < 16; ++k) {
    const auto v = oracle::vertex(k);
    const auto lb = local_bound(k222, std::vector<double>(v.begin(), v.end()));
    EXPECT_EQ(lb.value, 4.0);
    EXPECT_EQ(lb.argmax, static_cast<std::size_t>(k));
    // Normalized per block, one vertex's behavior scores 1.
    std::vector<double> c(v.begin(), v.end());
    for (double& x : c) x /= 4.0;
    EXPECT_EQ(local_bound(k222, c).value, 1.0);
  }
}

TEST(BellFunctional, StoredBoundIsChecked) {
  const auto c = chsh_functional();
  std::vector<double> coeffs(c.coeffs().begin(), c.coeffs().end());
  EXPECT_NO_THROW(BellFunctional(k222, coeffs, 2.0, "ok"));
  EXPECT_THROW(BellFunctional(k222, coeffs, 2.5, "wrong"), ValidationError);
}

// Property: the vertex-enumeration bound equals the LP maximum over the
// local polytope for random functionals, on two scenarios.
TEST(LocalBoundProperty, AgreesWithLp) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (const Scenario& s : {k222, Scenario({2, 3}, {{2, 3}, {2, 2, 2}})}) {
    const std::size_t n = strategy_count(s);
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<double> c(s.dimension());
      for (double& v : c) v = g(rng);
      lp::LinearProgram prog(1, n);
      std::vector<double> obj(n);
      for (std::size_t j = 0; j < n; ++j) {
        prog.a(0, j) = 1.0;
        double v = 0.0;
        for (std::size_t i : strategy_support(strategy_at(s, j))) v += c[i];
        obj[j] = v;
      }
      prog.b(0) = 1.0;
      prog.set_objective(obj, lp::Sense::Maximize);
      const auto out = lp::solve(prog);
      ASSERT_EQ(out.status, lp::Status::Optimal);
      EXPECT_NEAR(local_bound(s, c).value, out.objective, 1e-9);
    }
  }
}

TEST(Facets, MatchBruteForceOracle) {
  const auto facets = enumerate_facets(k222);
  ASSERT_EQ(facets.size(), 24u);
  std::set<Mask> lib;
  for (const auto& f : facets) lib.insert(tight_mask(f));
  EXPECT_EQ(lib.size(), 24u);
  EXPECT_EQ(lib, oracle_facet_masks());
}

TEST(Facets, SixteenPositivityAndEightChsh) {
  const auto facets = enumerate_facets(k222);
  const auto verts = oracle::vertices();
  std::set<Mask> positivity, chsh;
  for (int i = 0; i < 16; ++i) {
    Mask m = 0;
    for (int k = 0; k < 16; ++k)
      if (verts[k][static_cast<std::size_t>(i)] == 0.0) m |= 1u << k;
    positivity.insert(m);
  }
  for (int mx = 0; mx < 2; ++mx)
    for (int my = 0; my < 2; ++my)
      for (int sign : {1, -1}) {
        Mask m = 0;
        for (int k = 0; k < 16; ++k)
          if (oracle::chsh_variant(verts[k], mx, my, sign) == 2.0) m |= 1u << k;
        chsh.insert(m);
      }
  int n_pos = 0, n_chsh = 0;
  for (const auto& f : facets) {
    const Mask m = tight_mask(f);
    n_pos += positivity.count(m) ? 1 : 0;
    n_chsh += chsh.count(m) ? 1 : 0;
    if (chsh.count(m)) {
      const auto form = correlator_form(k222, f.coeffs(), f.local_bound());
      EXPECT_NEAR(form.bound, 2.0, 1e-12);
      double best = 0.0;
      for (const auto& pr : pr_variants()) best = std::max(best, correlator_value(form, pr));
      EXPECT_NEAR(best, 4.0, 1e-12);
    }
  }
  EXPECT_EQ(n_pos, 16);
  EXPECT_EQ(n_chsh, 8);
}

TEST(Facets, CanonicalIntegerGauge) {
  for (const auto& f : enumerate_facets(k222)) {
    for (double c : f.coeffs()) EXPECT_EQ(c, std::round(c));
    EXPECT_EQ(f.local_bound(), std::round(f.local_bound()));
    EXPECT_EQ(f.note(), "facet");
  }
}

TEST(Facets, ClosedUnderRelabelling) {
  std::set<Mask> masks;
  for (const auto& f : enumerate_facets(k222)) masks.insert(tight_mask(f));
  for (auto g : generators())
    for (Mask m : masks) EXPECT_TRUE(masks.count(image(m, g))) << m;
}

TEST(Facets, LibraryRelabellingsMapFacetsToFacets) {
  const auto facets = enumerate_facets(k222);
  const auto group = all_relabellings(k222);
  EXPECT_EQ(group.size(), 128u);
  std::vector<CanonicalInequality> canon;
  for (const auto& f : facets) canon.push_back(canonicalize(k222, f.coeffs(), f.local_bound()));
  for (const auto& r : group)
    for (const auto& f : facets) {
      const auto moved = relabel(k222, r, f.coeffs());
      const auto c = canonicalize(k222, moved, f.local_bound());
      EXPECT_TRUE(std::any_of(canon.begin(), canon.end(), [&](const auto& x) { return x.matches(c); }));
    }
}

TEST(Facets, SegmentHasTwoPositivityFacets) {
  const Scenario seg({1}, {{2}});
  const auto facets = enumerate_facets(seg);
  ASSERT_EQ(facets.size(), 2u);
  for (const auto& f : facets) {
    // Each facet is tight at exactly one of the two vertices.
    int tight = 0;
    for (std::size_t k = 0; k < 2; ++k)
      if (std::abs(f.value(strategy_behavior(strategy_at(seg, k))) - f.local_bound()) < 1e-12) ++tight;
    EXPECT_EQ(tight, 1);
  }
}

TEST(Facets, CapsAreEnforced) {
  FacetOptions small;
  small.max_vertices = 10;
  EXPECT_THROW(enumerate_facets(k222, small), SizeError);
}
