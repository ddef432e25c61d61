// Facet enumeration by the double description method.
//
// Vertices v of the local polytope (in Collins-Gisin coordinates, all 0/1)
// give homogeneous constraints h0 + <a, v> >= 0 on (h0, a). The extreme rays
// of that cone are exactly the facets a.x >= -h0. Rays are integer vectors
// kept primitive by gcd; adjacency uses the combinatorial test on sets of
// tight constraints.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include <gmpxx.h>

#include "bellbox/collins_gisin.hpp"
#include "bellbox/error.hpp"
#include "bellbox/local_polytope.hpp"
#include "dense_solve.hpp"

namespace bellbox {
namespace {

using Vec = std::vector<mpz_class>;

class Bitset {
public:
  explicit Bitset(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  Bitset operator&(const Bitset& o) const {
    Bitset r = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= o.words_[i];
    return r;
  }
  bool subset_of(const Bitset& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

private:
  std::vector<std::uint64_t> words_;
};

struct Ray {
  Vec h;
  Bitset tight;
};

mpz_class dot(const Vec& a, const Vec& b) {
  mpz_class s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void make_primitive(Vec& v) {
  mpz_class g = 0;
  for (const auto& x : v) g = gcd(g, x);
  if (g > 1)
    for (auto& x : v) x /= g;
}

/// Greedy choice of rows that are linearly independent (exact arithmetic).
std::vector<std::size_t> independent_rows(const std::vector<Vec>& rows, std::size_t want) {
  const std::size_t d = rows.front().size();
  std::vector<std::vector<mpq_class>> basis; // echelon rows
  std::vector<std::size_t> pivots;
  std::vector<std::size_t> chosen;
  for (std::size_t r = 0; r < rows.size() && chosen.size() < want; ++r) {
    std::vector<mpq_class> v(d);
    for (std::size_t j = 0; j < d; ++j) v[j] = rows[r][j];
    for (std::size_t b = 0; b < basis.size(); ++b) {
      if (v[pivots[b]] == 0) continue;
      const mpq_class f = v[pivots[b]] / basis[b][pivots[b]];
      for (std::size_t j = 0; j < d; ++j) v[j] -= f * basis[b][j];
    }
    const auto it = std::find_if(v.begin(), v.end(), [](const mpq_class& x) { return x != 0; });
    if (it == v.end()) continue;
    pivots.push_back(static_cast<std::size_t>(it - v.begin()));
    basis.push_back(std::move(v));
    chosen.push_back(r);
  }
  return chosen;
}

} // namespace

std::vector<BellFunctional> enumerate_facets(const Scenario& scenario, const FacetOptions& options) {
  const std::size_t count = strategy_count(scenario, options.max_vertices);
  const CollinsGisin cg(scenario);
  const std::size_t d = cg.dimension();
  if (d > options.max_dimension)
    throw SizeError("reduced dimension " + std::to_string(d) + " exceeds the facet cap " +
                    std::to_string(options.max_dimension) + "; use certificate mode (derive-inequality) instead");
  if (d == 0) return {};

  // Homogenized vertices (1, v) in enumeration order.
  std::vector<Vec> w(count, Vec(d + 1));
  for (std::size_t s = 0; s < count; ++s) {
    const auto reduced = cg.project(strategy_behavior(strategy_at(scenario, s)).probs());
    w[s][0] = 1;
    for (std::size_t k = 0; k < d; ++k) w[s][k + 1] = static_cast<long>(std::lround(reduced[k]));
  }

  const std::size_t dim = d + 1;
  const auto initial = independent_rows(w, dim);
  if (initial.size() != dim) throw ValidationError("local polytope is not full-dimensional in reduced coordinates");

  // Initial rays: columns of W0^-1, scaled to primitive integers.
  std::vector<Ray> rays;
  {
    std::vector<mpq_class> w0(dim * dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) w0[i * dim + j] = w[initial[i]][j];
    for (std::size_t k = 0; k < dim; ++k) {
      std::vector<mpq_class> e(dim, 0);
      e[k] = 1;
      const auto col = detail::solve_square(w0, e, mpq_class(0));
      mpz_class lcm_den = 1;
      for (const auto& x : *col) lcm_den = lcm(lcm_den, x.get_den());
      Ray r{Vec(dim), Bitset(count)};
      for (std::size_t j = 0; j < dim; ++j) {
        const mpq_class scaled = (*col)[j] * lcm_den;
        r.h[j] = scaled.get_num();
      }
      make_primitive(r.h);
      for (std::size_t i = 0; i < dim; ++i)
        if (i != k) r.tight.set(initial[i]);
      rays.push_back(std::move(r));
    }
  }

  std::vector<bool> processed(count, false);
  for (std::size_t i : initial) processed[i] = true;

  for (std::size_t s = 0; s < count; ++s) {
    if (processed[s]) continue;
    processed[s] = true;
    std::vector<std::size_t> pos, neg;
    std::vector<Ray> next;
    for (std::size_t r = 0; r < rays.size(); ++r) {
      const int sign = sgn(dot(w[s], rays[r].h));
      if (sign > 0) pos.push_back(r);
      if (sign < 0) neg.push_back(r);
      if (sign == 0) rays[r].tight.set(s);
      if (sign >= 0) next.push_back(rays[r]);
    }
    for (std::size_t p : pos)
      for (std::size_t n : neg) {
        const Bitset common = rays[p].tight & rays[n].tight;
        if (common.count() + 2 < dim) continue;
        bool adjacent = true;
        for (std::size_t r = 0; r < rays.size() && adjacent; ++r)
          if (r != p && r != n && common.subset_of(rays[r].tight)) adjacent = false;
        if (!adjacent) continue;
        const mpz_class wp = dot(w[s], rays[p].h);
        const mpz_class wn = dot(w[s], rays[n].h);
        Ray fresh{Vec(dim), common};
        for (std::size_t j = 0; j < dim; ++j) fresh.h[j] = wp * rays[n].h[j] - wn * rays[p].h[j];
        make_primitive(fresh.h);
        fresh.tight.set(s);
        next.push_back(std::move(fresh));
      }
    rays = std::move(next);
  }

  // Ray (h0, a) is the facet -a.x <= h0; canonicalize in full coordinates.
  std::map<std::pair<std::vector<double>, double>, std::vector<double>> unique;
  for (const auto& r : rays) {
    std::vector<double> g(d);
    for (std::size_t k = 0; k < d; ++k) g[k] = -r.h[k + 1].get_d();
    const auto full = cg.push_forward(g);
    const auto canon = canonicalize(scenario, full, r.h[0].get_d());
    unique.emplace(std::make_pair(canon.coeffs, canon.bound), cg.push_forward(canon.coeffs));
  }
  std::vector<BellFunctional> facets;
  facets.reserve(unique.size());
  for (const auto& [key, coeffs] : unique) {
    BellFunctional f(scenario, coeffs, key.second, "facet");
    facets.push_back(std::move(f));
  }
  return facets;
}

} // namespace bellbox
