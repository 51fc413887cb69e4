#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "torusforge/surface.hpp"

using namespace torusforge;

namespace {

// Every permutation of 1..n mapping the facet set onto itself.
std::vector<Permutation> brute_force_automorphisms(const Triangulation& t) {
  std::set<Facet> facets(t.facets().begin(), t.facets().end());
  Permutation p(t.n());
  std::iota(p.begin(), p.end(), 1);
  std::vector<Permutation> out;
  do {
    bool ok = true;
    for (const Facet& f : t.facets()) {
      Facet g{p[f[0] - 1], p[f[1] - 1], p[f[2] - 1]};
      std::sort(g.begin(), g.end());
      if (!facets.count(g)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

Permutation random_permutation(int n, std::mt19937_64& rng) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 1);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

const char* kMoebius =
    "7: 1 2 3, 1 2 4, 1 3 5, 1 4 6, 1 5 7, 1 6 7, 2 3 6, 2 4 7, 2 5 6, 2 5 7, 3 4 5, 3 4 7, 3 6 7, 4 5 6";

}  // namespace

TEST_CASE("text format round trip") {
  const auto ts = parse_triangulations(std::string(kMoebius) + "\n# comment\n\n");
  REQUIRE(ts.size() == 1);
  CHECK(serialize(ts[0]) == kMoebius);
  CHECK(ts[0] == moebius_torus());
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse_triangulations(std::string(kMoebius) + "\n7: 1 2 3, 1 2\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_triangulation_line("x: 1 2 3"), ParseError);
}

TEST_CASE("constructor rejects malformed facet lists") {
  CHECK_THROWS_AS(Triangulation(4, {{1, 2, 3}, {1, 2, 5}}), SurfaceError);  // label out of range
  CHECK_THROWS_AS(Triangulation(4, {{1, 2, 3}, {1, 2, 3}}), SurfaceError);  // repeated facet
  CHECK_THROWS_AS(Triangulation(4, {{1, 1, 3}}), SurfaceError);             // degenerate facet
  CHECK_THROWS_AS(Triangulation(5, {{1, 2, 3}, {1, 2, 4}}), SurfaceError);  // unused label
}

TEST_CASE("validation of closed surfaces") {
  const SurfaceReport torus = validate(moebius_torus());
  CHECK(torus.euler == 0);
  CHECK(torus.orientable);
  CHECK(torus.connected);
  CHECK(torus.genus == 1);
  CHECK(torus.edge_count == 21);
  CHECK(torus.facet_count == 14);

  const SurfaceReport sphere = validate(tetrahedron_boundary());
  CHECK(sphere.euler == 2);
  CHECK(sphere.genus == 0);

  // Six-vertex real projective plane: closed but not orientable.
  const Triangulation rp2(6, {{1, 2, 3}, {1, 3, 4}, {1, 4, 5}, {1, 5, 6}, {1, 2, 6}, {2, 3, 5},
                              {3, 4, 6}, {2, 4, 5}, {3, 5, 6}, {2, 4, 6}});
  const SurfaceReport proj = validate(rp2);
  CHECK(proj.euler == 1);
  CHECK_FALSE(proj.orientable);
  CHECK_FALSE(proj.genus.has_value());

  // An edge in three facets.
  CHECK_THROWS_AS(validate(Triangulation(5, {{1, 2, 3}, {1, 2, 4}, {1, 2, 5}, {1, 3, 4}, {1, 3, 5}, {2, 3, 4}})),
                  SurfaceError);
  // Open disk: boundary edges lie in one facet.
  CHECK_THROWS_AS(validate(Triangulation(3, {{1, 2, 3}})), SurfaceError);
  // Two tetrahedra glued at a vertex: the link of that vertex is two cycles.
  CHECK_THROWS_AS(validate(Triangulation(7, {{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}, {1, 5, 6},
                                             {1, 5, 7}, {1, 6, 7}, {5, 6, 7}})),
                  SurfaceError);
  CHECK_FALSE(is_torus(tetrahedron_boundary()));
  CHECK(is_torus(moebius_torus()));
}

TEST_CASE("Heawood bound") {
  CHECK(heawood_lower_bound(2) == 4);
  CHECK(heawood_lower_bound(0) == 7);
  CHECK(heawood_lower_bound(1) == 6);
  CHECK(heawood_lower_bound(-2) == 9);
  CHECK(heawood_lower_bound(-4) == 10);
  CHECK(heawood_lower_bound(-10) == 12);
}

TEST_CASE("neighborliness") {
  CHECK(is_neighborly(moebius_torus()));
  CHECK(is_neighborly(tetrahedron_boundary()));
}

TEST_CASE("automorphism groups match brute force") {
  for (const Triangulation& t : {moebius_torus(), tetrahedron_boundary()}) {
    auto fast = automorphisms(t);
    auto slow = brute_force_automorphisms(t);
    CHECK(fast.front() == identity_permutation(t.n()));
    std::sort(fast.begin(), fast.end());
    CHECK(fast == slow);
  }
  CHECK(automorphisms(moebius_torus()).size() == 42);
  CHECK(automorphisms(tetrahedron_boundary()).size() == 24);
}

TEST_CASE("canonical form is a relabeling invariant") {
  std::mt19937_64 rng(5);
  const Triangulation m = moebius_torus();
  const Triangulation canon = canonical_form(m);
  CHECK(canon == m);
  for (int i = 0; i < 50; ++i) {
    const Triangulation r = m.relabeled(random_permutation(7, rng));
    CHECK(canonical_form(r) == canon);
    const auto [form, perm] = canonical_labeling(r);
    CHECK(r.relabeled(perm) == form);
  }
}

TEST_CASE("canonical form is lexicographically minimal") {
  // Compare with the minimum over all relabelings.
  const Triangulation t = tetrahedron_boundary().relabeled(Permutation{3, 1, 4, 2});
  Permutation p = identity_permutation(4);
  Triangulation best = t;
  do {
    best = std::min(best, t.relabeled(p));
  } while (std::next_permutation(p.begin(), p.end()));
  CHECK(canonical_form(t) == best);

  std::mt19937_64 rng(17);
  const Triangulation m = moebius_torus().relabeled(random_permutation(7, rng));
  Permutation q = identity_permutation(7);
  Triangulation mbest = m;
  do {
    mbest = std::min(mbest, m.relabeled(q));
  } while (std::next_permutation(q.begin(), q.end()));
  CHECK(canonical_form(m) == mbest);
}

TEST_CASE("permutation helpers") {
  const Permutation a{2, 3, 1}, b{3, 1, 2};
  CHECK(compose(a, inverse(a)) == identity_permutation(3));
  CHECK(compose(a, b) == Permutation{1, 2, 3});
}
