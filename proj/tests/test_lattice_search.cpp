#include "doctest.h"

#include <algorithm>
#include <functional>
#include <set>

#include "oracle/rational_oracle.hpp"
#include "torusforge/enumerate.hpp"
#include "torusforge/lattice_search.hpp"

using namespace torusforge;

namespace {

using Key = std::vector<Point3>;

// Signed axis permutations preserving the box, built without the library.
std::vector<std::function<Point3(const Point3&)>> box_isometries(const Cuboid& c) {
  const std::array<std::int64_t, 3> side{c.a, c.b, c.c};
  std::vector<std::function<Point3(const Point3&)>> out;
  std::array<int, 3> perm{0, 1, 2};
  do {
    if (side[perm[0]] != side[0] || side[perm[1]] != side[1] || side[perm[2]] != side[2]) continue;
    for (int mask = 0; mask < 8; ++mask)
      out.push_back([=](const Point3& p) {
        const std::array<std::int64_t, 3> q{p.x, p.y, p.z};
        std::array<std::int64_t, 3> r{};
        for (int i = 0; i < 3; ++i) r[i] = (mask >> i & 1) ? side[i] - q[perm[i]] : q[perm[i]];
        return Point3{r[0], r[1], r[2]};
      });
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::set<Key> orbit_of(const std::vector<Point3>& sol, const std::vector<Permutation>& aut, const Cuboid& c) {
  std::set<Key> out;
  for (const auto& g : box_isometries(c))
    for (const Permutation& s : aut) {
      Key k(sol.size());
      for (std::size_t v = 0; v < sol.size(); ++v) k[v] = g(sol[s[v] - 1]);
      out.insert(std::move(k));
    }
  return out;
}

Key orbit_key(const std::vector<Point3>& sol, const std::vector<Permutation>& aut, const Cuboid& c) {
  return *orbit_of(sol, aut, c).begin();
}

// Every injective placement, classified independently, reduced to orbits.
std::set<Key> naive_orbits(const Triangulation& t, const Cuboid& c, SearchMode mode) {
  const auto pts = c.points();
  const auto aut = automorphisms(t);
  std::set<Key> orbits;
  std::vector<Point3> cur;
  std::vector<bool> used(pts.size());
  // Facets grouped by their largest label; checked as soon as it is placed.
  std::vector<std::vector<Facet>> closing(t.n() + 1);
  for (const Facet& f : t.facets()) closing[std::max({f[0], f[1], f[2]})].push_back(f);
  std::vector<oracle::Tri> done;
  std::set<Key> seen;  // every member of every orbit classified so far
  std::function<void()> rec = [&] {
    if (static_cast<int>(cur.size()) == t.n()) {
      const std::set<Key> orbit = orbit_of(cur, aut, c);
      seen.insert(orbit.begin(), orbit.end());
      if (!oracle::linear_realization(t.facets(), cur)) return;
      if (mode == SearchMode::GeneralPosition && !in_general_position(cur)) return;
      orbits.insert(*orbit.begin());
      return;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      cur.push_back(pts[i]);
      if (static_cast<int>(cur.size()) == t.n() && seen.count(cur)) {
        cur.pop_back();
        used[i] = false;
        continue;
      }
      const std::size_t mark = done.size();
      bool ok = true;
      for (const Facet& f : closing[cur.size()]) {
        oracle::Tri tri;
        for (int k = 0; k < 3; ++k) {
          const Point3& q = cur[f[k] - 1];
          tri[k] = oracle::from_int(q.x, q.y, q.z);
        }
        ok = !oracle::degenerate(tri);
        for (std::size_t j = 0; ok && j < mark; ++j) ok = oracle::triangles_compatible(tri, done[j]);
        if (!ok) break;
        done.push_back(tri);
      }
      if (ok) rec();
      done.resize(mark);
      cur.pop_back();
      used[i] = false;
    }
  };
  rec();
  return orbits;
}

std::set<Key> search_orbits(const Certificate& cert) {
  const auto aut = automorphisms(cert.task.tri);
  std::set<Key> out;
  for (const Realization& r : cert.witnesses) out.insert(orbit_key(r.coords, aut, cert.task.cuboid));
  CHECK(out.size() == cert.witnesses.size());  // witnesses lie in distinct orbits
  return out;
}

SearchTask all_task(const Triangulation& t, Cuboid c, SearchMode m) {
  SearchTask task{t, c, m, SearchGoal::AllUpToSymmetry};
  return task;
}

}  // namespace

TEST_CASE("cuboid basics") {
  const Cuboid c = Cuboid::parse("2x3x1");
  CHECK(c == Cuboid{2, 3, 1});
  CHECK(c.canonical() == Cuboid{1, 2, 3});
  CHECK(c.canonical().to_string() == "1x2x3");
  CHECK(c.point_count() == 24);
  CHECK_THROWS_AS(Cuboid::parse("2x3"), std::invalid_argument);
  const auto pts = Cuboid{1, 2, 3}.points();
  CHECK(pts.size() == 24);
  CHECK(pts[1] == Point3{0, 0, 1});
  CHECK(pts[4] == Point3{0, 1, 0});
  CHECK(bounding_cuboid({{5, 2, 9}, {6, 5, 9}, {5, 3, 11}}) == Cuboid{1, 2, 3});
}

TEST_CASE("cuboid symmetry groups") {
  CHECK(cuboid_symmetries({1, 1, 1}).size() == 48);
  CHECK(cuboid_symmetries({1, 1, 2}).size() == 16);
  CHECK(cuboid_symmetries({1, 2, 3}).size() == 8);
  for (const Cuboid& c : {Cuboid{1, 1, 1}, Cuboid{1, 2, 2}, Cuboid{2, 3, 3}}) {
    const auto pts = c.points();
    const std::set<Point3> all(pts.begin(), pts.end());
    const auto gs = cuboid_symmetries(c);
    CHECK(gs.size() == box_isometries(c).size());
    for (const CuboidSymmetry& g : gs) {
      std::set<Point3> img;
      for (const Point3& p : pts) img.insert(g.apply(c, p));
      CHECK(img == all);
    }
  }
}

TEST_CASE("minimality order") {
  const auto order = cuboids_in_order(7, 60);
  std::vector<Cuboid> brute;
  for (int a = 0; a <= 60; ++a)
    for (int b = a; b <= 60; ++b)
      for (int c = b; c <= 60; ++c) {
        const Cuboid q{a, b, c};
        if (q.point_count() >= 7 && q.point_count() <= 60) brute.push_back(q);
      }
  std::sort(brute.begin(), brute.end(), [](const Cuboid& x, const Cuboid& y) {
    return std::tuple(x.point_count(), x.a, x.b, x.c) < std::tuple(y.point_count(), y.a, y.b, y.c);
  });
  CHECK(order == brute);
  CHECK(order.front() == Cuboid{0, 0, 6});
  for (std::size_t i = 1; i < order.size(); ++i) CHECK(cuboid_less(order[i - 1], order[i]));
}

TEST_CASE("closed-form rules") {
  const Triangulation m = moebius_torus();
  SearchTask t{m, {0, 1, 1}};
  CHECK(run(t).rule == "too_few_points");
  t.cuboid = {0, 2, 2};
  CHECK(run(t).rule == "planar_cuboid");
  t.cuboid = {1, 1, 1};
  const Certificate c = run(t);
  CHECK(c.rule == "layer_capacity");
  CHECK(c.outcome == Outcome::None);
  t.mode = SearchMode::Linear;
  CHECK(run(t).rule.empty());
  t.cuboid = {2, 1, 1};
  CHECK_THROWS_AS(run(t), std::invalid_argument);
}

TEST_CASE("all orbits agree with naive enumeration") {
  const Triangulation tet = tetrahedron_boundary();
  for (const Cuboid& c : {Cuboid{1, 1, 1}, Cuboid{1, 1, 2}, Cuboid{1, 2, 2}})
    for (SearchMode m : {SearchMode::GeneralPosition, SearchMode::Linear}) {
      CAPTURE(c.to_string());
      const Certificate cert = run(all_task(tet, c, m));
      const auto naive = naive_orbits(tet, c, m);
      CHECK(search_orbits(cert) == naive);
      CHECK((cert.outcome == Outcome::Witness) == !naive.empty());
    }
}

TEST_CASE("moebius torus has no realization in the unit cube") {
  CHECK(naive_orbits(moebius_torus(), {1, 1, 1}, SearchMode::Linear).empty());
  CHECK(run(all_task(moebius_torus(), {1, 1, 1}, SearchMode::Linear)).outcome == Outcome::None);
}

TEST_CASE("pruning and symmetry switches do not change the orbits") {
  const Triangulation tet = tetrahedron_boundary();
  SearchTask base = all_task(tet, {1, 2, 2}, SearchMode::GeneralPosition);
  const auto ref = search_orbits(run(base));
  SearchTask slow = base;
  slow.gp_plane_pruning = false;
  CHECK(search_orbits(run(slow)) == ref);
  SearchTask nosym = base;
  nosym.symmetry_breaking = false;
  const Certificate c = run(nosym);
  CHECK(search_orbits(c) == ref);

  // Moebius torus, 2x2x2: no general-position realization either way.
  SearchTask mt{moebius_torus(), {2, 2, 2}, SearchMode::GeneralPosition, SearchGoal::ProveNone};
  CHECK(run(mt).outcome == Outcome::None);
  mt.gp_plane_pruning = false;
  CHECK(run(mt).outcome == Outcome::None);
}

TEST_CASE("vertex-first and point-set-first search agree") {
  const Triangulation tet = tetrahedron_boundary();
  for (const Cuboid& c : {Cuboid{1, 1, 1}, Cuboid{1, 1, 2}, Cuboid{1, 2, 2}, Cuboid{2, 2, 2}}) {
    CAPTURE(c.to_string());
    SearchTask v = all_task(tet, c, SearchMode::GeneralPosition);
    v.strategy = SearchStrategy::VertexFirst;
    SearchTask p = v;
    p.strategy = SearchStrategy::PointSetFirst;
    const Certificate cp = run(p);
    CHECK(search_orbits(run(v)) == search_orbits(cp));
    CHECK(cp.stats.point_sets > 0);
    p.symmetry_breaking = false;
    CHECK(search_orbits(run(p)) == search_orbits(cp));
  }

  SearchTask m{moebius_torus(), {2, 2, 2}, SearchMode::GeneralPosition, SearchGoal::AllUpToSymmetry};
  m.strategy = SearchStrategy::VertexFirst;
  CHECK(run(m).outcome == Outcome::None);
  m.strategy = SearchStrategy::PointSetFirst;
  CHECK(run(m).outcome == Outcome::None);

  // 8-vertex tori: none fits 2x2x2; the sixth one fits 2x2x3.
  const auto tori8 = enumerate_tori(8).results;
  REQUIRE(tori8.size() == 7);
  for (std::size_t i = 0; i < tori8.size(); ++i) {
    CAPTURE(i);
    SearchTask f{tori8[i], {2, 2, 2}, SearchMode::GeneralPosition, SearchGoal::FirstWitness};
    f.strategy = SearchStrategy::VertexFirst;
    CHECK(run(f).outcome == Outcome::None);
    f.strategy = SearchStrategy::PointSetFirst;
    CHECK(run(f).outcome == Outcome::None);
  }
  SearchTask f{tori8[5], {2, 2, 3}, SearchMode::GeneralPosition, SearchGoal::FirstWitness};
  f.strategy = SearchStrategy::VertexFirst;
  const Certificate a = run(f);
  f.strategy = SearchStrategy::PointSetFirst;
  const Certificate b = run(f);
  REQUIRE(a.outcome == Outcome::Witness);
  REQUIRE(b.outcome == Outcome::Witness);
  CHECK(classify(a.witnesses[0]).level == Level::GeneralPosition);
  CHECK(classify(b.witnesses[0]).level == Level::GeneralPosition);

  SearchTask lin = all_task(tet, {1, 1, 1}, SearchMode::Linear);
  lin.strategy = SearchStrategy::PointSetFirst;
  CHECK_THROWS_AS(run(lin), std::invalid_argument);
  CHECK(parse_strategy("pointset") == SearchStrategy::PointSetFirst);
  CHECK(to_string(SearchStrategy::VertexFirst) == "vertex");
  CHECK_THROWS(parse_strategy("depth"));
}

TEST_CASE("results do not depend on worker count") {
  SearchTask t = all_task(tetrahedron_boundary(), {1, 2, 2}, SearchMode::Linear);
  const Certificate one = run(t);
  t.workers = 3;
  const Certificate three = run(t);
  REQUIRE(one.witnesses.size() == three.witnesses.size());
  for (std::size_t i = 0; i < one.witnesses.size(); ++i) CHECK(one.witnesses[i].coords == three.witnesses[i].coords);

  SearchTask f{moebius_torus(), {2, 2, 4}, SearchMode::GeneralPosition, SearchGoal::FirstWitness};
  f.budget.max_seconds = 600;
  const Certificate a = run(f);
  f.workers = 2;
  const Certificate b = run(f);
  REQUIRE(a.outcome == Outcome::Witness);
  REQUIRE(b.outcome == Outcome::Witness);
  CHECK(a.witnesses[0].coords == b.witnesses[0].coords);
  CHECK(classify(a.witnesses[0]).level == Level::GeneralPosition);
}

TEST_CASE("budgets produce a timeout outcome") {
  SearchTask t{moebius_torus(), {2, 2, 3}, SearchMode::GeneralPosition, SearchGoal::ProveNone};
  t.budget.max_nodes = 2000;
  const Certificate c = run(t);
  CHECK(c.outcome == Outcome::Timeout);
  CHECK(c.witnesses.empty());
}

TEST_CASE("certificate bookkeeping") {
  SearchTask t{moebius_torus(), {2, 2, 2}, SearchMode::GeneralPosition, SearchGoal::ProveNone};
  const Certificate c = run(t);
  CHECK(c.cuboid_group_order == 48);
  CHECK(c.automorphism_group_order == 42);
  CHECK(c.stats.nodes > 0);
  CHECK(c.stats.prunes.count("symmetry") == 1);
}

TEST_CASE("mode and goal names") {
  for (SearchMode m : {SearchMode::GeneralPosition, SearchMode::Linear}) CHECK(parse_mode(to_string(m)) == m);
  for (SearchGoal g : {SearchGoal::FirstWitness, SearchGoal::AllUpToSymmetry, SearchGoal::ProveNone})
    CHECK(parse_goal(to_string(g)) == g);
  CHECK_THROWS(parse_mode("planar"));
}

namespace {

// Plain branch and bound over pairwise-compatible segment sets.
int brute_max_segments(const Cuboid& c) {
  const auto pts = c.points();
  std::vector<std::pair<Point3, Point3>> segs;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) segs.push_back({pts[i], pts[j]});
  const std::size_t m = segs.size();
  std::vector<std::vector<bool>> ok(m, std::vector<bool>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const oracle::V a = oracle::from_int(segs[i].first.x, segs[i].first.y, segs[i].first.z);
      const oracle::V b = oracle::from_int(segs[i].second.x, segs[i].second.y, segs[i].second.z);
      const oracle::V p = oracle::from_int(segs[j].first.x, segs[j].first.y, segs[j].first.z);
      const oracle::V q = oracle::from_int(segs[j].second.x, segs[j].second.y, segs[j].second.z);
      bool good = true;
      const std::vector<oracle::V> shared = [&] {
        std::vector<oracle::V> s;
        for (const auto& x : {a, b})
          for (const auto& y : {p, q})
            if (oracle::same(x, y)) s.push_back(x);
        return s;
      }();
      const auto d1 = oracle::sub(b, a), d2 = oracle::sub(q, p), w = oracle::sub(p, a);
      const auto n = oracle::crossq(d1, d2);
      if (oracle::is_zero(n)) {
        if (oracle::is_zero(oracle::crossq(d1, w))) {
          // Same line: compatible iff the overlap is at most a shared endpoint.
          for (const auto& x : {p, q})
            if (oracle::on_closed_seg(x, a, b) && !(oracle::same(x, a) || oracle::same(x, b))) good = false;
          for (const auto& x : {a, b})
            if (oracle::on_closed_seg(x, p, q) && !(oracle::same(x, p) || oracle::same(x, q))) good = false;
        }
      } else if (oracle::dotq(n, w) == 0) {
        const oracle::Q s = oracle::dotq(oracle::crossq(w, d2), n) / oracle::dotq(n, n);
        const oracle::Q t = oracle::dotq(oracle::crossq(w, d1), n) / oracle::dotq(n, n);
        if (s >= 0 && s <= 1 && t >= 0 && t <= 1) {
          const auto x = oracle::add(a, oracle::scale(d1, s));
          bool at_shared = false;
          for (const auto& y : shared) at_shared = at_shared || oracle::same(x, y);
          if (!at_shared) good = false;
        }
      }
      ok[i][j] = ok[j][i] = good;
    }
  int best = 0;
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (static_cast<int>(chosen.size() + (m - k)) <= best) return;
    if (k == m) {
      best = static_cast<int>(chosen.size());
      return;
    }
    bool fits = true;
    for (std::size_t x : chosen) fits = fits && ok[x][k];
    if (fits) {
      chosen.push_back(k);
      rec(k + 1);
      chosen.pop_back();
    }
    rec(k + 1);
  };
  rec(0);
  return best;
}

}  // namespace

TEST_CASE("segment packing matches brute force") {
  for (const Cuboid& c : {Cuboid{0, 1, 1}, Cuboid{0, 1, 2}, Cuboid{0, 2, 2}, Cuboid{1, 1, 1}}) {
    CAPTURE(c.to_string());
    const SegmentPacking sp = max_compatible_segments(c);
    CHECK(sp.complete);
    CHECK(sp.count == brute_max_segments(c));
    CHECK(static_cast<int>(sp.segments.size()) == sp.count);
    for (std::size_t i = 0; i < sp.segments.size(); ++i)
      for (std::size_t j = i + 1; j < sp.segments.size(); ++j)
        CHECK(segments_compatible({sp.segments[i].first, sp.segments[i].second},
                                  {sp.segments[j].first, sp.segments[j].second}));
  }
  CHECK(max_compatible_segments({0, 1, 1}).count == 5);
  CHECK(max_compatible_segments({1, 1, 1}).total_segments == 28);
}

TEST_CASE("edge count obstruction") {
  const Cuboid c{1, 1, 2};
  CHECK(edge_count_obstruction(c, 9, 26));
  CHECK_FALSE(edge_count_obstruction(c, 9, 27));
  CHECK_FALSE(edge_count_obstruction(c, 7, 24));
}
