#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "oracle/rational_oracle.hpp"
#include "torusforge/realization.hpp"

using namespace torusforge;

namespace {

// Independent level computation with rational arithmetic.
Level reference_level(const Realization& r) {
  if (!oracle::linear_realization(r.tri.facets(), r.coords)) return Level::NotEmbedded;
  std::vector<oracle::V> p;
  for (const Point3& c : r.coords) p.push_back(oracle::from_int(c.x, c.y, c.z));
  auto coplanar = [&](int a, int b, int c, int d) {
    const auto n = oracle::crossq(oracle::sub(p[b - 1], p[a - 1]), oracle::sub(p[c - 1], p[a - 1]));
    return oracle::dotq(n, oracle::sub(p[d - 1], p[a - 1])) == 0;
  };
  const auto& fs = r.tri.facets();
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j) {
      std::vector<int> u(fs[i].begin(), fs[i].end());
      u.insert(u.end(), fs[j].begin(), fs[j].end());
      std::sort(u.begin(), u.end());
      u.erase(std::unique(u.begin(), u.end()), u.end());
      if (u.size() == 4 && coplanar(u[0], u[1], u[2], u[3])) return Level::Linear;
    }
  const int n = r.tri.n();
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      for (int c = b + 1; c <= n; ++c) {
        if (oracle::is_zero(oracle::crossq(oracle::sub(p[b - 1], p[a - 1]), oracle::sub(p[c - 1], p[a - 1]))))
          return Level::Proper;
        for (int d = c + 1; d <= n; ++d)
          if (coplanar(a, b, c, d)) return Level::Proper;
      }
  return Level::GeneralPosition;
}

Realization tetrahedron(std::vector<Point3> pts) { return {tetrahedron_boundary(), std::move(pts)}; }

Realization octahedron() {
  const Triangulation t(6, {{1, 3, 5}, {1, 3, 6}, {1, 4, 5}, {1, 4, 6}, {2, 3, 5}, {2, 3, 6}, {2, 4, 5}, {2, 4, 6}});
  return {t, {{2, 1, 1}, {0, 1, 1}, {1, 2, 1}, {1, 0, 1}, {1, 1, 2}, {1, 1, 0}}};
}

Realization square_pyramid() {
  const Triangulation t(5, {{1, 2, 3}, {1, 3, 4}, {1, 2, 5}, {2, 3, 5}, {3, 4, 5}, {1, 4, 5}});
  return {t, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}}};
}

Realization relabeled(const Realization& r, const Permutation& perm) {
  Realization out{r.tri.relabeled(perm), r.coords};
  for (int v = 1; v <= r.tri.n(); ++v) out.coords[perm[v - 1] - 1] = r.coords[v - 1];
  return out;
}

std::vector<Point3> random_coords(int n, int side, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, side);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {d(rng), d(rng), d(rng)};
  return pts;
}

}  // namespace

TEST_CASE("classification levels") {
  CHECK(classify(tetrahedron({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}})).level == Level::GeneralPosition);
  CHECK(classify(octahedron()).level == Level::Proper);

  const RealizationClass pyramid = classify(square_pyramid());
  CHECK(pyramid.level == Level::Linear);
  REQUIRE(pyramid.coplanar_pairs.size() == 1);
  CHECK(pyramid.coplanar_pairs[0] == std::pair<Facet, Facet>{{1, 2, 3}, {1, 3, 4}});

  const RealizationClass flat = classify(tetrahedron({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}));
  CHECK(flat.level == Level::NotEmbedded);
  CHECK_FALSE(flat.reason.empty());

  const RealizationClass twin = classify(tetrahedron({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 0}}));
  CHECK(twin.level == Level::NotEmbedded);
  CHECK(twin.witness == std::vector<int>{1, 4});

  const RealizationClass line = classify(tetrahedron({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 1}}));
  CHECK(line.level == Level::NotEmbedded);
}

TEST_CASE("classification agrees with the rational reference") {
  std::mt19937_64 rng(11);
  const Triangulation m = moebius_torus();
  std::array<int, 4> hist{};
  for (int i = 0; i < 400; ++i) {
    const Realization r{m, random_coords(7, 3, rng)};
    const Level got = classify(r).level;
    CHECK(got == reference_level(r));
    ++hist[static_cast<int>(got)];
  }
  for (int i = 0; i < 400; ++i) {
    const Realization r = tetrahedron(random_coords(4, 2, rng));
    CHECK(classify(r).level == reference_level(r));
  }
  for (const Realization& r : {octahedron(), square_pyramid()}) CHECK(classify(r).level == reference_level(r));
  CHECK(hist[0] > 0);
}

TEST_CASE("known general-position Moebius torus") {
  const Realization r{moebius_torus(), {{0, 0, 0}, {0, 1, 0}, {2, 2, 0}, {1, 1, 3}, {2, 1, 1}, {0, 2, 3}, {2, 0, 4}}};
  CHECK(classify(r).level == Level::GeneralPosition);
  CHECK(reference_level(r) == Level::GeneralPosition);
  CHECK(in_general_position(r.coords));
  CHECK(chirotope(r).uniform());
}

TEST_CASE("coordinate bound") {
  Realization r = tetrahedron({{0, 0, 0}, {kCoordLimit + 1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK_THROWS_AS(r.check(), GeometryError);
  r.coords.pop_back();
  CHECK_THROWS_AS(r.check(), GeometryError);
}

TEST_CASE("subset rank matches lexicographic order") {
  const int n = 8;
  std::size_t k = 0;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      for (int a = j + 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b) CHECK(subset_rank(n, i, j, a, b) == k++);
}

TEST_CASE("chirotope text round trip and signs") {
  const Realization r = octahedron();
  const Chirotope c = chirotope(r);
  CHECK(c.signs.size() == 15);
  CHECK_FALSE(c.uniform());
  CHECK(Chirotope::parse(c.to_string()) == c);
  CHECK(c.to_string().rfind("n=6 ", 0) == 0);
  for (int i = 1; i <= 6; ++i)
    for (int j = i + 1; j <= 6; ++j)
      for (int k = j + 1; k <= 6; ++k)
        for (int l = k + 1; l <= 6; ++l)
          CHECK(c.at(i, j, k, l) == orient3d(r.at(i), r.at(j), r.at(k), r.at(l)));
  CHECK(c.negated().negated() == c);
}

TEST_CASE("relabeling a chirotope matches relabeling the points") {
  std::mt19937_64 rng(3);
  const Realization r{moebius_torus(), {{0, 0, 0}, {0, 1, 0}, {2, 2, 0}, {1, 1, 3}, {2, 1, 1}, {0, 2, 3}, {2, 0, 4}}};
  Permutation p = identity_permutation(7);
  for (int i = 0; i < 30; ++i) {
    std::shuffle(p.begin(), p.end(), rng);
    CHECK(chirotope(relabeled(r, p)) == relabel(chirotope(r), p));
  }
}

TEST_CASE("oriented matroid canonical form") {
  const Realization r{moebius_torus(), {{0, 0, 0}, {0, 1, 0}, {2, 2, 0}, {1, 1, 3}, {2, 1, 1}, {0, 2, 3}, {2, 0, 4}}};
  const auto aut = automorphisms(r.tri);
  const Chirotope c = chirotope(r);
  const Chirotope canon = om_canonical(c, aut);
  for (const Permutation& g : aut) {
    CHECK(om_canonical(relabel(c, g), aut) == canon);
    CHECK(om_equivalent(c, relabel(c, g).negated(), aut));
  }
  // Mirror image: negated chirotope.
  Realization mirror = r;
  for (Point3& q : mirror.coords) q.x = -q.x;
  CHECK(chirotope(mirror) == c.negated());
  CHECK(om_equivalent(c, chirotope(mirror), aut));

  // Classes partition the input and are ordered by smallest member.
  const std::vector<Chirotope> list{c, c.negated(), relabel(c, aut[1])};
  const auto classes = om_classes(list, aut);
  REQUIRE(classes.size() == 1);
  CHECK(classes[0].members == std::vector<std::size_t>{0, 1, 2});
  CHECK(classes[0].representative == canon);
}

TEST_CASE("merging coplanar neighbours") {
  const MergeResult m = merge_coplanar(square_pyramid());
  REQUIRE(std::holds_alternative<PolyhedralMap>(m));
  const PolyhedralMap& map = std::get<PolyhedralMap>(m);
  CHECK(map.faces.size() == 5);
  CHECK(map.vertices.size() == 5);
  CHECK(map.edge_count() == 8);
  std::size_t quads = 0;
  for (std::size_t i = 0; i < map.faces.size(); ++i) {
    if (map.faces[i].size() == 4) {
      ++quads;
      CHECK(map.provenance[i].size() == 2);
      std::vector<int> sorted = map.faces[i];
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == std::vector<int>{1, 2, 3, 4});
    }
  }
  CHECK(quads == 1);

  const MergeResult plain = merge_coplanar(octahedron());
  REQUIRE(std::holds_alternative<PolyhedralMap>(plain));
  CHECK(std::get<PolyhedralMap>(plain).faces.size() == 8);

  CHECK_THROWS_AS(merge_coplanar(tetrahedron({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}})), GeometryError);
}

TEST_CASE("level names") {
  for (Level l : {Level::NotEmbedded, Level::Linear, Level::Proper, Level::GeneralPosition})
    CHECK(parse_level(to_string(l)) == l);
}
