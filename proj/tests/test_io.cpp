#include "doctest.h"

#include "torusforge/io.hpp"

using namespace torusforge;

namespace {

Realization moebius_gp() {
  return {moebius_torus(), {{0, 0, 0}, {0, 1, 0}, {2, 2, 0}, {1, 1, 3}, {2, 1, 1}, {0, 2, 3}, {2, 0, 4}}};
}

Realization square_pyramid() {
  const Triangulation t(5, {{1, 2, 3}, {1, 3, 4}, {1, 2, 5}, {2, 3, 5}, {3, 4, 5}, {1, 4, 5}});
  return {t, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}}};
}

}  // namespace

TEST_CASE("realization JSON round trip") {
  const Realization r = moebius_gp();
  RunManifest m{"heuristic", {"moebius"}, {{"box", "2x2x4"}}, 7};
  const std::string text = realization_json(r, Level::GeneralPosition, &m);
  const Realization back = parse_realization_json(text);
  CHECK(back.tri == r.tri);
  CHECK(back.coords == r.coords);
  CHECK(text.find("\"class\": \"GeneralPosition\"") != std::string::npos);
  CHECK(text.find("\"seed\": 7") != std::string::npos);

  CHECK_THROWS_AS(parse_realization_json("{"), FormatError);
  CHECK_THROWS_AS(parse_realization_json(R"({"n": 4, "facets": [[1,2,3]], "coords": [[0,0,0]]})"), FormatError);
}

TEST_CASE("certificates are reproducible byte for byte") {
  SearchTask t{moebius_torus(), {2, 2, 2}, SearchMode::GeneralPosition, SearchGoal::ProveNone};
  const std::string a = certificate_json(run(t));
  const std::string b = certificate_json(run(t));
  CHECK(a == b);
  CHECK(a.find("\"outcome\": \"None\"") != std::string::npos);
  CHECK(a.find("\"seconds\"") == std::string::npos);
  CHECK(certificate_json(run(t), nullptr, true).find("\"seconds\"") != std::string::npos);
}

TEST_CASE("OBJ and OFF export round trip") {
  const Realization r = moebius_gp();
  RunManifest m{"export", {"x.json"}, {{"format", "obj"}}, std::nullopt};
  const Mesh obj = parse_obj(export_obj(r, false, &m));
  CHECK(obj.vertices == r.coords);
  REQUIRE(obj.faces.size() == r.tri.facet_count());
  for (std::size_t i = 0; i < obj.faces.size(); ++i) {
    const Facet& f = r.tri.facets()[i];
    CHECK(obj.faces[i] == std::vector<int>{f[0] - 1, f[1] - 1, f[2] - 1});
  }
  const Mesh off = parse_off(export_off(r, false, &m));
  CHECK(off.vertices == obj.vertices);
  CHECK(off.faces == obj.faces);
  CHECK(export_off(r, false, &m).find("# manifest {") != std::string::npos);
}

TEST_CASE("merged export") {
  const Mesh off = parse_off(export_off(square_pyramid(), true));
  CHECK(off.vertices.size() == 5);
  CHECK(off.faces.size() == 5);
  const Realization flat{tetrahedron_boundary(), {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}};
  CHECK_THROWS_AS(export_obj(flat, false), GeometryError);
}

TEST_CASE("malformed meshes") {
  CHECK_THROWS_AS(parse_off("OFF\n3 1 0\n0 0 0\n"), FormatError);
  CHECK_THROWS_AS(parse_off("PLY\n"), FormatError);
  CHECK_THROWS_AS(parse_obj("v 1 2\n"), FormatError);
  CHECK_THROWS_AS(parse_obj("v 1 2 x\n"), FormatError);
}
