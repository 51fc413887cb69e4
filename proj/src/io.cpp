#include "torusforge/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace torusforge {

using Json = nlohmann::ordered_json;

namespace {

Json manifest_json(const RunManifest& m) {
  Json j;
  j["subcommand"] = m.subcommand;
  j["inputs"] = m.inputs;
  Json params = Json::object();
  for (const auto& [k, v] : m.parameters) params[k] = v;
  j["parameters"] = params;
  j["seed"] = m.seed ? Json(*m.seed) : Json(nullptr);
  j["version"] = m.version;
  j["outputs"] = m.outputs;
  return j;
}

Json point_json(const Point3& p) { return Json::array({p.x, p.y, p.z}); }

Json coords_json(const std::vector<Point3>& pts) {
  Json a = Json::array();
  for (const Point3& p : pts) a.push_back(point_json(p));
  return a;
}

Json facets_json(const Triangulation& t) {
  Json a = Json::array();
  for (const Facet& f : t.facets()) a.push_back(Json::array({f[0], f[1], f[2]}));
  return a;
}

Json task_json(const SearchTask& t) {
  Json j;
  j["triangulation"] = serialize(t.tri);
  j["cuboid"] = t.cuboid.to_string();
  j["mode"] = std::string(to_string(t.mode));
  j["goal"] = std::string(to_string(t.goal));
  j["budget"] = {{"max_nodes", t.budget.max_nodes}, {"max_seconds", t.budget.max_seconds}};
  j["workers"] = t.workers;
  j["strategy"] = std::string(to_string(t.strategy));
  j["gp_plane_pruning"] = t.gp_plane_pruning;
  j["symmetry_breaking"] = t.symmetry_breaking;
  return j;
}

Json cert_json(const Certificate& c, bool with_time) {
  Json j;
  j["task"] = task_json(c.task);
  j["outcome"] = std::string(to_string(c.outcome));
  j["rule"] = c.rule;
  Json w = Json::array();
  for (const Realization& r : c.witnesses) w.push_back(coords_json(r.coords));
  j["witnesses"] = w;
  j["group_orders"] = {{"cuboid", c.cuboid_group_order}, {"automorphisms", c.automorphism_group_order}};
  Json stats;
  stats["nodes"] = c.stats.nodes;
  Json prunes = Json::object();
  for (const auto& [k, v] : c.stats.prunes) prunes[k] = v;
  stats["prunes"] = prunes;
  stats["raw_solutions"] = c.stats.raw_solutions;
  stats["point_sets"] = c.stats.point_sets;
  if (with_time) stats["seconds"] = c.stats.seconds;
  j["stats"] = stats;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct Faces {
  std::vector<int> labels;                 // exported vertices, in order
  std::vector<std::vector<int>> polygons;  // labels
};

Faces faces_for(const Realization& r, bool merged) {
  const RealizationClass cls = classify(r);
  if (cls.level < Level::Linear)
    throw GeometryError("cannot export a realization that is not embedded: " + cls.reason);
  Faces out;
  if (!merged) {
    for (int v = 1; v <= r.tri.n(); ++v) out.labels.push_back(v);
    for (const Facet& f : r.tri.facets()) out.polygons.push_back({f[0], f[1], f[2]});
    return out;
  }
  MergeResult m = merge_coplanar(r);
  if (auto* fail = std::get_if<MergeFailure>(&m)) throw GeometryError("merge failed: " + fail->reason);
  const PolyhedralMap& map = std::get<PolyhedralMap>(m);
  out.labels = map.vertices;
  out.polygons = map.faces;
  return out;
}

}  // namespace

std::string RunManifest::to_json() const { return manifest_json(*this).dump(); }

std::string realization_json(const Realization& r, std::optional<Level> level, const RunManifest* manifest) {
  r.check();
  Json j;
  j["n"] = r.tri.n();
  j["facets"] = facets_json(r.tri);
  j["coords"] = coords_json(r.coords);
  if (level) j["class"] = std::string(to_string(*level));
  if (manifest) j["manifest"] = manifest_json(*manifest);
  return dump(j);
}

Realization parse_realization_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("realization file is not valid JSON: ") + e.what());
  }
  try {
    const int n = j.at("n").get<int>();
    std::vector<Facet> facets;
    for (const auto& f : j.at("facets")) {
      if (f.size() != 3) throw FormatError("facet entries must have three labels");
      facets.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
    }
    std::vector<Point3> coords;
    for (const auto& p : j.at("coords")) {
      if (p.size() != 3) throw FormatError("coordinate entries must have three integers");
      coords.push_back({p[0].get<std::int64_t>(), p[1].get<std::int64_t>(), p[2].get<std::int64_t>()});
    }
    if (static_cast<int>(coords.size()) != n)
      throw FormatError("file lists " + std::to_string(coords.size()) + " coordinates for n=" + std::to_string(n));
    Realization r{Triangulation(n, std::move(facets)), std::move(coords)};
    r.check();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed realization file: ") + e.what());
  }
}

std::string certificate_json(const Certificate& c, const RunManifest* manifest, bool with_time) {
  Json j;
  j["tool"] = "torusforge";
  j["certificate"] = cert_json(c, with_time);
  if (manifest) j["manifest"] = manifest_json(*manifest);
  return dump(j);
}

std::string minimal_json(const MinimalResult& m, const RunManifest* manifest, bool with_time) {
  Json j;
  j["tool"] = "torusforge";
  j["minimal_cuboid"] = m.cuboid ? Json(m.cuboid->to_string()) : Json(nullptr);
  j["timed_out"] = m.timed_out;
  j["witness"] = m.witness ? cert_json(*m.witness, with_time) : Json(nullptr);
  Json ex = Json::array();
  for (const Certificate& c : m.excluded) ex.push_back(cert_json(c, with_time));
  j["excluded"] = ex;
  if (manifest) j["manifest"] = manifest_json(*manifest);
  return dump(j);
}

std::string export_off(const Realization& r, bool merged, const RunManifest* manifest) {
  const Faces f = faces_for(r, merged);
  std::ostringstream out;
  out << "OFF\n";
  if (manifest) out << "# manifest " << manifest->to_json() << "\n";
  out << f.labels.size() << ' ' << f.polygons.size() << " 0\n";
  std::map<int, int> index;
  for (std::size_t i = 0; i < f.labels.size(); ++i) {
    index[f.labels[i]] = static_cast<int>(i);
    const Point3& p = r.at(f.labels[i]);
    out << p.x << ' ' << p.y << ' ' << p.z << '\n';
  }
  for (const auto& poly : f.polygons) {
    out << poly.size();
    for (int v : poly) out << ' ' << index.at(v);
    out << '\n';
  }
  return out.str();
}

std::string export_obj(const Realization& r, bool merged, const RunManifest* manifest) {
  const Faces f = faces_for(r, merged);
  std::ostringstream out;
  if (manifest) out << "# manifest " << manifest->to_json() << "\n";
  std::map<int, int> index;
  for (std::size_t i = 0; i < f.labels.size(); ++i) {
    index[f.labels[i]] = static_cast<int>(i) + 1;
    const Point3& p = r.at(f.labels[i]);
    out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
  }
  for (const auto& poly : f.polygons) {
    out << 'f';
    for (int v : poly) out << ' ' << index.at(v);
    out << '\n';
  }
  return out.str();
}

namespace {

std::int64_t parse_int(const std::string& tok, int line_no) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || tok.empty())
    throw FormatError("line " + std::to_string(line_no) + ": expected an integer, got '" + tok + "'");
  return v;
}

}  // namespace

Mesh parse_obj(std::string_view text) {
  Mesh mesh;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      std::string x, y, z;
      if (!(ls >> x >> y >> z)) throw FormatError("line " + std::to_string(line_no) + ": short vertex record");
      mesh.vertices.push_back({parse_int(x, line_no), parse_int(y, line_no), parse_int(z, line_no)});
    } else if (tag == "f") {
      std::vector<int> face;
      std::string tok;
      while (ls >> tok) {
        const std::string idx = tok.substr(0, tok.find('/'));
        face.push_back(static_cast<int>(parse_int(idx, line_no)) - 1);
      }
      mesh.faces.push_back(std::move(face));
    }
  }
  return mesh;
}

Mesh parse_off(std::string_view text) {
  Mesh mesh;
  std::istringstream in{std::string(text)};
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  if (tokens.empty() || tokens[0] != "OFF") throw FormatError("missing OFF header");
  std::size_t k = 1;
  auto next = [&]() -> std::int64_t {
    if (k >= tokens.size()) throw FormatError("truncated OFF file");
    return parse_int(tokens[k++], 0);
  };
  const auto nv = next(), nf = next();
  next();
  for (std::int64_t i = 0; i < nv; ++i) {
    const auto x = next(), y = next(), z = next();
    mesh.vertices.push_back({x, y, z});
  }
  for (std::int64_t i = 0; i < nf; ++i) {
    const auto m = next();
    std::vector<int> face;
    for (std::int64_t j = 0; j < m; ++j) face.push_back(static_cast<int>(next()));
    mesh.faces.push_back(std::move(face));
  }
  return mesh;
}

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& p, std::string_view text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace torusforge
