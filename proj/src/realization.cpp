#include "torusforge/realization.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace torusforge {

namespace {

std::uint64_t binom(int n, int k) {
  if (k < 0 || n < k) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

int sort4_parity(std::array<int, 4>& a) {
  int swaps = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j + 1 < 4 - i; ++j)
      if (a[j] > a[j + 1]) {
        std::swap(a[j], a[j + 1]);
        ++swaps;
      }
  return swaps % 2 ? -1 : 1;
}

std::string facet_name(const Facet& f) {
  return "[" + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "]";
}

}  // namespace

void Realization::check() const {
  if (static_cast<int>(coords.size()) != tri.n())
    throw GeometryError("realization has " + std::to_string(coords.size()) + " points for " +
                        std::to_string(tri.n()) + " vertices");
  for (const Point3& p : coords) check_coord_limit(p);
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::NotEmbedded: return "NotEmbedded";
    case Level::Linear: return "Linear";
    case Level::Proper: return "Proper";
    case Level::GeneralPosition: return "GeneralPosition";
  }
  return "?";
}

Level parse_level(std::string_view s) {
  if (s == "NotEmbedded") return Level::NotEmbedded;
  if (s == "Linear" || s == "linear") return Level::Linear;
  if (s == "Proper" || s == "proper") return Level::Proper;
  if (s == "GeneralPosition" || s == "gp") return Level::GeneralPosition;
  throw std::invalid_argument("unknown realization level '" + std::string(s) + "'");
}

bool in_general_position(const std::vector<Point3>& pts) {
  const std::size_t n = pts.size();
  for (const Point3& p : pts) check_coord_limit(p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        if (kernel::is_degenerate(pts[i], pts[j], pts[k])) return false;
        for (std::size_t l = k + 1; l < n; ++l)
          if (orient3d_det(pts[i], pts[j], pts[k], pts[l]) == 0) return false;
      }
  return true;
}

RealizationClass classify(const Realization& r) {
  r.check();
  RealizationClass out;
  const int n = r.tri.n();
  const auto& facets = r.tri.facets();

  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      if (r.at(a) == r.at(b)) {
        out.reason = "vertices " + std::to_string(a) + " and " + std::to_string(b) + " coincide";
        out.witness = {a, b};
        return out;
      }
  for (const Facet& f : facets) {
    if (kernel::is_degenerate(r.at(f[0]), r.at(f[1]), r.at(f[2]))) {
      out.reason = "facet " + facet_name(f) + " is degenerate";
      out.witness = {f[0], f[1], f[2]};
      return out;
    }
  }
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const Facet& f = facets[i];
    const Triangle tf{{r.at(f[0]), r.at(f[1]), r.at(f[2])}};
    for (std::size_t j = i + 1; j < facets.size(); ++j) {
      const Facet& g = facets[j];
      const Triangle tg{{r.at(g[0]), r.at(g[1]), r.at(g[2])}};
      if (!kernel::triangles_compatible_unchecked(tf, tg)) {
        out.reason = "facets " + facet_name(f) + " and " + facet_name(g) + " intersect";
        out.witness = {f[0], f[1], f[2], g[0], g[1], g[2]};
        return out;
      }
    }
  }
  out.level = Level::Linear;

  std::map<Edge, std::vector<std::size_t>> on_edge;
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const Facet& f = facets[i];
    on_edge[{f[0], f[1]}].push_back(i);
    on_edge[{f[0], f[2]}].push_back(i);
    on_edge[{f[1], f[2]}].push_back(i);
  }
  for (const auto& [e, fs] : on_edge) {
    for (std::size_t x = 0; x < fs.size(); ++x)
      for (std::size_t y = x + 1; y < fs.size(); ++y) {
        const Facet& f = facets[fs[x]];
        const Facet& g = facets[fs[y]];
        int apex = 0;
        for (int v : g)
          if (v != e.first && v != e.second) apex = v;
        if (orient3d_det(r.at(f[0]), r.at(f[1]), r.at(f[2]), r.at(apex)) == 0)
          out.coplanar_pairs.push_back({f, g});
      }
  }
  if (!out.coplanar_pairs.empty()) {
    out.reason = std::to_string(out.coplanar_pairs.size()) + " coplanar neighbouring facet pair(s)";
    return out;
  }
  out.level = Level::Proper;

  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      for (int c = b + 1; c <= n; ++c) {
        if (kernel::is_degenerate(r.at(a), r.at(b), r.at(c))) {
          out.reason = "vertices " + std::to_string(a) + "," + std::to_string(b) + "," +
                       std::to_string(c) + " are collinear";
          out.witness = {a, b, c};
          return out;
        }
        for (int d = c + 1; d <= n; ++d)
          if (orient3d_det(r.at(a), r.at(b), r.at(c), r.at(d)) == 0) {
            out.reason = "vertices " + std::to_string(a) + "," + std::to_string(b) + "," +
                         std::to_string(c) + "," + std::to_string(d) + " are coplanar";
            out.witness = {a, b, c, d};
            return out;
          }
      }
  out.level = Level::GeneralPosition;
  out.reason.clear();
  return out;
}

// ---------------------------------------------------------------------------
// Chirotopes

std::size_t subset_rank(int n, int i, int j, int k, int l) {
  const int e[4] = {i, j, k, l};
  std::uint64_t rank = 0;
  int prev = 0;
  for (int p = 0; p < 4; ++p) {
    for (int x = prev + 1; x < e[p]; ++x) rank += binom(n - x, 3 - p);
    prev = e[p];
  }
  return static_cast<std::size_t>(rank);
}

bool Chirotope::uniform() const {
  return std::none_of(signs.begin(), signs.end(), [](Sign s) { return s == Sign::Zero; });
}

Chirotope Chirotope::negated() const {
  Chirotope c = *this;
  for (Sign& s : c.signs) s = -s;
  return c;
}

Sign Chirotope::at(int i, int j, int k, int l) const { return signs[subset_rank(n, i, j, k, l)]; }

std::string Chirotope::to_string() const {
  std::string out = "n=" + std::to_string(n) + " ";
  for (Sign s : signs) out += s == Sign::Positive ? '+' : (s == Sign::Negative ? '-' : '0');
  return out;
}

Chirotope Chirotope::parse(std::string_view line) {
  if (line.substr(0, 2) != "n=") throw std::invalid_argument("chirotope line must start with n=");
  const auto sp = line.find(' ');
  if (sp == std::string_view::npos) throw std::invalid_argument("chirotope line lacks signs");
  Chirotope c;
  c.n = std::stoi(std::string(line.substr(2, sp - 2)));
  for (char ch : line.substr(sp + 1)) {
    if (ch == '+') c.signs.push_back(Sign::Positive);
    else if (ch == '-') c.signs.push_back(Sign::Negative);
    else if (ch == '0') c.signs.push_back(Sign::Zero);
    else if (ch == ' ' || ch == '\r' || ch == '\t') continue;
    else throw std::invalid_argument(std::string("bad chirotope sign '") + ch + "'");
  }
  if (c.signs.size() != binom(c.n, 4))
    throw std::invalid_argument("chirotope needs C(n,4) signs");
  return c;
}

Chirotope chirotope(const Realization& r) {
  r.check();
  Chirotope c;
  c.n = r.tri.n();
  const int n = c.n;
  c.signs.reserve(binom(n, 4));
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      for (int k = j + 1; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l)
          c.signs.push_back(sign_of(orient3d_det(r.at(i), r.at(j), r.at(k), r.at(l))));
  return c;
}

Chirotope relabel(const Chirotope& c, const Permutation& perm) {
  Chirotope out;
  out.n = c.n;
  out.signs.assign(c.signs.size(), Sign::Zero);
  const int n = c.n;
  std::size_t idx = 0;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      for (int k = j + 1; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) {
          std::array<int, 4> img{perm[i - 1], perm[j - 1], perm[k - 1], perm[l - 1]};
          const int parity = sort4_parity(img);
          const Sign s = c.signs[idx++];
          out.signs[subset_rank(n, img[0], img[1], img[2], img[3])] = parity > 0 ? s : -s;
        }
  return out;
}

bool om_equivalent(const Chirotope& c1, const Chirotope& c2, const std::vector<Permutation>& aut) {
  if (c1.n != c2.n) return false;
  const Chirotope neg = c2.negated();
  for (const Permutation& p : aut) {
    const Chirotope img = relabel(c1, p);
    if (img == c2 || img == neg) return true;
  }
  return false;
}

Chirotope om_canonical(const Chirotope& c, const std::vector<Permutation>& aut) {
  Chirotope best = c;
  bool first = true;
  for (const Permutation& p : aut) {
    Chirotope img = relabel(c, p);
    Chirotope neg = img.negated();
    if (first || img < best) best = img;
    if (neg < best) best = neg;
    first = false;
  }
  if (first && c.negated() < best) best = c.negated();
  return best;
}

std::vector<OmClass> om_classes(const std::vector<Chirotope>& chis,
                                const std::vector<Permutation>& aut) {
  std::map<Chirotope, std::vector<std::size_t>> by_rep;
  for (std::size_t i = 0; i < chis.size(); ++i) by_rep[om_canonical(chis[i], aut)].push_back(i);
  std::vector<OmClass> out;
  for (auto& [rep, members] : by_rep) out.push_back({rep, members});
  auto min_member = [&](const OmClass& c) {
    return *std::min_element(c.members.begin(), c.members.end(),
                             [&](std::size_t a, std::size_t b) { return chis[a] < chis[b]; });
  };
  std::sort(out.begin(), out.end(), [&](const OmClass& a, const OmClass& b) {
    return chis[min_member(a)] < chis[min_member(b)];
  });
  return out;
}

// ---------------------------------------------------------------------------
// Coplanar merging

std::size_t PolyhedralMap::edge_count() const {
  std::set<Edge> edges;
  for (const auto& face : faces)
    for (std::size_t i = 0; i < face.size(); ++i) {
      const int a = face[i], b = face[(i + 1) % face.size()];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  return edges.size();
}

namespace {

struct MergedGroup {
  std::vector<std::size_t> facets;
  std::vector<int> cycle;    // boundary vertex cycle
  std::vector<int> corners;  // cycle minus straight vertices
  std::set<int> all_vertices;
  std::set<int> interior;    // vertices whose whole star lies in the group
};

std::int64_t orient_in_plane(const Point3& n, const Point3& a, const Point3& b, const Point3& c) {
  // Sign of ((b-a) x (c-a)) . n, evaluated on the coordinate plane where n
  // is largest so the products stay within 64 bits.
  const Point3 u = b - a, v = c - a;
  const std::int64_t ax = n.x < 0 ? -n.x : n.x, ay = n.y < 0 ? -n.y : n.y, az = n.z < 0 ? -n.z : n.z;
  std::int64_t d, s;
  if (ax >= ay && ax >= az) {
    d = u.y * v.z - u.z * v.y;
    s = n.x;
  } else if (ay >= az) {
    d = u.z * v.x - u.x * v.z;
    s = n.y;
  } else {
    d = u.x * v.y - u.y * v.x;
    s = n.z;
  }
  if (d == 0) return 0;
  return (d > 0) == (s > 0) ? 1 : -1;
}

}  // namespace

MergeResult merge_coplanar(const Realization& r) {
  const RealizationClass cls = classify(r);
  if (cls.level < Level::Linear) throw GeometryError("merge_coplanar requires a linear realization");
  const auto& facets = r.tri.facets();
  const std::size_t fcount = facets.size();

  std::vector<std::size_t> parent(fcount);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<Facet, std::size_t> index;
  for (std::size_t i = 0; i < fcount; ++i) index[facets[i]] = i;
  for (const auto& [f, g] : cls.coplanar_pairs) parent[find(index[f])] = find(index[g]);

  std::map<std::size_t, MergedGroup> groups_by_root;
  for (std::size_t i = 0; i < fcount; ++i) groups_by_root[find(i)].facets.push_back(i);
  std::vector<MergedGroup> groups;
  for (auto& [root, g] : groups_by_root) groups.push_back(std::move(g));

  std::vector<int> star_size(r.tri.n() + 1, 0);
  for (const Facet& f : facets)
    for (int v : f) ++star_size[v];

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    MergedGroup& g = groups[gi];
    std::map<Edge, int> edge_uses;
    std::map<int, int> vertex_uses;
    for (std::size_t fi : g.facets) {
      const Facet& f = facets[fi];
      for (int k = 0; k < 3; ++k) {
        const int a = f[k], b = f[(k + 1) % 3];
        ++edge_uses[{std::min(a, b), std::max(a, b)}];
        ++vertex_uses[a];
      }
    }
    std::map<int, std::vector<int>> boundary_adj;
    int boundary_edges = 0;
    for (const auto& [e, uses] : edge_uses) {
      if (uses == 1) {
        boundary_adj[e.first].push_back(e.second);
        boundary_adj[e.second].push_back(e.first);
        ++boundary_edges;
      }
    }
    for (const auto& [v, uses] : vertex_uses) {
      g.all_vertices.insert(v);
      if (uses == star_size[v]) g.interior.insert(v);
    }
    const int euler = static_cast<int>(vertex_uses.size()) - static_cast<int>(edge_uses.size()) +
                      static_cast<int>(g.facets.size());
    bool simple_cycle = !boundary_adj.empty();
    for (const auto& [v, nb] : boundary_adj)
      if (nb.size() != 2) simple_cycle = false;
    if (simple_cycle) {
      int prev = -1, cur = boundary_adj.begin()->first;
      do {
        g.cycle.push_back(cur);
        const auto& nb = boundary_adj[cur];
        const int next = nb[0] != prev ? nb[0] : nb[1];
        prev = cur;
        cur = next;
      } while (cur != g.cycle.front() && g.cycle.size() <= boundary_adj.size());
      simple_cycle = static_cast<int>(g.cycle.size()) == boundary_edges;
    }
    if (!simple_cycle || euler != 1)
      return MergeFailure{"coplanar union " + std::to_string(gi) + " is not a disk", {gi}};

    const int k = static_cast<int>(g.cycle.size());
    for (int i = 0; i < k; ++i) {
      const int u = g.cycle[(i + k - 1) % k], w = g.cycle[i], x = g.cycle[(i + 1) % k];
      if (!kernel::on_open_segment(r.at(w), r.at(u), r.at(x))) g.corners.push_back(w);
    }
    const Facet& f0 = facets[g.facets.front()];
    const Point3 normal = cross(r.at(f0[1]) - r.at(f0[0]), r.at(f0[2]) - r.at(f0[0]));
    const int c = static_cast<int>(g.corners.size());
    int turn_sign = 0;
    bool convex = c >= 3;
    for (int i = 0; i < c && convex; ++i) {
      const std::int64_t s = orient_in_plane(normal, r.at(g.corners[(i + c - 1) % c]),
                                             r.at(g.corners[i]), r.at(g.corners[(i + 1) % c]));
      if (s == 0 || (turn_sign != 0 && s != turn_sign)) convex = false;
      turn_sign = static_cast<int>(s);
    }
    if (!convex)
      return MergeFailure{"coplanar union " + std::to_string(gi) + " is not a strictly convex polygon",
                          {gi}};
  }

  std::set<int> kept;
  for (const MergedGroup& g : groups) kept.insert(g.corners.begin(), g.corners.end());

  // Map edges of each face: corner pair plus the straight vertices between.
  struct MapEdge {
    int a, b;
    std::set<int> verts;
  };
  std::vector<std::vector<MapEdge>> map_edges(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const MergedGroup& g = groups[gi];
    const int k = static_cast<int>(g.cycle.size());
    int start = 0;
    while (std::find(g.corners.begin(), g.corners.end(), g.cycle[start]) == g.corners.end()) ++start;
    MapEdge cur{g.cycle[start], 0, {g.cycle[start]}};
    for (int step = 1; step <= k; ++step) {
      const int v = g.cycle[(start + step) % k];
      cur.verts.insert(v);
      if (std::find(g.corners.begin(), g.corners.end(), v) != g.corners.end()) {
        cur.b = v;
        map_edges[gi].push_back(cur);
        cur = MapEdge{v, 0, {v}};
      } else if (kept.count(v)) {
        return MergeFailure{"vertex " + std::to_string(v) + " is a corner of one face but lies inside an edge of face " +
                                std::to_string(gi),
                            {gi}};
      }
    }
  }

  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      std::vector<int> common;
      std::set_intersection(groups[i].all_vertices.begin(), groups[i].all_vertices.end(),
                            groups[j].all_vertices.begin(), groups[j].all_vertices.end(),
                            std::back_inserter(common));
      if (common.empty()) continue;
      const std::set<int> cs(common.begin(), common.end());
      if (cs.size() == 1 && kept.count(*cs.begin())) {
        const int v = *cs.begin();
        const auto& ci = groups[i].corners;
        const auto& cj = groups[j].corners;
        if (std::find(ci.begin(), ci.end(), v) != ci.end() && std::find(cj.begin(), cj.end(), v) != cj.end())
          continue;
      }
      bool shared_edge = false;
      for (const MapEdge& ei : map_edges[i]) {
        if (ei.verts != cs) continue;
        for (const MapEdge& ej : map_edges[j])
          if (ej.verts == cs && std::minmax(ei.a, ei.b) == std::minmax(ej.a, ej.b)) shared_edge = true;
      }
      if (!shared_edge)
        return MergeFailure{"faces " + std::to_string(i) + " and " + std::to_string(j) +
                                " meet in more than a common edge or vertex",
                            {i, j}};
    }
  }

  PolyhedralMap map;
  map.vertices.assign(kept.begin(), kept.end());
  for (const MergedGroup& g : groups) {
    map.faces.push_back(g.corners);
    std::vector<Facet> prov;
    for (std::size_t fi : g.facets) prov.push_back(facets[fi]);
    map.provenance.push_back(std::move(prov));
  }
  return map;
}

}  // namespace torusforge
