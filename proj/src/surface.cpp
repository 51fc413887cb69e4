#include "torusforge/surface.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <numeric>
#include <set>

namespace torusforge {

namespace {

std::string edge_name(int a, int b) {
  return "{" + std::to_string(a) + "," + std::to_string(b) + "}";
}

// Facets through each edge; edge key a*(n+1)+b with a<b.
std::map<Edge, std::vector<int>> edge_facets(const Triangulation& t) {
  std::map<Edge, std::vector<int>> out;
  for (std::size_t i = 0; i < t.facets().size(); ++i) {
    const Facet& f = t.facets()[i];
    out[{f[0], f[1]}].push_back(static_cast<int>(i));
    out[{f[0], f[2]}].push_back(static_cast<int>(i));
    out[{f[1], f[2]}].push_back(static_cast<int>(i));
  }
  return out;
}

// Cyclic link of every vertex of a closed surface (index 0 unused).
std::vector<std::vector<int>> link_cycles(const Triangulation& t) {
  const int n = t.n();
  std::vector<std::vector<std::pair<int, int>>> link_edges(n + 1);
  for (const Facet& f : t.facets()) {
    link_edges[f[0]].push_back({f[1], f[2]});
    link_edges[f[1]].push_back({f[0], f[2]});
    link_edges[f[2]].push_back({f[0], f[1]});
  }
  std::vector<std::vector<int>> cycles(n + 1);
  for (int v = 1; v <= n; ++v) {
    std::map<int, std::vector<int>> adj;
    for (auto [a, b] : link_edges[v]) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (const auto& [w, nb] : adj) {
      if (nb.size() != 2)
        throw SurfaceError("link of vertex " + std::to_string(v) + " is not a cycle at " +
                           std::to_string(w));
    }
    std::vector<int>& cyc = cycles[v];
    int prev = -1, cur = adj.begin()->first;
    do {
      cyc.push_back(cur);
      const auto& nb = adj[cur];
      const int next = nb[0] != prev ? nb[0] : nb[1];
      prev = cur;
      cur = next;
    } while (cur != cyc.front());
    if (cyc.size() != adj.size())
      throw SurfaceError("link of vertex " + std::to_string(v) + " is disconnected");
  }
  return cycles;
}

}  // namespace

Triangulation::Triangulation(int n, std::vector<Facet> facets) : n_(n), facets_(std::move(facets)) {
  if (n < 0) throw SurfaceError("negative vertex count");
  std::vector<bool> used(n + 1, false);
  for (Facet& f : facets_) {
    for (int v : f) {
      if (v < 1 || v > n) throw SurfaceError("label " + std::to_string(v) + " out of range 1.." + std::to_string(n));
      used[v] = true;
    }
    std::sort(f.begin(), f.end());
    if (f[0] == f[1] || f[1] == f[2]) throw SurfaceError("degenerate facet");
  }
  std::sort(facets_.begin(), facets_.end());
  if (std::adjacent_find(facets_.begin(), facets_.end()) != facets_.end())
    throw SurfaceError("facet repeated");
  for (int v = 1; v <= n; ++v)
    if (!used[v]) throw SurfaceError("label " + std::to_string(v) + " unused");
}

std::vector<Edge> Triangulation::edges() const {
  std::vector<Edge> out;
  out.reserve(facets_.size() * 3);
  for (const Facet& f : facets_) {
    out.push_back({f[0], f[1]});
    out.push_back({f[0], f[2]});
    out.push_back({f[1], f[2]});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> Triangulation::degrees() const {
  std::vector<int> deg(n_ + 1, 0);
  for (auto [a, b] : edges()) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

Triangulation Triangulation::relabeled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw SurfaceError("permutation size mismatch");
  std::vector<Facet> out;
  out.reserve(facets_.size());
  for (const Facet& f : facets_) out.push_back({perm[f[0] - 1], perm[f[1] - 1], perm[f[2] - 1]});
  return Triangulation(n_, std::move(out));
}

// ---------------------------------------------------------------------------
// Text format

Triangulation parse_triangulation_line(std::string_view line, std::size_t line_no) {
  auto fail = [line_no](const std::string& what) -> ParseError { return ParseError(line_no, what); };
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) throw fail("missing ':'");

  auto parse_int = [&](std::string_view tok) {
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size())
      throw fail("malformed integer '" + std::string(tok) + "'");
    return v;
  };

  const int n = parse_int(line.substr(0, colon));
  if (n < 1) throw fail("vertex count must be positive");
  std::vector<Facet> facets;
  std::set<Facet> seen;
  std::string_view rest = line.substr(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    Facet f{};
    int k = 0;
    std::size_t pos = 0;
    while (pos < item.size()) {
      while (pos < item.size() && (item[pos] == ' ' || item[pos] == '\t')) ++pos;
      if (pos >= item.size()) break;
      std::size_t end = pos;
      while (end < item.size() && item[end] != ' ' && item[end] != '\t') ++end;
      if (k == 3) throw fail("facet with more than three labels");
      f[k++] = parse_int(item.substr(pos, end - pos));
      pos = end;
    }
    if (k != 3) throw fail("facet with " + std::to_string(k) + " labels");
    for (int v : f)
      if (v < 1 || v > n) throw fail("label " + std::to_string(v) + " out of range 1.." + std::to_string(n));
    if (f[0] == f[1] || f[0] == f[2] || f[1] == f[2]) throw fail("degenerate facet");
    Facet key = f;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) throw fail("facet repeated");
    facets.push_back(f);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  try {
    return Triangulation(n, std::move(facets));
  } catch (const SurfaceError& e) {
    throw fail(e.what());
  }
}

std::vector<Triangulation> parse_triangulations(std::string_view text) {
  std::vector<Triangulation> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(parse_triangulation_line(line, line_no));
  }
  return out;
}

std::string serialize(const Triangulation& t) {
  std::string out = std::to_string(t.n()) + ":";
  bool first = true;
  for (const Facet& f : t.facets()) {
    out += first ? " " : ", ";
    first = false;
    out += std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

SurfaceReport validate(const Triangulation& t) {
  const int n = t.n();
  const auto ef = edge_facets(t);
  for (const auto& [e, fs] : ef) {
    if (fs.size() != 2)
      throw SurfaceError("edge " + edge_name(e.first, e.second) + " lies in " +
                         std::to_string(fs.size()) + " facets");
  }
  link_cycles(t);  // throws on a bad vertex link

  SurfaceReport r;
  r.edge_count = ef.size();
  r.facet_count = t.facet_count();
  r.euler = n - static_cast<int>(r.edge_count) + static_cast<int>(r.facet_count);

  // Components via union-find on vertices.
  std::vector<int> parent(n + 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Facet& f : t.facets()) {
    parent[find(f[1])] = find(f[0]);
    parent[find(f[2])] = find(f[0]);
  }
  std::map<int, int> comp_euler;
  for (int v = 1; v <= n; ++v) comp_euler[find(v)] += 1;
  for (const auto& [e, fs] : ef) comp_euler[find(e.first)] -= 1;
  for (const Facet& f : t.facets()) comp_euler[find(f[0])] += 1;
  r.connected = comp_euler.size() <= 1;

  // Orientation propagation. orient[i] = +1 keeps the sorted order, -1 flips it.
  const auto& facets = t.facets();
  std::vector<int> orient(facets.size(), 0);
  auto has_directed = [&](int fi, int a, int b) {
    const Facet& f = facets[fi];
    for (int k = 0; k < 3; ++k) {
      int x = f[k], y = f[(k + 1) % 3];
      if (orient[fi] < 0) std::swap(x, y);
      if (x == a && y == b) return true;
    }
    return false;
  };
  r.orientable = true;
  for (std::size_t seed = 0; seed < facets.size() && r.orientable; ++seed) {
    if (orient[seed] != 0) continue;
    orient[seed] = 1;
    std::vector<int> stack{static_cast<int>(seed)};
    while (!stack.empty() && r.orientable) {
      const int fi = stack.back();
      stack.pop_back();
      const Facet& f = facets[fi];
      for (int k = 0; k < 3; ++k) {
        const int a = std::min(f[k], f[(k + 1) % 3]), b = std::max(f[k], f[(k + 1) % 3]);
        const auto& pair = ef.at({a, b});
        const int gi = pair[0] == fi ? pair[1] : pair[0];
        // Consistent orientations traverse the shared edge in opposite directions.
        const bool fab = has_directed(fi, a, b);
        if (orient[gi] == 0) {
          orient[gi] = 1;
          if (has_directed(gi, a, b) == fab) orient[gi] = -1;
          stack.push_back(gi);
        } else if (has_directed(gi, a, b) == fab) {
          r.orientable = false;
        }
      }
    }
  }
  if (r.orientable) {
    int g = 0;
    for (const auto& [root, chi] : comp_euler) g += (2 - chi) / 2;
    r.genus = g;
  }
  return r;
}

int heawood_lower_bound(int chi) {
  const long long radicand = 49 - 24LL * chi;
  if (radicand < 0) throw SurfaceError("Euler characteristic too large for Heawood bound");
  // n >= (7 + sqrt(D)) / 2  <=>  2n - 7 >= 0 and (2n - 7)^2 >= D.
  for (long long n = 4;; ++n) {
    const long long s = 2 * n - 7;
    if (s >= 0 && s * s >= radicand) return static_cast<int>(n);
  }
}

bool is_neighborly(const Triangulation& t) {
  const long long n = t.n();
  return static_cast<long long>(t.edge_count()) == n * (n - 1) / 2;
}

bool is_torus(const Triangulation& t) {
  try {
    const SurfaceReport r = validate(t);
    return r.connected && r.orientable && r.euler == 0;
  } catch (const SurfaceError&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Permutations and symmetry

Permutation identity_permutation(int n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 1);
  return p;
}

Permutation compose(std::span<const int> outer, std::span<const int> inner) {
  Permutation out(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) out[i] = outer[inner[i] - 1];
  return out;
}

Permutation inverse(std::span<const int> perm) {
  Permutation out(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[perm[i] - 1] = static_cast<int>(i) + 1;
  return out;
}

std::vector<Permutation> automorphisms(const Triangulation& t) {
  const int n = t.n();
  const std::set<Facet> facet_set(t.facets().begin(), t.facets().end());
  const std::vector<int> deg = t.degrees();
  std::vector<std::vector<Facet>> star(n + 1);
  for (const Facet& f : t.facets())
    for (int v : f) star[v].push_back(f);

  // Vertex order: breadth first, so each new vertex shares facets with
  // already mapped ones and constraints bite early.
  std::vector<int> order;
  std::vector<bool> seen(n + 1, false);
  for (int s = 1; s <= n; ++s) {
    if (seen[s]) continue;
    seen[s] = true;
    order.push_back(s);
    for (std::size_t i = order.size() - 1; i < order.size(); ++i) {
      for (const Facet& f : star[order[i]])
        for (int w : f)
          if (!seen[w]) {
            seen[w] = true;
            order.push_back(w);
          }
    }
  }

  std::vector<Permutation> out;
  Permutation img(n, 0);
  std::vector<bool> used(n + 1, false);
  auto consistent = [&](int v) {
    for (const Facet& f : star[v]) {
      if (img[f[0] - 1] && img[f[1] - 1] && img[f[2] - 1]) {
        Facet g{img[f[0] - 1], img[f[1] - 1], img[f[2] - 1]};
        std::sort(g.begin(), g.end());
        if (!facet_set.count(g)) return false;
      }
    }
    return true;
  };
  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (depth == order.size()) {
      out.push_back(img);
      return;
    }
    const int v = order[depth];
    for (int w = 1; w <= n; ++w) {
      if (used[w] || deg[w] != deg[v]) continue;
      img[v - 1] = w;
      used[w] = true;
      if (consistent(v)) self(self, depth + 1);
      used[w] = false;
      img[v - 1] = 0;
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  const Permutation id = identity_permutation(n);
  std::stable_partition(out.begin(), out.end(), [&](const Permutation& p) { return p == id; });
  return out;
}

namespace {

// Lexicographically smallest labeling. Label 1 goes to a vertex of minimum
// degree (a smaller first star always wins). Then vertices are processed in
// label order; within the link of the current vertex, the smallest labeled
// link vertex with an unlabeled link neighbour hands the next label to that
// neighbour. Ties (two unlabeled neighbours, or a fully unlabeled link) branch.
struct CanonicalSearch {
  const Triangulation& t;
  std::vector<std::vector<int>> links;
  std::vector<Facet> best;
  Permutation best_perm;
  bool have_best = false;

  explicit CanonicalSearch(const Triangulation& tri) : t(tri), links(link_cycles(tri)) {}

  void finish(const std::vector<int>& lab) {
    std::vector<Facet> fs;
    fs.reserve(t.facet_count());
    for (const Facet& f : t.facets()) {
      Facet g{lab[f[0]], lab[f[1]], lab[f[2]]};
      std::sort(g.begin(), g.end());
      fs.push_back(g);
    }
    std::sort(fs.begin(), fs.end());
    if (!have_best || fs < best) {
      best = std::move(fs);
      best_perm.assign(lab.begin() + 1, lab.end());
      have_best = true;
    }
  }

  // lab: vertex -> label (0 unlabeled); inv: label -> vertex.
  void run(std::vector<int> lab, std::vector<int> inv, int next, int current) {
    const int n = t.n();
    while (true) {
      if (current > n) {
        finish(lab);
        return;
      }
      if (current >= next) throw SurfaceError("canonical_form requires a connected surface");
      const std::vector<int>& cyc = links[inv[current]];
      const int d = static_cast<int>(cyc.size());
      int best_idx = -1;
      bool any_labeled = false, any_unlabeled = false;
      for (int i = 0; i < d; ++i) {
        const int w = cyc[i];
        if (lab[w] == 0) {
          any_unlabeled = true;
          continue;
        }
        any_labeled = true;
        const bool open = lab[cyc[(i + 1) % d]] == 0 || lab[cyc[(i + d - 1) % d]] == 0;
        if (open && (best_idx < 0 || lab[w] < lab[cyc[best_idx]])) best_idx = i;
      }
      if (!any_unlabeled) {
        ++current;
        continue;
      }
      std::vector<int> candidates;
      if (!any_labeled) {
        candidates = cyc;
      } else {
        const int nxt = cyc[(best_idx + 1) % d], prv = cyc[(best_idx + d - 1) % d];
        if (lab[nxt] == 0) candidates.push_back(nxt);
        if (lab[prv] == 0 && prv != nxt) candidates.push_back(prv);
      }
      if (candidates.size() == 1) {
        lab[candidates[0]] = next;
        inv[next] = candidates[0];
        ++next;
        continue;
      }
      for (int c : candidates) {
        auto lab2 = lab;
        auto inv2 = inv;
        lab2[c] = next;
        inv2[next] = c;
        run(std::move(lab2), std::move(inv2), next + 1, current);
      }
      return;
    }
  }
};

}  // namespace

std::pair<Triangulation, Permutation> canonical_labeling(const Triangulation& t) {
  const int n = t.n();
  CanonicalSearch search(t);
  const std::vector<int> deg = t.degrees();
  const int min_deg = *std::min_element(deg.begin() + 1, deg.end());
  for (int v = 1; v <= n; ++v) {
    if (deg[v] != min_deg) continue;
    std::vector<int> lab(n + 1, 0), inv(n + 2, 0);
    lab[v] = 1;
    inv[1] = v;
    search.run(std::move(lab), std::move(inv), 2, 1);
  }
  return {Triangulation(n, std::move(search.best)), std::move(search.best_perm)};
}

Triangulation canonical_form(const Triangulation& t) { return canonical_labeling(t).first; }

Triangulation moebius_torus() {
  std::vector<Facet> fs;
  for (int i = 0; i < 7; ++i) {
    fs.push_back({i % 7 + 1, (i + 1) % 7 + 1, (i + 3) % 7 + 1});
    fs.push_back({i % 7 + 1, (i + 2) % 7 + 1, (i + 3) % 7 + 1});
  }
  return canonical_form(Triangulation(7, std::move(fs)));
}

Triangulation tetrahedron_boundary() {
  return Triangulation(4, {{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}});
}

}  // namespace torusforge
