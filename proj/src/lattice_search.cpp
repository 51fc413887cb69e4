#include "torusforge/lattice_search.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <climits>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace torusforge {

// ---------------------------------------------------------------------------
// Cuboids and their symmetries

Cuboid Cuboid::canonical() const {
  std::array<int, 3> s{a, b, c};
  std::sort(s.begin(), s.end());
  return {s[0], s[1], s[2]};
}

std::vector<Point3> Cuboid::points() const {
  std::vector<Point3> out;
  out.reserve(point_count());
  for (int x = 0; x <= a; ++x)
    for (int y = 0; y <= b; ++y)
      for (int z = 0; z <= c; ++z) out.push_back({x, y, z});
  return out;
}

bool Cuboid::contains(const Point3& p) const {
  return p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x <= a && p.y <= b && p.z <= c;
}

std::string Cuboid::to_string() const {
  return std::to_string(a) + "x" + std::to_string(b) + "x" + std::to_string(c);
}

Cuboid Cuboid::parse(std::string_view s) {
  Cuboid out;
  std::string text(s);
  for (char& ch : text)
    if (ch == 'x' || ch == 'X' || ch == ',') ch = ' ';
  std::istringstream in(text);
  if (!(in >> out.a >> out.b >> out.c) || out.a < 0 || out.b < 0 || out.c < 0)
    throw std::invalid_argument("bad cuboid '" + std::string(s) + "', expected AxBxC");
  std::string rest;
  if (in >> rest) throw std::invalid_argument("bad cuboid '" + std::string(s) + "'");
  return out;
}

bool cuboid_less(const Cuboid& x, const Cuboid& y) {
  if (x.point_count() != y.point_count()) return x.point_count() < y.point_count();
  const Cuboid cx = x.canonical(), cy = y.canonical();
  return std::tie(cx.a, cx.b, cx.c) < std::tie(cy.a, cy.b, cy.c);
}

std::vector<Cuboid> cuboids_in_order(int n, int max_points) {
  std::vector<Cuboid> out;
  for (int a = 0; a + 1 <= max_points; ++a)
    for (int b = a; (a + 1) * (b + 1) <= max_points; ++b)
      for (int c = b; (a + 1) * (b + 1) * (c + 1) <= max_points; ++c) {
        const Cuboid cub{a, b, c};
        if (cub.point_count() >= n) out.push_back(cub);
      }
  std::sort(out.begin(), out.end(), cuboid_less);
  return out;
}

Cuboid bounding_cuboid(const std::vector<Point3>& pts) {
  if (pts.empty()) return {};
  Point3 lo = pts.front(), hi = pts.front();
  for (const Point3& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Point3 d = hi - lo;
  return Cuboid{static_cast<int>(d.x), static_cast<int>(d.y), static_cast<int>(d.z)}.canonical();
}

Point3 CuboidSymmetry::apply(const Cuboid& c, const Point3& p) const {
  const std::int64_t src[3] = {p.x, p.y, p.z};
  const std::int64_t side[3] = {c.a, c.b, c.c};
  std::int64_t dst[3];
  for (int i = 0; i < 3; ++i) dst[i] = flip[i] ? side[i] - src[perm[i]] : src[perm[i]];
  return {dst[0], dst[1], dst[2]};
}

std::vector<CuboidSymmetry> cuboid_symmetries(const Cuboid& c) {
  const int side[3] = {c.a, c.b, c.c};
  std::vector<CuboidSymmetry> out;
  std::array<int, 3> perm{0, 1, 2};
  do {
    if (side[perm[0]] != side[0] || side[perm[1]] != side[1] || side[perm[2]] != side[2]) continue;
    for (int mask = 0; mask < 8; ++mask) {
      CuboidSymmetry g;
      g.perm = perm;
      for (int i = 0; i < 3; ++i) g.flip[i] = (mask >> i) & 1;
      out.push_back(g);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::string_view to_string(SearchMode m) {
  return m == SearchMode::GeneralPosition ? "gp" : "linear";
}

std::string_view to_string(SearchGoal g) {
  switch (g) {
    case SearchGoal::FirstWitness: return "first";
    case SearchGoal::AllUpToSymmetry: return "all";
    case SearchGoal::ProveNone: return "none";
  }
  return "?";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Witness: return "Witness";
    case Outcome::None: return "None";
    case Outcome::Timeout: return "Timeout";
  }
  return "?";
}

SearchMode parse_mode(std::string_view s) {
  if (s == "gp" || s == "GeneralPosition") return SearchMode::GeneralPosition;
  if (s == "linear" || s == "Linear") return SearchMode::Linear;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "', expected gp or linear");
}

SearchGoal parse_goal(std::string_view s) {
  if (s == "first" || s == "FirstWitness") return SearchGoal::FirstWitness;
  if (s == "all" || s == "AllUpToSymmetry") return SearchGoal::AllUpToSymmetry;
  if (s == "none" || s == "ProveNone") return SearchGoal::ProveNone;
  throw std::invalid_argument("unknown goal '" + std::string(s) + "', expected first, all or none");
}

std::string_view to_string(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::Auto: return "auto";
    case SearchStrategy::VertexFirst: return "vertex";
    case SearchStrategy::PointSetFirst: return "pointset";
  }
  return "?";
}

SearchStrategy parse_strategy(std::string_view s) {
  if (s == "auto" || s == "Auto") return SearchStrategy::Auto;
  if (s == "vertex" || s == "VertexFirst") return SearchStrategy::VertexFirst;
  if (s == "pointset" || s == "PointSetFirst") return SearchStrategy::PointSetFirst;
  throw std::invalid_argument("unknown strategy '" + std::string(s) + "', expected auto, vertex or pointset");
}

bool edge_count_obstruction([[maybe_unused]] const Cuboid& c, int n, int max_edges) {
  return 3 * n > max_edges;
}

// ---------------------------------------------------------------------------
// Point sets and per-cuboid tables

namespace {

constexpr int kMaxPoints = 128;
constexpr int kPointSetAutoLimit = 64;

struct Mask {
  std::uint64_t w[2] = {0, 0};

  void set(int i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool test(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  bool any() const { return (w[0] | w[1]) != 0; }
  int count() const { return std::popcount(w[0]) + std::popcount(w[1]); }
  Mask& operator|=(const Mask& o) {
    w[0] |= o.w[0];
    w[1] |= o.w[1];
    return *this;
  }
  friend Mask operator&(const Mask& x, const Mask& y) { return {{x.w[0] & y.w[0], x.w[1] & y.w[1]}}; }
  friend Mask operator|(const Mask& x, const Mask& y) { return {{x.w[0] | y.w[0], x.w[1] | y.w[1]}}; }
  friend Mask operator~(const Mask& x) { return {{~x.w[0], ~x.w[1]}}; }
  friend bool operator==(const Mask&, const Mask&) = default;
};

std::size_t triple_rank(int i, int j, int k) {
  // i < j < k
  const auto c3 = static_cast<std::size_t>(k) * (k - 1) * (k - 2) / 6;
  const auto c2 = static_cast<std::size_t>(j) * (j - 1) / 2;
  return c3 + c2 + static_cast<std::size_t>(i);
}

struct Tables {
  Cuboid cuboid;
  int P = 0;
  std::vector<Point3> pts;
  Mask all;
  std::vector<Mask> seg_interior;  // P*P
  std::vector<Mask> line;          // P*P, every lattice point on the line
  std::vector<std::vector<std::uint8_t>> sym;  // point permutations, identity first

  std::once_flag plane_once;
  std::vector<Mask> plane;  // by triple_rank, empty for collinear triples

  using PointSets = std::vector<std::vector<std::uint8_t>>;
  std::mutex sets_mu;
  std::map<std::pair<int, bool>, std::shared_ptr<const PointSets>> gp_sets;  // (size, canonical)

  explicit Tables(const Cuboid& c) : cuboid(c), P(c.point_count()), pts(c.points()) {
    for (int i = 0; i < P; ++i) all.set(i);
    seg_interior.resize(static_cast<std::size_t>(P) * P);
    line.resize(static_cast<std::size_t>(P) * P);
    for (int p = 0; p < P; ++p)
      for (int q = 0; q < P; ++q) {
        if (p == q) continue;
        Mask& si = seg_interior[p * P + q];
        Mask& li = line[p * P + q];
        for (int r = 0; r < P; ++r) {
          if (!collinear(pts[p], pts[q], pts[r])) continue;
          li.set(r);
          if (kernel::on_open_segment(pts[r], pts[p], pts[q])) si.set(r);
        }
      }
    for (const CuboidSymmetry& g : cuboid_symmetries(c)) {
      std::vector<std::uint8_t> img(P);
      for (int p = 0; p < P; ++p) img[p] = static_cast<std::uint8_t>(index_of(g.apply(c, pts[p])));
      sym.push_back(std::move(img));
    }
  }

  int index_of(const Point3& p) const {
    return static_cast<int>((p.x * (cuboid.b + 1) + p.y) * (cuboid.c + 1) + p.z);
  }

  void build_planes() {
    std::call_once(plane_once, [this] {
      plane.assign(triple_rank(0, 1, P), Mask{});
      for (int k = 2; k < P; ++k)
        for (int j = 1; j < k; ++j)
          for (int i = 0; i < j; ++i) {
            const Point3 nrm = cross(pts[j] - pts[i], pts[k] - pts[i]);
            if (nrm == Point3{}) continue;
            Mask& m = plane[triple_rank(i, j, k)];
            const std::int64_t off = dot(nrm, pts[i]);
            for (int r = 0; r < P; ++r)
              if (dot(nrm, pts[r]) == off) m.set(r);
          }
    });
  }

  const Mask& plane_of(int i, int j, int k) const {
    if (i > j) std::swap(i, j);
    if (j > k) std::swap(j, k);
    if (i > j) std::swap(i, j);
    return plane[triple_rank(i, j, k)];
  }

  Mask closed_triangle(int p, int q, int r) const {
    Mask m;
    const Point3 &a = pts[p], &b = pts[q], &c = pts[r];
    const Point3 nrm = cross(b - a, c - a);
    const std::int64_t off = dot(nrm, a);
    for (int s = 0; s < P; ++s)
      if (dot(nrm, pts[s]) == off && kernel::in_closed_triangle(pts[s], a, b, c)) m.set(s);
    return m;
  }
};

std::shared_ptr<Tables> tables_for(const Cuboid& c) {
  static std::mutex mu;
  static std::map<std::array<int, 3>, std::shared_ptr<Tables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{c.a, c.b, c.c}];
  if (!slot) slot = std::make_shared<Tables>(c);
  return slot;
}

enum Rule : int {
  kSymmetry,
  kBlockedPoint,
  kGpForbidden,
  kEdgeThroughVertex,
  kEdgeCrossing,
  kDegenerateFacet,
  kFacetCoversVertex,
  kFacetIntersection,
  kGpLeaf,
  kRuleCount
};

constexpr const char* kRuleNames[kRuleCount] = {
    "symmetry",       "blocked_point",       "gp_forbidden",       "edge_through_vertex",
    "edge_crossing",  "degenerate_facet",    "facet_covers_vertex", "facet_intersection",
    "gp_leaf"};

// Static placement plan.
struct Plan {
  int n = 0;
  std::vector<int> order;                        // labels by depth
  std::vector<std::vector<int>> back_edges;      // placed neighbours per depth
  std::vector<std::vector<Facet>> new_facets;    // facets completed per depth
};

Plan make_plan(const Triangulation& t) {
  Plan plan;
  plan.n = t.n();
  const int n = t.n();
  std::vector<std::vector<int>> adj(n + 1);
  for (const Edge& e : t.edges()) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  std::vector<int> pos(n + 1, -1);
  auto completed_if_placed = [&](int v) {
    int count = 0;
    for (const Facet& f : t.facets()) {
      if (f[0] != v && f[1] != v && f[2] != v) continue;
      bool ok = true;
      for (int u : f)
        if (u != v && pos[u] < 0) ok = false;
      count += ok;
    }
    return count;
  };
  for (int depth = 0; depth < n; ++depth) {
    int best = -1;
    std::array<int, 3> best_key{};
    for (int v = 1; v <= n; ++v) {
      if (pos[v] >= 0) continue;
      int placed_nb = 0;
      for (int u : adj[v]) placed_nb += pos[u] >= 0;
      const std::array<int, 3> key{placed_nb, completed_if_placed(v), static_cast<int>(adj[v].size())};
      if (best < 0 || key > best_key) {
        best = v;
        best_key = key;
      }
    }
    pos[best] = depth;
    plan.order.push_back(best);
  }
  plan.back_edges.resize(n);
  plan.new_facets.resize(n);
  for (int d = 0; d < n; ++d) {
    const int v = plan.order[d];
    for (int u : adj[v])
      if (pos[u] < d) plan.back_edges[d].push_back(u);
    std::sort(plan.back_edges[d].begin(), plan.back_edges[d].end(),
              [&](int x, int y) { return pos[x] < pos[y]; });
  }
  for (const Facet& f : t.facets()) {
    const int last = std::max({pos[f[0]], pos[f[1]], pos[f[2]]});
    plan.new_facets[last].push_back(f);
  }
  return plan;
}

using Clock = std::chrono::steady_clock;

struct Shared {
  const SearchTask* task = nullptr;
  Tables* tables = nullptr;
  const Plan* plan = nullptr;
  bool gp = false;
  bool prune_planes = false;
  bool stop_at_first = false;
  Clock::time_point start;
  std::atomic<std::uint64_t> nodes{0};
  std::atomic<bool> timeout{false};
  std::atomic<int> best_branch{INT_MAX};
  std::vector<bool> aut_rep;  // by label: smallest in its automorphism orbit
  int aut_reps = 0;
};

bool out_of_time(const Shared& sh) {
  const double limit = sh.task->budget.max_seconds;
  return limit > 0 && std::chrono::duration<double>(Clock::now() - sh.start).count() > limit;
}

// Counts one node against the budget; false once the search must stop.
bool tick(Shared& sh) {
  const std::uint64_t total = sh.nodes.fetch_add(1, std::memory_order_relaxed) + 1;
  const Budget& b = sh.task->budget;
  if (b.max_nodes && total > b.max_nodes) sh.timeout = true;
  if ((total & 1023) == 0 && out_of_time(sh)) sh.timeout = true;
  return !sh.timeout.load(std::memory_order_relaxed);
}

struct Worker {
  Shared& sh;
  const Tables& tb;
  const Plan& plan;
  int P;
  std::array<std::uint64_t, kRuleCount> prunes{};
  std::uint64_t nodes = 0;
  std::vector<int> pt;                      // point index per label, -1 if free
  std::vector<std::pair<int, int>> edges;   // placed edges (labels)
  std::vector<Facet> facets;                // completed facets
  std::vector<int> placed_points;           // by depth
  std::vector<std::vector<int>> stab;       // symmetry stabilizer per depth
  std::vector<std::vector<std::uint8_t>> solutions;
  int branch = 0;
  bool abort = false;

  explicit Worker(Shared& s)
      : sh(s), tb(*s.tables), plan(*s.plan), P(s.tables->P), pt(s.plan->n + 1, -1),
        stab(s.plan->n + 1) {
    stab[0].resize(tb.sym.size());
    for (std::size_t i = 0; i < tb.sym.size(); ++i) stab[0][i] = static_cast<int>(i);
    if (!sh.task->symmetry_breaking) stab[0] = {0};
  }

  const Point3& at(int label) const { return tb.pts[pt[label]]; }

  bool check_budget() { return tick(sh); }

  bool stopped() const {
    return abort || sh.timeout.load(std::memory_order_relaxed) ||
           (sh.stop_at_first && sh.best_branch.load(std::memory_order_relaxed) < branch);
  }

  // Symmetry filter: p must not exceed its image under any element that
  // fixes the prefix; returns false when a smaller image exists.
  bool symmetry_ok(int depth, int p) {
    std::vector<int>& next = stab[depth + 1];
    next.clear();
    for (int g : stab[depth]) {
      const int img = tb.sym[g][p];
      if (img < p) return false;
      if (img == p) next.push_back(g);
    }
    return true;
  }

  // Candidates at a depth, before the symmetry filter.
  Mask candidates(const Mask& occupied, const Mask& blocked, const Mask& forbidden) {
    const Mask free = tb.all & ~occupied;
    const Mask open = free & ~blocked;
    prunes[kBlockedPoint] += static_cast<std::uint64_t>(free.count() - open.count());
    const Mask cand = open & ~forbidden;
    prunes[kGpForbidden] += static_cast<std::uint64_t>(open.count() - cand.count());
    return cand;
  }

  void dfs(int depth, const Mask& occupied, const Mask& blocked, const Mask& forbidden) {
    if (depth == plan.n) {
      leaf();
      return;
    }
    const Mask cand = candidates(occupied, blocked, forbidden);
    for (int p = 0; p < P; ++p) {
      if (!cand.test(p)) continue;
      if (stopped()) return;
      place(depth, p, occupied, blocked, forbidden);
    }
  }

  void place(int depth, int p, const Mask& occupied, const Mask& blocked, const Mask& forbidden) {
    if (!symmetry_ok(depth, p)) {
      ++prunes[kSymmetry];
      return;
    }
    ++nodes;
    if (!check_budget()) return;
    const int v = plan.order[depth];
    pt[v] = p;
    const std::size_t edge_mark = edges.size();
    const std::size_t facet_mark = facets.size();
    Mask nblocked = blocked;
    bool ok = true;

    for (int u : plan.back_edges[depth]) {
      const int q = pt[u];
      const Mask& inner = tb.seg_interior[q * P + p];
      if ((inner & occupied).any()) {
        ++prunes[kEdgeThroughVertex];
        ok = false;
        break;
      }
      const Point3 &a = tb.pts[q], &b = tb.pts[p];
      for (const auto& [x, y] : edges) {
        if (!kernel::segments_compatible_unchecked(a, b, at(x), at(y))) {
          ++prunes[kEdgeCrossing];
          ok = false;
          break;
        }
      }
      if (!ok) break;
      edges.push_back({u, v});
      nblocked |= inner;
    }

    Mask nocc = occupied;
    nocc.set(p);
    if (ok) {
      for (const Facet& f : plan.new_facets[depth]) {
        const Point3 &a = at(f[0]), &b = at(f[1]), &c = at(f[2]);
        if (kernel::is_degenerate(a, b, c)) {
          ++prunes[kDegenerateFacet];
          ok = false;
          break;
        }
        const Mask closure = tb.closed_triangle(pt[f[0]], pt[f[1]], pt[f[2]]);
        if ((closure & nocc).count() != 3) {
          ++prunes[kFacetCoversVertex];
          ok = false;
          break;
        }
        const Triangle tf{{a, b, c}};
        for (const Facet& g : facets) {
          if (!kernel::triangles_compatible_unchecked(tf, Triangle{{at(g[0]), at(g[1]), at(g[2])}})) {
            ++prunes[kFacetIntersection];
            ok = false;
            break;
          }
        }
        if (!ok) break;
        facets.push_back(f);
        nblocked |= closure;
      }
    }

    if (ok) {
      Mask nforbidden = forbidden;
      if (sh.prune_planes) {
        for (std::size_t i = 0; i < placed_points.size(); ++i) {
          const int q = placed_points[i];
          nforbidden |= tb.line[q * P + p];
          for (std::size_t j = i + 1; j < placed_points.size(); ++j)
            nforbidden |= tb.plane_of(q, placed_points[j], p);
        }
      }
      placed_points.push_back(p);
      dfs(depth + 1, nocc, nblocked, nforbidden);
      placed_points.pop_back();
    }
    edges.resize(edge_mark);
    facets.resize(facet_mark);
    pt[v] = -1;
  }

  void leaf() {
    std::vector<Point3> coords(plan.n);
    for (int v = 1; v <= plan.n; ++v) coords[v - 1] = at(v);
    if (sh.gp && !sh.prune_planes && !in_general_position(coords)) {
      ++prunes[kGpLeaf];
      return;
    }
    const Realization r{sh.task->tri, coords};
    const Level need = sh.gp ? Level::GeneralPosition : Level::Linear;
    if (classify(r).level < need)
      throw std::logic_error("search accepted a realization that fails classification");
    std::vector<std::uint8_t> sol(plan.n);
    for (int v = 1; v <= plan.n; ++v) sol[v - 1] = static_cast<std::uint8_t>(pt[v]);
    solutions.push_back(std::move(sol));
    if (sh.stop_at_first) {
      int cur = sh.best_branch.load();
      while (branch < cur && !sh.best_branch.compare_exchange_weak(cur, branch)) {
      }
      abort = true;
    }
  }

  void run_branch(int b, int p) {
    branch = b;
    abort = false;
    Mask empty;
    place(0, p, empty, empty, empty);
  }
};

// ---------------------------------------------------------------------------
// Point-set-first search (general position only)

// Enumerates general-position point sets of size n in increasing index
// order. With `canonical`, keeps one set per cuboid-symmetry orbit: the one
// whose sorted indices are lexicographically smallest.
class GpSetEnumerator {
 public:
  GpSetEnumerator(const Tables& tb, int n, bool canonical, const Shared& sh)
      : tb_(tb), n_(n), canonical_(canonical), sh_(sh), orbit_min_(tb.P) {
    for (int p = 0; p < tb.P; ++p) {
      int m = p;
      for (const auto& g : tb.sym) m = std::min<int>(m, g[p]);
      orbit_min_[p] = m;
    }
    const int sides[3] = {tb.cuboid.a, tb.cuboid.b, tb.cuboid.c};
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<Mask> layers(sides[axis] + 1);
      for (int p = 0; p < tb.P; ++p) {
        const Point3& q = tb.pts[p];
        layers[axis == 0 ? q.x : axis == 1 ? q.y : q.z].set(p);
      }
      layers_.push_back(std::move(layers));
    }
    suffix_.resize(tb.P + 1);
    for (int p = tb.P - 1; p >= 0; --p) {
      suffix_[p] = suffix_[p + 1];
      suffix_[p].set(p);
    }
  }

  // Empty optional when the time budget ran out.
  std::optional<Tables::PointSets> run() {
    dfs(0, Mask{});
    if (stopped_) return std::nullopt;
    return std::move(out_);
  }

 private:
  // Upper bound on how many more points fit: each axis-parallel lattice
  // plane holds at most three points of a general-position set.
  int capacity(const Mask& avail) const {
    int best = INT_MAX;
    for (const auto& layers : layers_) {
      int total = 0;
      for (const Mask& layer : layers) {
        int used = 0;
        for (int q : chosen_) used += layer.test(q);
        total += std::min(3 - used, (avail & layer).count());
      }
      best = std::min(best, total);
    }
    return best;
  }

  bool is_canonical() const {
    std::vector<int> img(n_);
    for (const auto& g : tb_.sym) {
      for (int i = 0; i < n_; ++i) img[i] = g[chosen_[i]];
      std::sort(img.begin(), img.end());
      if (img < chosen_) return false;
    }
    return true;
  }

  void dfs(int start, const Mask& forbidden) {
    const int k = static_cast<int>(chosen_.size());
    if (k == n_) {
      if (!canonical_ || is_canonical()) out_.emplace_back(chosen_.begin(), chosen_.end());
      return;
    }
    if ((++visits_ & 4095) == 0 && (sh_.timeout.load() || out_of_time(sh_))) stopped_ = true;
    if (stopped_) return;
    const Mask avail = suffix_[start] & ~forbidden;
    if (capacity(avail) < n_ - k) return;
    for (int p = start; p < tb_.P; ++p) {
      if (!avail.test(p)) continue;
      if (canonical_ && (k == 0 ? orbit_min_[p] != p : orbit_min_[p] < chosen_[0])) continue;
      Mask next = forbidden;
      for (int i = 0; i < k; ++i) {
        next |= tb_.line[chosen_[i] * tb_.P + p];
        for (int j = i + 1; j < k; ++j) next |= tb_.plane_of(chosen_[i], chosen_[j], p);
      }
      chosen_.push_back(p);
      dfs(p + 1, next);
      chosen_.pop_back();
      if (stopped_) return;
    }
  }

  const Tables& tb_;
  int n_;
  bool canonical_;
  const Shared& sh_;
  std::vector<int> orbit_min_;
  std::vector<std::vector<Mask>> layers_;
  std::vector<Mask> suffix_;
  std::vector<int> chosen_;
  Tables::PointSets out_;
  std::uint64_t visits_ = 0;
  bool stopped_ = false;
};

std::shared_ptr<const Tables::PointSets> gp_point_sets(Tables& tb, int n, bool canonical, const Shared& sh) {
  tb.build_planes();
  std::lock_guard<std::mutex> lock(tb.sets_mu);
  auto& slot = tb.gp_sets[{n, canonical}];
  if (!slot) {
    auto sets = GpSetEnumerator(tb, n, canonical, sh).run();
    if (!sets) return nullptr;
    slot = std::make_shared<const Tables::PointSets>(std::move(*sets));
  }
  return slot;
}

// Assigns the vertices, in plan order, to the points of one fixed
// general-position set. Within such a set no edge meets a third point and
// no two edges cross, so only pairs of facets need checking.
struct SetLabeler {
  Shared& sh;
  const Tables& tb;
  const Plan& plan;
  std::array<std::uint64_t, kRuleCount> prunes{};
  std::uint64_t nodes = 0;
  std::vector<std::vector<std::uint8_t>> solutions;

  const std::vector<std::uint8_t>* set = nullptr;
  std::vector<int> local;            // local point index per label, -1 if free
  std::vector<bool> used;
  std::vector<int> facet_ranks;      // local triple ranks of completed facets
  std::vector<std::int8_t> compat;   // memo over pairs of local triples
  std::size_t triples = 0;
  int branch = 0;
  bool abort = false;
  int reps_left = 0;  // unplaced orbit representatives

  SetLabeler(Shared& s)
      : sh(s), tb(*s.tables), plan(*s.plan), local(s.plan->n + 1, -1), used(s.plan->n, false) {
    triples = triple_rank(0, 1, plan.n);
    unrank.resize(triples);
    for (int k = 2; k < plan.n; ++k)
      for (int j = 1; j < k; ++j)
        for (int i = 0; i < j; ++i) unrank[triple_rank(i, j, k)] = {i, j, k};
  }

  bool stopped() const {
    return abort || sh.timeout.load(std::memory_order_relaxed) ||
           (sh.stop_at_first && sh.best_branch.load(std::memory_order_relaxed) < branch);
  }

  static std::size_t local_rank(int i, int j, int k) {
    if (i > j) std::swap(i, j);
    if (j > k) std::swap(j, k);
    if (i > j) std::swap(i, j);
    return triple_rank(i, j, k);
  }

  const Point3& point(int i) const { return tb.pts[(*set)[i]]; }

  std::vector<std::array<int, 3>> unrank;  // triple_rank inverse

  Triangle triangle_of(std::size_t rank) const {
    const auto& [i, j, k] = unrank[rank];
    return Triangle{{point(i), point(j), point(k)}};
  }

  bool compatible(std::size_t x, std::size_t y) {
    std::int8_t& c = compat[x * triples + y];
    if (c < 0) {
      c = kernel::triangles_compatible_unchecked(triangle_of(x), triangle_of(y)) ? 1 : 0;
      compat[y * triples + x] = c;
    }
    return c == 1;
  }

  void dfs(int depth) {
    if (depth == plan.n) {
      leaf();
      return;
    }
    const int v = plan.order[depth];
    // Up to automorphisms, local point 0 carries an orbit representative.
    if (!used[0] && reps_left == 0) return;
    for (int i = 0; i < plan.n; ++i) {
      if (used[i]) continue;
      if (i == 0 && !sh.aut_rep[v]) continue;
      if (stopped()) return;
      ++nodes;
      if (!tick(sh)) return;
      local[v] = i;
      const std::size_t mark = facet_ranks.size();
      bool ok = true;
      for (const Facet& f : plan.new_facets[depth]) {
        const std::size_t r = local_rank(local[f[0]], local[f[1]], local[f[2]]);
        for (std::size_t j = 0; j < mark && ok; ++j) ok = compatible(r, facet_ranks[j]);
        if (!ok) {
          ++prunes[kFacetIntersection];
          break;
        }
        facet_ranks.push_back(r);
      }
      if (ok) {
        used[i] = true;
        reps_left -= sh.aut_rep[v];
        dfs(depth + 1);
        reps_left += sh.aut_rep[v];
        used[i] = false;
      }
      facet_ranks.resize(mark);
      local[v] = -1;
    }
  }

  void leaf() {
    std::vector<Point3> coords(plan.n);
    for (int v = 1; v <= plan.n; ++v) coords[v - 1] = point(local[v]);
    const Realization r{sh.task->tri, coords};
    if (classify(r).level < Level::GeneralPosition)
      throw std::logic_error("search accepted a realization that fails classification");
    std::vector<std::uint8_t> sol(plan.n);
    for (int v = 1; v <= plan.n; ++v) sol[v - 1] = (*set)[local[v]];
    solutions.push_back(std::move(sol));
    if (sh.stop_at_first) {
      int cur = sh.best_branch.load();
      while (branch < cur && !sh.best_branch.compare_exchange_weak(cur, branch)) {
      }
      abort = true;
    }
  }

  void run_branch(int b, const std::vector<std::uint8_t>& points) {
    branch = b;
    abort = false;
    set = &points;
    reps_left = sh.aut_reps;
    compat.assign(triples * triples, -1);
    dfs(0);
  }
};

Certificate closed_form(const SearchTask& task, Outcome outcome, std::string rule) {
  Certificate cert;
  cert.task = task;
  cert.outcome = outcome;
  cert.rule = std::move(rule);
  cert.cuboid_group_order = static_cast<int>(cuboid_symmetries(task.cuboid).size());
  cert.automorphism_group_order = static_cast<int>(automorphisms(task.tri).size());
  return cert;
}

}  // namespace

Certificate run(const SearchTask& input) {
  SearchTask task = input;
  if (!task.cuboid.is_canonical())
    throw std::invalid_argument("cuboid " + task.cuboid.to_string() + " is not canonical (need a<=b<=c)");
  if (task.cuboid.point_count() > kMaxPoints)
    throw std::invalid_argument("cuboid " + task.cuboid.to_string() + " has more than " +
                                std::to_string(kMaxPoints) + " lattice points");
  if (task.workers < 1) task.workers = 1;
  const int n = task.tri.n();
  const bool gp = task.mode == SearchMode::GeneralPosition;

  if (n > task.cuboid.point_count()) return closed_form(task, Outcome::None, "too_few_points");
  // A closed surface has no embedding in a plane.
  if (task.cuboid.a == 0) return closed_form(task, Outcome::None, "planar_cuboid");
  if (gp) {
    // Each axis-parallel lattice plane carries at most three vertices.
    for (int side : {task.cuboid.a, task.cuboid.b, task.cuboid.c})
      if (n > 3 * (side + 1)) return closed_form(task, Outcome::None, "layer_capacity");
  }

  const auto tables = tables_for(task.cuboid);
  const Plan plan = make_plan(task.tri);
  Shared sh;
  sh.task = &task;
  sh.tables = tables.get();
  sh.plan = &plan;
  sh.gp = gp;
  sh.prune_planes = gp && task.gp_plane_pruning;
  sh.stop_at_first = task.goal != SearchGoal::AllUpToSymmetry;
  sh.start = Clock::now();
  if (sh.prune_planes) tables->build_planes();
  const std::vector<Permutation> aut = automorphisms(task.tri);
  sh.aut_rep.assign(n + 1, true);
  if (task.symmetry_breaking)
    for (const Permutation& s : aut)
      for (int v = 1; v <= n; ++v)
        if (s[v - 1] < v) sh.aut_rep[v] = false;
  for (int v = 1; v <= n; ++v) sh.aut_reps += sh.aut_rep[v];

  SearchStrategy strategy = task.strategy;
  if (strategy == SearchStrategy::Auto)
    strategy = gp && tables->P <= kPointSetAutoLimit ? SearchStrategy::PointSetFirst : SearchStrategy::VertexFirst;
  if (strategy == SearchStrategy::PointSetFirst && !gp)
    throw std::invalid_argument("the pointset strategy requires general-position mode");

  // Solutions tagged by branch for deterministic merging.
  std::vector<std::pair<int, std::vector<std::uint8_t>>> all;
  std::uint64_t nodes = 0, point_sets = 0;
  std::array<std::uint64_t, kRuleCount> prunes{};

  // Runs `count` branches round-robin over up to task.workers threads.
  auto run_branches = [&](auto& workers, std::size_t count, auto&& body) {
    const int w = static_cast<int>(workers.size());
    std::vector<std::vector<std::pair<int, std::vector<std::uint8_t>>>> found(w);
    auto work = [&](int id) {
      auto& wk = *workers[id];
      for (std::size_t b = id; b < count; b += w) {
        if (sh.timeout) break;
        if (sh.stop_at_first && sh.best_branch.load() < static_cast<int>(b)) break;
        const std::size_t before = wk.solutions.size();
        body(wk, static_cast<int>(b));
        for (std::size_t s = before; s < wk.solutions.size(); ++s)
          found[id].push_back({static_cast<int>(b), wk.solutions[s]});
      }
    };
    if (w == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (int i = 0; i < w; ++i) threads.emplace_back(work, i);
      for (auto& t : threads) t.join();
    }
    for (auto& f : found) all.insert(all.end(), f.begin(), f.end());
    for (const auto& wk : workers) {
      nodes += wk->nodes;
      for (int r = 0; r < kRuleCount; ++r) prunes[r] += wk->prunes[r];
    }
  };
  auto worker_count = [&](std::size_t branches) {
    return std::min<int>(task.workers, static_cast<int>(std::max<std::size_t>(branches, 1)));
  };

  if (strategy == SearchStrategy::PointSetFirst) {
    const auto sets = gp_point_sets(*tables, n, task.symmetry_breaking, sh);
    if (!sets) {
      sh.timeout = true;
    } else {
      point_sets = sets->size();
      std::vector<std::unique_ptr<SetLabeler>> workers;
      for (int i = 0, w = worker_count(sets->size()); i < w; ++i) workers.push_back(std::make_unique<SetLabeler>(sh));
      run_branches(workers, sets->size(), [&](SetLabeler& wk, int b) { wk.run_branch(b, (*sets)[b]); });
    }
  } else {
    // Root branches: admissible first points.
    std::vector<int> roots;
    {
      Worker probe(sh);
      for (int p = 0; p < tables->P; ++p)
        if (probe.symmetry_ok(0, p)) roots.push_back(p);
    }
    std::vector<std::unique_ptr<Worker>> workers;
    for (int i = 0, w = worker_count(roots.size()); i < w; ++i) workers.push_back(std::make_unique<Worker>(sh));
    run_branches(workers, roots.size(), [&](Worker& wk, int b) { wk.run_branch(b, roots[b]); });
  }

  Certificate cert;
  cert.task = task;
  cert.cuboid_group_order = static_cast<int>(tables->sym.size());
  cert.automorphism_group_order = static_cast<int>(aut.size());
  cert.stats.nodes = nodes;
  cert.stats.point_sets = point_sets;
  for (int r = 0; r < kRuleCount; ++r) cert.stats.prunes[kRuleNames[r]] = prunes[r];

  std::sort(all.begin(), all.end());
  cert.stats.raw_solutions = all.size();

  if (task.goal == SearchGoal::AllUpToSymmetry) {
    std::vector<std::vector<std::uint8_t>> keys;
    keys.reserve(all.size());
    for (const auto& [b, sol] : all) {
      std::vector<std::uint8_t> best, key(n);
      for (const Permutation& s : aut)
        for (const auto& g : tables->sym) {
          for (int v = 0; v < n; ++v) key[v] = g[sol[s[v] - 1]];
          if (best.empty() || key < best) best = key;
        }
      keys.push_back(std::move(best));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (const auto& k : keys) {
      Realization r{task.tri, {}};
      for (int v = 0; v < n; ++v) r.coords.push_back(tables->pts[k[v]]);
      cert.witnesses.push_back(std::move(r));
    }
  } else if (!all.empty()) {
    Realization r{task.tri, {}};
    for (int v = 0; v < n; ++v) r.coords.push_back(tables->pts[all.front().second[v]]);
    cert.witnesses.push_back(std::move(r));
  }

  if (sh.timeout && (task.goal == SearchGoal::AllUpToSymmetry || cert.witnesses.empty()))
    cert.outcome = Outcome::Timeout;
  else
    cert.outcome = cert.witnesses.empty() ? Outcome::None : Outcome::Witness;
  if (cert.outcome == Outcome::Timeout && task.goal == SearchGoal::AllUpToSymmetry)
    cert.witnesses.clear();
  cert.stats.seconds = std::chrono::duration<double>(Clock::now() - sh.start).count();
  return cert;
}

MinimalResult minimal_cuboid(const Triangulation& t, SearchMode mode, const Budget& per_cuboid,
                             int max_points, int workers) {
  MinimalResult out;
  for (const Cuboid& c : cuboids_in_order(t.n(), std::min(max_points, kMaxPoints))) {
    SearchTask task{t, c, mode, SearchGoal::FirstWitness, per_cuboid, workers};
    Certificate cert = run(task);
    if (cert.outcome == Outcome::Witness) {
      out.cuboid = c;
      out.witness = std::move(cert);
      return out;
    }
    if (cert.outcome == Outcome::Timeout) {
      out.timed_out = true;
      out.excluded.push_back(std::move(cert));
      return out;
    }
    out.excluded.push_back(std::move(cert));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maximum compatible segment sets

namespace {

constexpr int kSegWords = 8;  // up to 512 segments

struct SegSet {
  std::array<std::uint64_t, kSegWords> w{};
  void set(int i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(int i) { w[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool empty() const {
    return std::all_of(w.begin(), w.end(), [](std::uint64_t x) { return x == 0; });
  }
  int count() const {
    int c = 0;
    for (auto x : w) c += std::popcount(x);
    return c;
  }
};

SegSet intersect(const SegSet& a, const SegSet& b) {
  SegSet r;
  for (int i = 0; i < kSegWords; ++i) r.w[i] = a.w[i] & b.w[i];
  return r;
}

// Maximum clique by branch and bound with a greedy colouring bound.
struct CliqueSearch {
  int m = 0;
  std::vector<SegSet> adj;
  std::vector<int> current, best;
  std::uint64_t nodes = 0;
  Budget budget;
  Clock::time_point start = Clock::now();
  bool complete = true;

  void colour_sort(const SegSet& cand, std::vector<int>& order, std::vector<int>& bound) {
    SegSet uncoloured = cand;
    int colour = 0;
    while (!uncoloured.empty()) {
      ++colour;
      SegSet avail = uncoloured;
      while (!avail.empty()) {
        int v = -1;
        for (int i = 0; i < kSegWords; ++i)
          if (avail.w[i]) {
            v = i * 64 + std::countr_zero(avail.w[i]);
            break;
          }
        avail.reset(v);
        uncoloured.reset(v);
        for (int i = 0; i < kSegWords; ++i) avail.w[i] &= ~adj[v].w[i];
        order.push_back(v);
        bound.push_back(colour);
      }
    }
  }

  void expand(SegSet cand) {
    ++nodes;
    if ((budget.max_nodes && nodes > budget.max_nodes) ||
        (budget.max_seconds > 0 && (nodes & 1023) == 0 &&
         std::chrono::duration<double>(Clock::now() - start).count() > budget.max_seconds))
      complete = false;
    if (!complete) return;
    std::vector<int> order, bound;
    colour_sort(cand, order, bound);
    for (int i = static_cast<int>(order.size()) - 1; i >= 0; --i) {
      if (static_cast<int>(current.size()) + bound[i] <= static_cast<int>(best.size())) return;
      const int v = order[i];
      current.push_back(v);
      const SegSet next = intersect(cand, adj[v]);
      if (next.empty()) {
        if (current.size() > best.size()) best = current;
      } else {
        expand(next);
      }
      current.pop_back();
      cand.reset(v);
      if (!complete) return;
    }
  }
};

}  // namespace

SegmentPacking max_compatible_segments(const Cuboid& c, const Budget& budget) {
  const std::vector<Point3> pts = c.points();
  if (pts.size() > 32) throw std::invalid_argument("max_compatible_segments supports at most 32 points");
  std::vector<std::pair<int, int>> segs;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) segs.push_back({static_cast<int>(i), static_cast<int>(j)});
  CliqueSearch cs;
  cs.m = static_cast<int>(segs.size());
  cs.budget = budget;
  cs.adj.resize(segs.size());
  for (int s = 0; s < cs.m; ++s)
    for (int t = s + 1; t < cs.m; ++t) {
      const auto [a, b] = segs[s];
      const auto [p, q] = segs[t];
      if (kernel::segments_compatible_unchecked(pts[a], pts[b], pts[p], pts[q])) {
        cs.adj[s].set(t);
        cs.adj[t].set(s);
      }
    }
  SegSet all;
  for (int s = 0; s < cs.m; ++s) all.set(s);
  cs.expand(all);

  SegmentPacking out;
  out.total_segments = cs.m;
  out.count = static_cast<int>(cs.best.size());
  out.nodes = cs.nodes;
  out.complete = cs.complete;
  std::sort(cs.best.begin(), cs.best.end());
  for (int s : cs.best) out.segments.push_back({pts[segs[s].first], pts[segs[s].second]});
  return out;
}

}  // namespace torusforge
