#include "torusforge/heuristic.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace torusforge {

namespace {

bool pair_bad(const Point3& a0, const Point3& a1, const Point3& a2, bool deg_a, const Point3& b0,
              const Point3& b1, const Point3& b2, bool deg_b) {
  if (deg_a || deg_b) return true;
  return !kernel::triangles_compatible_unchecked(Triangle{{a0, a1, a2}}, Triangle{{b0, b1, b2}});
}

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Local search state for one restart.
class Walker {
 public:
  Walker(const Triangulation& t, const HeuristicConfig& cfg, Level require, std::uint64_t seed)
      : t_(t), cfg_(cfg), require_(require), rng_(seed), n_(t.n()),
        F_(static_cast<int>(t.facet_count())) {
    const auto& fs = t.facets();
    facets_of_.resize(n_ + 1);
    facet_has_.assign(n_ + 1, std::vector<char>(F_, 0));
    for (int i = 0; i < F_; ++i)
      for (int v : fs[i]) {
        facets_of_[v].push_back(i);
        facet_has_[v][i] = 1;
      }
    if (require_ == Level::Proper) {
      std::map<Edge, std::vector<int>> on_edge;
      for (int i = 0; i < F_; ++i) {
        const Facet& f = fs[i];
        on_edge[{f[0], f[1]}].push_back(i);
        on_edge[{f[0], f[2]}].push_back(i);
        on_edge[{f[1], f[2]}].push_back(i);
      }
      for (const auto& [e, ids] : on_edge)
        if (ids.size() == 2) neighbours_.push_back({ids[0], ids[1], e});
      neighbours_of_.resize(n_ + 1);
      for (std::size_t k = 0; k < neighbours_.size(); ++k) {
        std::vector<int> verts;
        for (int id : {neighbours_[k].f, neighbours_[k].g})
          for (int v : fs[id]) verts.push_back(v);
        std::sort(verts.begin(), verts.end());
        verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
        for (int v : verts) neighbours_of_[v].push_back(static_cast<int>(k));
      }
    }
    const Cuboid& b = cfg_.box;
    grid_.assign(static_cast<std::size_t>(b.point_count()), 0);
  }

  void init_random() {
    coords_.assign(n_, Point3{});
    std::fill(grid_.begin(), grid_.end(), 0);
    std::uniform_int_distribution<int> pick(0, cfg_.box.point_count() - 1);
    for (int v = 0; v < n_; ++v) {
      int cell;
      do cell = pick(rng_);
      while (grid_[cell]);
      grid_[cell] = 1;
      coords_[v] = point_of(cell);
    }
    rebuild();
  }

  void init_from(const std::vector<Point3>& start) {
    coords_.assign(n_, Point3{});
    std::fill(grid_.begin(), grid_.end(), 0);
    std::uniform_int_distribution<int> pick(0, cfg_.box.point_count() - 1);
    for (int v = 0; v < n_; ++v) {
      Point3 p = v < static_cast<int>(start.size()) ? clamp(start[v]) : point_of(pick(rng_));
      while (grid_[cell_of(p)]) p = point_of(pick(rng_));
      grid_[cell_of(p)] = 1;
      coords_[v] = p;
    }
    rebuild();
  }

  std::int64_t objective() const { return ief_ + aux_; }

  // Runs until the objective reaches zero or the step budget is spent.
  bool descend(RestartLog& log) {
    std::uniform_int_distribution<int> vert(1, n_);
    std::uniform_int_distribution<int> off(-cfg_.move_radius, cfg_.move_radius);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::int64_t best = objective();
    log.trajectory.push_back(best);
    while (objective() > 0 && log.steps < cfg_.steps_per_restart) {
      ++log.steps;
      const int v = vert(rng_);
      Point3 d{off(rng_), off(rng_), off(rng_)};
      const Point3 target = clamp(coords_[v - 1] + d);
      if (target == coords_[v - 1] || grid_[cell_of(target)]) {
        ++log.rejected;
        continue;
      }
      const std::int64_t delta = try_move(v, target);
      if (delta < 0 || (delta == 0 && coin(rng_) < cfg_.plateau)) {
        commit(v, target);
        ++log.accepted;
        if (objective() < best) {
          best = objective();
          log.trajectory.push_back(best);
        }
      } else {
        ++log.rejected;
      }
    }
    return objective() == 0;
  }

  const std::vector<Point3>& coords() const { return coords_; }

 private:
  struct NeighbourPair {
    int f, g;
    Edge e;
  };

  Point3 point_of(int cell) const {
    const Cuboid& b = cfg_.box;
    const int z = cell % (b.c + 1);
    const int y = (cell / (b.c + 1)) % (b.b + 1);
    const int x = cell / ((b.c + 1) * (b.b + 1));
    return {x, y, z};
  }
  int cell_of(const Point3& p) const {
    const Cuboid& b = cfg_.box;
    return static_cast<int>((p.x * (b.b + 1) + p.y) * (b.c + 1) + p.z);
  }
  Point3 clamp(const Point3& p) const {
    const Cuboid& b = cfg_.box;
    return {std::clamp<std::int64_t>(p.x, 0, b.a), std::clamp<std::int64_t>(p.y, 0, b.b),
            std::clamp<std::int64_t>(p.z, 0, b.c)};
  }

  const Point3& at(int label) const { return coords_[label - 1]; }

  bool degenerate(int fi) const {
    const Facet& f = t_.facets()[fi];
    return kernel::is_degenerate(at(f[0]), at(f[1]), at(f[2]));
  }

  bool compute_bad(int i, int j) const {
    const Facet& f = t_.facets()[i];
    const Facet& g = t_.facets()[j];
    return pair_bad(at(f[0]), at(f[1]), at(f[2]), deg_[i], at(g[0]), at(g[1]), at(g[2]), deg_[j]);
  }

  bool coplanar_pair(const NeighbourPair& np) const {
    const Facet& f = t_.facets()[np.f];
    const Facet& g = t_.facets()[np.g];
    int apex = 0;
    for (int v : g)
      if (v != np.e.first && v != np.e.second) apex = v;
    return orient3d_det(at(f[0]), at(f[1]), at(f[2]), at(apex)) == 0;
  }

  std::int64_t gp_terms_with(int v) const {
    std::int64_t pen = 0;
    const Point3& p = at(v);
    for (int a = 1; a <= n_; ++a) {
      if (a == v) continue;
      for (int b = a + 1; b <= n_; ++b) {
        if (b == v) continue;
        if (kernel::is_degenerate(p, at(a), at(b))) ++pen;
        for (int c = b + 1; c <= n_; ++c) {
          if (c == v) continue;
          if (orient3d_det(p, at(a), at(b), at(c)) == 0) ++pen;
        }
      }
    }
    return pen;
  }

  void rebuild() {
    deg_.assign(F_, false);
    for (int i = 0; i < F_; ++i) deg_[i] = degenerate(i);
    bad_.assign(static_cast<std::size_t>(F_) * F_, 0);
    bad_count_.assign(F_, 0);
    ief_ = 0;
    for (int i = 0; i < F_; ++i)
      for (int j = i + 1; j < F_; ++j) {
        const bool b = compute_bad(i, j);
        bad_[i * F_ + j] = bad_[j * F_ + i] = b;
        bad_count_[i] += b;
        bad_count_[j] += b;
        ief_ += b;
      }
    aux_ = 0;
    if (require_ == Level::Proper) {
      for (const auto& np : neighbours_) aux_ += coplanar_pair(np);
    } else if (require_ == Level::GeneralPosition) {
      aux_ = general_position_penalty(coords_);
    }
  }

  // Objective change if v moved to target; leaves pending values for commit.
  // Returns early with a positive bound when the move cannot be accepted.
  // Objective change if v moved to target. Returns early with a positive
  // lower bound when the move cannot help.
  std::int64_t try_move(int v, const Point3& target) {
    const Point3 old = at(v);
    std::int64_t aux_old = 0;
    if (require_ == Level::Proper) {
      for (int k : neighbours_of_[v]) aux_old += coplanar_pair(neighbours_[k]);
    } else if (require_ == Level::GeneralPosition) {
      aux_old = gp_terms_with(v);
    }
    coords_[v - 1] = target;
    std::int64_t aux_new = 0;
    if (require_ == Level::Proper) {
      for (int k : neighbours_of_[v]) aux_new += coplanar_pair(neighbours_[k]);
    } else if (require_ == Level::GeneralPosition) {
      aux_new = gp_terms_with(v);
    }
    pending_aux_delta_ = aux_new - aux_old;
    // The pair count can drop by at most the bad pairs touching v's facets.
    std::int64_t removable = 0;
    for (int i : facets_of_[v]) removable += bad_count_[i];
    if (pending_aux_delta_ - removable > 0) {
      coords_[v - 1] = old;
      return pending_aux_delta_ - removable;
    }
    pending_deg_.clear();
    saved_deg_.clear();
    for (int i : facets_of_[v]) {
      pending_deg_.push_back({i, degenerate(i)});
      saved_deg_.push_back({i, deg_[i]});
    }
    for (const auto& [i, d] : pending_deg_) deg_[i] = d;
    std::int64_t delta = 0;
    pending_bad_.clear();
    for (int i : facets_of_[v]) {
      for (int j = 0; j < F_; ++j) {
        if (j == i || (facet_has_[v][j] && j < i)) continue;
        const bool b = compute_bad(i, j);
        delta += static_cast<int>(b) - static_cast<int>(bad_[i * F_ + j]);
        pending_bad_.push_back({i, j, b});
      }
    }
    pending_ief_delta_ = delta;
    for (const auto& [i, d] : saved_deg_) deg_[i] = d;
    coords_[v - 1] = old;
    return delta + pending_aux_delta_;
  }

  void commit(int v, const Point3& target) {
    grid_[cell_of(at(v))] = 0;
    coords_[v - 1] = target;
    grid_[cell_of(target)] = 1;
    for (const auto& [i, d] : pending_deg_) deg_[i] = d;
    for (const auto& [i, j, b] : pending_bad_) {
      const int d = static_cast<int>(b) - bad_[i * F_ + j];
      bad_[i * F_ + j] = bad_[j * F_ + i] = b;
      bad_count_[i] += d;
      bad_count_[j] += d;
    }
    ief_ += pending_ief_delta_;
    aux_ += pending_aux_delta_;
  }

  const Triangulation& t_;
  const HeuristicConfig& cfg_;
  Level require_;
  std::mt19937_64 rng_;
  int n_, F_;
  std::vector<std::vector<int>> facets_of_;
  std::vector<std::vector<char>> facet_has_;  // [v][i]: facet i contains v
  std::vector<NeighbourPair> neighbours_;
  std::vector<std::vector<int>> neighbours_of_;
  std::vector<Point3> coords_;
  std::vector<char> grid_;
  std::vector<bool> deg_;
  std::vector<char> bad_;
  std::int64_t ief_ = 0, aux_ = 0;
  std::vector<std::pair<int, bool>> pending_deg_;
  std::vector<std::pair<int, bool>> saved_deg_;
  std::vector<std::tuple<int, int, bool>> pending_bad_;
  std::vector<int> bad_count_;  // bad pairs per facet
  std::int64_t pending_ief_delta_ = 0, pending_aux_delta_ = 0;
};

struct RestartOutcome {
  RestartLog log;
  std::vector<Point3> coords;
};

RestartOutcome run_restart(const Triangulation& t, const HeuristicConfig& cfg, Level require, int index,
                           const std::vector<Point3>* start) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 seeder(seq);
  Walker w(t, cfg, require, seeder());
  if (index == 0 && start) {
    w.init_from(*start);
  } else {
    w.init_random();
  }
  RestartOutcome out;
  out.log.success = w.descend(out.log);
  if (out.log.success) out.coords = w.coords();
  return out;
}

}  // namespace

std::int64_t intersection_edge_functional(const Triangulation& t, const std::vector<Point3>& coords) {
  if (static_cast<int>(coords.size()) != t.n())
    throw GeometryError("coordinate count does not match the triangulation");
  const auto& fs = t.facets();
  const std::int64_t F = static_cast<std::int64_t>(fs.size());
  auto at = [&](int v) -> const Point3& { return coords[v - 1]; };
  std::int64_t total = 0;
  for (std::size_t a = 0; a < coords.size(); ++a)
    for (std::size_t b = a + 1; b < coords.size(); ++b)
      if (coords[a] == coords[b]) total += F;
  std::vector<bool> deg(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) deg[i] = kernel::is_degenerate(at(fs[i][0]), at(fs[i][1]), at(fs[i][2]));
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j)
      total += pair_bad(at(fs[i][0]), at(fs[i][1]), at(fs[i][2]), deg[i], at(fs[j][0]), at(fs[j][1]),
                        at(fs[j][2]), deg[j]);
  return total;
}

std::int64_t general_position_penalty(const std::vector<Point3>& p) {
  std::int64_t pen = 0;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        if (kernel::is_degenerate(p[i], p[j], p[k])) ++pen;
        for (std::size_t l = k + 1; l < n; ++l)
          if (orient3d_det(p[i], p[j], p[k], p[l]) == 0) ++pen;
      }
  return pen;
}

HeuristicResult realize(const Triangulation& t, const HeuristicConfig& cfg, Level require,
                        const std::vector<Point3>* start) {
  if (cfg.box.point_count() < t.n())
    throw std::invalid_argument("box " + cfg.box.to_string() + " has fewer points than vertices");
  check_coord_limit({cfg.box.a, cfg.box.b, cfg.box.c});
  if (cfg.move_radius < 1) throw std::invalid_argument("move radius must be positive");
  if (require == Level::NotEmbedded) require = Level::Linear;

  HeuristicResult result;
  const int workers = std::max(1, cfg.workers);
  for (int base = 0; base < cfg.restarts; base += workers) {
    const int batch = std::min(workers, cfg.restarts - base);
    std::vector<RestartOutcome> outs(batch);
    if (batch == 1) {
      outs[0] = run_restart(t, cfg, require, base, start);
    } else {
      std::vector<std::thread> threads;
      for (int k = 0; k < batch; ++k)
        threads.emplace_back([&, k] { outs[k] = run_restart(t, cfg, require, base + k, start); });
      for (auto& th : threads) th.join();
    }
    for (auto& o : outs) {
      result.log.steps += o.log.steps;
      const bool ok = o.log.success;
      result.log.restarts.push_back(std::move(o.log));
      if (!ok) continue;
      Realization r{t, o.coords};
      const RealizationClass cls = classify(r);
      if (cls.level < require)
        throw std::logic_error("zero objective but classification is " + std::string(to_string(cls.level)));
      result.realization = std::move(r);
      result.log.outcome = "success";
      return result;
    }
  }
  result.log.outcome = "budget exhausted";
  return result;
}

// ---------------------------------------------------------------------------
// Shrinking

namespace {

using Measure = std::tuple<int, int, int, int, int>;

std::vector<Point3> to_origin(std::vector<Point3> pts) {
  Point3 lo = pts.front();
  for (const Point3& p : pts) lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
  for (Point3& p : pts) p = p - lo;
  return pts;
}

Measure measure(const std::vector<Point3>& pts) {
  Point3 lo = pts.front(), hi = pts.front();
  for (const Point3& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Cuboid c = bounding_cuboid(pts);
  int extreme = 0;
  for (const Point3& p : pts) {
    extreme += (p.x == lo.x) + (p.x == hi.x) + (p.y == lo.y) + (p.y == hi.y) + (p.z == lo.z) + (p.z == hi.z);
  }
  return {c.point_count(), c.a, c.b, c.c, extreme};
}

bool holds(const Triangulation& t, const std::vector<Point3>& pts, Level require) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (pts[i] == pts[j]) return false;
  return classify(Realization{t, pts}).level >= require;
}

}  // namespace

Realization shrink(const Triangulation& t, const Realization& r, Level require) {
  if (classify(r).level < require) throw std::invalid_argument("shrink input does not meet the required level");
  std::vector<Point3> cur = to_origin(r.coords);
  Measure best = measure(cur);
  bool improved = true;
  while (improved) {
    improved = false;
    for (int v = 0; v < t.n() && !improved; ++v) {
      for (int dx = -1; dx <= 1 && !improved; ++dx)
        for (int dy = -1; dy <= 1 && !improved; ++dy)
          for (int dz = -1; dz <= 1 && !improved; ++dz) {
            if (!dx && !dy && !dz) continue;
            std::vector<Point3> cand = cur;
            cand[v] = cand[v] + Point3{dx, dy, dz};
            cand = to_origin(std::move(cand));
            const Measure m = measure(cand);
            if (m < best && holds(t, cand, require)) {
              cur = std::move(cand);
              best = m;
              improved = true;
            }
          }
    }
  }
  // Sort the axes by extent.
  Point3 hi{};
  for (const Point3& p : cur) hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  std::array<int, 3> axis{0, 1, 2};
  const std::int64_t ext[3] = {hi.x, hi.y, hi.z};
  std::stable_sort(axis.begin(), axis.end(), [&](int a, int b) { return ext[a] < ext[b]; });
  for (Point3& p : cur) {
    const std::int64_t c[3] = {p.x, p.y, p.z};
    p = {c[axis[0]], c[axis[1]], c[axis[2]]};
  }
  return Realization{t, cur};
}

// ---------------------------------------------------------------------------
// Corpus runs

CorpusReport realize_corpus(const std::vector<Triangulation>& list, const HeuristicConfig& cfg, Level require,
                            const std::function<void(const CorpusItem&)>& progress) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  CorpusReport report;
  std::optional<std::vector<Point3>> last;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto ti = Clock::now();
    HeuristicConfig item_cfg = cfg;
    item_cfg.seed = mix(cfg.seed ^ mix(i));
    const std::vector<Point3>* start =
        last && static_cast<int>(last->size()) == list[i].n() ? &*last : nullptr;
    HeuristicResult res = realize(list[i], item_cfg, require, start);
    CorpusItem item;
    item.index = i;
    item.steps = res.log.steps;
    item.success = res.realization.has_value();
    if (item.success) {
      item.recycled = start && res.log.restarts.size() == 1;
      last = res.realization->coords;
      item.realization = std::move(res.realization);
      ++report.successes;
    }
    item.seconds = std::chrono::duration<double>(Clock::now() - ti).count();
    if (progress) progress(item);
    report.items.push_back(std::move(item));
  }
  report.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return report;
}

std::string format_corpus_line(const CorpusItem& item, const Cuboid& box) {
  std::ostringstream out;
  out << item.index << ' ' << (item.success ? "OK" : "FAIL") << ' ' << box.to_string() << ' ';
  if (item.success) {
    bool first = true;
    for (const Point3& p : item.realization->coords) {
      if (!first) out << ';';
      first = false;
      out << p.x << ',' << p.y << ',' << p.z;
    }
  } else {
    out << "FAIL";
  }
  out << ' ' << item.steps;
  return out.str();
}

}  // namespace torusforge
