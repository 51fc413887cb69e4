#include "torusforge/enumerate.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace torusforge {

namespace {

constexpr int kMaxN = 16;
constexpr int kDim = kMaxN + 2;

using Tri = std::array<std::uint8_t, 3>;

// Partial complex during generation. Everything is fixed-size so a branch is
// a plain copy.
struct Partial {
  int n = 0;
  int m = 0;          // labels in use: 1..m
  int facets = 0;
  int min_degree = 0; // degree of vertex 1 once its link is closed, else 0
  std::uint8_t cnt[kDim][kDim];      // facets on each edge
  std::uint8_t partner[kDim][kDim];  // partner[v][a]: other end of a's path in link(v)
  std::uint8_t opp[kDim][kDim];      // third vertex of the first facet on an edge
  bool dir[kDim][kDim];              // directed edge used by an oriented facet
  std::uint8_t deg[kDim];            // vertices in link(v)
  std::uint8_t ends[kDim];           // path endpoints in link(v)
  bool closed[kDim];
  Tri list[2 * kMaxN + 2];
};

struct Generator {
  int n;
  std::vector<Triangulation> found;
  EnumerationStats stats;

  explicit Generator(int nv) : n(nv) {}

  static void init(Partial& p, int n) {
    p = Partial{};
    p.n = n;
  }

  // Adds the oriented facet x->y->z. Returns false when the result cannot be
  // part of a closed orientable surface with the current minimum degree.
  static bool add(Partial& p, int x, int y, int z) {
    if (p.cnt[x][y] >= 2 || p.cnt[y][z] >= 2 || p.cnt[x][z] >= 2) return false;
    if (p.dir[x][y] || p.dir[y][z] || p.dir[z][x]) return false;
    const int cxy = p.cnt[x][y], cyz = p.cnt[y][z], cxz = p.cnt[x][z];
    const int vs[3] = {x, y, z};
    const int ca[3] = {cxy, cxy, cxz};  // cnt[u][p]
    const int cb[3] = {cxz, cyz, cyz};  // cnt[u][q]
    const int ps[3] = {y, x, x};
    const int qs[3] = {z, z, y};
    for (int k = 0; k < 3; ++k) {
      const int u = vs[k], a = ps[k], b = qs[k];
      const int c1 = ca[k], c2 = cb[k];
      if (c1 == 0 && c2 == 0) {
        p.partner[u][a] = static_cast<std::uint8_t>(b);
        p.partner[u][b] = static_cast<std::uint8_t>(a);
        p.ends[u] += 2;
        p.deg[u] += 2;
      } else if (c1 == 1 && c2 == 0) {
        const int e = p.partner[u][a];
        p.partner[u][e] = static_cast<std::uint8_t>(b);
        p.partner[u][b] = static_cast<std::uint8_t>(e);
        p.deg[u] += 1;
      } else if (c1 == 0 && c2 == 1) {
        const int e = p.partner[u][b];
        p.partner[u][e] = static_cast<std::uint8_t>(a);
        p.partner[u][a] = static_cast<std::uint8_t>(e);
        p.deg[u] += 1;
      } else if (p.partner[u][a] == b) {
        if (p.ends[u] != 2) return false;  // closing one path while others remain
        p.ends[u] = 0;
        p.closed[u] = true;
        if (u == 1) {
          if (p.deg[1] > 6) return false;  // minimum degree of a torus is at most 6
          p.min_degree = p.deg[1];
        } else if (p.deg[u] < std::max(p.min_degree, 3)) {
          return false;
        }
      } else {
        const int ea = p.partner[u][a], eb = p.partner[u][b];
        p.partner[u][ea] = static_cast<std::uint8_t>(eb);
        p.partner[u][eb] = static_cast<std::uint8_t>(ea);
        p.ends[u] -= 2;
      }
    }
    auto bump = [&](int a, int b, int third) {
      if (p.cnt[a][b] == 0) p.opp[a][b] = p.opp[b][a] = static_cast<std::uint8_t>(third);
      ++p.cnt[a][b];
      ++p.cnt[b][a];
    };
    bump(x, y, z);
    bump(y, z, x);
    bump(x, z, y);
    p.dir[x][y] = p.dir[y][z] = p.dir[z][x] = true;
    Tri t{static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), static_cast<std::uint8_t>(z)};
    std::sort(t.begin(), t.end());
    p.list[p.facets++] = t;
    return p.facets <= 2 * p.n;
  }

  // Facets still needed, lower bound: every open link must close into a
  // cycle of at least the minimum degree, unseen vertices need a full star,
  // and each facet contributes one link edge to three vertices.
  static bool feasible(const Partial& p) {
    const int dmin = std::max(p.min_degree, 3);
    int need = (p.n - p.m) * dmin;
    for (int u = 1; u <= p.m; ++u) {
      if (p.closed[u]) continue;
      const int paths = p.ends[u] / 2;
      const int have = p.deg[u] - paths;  // link edges present
      need += std::max(dmin, static_cast<int>(p.deg[u])) - have;
    }
    return p.facets + (need + 2) / 3 <= 2 * p.n;
  }

  void dfs(const Partial& p) {
    ++stats.nodes;
    int v = 1;
    while (v <= p.m && p.closed[v]) ++v;
    if (v > p.m) {
      if (p.m == n && p.facets == 2 * n) accept(p);
      return;
    }
    int a = 1;
    while (a <= p.m && p.cnt[v][a] != 1) ++a;
    // Orient the new facet against the existing one along {v,a}.
    const bool forward = p.dir[v][a];
    const int skip = p.opp[v][a];
    for (int w = 1; w <= std::min(p.m + 1, n); ++w) {
      if (w == v || w == a || w == skip) continue;
      if (w <= p.m && p.closed[w]) continue;
      Partial q = p;
      if (w == p.m + 1) q.m = w;
      const bool ok = forward ? add(q, a, v, w) : add(q, v, a, w);
      if (ok && feasible(q)) dfs(q);
    }
  }

  // The complex is kept iff no other start of the growth rule produces a
  // lexicographically smaller facet list.
  void accept(const Partial& p) {
    ++stats.complete;
    std::uint8_t third[kDim][kDim][2];
    std::uint8_t nthird[kDim][kDim] = {};
    for (int i = 0; i < p.facets; ++i) {
      const Tri& t = p.list[i];
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3], c = t[(k + 2) % 3];
        third[a][b][nthird[a][b]++] = static_cast<std::uint8_t>(c);
        third[b][a][nthird[b][a]++] = static_cast<std::uint8_t>(c);
      }
    }
    std::vector<Tri> mine(p.list, p.list + p.facets);
    std::sort(mine.begin(), mine.end());
    // Start offset of each block of facets sharing a minimum label.
    std::array<int, kDim + 1> block{};
    for (int v = 1, i = 0; v <= n + 1; ++v) {
      block[v] = i;
      while (i < p.facets && mine[i][0] == v) ++i;
    }

    const int dmin = p.deg[1];
    for (int x = 1; x <= n; ++x) {
      if (p.deg[x] != dmin) continue;
      for (int y = 1; y <= n; ++y) {
        if (p.cnt[x][y] == 0) continue;
        for (int s = 0; s < 2; ++s) {
          const int z = third[x][y][s];
          if (x == 1 && y == 2 && z == 3) continue;
          if (compare_start(third, mine, block, x, y, z) < 0) return;
        }
      }
    }
    std::vector<Facet> fs;
    fs.reserve(mine.size());
    for (const Tri& t : mine) fs.push_back({t[0], t[1], t[2]});
    found.emplace_back(n, std::move(fs));
  }

  // Relabels the complex by the growth rule started at facet (x,y,z) and
  // compares against the generated labeling block by block.
  int compare_start(const std::uint8_t (&third)[kDim][kDim][2],
                    const std::vector<Tri>& mine, const std::array<int, kDim + 1>& block, int x,
                    int y, int z) const {
    std::uint8_t lab[kDim] = {}, inv[kDim] = {};
    std::uint8_t ecnt[kDim][kDim] = {};
    std::uint8_t emitted[kDim][kDim] = {};  // third vertex of the emitted facet
    int m = 0;
    auto label = [&](int u) {
      if (!lab[u]) {
        lab[u] = static_cast<std::uint8_t>(++m);
        inv[m] = static_cast<std::uint8_t>(u);
      }
    };
    std::vector<Tri> cur;
    cur.reserve(8);
    auto emit = [&](int a, int b, int c) {
      ++ecnt[a][b], ++ecnt[b][a], ++ecnt[a][c], ++ecnt[c][a], ++ecnt[b][c], ++ecnt[c][b];
      emitted[a][b] = emitted[b][a] = static_cast<std::uint8_t>(c);
      emitted[a][c] = emitted[c][a] = static_cast<std::uint8_t>(b);
      emitted[b][c] = emitted[c][b] = static_cast<std::uint8_t>(a);
      Tri t{lab[a], lab[b], lab[c]};
      std::sort(t.begin(), t.end());
      cur.push_back(t);
    };
    label(x);
    label(y);
    label(z);
    emit(x, y, z);
    for (int v = 1; v <= n; ++v) {
      const int u = inv[v];
      if (u == 0) return 1;  // cannot happen on a connected surface
      while (true) {
        int best = 0;
        for (int w = 1; w <= n; ++w) {
          if (ecnt[u][w] == 1 && lab[w] && (best == 0 || lab[w] < lab[best])) best = w;
        }
        if (best == 0) break;
        const int q = third[u][best][0] == emitted[u][best] ? third[u][best][1] : third[u][best][0];
        label(q);
        emit(u, best, q);
      }
      std::sort(cur.begin(), cur.end());
      const int lo = block[v], hi = block[v + 1];
      const int len = hi - lo;
      for (int i = 0; i < std::min<int>(len, static_cast<int>(cur.size())); ++i) {
        if (cur[i] < mine[lo + i]) return -1;
        if (mine[lo + i] < cur[i]) return 1;
      }
      if (static_cast<int>(cur.size()) != len) return static_cast<int>(cur.size()) < len ? -1 : 1;
      cur.clear();
    }
    return 0;
  }
};

}  // namespace

EnumerationRun enumerate_tori(int n, int workers) {
  EnumerationRun run;
  run.n = n;
  const auto t0 = std::chrono::steady_clock::now();
  const int bound = heawood_lower_bound(0);
  if (n < bound) {
    run.note = "no torus triangulation with " + std::to_string(n) +
               " vertices: the Heawood bound requires at least " + std::to_string(bound);
    return run;
  }
  if (n > kMaxN) throw SurfaceError("enumeration supports at most 16 vertices");

  // Grow the star of vertex 1 for each admissible degree; these are the
  // independent subtrees handed to workers.
  Partial root;
  Generator::init(root, n);
  root.m = 3;
  Generator::add(root, 1, 2, 3);
  std::vector<Partial> seeds;
  {
    auto grow = [&](auto&& self, const Partial& p) -> void {
      if (p.closed[1]) {
        seeds.push_back(p);
        return;
      }
      int a = 1;
      while (a <= p.m && p.cnt[1][a] != 1) ++a;
      const bool forward = p.dir[1][a];
      for (int w = 2; w <= std::min(p.m + 1, n); ++w) {
        if (w == a || w == p.opp[1][a]) continue;
        Partial q = p;
        if (w == p.m + 1) q.m = w;
        else if (p.cnt[1][w] != 1) continue;  // vertex 1 only closes or grows
        const bool ok = forward ? Generator::add(q, a, 1, w) : Generator::add(q, 1, a, w);
        if (ok && Generator::feasible(q)) self(self, q);
      }
    };
    grow(grow, root);
  }

  workers = std::max(1, std::min<int>(workers, static_cast<int>(seeds.size())));
  std::vector<Generator> gens(workers, Generator(n));
  auto work = [&](int id) {
    for (std::size_t i = id; i < seeds.size(); i += workers) gens[id].dfs(seeds[i]);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < workers; ++i) threads.emplace_back(work, i);
    for (auto& th : threads) th.join();
  }
  for (auto& g : gens) {
    run.stats.nodes += g.stats.nodes;
    run.stats.complete += g.stats.complete;
    for (auto& t : g.found) run.results.push_back(canonical_form(t));
  }
  std::sort(run.results.begin(), run.results.end());
  run.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

std::vector<EnumerationRun> enumerate_all_up_to(int nmax, int workers) {
  std::vector<EnumerationRun> runs;
  for (int n = heawood_lower_bound(0); n <= nmax; ++n) runs.push_back(enumerate_tori(n, workers));
  return runs;
}

std::filesystem::path corpus_path(const std::filesystem::path& dir, int n) {
  return dir / ("tori_n" + std::to_string(n) + ".txt");
}

void write_corpus(const std::filesystem::path& dir, const EnumerationRun& run) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(corpus_path(dir, run.n), std::ios::binary);
    for (const Triangulation& t : run.results) out << serialize(t) << '\n';
    if (!out) throw std::runtime_error("cannot write corpus for n=" + std::to_string(run.n));
  }
  std::ofstream meta(dir / ("tori_n" + std::to_string(run.n) + ".meta"), std::ios::binary);
  meta << "count=" << run.results.size() << '\n';
}

std::vector<Triangulation> read_corpus_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_triangulations(ss.str());
}

std::vector<Triangulation> load_or_enumerate(const std::filesystem::path& dir, int n,
                                             int workers) {
  const auto txt = corpus_path(dir, n);
  const auto meta = dir / ("tori_n" + std::to_string(n) + ".meta");
  if (std::filesystem::exists(txt) && std::filesystem::exists(meta)) {
    std::ifstream m(meta);
    std::string line;
    std::getline(m, line);
    auto tori = read_corpus_file(txt);
    if (line == "count=" + std::to_string(tori.size())) return tori;
  }
  EnumerationRun run = enumerate_tori(n, workers);
  write_corpus(dir, run);
  return std::move(run.results);
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("TORUSFORGE_CACHE"); env && *env) return env;
  return "torus_cache";
}

}  // namespace torusforge
