// torusforge command-line front end.
//
// Exit codes: 0 goal achieved, 1 error, 2 the search completed with the
// opposite outcome (None for search/minimal, a witness for certify),
// 3 budget exhausted.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "torusforge/enumerate.hpp"
#include "torusforge/heuristic.hpp"
#include "torusforge/io.hpp"
#include "torusforge/lattice_search.hpp"
#include "torusforge/realization.hpp"
#include "torusforge/surface.hpp"

using namespace torusforge;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitOpposite = 2;
constexpr int kExitTimeout = 3;

struct Source {
  std::string torus;   // "moebius", "tetrahedron" or a file
  int index = 0;       // line within a multi-line torus file
  std::string corpus;  // corpus file
  int n = 0;           // cached corpus for n vertices
  int first = 0;       // sub-range of the corpus
  int count = -1;
};

void add_source_options(CLI::App* app, Source& s) {
  app->add_option("--torus", s.torus, "moebius, tetrahedron, or a file of triangulation lines");
  app->add_option("--index", s.index, "line of the --torus file to use (0-based)");
  app->add_option("--corpus", s.corpus, "file with one triangulation per line");
  app->add_option("--n", s.n, "use the cached corpus of n-vertex tori (TORUSFORGE_CACHE)");
  app->add_option("--first", s.first, "skip this many corpus entries");
  app->add_option("--count", s.count, "process at most this many corpus entries");
}

std::vector<Triangulation> load_source(const Source& s, bool& is_corpus, int workers) {
  is_corpus = false;
  if (!s.torus.empty()) {
    if (s.torus == "moebius") return {moebius_torus()};
    if (s.torus == "tetrahedron") return {tetrahedron_boundary()};
    auto all = parse_triangulations(read_text_file(s.torus));
    if (s.index < 0 || s.index >= static_cast<int>(all.size()))
      throw std::invalid_argument("--index out of range for " + s.torus);
    return {all[s.index]};
  }
  std::vector<Triangulation> list;
  if (!s.corpus.empty()) {
    list = read_corpus_file(s.corpus);
  } else if (s.n > 0) {
    list = load_or_enumerate(default_cache_dir(), s.n, workers);
  } else {
    throw std::invalid_argument("give --torus, --corpus or --n");
  }
  is_corpus = true;
  const auto begin = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, s.first)), list.size());
  auto end = list.size();
  if (s.count >= 0) end = std::min(end, begin + static_cast<std::size_t>(s.count));
  return {list.begin() + static_cast<std::ptrdiff_t>(begin), list.begin() + static_cast<std::ptrdiff_t>(end)};
}

std::vector<std::string> source_inputs(const Source& s) {
  if (!s.torus.empty()) return {s.torus};
  if (!s.corpus.empty()) return {s.corpus};
  return {corpus_path(default_cache_dir(), s.n).string()};
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

template <class T>
std::string str(const T& v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

// ---------------------------------------------------------------------------

int cmd_enumerate(std::optional<int> n, std::optional<int> nmax, const std::string& out_dir, int workers) {
  const fs::path dir = out_dir.empty() ? default_cache_dir() : fs::path(out_dir);
  std::vector<EnumerationRun> runs;
  if (n) runs.push_back(enumerate_tori(*n, workers));
  if (nmax) runs = enumerate_all_up_to(*nmax, workers);
  RunManifest m;
  m.subcommand = "enumerate";
  if (n) m.parameters.push_back({"n", std::to_string(*n)});
  if (nmax) m.parameters.push_back({"nmax", std::to_string(*nmax)});
  m.parameters.push_back({"workers", std::to_string(workers)});
  std::size_t total = 0;
  for (const auto& run : runs) {
    write_corpus(dir, run);
    m.outputs = {corpus_path(dir, run.n).string()};
    std::ofstream meta(dir / ("tori_n" + std::to_string(run.n) + ".meta"), std::ios::app);
    meta << "manifest=" << m.to_json() << '\n';
    if (runs.size() == 1) {
      std::cout << "count=" << run.results.size() << '\n';
    } else {
      std::cout << "n=" << run.n << " count=" << run.results.size() << '\n';
    }
    if (!run.note.empty()) std::cout << "note: " << run.note << '\n';
    total += run.results.size();
  }
  if (runs.size() > 1) std::cout << "total=" << total << '\n';
  return kExitOk;
}

int cmd_verify(const std::string& file) {
  const Realization r = parse_realization_json(read_text_file(file));
  const RealizationClass cls = classify(r);
  if (cls.level == Level::NotEmbedded) {
    std::cout << "NotEmbedded: " << cls.reason << '\n';
    return kExitOk;
  }
  const Chirotope chi = chirotope(r);
  std::cout << to_string(cls.level) << ", chirotope " << (chi.uniform() ? "uniform" : "non-uniform");
  if (cls.level == Level::Linear) {
    const MergeResult m = merge_coplanar(r);
    if (const auto* map = std::get_if<PolyhedralMap>(&m)) {
      std::cout << "; merged map: " << map->faces.size() << " faces, " << map->edge_count() << " edges, "
                << map->vertices.size() << " vertices";
    } else {
      std::cout << "; merge failed: " << std::get<MergeFailure>(m).reason;
    }
  }
  std::cout << '\n';
  if (!cls.reason.empty() && cls.level != Level::GeneralPosition) std::cout << "reason: " << cls.reason << '\n';
  const SurfaceReport rep = validate(r.tri);
  std::cout << "surface: n=" << r.tri.n() << " euler=" << rep.euler
            << " genus=" << (rep.genus ? std::to_string(*rep.genus) : std::string("-"))
            << " box=" << bounding_cuboid(r.coords).to_string() << '\n';
  return kExitOk;
}

struct SearchArgs {
  Source src;
  std::string cuboid;
  std::string mode = "gp";
  std::string goal;
  std::uint64_t max_nodes = 0;
  double max_seconds = 0;
  int workers = 1;
  std::string strategy = "auto";
  bool no_gp_pruning = false;
  bool no_symmetry = false;
  bool with_time = false;
  std::string out;
};

void add_search_options(CLI::App* app, SearchArgs& a, bool need_cuboid) {
  add_source_options(app, a.src);
  auto* c = app->add_option("--cuboid", a.cuboid, "lattice box AxBxC with A<=B<=C");
  if (need_cuboid) c->required();
  app->add_option("--mode", a.mode, "gp or linear")->check(CLI::IsMember({"gp", "linear"}));
  app->add_option("--max-nodes", a.max_nodes, "node budget per task (0 = unlimited)");
  app->add_option("--max-seconds", a.max_seconds, "time budget per task (0 = unlimited)");
  app->add_option("--workers", a.workers, "parallel workers");
  app->add_option("--strategy", a.strategy, "auto, vertex or pointset (pointset: gp only)")
      ->check(CLI::IsMember({"auto", "vertex", "pointset"}));
  app->add_flag("--no-gp-pruning", a.no_gp_pruning, "check general position only on complete assignments");
  app->add_flag("--no-symmetry", a.no_symmetry, "disable cuboid symmetry breaking");
  app->add_flag("--record-time", a.with_time, "include wall times in the output");
  app->add_option("--out", a.out, "output file (default stdout)");
}

RunManifest search_manifest(const std::string& sub, const SearchArgs& a) {
  RunManifest m;
  m.subcommand = sub;
  m.inputs = source_inputs(a.src);
  m.parameters = {{"cuboid", a.cuboid},
                  {"mode", a.mode},
                  {"goal", a.goal},
                  {"max_nodes", std::to_string(a.max_nodes)},
                  {"max_seconds", str(a.max_seconds)},
                  {"workers", std::to_string(a.workers)},
                  {"strategy", a.strategy},
                  {"gp_plane_pruning", a.no_gp_pruning ? "false" : "true"},
                  {"symmetry_breaking", a.no_symmetry ? "false" : "true"}};
  if (!a.src.torus.empty()) m.parameters.push_back({"index", std::to_string(a.src.index)});
  if (a.src.first || a.src.count >= 0)
    m.parameters.push_back({"range", std::to_string(a.src.first) + "+" + std::to_string(a.src.count)});
  if (!a.out.empty()) m.outputs = {a.out};
  return m;
}

SearchTask make_task(const Triangulation& t, const SearchArgs& a) {
  SearchTask task;
  task.tri = t;
  task.cuboid = Cuboid::parse(a.cuboid).canonical();
  task.mode = parse_mode(a.mode);
  task.goal = parse_goal(a.goal);
  task.budget = {a.max_nodes, a.max_seconds};
  task.workers = a.workers;
  task.strategy = parse_strategy(a.strategy);
  task.gp_plane_pruning = !a.no_gp_pruning;
  task.symmetry_breaking = !a.no_symmetry;
  return task;
}

int cmd_search(const std::string& sub, SearchArgs a) {
  if (a.goal.empty()) a.goal = sub == "certify" ? "none" : "first";
  bool corpus = false;
  const auto list = load_source(a.src, corpus, a.workers);
  const RunManifest m = search_manifest(sub, a);

  std::vector<Certificate> certs;
  std::optional<SegmentPacking> packing;
  std::size_t witness = 0, none = 0, timeout = 0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    SearchTask task = make_task(list[i], a);
    Certificate cert;
    bool decided = false;
    if (sub == "certify" && task.mode == SearchMode::Linear && task.cuboid.point_count() <= 32 &&
        task.cuboid.a > 0) {
      if (!packing) packing = max_compatible_segments(task.cuboid);
      if (packing->complete && edge_count_obstruction(task.cuboid, task.tri.n(), packing->count)) {
        cert.task = task;
        cert.outcome = Outcome::None;
        cert.rule = "edge_count";
        cert.cuboid_group_order = static_cast<int>(cuboid_symmetries(task.cuboid).size());
        cert.automorphism_group_order = static_cast<int>(automorphisms(task.tri).size());
        decided = true;
      }
    }
    if (!decided) cert = run(task);
    witness += cert.outcome == Outcome::Witness;
    none += cert.outcome == Outcome::None;
    timeout += cert.outcome == Outcome::Timeout;
    if (corpus) {
      std::cerr << (a.src.first + static_cast<int>(i)) << ' ' << to_string(cert.outcome) << '\n';
    }
    certs.push_back(std::move(cert));
  }

  if (!corpus) {
    std::string text = certificate_json(certs.front(), &m, a.with_time);
    if (packing) {
      text.pop_back();
      text.pop_back();  // reopen the object to add the segment bound
      std::ostringstream extra;
      extra << ",\n  \"segment_bound\": {\"max_compatible\": " << packing->count
            << ", \"segments\": " << packing->total_segments << "}\n}\n";
      text += extra.str();
    }
    emit(a.out, text);
    const Certificate& c = certs.front();
    std::cerr << to_string(c.outcome) << (c.rule.empty() ? "" : " (" + c.rule + ")") << " nodes=" << c.stats.nodes
              << " witnesses=" << c.witnesses.size() << '\n';
    if (c.outcome == Outcome::Timeout) return kExitTimeout;
    const bool achieved = sub == "certify" ? c.outcome == Outcome::None : c.outcome == Outcome::Witness;
    return achieved ? kExitOk : kExitOpposite;
  }

  std::ostringstream out;
  out << "{\n  \"tool\": \"torusforge\",\n  \"summary\": {\"tasks\": " << certs.size() << ", \"witness\": " << witness
      << ", \"none\": " << none << ", \"timeout\": " << timeout << "},\n  \"certificates\": [\n";
  for (std::size_t i = 0; i < certs.size(); ++i) {
    std::string c = certificate_json(certs[i], nullptr, a.with_time);
    while (!c.empty() && c.back() == '\n') c.pop_back();
    out << c << (i + 1 < certs.size() ? ",\n" : "\n");
  }
  out << "  ],\n  \"manifest\": " << m.to_json() << "\n}\n";
  emit(a.out, out.str());
  std::cout << "witness=" << witness << " none=" << none << " timeout=" << timeout
            << '\n';
  return timeout ? kExitTimeout : kExitOk;
}

int cmd_minimal(SearchArgs a, int max_points) {
  a.goal = "first";
  bool corpus = false;
  const auto list = load_source(a.src, corpus, a.workers);
  if (corpus) throw std::invalid_argument("minimal takes a single --torus");
  RunManifest m = search_manifest("minimal", a);
  m.parameters.push_back({"max_points", std::to_string(max_points)});
  const MinimalResult res =
      minimal_cuboid(list.front(), parse_mode(a.mode), {a.max_nodes, a.max_seconds}, max_points, a.workers);
  emit(a.out.empty() ? "" : a.out, minimal_json(res, &m, a.with_time));
  if (res.cuboid) {
    std::cerr << res.cuboid->to_string() << '\n';
    if (!a.out.empty()) std::cout << res.cuboid->to_string() << '\n';
    return kExitOk;
  }
  std::cerr << (res.timed_out ? "Timeout" : "None") << '\n';
  return res.timed_out ? kExitTimeout : kExitOpposite;
}

struct HeurArgs {
  Source src;
  std::string box = "4x4x4";
  std::string level = "gp";
  std::optional<std::uint64_t> seed;
  int restarts = HeuristicConfig{}.restarts;
  std::uint64_t steps = HeuristicConfig{}.steps_per_restart;
  int radius = 1;
  double plateau = HeuristicConfig{}.plateau;
  int workers = 1;
  bool do_shrink = false;
  std::string out;
};

int cmd_heuristic(const HeurArgs& a) {
  bool corpus = false;
  const auto list = load_source(a.src, corpus, a.workers);
  HeuristicConfig cfg;
  cfg.box = Cuboid::parse(a.box);
  cfg.seed = *a.seed;
  cfg.restarts = a.restarts;
  cfg.steps_per_restart = a.steps;
  cfg.move_radius = a.radius;
  cfg.plateau = a.plateau;
  cfg.workers = a.workers;
  const Level require = parse_level(a.level);

  RunManifest m;
  m.subcommand = "heuristic";
  m.inputs = source_inputs(a.src);
  m.parameters = {{"box", a.box},           {"level", a.level},
                  {"restarts", std::to_string(a.restarts)}, {"steps", std::to_string(a.steps)},
                  {"radius", std::to_string(a.radius)},     {"plateau", str(a.plateau)},
                  {"workers", std::to_string(a.workers)},   {"shrink", a.do_shrink ? "true" : "false"}};
  if (!a.src.torus.empty()) m.parameters.push_back({"index", std::to_string(a.src.index)});
  if (a.src.first || a.src.count >= 0)
    m.parameters.push_back({"range", std::to_string(a.src.first) + "+" + std::to_string(a.src.count)});
  m.seed = a.seed;
  if (!a.out.empty()) m.outputs = {a.out};

  if (!corpus) {
    HeuristicResult res = realize(list.front(), cfg, require);
    if (!res.realization) {
      std::cerr << "FAIL after " << res.log.steps << " steps (" << res.log.restarts.size() << " restarts)\n";
      return kExitOpposite;
    }
    Realization r = *res.realization;
    if (a.do_shrink) r = shrink(r.tri, r, require);
    emit(a.out, realization_json(r, classify(r).level, &m));
    std::cerr << "OK box=" << bounding_cuboid(r.coords).to_string() << " steps=" << res.log.steps << '\n';
    return kExitOk;
  }

  std::ostringstream out;
  out << "# manifest " << m.to_json() << '\n';
  const CorpusReport rep = realize_corpus(list, cfg, require, [&](const CorpusItem& it) {
    CorpusItem shown = it;
    shown.index = it.index + static_cast<std::size_t>(a.src.first);
    if (a.do_shrink && shown.realization) shown.realization = shrink(list[it.index], *shown.realization, require);
    out << format_corpus_line(shown, cfg.box) << '\n';
  });
  out << "# successes " << rep.successes << '/' << list.size() << '\n';
  emit(a.out, out.str());
  std::cerr << "successes=" << rep.successes << '/' << list.size() << '\n';
  return rep.successes == list.size() ? kExitOk : kExitOpposite;
}

int cmd_chirotope(const std::vector<std::string>& files, bool canonical, bool classes) {
  std::vector<Realization> rs;
  for (const auto& f : files) rs.push_back(parse_realization_json(read_text_file(f)));
  std::vector<Chirotope> chis;
  for (const auto& r : rs) chis.push_back(chirotope(r));
  const auto aut = automorphisms(rs.front().tri);
  if (classes) {
    for (const auto& r : rs)
      if (!(r.tri == rs.front().tri)) throw std::invalid_argument("--classes needs realizations of one triangulation");
    const auto cls = om_classes(chis, aut);
    std::cout << "classes=" << cls.size() << '\n';
    for (const auto& c : cls) {
      std::cout << c.representative.to_string() << " members=";
      for (std::size_t i = 0; i < c.members.size(); ++i) std::cout << (i ? "," : "") << files[c.members[i]];
      std::cout << '\n';
    }
    return kExitOk;
  }
  for (const auto& c : chis) std::cout << (canonical ? om_canonical(c, aut) : c).to_string() << '\n';
  return kExitOk;
}

int cmd_export(const std::string& file, const std::string& format, bool merged, const std::string& out) {
  const Realization r = parse_realization_json(read_text_file(file));
  RunManifest m;
  m.subcommand = "export";
  m.inputs = {file};
  m.parameters = {{"format", format}, {"merged", merged ? "true" : "false"}};
  if (!out.empty()) m.outputs = {out};
  emit(out, format == "off" ? export_off(r, merged, &m) : export_obj(r, merged, &m));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"torusforge: lattice realizations of triangulated tori"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::optional<int> en_n, en_nmax;
  std::string en_out;
  int en_workers = 1;
  auto* en = app.add_subcommand("enumerate", "enumerate tori and write corpus files");
  auto* en_n_opt = en->add_option("--n", en_n, "vertex count");
  en->add_option("--nmax", en_nmax, "all vertex counts up to this one")->excludes(en_n_opt);
  en->add_option("--out", en_out, "corpus directory (default TORUSFORGE_CACHE or ./torus_cache)");
  en->add_option("--workers", en_workers, "parallel workers");

  std::string ver_file;
  auto* ver = app.add_subcommand("verify", "classify a realization file");
  ver->add_option("file", ver_file, "realization JSON")->required();

  SearchArgs se, ce, mi;
  auto* search = app.add_subcommand("search", "exhaustive lattice search");
  add_search_options(search, se, true);
  search->add_option("--goal", se.goal, "first, all or none")->check(CLI::IsMember({"first", "all", "none"}));
  auto* certify = app.add_subcommand("certify", "prove that no realization exists in a cuboid");
  add_search_options(certify, ce, true);
  int max_points = 125;
  auto* minimal = app.add_subcommand("minimal", "smallest cuboid admitting a realization");
  add_search_options(minimal, mi, false);
  minimal->add_option("--max-points", max_points, "largest cuboid point count to try");

  HeurArgs he;
  auto* heur = app.add_subcommand("heuristic", "randomized realization search");
  add_source_options(heur, he.src);
  heur->add_option("--box", he.box, "box AxBxC");
  heur->add_option("--mode", he.level, "gp, proper or linear")->check(CLI::IsMember({"gp", "proper", "linear"}));
  heur->add_option("--seed", he.seed, "random seed")->required();
  heur->add_option("--restarts", he.restarts, "restarts per triangulation");
  heur->add_option("--steps", he.steps, "steps per restart");
  heur->add_option("--radius", he.radius, "move radius");
  heur->add_option("--plateau", he.plateau, "sideways acceptance probability");
  heur->add_option("--workers", he.workers, "parallel restarts");
  heur->add_flag("--shrink", he.do_shrink, "shrink successful realizations");
  heur->add_option("--out", he.out, "output file (default stdout)");

  std::vector<std::string> chi_files;
  bool chi_canonical = false, chi_classes = false;
  auto* chi = app.add_subcommand("chirotope", "print chirotopes of realization files");
  chi->add_option("files", chi_files, "realization JSON files")->required();
  chi->add_flag("--canonical", chi_canonical, "print the canonical representative under automorphisms");
  chi->add_flag("--classes", chi_classes, "group the inputs into oriented matroid classes");

  std::string ex_file, ex_format = "off", ex_out;
  bool ex_merged = false;
  auto* ex = app.add_subcommand("export", "write an OFF or OBJ mesh");
  ex->add_option("file", ex_file, "realization JSON")->required();
  ex->add_option("--format", ex_format, "off or obj")->check(CLI::IsMember({"off", "obj"}));
  ex->add_flag("--merged", ex_merged, "merge coplanar neighbours into polygons");
  ex->add_option("--out", ex_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*en) {
      if (!en_n && !en_nmax) throw std::invalid_argument("enumerate needs --n or --nmax");
      return cmd_enumerate(en_n, en_nmax, en_out, en_workers);
    }
    if (*ver) return cmd_verify(ver_file);
    if (*search) return cmd_search("search", se);
    if (*certify) return cmd_search("certify", ce);
    if (*minimal) return cmd_minimal(mi, max_points);
    if (*heur) return cmd_heuristic(he);
    if (*chi) return cmd_chirotope(chi_files, chi_canonical, chi_classes);
    if (*ex) return cmd_export(ex_file, ex_format, ex_merged, ex_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
