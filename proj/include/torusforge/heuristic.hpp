#pragma once

// Randomized local search for realizations inside a box, coordinate
// shrinking, and corpus runs that recycle coordinates between neighbouring
// triangulations.
//
// The objective is an integer surrogate for the intersection edge
// functional ("IEF-surrogate"): the number of facet pairs that are
// incompatible, where a degenerate facet counts as incompatible with every
// other facet. It vanishes exactly on linear realizations.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "torusforge/lattice_search.hpp"
#include "torusforge/realization.hpp"

namespace torusforge {

struct HeuristicConfig {
  Cuboid box{4, 4, 4};
  int move_radius = 1;           // L-infinity radius of single-vertex moves
  double plateau = 0.4;          // probability of accepting a sideways move
  int restarts = 2000;
  std::uint64_t steps_per_restart = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct RestartLog {
  std::vector<std::int64_t> trajectory;  // objective after every improvement
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t steps = 0;
  bool success = false;
};

struct RunLog {
  std::vector<RestartLog> restarts;
  std::uint64_t steps = 0;
  std::string outcome;  // "success" or "budget exhausted"
};

struct HeuristicResult {
  std::optional<Realization> realization;
  RunLog log;
};

/// IEF-surrogate of candidate coordinates. Coincident vertices count as a
/// violation with every facet.
std::int64_t intersection_edge_functional(const Triangulation& t, const std::vector<Point3>& coords);

/// Collinear triples plus coplanar quadruples among all vertices.
std::int64_t general_position_penalty(const std::vector<Point3>& coords);

/// Local search inside cfg.box. `start`, when given, seeds restart 0.
HeuristicResult realize(const Triangulation& t, const HeuristicConfig& cfg, Level require,
                        const std::vector<Point3>* start = nullptr);

/// Moves the realization toward a smaller bounding cuboid while keeping its
/// class at least `require`. The result lies in [0,a]x[0,b]x[0,c] with
/// a <= b <= c.
Realization shrink(const Triangulation& t, const Realization& r, Level require);

struct CorpusItem {
  std::size_t index = 0;
  bool success = false;
  bool recycled = false;  // success came from the recycled start
  std::optional<Realization> realization;
  std::uint64_t steps = 0;
  double seconds = 0.0;
};

struct CorpusReport {
  std::vector<CorpusItem> items;
  std::size_t successes = 0;
  double seconds = 0.0;
};

/// Processes `list` in order; item i first restarts from the coordinates of
/// the most recent success. Item seeds derive from cfg.seed and i.
CorpusReport realize_corpus(const std::vector<Triangulation>& list, const HeuristicConfig& cfg,
                            Level require,
                            const std::function<void(const CorpusItem&)>& progress = {});

/// `<index> OK|FAIL <box> x,y,z;x,y,z;...|FAIL <steps>`
std::string format_corpus_line(const CorpusItem& item, const Cuboid& box);

}  // namespace torusforge
