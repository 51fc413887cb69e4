#pragma once

// Exhaustive search for realizations whose vertices are integer points of an
// a x b x c cuboid. Vertices are placed one at a time; every check that
// becomes decidable after a placement runs immediately with exact integer
// predicates. The cuboid symmetry group is broken by only accepting point
// sequences that are lexicographically minimal in their orbit.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "torusforge/realization.hpp"
#include "torusforge/surface.hpp"

namespace torusforge {

struct Cuboid {
  int a = 0, b = 0, c = 0;

  int point_count() const { return (a + 1) * (b + 1) * (c + 1); }
  Cuboid canonical() const;
  bool is_canonical() const { return a <= b && b <= c; }
  /// Lattice points in x-major order: index = (x*(b+1) + y)*(c+1) + z.
  std::vector<Point3> points() const;
  bool contains(const Point3& p) const;
  std::string to_string() const;  // "2x3x3"
  static Cuboid parse(std::string_view s);

  friend bool operator==(const Cuboid&, const Cuboid&) = default;
};

/// Minimality order: point count first, then lexicographic on sorted sides.
bool cuboid_less(const Cuboid& x, const Cuboid& y);

/// Canonical cuboids with n <= point count <= max_points, in minimality order.
std::vector<Cuboid> cuboids_in_order(int n, int max_points);

/// Smallest canonical cuboid containing the realization after translating
/// its bounding box to the origin.
Cuboid bounding_cuboid(const std::vector<Point3>& pts);

/// A lattice isometry of a canonical cuboid: coordinate i of the image is
/// coordinate perm[i] of the source, reflected when flip[i] is set.
struct CuboidSymmetry {
  std::array<int, 3> perm{0, 1, 2};
  std::array<bool, 3> flip{false, false, false};

  Point3 apply(const Cuboid& c, const Point3& p) const;
};

/// All axis reflections combined with permutations of equal-length axes.
std::vector<CuboidSymmetry> cuboid_symmetries(const Cuboid& c);

enum class SearchMode : std::uint8_t { GeneralPosition, Linear };
enum class SearchGoal : std::uint8_t { FirstWitness, AllUpToSymmetry, ProveNone };
enum class Outcome : std::uint8_t { Witness, None, Timeout };

/// VertexFirst places vertices one at a time. PointSetFirst (general
/// position only) enumerates general-position point sets of size n up to
/// cuboid symmetry, then assigns vertices to the points of each set. Auto
/// picks PointSetFirst for general position in cuboids of at most 64 points.
enum class SearchStrategy : std::uint8_t { Auto, VertexFirst, PointSetFirst };

std::string_view to_string(SearchMode m);
std::string_view to_string(SearchGoal g);
std::string_view to_string(Outcome o);
std::string_view to_string(SearchStrategy s);
SearchMode parse_mode(std::string_view s);
SearchGoal parse_goal(std::string_view s);
SearchStrategy parse_strategy(std::string_view s);

struct Budget {
  std::uint64_t max_nodes = 0;  // 0 = unlimited
  double max_seconds = 0.0;     // 0 = unlimited
};

struct SearchTask {
  Triangulation tri;
  Cuboid cuboid;
  SearchMode mode = SearchMode::GeneralPosition;
  SearchGoal goal = SearchGoal::FirstWitness;
  Budget budget;
  int workers = 1;
  /// Forbid points on lines and planes spanned by placed vertices. When off,
  /// general position is only checked on complete assignments.
  bool gp_plane_pruning = true;
  bool symmetry_breaking = true;
  SearchStrategy strategy = SearchStrategy::Auto;
};

struct SearchStats {
  std::uint64_t nodes = 0;
  std::map<std::string, std::uint64_t> prunes;  // by rule name
  std::uint64_t raw_solutions = 0;              // before orbit deduplication
  std::uint64_t point_sets = 0;                 // sets examined by PointSetFirst
  double seconds = 0.0;
};

struct Certificate {
  SearchTask task;
  Outcome outcome = Outcome::None;
  std::vector<Realization> witnesses;
  SearchStats stats;
  int cuboid_group_order = 0;
  int automorphism_group_order = 0;
  /// Set when a closed-form rule decided the task without traversal.
  std::string rule;
};

Certificate run(const SearchTask& task);

struct MinimalResult {
  std::optional<Cuboid> cuboid;          // empty when nothing was found
  std::optional<Certificate> witness;    // certificate of the winning cuboid
  std::vector<Certificate> excluded;     // None certificates, in order
  bool timed_out = false;
};

/// Walks cuboids_in_order(n, max_points) until a witness appears.
MinimalResult minimal_cuboid(const Triangulation& t, SearchMode mode, const Budget& per_cuboid,
                             int max_points = 125, int workers = 1);

struct SegmentPacking {
  int count = 0;
  int total_segments = 0;
  std::vector<std::pair<Point3, Point3>> segments;
  std::uint64_t nodes = 0;
  bool complete = true;
};

/// Maximum set of pairwise compatible segments between lattice points of c
/// (at most 32 points).
SegmentPacking max_compatible_segments(const Cuboid& c, const Budget& budget = {});

/// True iff an n-vertex torus needs more than max_edges edges (3n > max_edges).
bool edge_count_obstruction(const Cuboid& c, int n, int max_edges);

}  // namespace torusforge
