#pragma once

// Realizations of triangulations by lattice points: classification into the
// nested levels linear / proper / general position, chirotopes and their
// equivalence classes, and merging of coplanar neighbours into polyhedral
// maps.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "torusforge/exactgeom.hpp"
#include "torusforge/surface.hpp"

namespace torusforge {

struct Realization {
  Triangulation tri;
  std::vector<Point3> coords;  // coords[v-1] is the position of label v

  const Point3& at(int label) const { return coords[label - 1]; }
  /// Throws GeometryError on arity mismatch or coordinate bound violation.
  void check() const;
};

enum class Level : std::uint8_t { NotEmbedded = 0, Linear = 1, Proper = 2, GeneralPosition = 3 };

std::string_view to_string(Level level);
Level parse_level(std::string_view s);

struct RealizationClass {
  Level level = Level::NotEmbedded;
  /// Human-readable cause for the first failed level.
  std::string reason;
  /// Offending labels: a coincident pair, a degenerate facet, the six labels
  /// of an intersecting facet pair, a collinear triple or coplanar quadruple.
  std::vector<int> witness;
  /// Edge-adjacent coplanar facet pairs (present for Linear).
  std::vector<std::pair<Facet, Facet>> coplanar_pairs;
};

RealizationClass classify(const Realization& r);
bool in_general_position(const std::vector<Point3>& points);

struct Chirotope {
  int n = 0;
  /// One sign per 4-subset of 1..n in lexicographic order.
  std::vector<Sign> signs;

  bool uniform() const;
  Chirotope negated() const;
  /// Sign of the sorted subset {i<j<k<l}.
  Sign at(int i, int j, int k, int l) const;
  /// `n=<k> ` followed by one of + - 0 per subset.
  std::string to_string() const;
  static Chirotope parse(std::string_view line);

  friend bool operator==(const Chirotope&, const Chirotope&) = default;
  friend auto operator<=>(const Chirotope& a, const Chirotope& b) {
    if (a.n != b.n) return a.n <=> b.n;
    return a.signs <=> b.signs;
  }
};

/// Lexicographic rank of the 4-subset {i<j<k<l} of 1..n.
std::size_t subset_rank(int n, int i, int j, int k, int l);

Chirotope chirotope(const Realization& r);
/// The chirotope after relabeling every vertex v as perm[v-1].
Chirotope relabel(const Chirotope& c, const Permutation& perm);
bool om_equivalent(const Chirotope& c1, const Chirotope& c2, const std::vector<Permutation>& aut);
/// Smallest sign vector in the orbit of c under aut and global negation.
Chirotope om_canonical(const Chirotope& c, const std::vector<Permutation>& aut);

struct OmClass {
  Chirotope representative;     // om_canonical of the members
  std::vector<std::size_t> members;  // indices into the input list, ascending
};
/// Classes ordered by their smallest member chirotope.
std::vector<OmClass> om_classes(const std::vector<Chirotope>& chis,
                                const std::vector<Permutation>& aut);

struct PolyhedralMap {
  std::vector<int> vertices;                 // labels kept as corners
  std::vector<std::vector<int>> faces;       // corner cycles
  std::vector<std::vector<Facet>> provenance;  // input facets merged into each face
  std::size_t edge_count() const;
};

struct MergeFailure {
  std::string reason;
  std::vector<std::size_t> faces;  // indices of the offending merged groups
};

using MergeResult = std::variant<PolyhedralMap, MergeFailure>;

/// Requires classify(r).level >= Linear; throws GeometryError otherwise.
MergeResult merge_coplanar(const Realization& r);

}  // namespace torusforge
