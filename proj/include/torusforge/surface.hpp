#pragma once

// Combinatorial triangulated surfaces: the facet-list data model, closed
// surface validation, symmetry, canonical labeling and the text format.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace torusforge {

/// Vertex triple with 1-based labels, stored in ascending order.
using Facet = std::array<int, 3>;
using Edge = std::pair<int, int>;

/// perm[i] is the image of label i+1 (images are 1-based labels).
using Permutation = std::vector<int>;

class SurfaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class Triangulation {
 public:
  Triangulation() = default;
  /// Sorts the facets. Throws SurfaceError for out-of-range or unused labels,
  /// degenerate or repeated facets.
  Triangulation(int n, std::vector<Facet> facets);

  int n() const { return n_; }
  const std::vector<Facet>& facets() const { return facets_; }
  std::size_t facet_count() const { return facets_.size(); }

  /// Sorted list of edges (a < b).
  std::vector<Edge> edges() const;
  std::size_t edge_count() const { return edges().size(); }
  std::vector<int> degrees() const;  // index 0 unused

  Triangulation relabeled(std::span<const int> perm) const;

  friend bool operator==(const Triangulation&, const Triangulation&) = default;
  friend auto operator<=>(const Triangulation& a, const Triangulation& b) {
    if (a.n_ != b.n_) return a.n_ <=> b.n_;
    return a.facets_ <=> b.facets_;
  }

 private:
  int n_ = 0;
  std::vector<Facet> facets_;
};

struct SurfaceReport {
  int euler = 0;
  bool orientable = false;
  bool connected = false;
  std::optional<int> genus;
  std::size_t edge_count = 0;
  std::size_t facet_count = 0;
};

std::vector<Triangulation> parse_triangulations(std::string_view text);
Triangulation parse_triangulation_line(std::string_view line, std::size_t line_no = 1);
std::string serialize(const Triangulation& t);

/// Checks the closed 2-manifold conditions; throws SurfaceError naming the
/// offending edge or vertex link.
SurfaceReport validate(const Triangulation& t);

/// Smallest n with n >= (7 + sqrt(49 - 24 chi)) / 2. Exact integer evaluation.
int heawood_lower_bound(int chi);

bool is_neighborly(const Triangulation& t);

/// All label permutations that map the facet set onto itself. The identity
/// comes first; the rest are in lexicographic order.
std::vector<Permutation> automorphisms(const Triangulation& t);

/// Relabeling with lexicographically smallest sorted facet list. Requires a
/// connected closed surface.
Triangulation canonical_form(const Triangulation& t);
/// Same, also returning one permutation that maps t onto its canonical form.
std::pair<Triangulation, Permutation> canonical_labeling(const Triangulation& t);

bool is_torus(const Triangulation& t);

/// The 7-vertex torus with facets {i,i+1,i+3}, {i,i+2,i+3} mod 7, in
/// canonical labeling.
Triangulation moebius_torus();
Triangulation tetrahedron_boundary();

Permutation compose(std::span<const int> outer, std::span<const int> inner);
Permutation inverse(std::span<const int> perm);
Permutation identity_permutation(int n);

}  // namespace torusforge
