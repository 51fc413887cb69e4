#pragma once

// Isomorphism-free generation of triangulated tori.
//
// Facet lists are grown one facet at a time: the current vertex is the
// smallest one whose link is still open, the facet is glued onto the smallest
// open edge of that link, and a fresh vertex always receives the next unused
// label. Every labeled complex produced this way is tested at completion
// against all other starts of the same growth rule; only the minimal one
// survives, so each isomorphism class is emitted exactly once.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "torusforge/surface.hpp"

namespace torusforge {

struct EnumerationStats {
  std::uint64_t nodes = 0;
  std::uint64_t complete = 0;  // closed complexes reaching the canonicity test
  double seconds = 0.0;
};

struct EnumerationRun {
  int n = 0;
  /// Canonical forms, sorted by facet list.
  std::vector<Triangulation> results;
  EnumerationStats stats;
  std::string note;
};

/// All tori with exactly n vertices, n <= 16. Below the Heawood bound the
/// result is empty with an explanatory note. `workers` splits the tree at the
/// degree of vertex 1; the output does not depend on it.
EnumerationRun enumerate_tori(int n, int workers = 1);

std::vector<EnumerationRun> enumerate_all_up_to(int nmax, int workers = 1);

/// Corpus file names: tori_n<k>.txt and tori_n<k>.meta.
std::filesystem::path corpus_path(const std::filesystem::path& dir, int n);
void write_corpus(const std::filesystem::path& dir, const EnumerationRun& run);
std::vector<Triangulation> read_corpus_file(const std::filesystem::path& file);

/// Reads dir/tori_n<k>.txt when present and its meta count matches;
/// otherwise enumerates and writes the cache.
std::vector<Triangulation> load_or_enumerate(const std::filesystem::path& dir, int n,
                                             int workers = 1);

/// Corpus directory from TORUSFORGE_CACHE, defaulting to ./torus_cache.
std::filesystem::path default_cache_dir();

}  // namespace torusforge
