#pragma once

// File formats: realization and certificate JSON, OFF/OBJ meshes, and the
// run manifest embedded in every artifact the command-line tool writes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "torusforge/heuristic.hpp"
#include "torusforge/lattice_search.hpp"
#include "torusforge/realization.hpp"

namespace torusforge {

inline constexpr std::string_view kToolVersion = "0.1.0";

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, std::string>> parameters;  // in CLI order
  std::optional<std::uint64_t> seed;
  std::string version{kToolVersion};
  std::vector<std::string> outputs;

  std::string to_json() const;  // compact, stable field order
};

/// {"n", "facets", "coords", "class"?, "manifest"?}
std::string realization_json(const Realization& r, std::optional<Level> level = std::nullopt,
                             const RunManifest* manifest = nullptr);
Realization parse_realization_json(std::string_view text);

/// Wall time is left out unless `with_time` is set so that reruns of the
/// same task produce identical bytes.
std::string certificate_json(const Certificate& c, const RunManifest* manifest = nullptr,
                             bool with_time = false);

std::string minimal_json(const MinimalResult& m, const RunManifest* manifest = nullptr,
                         bool with_time = false);

/// Faces from the triangulation, or from merge_coplanar when `merged`.
/// Throws GeometryError for inputs below Linear or failed merges.
std::string export_off(const Realization& r, bool merged, const RunManifest* manifest = nullptr);
std::string export_obj(const Realization& r, bool merged, const RunManifest* manifest = nullptr);

struct Mesh {
  std::vector<Point3> vertices;
  std::vector<std::vector<int>> faces;  // 0-based
};
Mesh parse_obj(std::string_view text);
Mesh parse_off(std::string_view text);

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, std::string_view text);

}  // namespace torusforge
