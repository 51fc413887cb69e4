#pragma once

// Exact integer geometric predicates in 3-space.
//
// Every predicate here works on 64-bit signed lattice coordinates and never
// rounds. Coordinates are bounded by kCoordLimit so that all 3x3 determinants
// of coordinate differences fit in int64_t.

#include <array>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace torusforge {

/// Largest admissible absolute coordinate value (2^19).
inline constexpr std::int64_t kCoordLimit = std::int64_t{1} << 19;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point3 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  friend constexpr bool operator==(const Point3&, const Point3&) = default;
  friend constexpr auto operator<=>(const Point3&, const Point3&) = default;

  constexpr Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Point3 operator-() const { return {-x, -y, -z}; }
};

std::ostream& operator<<(std::ostream& os, const Point3& p);

enum class Sign : std::int8_t { Negative = -1, Zero = 0, Positive = 1 };

constexpr Sign sign_of(std::int64_t v) {
  return v > 0 ? Sign::Positive : (v < 0 ? Sign::Negative : Sign::Zero);
}
constexpr Sign operator-(Sign s) { return static_cast<Sign>(-static_cast<int>(s)); }
constexpr int to_int(Sign s) { return static_cast<int>(s); }

struct Segment {
  Point3 a;
  Point3 b;
};

struct Triangle {
  std::array<Point3, 3> v;
};

/// A triangle whose corners carry vertex labels of a triangulation.
struct LabeledTriangle {
  std::array<int, 3> labels;
  std::array<Point3, 3> pts;
};

bool within_coord_limit(const Point3& p);
/// Throws GeometryError when |coordinate| exceeds kCoordLimit.
void check_coord_limit(const Point3& p);

constexpr Point3 cross(const Point3& u, const Point3& v) {
  return {u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
}
constexpr std::int64_t dot(const Point3& u, const Point3& v) {
  return u.x * v.x + u.y * v.y + u.z * v.z;
}

/// det[b-a, c-a, d-a] without bound checks. Callers guarantee kCoordLimit.
constexpr std::int64_t orient3d_det(const Point3& a, const Point3& b, const Point3& c,
                                    const Point3& d) {
  return dot(cross(b - a, c - a), d - a);
}

Sign orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d);
bool collinear(const Point3& a, const Point3& b, const Point3& c);

/// True iff the closed segments meet exactly in their shared endpoints.
bool segments_compatible(const Segment& s1, const Segment& s2);

/// True iff the closed triangles meet exactly in the convex hull of their
/// common corners (nothing, a vertex, or an edge). Shared corners are
/// detected by point equality. Throws on degenerate input.
bool triangles_compatible(const Triangle& t1, const Triangle& t2);

/// Labeled variant: shared labels must coincide with shared points.
bool triangles_compatible(const LabeledTriangle& t1, const LabeledTriangle& t2);

// Lower-level pieces, also used by the search kernels. None of these check
// coordinate bounds.
namespace kernel {

bool is_degenerate(const Point3& a, const Point3& b, const Point3& c);
/// p lies on the closed segment [a,b].
bool on_closed_segment(const Point3& p, const Point3& a, const Point3& b);
/// p lies strictly between a and b.
bool on_open_segment(const Point3& p, const Point3& a, const Point3& b);
/// p lies in the closed triangle (a,b,c); triangle must be non-degenerate.
bool in_closed_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c);
/// The closed segment [p,q] meets the closed triangle at all.
bool segment_meets_triangle(const Point3& p, const Point3& q, const Triangle& t);
bool segments_compatible_unchecked(const Point3& a, const Point3& b, const Point3& c,
                                   const Point3& d);
bool triangles_compatible_unchecked(const Triangle& t1, const Triangle& t2);

}  // namespace kernel

}  // namespace torusforge
