#include "torusforge/exactgeom.hpp"

#include <algorithm>
#include <cstdlib>

namespace torusforge {

std::ostream& operator<<(std::ostream& os, const Point3& p) {
  return os << '(' << p.x << ',' << p.y << ',' << p.z << ')';
}

bool within_coord_limit(const Point3& p) {
  return std::llabs(p.x) <= kCoordLimit && std::llabs(p.y) <= kCoordLimit &&
         std::llabs(p.z) <= kCoordLimit;
}

void check_coord_limit(const Point3& p) {
  if (!within_coord_limit(p)) {
    throw GeometryError("coordinate bound 2^19 exceeded (overflow risk)");
  }
}

namespace {

struct P2 {
  std::int64_t u;
  std::int64_t v;
};

// Index of the axis along which |n| is largest; n must be nonzero.
int dominant_axis(const Point3& n) {
  const std::int64_t ax = std::llabs(n.x), ay = std::llabs(n.y), az = std::llabs(n.z);
  if (ax >= ay && ax >= az) return 0;
  return ay >= az ? 1 : 2;
}

P2 project(const Point3& p, int drop) {
  switch (drop) {
    case 0: return {p.y, p.z};
    case 1: return {p.z, p.x};
    default: return {p.x, p.y};
  }
}

int orient2d(const P2& a, const P2& b, const P2& c) {
  const std::int64_t d = (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
  return d > 0 ? 1 : (d < 0 ? -1 : 0);
}

bool on_closed_segment2d(const P2& p, const P2& a, const P2& b) {
  if (orient2d(a, b, p) != 0) return false;
  return std::min(a.u, b.u) <= p.u && p.u <= std::max(a.u, b.u) &&
         std::min(a.v, b.v) <= p.v && p.v <= std::max(a.v, b.v);
}

bool closed_segments_meet2d(const P2& a, const P2& b, const P2& c, const P2& d) {
  const int o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
  const int o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  return (o1 == 0 && on_closed_segment2d(c, a, b)) || (o2 == 0 && on_closed_segment2d(d, a, b)) ||
         (o3 == 0 && on_closed_segment2d(a, c, d)) || (o4 == 0 && on_closed_segment2d(b, c, d));
}

bool in_closed_triangle2d(const P2& p, const P2& a, const P2& b, const P2& c) {
  const int s = orient2d(a, b, c);
  return orient2d(a, b, p) * s >= 0 && orient2d(b, c, p) * s >= 0 && orient2d(c, a, p) * s >= 0;
}

int sgn(std::int64_t v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// For a triangle t with corner p (index ip), does the segment from p towards q
// contain points of t other than p? Requires q != p.
bool leaves_corner_into(const Triangle& t, int ip, const Point3& q) {
  const Point3& p = t.v[ip];
  const Point3& s = t.v[(ip + 1) % 3];
  const Point3& r = t.v[(ip + 2) % 3];
  if (orient3d_det(p, s, r, q) != 0) return false;
  const int drop = dominant_axis(cross(s - p, r - p));
  const P2 pp = project(p, drop), ps = project(s, drop), pr = project(r, drop), pq = project(q, drop);
  const int area = orient2d(pp, ps, pr);
  return orient2d(pp, ps, pq) * area >= 0 && orient2d(pp, pq, pr) * area >= 0;
}

}  // namespace

Sign orient3d(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  check_coord_limit(a);
  check_coord_limit(b);
  check_coord_limit(c);
  check_coord_limit(d);
  return sign_of(orient3d_det(a, b, c, d));
}

bool collinear(const Point3& a, const Point3& b, const Point3& c) {
  check_coord_limit(a);
  check_coord_limit(b);
  check_coord_limit(c);
  return cross(b - a, c - a) == Point3{};
}

namespace kernel {

bool is_degenerate(const Point3& a, const Point3& b, const Point3& c) {
  return cross(b - a, c - a) == Point3{};
}

bool on_closed_segment(const Point3& p, const Point3& a, const Point3& b) {
  return cross(b - a, p - a) == Point3{} && dot(p - a, p - b) <= 0;
}

bool on_open_segment(const Point3& p, const Point3& a, const Point3& b) {
  return cross(b - a, p - a) == Point3{} && dot(p - a, p - b) < 0;
}

bool in_closed_triangle(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
  if (orient3d_det(a, b, c, p) != 0) return false;
  const int drop = dominant_axis(cross(b - a, c - a));
  return in_closed_triangle2d(project(p, drop), project(a, drop), project(b, drop),
                              project(c, drop));
}

bool segment_meets_triangle(const Point3& p, const Point3& q, const Triangle& t) {
  const Point3 &a = t.v[0], &b = t.v[1], &c = t.v[2];
  const int op = sgn(orient3d_det(a, b, c, p));
  const int oq = sgn(orient3d_det(a, b, c, q));
  if (op * oq > 0) return false;
  if (op == 0 && oq == 0) {
    const int drop = dominant_axis(cross(b - a, c - a));
    const P2 pa = project(a, drop), pb = project(b, drop), pc = project(c, drop);
    const P2 pp = project(p, drop), pq = project(q, drop);
    return in_closed_triangle2d(pp, pa, pb, pc) || in_closed_triangle2d(pq, pa, pb, pc) ||
           closed_segments_meet2d(pp, pq, pa, pb) || closed_segments_meet2d(pp, pq, pb, pc) ||
           closed_segments_meet2d(pp, pq, pc, pa);
  }
  const int s1 = sgn(orient3d_det(p, q, a, b));
  const int s2 = sgn(orient3d_det(p, q, b, c));
  const int s3 = sgn(orient3d_det(p, q, c, a));
  return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
}

bool segments_compatible_unchecked(const Point3& a, const Point3& b, const Point3& c,
                                   const Point3& d) {
  const bool ac = a == c, ad = a == d, bc = b == c, bd = b == d;
  if ((ac && bd) || (ad && bc)) return false;
  if (ac || ad || bc || bd) {
    const Point3& s = (ac || ad) ? a : b;
    const Point3& x = (ac || ad) ? b : a;
    const Point3& y = (ac || bc) ? d : c;
    return !(cross(x - s, y - s) == Point3{} && dot(x - s, y - s) > 0);
  }
  if (orient3d_det(a, b, c, d) != 0) return true;
  const Point3 nc = cross(b - a, c - a);
  const Point3 nd = cross(b - a, d - a);
  if (nc == Point3{} && nd == Point3{}) {
    // All four points on one line: compare parameter intervals.
    const int axis = dominant_axis(b - a);
    auto coord = [axis](const Point3& p) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); };
    const auto [lo1, hi1] = std::minmax({coord(a), coord(b)});
    const auto [lo2, hi2] = std::minmax({coord(c), coord(d)});
    return hi1 < lo2 || hi2 < lo1;
  }
  const int drop = dominant_axis(nc == Point3{} ? nd : nc);
  return !closed_segments_meet2d(project(a, drop), project(b, drop), project(c, drop),
                                 project(d, drop));
}

bool triangles_compatible_unchecked(const Triangle& t1, const Triangle& t2) {
  int shared = 0;
  int i1[3], i2[3];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (t1.v[i] == t2.v[j]) {
        i1[shared] = i;
        i2[shared] = j;
        ++shared;
      }
    }
  }
  if (shared == 3) return false;
  if (shared == 2) {
    const Point3& p = t1.v[i1[0]];
    const Point3& r = t1.v[i1[1]];
    const Point3& x1 = t1.v[3 - i1[0] - i1[1]];
    const Point3& x2 = t2.v[3 - i2[0] - i2[1]];
    if (orient3d_det(p, r, x1, x2) != 0) return true;
    const int drop = dominant_axis(cross(r - p, x1 - p));
    const P2 pp = project(p, drop), pr = project(r, drop);
    return orient2d(pp, pr, project(x1, drop)) * orient2d(pp, pr, project(x2, drop)) < 0;
  }
  if (shared == 1) {
    const int p1 = i1[0], p2 = i2[0];
    const Point3& b1 = t1.v[(p1 + 1) % 3];
    const Point3& c1 = t1.v[(p1 + 2) % 3];
    const Point3& b2 = t2.v[(p2 + 1) % 3];
    const Point3& c2 = t2.v[(p2 + 2) % 3];
    if (segment_meets_triangle(b1, c1, t2) || segment_meets_triangle(b2, c2, t1)) return false;
    return !leaves_corner_into(t2, p2, b1) && !leaves_corner_into(t2, p2, c1) &&
           !leaves_corner_into(t1, p1, b2) && !leaves_corner_into(t1, p1, c2);
  }
  for (int i = 0; i < 3; ++i) {
    if (segment_meets_triangle(t1.v[i], t1.v[(i + 1) % 3], t2)) return false;
    if (segment_meets_triangle(t2.v[i], t2.v[(i + 1) % 3], t1)) return false;
  }
  return true;
}

}  // namespace kernel

bool segments_compatible(const Segment& s1, const Segment& s2) {
  for (const Point3* p : {&s1.a, &s1.b, &s2.a, &s2.b}) check_coord_limit(*p);
  if (s1.a == s1.b || s2.a == s2.b) throw GeometryError("degenerate segment");
  return kernel::segments_compatible_unchecked(s1.a, s1.b, s2.a, s2.b);
}

bool triangles_compatible(const Triangle& t1, const Triangle& t2) {
  for (const auto* t : {&t1, &t2}) {
    for (const Point3& p : t->v) check_coord_limit(p);
    if (kernel::is_degenerate(t->v[0], t->v[1], t->v[2]))
      throw GeometryError("degenerate triangle");
  }
  return kernel::triangles_compatible_unchecked(t1, t2);
}

bool triangles_compatible(const LabeledTriangle& t1, const LabeledTriangle& t2) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const bool same_label = t1.labels[i] == t2.labels[j];
      const bool same_point = t1.pts[i] == t2.pts[j];
      if (same_label && !same_point)
        throw GeometryError("label " + std::to_string(t1.labels[i]) + " has two positions");
      // Two different vertices on one point: the triangles touch outside
      // their common hull.
      if (!same_label && same_point) return false;
    }
  }
  return triangles_compatible(Triangle{t1.pts}, Triangle{t2.pts});
}

}  // namespace torusforge
