#pragma once

// Brute-force reference for triangle intersections, written independently
// of the library kernel: exact rationals, explicit construction of every
// candidate extreme point of the intersection of two closed triangles.

#include <array>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Q = boost::multiprecision::cpp_rational;

struct V {
  Q x, y, z;
};

inline V sub(const V& a, const V& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline V add(const V& a, const V& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline V scale(const V& a, const Q& t) { return {a.x * t, a.y * t, a.z * t}; }
inline Q dotq(const V& a, const V& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline V crossq(const V& a, const V& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline bool same(const V& a, const V& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
inline bool is_zero(const V& a) { return a.x == 0 && a.y == 0 && a.z == 0; }

using Tri = std::array<V, 3>;

// Points of the closed segment p + t(q - p), t in [lo, hi], lying in the
// closed triangle; returned as the endpoints of that sub-segment.
inline std::vector<V> clip_segment(const V& p, const V& q, const Tri& t) {
  const V n = crossq(sub(t[1], t[0]), sub(t[2], t[0]));
  const V d = sub(q, p);
  Q lo = 0, hi = 1;
  const Q dist_p = dotq(n, sub(p, t[0]));
  const Q dist_d = dotq(n, d);
  if (dist_d == 0) {
    if (dist_p != 0) return {};
  } else {
    const Q s = -dist_p / dist_d;
    if (s < 0 || s > 1) return {};
    lo = hi = s;
  }
  // In-plane half-planes: dot(cross(b - a, X - a), n) >= 0.
  for (int i = 0; i < 3; ++i) {
    const V& a = t[i];
    const V& b = t[(i + 1) % 3];
    const V e = sub(b, a);
    const Q f0 = dotq(crossq(e, sub(p, a)), n);
    const Q f1 = dotq(crossq(e, d), n);  // f(t) = f0 + t f1
    if (f1 == 0) {
      if (f0 < 0) return {};
    } else {
      const Q root = -f0 / f1;
      if (f1 > 0 && root > lo) lo = root;
      if (f1 < 0 && root < hi) hi = root;
    }
    if (lo > hi) return {};
  }
  return {add(p, scale(d, lo)), add(p, scale(d, hi))};
}

inline bool on_closed_seg(const V& x, const V& a, const V& b) {
  const V ab = sub(b, a), ax = sub(x, a);
  if (!is_zero(crossq(ab, ax))) return false;
  const Q t = dotq(ax, ab);
  return t >= 0 && t <= dotq(ab, ab);
}

inline bool degenerate(const Tri& t) { return is_zero(crossq(sub(t[1], t[0]), sub(t[2], t[0]))); }

/// True iff the closed triangles meet exactly in the convex hull of their
/// common corners. Both triangles must be non-degenerate.
inline bool triangles_compatible(const Tri& t1, const Tri& t2) {
  std::vector<V> shared;
  for (const V& a : t1)
    for (const V& b : t2)
      if (same(a, b)) shared.push_back(a);
  std::vector<V> cand;
  for (int side = 0; side < 2; ++side) {
    const Tri& s = side ? t2 : t1;
    const Tri& o = side ? t1 : t2;
    for (int i = 0; i < 3; ++i) {
      auto pts = clip_segment(s[i], s[(i + 1) % 3], o);
      cand.insert(cand.end(), pts.begin(), pts.end());
    }
  }
  for (const V& x : cand) {
    if (shared.empty()) return false;
    if (shared.size() == 1 && !same(x, shared[0])) return false;
    if (shared.size() == 2 && !on_closed_seg(x, shared[0], shared[1])) return false;
    if (shared.size() >= 3) return false;
  }
  return true;
}

inline V from_int(long long x, long long y, long long z) { return {Q(x), Q(y), Q(z)}; }

/// Reference Linear check: distinct points, flat facets, pairwise compatible.
template <class Facets, class Coords>
bool linear_realization(const Facets& facets, const Coords& coords) {
  std::vector<V> p;
  for (const auto& c : coords) p.push_back(from_int(c.x, c.y, c.z));
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (same(p[i], p[j])) return false;
  std::vector<Tri> tris;
  for (const auto& f : facets) {
    Tri t{p[f[0] - 1], p[f[1] - 1], p[f[2] - 1]};
    if (degenerate(t)) return false;
    tris.push_back(t);
  }
  for (std::size_t i = 0; i < tris.size(); ++i)
    for (std::size_t j = i + 1; j < tris.size(); ++j)
      if (!triangles_compatible(tris[i], tris[j])) return false;
  return true;
}

}  // namespace oracle
