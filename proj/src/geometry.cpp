#include "ensvis/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace ensvis {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

Polyline::Polyline(std::vector<Vec2> pts, bool is_closed)
    : points(std::move(pts)), closed(is_closed) {
  if (points.size() < 2) {
    throw DataError("polyline needs at least 2 points");
  }
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i].x == points[i + 1].x && points[i].y == points[i + 1].y) {
      throw DataError("polyline has a zero-length segment at index " +
                      std::to_string(i));
    }
  }
  if (closed) {
    const Vec2& a = points.back();
    const Vec2& b = points.front();
    if (a.x == b.x && a.y == b.y) {
      throw DataError("closed polyline repeats its first point as last");
    }
  }
  double total = 0.0;
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    total += norm(points[i + 1] - points[i]);
  }
  if (closed) total += norm(points.front() - points.back());
  if (!(total > 0.0)) {
    throw DataError("polyline has zero total arc length");
  }
}

double arc_length(const Polyline& p) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < p.points.size(); ++i) {
    total += norm(p.points[i + 1] - p.points[i]);
  }
  if (p.closed) total += norm(p.points.front() - p.points.back());
  return total;
}

Polyline resample_arclength(const Polyline& p, int s) {
  if (s < 2) throw DataError("resample requires s >= 2");
  const double total = arc_length(p);
  if (!(total > 0.0)) throw DataError("degenerate polyline: zero arc length");

  const size_t nseg = p.closed ? p.points.size() : p.points.size() - 1;
  auto segment = [&](size_t i) -> std::pair<Vec2, Vec2> {
    const Vec2& a = p.points[i];
    const Vec2& b = p.points[(i + 1) % p.points.size()];
    return {a, b};
  };

  const double step = p.closed ? total / s : total / (s - 1);
  std::vector<Vec2> out;
  out.reserve(s);

  size_t seg = 0;
  auto [a, b] = segment(0);
  double seg_len = norm(b - a);
  double seg_start = 0.0;  // arc-length parameter at segment start
  for (int i = 0; i < s; ++i) {
    double t = i * step;
    if (!p.closed && i == s - 1) {
      out.push_back(p.points.back());
      break;
    }
    while (t > seg_start + seg_len && seg + 1 < nseg) {
      seg_start += seg_len;
      ++seg;
      std::tie(a, b) = segment(seg);
      seg_len = norm(b - a);
    }
    double u = seg_len > 0.0 ? (t - seg_start) / seg_len : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    out.push_back(a + u * (b - a));
  }
  return Polyline(std::move(out), p.closed);
}

ScalarGrid::ScalarGrid(int rows_, int cols_, std::vector<double> values_,
                       double x0_, double y0_, double cell_)
    : rows(rows_), cols(cols_), values(std::move(values_)), x0(x0_), y0(y0_),
      cell(cell_) {
  if (rows < 1 || cols < 1) throw DataError("grid dimensions must be positive");
  if (values.size() != static_cast<size_t>(rows) * cols) {
    throw DataError("grid value count does not match rows*cols");
  }
  if (!(cell > 0.0)) throw DataError("grid cell size must be positive");
}

namespace {

// Global edge identifier: orientation (0 horizontal, 1 vertical) + the
// lower/left vertex (r, c).
using EdgeKey = std::tuple<int, int, int>;

struct Segment {
  EdgeKey e0, e1;
  Vec2 p0, p1;
};

}  // namespace

std::vector<Polyline> marching_squares(const ScalarGrid& g, double iso) {
  if (!std::isfinite(iso)) throw DataError("isovalue must be finite");

  std::vector<double> vals = g.values;
  auto [mn_it, mx_it] = std::minmax_element(vals.begin(), vals.end());
  const double range = *mx_it - *mn_it;
  const double bump = 1e-12 * range;
  for (double& v : vals) {
    if (v == iso) v += bump;
  }

  auto value = [&](int r, int c) {
    return vals[static_cast<size_t>(r) * g.cols + c];
  };
  auto world = [&](int r, int c) -> Vec2 {
    return {g.x0 + c * g.cell, g.y0 + r * g.cell};
  };
  // Crossing point on the edge from vertex (r0,c0) to (r1,c1).
  auto cross = [&](int r0, int c0, int r1, int c1) -> Vec2 {
    double a = value(r0, c0), b = value(r1, c1);
    double t = (iso - a) / (b - a);
    Vec2 pa = world(r0, c0), pb = world(r1, c1);
    return pa + t * (pb - pa);
  };

  std::vector<Segment> segments;
  for (int r = 0; r + 1 < g.rows; ++r) {
    for (int c = 0; c + 1 < g.cols; ++c) {
      const bool bl = value(r, c) > iso;
      const bool br = value(r, c + 1) > iso;
      const bool tr = value(r + 1, c + 1) > iso;
      const bool tl = value(r + 1, c) > iso;
      const int code = (bl ? 1 : 0) | (br ? 2 : 0) | (tr ? 4 : 0) | (tl ? 8 : 0);
      if (code == 0 || code == 15) continue;

      const EdgeKey B{0, r, c}, T{0, r + 1, c}, L{1, r, c}, R{1, r, c + 1};
      const Vec2 pB = cross(r, c, r, c + 1);
      const Vec2 pT = cross(r + 1, c, r + 1, c + 1);
      const Vec2 pL = cross(r, c, r + 1, c);
      const Vec2 pR = cross(r, c + 1, r + 1, c + 1);

      auto emit = [&](EdgeKey e0, Vec2 p0, EdgeKey e1, Vec2 p1) {
        segments.push_back({e0, e1, p0, p1});
      };

      switch (code) {
        case 1: case 14: emit(L, pL, B, pB); break;
        case 2: case 13: emit(B, pB, R, pR); break;
        case 4: case 11: emit(R, pR, T, pT); break;
        case 8: case 7:  emit(T, pT, L, pL); break;
        case 3: case 12: emit(L, pL, R, pR); break;
        case 6: case 9:  emit(B, pB, T, pT); break;
        case 5: {  // bl+tr above: saddle
          double center = 0.25 * (value(r, c) + value(r, c + 1) +
                                  value(r + 1, c) + value(r + 1, c + 1));
          if (center > iso) {
            emit(B, pB, R, pR);
            emit(T, pT, L, pL);
          } else {
            emit(L, pL, B, pB);
            emit(R, pR, T, pT);
          }
          break;
        }
        case 10: {  // br+tl above: saddle
          double center = 0.25 * (value(r, c) + value(r, c + 1) +
                                  value(r + 1, c) + value(r + 1, c + 1));
          if (center > iso) {
            emit(L, pL, B, pB);
            emit(R, pR, T, pT);
          } else {
            emit(B, pB, R, pR);
            emit(T, pT, L, pL);
          }
          break;
        }
      }
    }
  }

  // Stitch segments into maximal chains. Each edge key touches at most two
  // segments, so chains are simple paths or loops.
  std::multimap<EdgeKey, size_t> by_edge;
  for (size_t i = 0; i < segments.size(); ++i) {
    by_edge.emplace(segments[i].e0, i);
    by_edge.emplace(segments[i].e1, i);
  }
  std::vector<bool> used(segments.size(), false);

  auto next_unused = [&](EdgeKey e, size_t self) -> long {
    auto [lo, hi] = by_edge.equal_range(e);
    for (auto it = lo; it != hi; ++it) {
      if (it->second != self && !used[it->second]) return (long)it->second;
    }
    return -1;
  };

  std::vector<Polyline> result;
  for (size_t i = 0; i < segments.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;

    std::vector<Vec2> pts{segments[i].p0, segments[i].p1};
    EdgeKey head = segments[i].e0;
    EdgeKey tail = segments[i].e1;
    bool closed = false;

    // Extend forward from the tail.
    for (;;) {
      long j = next_unused(tail, SIZE_MAX);
      if (j < 0) break;
      used[j] = true;
      const Segment& sg = segments[j];
      if (sg.e0 == tail) {
        tail = sg.e1;
        pts.push_back(sg.p1);
      } else {
        tail = sg.e0;
        pts.push_back(sg.p0);
      }
      if (tail == head) {
        closed = true;
        pts.pop_back();  // loop: drop repeated start point
        break;
      }
    }
    // Extend backward from the head for open chains.
    if (!closed) {
      for (;;) {
        long j = next_unused(head, SIZE_MAX);
        if (j < 0) break;
        used[j] = true;
        const Segment& sg = segments[j];
        if (sg.e1 == head) {
          head = sg.e0;
          pts.insert(pts.begin(), sg.p0);
        } else {
          head = sg.e1;
          pts.insert(pts.begin(), sg.p1);
        }
      }
    }
    if (!closed && pts.size() > 2 &&
        norm(pts.back() - pts.front()) <= 1e-9) {
      pts.pop_back();
      closed = true;
    }

    // Drop consecutive exact duplicates from crossings near shared vertices.
    std::vector<Vec2> clean;
    for (const Vec2& q : pts) {
      if (clean.empty() || clean.back().x != q.x || clean.back().y != q.y) {
        clean.push_back(q);
      }
    }
    if (closed && clean.size() > 1 && clean.front().x == clean.back().x &&
        clean.front().y == clean.back().y) {
      clean.pop_back();
    }
    if (clean.size() >= 2) {
      result.emplace_back(std::move(clean), closed);
    }
  }
  return result;
}

}  // namespace ensvis
