#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ensvis {

/// Raised when input data is malformed (bad files, invalid geometry, ...).
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a computation fails numerically (divergence, non-finite values).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 a);

/// An ordered 2-D point sequence. When `closed`, the last point connects
/// back to the first (the closing segment is implicit, not stored).
struct Polyline {
  std::vector<Vec2> points;
  bool closed = false;

  /// Validates: >= 2 points, no zero-length segments, positive total length.
  Polyline(std::vector<Vec2> pts, bool is_closed);
};

/// Total Euclidean length, including the closing segment for closed polylines.
double arc_length(const Polyline& p);

/// Uniform arc-length resampling to exactly `s` points.
/// Closed: parameters i*L/s, i = 0..s-1, starting at the first vertex.
/// Open: parameters i*L/(s-1), so both endpoints are retained.
Polyline resample_arclength(const Polyline& p, int s);

/// Regular vertex grid of scalar samples. Vertex (r, c) sits at world
/// coordinates (x0 + c*cell, y0 + r*cell).
struct ScalarGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major, rows*cols
  double x0 = 0.0;
  double y0 = 0.0;
  double cell = 1.0;

  ScalarGrid(int rows, int cols, std::vector<double> values, double x0,
             double y0, double cell);

  double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
};

/// Extracts the iso-level set under bilinear cell interpolation as maximal
/// stitched polylines. Saddle cells are disambiguated by the cell-center
/// average. Vertices exactly at the isovalue are perturbed by
/// +1e-12*(value range) before extraction, so all crossings are interior.
std::vector<Polyline> marching_squares(const ScalarGrid& g, double iso);

}  // namespace ensvis
