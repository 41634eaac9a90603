#include "ensvis/render.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <fstream>

namespace ensvis {

RasterSpec::RasterSpec(int w, int h, double x0, double y0, double x1, double y1,
                       double stroke)
    : width(w), height(h), xmin(x0), ymin(y0), xmax(x1), ymax(y1),
      stroke_radius(stroke) {
  if (width < 1 || height < 1) throw DataError("raster dimensions must be positive");
  if (!(xmax > xmin) || !(ymax > ymin)) throw DataError("raster window is empty");
  if (stroke_radius < 0.0) throw DataError("stroke radius must be >= 0");
}

namespace {

// Grid coordinates: cell (row, col) spans gx in [col, col+1), gy in
// [row, row+1); row 0 at the top of the window.
struct GridPoint {
  double x, y;
};

GridPoint to_grid(const RasterSpec& spec, Vec2 p) {
  const double dx = (spec.xmax - spec.xmin) / spec.width;
  const double dy = (spec.ymax - spec.ymin) / spec.height;
  return {(p.x - spec.xmin) / dx, (spec.ymax - p.y) / dy};
}

double point_segment_dist2(double px, double py, GridPoint a, GridPoint b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = px - a.x, wy = py - a.y;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = wx - t * vx, ey = wy - t * vy;
  return ex * ex + ey * ey;
}

// Visits every cell a segment passes through (conservative DDA walk).
template <typename Visit>
void trace_cells(const RasterSpec& spec, GridPoint a, GridPoint b, Visit visit) {
  const int steps =
      std::max(1, static_cast<int>(std::ceil(
                      2.0 * std::max(std::abs(b.x - a.x), std::abs(b.y - a.y)))));
  int prev_r = INT_MIN, prev_c = INT_MIN;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const double gx = a.x + t * (b.x - a.x);
    const double gy = a.y + t * (b.y - a.y);
    const int c = static_cast<int>(std::floor(gx));
    const int r = static_cast<int>(std::floor(gy));
    if (r == prev_r && c == prev_c) continue;
    // Fill the one-cell step gap when the walk moves diagonally.
    if (prev_r != INT_MIN && std::abs(r - prev_r) + std::abs(c - prev_c) > 1) {
      visit(prev_r, c);
      visit(r, prev_c);
    }
    visit(r, c);
    prev_r = r;
    prev_c = c;
  }
}

template <typename Mark>
void rasterize_into(const Polyline& p, const RasterSpec& spec, Mark mark) {
  const size_t nseg = p.closed ? p.points.size() : p.points.size() - 1;
  auto clip_mark = [&](int r, int c) {
    if (r >= 0 && r < spec.height && c >= 0 && c < spec.width) mark(r, c);
  };
  for (size_t i = 0; i < nseg; ++i) {
    const GridPoint a = to_grid(spec, p.points[i]);
    const GridPoint b = to_grid(spec, p.points[(i + 1) % p.points.size()]);
    if (spec.stroke_radius == 0.0) {
      trace_cells(spec, a, b, clip_mark);
      continue;
    }
    const double rad = spec.stroke_radius;
    const int c0 = std::max(0, (int)std::floor(std::min(a.x, b.x) - rad - 0.5));
    const int c1 = std::min(spec.width - 1,
                            (int)std::ceil(std::max(a.x, b.x) + rad - 0.5));
    const int r0 = std::max(0, (int)std::floor(std::min(a.y, b.y) - rad - 0.5));
    const int r1 = std::min(spec.height - 1,
                            (int)std::ceil(std::max(a.y, b.y) + rad - 0.5));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (point_segment_dist2(c + 0.5, r + 0.5, a, b) <= rad * rad) {
          mark(r, c);
        }
      }
    }
  }
}

}  // namespace

std::vector<int> rasterize_contour(const Polyline& p, const RasterSpec& spec) {
  std::vector<uint8_t> mask(static_cast<size_t>(spec.width) * spec.height, 0);
  rasterize_into(p, spec, [&](int r, int c) {
    mask[static_cast<size_t>(r) * spec.width + c] = 1;
  });
  std::vector<int> pixels;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) pixels.push_back(static_cast<int>(i));
  }
  return pixels;
}

DensityRaster accumulate_density(const std::vector<Polyline>& contours,
                                 const RasterSpec& spec) {
  if (contours.empty()) throw DataError("accumulate_density: no contours");
  DensityRaster d;
  d.width = spec.width;
  d.height = spec.height;
  d.counts.assign(static_cast<size_t>(spec.width) * spec.height, 0);
  d.sample_count = static_cast<int>(contours.size());
  for (const Polyline& p : contours) {
    for (int idx : rasterize_contour(p, spec)) {
      d.counts[idx] += 1;
    }
  }
  return d;
}

BandRaster composite_bands(
    const std::vector<std::pair<double, std::vector<Polyline>>>& level_sets,
    const RasterSpec& spec, bool nested_inputs) {
  if (level_sets.empty()) throw DataError("composite_bands: no levels");
  for (size_t i = 1; i < level_sets.size(); ++i) {
    if (!(level_sets[i].first > level_sets[i - 1].first)) {
      throw DataError("composite_bands: levels must be strictly increasing");
    }
  }
  const size_t npix = static_cast<size_t>(spec.width) * spec.height;
  std::vector<std::vector<uint8_t>> unions;
  for (const auto& [level, contours] : level_sets) {
    std::vector<uint8_t> mask(npix, 0);
    for (const Polyline& p : contours) {
      for (int idx : rasterize_contour(p, spec)) mask[idx] = 1;
    }
    unions.push_back(std::move(mask));
  }
  if (nested_inputs) {
    // Fold inner coverage outward so bands nest by construction.
    for (size_t i = 1; i < unions.size(); ++i) {
      for (size_t px = 0; px < npix; ++px) {
        unions[i][px] |= unions[i - 1][px];
      }
    }
  } else {
    for (size_t i = 1; i < unions.size(); ++i) {
      size_t violations = 0;
      for (size_t px = 0; px < npix; ++px) {
        if (unions[i - 1][px] && !unions[i][px]) ++violations;
      }
      if (violations > 0) {
        throw DataError("composite_bands: nesting violated at level index " +
                        std::to_string(i) + " on " +
                        std::to_string(violations) + " pixels");
      }
    }
  }
  BandRaster b;
  b.width = spec.width;
  b.height = spec.height;
  b.num_levels = static_cast<int>(level_sets.size());
  b.level_index.assign(npix, -1);
  for (size_t px = 0; px < npix; ++px) {
    for (size_t i = 0; i < unions.size(); ++i) {
      if (unions[i][px]) {
        b.level_index[px] = static_cast<int>(i);
        break;
      }
    }
  }
  return b;
}

namespace {

// White-to-blue ramp: pure white start, then the darkening blues of the
// common ColorBrewer sequence.
constexpr uint8_t kBlueRamp[9][3] = {
    {255, 255, 255}, {222, 235, 247}, {198, 219, 239},
    {158, 202, 225}, {107, 174, 214}, {66, 146, 198},
    {33, 113, 181},  {8, 81, 156},    {8, 48, 107}};

// Blue-gray band shades, darkest first (innermost level).
constexpr uint8_t kBandShades[6][3] = {{73, 89, 110},   {104, 120, 140},
                                       {135, 150, 168}, {166, 178, 193},
                                       {197, 205, 216}, {226, 231, 238}};

}  // namespace

Image colorize_density(const DensityRaster& d) {
  Image img;
  img.width = d.width;
  img.height = d.height;
  img.rgb.assign(static_cast<size_t>(d.width) * d.height * 3, 255);
  const int max_count = d.counts.empty()
                            ? 0
                            : *std::max_element(d.counts.begin(), d.counts.end());
  if (max_count == 0) return img;
  for (size_t i = 0; i < d.counts.size(); ++i) {
    const double t = static_cast<double>(d.counts[i]) / max_count;
    const double pos = t * 8.0;
    const int lo = std::min(7, static_cast<int>(pos));
    const double f = pos - lo;
    for (int ch = 0; ch < 3; ++ch) {
      const double v =
          (1.0 - f) * kBlueRamp[lo][ch] + f * kBlueRamp[lo + 1][ch];
      img.rgb[3 * i + ch] = static_cast<uint8_t>(std::lround(v));
    }
  }
  return img;
}

Image colorize_bands(const BandRaster& b) {
  Image img;
  img.width = b.width;
  img.height = b.height;
  img.rgb.assign(static_cast<size_t>(b.width) * b.height * 3, 255);
  for (size_t i = 0; i < b.level_index.size(); ++i) {
    const int level = b.level_index[i];
    if (level < 0) continue;
    const int shade = std::min(level, 5);
    for (int ch = 0; ch < 3; ++ch) {
      img.rgb[3 * i + ch] = kBandShades[shade][ch];
    }
  }
  return img;
}

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image: " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
  if (!out) throw DataError("write failure: " + path);
}

void write_pgm(const DensityRaster& d, const std::string& path) {
  const int max_count = d.counts.empty()
                            ? 0
                            : *std::max_element(d.counts.begin(), d.counts.end());
  std::vector<uint8_t> gray(d.counts.size(), 0);
  if (max_count > 0) {
    for (size_t i = 0; i < d.counts.size(); ++i) {
      gray[i] = static_cast<uint8_t>(
          std::lround(255.0 * d.counts[i] / max_count));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image: " + path);
  out << "P5\n" << d.width << " " << d.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()),
            static_cast<std::streamsize>(gray.size()));
  if (!out) throw DataError("write failure: " + path);
}

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image: " + path);
  std::string magic;
  int w, h, maxval;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w < 1 || h < 1 || maxval != 255) {
    throw DataError("unsupported PPM: " + path);
  }
  in.get();  // single whitespace after maxval
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  if (!in) throw DataError("truncated PPM: " + path);
  return img;
}

}  // namespace ensvis
