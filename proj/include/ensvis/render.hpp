#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ensvis/geometry.hpp"

namespace ensvis {

/// Pixel grid over a world window. Row 0 is the top of the image (ymax);
/// pixel centers sit at (xmin + (col+0.5)*dx, ymax - (row+0.5)*dy).
struct RasterSpec {
  int width = 0;
  int height = 0;
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
  double stroke_radius = 1.0;  // pixels; 0 = thin line coverage

  RasterSpec() = default;
  RasterSpec(int w, int h, double x0, double y0, double x1, double y1,
             double stroke = 1.0);
};

/// Pixels (as row*width + col indices, sorted unique) whose centers lie
/// within the stroke radius of any segment; stroke radius 0 marks the
/// cells the segments pass through.
std::vector<int> rasterize_contour(const Polyline& p, const RasterSpec& spec);

struct DensityRaster {
  int width = 0;
  int height = 0;
  std::vector<int> counts;  // row-major
  int sample_count = 0;
};

/// Per-pixel count of contours covering the pixel; each contour
/// contributes at most 1 per pixel.
DensityRaster accumulate_density(const std::vector<Polyline>& contours,
                                 const RasterSpec& spec);

struct BandRaster {
  int width = 0;
  int height = 0;
  std::vector<int> level_index;  // smallest covering level index, -1 = none
  int num_levels = 0;
};

/// Composites per-level contour sets into a band raster. With
/// `nested_inputs` (sets generated under the latent rescaling contract)
/// inner-level coverage is folded into outer levels, which makes nesting
/// hold by construction; otherwise nesting is verified and a violation is
/// an error.
BandRaster composite_bands(
    const std::vector<std::pair<double, std::vector<Polyline>>>& level_sets,
    const RasterSpec& spec, bool nested_inputs = true);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // 3 bytes per pixel, row-major
};

/// Density through a 9-stop white-to-blue ramp, normalized by the maximum
/// count. All-zero rasters come out all white.
Image colorize_density(const DensityRaster& d);

/// Bands through a fixed shade table, darker for inner (smaller) levels;
/// uncovered pixels white.
Image colorize_bands(const BandRaster& b);

/// Binary PPM (P6, 8-bit).
void write_ppm(const Image& img, const std::string& path);

/// Binary PGM (P5, 8-bit) of counts scaled to 0..255 by the maximum.
void write_pgm(const DensityRaster& d, const std::string& path);

Image read_ppm(const std::string& path);

}  // namespace ensvis
