#include "ensvis/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ensvis {

namespace {

void validate_ensemble(const Ensemble& e) {
  if (e.members.size() < 2) {
    throw DataError("ensemble needs at least 2 members, got " +
                    std::to_string(e.members.size()));
  }
  if (!(e.bounds[2] > e.bounds[0]) || !(e.bounds[3] > e.bounds[1])) {
    throw DataError("ensemble bounds are empty or inverted");
  }
}

std::array<double, 4> bounds_of(const std::vector<Polyline>& members) {
  std::array<double, 4> b{1e300, 1e300, -1e300, -1e300};
  for (const Polyline& p : members) {
    for (const Vec2& q : p.points) {
      b[0] = std::min(b[0], q.x);
      b[1] = std::min(b[1], q.y);
      b[2] = std::max(b[2], q.x);
      b[3] = std::max(b[3], q.y);
    }
  }
  return b;
}

}  // namespace

Ensemble load_ensemble_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ensemble file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("parse failure in " + path + ": " + e.what());
  }

  Ensemble e;
  try {
    e.name = doc.at("name").get<std::string>();
    auto b = doc.at("bounds");
    for (int i = 0; i < 4; ++i) e.bounds[i] = b.at(i).get<double>();
    size_t idx = 0;
    for (const auto& m : doc.at("members")) {
      std::vector<Vec2> pts;
      for (const auto& pt : m.at("points")) {
        pts.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      }
      try {
        e.members.emplace_back(std::move(pts), m.at("closed").get<bool>());
      } catch (const DataError& de) {
        throw DataError("member " + std::to_string(idx) + " in " + path +
                        ": " + de.what());
      }
      ++idx;
    }
  } catch (const json::exception& ex) {
    throw DataError("format error in " + path + ": " + ex.what());
  }
  validate_ensemble(e);
  return e;
}

void save_ensemble_json(const Ensemble& e, const std::string& path) {
  json doc;
  doc["name"] = e.name;
  doc["bounds"] = {e.bounds[0], e.bounds[1], e.bounds[2], e.bounds[3]};
  json members = json::array();
  for (const Polyline& p : e.members) {
    json pts = json::array();
    for (const Vec2& q : p.points) pts.push_back({q.x, q.y});
    members.push_back({{"closed", p.closed}, {"points", std::move(pts)}});
  }
  doc["members"] = std::move(members);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write ensemble file: " + path);
  out << doc.dump(2) << "\n";
}

namespace {

ScalarGrid load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open grid file: " + path);
  int rows, cols;
  double xmin, ymin, cell;
  if (!(in >> rows >> cols >> xmin >> ymin >> cell)) {
    throw DataError("grid header parse failure in " + path);
  }
  if (rows < 1 || cols < 1) throw DataError("bad grid dims in " + path);
  std::vector<double> values(static_cast<size_t>(rows) * cols);
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(in >> values[i])) {
      throw DataError("grid value parse failure in " + path + " at record " +
                      std::to_string(i));
    }
  }
  return ScalarGrid(rows, cols, std::move(values), xmin, ymin, cell);
}

}  // namespace

Ensemble load_ensemble_gridset(const std::string& dir, double iso) {
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 2) throw DataError("grid-set needs at least 2 member files");

  Ensemble e;
  e.name = fs::path(dir).filename().string();
  for (const std::string& f : files) {
    ScalarGrid g = load_grid_file(f);
    std::vector<Polyline> contours = marching_squares(g, iso);
    if (contours.empty()) {
      throw DataError("member " + f + " has no contour at iso " +
                      std::to_string(iso));
    }
    size_t best = 0;
    double best_len = -1.0;
    for (size_t i = 0; i < contours.size(); ++i) {
      double len = arc_length(contours[i]);
      if (len > best_len) {
        best_len = len;
        best = i;
      }
    }
    if (contours.size() > 1) {
      std::cerr << "warning: member " << f << " has " << contours.size()
                << " contours; keeping longest, dropping "
                << contours.size() - 1 << "\n";
    }
    e.members.push_back(std::move(contours[best]));
  }
  e.bounds = bounds_of(e.members);
  validate_ensemble(e);
  return e;
}

namespace {

Polyline rotate_start_to_max_x(const Polyline& p) {
  if (!p.closed) return p;
  Vec2 centroid{0, 0};
  for (const Vec2& q : p.points) centroid = centroid + q;
  centroid = (1.0 / p.points.size()) * centroid;
  size_t best = 0;
  for (size_t i = 1; i < p.points.size(); ++i) {
    if (p.points[i].x - centroid.x > p.points[best].x - centroid.x) best = i;
  }
  std::vector<Vec2> pts;
  pts.reserve(p.points.size());
  for (size_t i = 0; i < p.points.size(); ++i) {
    pts.push_back(p.points[(best + i) % p.points.size()]);
  }
  return Polyline(std::move(pts), true);
}

}  // namespace

std::pair<std::vector<FeatureVector>, NormalizationParams>
to_features(const Ensemble& e, int s, bool align_start) {
  if (s < 2) throw DataError("to_features requires s >= 2");
  validate_ensemble(e);

  NormalizationParams norm;
  norm.center = {0.5 * (e.bounds[0] + e.bounds[2]),
                 0.5 * (e.bounds[1] + e.bounds[3])};
  const double w = e.bounds[2] - e.bounds[0];
  const double h = e.bounds[3] - e.bounds[1];
  norm.scale = 2.0 / std::max(w, h);

  std::vector<FeatureVector> out;
  out.reserve(e.members.size());
  for (const Polyline& member : e.members) {
    Polyline src = align_start ? rotate_start_to_max_x(member) : member;
    Polyline rs = resample_arclength(src, s);
    FeatureVector fv;
    fv.s = s;
    fv.closed = rs.closed;
    fv.values.resize(2 * s);
    for (int i = 0; i < s; ++i) {
      fv.values[2 * i] = norm.scale * (rs.points[i].x - norm.center.x);
      fv.values[2 * i + 1] = norm.scale * (rs.points[i].y - norm.center.y);
    }
    out.push_back(std::move(fv));
  }
  return {std::move(out), norm};
}

Polyline from_features(const FeatureVector& v, const NormalizationParams& p) {
  if (v.values.size() != 2 * v.s) {
    throw DataError("feature vector length does not match 2*s");
  }
  std::vector<Vec2> pts(v.s);
  for (int i = 0; i < v.s; ++i) {
    pts[i] = {v.values[2 * i] / p.scale + p.center.x,
              v.values[2 * i + 1] / p.scale + p.center.y};
  }
  return Polyline(std::move(pts), v.closed);
}

Ensemble synth_perturbed_circle(int n, uint64_t seed,
                                const PerturbedCircleParams& params) {
  if (n < 2) throw DataError("synth ensembles need n >= 2");
  if (!(params.radius > 0.0) || params.vertices < 3) {
    throw DataError("perturbed-circle parameters must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Ensemble e;
  e.name = "perturbed-circle";
  for (int i = 0; i < n; ++i) {
    const double r = params.radius * (1.0 + params.radius_sigma * gauss(rng));
    const double cx = params.center_sigma * gauss(rng);
    const double cy = params.center_sigma * gauss(rng);
    if (!(r > 0.0)) throw DataError("perturbed radius became non-positive");
    std::vector<Vec2> pts(params.vertices);
    for (int j = 0; j < params.vertices; ++j) {
      const double a = 2.0 * M_PI * j / params.vertices;
      pts[j] = {cx + r * std::cos(a), cy + r * std::sin(a)};
    }
    e.members.emplace_back(std::move(pts), true);
  }
  e.bounds = bounds_of(e.members);
  return e;
}

Ensemble synth_phase_sine_band(int n, uint64_t seed,
                               const PhaseSineBandParams& params) {
  if (n < 2) throw DataError("synth ensembles need n >= 2");
  if (!(params.amplitude > 0.0) || !(params.x_max > params.x_min) ||
      params.vertices < 2) {
    throw DataError("phase-sine-band parameters must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * M_PI);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Ensemble e;
  e.name = "phase-sine-band";
  for (int i = 0; i < n; ++i) {
    const double phi = uniform(rng);
    const double b = params.offset_sigma * gauss(rng);
    std::vector<Vec2> pts(params.vertices);
    for (int j = 0; j < params.vertices; ++j) {
      const double x = params.x_min + (params.x_max - params.x_min) * j /
                                          (params.vertices - 1);
      pts[j] = {x, params.amplitude * std::sin(params.omega * x + phi) + b};
    }
    e.members.emplace_back(std::move(pts), false);
  }
  e.bounds = bounds_of(e.members);
  return e;
}

Ensemble synth_ensemble(const std::string& family, int n, uint64_t seed) {
  if (family == "perturbed-circle") return synth_perturbed_circle(n, seed);
  if (family == "phase-sine-band") return synth_phase_sine_band(n, seed);
  throw DataError("unknown synthetic family: " + family);
}

}  // namespace ensvis
