#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ensvis/ingest.hpp"
#include "ensvis/latent_stats.hpp"
#include "ensvis/metrics.hpp"
#include "ensvis/pca_baseline.hpp"
#include "ensvis/render.hpp"
#include "ensvis/vae.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "ensvis 0.1.0";

// All outputs go through a temp file plus rename, so an interrupted run
// leaves no partial files behind.
void atomic_write_text(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ensvis::DataError("cannot write " + path.string());
    out << content;
  }
  fs::rename(tmp, path);
}

template <typename Writer>
void atomic_write_with(const fs::path& path, Writer writer) {
  fs::path tmp = path;
  tmp += ".tmp";
  writer(tmp.string());
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const json& resolved, const std::vector<std::string>& outputs) {
  json doc;
  doc["tool"] = kToolVersion;
  doc["subcommand"] = subcommand;
  doc["config"] = resolved;
  doc["outputs"] = outputs;
  atomic_write_text(out_dir / "manifest.json", doc.dump(2) + "\n");
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

ensvis::Ensemble load_input_ensemble(const std::string& input,
                                     const std::string& format, double iso) {
  if (format == "polyline-json") return ensvis::load_ensemble_json(input);
  if (format == "grid-set") return ensvis::load_ensemble_gridset(input, iso);
  throw ensvis::DataError("unknown input format: " + format);
}

// Square world window centered on the normalization center, sized to the
// normalized [-1,1] box plus a margin for decodes that land outside it.
ensvis::RasterSpec window_from_norm(const ensvis::NormalizationParams& norm,
                                    int width, int height, double stroke) {
  const double half = 1.15 / norm.scale;
  return ensvis::RasterSpec(width, height, norm.center.x - half,
                            norm.center.y - half, norm.center.x + half,
                            norm.center.y + half, stroke);
}

std::vector<ensvis::Polyline> decode_set(const ensvis::VaeModel& model,
                                         const ensvis::LatentSampleSet& set) {
  std::vector<ensvis::Polyline> out;
  out.reserve(set.points.size());
  for (const Eigen::VectorXd& z : set.points) {
    out.push_back(ensvis::from_features(ensvis::decode(model, z), model.norm));
  }
  return out;
}

struct CommonArgs {
  std::string input;
  std::string out = "out";
  uint64_t seed = 42;
};

int run_synth(const std::string& family, int n, uint64_t seed,
              const std::string& out) {
  ensvis::Ensemble e = ensvis::synth_ensemble(family, n, seed);
  fs::path dir = prepare_out_dir(out);
  atomic_write_with(dir / "ensemble.json", [&](const std::string& p) {
    ensvis::save_ensemble_json(e, p);
  });
  write_manifest(dir, "synth",
                 {{"family", family}, {"n", n}, {"seed", seed}, {"out", out}},
                 {"ensemble.json"});
  return 0;
}

int run_train(const CommonArgs& common, const std::string& format, double iso,
              bool align, const ensvis::TrainConfig& cfg) {
  ensvis::Ensemble e = load_input_ensemble(common.input, format, iso);
  auto [features, norm] = ensvis::to_features(e, cfg.s, align);
  auto [model, history] = ensvis::train(features, cfg, norm);

  fs::path dir = prepare_out_dir(common.out);
  atomic_write_with(dir / "model.json", [&](const std::string& p) {
    ensvis::save_model(model, p);
  });
  json loss = json::array();
  for (const ensvis::LossBreakdown& l : history) {
    loss.push_back({{"reconstruction", l.reconstruction},
                    {"kl", l.kl},
                    {"total", l.total}});
  }
  atomic_write_text(dir / "loss_history.json", loss.dump() + "\n");
  write_manifest(dir, "train",
                 {{"input", common.input},
                  {"format", format},
                  {"align", align},
                  {"k", cfg.k},
                  {"s", cfg.s},
                  {"epochs", cfg.epochs},
                  {"lr", cfg.lr},
                  {"beta", cfg.beta},
                  {"seed", cfg.seed},
                  {"out", common.out}},
                 {"model.json", "loss_history.json"});
  return 0;
}

int run_bands(const CommonArgs& common, std::vector<double> levels, int samples,
              int width, int height, double stroke, const std::string& mode) {
  ensvis::VaeModel model = ensvis::load_model(common.input);
  const bool surface = mode == "surface";
  ensvis::ConfidenceSpec spec = ensvis::make_confidence_spec(model.k, levels);

  // One unit sample set, rescaled per level, per the nesting contract.
  ensvis::LatentSampleSet base = ensvis::sample_ball(
      model.k, spec.levels.back(), samples, common.seed, surface);
  std::vector<std::pair<double, std::vector<ensvis::Polyline>>> level_sets;
  for (double level : spec.levels) {
    ensvis::LatentSampleSet set =
        ensvis::rescale_to_level(base, model.k, level);
    level_sets.emplace_back(level, decode_set(model, set));
  }

  ensvis::RasterSpec raster = window_from_norm(model.norm, width, height, stroke);
  ensvis::BandRaster bands =
      ensvis::composite_bands(level_sets, raster, /*nested_inputs=*/true);
  ensvis::Image img = ensvis::colorize_bands(bands);

  fs::path dir = prepare_out_dir(common.out);
  atomic_write_with(dir / "bands.ppm", [&](const std::string& p) {
    ensvis::write_ppm(img, p);
  });
  json meta;
  meta["levels"] = spec.levels;
  meta["radii"] = spec.radii;
  meta["k"] = model.k;
  meta["mode"] = surface ? "surface" : "ball";
  meta["seed"] = common.seed;
  meta["samples_per_level"] = samples;
  meta["width"] = width;
  meta["height"] = height;
  meta["stroke"] = stroke;
  atomic_write_text(dir / "bands_meta.json", meta.dump(2) + "\n");
  write_manifest(dir, "bands",
                 {{"input", common.input},
                  {"levels", spec.levels},
                  {"samples", samples},
                  {"width", width},
                  {"height", height},
                  {"stroke", stroke},
                  {"mode", surface ? "surface" : "ball"},
                  {"seed", common.seed},
                  {"out", common.out}},
                 {"bands.ppm", "bands_meta.json"});
  return 0;
}

int run_density(const CommonArgs& common, int samples, int width, int height,
                double stroke) {
  ensvis::VaeModel model = ensvis::load_model(common.input);
  ensvis::LatentSampleSet prior =
      ensvis::sample_prior(model.k, samples, common.seed);
  std::vector<ensvis::Polyline> contours = decode_set(model, prior);

  ensvis::RasterSpec raster = window_from_norm(model.norm, width, height, stroke);
  ensvis::DensityRaster density = ensvis::accumulate_density(contours, raster);
  ensvis::Image img = ensvis::colorize_density(density);

  fs::path dir = prepare_out_dir(common.out);
  atomic_write_with(dir / "density.pgm", [&](const std::string& p) {
    ensvis::write_pgm(density, p);
  });
  atomic_write_with(dir / "density.ppm", [&](const std::string& p) {
    ensvis::write_ppm(img, p);
  });
  write_manifest(dir, "density",
                 {{"input", common.input},
                  {"samples", samples},
                  {"width", width},
                  {"height", height},
                  {"stroke", stroke},
                  {"seed", common.seed},
                  {"out", common.out}},
                 {"density.pgm", "density.ppm"});
  return 0;
}

int run_eval(const CommonArgs& common, const std::string& model_path, int count,
             std::vector<uint64_t> seeds, int points, bool squared,
             bool diag_cov, const std::string& format, double iso) {
  ensvis::Ensemble e = load_input_ensemble(common.input, format, iso);
  ensvis::VaeModel model = ensvis::load_model(model_path);
  auto [features, norm] = ensvis::to_features(e, model.s);
  (void)norm;  // the checkpoint's normalization is authoritative
  ensvis::PcaModel pca = ensvis::pca_fit(features, model.k, diag_cov);
  if (count <= 0) count = static_cast<int>(e.members.size());
  if (seeds.empty()) seeds = {common.seed};

  json rows = json::array();
  double ratio_sum = 0.0;
  for (uint64_t seed : seeds) {
    auto [vae_report, pca_report] = ensvis::compare_generators(
        model, pca, e, count, seed, points, squared);
    ratio_sum += vae_report.mmd_cd / pca_report.mmd_cd;
    rows.push_back({{"seed", seed},
                    {"vae_mmd_cd", vae_report.mmd_cd},
                    {"pca_mmd_cd", pca_report.mmd_cd},
                    {"ratio", vae_report.mmd_cd / pca_report.mmd_cd}});
  }
  json doc;
  doc["count"] = count;
  doc["points_per_contour"] = points;
  doc["squared"] = squared;
  doc["diagonal_cov"] = diag_cov;
  doc["rows"] = rows;
  doc["mean_ratio"] = ratio_sum / seeds.size();

  fs::path dir = prepare_out_dir(common.out);
  atomic_write_text(dir / "eval.json", doc.dump(2) + "\n");
  write_manifest(dir, "eval",
                 {{"input", common.input},
                  {"model", model_path},
                  {"count", count},
                  {"seeds", seeds},
                  {"points", points},
                  {"squared", squared},
                  {"diag_cov", diag_cov},
                  {"out", common.out}},
                 {"eval.json"});
  return 0;
}

int run_spaghetti(const CommonArgs& common, int width, int height,
                  double stroke, const std::string& format, double iso) {
  ensvis::Ensemble e = load_input_ensemble(common.input, format, iso);
  const double mx = 0.05 * (e.bounds[2] - e.bounds[0]);
  const double my = 0.05 * (e.bounds[3] - e.bounds[1]);
  ensvis::RasterSpec raster(width, height, e.bounds[0] - mx, e.bounds[1] - my,
                            e.bounds[2] + mx, e.bounds[3] + my, stroke);
  ensvis::DensityRaster density = ensvis::accumulate_density(e.members, raster);
  ensvis::Image img;
  img.width = width;
  img.height = height;
  img.rgb.assign(static_cast<size_t>(width) * height * 3, 255);
  for (size_t i = 0; i < density.counts.size(); ++i) {
    if (density.counts[i] > 0) {
      img.rgb[3 * i] = 60;
      img.rgb[3 * i + 1] = 80;
      img.rgb[3 * i + 2] = 120;
    }
  }
  fs::path dir = prepare_out_dir(common.out);
  atomic_write_with(dir / "spaghetti.ppm", [&](const std::string& p) {
    ensvis::write_ppm(img, p);
  });
  write_manifest(dir, "spaghetti",
                 {{"input", common.input},
                  {"width", width},
                  {"height", height},
                  {"stroke", stroke},
                  {"out", common.out}},
                 {"spaghetti.ppm"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble contour uncertainty visualization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ensemble");
  synth->set_config("--config");
  std::string family = "perturbed-circle";
  int synth_n = 95;
  uint64_t synth_seed = 42;
  std::string synth_out = "out";
  synth->add_option("--family", family, "perturbed-circle | phase-sine-band");
  synth->add_option("--n", synth_n, "member count")->check(CLI::Range(2, 1000000));
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--out", synth_out, "output directory");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the VAE on an ensemble");
  train_cmd->set_config("--config");
  CommonArgs train_args;
  std::string train_format = "polyline-json";
  double train_iso = 0.0;
  bool train_align = false;
  ensvis::TrainConfig cfg;
  train_cmd->add_option("--input", train_args.input, "ensemble file or grid dir")
      ->required();
  train_cmd->add_option("--format", train_format, "polyline-json | grid-set");
  train_cmd->add_option("--iso", train_iso, "isovalue for grid-set input");
  train_cmd->add_flag("--align", train_align, "align closed-contour start points");
  train_cmd->add_option("--k", cfg.k, "latent dimension")->check(CLI::Range(1, 1024));
  train_cmd->add_option("--s", cfg.s, "samples per contour")->check(CLI::Range(2, 100000));
  train_cmd->add_option("--epochs", cfg.epochs)->check(CLI::Range(1, 10000000));
  train_cmd->add_option("--lr", cfg.lr)->check(CLI::PositiveNumber);
  train_cmd->add_option("--beta", cfg.beta)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", cfg.seed);
  train_cmd->add_option("--out", train_args.out);

  // bands
  auto* bands = app.add_subcommand("bands", "Render confidence-interval bands");
  bands->set_config("--config");
  CommonArgs bands_args;
  std::vector<double> levels{0.25, 0.5, 0.9};
  int band_samples = 1000, band_w = 400, band_h = 400;
  double band_stroke = 1.0;
  std::string mode = "ball";
  bands->add_option("--input", bands_args.input, "checkpoint path")->required();
  bands->add_option("--levels", levels, "confidence levels in (0,1)");
  bands->add_option("--samples", band_samples, "samples per level")
      ->check(CLI::Range(1, 10000000));
  bands->add_option("--width", band_w)->check(CLI::Range(1, 65536));
  bands->add_option("--height", band_h)->check(CLI::Range(1, 65536));
  bands->add_option("--stroke", band_stroke)->check(CLI::NonNegativeNumber);
  bands->add_option("--mode", mode)->check(CLI::IsMember({"ball", "surface"}));
  bands->add_option("--seed", bands_args.seed);
  bands->add_option("--out", bands_args.out);

  // density
  auto* density = app.add_subcommand("density", "Render a probability density plot");
  density->set_config("--config");
  CommonArgs density_args;
  int dens_samples = 1000, dens_w = 400, dens_h = 400;
  double dens_stroke = 1.0;
  density->add_option("--input", density_args.input, "checkpoint path")->required();
  density->add_option("--samples", dens_samples)->check(CLI::Range(1, 10000000));
  density->add_option("--width", dens_w)->check(CLI::Range(1, 65536));
  density->add_option("--height", dens_h)->check(CLI::Range(1, 65536));
  density->add_option("--stroke", dens_stroke)->check(CLI::NonNegativeNumber);
  density->add_option("--seed", density_args.seed);
  density->add_option("--out", density_args.out);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Compare VAE vs PCA generators");
  eval_cmd->set_config("--config");
  CommonArgs eval_args;
  std::string eval_model;
  std::string eval_format = "polyline-json";
  double eval_iso = 0.0;
  int eval_count = 0, eval_points = 100;
  std::vector<uint64_t> eval_seeds;
  bool eval_squared = false, eval_diag = false;
  eval_cmd->add_option("--input", eval_args.input, "reference ensemble file")
      ->required();
  eval_cmd->add_option("--model", eval_model, "VAE checkpoint path")->required();
  eval_cmd->add_option("--format", eval_format, "polyline-json | grid-set");
  eval_cmd->add_option("--iso", eval_iso, "isovalue for grid-set input");
  eval_cmd->add_option("--count", eval_count,
                       "generated contours per method (0 = ensemble size)");
  eval_cmd->add_option("--seeds", eval_seeds, "generator seeds");
  eval_cmd->add_option("--points", eval_points, "points per contour for Chamfer")
      ->check(CLI::Range(2, 100000));
  eval_cmd->add_flag("--squared", eval_squared, "squared Chamfer distances");
  eval_cmd->add_flag("--diag-cov", eval_diag, "diagonal PCA embedding covariance");
  eval_cmd->add_option("--seed", eval_args.seed);
  eval_cmd->add_option("--out", eval_args.out);

  // spaghetti
  auto* spaghetti = app.add_subcommand("spaghetti", "Overlay all member contours");
  spaghetti->set_config("--config");
  CommonArgs spag_args;
  std::string spag_format = "polyline-json";
  double spag_iso = 0.0;
  int spag_w = 400, spag_h = 400;
  double spag_stroke = 1.0;
  spaghetti->add_option("--input", spag_args.input, "ensemble file")->required();
  spaghetti->add_option("--format", spag_format, "polyline-json | grid-set");
  spaghetti->add_option("--iso", spag_iso, "isovalue for grid-set input");
  spaghetti->add_option("--width", spag_w)->check(CLI::Range(1, 65536));
  spaghetti->add_option("--height", spag_h)->check(CLI::Range(1, 65536));
  spaghetti->add_option("--stroke", spag_stroke)->check(CLI::NonNegativeNumber);
  spaghetti->add_option("--out", spag_args.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return run_synth(family, synth_n, synth_seed, synth_out);
    if (train_cmd->parsed())
      return run_train(train_args, train_format, train_iso, train_align, cfg);
    if (bands->parsed())
      return run_bands(bands_args, levels, band_samples, band_w, band_h,
                       band_stroke, mode);
    if (density->parsed())
      return run_density(density_args, dens_samples, dens_w, dens_h, dens_stroke);
    if (eval_cmd->parsed())
      return run_eval(eval_args, eval_model, eval_count, eval_seeds, eval_points,
                      eval_squared, eval_diag, eval_format, eval_iso);
    if (spaghetti->parsed())
      return run_spaghetti(spag_args, spag_w, spag_h, spag_stroke, spag_format,
                           spag_iso);
  } catch (const ensvis::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const ensvis::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
