// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: train, eval, infer, synth, and report.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acumen/checkpoint.hpp"
#include "acumen/config.hpp"
#include "acumen/model.hpp"
#include "acumen/synth.hpp"
#include "acumen/train.hpp"

namespace fs = std::filesystem;
using namespace acumen;

namespace {

// Default output root; --out always wins.
std::string out_root() {
  const char* env = std::getenv("ACUMEN_OUT_ROOT");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string(".");
}

std::string default_out(const std::string& subcommand) {
  return (fs::path(out_root()) / ("acumen_" + subcommand)).string();
}

AttributeTaxonomy taxonomy_from(const std::string& path) {
  return path.empty() ? AttributeTaxonomy::defaults()
                      : AttributeTaxonomy::load(path);
}

// Model exactly as the checkpoint trained it, minus the text encoder: the
// visual branch alone carries inference.
struct LoadedModel {
  TrainConfig cfg;
  ParamStore ps;
  std::unique_ptr<AcumenModel> model;
  CheckpointMeta meta;
};

LoadedModel load_model(const std::string& ckpt_path,
                       const std::string& config_override) {
  LoadedModel lm;
  lm.meta = read_checkpoint_meta(ckpt_path);
  ACUMEN_CHECK(!lm.meta.config_text.empty(),
               "checkpoint carries no config text: " << ckpt_path);
  lm.cfg = parse_config(lm.meta.config_text);
  if (!config_override.empty()) {
    const TrainConfig requested = load_config(config_override);
    ACUMEN_CHECK(config_hash(requested) == lm.meta.config_hash,
                 "--config disagrees with the checkpoint's config ("
                     << config_hash(requested) << " vs "
                     << lm.meta.config_hash << ")");
  }
  std::mt19937_64 rng(mix_seed(lm.cfg.seed, 0));
  lm.model = std::make_unique<AcumenModel>(lm.ps, lm.cfg, rng,
                                           /*with_text=*/false);
  lm.meta = load_checkpoint(ckpt_path, lm.ps);
  return lm;
}

// Heat raster scaled so its peak is full intensity; the sidecar JSON keeps
// the true peak so the distribution can be recovered.
Mat to_unit_peak(const Mat& m, double* peak) {
  const double mx = m.maxCoeff();
  if (peak != nullptr) *peak = mx;
  return mx > 0.0 ? Mat(m / mx) : m;
}

int run_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir, const std::string& taxonomy_path) {
  const AttributeTaxonomy taxonomy = taxonomy_from(taxonomy_path);
  const TrainConfig cfg = load_config(config_path);
  const DatasetManifest manifest = load_manifest(data_path, taxonomy);

  fs::create_directories(out_dir);
  {
    std::ofstream copy(fs::path(out_dir) / "config.cfg");
    copy << config_to_text(cfg);
  }

  std::printf("training on %zu samples (%s split), %d epochs, batch %d\n",
              manifest.entries.size(), manifest.split.c_str(), cfg.epochs,
              cfg.batch_size);
  const TrainResult r = run_training(cfg, manifest, out_dir);
  if (r.nan_abort) {
    std::fprintf(stderr,
                 "error: loss became non-finite at step %d; last good "
                 "checkpoint: %s\n",
                 r.steps + 1,
                 r.final_checkpoint.empty() ? "(none)"
                                            : r.final_checkpoint.c_str());
    return 1;
  }
  const LossBreakdown& last = r.step_losses.back();
  std::printf("finished %d steps (%d epochs); last losses: mask %.4f fix "
              "%.4f attr %.6f consist %.4f total %.4f\n",
              r.steps, r.epochs_completed, last.mask, last.fix, last.attr,
              last.consist, last.total);
  std::printf("checkpoint: %s\nlog: %s\n", r.final_checkpoint.c_str(),
              r.log_path.c_str());
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& out_dir, const std::string& taxonomy_path,
             const std::string& config_override) {
  const AttributeTaxonomy taxonomy = taxonomy_from(taxonomy_path);
  LoadedModel lm = load_model(ckpt_path, config_override);
  const DatasetManifest manifest = load_manifest(data_path, taxonomy);

  const EvalReport report = evaluate_model(*lm.model, manifest);

  fs::create_directories(fs::path(out_dir) / "maps");
  std::ofstream scores(fs::path(out_dir) / "scores.jsonl");
  ACUMEN_CHECK(scores.good(), "cannot write scores under " << out_dir);
  int idx = 0;
  for (const EvalRecord& rec : report.records) {
    nlohmann::ordered_json line;
    line["image"] = rec.image_path;
    if (rec.skipped) {
      line["skipped"] = true;
      line["note"] = rec.note;
      std::fprintf(stderr, "warning: skipped %s (%s)\n",
                   rec.image_path.c_str(), rec.note.c_str());
    } else {
      line["s"] = rec.metrics.s;
      line["e"] = rec.metrics.e;
      line["fw"] = rec.metrics.fw;
      line["mae"] = rec.metrics.mae;
      line["attributes"] = std::vector<double>(
          rec.attr_proportions.data(),
          rec.attr_proportions.data() + rec.attr_proportions.size());
      char name[32];
      std::snprintf(name, sizeof(name), "maps/fix_%05d.png", idx);
      double peak = 0.0;
      save_gray_png8((fs::path(out_dir) / name).string(),
                     to_unit_peak(rec.fixation, &peak));
      line["fixation_png"] = name;
      line["fixation_peak"] = peak;
    }
    scores << line.dump() << "\n";
    ++idx;
  }

  nlohmann::ordered_json summary;
  summary["evaluated"] = report.evaluated;
  summary["skipped"] = report.skipped;
  summary["mean"] = {{"s", report.mean.s},
                     {"e", report.mean.e},
                     {"fw", report.mean.fw},
                     {"mae", report.mean.mae}};
  std::ofstream(fs::path(out_dir) / "summary.json") << summary.dump(2) << "\n";

  std::printf("evaluated %d image(s), skipped %d\n", report.evaluated,
              report.skipped);
  std::printf("  S      %.6f\n  E      %.6f\n  Fw     %.6f\n  MAE    %.6f\n",
              report.mean.s, report.mean.e, report.mean.fw, report.mean.mae);
  std::printf("scores: %s\n", (fs::path(out_dir) / "scores.jsonl").c_str());
  return 0;
}

int run_infer(const std::string& ckpt_path, const std::string& image_path,
              const std::string& out_dir, const std::string& taxonomy_path) {
  const AttributeTaxonomy taxonomy = taxonomy_from(taxonomy_path);
  LoadedModel lm = load_model(ckpt_path, /*config_override=*/"");

  const Image img = load_image_rgb(image_path);
  const InferenceResult r = lm.model->infer(img);

  fs::create_directories(out_dir);
  // Deliver rasters at the source resolution.
  const Mat mask_full = (img.h == r.mask_prob.rows() &&
                         img.w == r.mask_prob.cols())
                            ? r.mask_prob
                            : resize_gray(r.mask_prob, img.h, img.w,
                                          Interp::kLinear);
  save_gray_png8((fs::path(out_dir) / "mask.png").string(), mask_full);

  double peak = 0.0;
  const Mat fix_full = resize_gray(to_unit_peak(r.fixation, &peak), img.h,
                                   img.w, Interp::kLinear);
  save_gray_png8((fs::path(out_dir) / "fixation.png").string(), fix_full);

  nlohmann::ordered_json attrs;
  attrs["image"] = image_path;
  attrs["attributes"] = nlohmann::ordered_json::object();
  for (int i = 0; i < kAttributeCount; ++i)
    attrs["attributes"][taxonomy.attributes[static_cast<std::size_t>(i)]] =
        r.attr_proportions(i);
  attrs["sum"] = r.attr_proportions.sum();
  attrs["fixation_peak"] = peak;
  std::ofstream(fs::path(out_dir) / "attributes.json") << attrs.dump(2)
                                                       << "\n";
  std::printf("wrote %s, %s, %s\n",
              (fs::path(out_dir) / "mask.png").c_str(),
              (fs::path(out_dir) / "fixation.png").c_str(),
              (fs::path(out_dir) / "attributes.json").c_str());
  return 0;
}

int run_synth(int n, std::uint64_t seed, const std::string& out_dir,
              int canvas, const std::string& split, double sigma_frac,
              const std::string& taxonomy_path) {
  const AttributeTaxonomy taxonomy = taxonomy_from(taxonomy_path);
  SynthConfig sc;
  sc.canvas = canvas;
  sc.split = split;
  sc.fixation_sigma_frac = sigma_frac;
  const DatasetManifest man = synth_generate(n, seed, sc, out_dir, taxonomy);
  std::printf("wrote %zu synthetic sample(s) under %s\n", man.entries.size(),
              out_dir.c_str());
  std::printf("manifest: %s\n",
              (fs::path(out_dir) / "manifest.jsonl").c_str());
  return 0;
}

// One bar per attribute, grouped by category color.
std::string attribute_svg(const AttributeTaxonomy& taxonomy,
                          const Eigen::VectorXd& means) {
  const int bar_w = 34, gap = 10, left = 70, bottom = 150, top = 30;
  const int plot_h = 260;
  const int width = left + kAttributeCount * (bar_w + gap) + 30;
  const int height = top + plot_h + bottom;
  const double max_v = std::max(1e-9, means.maxCoeff());

  auto color_of = [](const std::string& cat) {
    if (cat == "SF") return "#4C78A8";
    if (cat == "COF") return "#59A14F";
    return "#E15759";  // IQF
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
    << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << left << "\" y=\"18\" font-family=\"sans-serif\" "
       "font-size=\"14\">mean attribute contribution</text>\n";
  // y axis with max tick.
  s << "<line x1=\"" << left - 8 << "\" y1=\"" << top << "\" x2=\""
    << left - 8 << "\" y2=\"" << top + plot_h
    << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  s << "<text x=\"" << left - 12 << "\" y=\"" << top + 4
    << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
    << max_v << "</text>\n";
  s << "<text x=\"" << left - 12 << "\" y=\"" << top + plot_h
    << "\" font-family=\"sans-serif\" font-size=\"10\" "
       "text-anchor=\"end\">0</text>\n";
  for (int i = 0; i < kAttributeCount; ++i) {
    const double v = means(i);
    const int h = static_cast<int>(plot_h * (v / max_v) + 0.5);
    const int x = left + i * (bar_w + gap);
    const int y = top + plot_h - h;
    s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w
      << "\" height=\"" << h << "\" fill=\""
      << color_of(taxonomy.categories[static_cast<std::size_t>(i)])
      << "\"><title>"
      << taxonomy.attributes[static_cast<std::size_t>(i)] << " = " << v
      << "</title></rect>\n";
    s << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << top + plot_h + 10
      << "\" font-family=\"sans-serif\" font-size=\"10\" "
         "text-anchor=\"end\" transform=\"rotate(-55 " << x + bar_w / 2
      << " " << top + plot_h + 10 << ")\">"
      << taxonomy.attributes[static_cast<std::size_t>(i)] << "</text>\n";
  }
  // Legend.
  const char* cats[3] = {"SF", "COF", "IQF"};
  for (int c = 0; c < 3; ++c) {
    const int lx = left + c * 90;
    const int ly = height - 18;
    s << "<rect x=\"" << lx << "\" y=\"" << ly - 10
      << "\" width=\"12\" height=\"12\" fill=\"" << color_of(cats[c])
      << "\"/>\n";
    s << "<text x=\"" << lx + 18 << "\" y=\"" << ly
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << cats[c]
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

int run_report(const std::string& scores_arg, const std::string& out_dir,
               const std::string& taxonomy_path, int max_overlays) {
  const AttributeTaxonomy taxonomy = taxonomy_from(taxonomy_path);
  // Accept either the eval output directory or the scores.jsonl file itself.
  const fs::path scores_path = fs::is_directory(scores_arg)
                                   ? fs::path(scores_arg) / "scores.jsonl"
                                   : fs::path(scores_arg);
  const fs::path scores_dir = scores_path.parent_path();
  std::ifstream in(scores_path);
  ACUMEN_CHECK(in.good(), "cannot open " << scores_path.string());

  Eigen::VectorXd attr_sum = Eigen::VectorXd::Zero(kAttributeCount);
  double s_sum = 0, e_sum = 0, fw_sum = 0, mae_sum = 0;
  int n = 0, skipped = 0;
  struct OverlayJob {
    std::string image;
    std::string fix_png;
  };
  std::vector<OverlayJob> overlays;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    if (rec.value("skipped", false)) {
      ++skipped;
      continue;
    }
    s_sum += rec.at("s").get<double>();
    e_sum += rec.at("e").get<double>();
    fw_sum += rec.at("fw").get<double>();
    mae_sum += rec.at("mae").get<double>();
    const auto attrs = rec.at("attributes").get<std::vector<double>>();
    ACUMEN_CHECK(attrs.size() == kAttributeCount,
                 "record has " << attrs.size() << " attributes");
    for (int i = 0; i < kAttributeCount; ++i)
      attr_sum(i) += attrs[static_cast<std::size_t>(i)];
    if (rec.contains("fixation_png"))
      overlays.push_back({rec.at("image").get<std::string>(),
                          (fs::path(scores_dir) /
                           rec.at("fixation_png").get<std::string>())
                              .string()});
    ++n;
  }
  ACUMEN_CHECK(n > 0, "no usable records in " << scores_path.string());

  fs::create_directories(out_dir);
  const Eigen::VectorXd attr_mean = attr_sum / n;

  // Plain-text summary table.
  {
    std::ofstream sum(fs::path(out_dir) / "summary.txt");
    sum << "records evaluated: " << n << "  skipped: " << skipped << "\n\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "  %-6s %.6f\n  %-6s %.6f\n  %-6s %.6f\n  %-6s %.6f\n", "S",
                  s_sum / n, "E", e_sum / n, "Fw", fw_sum / n, "MAE",
                  mae_sum / n);
    sum << "mask metrics (dataset means)\n" << buf << "\n";
    sum << "mean attribute contributions\n";
    for (int i = 0; i < kAttributeCount; ++i) {
      std::snprintf(buf, sizeof(buf), "  %-3s %-32s %.6f\n",
                    taxonomy.categories[static_cast<std::size_t>(i)].c_str(),
                    taxonomy.attributes[static_cast<std::size_t>(i)].c_str(),
                    attr_mean(i));
      sum << buf;
    }
  }

  std::ofstream(fs::path(out_dir) / "attributes.svg")
      << attribute_svg(taxonomy, attr_mean);

  // Fixation overlays: red heat blended over the source image.
  int made = 0;
  fs::create_directories(fs::path(out_dir) / "overlays");
  for (const OverlayJob& job : overlays) {
    if (made >= max_overlays) break;
    if (!fs::exists(job.image) || !fs::exists(job.fix_png)) continue;
    const Image img = load_image_rgb(job.image);
    const Mat heat =
        resize_gray(load_gray(job.fix_png), img.h, img.w, Interp::kLinear);
    Image blend = img;
    for (int p = 0; p < img.h * img.w; ++p) {
      const double h = heat(p / img.w, p % img.w);
      blend.rgb(p, 0) = std::min(1.0, 0.55 * img.rgb(p, 0) + 0.45 * h);
      blend.rgb(p, 1) = 0.55 * img.rgb(p, 1);
      blend.rgb(p, 2) = 0.55 * img.rgb(p, 2);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "overlays/fix_%05d.png", made);
    save_image_png((fs::path(out_dir) / name).string(), blend);
    ++made;
  }

  std::printf("report: %s (records %d, overlays %d)\n", out_dir.c_str(), n,
              made);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camouflaged-object segmentation: train, evaluate, infer, "
               "synthesize data, and render reports"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_dir, taxonomy_path, ckpt_path,
      image_path, scores_dir, split = "train";
  int n = 16, canvas = 64, max_overlays = 16;
  std::uint64_t seed = 1;
  double sigma_frac = 0.125;

  CLI::App* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", config_path, "config file")->required();
  train->add_option("--data", data_path, "manifest (JSON lines)")->required();
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--taxonomy", taxonomy_path, "taxonomy file");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  eval->add_option("--data", data_path, "manifest (JSON lines)")->required();
  eval->add_option("--out", out_dir, "output directory");
  eval->add_option("--taxonomy", taxonomy_path, "taxonomy file");
  eval->add_option("--config", config_path,
                   "config to cross-check against the checkpoint");

  CLI::App* infer = app.add_subcommand("infer", "Segment one image");
  infer->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  infer->add_option("--image", image_path, "input image")->required();
  infer->add_option("--out", out_dir, "output directory");
  infer->add_option("--taxonomy", taxonomy_path, "taxonomy file");

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic data");
  synth->add_option("--n", n, "sample count")->required();
  synth->add_option("--seed", seed, "generator seed")->required();
  synth->add_option("--out", out_dir, "output directory");
  synth->add_option("--canvas", canvas, "square raster size");
  synth->add_option("--split", split, "split name");
  synth->add_option("--fixation-sigma-frac", sigma_frac,
                    "fixation blur sigma as a fraction of the canvas");
  synth->add_option("--taxonomy", taxonomy_path, "taxonomy file");

  CLI::App* report = app.add_subcommand("report", "Render plots and tables");
  report->add_option("--scores", scores_dir, "eval output dir or scores.jsonl path")
      ->required();
  report->add_option("--out", out_dir, "output directory");
  report->add_option("--taxonomy", taxonomy_path, "taxonomy file");
  report->add_option("--max-overlays", max_overlays,
                     "cap on fixation overlay images");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      if (out_dir.empty()) out_dir = default_out("train");
      return run_train(config_path, data_path, out_dir, taxonomy_path);
    }
    if (eval->parsed()) {
      if (out_dir.empty()) out_dir = default_out("eval");
      return run_eval(ckpt_path, data_path, out_dir, taxonomy_path,
                      config_path);
    }
    if (infer->parsed()) {
      if (out_dir.empty()) out_dir = default_out("infer");
      return run_infer(ckpt_path, image_path, out_dir, taxonomy_path);
    }
    if (synth->parsed()) {
      if (out_dir.empty()) out_dir = default_out("synth");
      return run_synth(n, seed, out_dir, canvas, split, sigma_frac,
                       taxonomy_path);
    }
    if (report->parsed()) {
      if (out_dir.empty()) out_dir = default_out("report");
      return run_report(scores_dir, out_dir, taxonomy_path, max_overlays);
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
