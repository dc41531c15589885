// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0
//
// Release gate: one pass/fail line per criterion. Exit code 0 only when
// every criterion passes. Heavier checks print their measured numbers so a
// failure is diagnosable from the log alone.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acumen/checkpoint.hpp"
#include "acumen/config.hpp"
#include "acumen/metrics.hpp"
#include "acumen/model.hpp"
#include "acumen/synth.hpp"
#include "acumen/train.hpp"

using namespace acumen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using clk = std::chrono::steady_clock;
  static const clk::time_point start = clk::now();
  return std::chrono::duration<double>(clk::now() - start).count();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("acumen_accept_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string tests_dir() { return ACUMEN_TEST_DIR; }
std::string configs_dir() { return tests_dir() + "/../configs"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Mat random_distribution(std::mt19937_64& rng, int r, int c) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m / m.sum();
}

// The small end-to-end configuration shared by the determinism and
// ablation criteria.
TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lr = 1e-3;
  cfg.lr_decay_epoch = 1;
  cfg.batch_size = 2;
  cfg.seed = 11;
  cfg.backbone.image_size = 16;
  cfg.backbone.patch_size = 8;
  cfg.backbone.channels = 16;
  cfg.backbone.depth = 3;
  cfg.backbone.heads = 2;
  cfg.backbone.tap_layers = {1, 2, 3};
  cfg.backbone.text_dim = 8;
  cfg.backbone.text_vocab = 64;
  cfg.fixation.blocks = 1;
  cfg.fixation.heads = 2;
  cfg.mask.blocks = 1;
  cfg.mask.heads = 2;
  cfg.objective.shared_dim = 8;
  cfg.validate();
  return cfg;
}

// Criterion 1: reference-scale scores are out of reach on a desk machine
// (pretrained encoder weights, the benchmark datasets, and multi-GPU
// training are all absent), so the agreed substitute is the property and
// oracle suite that the remaining criteria run.
Outcome criterion1() {
  Outcome o;
  o.pass = true;
  o.detail =
      "benchmark-score reproduction needs pretrained weights, benchmark "
      "data, and GPUs; substituted by criteria 2-9 as agreed";
  return o;
}

// Criterion 2: analytic gradients of all four losses vs central finite
// differences, 20 random 8x8 / 17-dim instances each, rel < 1e-4, < 2 min.
Outcome criterion2() {
  const double t0 = now_seconds();
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  std::string worst_name = "none";
  auto track = [&](const char* name, double rel) {
    if (rel > worst) {
      worst = rel;
      worst_name = name;
    }
  };

  for (int trial = 0; trial < 20; ++trial) {
    {  // fixation: KL + correlation on an 8x8 grid
      const Mat gt = random_distribution(rng, 8, 8);
      Mat logits(64, 1);
      for (Eigen::Index i = 0; i < 64; ++i) logits(i) = gauss(rng);
      auto eval = [&](const Mat& x) {
        Tape t;
        FixationMap fm;
        fm.rows = 8;
        fm.cols = 8;
        fm.logits = t.leaf(x);
        fm.prob = t.softmax_all(fm.logits);
        return t.val(fixation_loss(t, fm, gt).total)(0, 0);
      };
      Tape t;
      const Var leaf = t.leaf(logits, true);
      FixationMap fm;
      fm.rows = 8;
      fm.cols = 8;
      fm.logits = leaf;
      fm.prob = t.softmax_all(leaf);
      t.backward(fixation_loss(t, fm, gt).total);
      track("fixation", gradient_check_rel_error(eval, logits, t.grad(leaf)));
    }
    {  // attributes: mean squared error over 17 raw scores
      Eigen::VectorXd gt(kAttributeCount);
      for (int i = 0; i < kAttributeCount; ++i) gt(i) = unit(rng);
      gt /= gt.sum();
      Mat raw(1, kAttributeCount);
      for (int i = 0; i < kAttributeCount; ++i) raw(0, i) = gauss(rng);
      auto eval = [&](const Mat& x) {
        Tape t;
        AttributeScores s{t.leaf(x)};
        return t.val(attribute_loss(t, s, gt))(0, 0);
      };
      Tape t;
      const Var leaf = t.leaf(raw, true);
      AttributeScores s{leaf};
      t.backward(attribute_loss(t, s, gt));
      track("attribute", gradient_check_rel_error(eval, raw, t.grad(leaf)));
    }
    {  // mask: boundary-weighted BCE + IoU on an 8x8 mask
      Mat gt(8, 8);
      for (Eigen::Index i = 0; i < 64; ++i)
        gt.data()[i] = unit(rng) < 0.4 ? 1.0 : 0.0;
      Mat logits(64, 1);
      for (Eigen::Index i = 0; i < 64; ++i) logits(i) = gauss(rng);
      auto eval = [&](const Mat& x) {
        Tape t;
        MaskLogits ml;
        ml.rows = 8;
        ml.cols = 8;
        ml.logits = t.leaf(x);
        ml.prob = t.sigmoid(ml.logits);
        return t.val(mask_loss(t, ml, gt).total)(0, 0);
      };
      Tape t;
      const Var leaf = t.leaf(logits, true);
      MaskLogits ml;
      ml.rows = 8;
      ml.cols = 8;
      ml.logits = leaf;
      ml.prob = t.sigmoid(leaf);
      t.backward(mask_loss(t, ml, gt).total);
      track("mask", gradient_check_rel_error(eval, logits, t.grad(leaf)));
    }
    {  // consistency: cosine distance between projected rows
      Mat a(1, kAttributeCount), b(1, kAttributeCount);
      for (int i = 0; i < kAttributeCount; ++i) {
        a(0, i) = gauss(rng);
        b(0, i) = gauss(rng);
      }
      auto eval = [&](const Mat& x) {
        Tape t;
        const Var va = l2_normalize_row(t, t.leaf(x));
        const Var vb = l2_normalize_row(t, t.leaf(b));
        return t.val(consistency_loss(t, va, vb))(0, 0);
      };
      Tape t;
      const Var leaf = t.leaf(a, true);
      const Var va = l2_normalize_row(t, leaf);
      const Var vb = l2_normalize_row(t, t.leaf(b));
      t.backward(consistency_loss(t, va, vb));
      track("consistency", gradient_check_rel_error(eval, a, t.grad(leaf)));
    }
  }

  const double secs = now_seconds() - t0;
  Outcome o;
  o.pass = worst < 1e-4 && secs < 120.0;
  std::ostringstream d;
  d << "80 instances, worst rel " << worst << " (" << worst_name << "), "
    << secs << " s";
  o.detail = d.str();
  return o;
}

// Criterion 3: the committed golden corpus, plus the exact identity facts.
Outcome criterion3() {
  std::ifstream in(tests_dir() + "/golden/metrics_golden.json");
  if (!in.good()) return {false, "golden corpus missing"};
  nlohmann::json golden;
  in >> golden;

  int cases = 0;
  double worst = 0.0;
  std::string worst_case = "none";
  for (const auto& c : golden.at("cases")) {
    const Mat pred =
        load_gray(tests_dir() + "/golden/" + c.at("pred").get<std::string>());
    const Mat gt = binarize_mask(
        load_gray(tests_dir() + "/golden/" + c.at("gt").get<std::string>()));
    const MetricRecord got = evaluate_pair(pred, gt);
    const double d = std::max(
        {std::abs(got.s - c.at("s").get<double>()),
         std::abs(got.e - c.at("e").get<double>()),
         std::abs(got.fw - c.at("fw").get<double>()),
         std::abs(got.mae - c.at("mae").get<double>())});
    if (d > worst) {
      worst = d;
      worst_case = c.at("name").get<std::string>();
    }
    ++cases;
  }

  Mat square = Mat::Zero(64, 64);
  square.block(16, 16, 32, 32).setOnes();
  const MetricRecord id = evaluate_pair(square, square);
  const bool identity_ok =
      std::abs(id.s - 1.0) <= 1e-6 && std::abs(id.e - 1.0) <= 1e-6 &&
      std::abs(id.fw - 1.0) <= 1e-6 && id.mae == 0.0;

  Outcome o;
  o.pass = cases == 20 && worst <= 1e-6 && identity_ok;
  std::ostringstream d;
  d << cases << " golden cases, worst |diff| " << worst << " (" << worst_case
    << "); identity S/E/Fw = 1 and MAE = 0: "
    << (identity_ok ? "yes" : "NO");
  o.detail = d.str();
  return o;
}

// Criterion 4: the three fusion identities.
Outcome criterion4() {
  BackboneConfig bb;
  bb.image_size = 16;
  bb.patch_size = 4;
  bb.channels = 12;
  bb.depth = 3;
  bb.heads = 2;
  bb.tap_layers = {1, 2, 3};

  ParamStore ps;
  std::mt19937_64 rng(7);
  AFE afe(ps, bb, AFEConfig{}, rng);

  std::mt19937_64 drng(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat branch(16, 12), raw(1, kAttributeCount);
  for (Eigen::Index i = 0; i < branch.size(); ++i)
    branch.data()[i] = gauss(drng);
  for (int i = 0; i < kAttributeCount; ++i) raw(0, i) = gauss(drng);

  bool gate_identity = true;
  {
    const Mat zeros = Mat::Zero(1, 12);
    afe.excitation_override = &zeros;
    for (int b = 0; b < 3; ++b) {
      Tape t;
      const Var x = t.leaf(branch);
      const AttributeScores attrs{t.leaf(raw)};
      const Var y = afe.attribute_gate(t, x, attrs, b);
      gate_identity = gate_identity && t.val(y) == branch;  // bitwise
    }
    afe.excitation_override = nullptr;
  }

  bool attend_identity = true;
  {
    Tape t;
    const Var x = t.leaf(branch);
    FixationMap fix;
    fix.rows = 4;
    fix.cols = 4;
    fix.logits = t.leaf(Mat::Zero(16, 1));
    fix.prob = t.softmax_all(fix.logits);  // uniform
    const Var y = afe.fixation_attend(t, x, fix, /*cls_present=*/false);
    attend_identity = t.val(y) == branch;  // bitwise
  }

  bool combine_identity = true;
  double worst = 0.0;
  {
    const AFEConfig& cfg = afe.config();
    combine_identity = cfg.branch_weights[0] == 1.0 &&
                       cfg.branch_weights[1] == 2.0 &&
                       cfg.branch_weights[2] == 4.0 && cfg.m_norm() == 7.0;
    Tape t;
    const Var x = t.leaf(branch);
    const Var y = afe.combine(t, {x, x, x});
    worst = (t.val(y) - branch).cwiseAbs().maxCoeff();
    combine_identity = combine_identity && worst <= 1e-12;
  }

  Outcome o;
  o.pass = gate_identity && attend_identity && combine_identity;
  std::ostringstream d;
  d << "zero-excitation gate bitwise: " << (gate_identity ? "yes" : "NO")
    << "; uniform-fixation attention bitwise: "
    << (attend_identity ? "yes" : "NO")
    << "; equal-branch fusion with W=(1,2,4)/7, |diff| " << worst;
  o.detail = d.str();
  return o;
}

// Criterion 5: the toy preset overfits 16 synthetic samples within the
// step and wall-clock budget.
Outcome criterion5() {
  const TrainConfig cfg = load_config(configs_dir() + "/toy64.cfg");
  const bool preset_ok =
      cfg.backbone.image_size == 64 && cfg.backbone.channels == 64 &&
      cfg.backbone.depth == 6 && cfg.fixation.blocks == 3 &&
      cfg.mask.blocks == 1;
  const int steps_per_epoch =
      (16 + cfg.batch_size - 1) / cfg.batch_size;
  const int planned_steps = cfg.epochs * steps_per_epoch;
  if (!preset_ok || planned_steps > 2000) {
    Outcome o;
    o.pass = false;
    o.detail = "toy preset drifted from the pinned shape or step budget";
    return o;
  }

  TempDir data("overfit");
  SynthConfig sc;
  sc.canvas = 64;
  const DatasetManifest man =
      synth_generate(16, 20260819, sc, data.str(), AttributeTaxonomy::defaults());

  ParamStore ps;
  std::mt19937_64 rng(mix_seed(cfg.seed, 0));
  AcumenModel model(ps, cfg, rng, /*with_text=*/true);

  const double t0 = now_seconds();
  TrainOptions opt;  // in-memory: the gate measures learning, not plumbing
  const TrainResult r = train_model(model, ps, cfg, man, opt);
  const double train_secs = now_seconds() - t0;

  double mae_sum = 0.0, attr_sum = 0.0;
  std::mt19937_64 drng(0);
  for (const ManifestEntry& e : man.entries) {
    const CamouflageSample s = load_sample(e, 64);
    const InferenceResult ir = model.infer(s.image);
    mae_sum += mae(ir.mask_prob, s.gt_mask);
    std::vector<const CamouflageSample*> one{&s};
    Tape t;
    const BatchGraph g = model.forward_batch(t, one, drng, false);
    attr_sum += g.breakdown.attr;
  }
  const double train_mae = mae_sum / 16.0;
  const double attr_mse = attr_sum / 16.0;

  Outcome o;
  o.pass = !r.nan_abort && train_mae < 0.05 && attr_mse < 1e-3 &&
           train_secs < 600.0;
  std::ostringstream d;
  d << r.steps << " steps in " << train_secs << " s; train-set mask MAE "
    << train_mae << " (< 0.05), attribute loss " << attr_mse << " (< 1e-3)";
  o.detail = d.str();
  return o;
}

// Criterion 6: identical seeded runs agree step for step and at inference.
Outcome criterion6() {
  TempDir data("det_data");
  TempDir out1("det_a");
  TempDir out2("det_b");
  SynthConfig sc;
  sc.canvas = 16;
  const DatasetManifest man =
      synth_generate(4, 5, sc, data.str(), AttributeTaxonomy::defaults());
  const TrainConfig cfg = tiny_config();

  const TrainResult r1 = run_training(cfg, man, out1.str());
  const TrainResult r2 = run_training(cfg, man, out2.str());

  double worst = 0.0;
  const bool steps_ok = r1.steps == r2.steps && r1.steps == 4;
  if (steps_ok)
    for (std::size_t i = 0; i < r1.step_losses.size(); ++i)
      worst = std::max(worst, std::abs(r1.step_losses[i].total -
                                       r2.step_losses[i].total));

  const bool ckpt_equal = slurp(out1.path / "ckpt_last.ackpt") ==
                          slurp(out2.path / "ckpt_last.ackpt");

  // Final inference from both runs' checkpoints matches bitwise.
  bool infer_equal = true;
  {
    ParamStore psa, psb;
    std::mt19937_64 ra(1), rb(2);
    AcumenModel ma(psa, cfg, ra, false), mb(psb, cfg, rb, false);
    load_checkpoint((out1.path / "ckpt_last.ackpt").string(), psa);
    load_checkpoint((out2.path / "ckpt_last.ackpt").string(), psb);
    const CamouflageSample s = load_sample(man.entries[0], 16);
    const InferenceResult ia = ma.infer(s.image);
    const InferenceResult ib = mb.infer(s.image);
    infer_equal = ia.mask_prob == ib.mask_prob && ia.fixation == ib.fixation &&
                  ia.attr_proportions == ib.attr_proportions;
  }

  Outcome o;
  o.pass = steps_ok && worst <= 1e-6 && ckpt_equal && infer_equal;
  std::ostringstream d;
  d << "per-step |d total| " << worst << " (<= 1e-6); checkpoints byte-equal: "
    << (ckpt_equal ? "yes" : "NO")
    << "; inference bitwise equal: " << (infer_equal ? "yes" : "NO");
  o.detail = d.str();
  return o;
}

// Criterion 7: the shipped full-scale config is a faithful transcription.
Outcome criterion7() {
  const TrainConfig cfg = load_config(configs_dir() + "/acumen_full.cfg");
  struct Fact {
    const char* name;
    bool ok;
  } facts[] = {
      {"input 336", cfg.backbone.image_size == 336},
      {"taps 8/16/24", cfg.backbone.tap_layers == std::array<int, 3>{8, 16, 24}},
      {"N=3", cfg.fixation.blocks == 3},
      {"M_dec=1", cfg.mask.blocks == 1},
      {"WL=50", cfg.backbone.max_words == 50},
      {"lr 1e-4", cfg.lr == 1e-4},
      {"decay 0.2 at 150", cfg.lr_decay_factor == 0.2 && cfg.lr_decay_epoch == 150},
      {"200 epochs", cfg.epochs == 200},
  };
  Outcome o;
  o.pass = true;
  std::ostringstream d;
  for (const Fact& f : facts) {
    o.pass = o.pass && f.ok;
    if (!f.ok) d << f.name << " WRONG; ";
  }
  if (o.pass) d << "all eight facts verified in configs/acumen_full.cfg";
  o.detail = d.str();
  return o;
}

// Criterion 8: zero consistency weight never touches text parameters, and
// inference runs with no text encoder in the build.
Outcome criterion8() {
  TempDir data("gamma0");
  SynthConfig sc;
  sc.canvas = 16;
  const DatasetManifest man =
      synth_generate(4, 5, sc, data.str(), AttributeTaxonomy::defaults());
  TrainConfig cfg = tiny_config();
  cfg.weights.gamma = 0.0;

  ParamStore ps;
  std::mt19937_64 rng(mix_seed(cfg.seed, 0));
  AcumenModel model(ps, cfg, rng, /*with_text=*/true);

  std::map<std::string, Mat> before;
  ps.for_each([&](const Param& p) {
    if (AcumenModel::is_text_param(p.name)) before[p.name] = p.value;
  });

  TempDir out("gamma0_out");
  TrainOptions opt;
  opt.out_dir = out.str();
  const TrainResult r = train_model(model, ps, cfg, man, opt);

  bool text_frozen = !before.empty();
  ps.for_each([&](const Param& p) {
    if (AcumenModel::is_text_param(p.name))
      text_frozen = text_frozen && p.value == before.at(p.name);  // bitwise
  });

  // Visual-only build: the checkpoint's text table is skipped and
  // inference proceeds without any description.
  bool no_text_infer = false;
  std::size_t skipped = 0;
  {
    ParamStore ps_vis;
    std::mt19937_64 rng2(99);
    AcumenModel vis(ps_vis, cfg, rng2, /*with_text=*/false);
    const CheckpointMeta meta =
        load_checkpoint(r.final_checkpoint, ps_vis);
    skipped = meta.skipped.size();
    ManifestEntry entry = man.entries[0];
    entry.description.clear();
    const CamouflageSample s = load_sample(entry, 16);
    const InferenceResult ir = vis.infer(s.image);
    no_text_infer = ir.mask_prob.rows() == 16 &&
                    std::abs(ir.attr_proportions.sum() - 1.0) < 1e-9 &&
                    !vis.has_text_encoder();
  }

  Outcome o;
  o.pass = r.steps > 0 && text_frozen && no_text_infer && skipped == 1;
  std::ostringstream d;
  d << before.size() << " text parameters bitwise unchanged after " << r.steps
    << " steps: " << (text_frozen ? "yes" : "NO")
    << "; text-free inference (1 stored text table skipped): "
    << (no_text_infer ? "yes" : "NO");
  o.detail = d.str();
  return o;
}

// Criterion 9: 1000 randomized data-model property cases.
Outcome criterion9() {
  TempDir dir("props");
  SynthConfig sc;
  sc.canvas = 16;
  const DatasetManifest base =
      synth_generate(2, 3, sc, (dir.path / "seed").string(),
                     AttributeTaxonomy::defaults());
  const AttributeTaxonomy taxonomy = AttributeTaxonomy::defaults();

  std::mt19937_64 rng(20260819);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0, round_trips = 0;
  for (int n = 0; n < 1000; ++n) {
    // Nonnegative raw scores with a positive sum, sparsity varying by case
    // (negatives and all-zero rows are rejected upstream at manifest load).
    Eigen::VectorXd raw(kAttributeCount);
    for (int i = 0; i < kAttributeCount; ++i)
      raw(i) = i < n % kAttributeCount ? 0.0 : unit(rng) + 1e-12;
    const Eigen::VectorXd norm = renormalize_attributes(raw);
    if (std::abs(norm.sum() - 1.0) > 1e-9 || norm.minCoeff() < 0.0)
      return {false, "attribute renormalization violated on case " +
                         std::to_string(n)};

    Mat gray(5, 7);
    for (Eigen::Index i = 0; i < gray.size(); ++i)
      gray.data()[i] = n % 97 == 0 ? 0.0 : unit(rng);
    const Mat dist = normalize_distribution(gray);
    if (std::abs(dist.sum() - 1.0) > 1e-6)
      return {false, "fixation normalization violated on case " +
                         std::to_string(n)};

    const Mat bin = binarize_mask(gray, 0.5);
    if (((bin.array() != 0.0) && (bin.array() != 1.0)).any())
      return {false, "mask binarity violated on case " + std::to_string(n)};

    if (n % 50 == 0) {
      // Manifest round-trip with freshly randomized attribute rows.
      DatasetManifest man = base;
      for (ManifestEntry& e : man.entries) {
        Eigen::VectorXd a(kAttributeCount);
        for (int i = 0; i < kAttributeCount; ++i) a(i) = unit(rng);
        e.attributes = renormalize_attributes(a);
      }
      const std::string path =
          (dir.path / ("man_" + std::to_string(n) + ".jsonl")).string();
      write_manifest(path, man, taxonomy);
      const DatasetManifest back = load_manifest(path, taxonomy);
      if (back.entries.size() != man.entries.size() ||
          back.split != man.split)
        return {false, "manifest round-trip shape changed"};
      for (std::size_t i = 0; i < man.entries.size(); ++i) {
        const ManifestEntry& a = man.entries[i];
        const ManifestEntry& b = back.entries[i];
        if (!fs::equivalent(a.image_path, b.image_path) ||
            !fs::equivalent(a.mask_path, b.mask_path) ||
            a.description != b.description ||
            (a.attributes - b.attributes).cwiseAbs().maxCoeff() > 1e-12)
          return {false, "manifest round-trip entry mismatch"};
      }
      ++round_trips;
    }
    ++checked;
  }

  Outcome o;
  o.pass = checked == 1000 && round_trips == 20;
  std::ostringstream d;
  d << checked << " cases (normalization, binarity) incl. " << round_trips
    << " manifest round-trips";
  o.detail = d.str();
  return o;
}

}  // namespace

// Usage: acceptance [criterion ids...]; no arguments runs all nine.
int main(int argc, char** argv) {
  struct Row {
    int id;
    const char* title;
    Outcome (*fn)();
  };
  const Row rows[] = {
      {1, "scope substitution", criterion1},
      {2, "loss gradient checks", criterion2},
      {3, "metric golden corpus", criterion3},
      {4, "fusion identities", criterion4},
      {5, "toy overfit", criterion5},
      {6, "determinism", criterion6},
      {7, "config fidelity", criterion7},
      {8, "text-branch ablation", criterion8},
      {9, "data-model properties", criterion9},
  };

  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int passed = 0, ran = 0;
  for (const Row& row : rows) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), row.id) == wanted.end())
      continue;
    ++ran;
    Outcome o;
    try {
      o = row.fn();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    std::printf("criterion %d (%s): %s - %s\n", row.id, row.title,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (o.pass) ++passed;
  }
  std::printf("acceptance: %d/%d criteria passed\n", passed, ran);
  return passed == ran && ran > 0 ? 0 : 1;
}
