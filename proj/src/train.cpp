// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace acumen {

void Adam::step(ParamStore& ps, double lr) {
  ACUMEN_CHECK(lr > 0.0, "Adam step needs a positive learning rate");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  ps.for_each([&](Param& p) {
    if (!p.trainable || p.grad.size() == 0) return;
    if (p.m.size() != p.value.size()) {
      p.m = Mat::Zero(p.value.rows(), p.value.cols());
      p.v = Mat::Zero(p.value.rows(), p.value.cols());
    }
    p.m = cfg_.beta1 * p.m + (1.0 - cfg_.beta1) * p.grad;
    p.v = cfg_.beta2 * p.v + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
    const Mat m_hat = p.m / bc1;
    const Mat v_hat = p.v / bc2;
    p.value.array() -=
        lr * m_hat.array() / (v_hat.array().sqrt() + cfg_.eps);
  });
}

CamouflageSample hflip_sample(const CamouflageSample& s) {
  CamouflageSample out = s;
  const int h = s.image.h;
  const int w = s.image.w;
  out.image.rgb.resize(s.image.rgb.rows(), 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.image.rgb.row(y * w + (w - 1 - x)) = s.image.rgb.row(y * w + x);
  out.gt_mask = s.gt_mask.rowwise().reverse();
  out.gt_fixation = s.gt_fixation.rowwise().reverse();
  return out;
}

namespace {

nlohmann::ordered_json step_record(int step, int epoch, double lr,
                                   const LossBreakdown& b) {
  nlohmann::ordered_json rec;
  rec["step"] = step;
  rec["epoch"] = epoch;
  rec["lr"] = lr;
  rec["mask"] = b.mask;
  rec["fix"] = b.fix;
  rec["attr"] = b.attr;
  rec["consist"] = b.consist;
  rec["total"] = b.total;
  return rec;
}

}  // namespace

TrainResult train_model(AcumenModel& model, ParamStore& ps,
                        const TrainConfig& cfg,
                        const DatasetManifest& manifest,
                        const TrainOptions& opt) {
  cfg.validate();
  ACUMEN_CHECK(!manifest.entries.empty(), "training manifest is empty");

  // Serial, up-front loading keeps sample order (and therefore the whole
  // run) a pure function of the manifest and the seed.
  std::vector<CamouflageSample> samples;
  samples.reserve(manifest.entries.size());
  for (const ManifestEntry& e : manifest.entries)
    samples.push_back(
        load_sample(e, cfg.image_size(), cfg.backbone.max_words));

  const bool persist = !opt.out_dir.empty();
  std::ofstream log;
  TrainResult result;
  if (persist) {
    std::filesystem::create_directories(opt.out_dir);
    result.log_path =
        (std::filesystem::path(opt.out_dir) / "train_log.jsonl").string();
    log.open(result.log_path, std::ios::trunc);
    ACUMEN_CHECK(log.good(), "cannot open training log: " << result.log_path);
  }

  Adam adam;
  std::mt19937_64 order_rng(mix_seed(cfg.seed, 1));
  std::mt19937_64 aug_rng(mix_seed(cfg.seed, 2));
  std::mt19937_64 dropout_rng(mix_seed(cfg.seed, 3));

  CheckpointMeta meta;
  meta.config_hash = config_hash(cfg);
  meta.config_text = config_to_text(cfg);

  const std::string ckpt_path =
      persist
          ? (std::filesystem::path(opt.out_dir) / "ckpt_last.ackpt").string()
          : std::string();

  std::vector<int> indices(samples.size());
  std::iota(indices.begin(), indices.end(), 0);

  int step = 0;
  bool stop = false;
  for (int epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
    const double lr = learning_rate_at(cfg, epoch);
    if (cfg.shuffle) std::shuffle(indices.begin(), indices.end(), order_rng);

    for (std::size_t b0 = 0; b0 < indices.size() && !stop;
         b0 += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t b1 = std::min(
          indices.size(), b0 + static_cast<std::size_t>(cfg.batch_size));

      // Augmented copies live for the duration of the step.
      std::vector<CamouflageSample> flipped;
      std::vector<const CamouflageSample*> batch;
      flipped.reserve(b1 - b0);
      batch.reserve(b1 - b0);
      for (std::size_t k = b0; k < b1; ++k) {
        const CamouflageSample& s =
            samples[static_cast<std::size_t>(indices[k])];
        const bool flip =
            cfg.hflip &&
            std::uniform_real_distribution<double>(0.0, 1.0)(aug_rng) < 0.5;
        if (flip) {
          flipped.push_back(hflip_sample(s));
          batch.push_back(&flipped.back());
        } else {
          batch.push_back(&s);
        }
      }

      Tape t;
      BatchGraph g = model.forward_batch(t, batch, dropout_rng,
                                         /*training=*/true);
      if (!std::isfinite(g.breakdown.total)) {
        result.nan_abort = true;
        stop = true;
        break;
      }
      ps.zero_grads();
      t.backward(g.loss_node);
      adam.step(ps, lr);
      ++step;

      result.step_losses.push_back(g.breakdown);
      result.step_lrs.push_back(lr);
      if (log.is_open())
        log << step_record(step, epoch, lr, g.breakdown).dump() << "\n";
      if (opt.on_step) opt.on_step(step, epoch, g.breakdown);
      if (cfg.max_steps > 0 && step >= cfg.max_steps) stop = true;
    }

    if (stop && result.nan_abort) break;  // keep the last epoch's checkpoint
    result.epochs_completed = epoch;
    if (persist) {
      meta.epoch = epoch;
      meta.step = step;
      meta.adam_t = adam.t();
      meta.metrics.clear();
      if (!result.step_losses.empty()) {
        meta.metrics["last_total"] = result.step_losses.back().total;
        meta.metrics["last_mask"] = result.step_losses.back().mask;
      }
      save_checkpoint(ckpt_path, ps, meta);
      result.final_checkpoint = ckpt_path;
    }
  }

  result.steps = step;
  if (log.is_open()) log.flush();
  return result;
}

TrainResult run_training(const TrainConfig& cfg,
                         const DatasetManifest& manifest,
                         const std::string& out_dir) {
  ParamStore ps;
  std::mt19937_64 init_rng(mix_seed(cfg.seed, 0));
  AcumenModel model(ps, cfg, init_rng, /*with_text=*/true);
  TrainOptions opt;
  opt.out_dir = out_dir;
  return train_model(model, ps, cfg, manifest, opt);
}

EvalReport evaluate_manifest(const DatasetManifest& manifest, int image_size,
                             const MaskPredictor& predict) {
  ACUMEN_CHECK(!manifest.entries.empty(), "evaluation manifest is empty");
  EvalReport report;
  double s_sum = 0, e_sum = 0, fw_sum = 0, mae_sum = 0;
  for (const ManifestEntry& entry : manifest.entries) {
    EvalRecord rec;
    rec.image_path = entry.image_path;
    try {
      const CamouflageSample s = load_sample(entry, image_size);
      const Mat pred = predict(s);
      rec.metrics = evaluate_pair(pred, s.gt_mask);
    } catch (const std::exception& ex) {
      rec.skipped = true;
      rec.note = ex.what();
      ++report.skipped;
      report.records.push_back(std::move(rec));
      continue;
    }
    s_sum += rec.metrics.s;
    e_sum += rec.metrics.e;
    fw_sum += rec.metrics.fw;
    mae_sum += rec.metrics.mae;
    ++report.evaluated;
    report.records.push_back(std::move(rec));
  }
  if (report.evaluated > 0) {
    report.mean.s = s_sum / report.evaluated;
    report.mean.e = e_sum / report.evaluated;
    report.mean.fw = fw_sum / report.evaluated;
    report.mean.mae = mae_sum / report.evaluated;
  }
  return report;
}

EvalReport evaluate_model(const AcumenModel& model,
                          const DatasetManifest& manifest) {
  ACUMEN_CHECK(!manifest.entries.empty(), "evaluation manifest is empty");
  const int size = model.config().image_size();
  EvalReport report;
  double s_sum = 0, e_sum = 0, fw_sum = 0, mae_sum = 0;
  for (const ManifestEntry& entry : manifest.entries) {
    EvalRecord rec;
    rec.image_path = entry.image_path;
    try {
      const CamouflageSample s = load_sample(entry, size);
      InferenceResult r = model.infer(s.image);
      rec.metrics = evaluate_pair(r.mask_prob, s.gt_mask);
      rec.attr_proportions = std::move(r.attr_proportions);
      rec.fixation = std::move(r.fixation);
    } catch (const std::exception& ex) {
      rec.skipped = true;
      rec.note = ex.what();
      ++report.skipped;
      report.records.push_back(std::move(rec));
      continue;
    }
    s_sum += rec.metrics.s;
    e_sum += rec.metrics.e;
    fw_sum += rec.metrics.fw;
    mae_sum += rec.metrics.mae;
    ++report.evaluated;
    report.records.push_back(std::move(rec));
  }
  if (report.evaluated > 0) {
    report.mean.s = s_sum / report.evaluated;
    report.mean.e = e_sum / report.evaluated;
    report.mean.fw = fw_sum / report.evaluated;
    report.mean.mae = mae_sum / report.evaluated;
  }
  return report;
}

}  // namespace acumen
