// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0
//
// Attribute head and attribute-loss tests: shapes, normalization of the
// reported proportions, closed-form loss values/gradients, batching.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "acumen/attributes.hpp"

using namespace acumen;

namespace {

BackboneConfig toy_backbone() {
  BackboneConfig cfg;
  cfg.image_size = 16;
  cfg.patch_size = 4;
  cfg.channels = 10;
  cfg.depth = 3;
  cfg.heads = 2;
  cfg.tap_layers = {1, 2, 3};
  return cfg;
}

MultiLevelFeatures random_features(Tape& t, const BackboneConfig& cfg,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MultiLevelFeatures f;
  f.grid_rows = cfg.grid_side();
  f.grid_cols = cfg.grid_side();
  f.cls_present = cfg.cls_token;
  for (int lvl = 0; lvl < 3; ++lvl) {
    Mat m(f.tokens(), cfg.channels);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = gauss(rng);
    f.levels[lvl] = t.leaf(m);
  }
  return f;
}

Eigen::VectorXd random_target(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.01, 1.0);
  Eigen::VectorXd v(kAttributeCount);
  for (int i = 0; i < kAttributeCount; ++i) v(i) = uni(rng);
  return v / v.sum();
}

}  // namespace

TEST_CASE("head emits one raw score per attribute") {
  const BackboneConfig bb = toy_backbone();
  ParamStore ps;
  std::mt19937_64 init(3);
  AttributeHead head(ps, bb, AttributeConfig{}, init);
  Tape t;
  std::mt19937_64 rng(5), drop(7);
  const AttributeScores s =
      head.predict(t, random_features(t, bb, rng), drop, /*training=*/false);
  CHECK(t.val(s.raw).rows() == 1);
  CHECK(t.val(s.raw).cols() == kAttributeCount);
}

TEST_CASE("evaluation forward is deterministic") {
  const BackboneConfig bb = toy_backbone();
  ParamStore ps;
  std::mt19937_64 init(11);
  AttributeHead head(ps, bb, AttributeConfig{}, init);
  std::mt19937_64 r1(13), r2(13);
  Tape t1, t2;
  std::mt19937_64 d1(99), d2(77);  // dropout rngs differ; eval must not care
  const Mat a = t1.val(head.predict(t1, random_features(t1, bb, r1), d1, false).raw);
  const Mat b = t2.val(head.predict(t2, random_features(t2, bb, r2), d2, false).raw);
  CHECK(a == b);  // bitwise
}

TEST_CASE("reported proportions clamp negatives and renormalize") {
  Mat raw = Mat::Zero(1, kAttributeCount);
  raw(0, 0) = -1.0;
  raw(0, 1) = 0.5;
  raw(0, 2) = 0.5;
  const Eigen::VectorXd p = attribute_proportions(raw);
  CHECK(p(0) == 0.0);
  CHECK(p(1) == doctest::Approx(0.5));
  CHECK(p(2) == doctest::Approx(0.5));
  CHECK(std::abs(p.sum() - 1.0) <= 1e-12);

  // Entirely non-positive raw scores report the uninformative uniform.
  const Eigen::VectorXd u =
      attribute_proportions(Mat::Constant(1, kAttributeCount, -2.0));
  for (int i = 0; i < kAttributeCount; ++i)
    CHECK(u(i) == doctest::Approx(1.0 / kAttributeCount));
}

TEST_CASE("a uniform +0.1 shift costs exactly 0.01") {
  std::mt19937_64 rng(17);
  const Eigen::VectorXd gt = random_target(rng);
  Tape t;
  AttributeScores s;
  s.raw = t.leaf(gt.transpose().array() + 0.1);
  const Var loss = attribute_loss(t, s, gt);
  CHECK(std::abs(t.val(loss)(0, 0) - 0.01) <= 1e-12);
}

TEST_CASE("loss gradient has the closed form 2(raw - gt)/17") {
  std::mt19937_64 rng(19);
  const Eigen::VectorXd gt = random_target(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat raw(1, kAttributeCount);
  for (int i = 0; i < kAttributeCount; ++i) raw(0, i) = gauss(rng);

  Tape t;
  AttributeScores s;
  s.raw = t.leaf(raw, true);
  t.backward(attribute_loss(t, s, gt));
  const Mat analytic = t.grad(s.raw);
  for (int i = 0; i < kAttributeCount; ++i) {
    const double expect = 2.0 * (raw(0, i) - gt(i)) / kAttributeCount;
    CHECK(std::abs(analytic(0, i) - expect) <= 1e-12);
  }
}

TEST_CASE("loss gradients match finite differences on 20 random instances") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    const Eigen::VectorXd gt = random_target(rng);
    Mat raw(1, kAttributeCount);
    for (int i = 0; i < kAttributeCount; ++i) raw(0, i) = gauss(rng);

    Tape t;
    AttributeScores s;
    s.raw = t.leaf(raw, true);
    t.backward(attribute_loss(t, s, gt));
    const Mat analytic = t.grad(s.raw);

    const double rel = gradient_check_rel_error(
        [&](const Mat& x) {
          Tape local;
          AttributeScores ls;
          ls.raw = local.leaf(x);
          return local.val(attribute_loss(local, ls, gt))(0, 0);
        },
        raw, analytic);
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("loss enforces the 1 x 17 contract") {
  Tape t;
  AttributeScores s;
  s.raw = t.leaf(Mat::Zero(1, kAttributeCount - 1));
  CHECK_THROWS(attribute_loss(t, s, Eigen::VectorXd::Zero(kAttributeCount)));
  s.raw = t.leaf(Mat::Zero(1, kAttributeCount));
  CHECK_THROWS(attribute_loss(t, s, Eigen::VectorXd::Zero(kAttributeCount - 1)));
}

TEST_CASE("batched evaluation equals per-sample evaluation outside training") {
  const BackboneConfig bb = toy_backbone();
  ParamStore ps;
  std::mt19937_64 init(29);
  AttributeHead head(ps, bb, AttributeConfig{}, init);
  std::mt19937_64 rng(31);

  Tape t;
  const MultiLevelFeatures fa = random_features(t, bb, rng);
  const MultiLevelFeatures fb = random_features(t, bb, rng);
  const Var rows = t.concat_rows({head.pre_norm(t, fa), head.pre_norm(t, fb)});
  const Var normed = head.batch_norm(t, rows, /*training=*/false);
  std::mt19937_64 drop(1);
  const Mat batch_a =
      t.val(head.post_norm(t, t.slice_rows(normed, 0, 1), drop, false).raw);
  const Mat batch_b =
      t.val(head.post_norm(t, t.slice_rows(normed, 1, 1), drop, false).raw);

  Tape ta, tb;
  std::mt19937_64 ra(31);  // regenerate identical features
  const MultiLevelFeatures ga = random_features(ta, bb, ra);
  const MultiLevelFeatures gb = random_features(tb, bb, ra);
  std::mt19937_64 da(2), db(3);
  const Mat solo_a = ta.val(head.predict(ta, ga, da, false).raw);
  const Mat solo_b = tb.val(head.predict(tb, gb, db, false).raw);
  CHECK(batch_a == solo_a);
  CHECK(batch_b == solo_b);

  // In training mode the batch statistics couple the two samples.
  Tape tt;
  std::mt19937_64 rh(31);  // regenerate the same two feature sets again
  const MultiLevelFeatures ha = random_features(tt, bb, rh);
  const MultiLevelFeatures hb = random_features(tt, bb, rh);
  const Var rows2 = tt.concat_rows({head.pre_norm(tt, ha), head.pre_norm(tt, hb)});
  const Var normed2 = head.batch_norm(tt, rows2, /*training=*/true);
  std::mt19937_64 d0(4);
  const Mat train_a =
      tt.val(head.post_norm(tt, tt.slice_rows(normed2, 0, 1), d0, false).raw);
  CHECK((train_a - solo_a).cwiseAbs().maxCoeff() > 1e-12);
}
