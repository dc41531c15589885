// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0
//
// Projection heads, consistency loss, and loss-combination tests.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "acumen/objective.hpp"

using namespace acumen;

namespace {

BackboneConfig toy_backbone() {
  BackboneConfig cfg;
  cfg.image_size = 16;
  cfg.patch_size = 4;
  cfg.channels = 8;
  cfg.depth = 3;
  cfg.heads = 2;
  cfg.tap_layers = {1, 2, 3};
  cfg.text_dim = 12;
  return cfg;
}

FusedFeature random_fused(Tape& t, const BackboneConfig& cfg,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  FusedFeature f;
  f.grid_rows = cfg.grid_side();
  f.grid_cols = cfg.grid_side();
  f.cls_present = false;
  Mat m(f.grid_rows * f.grid_cols, cfg.channels);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = gauss(rng);
  f.tokens = t.leaf(m);
  return f;
}

}  // namespace

TEST_CASE("projections land on the unit sphere of the shared space") {
  const BackboneConfig bb = toy_backbone();
  ObjectiveConfig cfg;
  ParamStore ps;
  std::mt19937_64 init(3);
  Projectors proj(ps, bb, cfg, init);
  Tape t;
  std::mt19937_64 rng(5);
  const Var v = proj.project_visual(t, random_fused(t, bb, rng));
  CHECK(t.val(v).rows() == 1);
  CHECK(t.val(v).cols() == cfg.shared_dim);
  CHECK(std::abs(t.val(v).norm() - 1.0) <= 1e-9);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat txt(1, bb.text_dim);
  for (int i = 0; i < bb.text_dim; ++i) txt(0, i) = gauss(rng);
  const Var u = proj.project_text(t, t.leaf(txt));
  CHECK(t.val(u).cols() == cfg.shared_dim);
  CHECK(std::abs(t.val(u).norm() - 1.0) <= 1e-9);

  // Wrong text width is rejected.
  CHECK_THROWS(proj.project_text(t, t.leaf(Mat::Zero(1, bb.text_dim + 1))));
}

TEST_CASE("projection is deterministic") {
  const BackboneConfig bb = toy_backbone();
  ParamStore ps;
  std::mt19937_64 init(7);
  Projectors proj(ps, bb, ObjectiveConfig{}, init);
  std::mt19937_64 r1(11), r2(11);
  Tape t1, t2;
  const Mat a = t1.val(proj.project_visual(t1, random_fused(t1, bb, r1)));
  const Mat b = t2.val(proj.project_visual(t2, random_fused(t2, bb, r2)));
  CHECK(a == b);  // bitwise
}

TEST_CASE("zero rows normalize to the first basis vector") {
  Tape t;
  const Var z = l2_normalize_row(t, t.leaf(Mat::Zero(1, 5)));
  const Mat v = t.val(z);
  CHECK(v(0, 0) == 1.0);
  for (int i = 1; i < 5; ++i) CHECK(v(0, i) == 0.0);
}

TEST_CASE("consistency loss is one minus the inner product") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Mat a(1, 6), b(1, 6);
    for (int i = 0; i < 6; ++i) {
      a(0, i) = gauss(rng);
      b(0, i) = gauss(rng);
    }
    Tape t;
    const Var va = l2_normalize_row(t, t.leaf(a));
    const Var vb = l2_normalize_row(t, t.leaf(b));
    const Var loss = consistency_loss(t, va, vb);
    const double expect =
        1.0 - (a / a.norm()).cwiseProduct(b / b.norm()).sum();
    CHECK(std::abs(t.val(loss)(0, 0) - expect) <= 1e-12);
    CHECK(t.val(loss)(0, 0) >= -1e-12);
    CHECK(t.val(loss)(0, 0) <= 2.0 + 1e-12);
  }
}

TEST_CASE("aligned vectors cost nothing, antipodal vectors cost two") {
  Tape t;
  Mat e(1, 4);
  e << 0.0, 1.0, 0.0, 0.0;
  const Var v = t.leaf(e);
  CHECK(t.val(consistency_loss(t, v, v))(0, 0) == 0.0);
  const Var w = t.leaf((-e).eval());
  CHECK(t.val(consistency_loss(t, v, w))(0, 0) == 2.0);
}

TEST_CASE("consistency gradients match finite differences on 20 instances") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    Mat a(1, 17), b(1, 17);
    for (int i = 0; i < 17; ++i) {
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
    CHECK(gradient_check_rel_error(eval, a, t.grad(leaf)) < 1e-4);
  }
}

TEST_CASE("loss combination applies the balancing weights") {
  LossWeights w;
  w.alpha = 1.0;
  w.beta = 2.0;
  w.gamma = 3.0;
  const LossBreakdown b = total_loss(0.5, 0.2, 0.1, 0.3, w);
  CHECK(b.mask == 0.5);
  CHECK(b.fix == 0.2);
  CHECK(b.attr == 0.1);
  CHECK(b.consist == 0.3);
  CHECK(std::abs(b.total - 1.8) <= 1e-12);

  LossWeights bad;
  bad.alpha = -0.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("NaN loss parts are rejected naming the term") {
  const double nan = std::nan("");
  try {
    total_loss(0.1, nan, 0.1, 0.1, LossWeights{});
    FAIL("expected rejection");
  } catch (const std::exception& ex) {
    CHECK(std::string(ex.what()).find("fix") != std::string::npos);
  }
  CHECK_THROWS(total_loss(nan, 0.1, 0.1, 0.1, LossWeights{}));
  CHECK_THROWS(total_loss(0.1, 0.1, 0.1, nan, LossWeights{}));
}

TEST_CASE("tape-side combination matches the scalar path bitwise") {
  LossWeights w;
  w.alpha = 0.7;
  w.beta = 1.3;
  w.gamma = 0.4;
  Tape t;
  const Var m = t.leaf(Mat::Constant(1, 1, 0.51));
  const Var f = t.leaf(Mat::Constant(1, 1, 0.23));
  const Var a = t.leaf(Mat::Constant(1, 1, 0.17));
  const Var c = t.leaf(Mat::Constant(1, 1, 0.29));
  const Var total = total_loss_node(t, m, f, a, c, w);
  const LossBreakdown b = total_loss(0.51, 0.23, 0.17, 0.29, w);
  CHECK(t.val(total)(0, 0) == b.total);  // identical arithmetic order

  // Omitting the consistency node drops the term entirely.
  const Var no_c = total_loss_node(t, m, f, a, Var{}, w);
  CHECK(std::abs(t.val(no_c)(0, 0) - (0.51 + 0.7 * 0.23 + 1.3 * 0.17)) <=
        1e-15);
}

TEST_CASE("distinct inputs yield distinct projections") {
  const BackboneConfig bb = toy_backbone();
  ParamStore ps;
  std::mt19937_64 init(19);
  Projectors proj(ps, bb, ObjectiveConfig{}, init);
  Tape t;
  std::mt19937_64 rng(23);
  const Var v1 = proj.project_visual(t, random_fused(t, bb, rng));
  const Var v2 = proj.project_visual(t, random_fused(t, bb, rng));
  CHECK((t.val(v1) - t.val(v2)).cwiseAbs().maxCoeff() > 1e-9);
}
