// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "acumen/common.hpp"

namespace acumen {

/// One trainable (or persistent) tensor plus its accumulated gradient and
/// Adam moments. Owned by a ParamStore; modules hold raw pointers.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat m;  // Adam first moment
  Mat v;  // Adam second moment
  bool trainable = true;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Name-ordered parameter registry. Iteration order is the lexicographic
/// name order, which makes serialization and optimizer behavior
/// reproducible across runs.
class ParamStore {
 public:
  Param& create(const std::string& name, Mat init, bool trainable = true);
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;

  template <class F>
  void for_each(F&& f) {
    for (auto& [k, p] : params_) f(*p);
  }
  template <class F>
  void for_each(F&& f) const {
    for (const auto& [k, p] : params_) f(*p);
  }

  void zero_grads();
  std::size_t size() const { return params_.size(); }
  std::size_t trainable_scalar_count() const;

 private:
  std::map<std::string, std::unique_ptr<Param>> params_;
};

/// Handle to a node on a Tape. Plain index; valid for the tape that made it.
struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

/// State for a batch-norm layer's running statistics. Lives in Params so it
/// serializes with checkpoints; updated as a forward side effect in
/// training mode.
struct BatchNormState {
  Param* running_mean = nullptr;  // 1 x C
  Param* running_var = nullptr;   // 1 x C
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Reverse-mode autodiff tape over Eigen double matrices. Build the graph
/// forward with the op members, call backward() on a 1x1 result, then read
/// gradients from grad() or from bound Params.
///
/// Single-threaded by design: node creation order is the topological order
/// used by backward, so results are bit-reproducible for a fixed call
/// sequence.
class Tape {
 public:
  Var leaf(Mat value, bool requires_grad = false);
  Var param(Param& p);

  const Mat& val(Var v) const { return node(v.idx).val; }
  const Mat& grad(Var v) const;
  bool requires_grad(Var v) const { return node(v.idx).requires_grad; }

  // Elementwise and broadcast arithmetic.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scalar_mul(Var a, double c);
  Var scalar_add(Var a, double c);
  Var add_rowvec(Var a, Var r);            // a (R x C) + r (1 x C)
  Var scale_rows(Var a, Var s);            // a (R x C) .* s (R x 1)
  Var scale_cols(Var a, Var s);            // a (R x C) .* s (1 x C)
  Var mul_1x1(Var a, Var s);               // a * scalar node
  Var div_1x1(Var a, Var s);               // a / scalar node
  Var add_1x1(Var a, Var s, double coef);  // a + coef * scalar node

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a * b^T

  // Nonlinearities.
  Var relu(Var a);
  Var gelu(Var a);
  Var sigmoid(Var a);
  Var exp_(Var a);
  Var log_(Var a);
  Var sqrt_(Var a);

  // Reductions and normalizations.
  Var sum_all(Var a);   // 1x1
  Var mean_all(Var a);  // 1x1
  Var col_mean(Var a);  // 1 x C, mean over rows
  Var rows_softmax(Var a);
  Var softmax_all(Var a);                    // whole matrix as one distribution
  Var softmax_all_scaled(Var a, double c);   // c * softmax_all(a)
  Var layer_norm_rows(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var batch_norm_rows(Var x, Var gamma, Var beta, BatchNormState& state,
                      bool training);

  // Structure.
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_cols(Var a, int c0, int n);
  Var slice_rows(Var a, int r0, int n);

  // Spatial ops on (H*W) x C row-major pixel layouts.
  // conv2d uses replicate (edge-clamp) padding and stride 1.
  Var conv2d(Var x, Var weight, Var bias, int height, int width, int ksize);
  Var resize_bilinear(Var x, int height, int width, int out_height,
                      int out_width);

  /// Inverted dropout: zeroes entries with probability `rate` and rescales
  /// the survivors by 1/(1-rate). Identity when not training or rate == 0.
  Var dropout(Var x, double rate, std::mt19937_64& rng, bool training);

  void backward(Var root);
  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat val;
    Mat grad;
    std::function<void(Tape&, int)> back;
    bool requires_grad = false;
    bool grad_live = false;
  };

  Node& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  Var push(Mat val, bool requires_grad, std::function<void(Tape&, int)> back);
  Mat& grad_acc(int i);
  bool live(int i) const { return node(i).grad_live; }

  std::vector<Node> nodes_;
  std::vector<std::pair<int, Param*>> bound_;
};

/// Relative error between an analytic gradient and a central finite
/// difference of `f`, evaluated at `x`. Used by the gradient-check suites.
double gradient_check_rel_error(const std::function<double(const Mat&)>& f,
                                const Mat& x, const Mat& analytic_grad,
                                double step = 1e-6);

}  // namespace acumen
