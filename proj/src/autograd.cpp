// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/autograd.hpp"

#include <cmath>
#include <utility>

namespace acumen {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

Param& ParamStore::create(const std::string& name, Mat init, bool trainable) {
  ACUMEN_CHECK(params_.find(name) == params_.end(),
               "duplicate parameter name: " << name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = std::move(init);
  p->grad.setZero(p->value.rows(), p->value.cols());
  p->m.setZero(p->value.rows(), p->value.cols());
  p->v.setZero(p->value.rows(), p->value.cols());
  p->trainable = trainable;
  Param& ref = *p;
  params_.emplace(name, std::move(p));
  return ref;
}

Param* ParamStore::find(const std::string& name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second.get();
}

const Param* ParamStore::find(const std::string& name) const {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second.get();
}

void ParamStore::zero_grads() {
  for (auto& [k, p] : params_) p->zero_grad();
}

std::size_t ParamStore::trainable_scalar_count() const {
  std::size_t n = 0;
  for (const auto& [k, p] : params_)
    if (p->trainable) n += static_cast<std::size_t>(p->value.size());
  return n;
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Var Tape::push(Mat val, bool requires_grad,
               std::function<void(Tape&, int)> back) {
  Node n;
  n.val = std::move(val);
  n.requires_grad = requires_grad;
  if (requires_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Mat& Tape::grad_acc(int i) {
  Node& n = node(i);
  if (!n.grad_live) {
    n.grad.setZero(n.val.rows(), n.val.cols());
    n.grad_live = true;
  }
  return n.grad;
}

const Mat& Tape::grad(Var v) const {
  const Node& n = node(v.idx);
  ACUMEN_CHECK(n.grad_live, "gradient was not populated for this node");
  return n.grad;
}

Var Tape::leaf(Mat value, bool requires_grad) {
  return push(std::move(value), requires_grad, {});
}

Var Tape::param(Param& p) {
  // Non-trainable params (frozen weights, running stats) enter as constants
  // so backward never traverses or allocates gradients for them.
  Var v = push(p.value, p.trainable, {});
  if (p.trainable) bound_.emplace_back(v.idx, &p);
  return v;
}

void Tape::backward(Var root) {
  ACUMEN_CHECK(val(root).rows() == 1 && val(root).cols() == 1,
               "backward root must be a 1x1 scalar node");
  grad_acc(root.idx)(0, 0) = 1.0;
  for (int i = root.idx; i >= 0; --i) {
    Node& n = node(i);
    if (n.requires_grad && n.grad_live && n.back) n.back(*this, i);
  }
  for (auto& [idx, p] : bound_) {
    if (node(idx).grad_live) p->grad += node(idx).grad;
  }
}

void Tape::clear() {
  nodes_.clear();
  bound_.clear();
}

// --------------------------- arithmetic ------------------------------------

Var Tape::add(Var a, Var b) {
  ACUMEN_CHECK(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
               "add: shape mismatch " << val(a).rows() << "x" << val(a).cols()
                                      << " vs " << val(b).rows() << "x"
                                      << val(b).cols());
  const int ia = a.idx, ib = b.idx;
  bool rg = requires_grad(a) || requires_grad(b);
  return push(val(a) + val(b), rg, [ia, ib](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad) t.grad_acc(ia) += g;
    if (t.node(ib).requires_grad) t.grad_acc(ib) += g;
  });
}

Var Tape::sub(Var a, Var b) {
  ACUMEN_CHECK(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
               "sub: shape mismatch");
  const int ia = a.idx, ib = b.idx;
  bool rg = requires_grad(a) || requires_grad(b);
  return push(val(a) - val(b), rg, [ia, ib](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad) t.grad_acc(ia) += g;
    if (t.node(ib).requires_grad) t.grad_acc(ib) -= g;
  });
}

Var Tape::hadamard(Var a, Var b) {
  ACUMEN_CHECK(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
               "hadamard: shape mismatch");
  const int ia = a.idx, ib = b.idx;
  bool rg = requires_grad(a) || requires_grad(b);
  return push(val(a).cwiseProduct(val(b)), rg, [ia, ib](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad)
      t.grad_acc(ia) += g.cwiseProduct(t.node(ib).val);
    if (t.node(ib).requires_grad)
      t.grad_acc(ib) += g.cwiseProduct(t.node(ia).val);
  });
}

Var Tape::scalar_mul(Var a, double c) {
  const int ia = a.idx;
  return push(val(a) * c, requires_grad(a), [ia, c](Tape& t, int self) {
    if (t.node(ia).requires_grad) t.grad_acc(ia) += c * t.node(self).grad;
  });
}

Var Tape::scalar_add(Var a, double c) {
  const int ia = a.idx;
  return push(val(a).array() + c, requires_grad(a), [ia](Tape& t, int self) {
    if (t.node(ia).requires_grad) t.grad_acc(ia) += t.node(self).grad;
  });
}

Var Tape::add_rowvec(Var a, Var r) {
  ACUMEN_CHECK(val(r).rows() == 1 && val(r).cols() == val(a).cols(),
               "add_rowvec: expected 1x" << val(a).cols() << ", got "
                                         << val(r).rows() << "x"
                                         << val(r).cols());
  const int ia = a.idx, ir = r.idx;
  bool rg = requires_grad(a) || requires_grad(r);
  Mat out = val(a);
  out.rowwise() += val(r).row(0);
  return push(std::move(out), rg, [ia, ir](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad) t.grad_acc(ia) += g;
    if (t.node(ir).requires_grad) t.grad_acc(ir) += g.colwise().sum();
  });
}

Var Tape::scale_rows(Var a, Var s) {
  ACUMEN_CHECK(val(s).cols() == 1 && val(s).rows() == val(a).rows(),
               "scale_rows: expected " << val(a).rows() << "x1 scale");
  const int ia = a.idx, is = s.idx;
  bool rg = requires_grad(a) || requires_grad(s);
  Mat out = val(a).array().colwise() * val(s).col(0).array();
  return push(std::move(out), rg, [ia, is](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad)
      t.grad_acc(ia) +=
          (g.array().colwise() * t.node(is).val.col(0).array()).matrix();
    if (t.node(is).requires_grad)
      t.grad_acc(is) += g.cwiseProduct(t.node(ia).val).rowwise().sum();
  });
}

Var Tape::scale_cols(Var a, Var s) {
  ACUMEN_CHECK(val(s).rows() == 1 && val(s).cols() == val(a).cols(),
               "scale_cols: expected 1x" << val(a).cols() << " scale");
  const int ia = a.idx, is = s.idx;
  bool rg = requires_grad(a) || requires_grad(s);
  Mat out = val(a).array().rowwise() * val(s).row(0).array();
  return push(std::move(out), rg, [ia, is](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad)
      t.grad_acc(ia) +=
          (g.array().rowwise() * t.node(is).val.row(0).array()).matrix();
    if (t.node(is).requires_grad)
      t.grad_acc(is) += g.cwiseProduct(t.node(ia).val).colwise().sum();
  });
}

Var Tape::mul_1x1(Var a, Var s) {
  ACUMEN_CHECK(val(s).size() == 1, "mul_1x1: scale must be 1x1");
  const int ia = a.idx, is = s.idx;
  bool rg = requires_grad(a) || requires_grad(s);
  return push(val(a) * val(s)(0, 0), rg, [ia, is](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad) t.grad_acc(ia) += g * t.node(is).val(0, 0);
    if (t.node(is).requires_grad)
      t.grad_acc(is)(0, 0) += g.cwiseProduct(t.node(ia).val).sum();
  });
}

Var Tape::div_1x1(Var a, Var s) {
  ACUMEN_CHECK(val(s).size() == 1, "div_1x1: divisor must be 1x1");
  const int ia = a.idx, is = s.idx;
  const double sv = val(s)(0, 0);
  bool rg = requires_grad(a) || requires_grad(s);
  return push(val(a) / sv, rg, [ia, is](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    const double d = t.node(is).val(0, 0);
    if (t.node(ia).requires_grad) t.grad_acc(ia) += g / d;
    if (t.node(is).requires_grad)
      t.grad_acc(is)(0, 0) -= g.cwiseProduct(t.node(ia).val).sum() / (d * d);
  });
}

Var Tape::add_1x1(Var a, Var s, double coef) {
  ACUMEN_CHECK(val(s).size() == 1, "add_1x1: addend must be 1x1");
  const int ia = a.idx, is = s.idx;
  bool rg = requires_grad(a) || requires_grad(s);
  return push(val(a).array() + coef * val(s)(0, 0), rg,
              [ia, is, coef](Tape& t, int self) {
                const Mat& g = t.node(self).grad;
                if (t.node(ia).requires_grad) t.grad_acc(ia) += g;
                if (t.node(is).requires_grad)
                  t.grad_acc(is)(0, 0) += coef * g.sum();
              });
}

// --------------------------- linear algebra --------------------------------

Var Tape::matmul(Var a, Var b) {
  ACUMEN_CHECK(val(a).cols() == val(b).rows(),
               "matmul: inner dims " << val(a).cols() << " vs "
                                     << val(b).rows());
  const int ia = a.idx, ib = b.idx;
  bool rg = requires_grad(a) || requires_grad(b);
  return push(val(a) * val(b), rg, [ia, ib](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad)
      t.grad_acc(ia).noalias() += g * t.node(ib).val.transpose();
    if (t.node(ib).requires_grad)
      t.grad_acc(ib).noalias() += t.node(ia).val.transpose() * g;
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  ACUMEN_CHECK(val(a).cols() == val(b).cols(),
               "matmul_nt: inner dims " << val(a).cols() << " vs "
                                        << val(b).cols());
  const int ia = a.idx, ib = b.idx;
  bool rg = requires_grad(a) || requires_grad(b);
  return push(val(a) * val(b).transpose(), rg, [ia, ib](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ia).requires_grad)
      t.grad_acc(ia).noalias() += g * t.node(ib).val;
    if (t.node(ib).requires_grad)
      t.grad_acc(ib).noalias() += g.transpose() * t.node(ia).val;
  });
}

// --------------------------- nonlinearities --------------------------------

Var Tape::relu(Var a) {
  const int ia = a.idx;
  return push(val(a).cwiseMax(0.0), requires_grad(a), [ia](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    const Mat& g = t.node(self).grad;
    const Mat& x = t.node(ia).val;
    t.grad_acc(ia) += (x.array() > 0.0).select(g, Mat::Zero(g.rows(), g.cols()));
  });
}

Var Tape::gelu(Var a) {
  const int ia = a.idx;
  Mat out = val(a).unaryExpr(
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
  return push(std::move(out), requires_grad(a), [ia](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    const Mat& g = t.node(self).grad;
    const Mat& x = t.node(ia).val;
    Mat d = x.unaryExpr([](double v) {
      return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) +
             v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
    });
    t.grad_acc(ia) += g.cwiseProduct(d);
  });
}

Var Tape::sigmoid(Var a) {
  const int ia = a.idx;
  Mat out = val(a).unaryExpr([](double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
  });
  return push(std::move(out), requires_grad(a), [ia](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    const Mat& g = t.node(self).grad;
    const Mat& y = t.node(self).val;
    t.grad_acc(ia) +=
        g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
  });
}

Var Tape::exp_(Var a) {
  const int ia = a.idx;
  return push(val(a).array().exp(), requires_grad(a), [ia](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    t.grad_acc(ia) += t.node(self).grad.cwiseProduct(t.node(self).val);
  });
}

Var Tape::log_(Var a) {
  const int ia = a.idx;
  return push(val(a).array().log(), requires_grad(a), [ia](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    t.grad_acc(ia) += t.node(self).grad.cwiseQuotient(t.node(ia).val);
  });
}

Var Tape::sqrt_(Var a) {
  const int ia = a.idx;
  return push(val(a).array().sqrt(), requires_grad(a), [ia](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    t.grad_acc(ia) += (t.node(self).grad.array() /
                       (2.0 * t.node(self).val.array()))
                          .matrix();
  });
}

// --------------------------- reductions ------------------------------------

Var Tape::sum_all(Var a) {
  const int ia = a.idx;
  Mat out(1, 1);
  out(0, 0) = val(a).sum();
  return push(std::move(out), requires_grad(a), [ia](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    t.grad_acc(ia).array() += t.node(self).grad(0, 0);
  });
}

Var Tape::mean_all(Var a) {
  const int ia = a.idx;
  const double n = static_cast<double>(val(a).size());
  Mat out(1, 1);
  out(0, 0) = val(a).sum() / n;
  return push(std::move(out), requires_grad(a), [ia, n](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    t.grad_acc(ia).array() += t.node(self).grad(0, 0) / n;
  });
}

Var Tape::col_mean(Var a) {
  const int ia = a.idx;
  const double r = static_cast<double>(val(a).rows());
  Mat out = val(a).colwise().sum() / r;
  return push(std::move(out), requires_grad(a), [ia, r](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    const Mat& g = t.node(self).grad;  // 1 x C
    t.grad_acc(ia).rowwise() += (g.row(0) / r);
  });
}

Var Tape::rows_softmax(Var a) {
  const int ia = a.idx;
  Mat out = val(a);
  for (int r = 0; r < out.rows(); ++r) {
    const double mx = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - mx).exp();
    out.row(r) /= out.row(r).sum();
  }
  return push(std::move(out), requires_grad(a), [ia](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    const Mat& g = t.node(self).grad;
    const Mat& y = t.node(self).val;
    Mat& da = t.grad_acc(ia);
    for (int r = 0; r < y.rows(); ++r) {
      const double dot = g.row(r).dot(y.row(r));
      da.row(r) += y.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
  });
}

Var Tape::softmax_all(Var a) { return softmax_all_scaled(a, 1.0); }

Var Tape::softmax_all_scaled(Var a, double c) {
  const int ia = a.idx;
  const double mx = val(a).maxCoeff();
  Mat e = (val(a).array() - mx).exp();
  const double s = e.sum();
  Mat out = (c * e.array() / s).matrix();
  return push(std::move(out), requires_grad(a), [ia, c](Tape& t, int self) {
    if (!t.node(ia).requires_grad) return;
    const Mat& g = t.node(self).grad;
    const Mat& y = t.node(self).val;
    const double dot = g.cwiseProduct(y).sum() / c;
    t.grad_acc(ia) += y.cwiseProduct((g.array() - dot).matrix());
  });
}

Var Tape::layer_norm_rows(Var x, Var gamma, Var beta, double eps) {
  const int C = static_cast<int>(val(x).cols());
  ACUMEN_CHECK(val(gamma).rows() == 1 && val(gamma).cols() == C &&
                   val(beta).rows() == 1 && val(beta).cols() == C,
               "layer_norm_rows: affine params must be 1x" << C);
  const int ix = x.idx, ig = gamma.idx, ib = beta.idx;
  const Mat& xv = val(x);
  Mat xhat(xv.rows(), C);
  Eigen::VectorXd rstd(xv.rows());
  for (int r = 0; r < xv.rows(); ++r) {
    const double mu = xv.row(r).mean();
    const double var = (xv.row(r).array() - mu).square().mean();
    const double rs = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mu) * rs;
    rstd(r) = rs;
  }
  Mat out = xhat.array().rowwise() * val(gamma).row(0).array();
  out.rowwise() += val(beta).row(0);
  bool rg = requires_grad(x) || requires_grad(gamma) || requires_grad(beta);
  auto xh = std::make_shared<Mat>(std::move(xhat));
  auto rs = std::make_shared<Eigen::VectorXd>(std::move(rstd));
  return push(std::move(out), rg, [ix, ig, ib, xh, rs](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    if (t.node(ig).requires_grad)
      t.grad_acc(ig) += g.cwiseProduct(*xh).colwise().sum();
    if (t.node(ib).requires_grad) t.grad_acc(ib) += g.colwise().sum();
    if (t.node(ix).requires_grad) {
      const Mat& gm = t.node(ig).val;
      Mat dxhat = g.array().rowwise() * gm.row(0).array();
      Mat& dx = t.grad_acc(ix);
      for (int r = 0; r < g.rows(); ++r) {
        const double m1 = dxhat.row(r).mean();
        const double m2 = dxhat.row(r).cwiseProduct(xh->row(r)).mean();
        dx.row(r) += ((dxhat.row(r).array() - m1 - xh->row(r).array() * m2) *
                      (*rs)(r))
                         .matrix();
      }
    }
  });
}

Var Tape::batch_norm_rows(Var x, Var gamma, Var beta, BatchNormState& state,
                          bool training) {
  const int C = static_cast<int>(val(x).cols());
  const int R = static_cast<int>(val(x).rows());
  ACUMEN_CHECK(val(gamma).cols() == C && val(beta).cols() == C,
               "batch_norm_rows: affine params must be 1x" << C);
  const int ix = x.idx, ig = gamma.idx, ib = beta.idx;

  // Batch statistics degenerate with a single row; fall back to running
  // statistics there (documented behavior for batch size 1 in training).
  const bool use_batch_stats = training && R > 1;

  RowVec mu(C), var(C);
  if (use_batch_stats) {
    mu = val(x).colwise().mean();
    var = (val(x).rowwise() - mu).array().square().colwise().mean();
    const double unbias = static_cast<double>(R) / (R - 1);
    state.running_mean->value =
        (1.0 - state.momentum) * state.running_mean->value + state.momentum * mu;
    state.running_var->value =
        (1.0 - state.momentum) * state.running_var->value +
        state.momentum * (var * unbias);
  } else {
    mu = state.running_mean->value.row(0);
    var = state.running_var->value.row(0);
  }

  RowVec rstd = (var.array() + state.eps).rsqrt();
  Mat xhat = (val(x).rowwise() - mu).array().rowwise() * rstd.array();
  Mat out = xhat.array().rowwise() * val(gamma).row(0).array();
  out.rowwise() += val(beta).row(0);

  bool rg = requires_grad(x) || requires_grad(gamma) || requires_grad(beta);
  auto xh = std::make_shared<Mat>(std::move(xhat));
  auto rs = std::make_shared<RowVec>(std::move(rstd));
  return push(std::move(out), rg,
              [ix, ig, ib, xh, rs, use_batch_stats](Tape& t, int self) {
                const Mat& g = t.node(self).grad;
                if (t.node(ig).requires_grad)
                  t.grad_acc(ig) += g.cwiseProduct(*xh).colwise().sum();
                if (t.node(ib).requires_grad)
                  t.grad_acc(ib) += g.colwise().sum();
                if (!t.node(ix).requires_grad) return;
                const Mat& gm = t.node(ig).val;
                Mat dxhat = g.array().rowwise() * gm.row(0).array();
                Mat& dx = t.grad_acc(ix);
                if (!use_batch_stats) {
                  dx += (dxhat.array().rowwise() * rs->array()).matrix();
                  return;
                }
                const RowVec m1 = dxhat.colwise().mean();
                const RowVec m2 = dxhat.cwiseProduct(*xh).colwise().mean();
                Mat corr = (xh->array().rowwise() * m2.array()).matrix();
                corr.rowwise() += m1;
                dx += ((dxhat - corr).array().rowwise() * rs->array()).matrix();
              });
}

// --------------------------- structure -------------------------------------

Var Tape::concat_cols(const std::vector<Var>& parts) {
  ACUMEN_CHECK(!parts.empty(), "concat_cols: no parts");
  const int R = static_cast<int>(val(parts[0]).rows());
  int C = 0;
  bool rg = false;
  for (Var p : parts) {
    ACUMEN_CHECK(val(p).rows() == R, "concat_cols: row mismatch");
    C += static_cast<int>(val(p).cols());
    rg = rg || requires_grad(p);
  }
  Mat out(R, C);
  std::vector<std::pair<int, int>> spans;  // (idx, c0)
  int c0 = 0;
  for (Var p : parts) {
    out.middleCols(c0, val(p).cols()) = val(p);
    spans.emplace_back(p.idx, c0);
    c0 += static_cast<int>(val(p).cols());
  }
  return push(std::move(out), rg, [spans](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    for (auto [idx, c] : spans) {
      if (t.node(idx).requires_grad)
        t.grad_acc(idx) += g.middleCols(c, t.node(idx).val.cols());
    }
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  ACUMEN_CHECK(!parts.empty(), "concat_rows: no parts");
  const int C = static_cast<int>(val(parts[0]).cols());
  int R = 0;
  bool rg = false;
  for (Var p : parts) {
    ACUMEN_CHECK(val(p).cols() == C, "concat_rows: column mismatch");
    R += static_cast<int>(val(p).rows());
    rg = rg || requires_grad(p);
  }
  Mat out(R, C);
  std::vector<std::pair<int, int>> spans;
  int r0 = 0;
  for (Var p : parts) {
    out.middleRows(r0, val(p).rows()) = val(p);
    spans.emplace_back(p.idx, r0);
    r0 += static_cast<int>(val(p).rows());
  }
  return push(std::move(out), rg, [spans](Tape& t, int self) {
    const Mat& g = t.node(self).grad;
    for (auto [idx, r] : spans) {
      if (t.node(idx).requires_grad)
        t.grad_acc(idx) += g.middleRows(r, t.node(idx).val.rows());
    }
  });
}

Var Tape::slice_cols(Var a, int c0, int n) {
  ACUMEN_CHECK(c0 >= 0 && n > 0 && c0 + n <= val(a).cols(),
               "slice_cols: range out of bounds");
  const int ia = a.idx;
  return push(val(a).middleCols(c0, n), requires_grad(a),
              [ia, c0, n](Tape& t, int self) {
                if (!t.node(ia).requires_grad) return;
                t.grad_acc(ia).middleCols(c0, n) += t.node(self).grad;
              });
}

Var Tape::slice_rows(Var a, int r0, int n) {
  ACUMEN_CHECK(r0 >= 0 && n > 0 && r0 + n <= val(a).rows(),
               "slice_rows: range out of bounds");
  const int ia = a.idx;
  return push(val(a).middleRows(r0, n), requires_grad(a),
              [ia, r0, n](Tape& t, int self) {
                if (!t.node(ia).requires_grad) return;
                t.grad_acc(ia).middleRows(r0, n) += t.node(self).grad;
              });
}

// --------------------------- spatial ops -----------------------------------

Var Tape::conv2d(Var x, Var weight, Var bias, int height, int width,
                 int ksize) {
  const int cin = static_cast<int>(val(x).cols());
  const int cout = static_cast<int>(val(weight).cols());
  ACUMEN_CHECK(val(x).rows() == static_cast<long>(height) * width,
               "conv2d: token count " << val(x).rows() << " != " << height
                                      << "*" << width);
  ACUMEN_CHECK(ksize >= 1 && ksize % 2 == 1, "conv2d: kernel must be odd");
  ACUMEN_CHECK(val(weight).rows() == static_cast<long>(ksize) * ksize * cin,
               "conv2d: weight rows " << val(weight).rows() << " != k*k*Cin");
  ACUMEN_CHECK(val(bias).rows() == 1 && val(bias).cols() == cout,
               "conv2d: bias must be 1x" << cout);

  const int half = ksize / 2;
  const int npix = height * width;
  const int slots = ksize * ksize;

  // im2col with replicate padding: source pixel indices are edge-clamped.
  auto src = std::make_shared<std::vector<int>>();
  src->resize(static_cast<std::size_t>(npix) * slots);
  Mat cols(npix, slots * cin);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int o = r * width + c;
      int slot = 0;
      for (int dr = -half; dr <= half; ++dr) {
        for (int dc = -half; dc <= half; ++dc, ++slot) {
          const int rr = std::min(std::max(r + dr, 0), height - 1);
          const int cc = std::min(std::max(c + dc, 0), width - 1);
          const int s = rr * width + cc;
          (*src)[static_cast<std::size_t>(o) * slots + slot] = s;
          cols.block(o, slot * cin, 1, cin) = val(x).row(s);
        }
      }
    }
  }

  Mat out = cols * val(weight);
  out.rowwise() += val(bias).row(0);

  const int ix = x.idx, iw = weight.idx, ib = bias.idx;
  bool rg = requires_grad(x) || requires_grad(weight) || requires_grad(bias);
  auto colsp = rg ? std::make_shared<Mat>(std::move(cols)) : nullptr;
  return push(std::move(out), rg,
              [ix, iw, ib, colsp, src, slots, cin](Tape& t, int self) {
                const Mat& g = t.node(self).grad;
                if (t.node(ib).requires_grad)
                  t.grad_acc(ib) += g.colwise().sum();
                if (t.node(iw).requires_grad)
                  t.grad_acc(iw).noalias() += colsp->transpose() * g;
                if (t.node(ix).requires_grad) {
                  Mat dcols = g * t.node(iw).val.transpose();
                  Mat& dx = t.grad_acc(ix);
                  const int npix = static_cast<int>(dcols.rows());
                  for (int o = 0; o < npix; ++o) {
                    for (int slot = 0; slot < slots; ++slot) {
                      const int s =
                          (*src)[static_cast<std::size_t>(o) * slots + slot];
                      dx.row(s) += dcols.block(o, slot * cin, 1, cin);
                    }
                  }
                }
              });
}

namespace {
// Sample mapping for align_corners=false bilinear resizing with edge clamp.
struct LinearTap {
  int lo, hi;
  double wlo, whi;
};
LinearTap linear_tap(int out_i, int in_n, int out_n) {
  const double scale = static_cast<double>(in_n) / out_n;
  double pos = (out_i + 0.5) * scale - 0.5;
  if (pos < 0.0) pos = 0.0;
  if (pos > in_n - 1.0) pos = in_n - 1.0;
  LinearTap tap;
  tap.lo = static_cast<int>(std::floor(pos));
  tap.hi = std::min(tap.lo + 1, in_n - 1);
  tap.whi = pos - tap.lo;
  tap.wlo = 1.0 - tap.whi;
  return tap;
}
}  // namespace

Var Tape::resize_bilinear(Var x, int height, int width, int out_height,
                          int out_width) {
  ACUMEN_CHECK(val(x).rows() == static_cast<long>(height) * width,
               "resize_bilinear: token count mismatch");
  const int C = static_cast<int>(val(x).cols());
  const int ix = x.idx;

  struct Stencil {
    int s[4];
    double w[4];
  };
  auto taps = std::make_shared<std::vector<Stencil>>();
  taps->reserve(static_cast<std::size_t>(out_height) * out_width);
  for (int r = 0; r < out_height; ++r) {
    const LinearTap tr = linear_tap(r, height, out_height);
    for (int c = 0; c < out_width; ++c) {
      const LinearTap tc = linear_tap(c, width, out_width);
      Stencil st;
      st.s[0] = tr.lo * width + tc.lo;
      st.s[1] = tr.lo * width + tc.hi;
      st.s[2] = tr.hi * width + tc.lo;
      st.s[3] = tr.hi * width + tc.hi;
      st.w[0] = tr.wlo * tc.wlo;
      st.w[1] = tr.wlo * tc.whi;
      st.w[2] = tr.whi * tc.wlo;
      st.w[3] = tr.whi * tc.whi;
      taps->push_back(st);
    }
  }

  Mat out(static_cast<long>(out_height) * out_width, C);
  for (std::size_t o = 0; o < taps->size(); ++o) {
    const Stencil& st = (*taps)[o];
    out.row(static_cast<long>(o)) = st.w[0] * val(x).row(st.s[0]) +
                                    st.w[1] * val(x).row(st.s[1]) +
                                    st.w[2] * val(x).row(st.s[2]) +
                                    st.w[3] * val(x).row(st.s[3]);
  }
  return push(std::move(out), requires_grad(x), [ix, taps](Tape& t, int self) {
    if (!t.node(ix).requires_grad) return;
    const Mat& g = t.node(self).grad;
    Mat& dx = t.grad_acc(ix);
    for (std::size_t o = 0; o < taps->size(); ++o) {
      const Stencil& st = (*taps)[o];
      for (int k = 0; k < 4; ++k)
        dx.row(st.s[k]) += st.w[k] * g.row(static_cast<long>(o));
    }
  });
}

Var Tape::dropout(Var x, double rate, std::mt19937_64& rng, bool training) {
  if (!training || rate <= 0.0) return x;
  ACUMEN_CHECK(rate < 1.0, "dropout: rate must be < 1");
  const double keep = 1.0 - rate;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Mat mask(val(x).rows(), val(x).cols());
  for (long i = 0; i < mask.size(); ++i)
    mask.data()[i] = uni(rng) < keep ? 1.0 / keep : 0.0;
  Var m = leaf(std::move(mask), false);
  return hadamard(x, m);
}

// ---------------------------------------------------------------------------

double gradient_check_rel_error(const std::function<double(const Mat&)>& f,
                                const Mat& x, const Mat& analytic_grad,
                                double step) {
  Mat fd(x.rows(), x.cols());
  Mat xp = x;
  for (long i = 0; i < x.size(); ++i) {
    const double xi = x.data()[i];
    const double h = step * std::max(1.0, std::abs(xi));
    xp.data()[i] = xi + h;
    const double fplus = f(xp);
    xp.data()[i] = xi - h;
    const double fminus = f(xp);
    xp.data()[i] = xi;
    fd.data()[i] = (fplus - fminus) / (2.0 * h);
  }
  const double denom = std::max({analytic_grad.norm(), fd.norm(), 1e-12});
  return (analytic_grad - fd).norm() / denom;
}

}  // namespace acumen
