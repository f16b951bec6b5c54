// SPDX-License-Identifier: Apache-2.0
#include "consnet/tape.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace consnet {

namespace {

using EMat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

ECMap emap(const Tensor& t) { return ECMap(t.data(), t.rows(), t.cols()); }
EMap emap(Tensor& t) { return EMap(t.data(), t.rows(), t.cols()); }

real stable_sigmoid(real x) {
  if (x >= 0) {
    return real(1) / (real(1) + std::exp(-x));
  }
  const real e = std::exp(x);
  return e / (real(1) + e);
}

}  // namespace

Var Tape::push(Tensor value, std::function<void(Tape&)> back) {
  if (check_finite_ && !value.all_finite()) {
    throw std::runtime_error("Tape: non-finite values in op output");
  }
  nodes_.push_back(Node{std::move(value), Tensor(), std::move(back)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

int Tape::next_id() const { return static_cast<int>(nodes_.size()); }

Tensor& Tape::grad_slot(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor::zeros(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.empty()) return Tensor::zeros(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::require_same_shape(Var a, Var b, const char* op) const {
  if (!node(a.id).value.same_shape(node(b.id).value)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                node(a.id).value.shape_str() + " vs " +
                                node(b.id).value.shape_str());
  }
}

Var Tape::input(Tensor value) {
  if (value.empty()) throw std::invalid_argument("Tape::input: empty tensor");
  return push(std::move(value));
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& va = node(a.id).value;
  const Tensor& vb = node(b.id).value;
  if (va.cols() != vb.rows()) {
    throw std::invalid_argument("matmul: inner dims " + va.shape_str() + " . " + vb.shape_str());
  }
  Tensor out(va.rows(), vb.cols());
  emap(out).noalias() = emap(va) * emap(vb);
  const int oid = next_id();
  return push(std::move(out), [a, b, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    emap(t.grad_slot(a.id)).noalias() += emap(g) * emap(t.node(b.id).value).transpose();
    emap(t.grad_slot(b.id)).noalias() += emap(t.node(a.id).value).transpose() * emap(g);
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  const Tensor& va = node(a.id).value;
  const Tensor& vb = node(b.id).value;
  if (va.cols() != vb.cols()) {
    throw std::invalid_argument("matmul_nt: inner dims " + va.shape_str() + " . " +
                                vb.shape_str() + "^T");
  }
  Tensor out(va.rows(), vb.rows());
  emap(out).noalias() = emap(va) * emap(vb).transpose();
  const int oid = next_id();
  return push(std::move(out), [a, b, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    emap(t.grad_slot(a.id)).noalias() += emap(g) * emap(t.node(b.id).value);
    emap(t.grad_slot(b.id)).noalias() += emap(g).transpose() * emap(t.node(a.id).value);
  });
}

Var Tape::transpose(Var a) {
  const Tensor& va = node(a.id).value;
  Tensor out(va.cols(), va.rows());
  emap(out) = emap(va).transpose();
  const int oid = next_id();
  return push(std::move(out), [a, oid](Tape& t) {
    emap(t.grad_slot(a.id)) += emap(t.node(oid).grad).transpose();
  });
}

Var Tape::add(Var a, Var b) {
  require_same_shape(a, b, "add");
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  emap(out) = emap(va) + emap(node(b.id).value);
  const int oid = next_id();
  return push(std::move(out), [a, b, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    emap(t.grad_slot(a.id)) += emap(g);
    emap(t.grad_slot(b.id)) += emap(g);
  });
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  emap(out) = emap(va) - emap(node(b.id).value);
  const int oid = next_id();
  return push(std::move(out), [a, b, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    emap(t.grad_slot(a.id)) += emap(g);
    emap(t.grad_slot(b.id)) -= emap(g);
  });
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  const Tensor& va = node(a.id).value;
  const Tensor& vb = node(b.id).value;
  Tensor out(va.rows(), va.cols());
  for (int i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  const int oid = next_id();
  return push(std::move(out), [a, b, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& xa = t.node(a.id).value;
    const Tensor& xb = t.node(b.id).value;
    Tensor& ga = t.grad_slot(a.id);
    Tensor& gb = t.grad_slot(b.id);
    for (int i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * xb[i];
      gb[i] += g[i] * xa[i];
    }
  });
}

Var Tape::scale(Var a, real c) {
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  for (int i = 0; i < out.size(); ++i) out[i] = va[i] * c;
  const int oid = next_id();
  return push(std::move(out), [a, c, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    Tensor& ga = t.grad_slot(a.id);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
  });
}

Var Tape::add_row_bias(Var m, Var bias) {
  const Tensor& vm = node(m.id).value;
  const Tensor& vb = node(bias.id).value;
  if (vb.rows() != 1 || vb.cols() != vm.cols()) {
    throw std::invalid_argument("add_row_bias: bias " + vb.shape_str() + " for matrix " +
                                vm.shape_str());
  }
  Tensor out(vm.rows(), vm.cols());
  for (int r = 0; r < vm.rows(); ++r) {
    for (int c = 0; c < vm.cols(); ++c) out.at(r, c) = vm.at(r, c) + vb.at(0, c);
  }
  const int oid = next_id();
  return push(std::move(out), [m, bias, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    emap(t.grad_slot(m.id)) += emap(g);
    Tensor& gb = t.grad_slot(bias.id);
    for (int r = 0; r < g.rows(); ++r) {
      for (int c = 0; c < g.cols(); ++c) gb.at(0, c) += g.at(r, c);
    }
  });
}

Var Tape::relu(Var a) {
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  for (int i = 0; i < out.size(); ++i) out[i] = va[i] > 0 ? va[i] : real(0);
  const int oid = next_id();
  return push(std::move(out), [a, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& x = t.node(a.id).value;
    Tensor& ga = t.grad_slot(a.id);
    // subgradient at 0 is 0
    for (int i = 0; i < g.size(); ++i) ga[i] += x[i] > 0 ? g[i] : real(0);
  });
}

Var Tape::leaky_relu(Var a, real slope) {
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  for (int i = 0; i < out.size(); ++i) out[i] = va[i] > 0 ? va[i] : slope * va[i];
  const int oid = next_id();
  return push(std::move(out), [a, slope, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& x = t.node(a.id).value;
    Tensor& ga = t.grad_slot(a.id);
    for (int i = 0; i < g.size(); ++i) ga[i] += x[i] > 0 ? g[i] : slope * g[i];
  });
}

Var Tape::sigmoid(Var a) {
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  for (int i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(va[i]);
  const int oid = next_id();
  return push(std::move(out), [a, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& y = t.node(oid).value;
    Tensor& ga = t.grad_slot(a.id);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (real(1) - y[i]);
  });
}

Var Tape::log(Var a) {
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  for (int i = 0; i < out.size(); ++i) {
    if (va[i] <= 0) throw std::domain_error("log: non-positive input");
    out[i] = std::log(va[i]);
  }
  const int oid = next_id();
  return push(std::move(out), [a, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& x = t.node(a.id).value;
    Tensor& ga = t.grad_slot(a.id);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
  });
}

Var Tape::clamp(Var a, real lo, real hi) {
  if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  for (int i = 0; i < out.size(); ++i) out[i] = va[i] < lo ? lo : (va[i] > hi ? hi : va[i]);
  const int oid = next_id();
  return push(std::move(out), [a, lo, hi, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& x = t.node(a.id).value;
    Tensor& ga = t.grad_slot(a.id);
    for (int i = 0; i < g.size(); ++i) {
      if (x[i] > lo && x[i] < hi) ga[i] += g[i];
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const int rows = node(parts[0].id).value.rows();
  int cols = 0;
  for (Var p : parts) {
    const Tensor& v = node(p.id).value;
    if (v.rows() != rows) throw std::invalid_argument("concat_cols: row count mismatch");
    cols += v.cols();
  }
  Tensor out(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const Tensor& v = node(p.id).value;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < v.cols(); ++c) out.at(r, off + c) = v.at(r, c);
    }
    off += v.cols();
  }
  const int oid = next_id();
  std::vector<Var> own = parts;
  return push(std::move(out), [own, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    int off2 = 0;
    for (Var p : own) {
      Tensor& gp = t.grad_slot(p.id);
      for (int r = 0; r < gp.rows(); ++r) {
        for (int c = 0; c < gp.cols(); ++c) gp.at(r, c) += g.at(r, off2 + c);
      }
      off2 += gp.cols();
    }
  });
}

Var Tape::gather_rows(Var a, std::vector<int> indices) {
  const Tensor& va = node(a.id).value;
  for (int idx : indices) {
    if (idx < 0 || idx >= va.rows()) throw std::out_of_range("gather_rows: index out of range");
  }
  Tensor out(static_cast<int>(indices.size()), va.cols());
  for (int r = 0; r < out.rows(); ++r) {
    for (int c = 0; c < va.cols(); ++c) out.at(r, c) = va.at(indices[r], c);
  }
  const int oid = next_id();
  return push(std::move(out), [a, idx = std::move(indices), oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    Tensor& ga = t.grad_slot(a.id);
    for (int r = 0; r < g.rows(); ++r) {
      for (int c = 0; c < g.cols(); ++c) ga.at(idx[r], c) += g.at(r, c);
    }
  });
}

Var Tape::row_l2_normalize(Var a) {
  const Tensor& va = node(a.id).value;
  Tensor out(va.rows(), va.cols());
  std::vector<real> norms(va.rows());
  for (int r = 0; r < va.rows(); ++r) {
    const real n = l2_norm(va.row_span(r));
    if (n <= 0 || !std::isfinite(n)) {
      throw std::domain_error("row_l2_normalize: zero or non-finite row " + std::to_string(r));
    }
    norms[r] = n;
    for (int c = 0; c < va.cols(); ++c) out.at(r, c) = va.at(r, c) / n;
  }
  const int oid = next_id();
  return push(std::move(out), [a, norms = std::move(norms), oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& y = t.node(oid).value;
    Tensor& ga = t.grad_slot(a.id);
    for (int r = 0; r < g.rows(); ++r) {
      real gy = 0;
      for (int c = 0; c < g.cols(); ++c) gy += g.at(r, c) * y.at(r, c);
      for (int c = 0; c < g.cols(); ++c) {
        ga.at(r, c) += (g.at(r, c) - y.at(r, c) * gy) / norms[r];
      }
    }
  });
}

Var Tape::masked_row_softmax(Var a, AdjacencyRef support) {
  const Tensor& va = node(a.id).value;
  if (!support || static_cast<int>(support->size()) != va.rows()) {
    throw std::invalid_argument("masked_row_softmax: support size mismatch");
  }
  Tensor out = Tensor::zeros(va.rows(), va.cols());
  for (int r = 0; r < va.rows(); ++r) {
    const auto& sup = (*support)[r];
    if (sup.empty()) {
      throw std::domain_error("masked_row_softmax: all-masked row " + std::to_string(r));
    }
    real rowmax = -std::numeric_limits<real>::infinity();
    for (int j : sup) {
      if (j < 0 || j >= va.cols()) throw std::out_of_range("masked_row_softmax: support index");
      rowmax = std::max(rowmax, va.at(r, j));
    }
    real denom = 0;
    for (int j : sup) denom += std::exp(va.at(r, j) - rowmax);
    for (int j : sup) out.at(r, j) = std::exp(va.at(r, j) - rowmax) / denom;
  }
  const int oid = next_id();
  return push(std::move(out), [a, support, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& y = t.node(oid).value;
    Tensor& ga = t.grad_slot(a.id);
    for (int r = 0; r < g.rows(); ++r) {
      const auto& sup = (*support)[r];
      real gy = 0;
      for (int j : sup) gy += g.at(r, j) * y.at(r, j);
      for (int j : sup) ga.at(r, j) += y.at(r, j) * (g.at(r, j) - gy);
    }
  });
}

Var Tape::mean_rows(Var a) {
  const Tensor& va = node(a.id).value;
  Tensor out = Tensor::zeros(1, va.cols());
  for (int r = 0; r < va.rows(); ++r) {
    for (int c = 0; c < va.cols(); ++c) out.at(0, c) += va.at(r, c);
  }
  const real inv = real(1) / va.rows();
  for (int c = 0; c < va.cols(); ++c) out.at(0, c) *= inv;
  const int oid = next_id();
  return push(std::move(out), [a, inv, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    Tensor& ga = t.grad_slot(a.id);
    for (int r = 0; r < ga.rows(); ++r) {
      for (int c = 0; c < ga.cols(); ++c) ga.at(r, c) += g.at(0, c) * inv;
    }
  });
}

Var Tape::mean_all(Var a) {
  const Tensor& va = node(a.id).value;
  real acc = 0;
  for (int i = 0; i < va.size(); ++i) acc += va[i];
  const real inv = real(1) / va.size();
  const int oid = next_id();
  return push(Tensor::scalar(acc * inv), [a, inv, oid](Tape& t) {
    const real g = t.node(oid).grad[0];
    Tensor& ga = t.grad_slot(a.id);
    for (int i = 0; i < ga.size(); ++i) ga[i] += g * inv;
  });
}

Var Tape::sum_all(Var a) {
  const Tensor& va = node(a.id).value;
  real acc = 0;
  for (int i = 0; i < va.size(); ++i) acc += va[i];
  const int oid = next_id();
  return push(Tensor::scalar(acc), [a, oid](Tape& t) {
    const real g = t.node(oid).grad[0];
    Tensor& ga = t.grad_slot(a.id);
    for (int i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var Tape::batch_norm(Var x, Var gamma, Var beta, BatchNormState& state, BnMode mode) {
  const Tensor& vx = node(x.id).value;
  const Tensor& vg = node(gamma.id).value;
  const Tensor& vb = node(beta.id).value;
  const int batch = vx.rows();
  const int feats = vx.cols();
  if (vg.rows() != 1 || vg.cols() != feats || vb.rows() != 1 || vb.cols() != feats) {
    throw std::invalid_argument("batch_norm: gamma/beta must be 1x" + std::to_string(feats));
  }
  if (state.running_mean.cols() != feats) {
    throw std::invalid_argument("batch_norm: state feature count mismatch");
  }

  Tensor mean(1, feats);
  Tensor var(1, feats);
  if (mode == BnMode::eval) {
    mean = state.running_mean;
    var = state.running_var;
  } else {
    for (int c = 0; c < feats; ++c) {
      real m = 0;
      for (int r = 0; r < batch; ++r) m += vx.at(r, c);
      m /= batch;
      real v = 0;
      for (int r = 0; r < batch; ++r) {
        const real d = vx.at(r, c) - m;
        v += d * d;
      }
      v /= batch;  // biased (population) variance
      mean.at(0, c) = m;
      var.at(0, c) = v;
    }
    if (mode == BnMode::train) {
      const real m = state.momentum;
      for (int c = 0; c < feats; ++c) {
        state.running_mean.at(0, c) =
            (real(1) - m) * state.running_mean.at(0, c) + m * mean.at(0, c);
        state.running_var.at(0, c) =
            (real(1) - m) * state.running_var.at(0, c) + m * var.at(0, c);
      }
      state.batches_seen++;
    }
  }

  Tensor inv_std(1, feats);
  for (int c = 0; c < feats; ++c) inv_std.at(0, c) = real(1) / std::sqrt(var.at(0, c) + state.eps);

  Tensor xhat(batch, feats);
  Tensor out(batch, feats);
  for (int r = 0; r < batch; ++r) {
    for (int c = 0; c < feats; ++c) {
      const real xh = (vx.at(r, c) - mean.at(0, c)) * inv_std.at(0, c);
      xhat.at(r, c) = xh;
      out.at(r, c) = vg.at(0, c) * xh + vb.at(0, c);
    }
  }

  const bool batch_stats = (mode != BnMode::eval);
  const int oid = next_id();
  return push(std::move(out), [x, gamma, beta, xhat = std::move(xhat),
                               inv_std = std::move(inv_std), batch_stats, oid](Tape& t) {
    const Tensor& g = t.node(oid).grad;
    const Tensor& vg2 = t.node(gamma.id).value;
    const int B = g.rows();
    const int F = g.cols();
    Tensor& ggamma = t.grad_slot(gamma.id);
    Tensor& gbeta = t.grad_slot(beta.id);
    Tensor& gx = t.grad_slot(x.id);
    for (int c = 0; c < F; ++c) {
      real sum_g = 0;
      real sum_gx = 0;
      for (int r = 0; r < B; ++r) {
        sum_g += g.at(r, c);
        sum_gx += g.at(r, c) * xhat.at(r, c);
      }
      ggamma.at(0, c) += sum_gx;
      gbeta.at(0, c) += sum_g;
      const real k = vg2.at(0, c) * inv_std.at(0, c);
      if (batch_stats) {
        const real mg = sum_g / B;
        const real mgx = sum_gx / B;
        for (int r = 0; r < B; ++r) {
          gx.at(r, c) += k * (g.at(r, c) - mg - xhat.at(r, c) * mgx);
        }
      } else {
        for (int r = 0; r < B; ++r) gx.at(r, c) += k * g.at(r, c);
      }
    }
  });
}

void Tape::backward(Var out) {
  const Tensor& v = node(out.id).value;
  if (v.rows() != 1 || v.cols() != 1) {
    throw std::invalid_argument("backward: output must be scalar, got " + v.shape_str());
  }
  grad_slot(out.id)[0] = real(1);
  for (int id = out.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.grad.empty() && n.back) n.back(*this);
  }
}

real grad_check(GradCheckProblem& problem, real eps) {
  if (!(eps > 0)) throw std::invalid_argument("grad_check: eps must be > 0");

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    Var loss = problem.build(tape, vars);
    if (vars.size() != problem.params.size()) {
      throw std::logic_error("grad_check: builder bound a different number of params");
    }
    if (!std::isfinite(tape.value(loss).item())) {
      throw std::runtime_error("grad_check: non-finite loss");
    }
    tape.backward(loss);
    analytic.reserve(vars.size());
    for (Var v : vars) analytic.push_back(tape.grad(v));
  }

  auto loss_only = [&]() -> real {
    Tape tape;
    std::vector<Var> vars;
    Var loss = problem.build(tape, vars);
    const real v = tape.value(loss).item();
    if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite loss");
    return v;
  };

  real max_rel = 0;
  for (std::size_t p = 0; p < problem.params.size(); ++p) {
    Tensor& t = *problem.params[p];
    for (int i = 0; i < t.size(); ++i) {
      const real orig = t[i];
      t[i] = orig + eps;
      const real up = loss_only();
      t[i] = orig - eps;
      const real dn = loss_only();
      t[i] = orig;
      const real numeric = (up - dn) / (2 * eps);
      const real a = analytic[p][i];
      if (!std::isfinite(numeric) || !std::isfinite(a)) {
        throw std::runtime_error("grad_check: non-finite gradient");
      }
      const real rel =
          std::abs(a - numeric) / std::max(real(1e-8), std::abs(a) + std::abs(numeric));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace consnet
