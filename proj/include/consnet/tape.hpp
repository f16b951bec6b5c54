// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "consnet/tensor.hpp"

namespace consnet {

/// Handle to a tensor recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Per-row support sets for masked softmax / graph attention. Entries are
/// column indices, sorted ascending.
using Adjacency = std::vector<std::vector<int>>;
using AdjacencyRef = std::shared_ptr<const Adjacency>;

enum class BnMode {
  train,         // batch statistics, running averages updated
  train_static,  // batch statistics, state untouched (grad checks)
  eval           // frozen running statistics
};

struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  long long batches_seen = 0;
  real momentum = real(0.1);
  real eps = real(1e-5);

  explicit BatchNormState(int features = 0)
      : running_mean(features > 0 ? Tensor::zeros(1, features) : Tensor()),
        running_var(features > 0 ? Tensor::full(1, features, real(1)) : Tensor()) {}
};

/// Reverse-mode tape. Records one node per primitive in execution order;
/// backward() replays the records once, in reverse. One tape per training
/// step; not shared across threads.
class Tape {
public:
  explicit Tape(bool check_finite = false) : check_finite_(check_finite) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf holding an input, parameter or constant value.
  Var input(Tensor value);

  // -- primitives ------------------------------------------------------------
  Var matmul(Var a, Var b);
  /// a . b^T without materializing the transpose.
  Var matmul_nt(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, real c);
  /// matrix (R x C) plus row vector (1 x C), broadcast over rows.
  Var add_row_bias(Var m, Var bias);
  Var relu(Var a);
  Var leaky_relu(Var a, real slope);
  Var sigmoid(Var a);
  Var log(Var a);
  Var clamp(Var a, real lo, real hi);
  Var concat_cols(const std::vector<Var>& parts);
  Var gather_rows(Var a, std::vector<int> indices);
  Var row_l2_normalize(Var a);
  /// Softmax per row over the row's support set; entries outside the support
  /// are exactly zero. Throws if any row has empty support.
  Var masked_row_softmax(Var a, AdjacencyRef support);
  Var mean_rows(Var a);  // (R x C) -> (1 x C)
  Var mean_all(Var a);   // -> scalar
  Var sum_all(Var a);    // -> scalar
  Var batch_norm(Var x, Var gamma, Var beta, BatchNormState& state, BnMode mode);

  /// Seeds d(out)/d(out) = 1 and sweeps the tape once in reverse.
  /// `out` must be scalar.
  void backward(Var out);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient of the last backward() w.r.t. v; zeros if v received none.
  Tensor grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily on first accumulation
    std::function<void(Tape&)> back;
  };

  Var push(Tensor value, std::function<void(Tape&)> back = nullptr);
  int next_id() const;
  Tensor& grad_slot(int id);
  const Node& node(int id) const { return nodes_[id]; }
  void require_same_shape(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
  bool check_finite_ = false;
};

/// One gradient-check problem: parameter storage that will be perturbed in
/// place, and a builder that reconstructs the scalar loss from fresh leaves
/// bound to that storage (in order).
struct GradCheckProblem {
  std::vector<Tensor*> params;
  std::function<Var(Tape&, std::vector<Var>&)> build;
};

/// Central-difference gradient check. Returns the maximum over all parameter
/// coordinates of |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
real grad_check(GradCheckProblem& problem, real eps);

}  // namespace consnet
