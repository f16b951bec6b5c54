// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "consnet/gat.hpp"
#include "consnet/model.hpp"
#include "consnet/pipeline.hpp"
#include "consnet/rng.hpp"
#include "consnet/visual_net.hpp"

using namespace consnet;

namespace {

Tensor random_tensor(int rows, int cols, Rng& rng, real scale = 1) {
  Tensor t(rows, cols);
  for (int i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

AdjacencyRef path_graph(int n) {
  Adjacency adj(n);
  for (int i = 0; i < n; ++i) {
    adj[i].push_back(i);
    if (i > 0) adj[i].push_back(i - 1);
    if (i + 1 < n) adj[i].push_back(i + 1);
    std::sort(adj[i].begin(), adj[i].end());
  }
  return std::make_shared<const Adjacency>(std::move(adj));
}

GatLayerParams random_layer(int d_in, int d_head, int heads, bool average, Rng& rng) {
  GatLayerParams layer;
  layer.average_merge = average;
  for (int h = 0; h < heads; ++h) {
    layer.heads.push_back(GatHeadParams{random_tensor(d_in, d_head, rng, real(0.5)),
                                        random_tensor(d_head, 1, rng, real(0.5)),
                                        random_tensor(d_head, 1, rng, real(0.5))});
  }
  return layer;
}

// scalar per-edge re-derivation of Eq. 9/10 for one head
struct ScalarGatOracle {
  const Tensor& H;
  const Adjacency& adj;
  const GatHeadParams& head;
  real slope;

  std::vector<real> project(int node) const {
    const int d_head = head.W.cols();
    std::vector<real> out(d_head, 0);
    for (int c = 0; c < d_head; ++c) {
      for (int k = 0; k < H.cols(); ++k) out[c] += H.at(node, k) * head.W.at(k, c);
    }
    return out;
  }
  real edge_logit(int i, int j) const {
    const auto wi = project(i);
    const auto wj = project(j);
    real s = 0;
    for (int c = 0; c < head.W.cols(); ++c) {
      s += head.att_src.at(c, 0) * wi[c] + head.att_dst.at(c, 0) * wj[c];
    }
    return s > 0 ? s : slope * s;
  }
  real attention(int i, int j) const {
    real denom = 0;
    for (int k : adj[i]) denom += std::exp(edge_logit(i, k));
    return std::exp(edge_logit(i, j)) / denom;
  }
  std::vector<real> output(int i) const {
    const int d_head = head.W.cols();
    std::vector<real> acc(d_head, 0);
    for (int j : adj[i]) {
      const real mu = attention(i, j);
      const auto wj = project(j);
      for (int c = 0; c < d_head; ++c) acc[c] += mu * wj[c];
    }
    for (auto& x : acc) x = x > 0 ? x : 0;  // tau = ReLU
    return acc;
  }
};

}  // namespace

TEST_CASE("attention: self-loop only gives mu=1; identical features give uniform rows") {
  Rng rng(1);
  Adjacency adj{{0}, {1, 2}, {1, 2}};
  auto adj_ref = std::make_shared<const Adjacency>(adj);
  GatLayerParams layer = random_layer(4, 3, 1, false, rng);

  Tape tape;
  BindCtx ctx{tape};
  GatStackParams stack;
  stack.layers.push_back(layer);
  GatStackVars vars = bind(ctx, stack);

  Tensor h(3, 4);
  for (int c = 0; c < 4; ++c) {
    h.at(0, c) = rng.normal();
    h.at(1, c) = real(0.3) * c;
    h.at(2, c) = real(0.3) * c;  // nodes 1 and 2 share features
  }
  const auto mus = attention_coefficients(tape, tape.input(h), adj_ref, vars.layers[0],
                                          real(0.2));
  const Tensor& mu = tape.value(mus[0]);
  CHECK(mu.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mu.at(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mu.at(1, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mu.at(0, 1) == real(0));
  CHECK(mu.at(0, 2) == real(0));
}

TEST_CASE("attention and layer forward match the scalar oracle on a random graph") {
  Rng rng(9);
  const int n = 3;
  Adjacency adj{{0, 1}, {0, 1, 2}, {1, 2}};
  auto adj_ref = std::make_shared<const Adjacency>(adj);
  const Tensor h = random_tensor(n, 5, rng);
  GatLayerParams layer = random_layer(5, 4, 2, false, rng);

  Tape tape;
  BindCtx ctx{tape};
  GatStackParams stack;
  stack.layers.push_back(layer);
  GatStackVars vars = bind(ctx, stack);
  Var hv = tape.input(h);

  const auto mus = attention_coefficients(tape, hv, adj_ref, vars.layers[0], real(0.2));
  Var out = gat_layer_forward(tape, hv, adj_ref, vars.layers[0], real(0.2));

  for (int d = 0; d < 2; ++d) {
    ScalarGatOracle oracle{h, adj, layer.heads[d], real(0.2)};
    const Tensor& mu = tape.value(mus[d]);
    for (int i = 0; i < n; ++i) {
      real row_sum = 0;
      for (int j = 0; j < n; ++j) row_sum += mu.at(i, j);
      CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-9));
      for (int j : adj[i]) {
        CHECK(mu.at(i, j) == doctest::Approx(oracle.attention(i, j)).epsilon(1e-9));
      }
      const auto expect = oracle.output(i);
      for (int c = 0; c < 4; ++c) {
        CHECK(tape.value(out).at(i, d * 4 + c) == doctest::Approx(expect[c]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("gat layer symmetry: identical node features produce identical rows") {
  Rng rng(21);
  const int n = 4;
  Adjacency adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) adj[i].push_back(j);  // complete graph with self-loops
  }
  auto adj_ref = std::make_shared<const Adjacency>(adj);
  Tensor h(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) h.at(i, c) = real(0.4) * c - real(0.2);
  }
  GatStackParams stack;
  stack.layers.push_back(random_layer(3, 5, 2, false, rng));
  Tape tape;
  BindCtx ctx{tape};
  GatStackVars vars = bind(ctx, stack);
  const Tensor& out = tape.value(gat_layer_forward(tape, tape.input(h), adj_ref, vars.layers[0],
                                                   real(0.2)));
  for (int i = 1; i < n; ++i) {
    for (int c = 0; c < out.cols(); ++c) CHECK(out.at(i, c) == out.at(0, c));
  }
}

TEST_CASE("locality: layer-1 output of node i reacts only to neighbours") {
  Rng rng(33);
  const int n = 5;
  AdjacencyRef adj = path_graph(n);
  GatStackParams stack;
  stack.layers.push_back(random_layer(4, 3, 2, false, rng));
  const Tensor h0 = random_tensor(n, 4, rng);

  auto layer_out = [&](const Tensor& h) {
    Tape tape;
    BindCtx ctx{tape};
    GatStackVars vars = bind(ctx, stack);
    return tape.value(gat_layer_forward(tape, tape.input(h), adj, vars.layers[0], real(0.2)));
  };
  const Tensor base = layer_out(h0);

  Tensor perturbed = h0;
  perturbed.at(4, 2) += real(0.7);  // node 4 is at distance >= 2 from nodes 0..2
  const Tensor after = layer_out(perturbed);
  for (int c = 0; c < base.cols(); ++c) {
    CHECK(after.at(0, c) == base.at(0, c));  // node 0: not a neighbour of 4
    CHECK(after.at(1, c) == base.at(1, c));
    CHECK(after.at(2, c) == base.at(2, c));
  }
  bool changed = false;
  for (int c = 0; c < base.cols(); ++c) {
    if (after.at(3, c) != base.at(3, c) || after.at(4, c) != base.at(4, c)) changed = true;
  }
  CHECK(changed);
}

TEST_CASE("depth-3 receptive field on a path graph") {
  Rng rng(55);
  const int n = 7;
  AdjacencyRef adj = path_graph(n);
  GatStackParams stack;
  stack.layers.push_back(random_layer(4, 3, 2, false, rng));
  stack.layers.push_back(random_layer(6, 3, 2, false, rng));
  stack.layers.push_back(random_layer(6, 4, 2, true, rng));
  const Tensor h0 = random_tensor(n, 4, rng);

  auto stack_out = [&](const Tensor& h) {
    Tape tape;
    BindCtx ctx{tape};
    GatStackVars vars = bind(ctx, stack);
    Var x = tape.input(h);
    for (const auto& layer : vars.layers) {
      x = gat_layer_forward(tape, x, adj, layer, real(0.2));
    }
    return tape.value(x);
  };
  const Tensor base = stack_out(h0);
  Tensor perturbed = h0;
  perturbed.at(6, 1) += real(0.9);  // distance from node 0 to node 6 is 6 > 3
  const Tensor after = stack_out(perturbed);
  for (int c = 0; c < base.cols(); ++c) {
    CHECK(after.at(0, c) == base.at(0, c));
    CHECK(after.at(2, c) == base.at(2, c));  // distance 4 > 3
  }
  bool changed = false;
  for (int c = 0; c < base.cols(); ++c) {
    if (after.at(3, c) != base.at(3, c)) changed = true;  // distance 3: reachable
  }
  CHECK(changed);
}

TEST_CASE("semantic_embed shape, final-merge validation and gradcheck") {
  const LabelSpace space = build_label_space(
      {"a0", "a1"}, {"o0", "o1", "o2"},
      {{"a0", "o0"}, {"a0", "o1"}, {"a1", "o1"}, {"a1", "o2"}});
  Rng rng(8);
  NodeJointFeatures features;
  features.by_node.resize(space.num_nodes());
  for (int i = 1; i < space.num_nodes(); ++i) {
    features.by_node[i].resize(6);
    for (auto& x : features.by_node[i]) x = rng.normal();
  }
  const ConsistencyGraph graph = build_graph(space, features, 1, 1, 2);

  GatConfig cfg;
  cfg.depth = 3;
  cfg.heads = 2;
  cfg.head_dim = 3;
  cfg.out_dim = 5;
  GatStackParams stack = init_gat(cfg, 4, rng);
  const Tensor Z = random_tensor(space.num_nodes(), 4, rng);

  {
    Tape tape;
    BindCtx ctx{tape};
    GatStackVars vars = bind(ctx, stack);
    const Tensor& s = tape.value(semantic_embed(tape, graph, tape.input(Z), vars, real(0.2)));
    CHECK(s.rows() == space.num_nodes());
    CHECK(s.cols() == 5);
  }
  {
    // final layer must average
    GatStackParams bad = stack;
    bad.layers.back().average_merge = false;
    Tape tape;
    BindCtx ctx{tape};
    GatStackVars vars = bind(ctx, bad);
    CHECK_THROWS(semantic_embed(tape, graph, tape.input(Z), vars, real(0.2)));
  }
  {
    // gradient of a scalar readout of S w.r.t. all GAT params
    std::vector<Tensor*> params;
    for (auto& layer : stack.layers) {
      for (auto& head : layer.heads) {
        params.push_back(&head.W);
        params.push_back(&head.att_src);
        params.push_back(&head.att_dst);
      }
    }
    Rng readout_rng(4321);
    const Tensor w = random_tensor(space.num_nodes(), 5, readout_rng);
    GradCheckProblem problem;
    problem.params = params;
    problem.build = [&](Tape& t, std::vector<Var>& vars_out) {
      BindCtx ctx{t};
      GatStackVars vars = bind(ctx, stack);
      for (Tensor* p : params) vars_out.push_back(ctx.leaves.at(p));
      Var s = semantic_embed(t, graph, t.input(Z), vars, real(0.2));
      return t.mean_all(t.mul(s, t.input(w)));
    };
    CHECK(grad_check(problem, real(1e-5)) < 1e-4);
  }
}

TEST_CASE("spatial_config closed forms") {
  const auto s1 = spatial_config({0, 0, 1, 1}, {0, 0, 1, 1});
  const std::array<real, 8> expect1{0, 1, 0, 1, 0, 1, 0, 1};
  for (int i = 0; i < 8; ++i) CHECK(s1[i] == doctest::Approx(expect1[i]).epsilon(1e-12));

  const auto s2 = spatial_config({0, 0, 2, 2}, {2, 0, 4, 2});
  const std::array<real, 8> expect2{0, 0.25, 0, 0.25, 0.25, 0.5, 0, 0.25};
  for (int i = 0; i < 8; ++i) CHECK(s2[i] == doctest::Approx(expect2[i]).epsilon(1e-12));

  // translation invariance
  const auto s3 = spatial_config({10, 10, 12, 12}, {12, 10, 14, 12});
  for (int i = 0; i < 8; ++i) CHECK(s3[i] == doctest::Approx(s2[i]).epsilon(1e-12));

  // scale covariance: scaling boxes by c scales entries by 1/c
  const auto s4 = spatial_config({0, 0, 4, 4}, {4, 0, 8, 4});
  for (int i = 0; i < 8; ++i) CHECK(s4[i] == doctest::Approx(s2[i] / 2).epsilon(1e-12));

  CHECK_THROWS(spatial_config({0, 0, 0, 1}, {0, 0, 1, 1}));
}

TEST_CASE("interactiveness closed forms") {
  CHECK(interactiveness(0, 0, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(interactiveness(-10, -10, -10, -10) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(interactiveness(1, 0.5, -0.5, 1) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
  // monotone in each argument
  CHECK(interactiveness(1, 0.5, -0.5, 1) > interactiveness(0.5, 0.5, -0.5, 1));
}

TEST_CASE("mapper and fusion blocks: shapes, zero weights, conditioning") {
  VisualNetConfig cfg;
  cfg.d_a = 6;
  cfg.d_v = 9;
  cfg.mapper_hidden = 7;
  cfg.fusion_h = 5;
  cfg.fusion_o = 5;
  cfg.fusion_s = 3;
  cfg.trunk_hidden = 8;
  Rng rng(13);
  VisualNetParams params = init_visual_net(cfg, rng);

  const int B = 4;
  const Tensor a_h = random_tensor(B, 6, rng);
  const Tensor a_o = random_tensor(B, 6, rng);
  const Tensor s = random_tensor(B, 8, rng);

  auto forward = [&](VisualNetParams& p, const Tensor& ah, const Tensor& ao, const Tensor& sp) {
    Tape tape;
    BindCtx ctx{tape};
    VisualNetVars vars = bind(ctx, p);
    VisualForward out = visual_forward(tape, tape.input(ah), tape.input(ao), tape.input(sp),
                                       vars, p, BnMode::train_static);
    struct R {
      Tensor vh, vo, va, vt, phi;
    } r{tape.value(out.human.v), tape.value(out.object.v), tape.value(out.action.v),
        tape.value(out.interaction.v), tape.value(out.phi_pair)};
    return r;
  };

  const auto out = forward(params, a_h, a_o, s);
  CHECK(out.vh.rows() == B);
  CHECK(out.vh.cols() == 9);
  CHECK(out.va.cols() == 9);
  CHECK(out.phi.rows() == B);
  CHECK(out.phi.cols() == 1);

  // fusion concat width is checked structurally
  CHECK(params.action.trunk.W.rows() == 5 + 5 + 3);

  // zero weights give zero logits and embeddings
  VisualNetParams zeros = params;
  struct Zeroer : ParamVisitor {
    void visit(const std::string&, Tensor& t, ParamKind kind) override {
      if (kind != ParamKind::bn_running) {
        for (int i = 0; i < t.size(); ++i) t[i] = 0;
      }
    }
  } zeroer;
  visit_params("v", zeros, zeroer);
  const auto zout = forward(zeros, a_h, a_o, s);
  for (int i = 0; i < zout.vh.size(); ++i) CHECK(zout.vh[i] == real(0));
  for (int i = 0; i < zout.phi.size(); ++i) CHECK(zout.phi[i] == doctest::Approx(0.5));

  // conditioning: v_h depends only on a_h (Eq. 5)
  Tensor a_o2 = a_o;
  a_o2.at(0, 0) += real(2);
  Tensor s2 = s;
  s2.at(0, 3) += real(1);
  const auto out2 = forward(params, a_h, a_o2, s2);
  for (int i = 0; i < out.vh.size(); ++i) CHECK(out2.vh[i] == out.vh[i]);
  // ... while v_a and v_t react (Eq. 6)
  bool va_changed = false;
  for (int i = 0; i < out.va.size(); ++i) {
    if (out2.va[i] != out.va[i]) va_changed = true;
  }
  CHECK(va_changed);
  // v_o depends only on a_o
  Tensor a_h2 = a_h;
  a_h2.at(1, 1) -= real(3);
  const auto out3 = forward(params, a_h2, a_o, s);
  for (int i = 0; i < out.vo.size(); ++i) CHECK(out3.vo[i] == out.vo[i]);

  // swapping a_h and a_o changes fusion output for generic weights
  const auto swapped = forward(params, a_o, a_h, s);
  bool asym = false;
  for (int i = 0; i < out.va.size(); ++i) {
    if (swapped.va[i] != out.va[i]) asym = true;
  }
  CHECK(asym);

  // grad_check through the mapper block
  std::vector<Tensor*> mapper_params{&params.human.hidden.W,     &params.human.bn.gamma,
                                     &params.human.bn.beta,      &params.human.phi_head.W,
                                     &params.human.phi_head.b,   &params.human.embed_head.W,
                                     &params.human.embed_head.b};
  Rng readout_rng(99);
  const Tensor w_phi = random_tensor(B, 1, readout_rng);
  const Tensor w_v = random_tensor(B, 9, readout_rng);
  GradCheckProblem problem;
  problem.params = mapper_params;
  problem.build = [&](Tape& t, std::vector<Var>& vars_out) {
    BindCtx ctx{t};
    MapperVars mv{bind(ctx, params.human.hidden), bind(ctx, params.human.bn),
                  bind(ctx, params.human.phi_head), bind(ctx, params.human.embed_head)};
    for (Tensor* p : mapper_params) vars_out.push_back(ctx.leaves.at(p));
    BlockOut out_b = mapper_forward(t, t.input(a_h), mv, params.human, BnMode::train_static);
    Var readout = t.add(t.mean_all(t.mul(out_b.phi, t.input(w_phi))),
                        t.mean_all(t.mul(out_b.v, t.input(w_v))));
    return readout;
  };
  CHECK(grad_check(problem, real(1e-5)) < 1e-4);
}

TEST_CASE("generate_candidates: filtering, capping, cross product") {
  ImageDetections image;
  image.image_id = "img";
  Rng rng(3);
  auto rec = [&](real score, FeatureRecord::Kind kind) {
    return FeatureRecord{"img", {0, 0, 10, 10}, kind == FeatureRecord::Kind::human ? "human"
                                                                                   : "obj",
                         kind, score, {1, 2}};
  };
  for (real s : {0.9, 0.6, 0.4}) image.humans.push_back(rec(real(s), FeatureRecord::Kind::human));
  for (real s : {0.95, 0.5, 0.2, 0.05}) {
    image.objects.push_back(rec(real(s), FeatureRecord::Kind::object));
  }

  // theta_h=0.5 keeps 2 humans; theta_o=0.1 keeps 3 objects; caps keep all
  auto candidates = generate_candidates(image, real(0.5), real(0.1), 10, 20);
  CHECK(candidates.size() == 6);
  // cap objects at 2
  candidates = generate_candidates(image, real(0.5), real(0.1), 10, 2);
  CHECK(candidates.size() == 4);
  CHECK(candidates[0].c_h == real(0.9));
  CHECK(candidates[0].c_o == real(0.95));
  // no humans pass
  candidates = generate_candidates(image, real(0.95), real(0.1), 10, 20);
  CHECK(candidates.empty());
}

TEST_CASE("nis_filter keeps exactly the candidates at or above threshold") {
  const std::vector<real> phi{0.05, 0.5, 0.1, 0.95};
  CHECK(nis_filter(phi, real(0)) == std::vector<int>{0, 1, 2, 3});
  CHECK(nis_filter(phi, real(1)) == std::vector<int>{});  // sigma < 1 always
  CHECK(nis_filter(phi, real(0.1)) == std::vector<int>{1, 2, 3});
}

TEST_CASE("classification_score and detection_confidence closed forms") {
  const std::vector<real> v{1, 0, 0};
  const std::vector<real> orth{0, 1, 0};
  // all cosines 1 -> sigmoid(4 gamma)
  const real gamma = real(0.25);
  CHECK(classification_score(v, v, v, v, v, v, v, v, gamma) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  // all cosines 0 -> 0.5
  CHECK(classification_score(v, v, v, v, orth, orth, orth, orth, gamma) ==
        doctest::Approx(0.5).epsilon(1e-12));

  // random vectors vs independent scalar recomputation at gamma=8
  Rng rng(71);
  auto rv = [&] {
    std::vector<real> x(5);
    for (auto& e : x) e = rng.normal();
    return x;
  };
  const auto vh = rv(), vo = rv(), va = rv(), vt = rv();
  const auto sh = rv(), so = rv(), sa = rv(), st = rv();
  auto cosine = [](const std::vector<real>& a, const std::vector<real>& b) {
    real num = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += a[i] * b[i];
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    return num / (std::sqrt(na) * std::sqrt(nb));
  };
  const real total =
      8 * (cosine(vh, sh) + cosine(vo, so) + cosine(va, sa) + cosine(vt, st));
  const real expected = 1.0 / (1.0 + std::exp(-total));
  CHECK(classification_score(vh, vo, va, vt, sh, so, sa, st, real(8)) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS(classification_score(vh, vo, va, vt, sh, so, sa, {0, 0, 0, 0, 0}, real(8)));

  CHECK(detection_confidence(1, 1, 1, 1) == real(1));
  CHECK(detection_confidence(0, real(0.5), real(0.5), real(0.5)) == real(0));
  CHECK(detection_confidence(real(0.8), real(0.9), real(0.7), real(0.5)) ==
        doctest::Approx(0.252).epsilon(1e-12));
}

TEST_CASE("detect: per-class fan-out and empty inputs") {
  const LabelSpace space = build_label_space({"a"}, {"x", "y"}, {{"a", "x"}, {"a", "y"}});
  ModelConfig cfg;
  cfg.embedder = EmbedderType::gat;
  cfg.visual.d_a = 5;
  cfg.visual.d_v = 6;
  cfg.visual.mapper_hidden = 16;  // wide enough that an untrained block keeps live units
  cfg.visual.fusion_h = 8;
  cfg.visual.fusion_o = 8;
  cfg.visual.fusion_s = 6;
  cfg.visual.trunk_hidden = 12;
  cfg.gat.depth = 2;
  cfg.gat.heads = 2;
  cfg.gat.head_dim = 3;
  cfg.gat.out_dim = 6;
  cfg.d_e = 4;
  cfg.num_classes = space.num_classes();
  Model model = Model::init(cfg, 5);

  Rng rng(6);
  NodeJointFeatures features;
  features.by_node.resize(space.num_nodes());
  for (int i = 1; i < space.num_nodes(); ++i) {
    features.by_node[i].resize(5);
    for (auto& x : features.by_node[i]) x = rng.normal();
  }
  const ConsistencyGraph graph = build_graph(space, features, 0, 1, 1);
  const Tensor Z = random_tensor(space.num_nodes(), 4, rng);
  const Tensor S = compute_semantic_matrix(model, graph, Z);
  CHECK(S.rows() == space.num_nodes());
  CHECK(S.cols() == 6);

  PipelineConfig pipe;
  pipe.theta_pair = 0;  // keep everything

  ImageDetections empty_image;
  empty_image.image_id = "img0";
  CHECK(detect(empty_image, model, S, space, pipe).empty());

  ImageDetections image;
  image.image_id = "img1";
  image.humans.push_back(
      {"img1", {0, 0, 10, 10}, "human", FeatureRecord::Kind::human, real(0.9),
       std::vector<real>(5, real(0.5))});
  image.objects.push_back(
      {"img1", {5, 0, 15, 10}, "x", FeatureRecord::Kind::object, real(0.8),
       std::vector<real>(5, real(-0.2))});
  const auto dets = detect(image, model, S, space, pipe);
  CHECK(dets.size() == 2);  // one candidate x two classes
  for (const auto& det : dets) {
    CHECK(det.score >= 0);
    CHECK(det.score <= 1);
  }

  // NIS at threshold 1 discards everything
  pipe.theta_pair = 1;
  CHECK(detect(image, model, S, space, pipe).empty());
}
