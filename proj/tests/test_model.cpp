// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <cstring>
#include <set>

#include "gramformer/model/checkpoint.hpp"
#include "gramformer/model/model.hpp"
#include "gramformer/model/trainer.hpp"
#include "gramformer/numerics/errors.hpp"
#include "gramformer/numerics/ops.hpp"
#include "support.hpp"

using namespace gramformer;
using namespace gramformer::model;
using gf_test::check_op;
using gf_test::max_abs_diff;
using gf_test::random_tensor;

namespace {

ModelConfig tiny(Variant v = Variant::gramformer) {
  ModelConfig c;
  c.channels = 8;
  c.heads = 2;
  c.layers = 2;
  c.variant = v;
  return c;
}

Tensor image(std::size_t h, std::size_t w, std::uint64_t seed) { return random_tensor({1, h, w}, seed, 0.0, 1.0); }

std::set<std::string> names(const ParameterStore& p) {
  std::set<std::string> out;
  for (const auto& e : p.entries()) out.insert(e.name);
  return out;
}

// Plain-loop reference for one attention block.
Tensor naive_attention(const Tensor& v, const std::vector<Tensor>& wq, const std::vector<Tensor>& wk,
                       const std::vector<Tensor>& wv, const Tensor& wo, const std::vector<Tensor>* edges,
                       const std::vector<std::size_t>* idx, const Tensor* bank) {
  const std::size_t n = v.dim(0), c = v.dim(1), heads = wq.size(), d = c / heads;
  Tensor vh = v;
  if (idx != nullptr)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) vh.at(i, j) += bank->at((*idx)[i], j);
  Tensor concat({n, c});
  for (std::size_t s = 0; s < heads; ++s) {
    auto proj = [&](const Tensor& x, const Tensor& w, std::size_t i, std::size_t o) {
      double acc = 0.0;
      for (std::size_t j = 0; j < c; ++j) acc += x.at(i, j) * w.at(j, o);
      return acc;
    };
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> logit(n);
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t o = 0; o < d; ++o) dot += proj(vh, wq[s], i, o) * proj(vh, wk[s], j, o);
        logit[j] = dot / std::sqrt(static_cast<double>(c));
      }
      const double mx = *std::max_element(logit.begin(), logit.end());
      double z = 0.0;
      for (double& l : logit) z += (l = std::exp(l - mx));
      for (std::size_t j = 0; j < n; ++j) {
        double a = logit[j] / z;
        if (edges != nullptr) a *= (*edges)[s].at(i, j);
        for (std::size_t o = 0; o < d; ++o) concat.at(i, s * d + o) += a * proj(v, wv[s], j, o);
      }
    }
  }
  Tensor out({n, c});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(c);
    for (std::size_t o = 0; o < c; ++o) {
      double acc = v.at(i, o);
      for (std::size_t j = 0; j < c; ++j) acc += concat.at(i, j) * wo.at(j, o);
      row[o] = acc;
    }
    double mu = 0.0, var = 0.0;
    for (double x : row) mu += x / c;
    for (double x : row) var += (x - mu) * (x - mu) / c;
    for (std::size_t o = 0; o < c; ++o) out.at(i, o) = (row[o] - mu) / std::sqrt(var + 1e-5);
  }
  return out;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults validate") {
    ModelConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.density_stride() == 4);
  }

  TEST_CASE("bad values name the constraint") {
    auto bad = [](auto mutate, const char* needle) {
      ModelConfig c;
      mutate(c);
      try {
        c.validate();
        FAIL("accepted");
      } catch (const ContractError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
      }
    };
    bad([](ModelConfig& c) { c.channels = 66; }, "channels");
    bad([](ModelConfig& c) { c.heads = 3; }, "heads");
    bad([](ModelConfig& c) { c.q = 0.0; }, "q");
    bad([](ModelConfig& c) { c.lambda = -1; }, "lambda");
    bad([](ModelConfig& c) { c.patch = 7; }, "patch");
    bad([](ModelConfig& c) { c.m = 0; }, "m must");
  }

  TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::gramformer, Variant::vanilla, Variant::graphormer}) CHECK(parse_variant(to_string(v)) == v);
    CHECK_THROWS_AS(parse_variant("gramformr"), ContractError);
  }
}

TEST_SUITE("parameters") {
  TEST_CASE("variant parameter sets") {
    const auto full = names(init_parameters(tiny(), 1));
    const auto van = names(init_parameters(tiny(Variant::vanilla), 1));
    const auto gph = names(init_parameters(tiny(Variant::graphormer), 1));
    CHECK(full.count("centrality.bank") == 1);
    CHECK(full.count("ewr.1.conv2.bias") == 1);
    CHECK(van.count("centrality.bank") == 0);
    CHECK(van.count("ewr.0.conv1.weight") == 0);
    CHECK(gph.count("layer.1.edge_mlp.fc2.weight") == 1);
    CHECK(gph.count("ewr.0.conv1.weight") == 0);
    CHECK(std::includes(full.begin(), full.end(), van.begin(), van.end()));
    CHECK(init_parameters(tiny(), 1).get("centrality.bank").dims() == Shape{19, 8});
  }

  TEST_CASE("shared tensors start identical across variants") {
    const auto a = init_parameters(tiny(), 5);
    const auto b = init_parameters(tiny(Variant::vanilla), 5);
    for (const auto& e : b.entries()) CHECK(a.get(e.name).storage() == e.tensor.storage());
  }

  TEST_CASE("seeded and deterministic") {
    CHECK(init_parameters(tiny(), 3) == init_parameters(tiny(), 3));
    CHECK_FALSE(init_parameters(tiny(), 3) == init_parameters(tiny(), 4));
  }

  TEST_CASE("perturbation is bounded and seeded") {
    const auto base = init_parameters(tiny(), 3);
    auto p = base, q = base;
    perturb_parameters(p, 0.05, 9);
    perturb_parameters(q, 0.05, 9);
    CHECK(p == q);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double d = max_abs_diff(base.entries()[i].tensor.values(), p.entries()[i].tensor.values());
      CHECK(d > 0.0);
      CHECK(d <= 0.05);
    }
  }
}

TEST_SUITE("layers") {
  TEST_CASE("patch encoder matches a direct evaluation") {
    Tape tape;
    const Tensor img = random_tensor({1, 4, 6}, 1);
    const Tensor w = random_tensor({4, 3}, 2), b = random_tensor({3}, 3);
    const auto enc = patch_encode(tape.constant(img), 2, tape.constant(w), tape.constant(b));
    CHECK(enc.grid.height == 2);
    CHECK(enc.grid.width == 3);
    const Tensor v = enc.nodes.value();
    for (std::size_t gy = 0; gy < 2; ++gy)
      for (std::size_t gx = 0; gx < 3; ++gx)
        for (std::size_t o = 0; o < 3; ++o) {
          double acc = b[o];
          for (std::size_t py = 0; py < 2; ++py)
            for (std::size_t px = 0; px < 2; ++px) acc += img[(gy * 2 + py) * 6 + gx * 2 + px] * w.at(py * 2 + px, o);
          CHECK(std::fabs(v.at(gy * 3 + gx, o) - std::max(0.0, acc)) < 1e-14);
        }
    CHECK_THROWS_AS(patch_encode(tape.constant(Tensor({1, 5, 6})), 2, tape.constant(w), tape.constant(b)),
                    ContractError);
  }

  TEST_CASE("attention block agrees with a loop reference") {
    const std::size_t n = 6, c = 4;
    const Tensor v = random_tensor({n, c}, 10);
    std::vector<Tensor> wq, wk, wv;
    for (std::uint64_t s = 0; s < 2; ++s) {
      wq.push_back(random_tensor({c, 2}, 20 + s));
      wk.push_back(random_tensor({c, 2}, 30 + s));
      wv.push_back(random_tensor({c, 2}, 40 + s));
    }
    const Tensor wo = random_tensor({c, c}, 50);
    const Tensor bank = random_tensor({3, c}, 51);
    const std::vector<std::size_t> idx = {0, 2, 1, 1, 0, 2};
    std::vector<Tensor> edges = {random_tensor({n, n}, 52, 0, 1), random_tensor({n, n}, 53, 0, 1)};

    for (int mode = 0; mode < 2; ++mode) {
      Tape tape;
      AttentionParams p;
      for (std::size_t s = 0; s < 2; ++s) {
        p.query.push_back(tape.constant(wq[s]));
        p.key.push_back(tape.constant(wk[s]));
        p.value.push_back(tape.constant(wv[s]));
      }
      p.out = tape.constant(wo);
      p.norm_gain = tape.constant(Tensor({c}, 1.0));
      p.norm_bias = tape.constant(Tensor({c}));
      graphs::AttentionGraph graph;
      for (const auto& e : edges) graph.edges.push_back(tape.constant(e));
      AttentionContext ctx;
      if (mode == 1) {
        ctx.graph = &graph;
        ctx.centrality_index = idx;
        ctx.bank = tape.constant(bank);
      }
      const auto out = attention_layer(tape.constant(v), p, ctx);
      const Tensor ref = mode == 1 ? naive_attention(v, wq, wk, wv, wo, &edges, &idx, &bank)
                                   : naive_attention(v, wq, wk, wv, wo, nullptr, nullptr, nullptr);
      CHECK(max_abs_diff(out.nodes.value().values(), ref.values()) < 1e-12);
      REQUIRE(out.attention.size() == 2);
      for (const auto& a : out.attention)
        for (std::size_t i = 0; i < n; ++i) {
          double row = 0.0;
          for (std::size_t j = 0; j < n; ++j) row += a.value().at(i, j);
          if (mode == 0) CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
          else CHECK(row <= 1.0 + 1e-12);
        }
    }
  }

  TEST_CASE("an all-ones attention graph changes nothing") {
    Tape tape;
    const Tensor v = random_tensor({5, 4}, 55);
    AttentionParams p;
    for (std::uint64_t s = 0; s < 2; ++s) {
      p.query.push_back(tape.constant(random_tensor({4, 2}, 56 + s)));
      p.key.push_back(tape.constant(random_tensor({4, 2}, 58 + s)));
      p.value.push_back(tape.constant(random_tensor({4, 2}, 60 + s)));
    }
    p.out = tape.constant(random_tensor({4, 4}, 62));
    p.norm_gain = tape.constant(random_tensor({4}, 63, 0.5, 1.5));
    p.norm_bias = tape.constant(random_tensor({4}, 64));
    graphs::AttentionGraph ones;
    ones.edges = {tape.constant(Tensor({5, 5}, 1.0)), tape.constant(Tensor({5, 5}, 1.0))};
    AttentionContext with;
    with.graph = &ones;
    const auto a = attention_layer(tape.constant(v), p, with);
    const auto b = attention_layer(tape.constant(v), p, AttentionContext{});
    CHECK(max_abs_diff(a.nodes.value().values(), b.nodes.value().values()) < 1e-10);
  }

  TEST_CASE("edge bias fills neighbour pairs only") {
    Tape tape;
    const Tensor v = random_tensor({4, 2}, 60);
    EdgeMlpParams p{tape.constant(random_tensor({4, 2}, 61)), tape.constant(random_tensor({2}, 62)),
                    tape.constant(random_tensor({2, 1}, 63)), tape.constant(random_tensor({1}, 64))};
    const graphs::NeighborSets nb = {{1}, {2, 3}, {0}, {}};
    const Tensor e = edge_bias(tape.constant(v), nb, p).value();
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const bool linked = std::find(nb[i].begin(), nb[i].end(), j) != nb[i].end();
        if (!linked) {
          CHECK(e.at(i, j) == 0.0);
          continue;
        }
        double out = p.fc2_bias.value()[0];
        for (std::size_t h = 0; h < 2; ++h) {
          double z = p.fc1_bias.value()[h];
          for (std::size_t k = 0; k < 2; ++k)
            z += v.at(i, k) * p.fc1_weight.value().at(k, h) + v.at(j, k) * p.fc1_weight.value().at(2 + k, h);
          out += std::max(0.0, z) * p.fc2_weight.value().at(h, 0);
        }
        CHECK(std::fabs(e.at(i, j) - out) < 1e-14);
      }
  }

  TEST_CASE("layer gradients") {
    std::vector<Tensor> in = {random_tensor({6, 4}, 70), random_tensor({4, 8}, 71), random_tensor({8}, 72),
                              random_tensor({8, 4}, 73),  random_tensor({4}, 74),    random_tensor({4}, 75, 0.5, 1.5),
                              random_tensor({4}, 76)};
    const auto r = check_op(in, [](Tape&, const std::vector<Var>& v) {
      return feed_forward(v[0], {v[1], v[2], v[3], v[4], v[5], v[6]}, 1e-5);
    });
    CHECK(r.worst() < 1e-6);

    const graphs::NeighborSets nb = {{1, 2}, {0, 3}, {3, 1}, {0, 2}};
    std::vector<Tensor> ein = {random_tensor({4, 3}, 80), random_tensor({6, 3}, 81), random_tensor({3}, 82, 0.3, 0.6),
                               random_tensor({3, 1}, 83), random_tensor({1}, 84)};
    const auto re = check_op(ein, [&nb](Tape&, const std::vector<Var>& v) {
      return edge_bias(v[0], nb, {v[1], v[2], v[3], v[4]});
    });
    CHECK(re.worst() < 1e-6);
  }

  TEST_CASE("regression head doubles the grid and is non-negative") {
    Tape tape;
    const auto p = init_parameters(tiny(), 2);
    auto store = p;
    const auto b = bind_parameters(tape, store, tiny());
    const Var out = regression_head(tape.constant(random_tensor({6, 8}, 90)), {2, 3}, b.head);
    CHECK(out.dims() == Shape{1, 4, 6});
    for (double x : out.value().values()) CHECK(x >= 0.0);
  }
}

TEST_SUITE("model") {
  TEST_CASE("forward shapes and trace") {
    for (Variant v : {Variant::gramformer, Variant::vanilla, Variant::graphormer}) {
      auto model = GramformerModel::create(tiny(v), 7);
      Tape tape;
      const auto r = model.forward(tape, image(32, 48, 1));
      CHECK(r.density.dims() == Shape{1, 8, 12});
      CHECK(r.trace.attention.size() == 2);
      CHECK(r.trace.attention[0].size() == 2);
      CHECK(r.trace.attention[1][0].dims() == Shape{24, 24});
      CHECK(r.trace.neighbors.size() == 2);
      CHECK(r.trace.neighbors[0][0].size() == graphs::neighbor_count(24, 0.3));
      CHECK(r.regularization.has_value() == (v == Variant::gramformer));
      CHECK(r.trace.semantic_field.size() == (v == Variant::gramformer ? 2u : 0u));
    }
  }

  TEST_CASE("gramformer with every extra switched off is the vanilla model") {
    ModelConfig off = tiny();
    off.use_ewr = false;
    off.use_centrality = false;
    off.lambda = 0.0;
    ModelConfig van = tiny(Variant::vanilla);
    van.lambda = 0.0;
    auto a = GramformerModel::create(off, 11);
    auto b = GramformerModel::create(van, 11);
    CHECK(a.params() == b.params());
    const Tensor img = image(32, 32, 3);
    Tape t1, t2;
    CHECK(a.forward(t1, img).density.value().storage() == b.forward(t2, img).density.value().storage());
  }

  TEST_CASE("transformer is permutation-equivariant when no grid structure is used") {
    for (bool centrality : {false, true}) {
      ModelConfig cfg = tiny();
      cfg.use_ewr = false;
      cfg.use_centrality = centrality;
      auto store = init_parameters(cfg, 12);
      perturb_parameters(store, 0.05, 1);
      const Tensor v = random_tensor({12, 8}, 13);
      std::vector<std::size_t> perm(12);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::reverse(perm.begin(), perm.end());
      std::swap(perm[0], perm[5]);
      Tensor pv({12, 8});
      for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t c = 0; c < 8; ++c) pv.at(i, c) = v.at(perm[i], c);

      Tape t1, t2;
      const auto b1 = bind_parameters(t1, store, cfg);
      const auto b2 = bind_parameters(t2, store, cfg);
      const Tensor y = transformer_forward(t1.constant(v), {3, 4}, b1, cfg).nodes.value();
      const Tensor py = transformer_forward(t2.constant(pv), {3, 4}, b2, cfg).nodes.value();
      double worst = 0.0;
      for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t c = 0; c < 8; ++c) worst = std::max(worst, std::fabs(py.at(i, c) - y.at(perm[i], c)));
      CHECK(worst < 1e-12);
    }
  }

  TEST_CASE("image size must match the patch") {
    auto model = GramformerModel::create(tiny(), 1);
    Tape tape;
    CHECK_THROWS_AS(model.forward(tape, image(30, 32, 1)), ContractError);
    CHECK_THROWS_AS(model.forward(tape, image(8, 8, 1)), ContractError);
    CHECK_THROWS_AS(model.forward(tape, Tensor({32, 32})), ShapeError);
  }

  TEST_CASE("end-to-end gradients for every variant") {
    for (Variant v : {Variant::gramformer, Variant::vanilla, Variant::graphormer}) {
      auto model = GramformerModel::create(tiny(v), 21);
      perturb_parameters(model.params(), 0.05, 22);
      const Tensor dens = random_tensor({1, 8, 8}, 23, 0.0, 0.1);
      const TrainingExample ex{image(32, 32, 24), dens, 0.0};
      // A step below the default keeps the central differences off the ReLU kinks.
      const auto report = grad_check(make_gradcheck_target(model, ex), 1e-6);
      INFO(to_string(v), " worst ", report.params.front().name, " ", report.worst(), " abs ", report.params.front().max_abs_error, " num ", report.params.front().max_abs_numeric);
      CHECK(report.passed());
    }
  }
}

TEST_SUITE("loss") {
  TEST_CASE("value matches the formula") {
    Tape tape;
    const Tensor p({1, 2, 2}, {0.5, 0.0, 1.0, 0.25}), g({1, 2, 2}, {0.0, 0.5, 0.5, 0.0});
    const double v = MseCountLoss{}(tape.constant(p), g).value()[0];
    const double mse = (0.25 + 0.25 + 0.25 + 0.0625) / 4.0;
    CHECK(v == doctest::Approx(mse + std::fabs(1.75 - 1.0) / 2.0).epsilon(1e-15));
  }

  TEST_CASE("perfect prediction costs nothing") {
    Tape tape;
    const Tensor g = random_tensor({1, 3, 3}, 5, 0, 1);
    CHECK(MseCountLoss{}(tape.constant(g), g).value()[0] == 0.0);
  }

  TEST_CASE("gradient") {
    const Tensor g = random_tensor({1, 3, 4}, 6, 0, 1);
    std::vector<Tensor> in = {random_tensor({1, 3, 4}, 7, 0, 1)};
    const auto r = check_op(in, [&g](Tape&, const std::vector<Var>& v) { return MseCountLoss{}(v[0], g); });
    CHECK(r.worst() < 1e-6);
  }

  TEST_CASE("registry and total") {
    CHECK(make_density_loss("mse_count")->name() == "mse_count");
    CHECK_THROWS_AS(make_density_loss("l1"), ContractError);
    Tape tape;
    Var d = tape.constant(Tensor::scalar(2.0)), r = tape.constant(Tensor::scalar(3.0));
    CHECK(total_loss(d, r, 0.1).value()[0] == doctest::Approx(2.3));
    CHECK(total_loss(d, std::nullopt, 0.1).value()[0] == 2.0);
    CHECK(total_loss(d, r, 0.0).value()[0] == 2.0);
    CHECK_THROWS_AS(total_loss(d, r, -1.0), ContractError);
    CHECK_THROWS_AS(MseCountLoss{}(d, Tensor({2})), ShapeError);
  }
}

TEST_SUITE("trainer") {
  TEST_CASE("sum pooling preserves mass") {
    const Tensor m = random_tensor({12, 8}, 30, 0, 1);
    const Tensor p = sum_pool(m, 4);
    CHECK(p.dims() == Shape{1, 3, 2});
    double a = 0, b = 0;
    for (double x : m.values()) a += x;
    for (double x : p.values()) b += x;
    CHECK(std::fabs(a - b) < 1e-12);
    CHECK(p[0] == doctest::Approx([&] {
            double s = 0;
            for (std::size_t y = 0; y < 4; ++y)
              for (std::size_t x = 0; x < 4; ++x) s += m.at(y, x);
            return s;
          }()));
    CHECK_THROWS_AS(sum_pool(m, 5), ContractError);
  }

  TEST_CASE("flipping twice is the identity") {
    const TrainingExample ex{image(8, 12, 1), random_tensor({1, 2, 3}, 2), 3.0};
    const auto f = flip_horizontal(ex);
    CHECK(f.image[0] == ex.image[11]);
    const auto ff = flip_horizontal(f);
    CHECK(ff.image.storage() == ex.image.storage());
    CHECK(ff.density.storage() == ex.density.storage());
  }

  TEST_CASE("learning-rate schedule") {
    auto model = GramformerModel::create(tiny(Variant::vanilla), 1);
    TrainOptions o;
    o.adam.lr = 1e-3;
    o.warmup = 4;
    o.decay_steps = 8;
    Trainer t(model, o);
    CHECK(t.learning_rate() == doctest::Approx(0.25e-3));
    const TrainingExample ex{image(16, 16, 3), Tensor({1, 4, 4}), 0.0};
    std::vector<double> lr;
    for (int i = 0; i < 9; ++i) {
      t.step(ex);
      lr.push_back(t.learning_rate());
    }
    const double pi = std::acos(-1.0);
    CHECK(lr[2] == doctest::Approx(1e-3 * 0.5 * (1 + std::cos(pi * 3 / 8))));
    CHECK(lr[7] == doctest::Approx(0.0));
    CHECK(lr[8] == doctest::Approx(0.0));
  }

  TEST_CASE("sample order visits every example once per epoch") {
    SampleOrder order(7, 3);
    for (int epoch = 0; epoch < 3; ++epoch) {
      std::set<std::size_t> seen;
      for (int i = 0; i < 7; ++i) seen.insert(order.next());
      CHECK(seen.size() == 7);
    }
    CHECK_THROWS_AS(SampleOrder(0, 1), ContractError);
  }

  TEST_CASE("training is deterministic and fits one example") {
    const Tensor dens = random_tensor({1, 8, 8}, 40, 0.0, 0.2);
    double count = 0;
    for (double x : dens.values()) count += x;
    const TrainingExample ex{image(32, 32, 41), dens, count};
    auto run = [&](std::size_t steps) {
      auto model = GramformerModel::create(tiny(), 42);
      TrainOptions o;
      o.adam.lr = 3e-3;
      o.warmup = 10;
      o.flip = false;
      Trainer t(model, o);
      std::vector<double> losses;
      for (std::size_t i = 0; i < steps; ++i) losses.push_back(t.step(ex).data_loss);
      return std::make_pair(losses, predict_count(model, ex.image));
    };
    const auto a = run(150);
    const auto b = run(150);
    CHECK(a.first == b.first);
    CHECK(a.first.back() < 0.2 * a.first.front());
    CHECK(std::fabs(a.second - count) < 0.1 * count);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip is bitwise") {
    auto p = init_parameters(tiny(Variant::graphormer), 3);
    p.get("encoder.bias")[0] = -0.0;
    p.get("encoder.bias")[1] = 1e-310;
    const auto bytes = encode_checkpoint(p);
    const auto q = decode_checkpoint(bytes);
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(q.entries()[i].name == p.entries()[i].name);
      CHECK(std::memcmp(q.entries()[i].tensor.values().data(), p.entries()[i].tensor.values().data(),
                        p.entries()[i].tensor.size() * sizeof(double)) == 0);
    }
    auto target = init_parameters(tiny(Variant::graphormer), 99);
    load_parameters(bytes, target);
    CHECK(target == p);
    CHECK(encode_checkpoint(target) == bytes);
  }

  TEST_CASE("file round trip") {
    const auto dir = gf_test::temp_dir("ckpt");
    const auto p = init_parameters(tiny(), 4);
    save_checkpoint(dir / "m.ckpt", p);
    auto q = init_parameters(tiny(), 5);
    load_checkpoint(dir / "m.ckpt", q);
    CHECK(q == p);
    CHECK_THROWS_AS(load_checkpoint(dir / "absent.ckpt", q), CheckpointError);
  }

  TEST_CASE("every truncation is reported, never crashes") {
    const auto bytes = encode_checkpoint(init_parameters(tiny(Variant::vanilla), 1));
    for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
      std::span<const std::uint8_t> part(bytes.data(), cut);
      CHECK_THROWS_AS(decode_checkpoint(part), CheckpointError);
    }
  }

  TEST_CASE("truncation inside a payload names the tensor") {
    const auto p = init_parameters(tiny(), 1);
    const auto bytes = encode_checkpoint(p);
    std::span<const std::uint8_t> part(bytes.data(), bytes.size() - 4);
    const std::string last = p.entries().back().name;
    CHECK_THROWS_WITH_AS(decode_checkpoint(part), ("unexpected end of file at tensor " + last).c_str(),
                         CheckpointError);
  }

  TEST_CASE("shape mismatch names the tensor and leaves the model alone") {
    ModelConfig two = tiny();
    ModelConfig four = tiny();
    four.heads = 4;
    const auto bytes = encode_checkpoint(init_parameters(two, 1));
    auto target = init_parameters(four, 2);
    const auto before = target;
    try {
      load_parameters(bytes, target);
      FAIL("accepted");
    } catch (const CheckpointError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("shape mismatch for tensor ") == 0);
      CHECK(msg.find("[19x8]") == std::string::npos);
    }
    CHECK(target == before);
  }

  TEST_CASE("missing and unknown tensors") {
    const auto van = encode_checkpoint(init_parameters(tiny(Variant::vanilla), 1));
    auto full = init_parameters(tiny(), 1);
    CHECK_THROWS_WITH_AS(load_parameters(van, full), doctest::Contains("checkpoint is missing tensor"), CheckpointError);
    auto small = init_parameters(tiny(Variant::vanilla), 1);
    CHECK_THROWS_WITH_AS(load_parameters(encode_checkpoint(full), small), doctest::Contains("unknown tensor name"),
                         CheckpointError);
  }

  TEST_CASE("header errors") {
    auto bytes = encode_checkpoint(init_parameters(tiny(), 1));
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_checkpoint(bad), "bad magic", CheckpointError);
    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_WITH_AS(decode_checkpoint(bad), "unsupported checkpoint version 2 (expected 1)", CheckpointError);
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_checkpoint(bad), CheckpointError);
  }
}
