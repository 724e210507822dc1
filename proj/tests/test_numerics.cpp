// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "gramformer/numerics/adam.hpp"
#include "gramformer/numerics/errors.hpp"
#include "gramformer/numerics/kernels.hpp"
#include "support.hpp"

using namespace gramformer;
using gf_test::check_op;
using gf_test::max_abs_diff;
using gf_test::naive_conv;
using gf_test::naive_matmul;
using gf_test::random_tensor;

namespace {

Tensor eval(Var v) { return v.value(); }

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("extents must be positive and match the data") {
    CHECK_THROWS_AS(Tensor(Shape{2, 0}), ShapeError);
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
    Tensor t({2, 3}, 1.5);
    CHECK(t.size() == 6);
    CHECK(t.reshaped({3, 2}).dims() == Shape{3, 2});
    CHECK_THROWS_AS(t.reshaped({4, 2}), ShapeError);
  }

  TEST_CASE("gradient slot matches the value extent") {
    Tensor t({3, 2});
    CHECK_FALSE(t.has_grad());
    CHECK(t.ensure_grad().size() == 6);
    t.grad()[4] = 2.0;
    t.zero_grad();
    CHECK(t.grad()[4] == 0.0);
  }
}

TEST_SUITE("ops forward") {
  TEST_CASE("matmul examples and naive oracle") {
    Tape tape;
    Var i2 = tape.constant(Tensor({2, 2}, {1, 0, 0, 1}));
    Var m = tape.constant(Tensor({2, 2}, {1, 2, 3, 4}));
    CHECK(eval(ops::matmul(i2, m)).storage() == std::vector<double>{1, 2, 3, 4});
    Var row = tape.constant(Tensor({1, 2}, {1, 0}));
    Var col = tape.constant(Tensor({2, 1}, {5, 7}));
    CHECK(eval(ops::matmul(row, col)).storage() == std::vector<double>{5});

    const Tensor a = random_tensor({3, 4}, 1), b = random_tensor({4, 2}, 2);
    const Tensor got = eval(ops::matmul(tape.constant(a), tape.constant(b)));
    CHECK(max_abs_diff(got.values(), naive_matmul(a, b).values()) < 1e-12);
  }

  TEST_CASE("matmul shape error names both shapes") {
    Tape tape;
    try {
      ops::matmul(tape.constant(Tensor({2, 3})), tape.constant(Tensor({2, 3})));
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[2x3]") != std::string::npos);
    }
  }

  TEST_CASE("softmax rows") {
    Tape tape;
    const Tensor eq = eval(ops::softmax_rows(tape.constant(Tensor({1, 4}, 3.0))));
    for (double v : eq.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

    const Tensor dom = eval(ops::softmax_rows(tape.constant(Tensor({1, 4}, {0, -1e9, -1e9, -1e9}))));
    CHECK(dom[0] == doctest::Approx(1.0));
    CHECK(dom[1] < 1e-300);

    const Tensor r = eval(ops::softmax_rows(tape.constant(Tensor({1, 3}, {1, 2, 3}))));
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(r[i] - std::exp(i + 1.0) / z) < 1e-12);

    const Tensor x = random_tensor({5, 7}, 3, -4, 4);
    Tensor shifted = x;
    for (std::size_t j = 0; j < 7; ++j) shifted.at(2, j) += 13.5;
    const Tensor s1 = eval(ops::softmax_rows(tape.constant(x)));
    const Tensor s2 = eval(ops::softmax_rows(tape.constant(shifted)));
    CHECK(max_abs_diff(s1.values(), s2.values()) < 1e-12);
    for (std::size_t i = 0; i < 5; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        CHECK(s1.at(i, j) >= 0.0);
        sum += s1.at(i, j);
      }
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }

  TEST_CASE("layer norm") {
    Tape tape;
    Var g = tape.constant(Tensor({2}, 1.0));
    Var b = tape.constant(Tensor({2}, 0.0));
    const Tensor c = eval(ops::layer_norm(tape.constant(Tensor({1, 2}, 4.0)), g, b));
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 0.0);
    const Tensor pm = eval(ops::layer_norm(tape.constant(Tensor({1, 2}, {1, -1})), g, b, 1e-15));
    CHECK(pm[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pm[1] == doctest::Approx(-1.0).epsilon(1e-12));

    const Tensor x = random_tensor({2, 5}, 4, -3, 3);
    const Tensor y = eval(ops::layer_norm(tape.constant(x), tape.constant(Tensor({5}, 1.0)), tape.constant(Tensor({5}))));
    for (std::size_t i = 0; i < 2; ++i) {
      double mean = 0.0, var = 0.0;
      for (std::size_t j = 0; j < 5; ++j) mean += y.at(i, j) / 5.0;
      for (std::size_t j = 0; j < 5; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean) / 5.0;
      CHECK(std::fabs(mean) < 1e-9);
      CHECK(std::fabs(var - 1.0) < 1e-4);
    }
  }

  TEST_CASE("conv2d 3x3") {
    Tape tape;
    const Tensor x = random_tensor({1, 4, 5}, 5);
    Tensor ident({1, 1, 3, 3});
    ident[4] = 1.0;
    const Tensor same = eval(ops::conv2d_3x3(tape.constant(x), tape.constant(ident), tape.constant(Tensor({1}))));
    CHECK(same.storage() == x.storage());

    const Tensor ones = eval(ops::conv2d_3x3(tape.constant(Tensor({1, 3, 3}, 1.0)), tape.constant(Tensor({1, 1, 3, 3}, 1.0)),
                                             tape.constant(Tensor({1}))));
    CHECK(ones.at(0, 1, 1) == 9.0);
    CHECK(ones.at(0, 0, 0) == 4.0);
    CHECK(ones.at(0, 2, 2) == 4.0);
    CHECK(ones.at(0, 0, 1) == 6.0);

    const Tensor xi = random_tensor({2, 4, 4}, 6), k = random_tensor({3, 2, 3, 3}, 7), bias = random_tensor({3}, 8);
    const Tensor got = eval(ops::conv2d_3x3(tape.constant(xi), tape.constant(k), tape.constant(bias)));
    CHECK(max_abs_diff(got.values(), naive_conv(xi, k, bias).values()) < 1e-12);

    CHECK_THROWS_AS(ops::conv2d_3x3(tape.constant(xi), tape.constant(Tensor({3, 1, 3, 3})), tape.constant(bias)),
                    ShapeError);
  }

  TEST_CASE("upsample replicates") {
    Tape tape;
    const Tensor five = eval(ops::upsample2x(tape.constant(Tensor({1, 1, 1}, 5.0))));
    CHECK(five.dims() == Shape{1, 2, 2});
    for (double v : five.values()) CHECK(v == 5.0);

    Tensor x = random_tensor({2, 3, 2}, 9);
    Var xv = tape.parameter(x);
    Var up = ops::upsample2x(xv);
    double sx = 0.0, su = 0.0;
    for (double v : x.values()) sx += v;
    for (double v : up.value().values()) su += v;
    CHECK(std::fabs(su - 4.0 * sx) < 1e-12);
    tape.backward(ops::sum(up));
    for (double g : x.grad()) CHECK(g == 4.0);
  }

  TEST_CASE("elementwise") {
    Tape tape;
    CHECK(eval(ops::sigmoid(tape.constant(Tensor({1}, 0.0))))[0] == 0.5);
    CHECK(std::fabs(eval(ops::sigmoid(tape.constant(Tensor({1}, 40.0))))[0] - 1.0) < 1e-12);
    CHECK(eval(ops::sigmoid(tape.constant(Tensor({1}, -800.0))))[0] >= 0.0);
    const Tensor r = eval(ops::relu(tape.constant(Tensor({2}, {-3, 3}))));
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 3.0);
    CHECK_THROWS_AS(ops::add(tape.constant(Tensor({2})), tape.constant(Tensor({3}))), ShapeError);
    CHECK_THROWS_AS(ops::mul(tape.constant(Tensor({2, 1})), tape.constant(Tensor({1, 2}))), ShapeError);
  }

  TEST_CASE("relu subgradient at zero is zero") {
    Tensor x({3}, {-1.0, 0.0, 2.0});
    Tape tape;
    tape.backward(ops::sum(ops::relu(tape.parameter(x))));
    CHECK(x.grad()[0] == 0.0);
    CHECK(x.grad()[1] == 0.0);
    CHECK(x.grad()[2] == 1.0);
  }

  TEST_CASE("forward ops are pure") {
    const Tensor x = random_tensor({4, 4}, 10);
    Tape t1, t2;
    const Tensor a = eval(ops::softmax_rows(ops::matmul(t1.constant(x), t1.constant(x))));
    const Tensor b = eval(ops::softmax_rows(ops::matmul(t2.constant(x), t2.constant(x))));
    CHECK(a.storage() == b.storage());
  }
}

TEST_SUITE("ops backward") {
  // Every op against central differences on shapes of at most 64 entries.
  TEST_CASE("matmul, transpose, add, sub, mul, scale") {
    std::vector<Tensor> in = {random_tensor({3, 4}, 11), random_tensor({4, 2}, 12)};
    CHECK(check_op(in, [](Tape&, const std::vector<Var>& v) { return ops::matmul(v[0], v[1]); }).worst() < 1e-6);
    std::vector<Tensor> two = {random_tensor({3, 4}, 13), random_tensor({3, 4}, 14)};
    CHECK(check_op(two, [](Tape&, const std::vector<Var>& v) {
            return ops::add(ops::mul(v[0], v[1]), ops::scale(ops::sub(v[0], ops::transpose(ops::transpose(v[1]))), 1.7));
          }).worst() < 1e-6);
  }

  TEST_CASE("bias adds") {
    std::vector<Tensor> in = {random_tensor({3, 4}, 15), random_tensor({4}, 16), random_tensor({3}, 17)};
    CHECK(check_op(in, [](Tape&, const std::vector<Var>& v) {
            return ops::add_col_bias(ops::add_row_bias(v[0], v[1]), v[2]);
          }).worst() < 1e-6);
  }

  TEST_CASE("relu, abs and sigmoid away from kinks") {
    std::vector<Tensor> in = {gf_test::away_from_zero({4, 5}, 18)};
    CHECK(check_op(in, [](Tape&, const std::vector<Var>& v) { return ops::relu(v[0]); }).worst() < 1e-6);
    CHECK(check_op(in, [](Tape&, const std::vector<Var>& v) { return ops::abs(v[0]); }).worst() < 1e-6);
    std::vector<Tensor> wide = {random_tensor({4, 5}, 19, -6, 6)};
    CHECK(check_op(wide, [](Tape&, const std::vector<Var>& v) { return ops::sigmoid(v[0]); }).worst() < 1e-6);
  }

  TEST_CASE("softmax + matmul composite on 4x4") {
    std::vector<Tensor> in = {random_tensor({4, 4}, 20), random_tensor({4, 4}, 21)};
    const auto r = check_op(in, [](Tape&, const std::vector<Var>& v) {
      return ops::matmul(ops::softmax_rows(ops::matmul(v[0], v[1])), v[1]);
    });
    CHECK(r.worst() < 1e-6);
  }

  TEST_CASE("layer norm") {
    std::vector<Tensor> in = {random_tensor({3, 5}, 22, -2, 2), random_tensor({5}, 23, 0.5, 1.5), random_tensor({5}, 24)};
    CHECK(check_op(in, [](Tape&, const std::vector<Var>& v) { return ops::layer_norm(v[0], v[1], v[2]); }).worst() < 1e-6);
  }

  TEST_CASE("convolutions and resampling") {
    std::vector<Tensor> in = {random_tensor({2, 3, 3}, 25), random_tensor({2, 2, 3, 3}, 26), random_tensor({2}, 27)};
    CHECK(check_op(in, [](Tape&, const std::vector<Var>& v) { return ops::conv2d_3x3(v[0], v[1], v[2]); }).worst() < 1e-6);
    std::vector<Tensor> one = {random_tensor({3, 2, 4}, 28), random_tensor({2, 3}, 29), random_tensor({2}, 30)};
    CHECK(check_op(one, [](Tape&, const std::vector<Var>& v) {
            return ops::upsample2x(ops::conv2d_1x1(v[0], v[1], v[2]));
          }).worst() < 1e-6);
  }

  TEST_CASE("reshape, concat, gather, grid layout, reductions") {
    std::vector<Tensor> in = {random_tensor({6, 2}, 31), random_tensor({6, 3}, 32)};
    const std::vector<std::size_t> rows = {5, 0, 0, 3};
    CHECK(check_op(in, [&rows](Tape&, const std::vector<Var>& v) {
            const std::vector<Var> parts = {v[0], v[1]};
            Var cat = ops::concat_cols(parts);                       // 6×5
            Var grid = ops::nodes_to_grid(cat, 2, 3);                // 5×2×3
            Var back = ops::grid_to_nodes(ops::reshape(grid, {5, 2, 3}));
            return ops::gather_rows(back, rows);
          }).worst() < 1e-6);
    CHECK(check_op(in, [](Tape&, const std::vector<Var>& v) {
            return ops::add(ops::sum(v[0]), ops::mean(v[1]));
          }).worst() < 1e-6);
  }
}

TEST_SUITE("tape") {
  TEST_CASE("loss = sum(W x) with x fixed gives dW = broadcast of x") {
    Tensor w = random_tensor({2, 3}, 40);
    const Tensor x = random_tensor({3, 1}, 41);
    Tape tape;
    tape.backward(ops::sum(ops::matmul(tape.parameter(w), tape.constant(x))));
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(w.grad()[i * 3 + j] == x[j]);
  }

  TEST_CASE("unreachable parameter receives a zero gradient") {
    Tensor used({2}, 1.0), unused({2}, 1.0);
    Tape tape;
    Var a = tape.parameter(used);
    tape.parameter(unused);
    tape.backward(ops::sum(a));
    REQUIRE(unused.has_grad());
    CHECK(unused.grad()[0] == 0.0);
  }

  TEST_CASE("non-scalar loss is a contract error") {
    Tape tape;
    Var v = tape.constant(Tensor({2}));
    CHECK_THROWS_AS(tape.backward(v), ContractError);
  }

  TEST_CASE("repeated backward accumulates") {
    Tensor w({2}, {1.0, 2.0});
    Tape tape;
    Var loss = ops::sum(ops::mul(tape.parameter(w), tape.constant(Tensor({2}, 3.0))));
    tape.backward(loss);
    tape.backward(loss);
    CHECK(w.grad()[0] == 6.0);
    CHECK(w.grad()[1] == 6.0);
  }

  TEST_CASE("fan-out sums branch gradients") {
    Tensor x = random_tensor({3}, 42);
    Tape tape;
    Var v = tape.parameter(x);
    tape.backward(ops::add(ops::sum(ops::scale(v, 2.0)), ops::sum(ops::mul(v, v))));
    for (std::size_t i = 0; i < 3; ++i) CHECK(x.grad()[i] == doctest::Approx(2.0 + 2.0 * x[i]).epsilon(1e-14));
  }

  TEST_CASE("backward visits nodes in exact reverse order") {
    // Each recorded op logs when its backward runs.
    std::vector<std::size_t> visits;
    Tape tape;
    Tensor p({1}, 1.0);
    Var x = tape.parameter(p);
    std::vector<Var> chain = {x};
    for (std::size_t i = 0; i < 5; ++i) {
      Var in = chain.back();
      const std::size_t id = tape.size();
      chain.push_back(tape.record("probe", in.value(), {in}, [&visits, in, id](Tape& t, std::span<const double> g) {
        visits.push_back(id);
        for (std::size_t j = 0; j < g.size(); ++j) t.grad(in)[j] += g[j];
      }));
    }
    tape.backward(chain.back());
    REQUIRE(visits.size() == 5);
    for (std::size_t i = 1; i < visits.size(); ++i) CHECK(visits[i] < visits[i - 1]);
  }
}

TEST_SUITE("kernels") {
  TEST_CASE("parallel matmul variants agree with serial and with naive loops") {
    for (const auto d : {kernels::MatmulDims{3, 4, 2}, kernels::MatmulDims{64, 64, 32}, kernels::MatmulDims{200, 64, 130}}) {
      const Tensor a = random_tensor({d.m, d.k}, 50), b = random_tensor({d.k, d.p}, 51);
      const Tensor oracle = naive_matmul(a, b);
      std::vector<double> s(d.m * d.p), p(d.m * d.p);
      kernels::serial::matmul(a.values(), b.values(), s, d);
      kernels::parallel::matmul(a.values(), b.values(), p, d);
      CHECK(max_abs_diff(s, oracle.values()) < 1e-12);
      CHECK(max_abs_diff(p, oracle.values()) < 1e-12);

      // a·bᵀ with b stored p×k
      const Tensor bt = random_tensor({d.p, d.k}, 52);
      Tensor btt({d.k, d.p});
      for (std::size_t i = 0; i < d.p; ++i)
        for (std::size_t j = 0; j < d.k; ++j) btt.at(j, i) = bt.at(i, j);
      const Tensor nt_oracle = naive_matmul(a, btt);
      std::vector<double> snt(d.m * d.p), pnt(d.m * d.p);
      kernels::serial::matmul_nt(a.values(), bt.values(), snt, {d.m, d.p, d.k});
      kernels::parallel::matmul_nt(a.values(), bt.values(), pnt, {d.m, d.p, d.k});
      CHECK(max_abs_diff(snt, nt_oracle.values()) < 1e-12);
      CHECK(max_abs_diff(pnt, nt_oracle.values()) < 1e-12);

      // aᵀ·c with c stored m×p
      const Tensor c = random_tensor({d.m, d.p}, 53);
      Tensor at({d.k, d.m});
      for (std::size_t i = 0; i < d.m; ++i)
        for (std::size_t j = 0; j < d.k; ++j) at.at(j, i) = a.at(i, j);
      const Tensor tn_oracle = naive_matmul(at, c);
      std::vector<double> stn(d.k * d.p), ptn(d.k * d.p);
      kernels::serial::matmul_tn(a.values(), c.values(), stn, d);
      kernels::parallel::matmul_tn(a.values(), c.values(), ptn, d);
      CHECK(max_abs_diff(stn, tn_oracle.values()) < 1e-12);
      CHECK(max_abs_diff(ptn, tn_oracle.values()) < 1e-12);
    }
  }

  TEST_CASE("parallel conv kernels agree with serial") {
    for (const auto d : {kernels::ConvDims{2, 3, 4, 5}, kernels::ConvDims{64, 32, 16, 16}}) {
      const Tensor x = random_tensor({d.in_channels, d.height, d.width}, 60);
      const Tensor k = random_tensor({d.out_channels, d.in_channels, 3, 3}, 61);
      const Tensor g = random_tensor({d.out_channels, d.height, d.width}, 62);
      const Tensor oracle = naive_conv(x, k, Tensor({d.out_channels}));
      std::vector<double> s(oracle.size()), p(oracle.size());
      kernels::serial::conv3x3(x.values(), k.values(), s, d);
      kernels::parallel::conv3x3(x.values(), k.values(), p, d);
      CHECK(max_abs_diff(s, oracle.values()) < 1e-12);
      CHECK(max_abs_diff(p, oracle.values()) < 1e-12);

      std::vector<double> sgx(x.size()), pgx(x.size()), sgk(k.size()), pgk(k.size());
      kernels::serial::conv3x3_grad_input(g.values(), k.values(), sgx, d);
      kernels::parallel::conv3x3_grad_input(g.values(), k.values(), pgx, d);
      kernels::serial::conv3x3_grad_kernel(g.values(), x.values(), sgk, d);
      kernels::parallel::conv3x3_grad_kernel(g.values(), x.values(), pgk, d);
      CHECK(max_abs_diff(sgx, pgx) < 1e-12);
      CHECK(max_abs_diff(sgk, pgk) < 1e-12);

      // Adjoint identity: <conv(x), g> = <x, conv_grad_input(g)> = <k, conv_grad_kernel(g, x)>.
      double lhs = 0.0, rhs_x = 0.0, rhs_k = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) lhs += s[i] * g[i];
      for (std::size_t i = 0; i < x.size(); ++i) rhs_x += x[i] * sgx[i];
      for (std::size_t i = 0; i < k.size(); ++i) rhs_k += k[i] * sgk[i];
      CHECK(std::fabs(lhs - rhs_x) < 1e-9);
      CHECK(std::fabs(lhs - rhs_k) < 1e-9);
    }
  }

  TEST_CASE("kernels accumulate into the output") {
    const Tensor a = random_tensor({2, 2}, 63), b = random_tensor({2, 2}, 64);
    std::vector<double> c(4, 1.0);
    kernels::parallel::matmul(a.values(), b.values(), c, {2, 2, 2});
    const Tensor o = naive_matmul(a, b);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::fabs(c[i] - (o[i] + 1.0)) < 1e-12);
  }
}

TEST_SUITE("adam") {
  TEST_CASE("zero gradient leaves parameters unchanged") {
    Tensor p = random_tensor({3}, 70);
    const Tensor before = p;
    p.ensure_grad();
    AdamState st;
    Tensor* ptrs[] = {&p};
    adam_step(ptrs, st, {});
    CHECK(p.storage() == before.storage());
  }

  TEST_CASE("first step on a scalar moves by about lr") {
    Tensor p({1}, 2.0);
    p.ensure_grad()[0] = 1.0;
    AdamState st;
    Tensor* ptrs[] = {&p};
    AdamConfig cfg;
    cfg.lr = 0.1;
    adam_step(ptrs, st, cfg);
    // m̂ = g, v̂ = g²: step = lr · g / (|g| + eps)
    CHECK(p[0] == doctest::Approx(2.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-14));
  }

  TEST_CASE("matches an independent update oracle over several steps") {
    Tensor p = random_tensor({4}, 71);
    std::vector<double> ref(p.storage()), m(4, 0.0), v(4, 0.0);
    AdamState st;
    AdamConfig cfg;
    Tensor* ptrs[] = {&p};
    for (int t = 1; t <= 5; ++t) {
      const Tensor g = random_tensor({4}, 100 + static_cast<std::uint64_t>(t));
      auto slot = p.ensure_grad();
      std::copy(g.values().begin(), g.values().end(), slot.begin());
      adam_step(ptrs, st, cfg);
      for (std::size_t i = 0; i < 4; ++i) {
        m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g[i] * g[i];
        const double mh = m[i] / (1 - std::pow(cfg.beta1, t));
        const double vh = v[i] / (1 - std::pow(cfg.beta2, t));
        ref[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
      }
    }
    CHECK(max_abs_diff(p.values(), ref) < 1e-14);
  }

  TEST_CASE("two identical runs give bitwise identical state") {
    auto run = [] {
      Tensor p = random_tensor({5}, 72);
      AdamState st;
      Tensor* ptrs[] = {&p};
      for (int t = 0; t < 3; ++t) {
        const Tensor g = random_tensor({5}, 200 + static_cast<std::uint64_t>(t));
        auto slot = p.ensure_grad();
        std::copy(g.values().begin(), g.values().end(), slot.begin());
        adam_step(ptrs, st, {});
      }
      return std::pair{p.storage(), st};
    };
    CHECK(run() == run());
  }
}

TEST_SUITE("grad_check") {
  TEST_CASE("quadratic at 3") {
    Tensor theta({1}, 3.0);
    GradCheckTarget t;
    t.evaluate = [&theta] { return 0.5 * theta[0] * theta[0]; };
    t.compute_gradients = [&theta] { theta.ensure_grad()[0] = theta[0]; };
    t.params = {{"theta", &theta}};
    const auto r = grad_check(t);
    CHECK(r.params.size() == 1);
    CHECK(theta.grad()[0] == 3.0);
    CHECK(r.params[0].max_abs_numeric == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(r.passed());
  }

  TEST_CASE("off-by-two backward is flagged with error near 1") {
    std::vector<Tensor> in = {random_tensor({4, 4}, 80), random_tensor({4, 4}, 81)};
    const auto r = check_op(
        in, [](Tape&, const std::vector<Var>& v) { return ops::softmax_rows(ops::matmul(v[0], v[1])); },
        [](Tape& t) { t.inject_backward_fault("matmul", 2.0); });
    CHECK_FALSE(r.passed());
    CHECK(r.worst() == doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("report is sorted worst first") {
    std::vector<Tensor> in = {random_tensor({3, 3}, 82), random_tensor({3, 3}, 83)};
    const auto r = check_op(
        in, [](Tape&, const std::vector<Var>& v) { return ops::add(ops::sigmoid(v[0]), v[1]); },
        [](Tape& t) { t.inject_backward_fault("sigmoid", 1.5); });
    REQUIRE(r.params.size() == 2);
    CHECK(r.params[0].name == "input0");
    CHECK(r.params[0].rel_error >= r.params[1].rel_error);
  }

  TEST_CASE("non-deterministic closure is a contract error") {
    Tensor theta({1}, 1.0);
    int calls = 0;
    GradCheckTarget t;
    t.evaluate = [&calls] { return static_cast<double>(++calls); };
    t.compute_gradients = [&theta] { theta.ensure_grad(); };
    t.params = {{"theta", &theta}};
    CHECK_THROWS_AS(grad_check(t), ContractError);
  }
}
