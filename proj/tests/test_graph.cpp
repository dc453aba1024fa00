#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "egoact/graph.hpp"
#include "egoact/nn.hpp"

using namespace egoact;

namespace {

// central finite differences of a scalar function of a flat input vector
std::vector<double> fd_grad(const std::function<double(const std::vector<double>&)>& f,
                            std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + h;
    double up = f(x);
    x[i] = orig - h;
    double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) /
                                std::max({std::abs(a[i]), std::abs(b[i]), 1e-6}));
  return worst;
}

std::vector<double> random_vec(Rng& rng, size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("softmax basics") {
  Graph g;
  SECTION("symmetric two-logit input") {
    NodeId y = g.softmax_rows(g.input(Tensor({1, 2}, {0.0, 0.0})));
    CHECK(g.value(y).data[0] == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(g.value(y).data[1] == Catch::Approx(0.5).epsilon(1e-15));
  }
  SECTION("hand-computed ln2 case") {
    NodeId y = g.softmax_rows(g.input(Tensor({1, 2}, {std::log(2.0), 0.0})));
    CHECK(g.value(y).data[0] == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(g.value(y).data[1] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SECTION("large logits stay stable") {
    NodeId y = g.softmax_rows(g.input(Tensor({1, 2}, {1000.0, 1000.0})));
    CHECK(g.value(y).data[0] == Catch::Approx(0.5));
    CHECK(g.value(y).data[1] == Catch::Approx(0.5));
  }
  SECTION("empty axis rejected") {
    CHECK_THROWS_AS(g.softmax_rows(g.input(Tensor::zeros({2, 0}))), std::invalid_argument);
  }
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(11);
  Graph g;
  Tensor x = Tensor::zeros({8, 13});
  for (double& v : x.data) v = rng.uniform(-30.0, 30.0);
  NodeId y = g.softmax_rows(g.input(x));
  for (int r = 0; r < 8; ++r) {
    double s = 0.0;
    for (int c = 0; c < 13; ++c) s += g.value(y).at(r, c);
    CHECK(std::abs(s - 1.0) < 1e-12);
    for (int c = 0; c < 13; ++c) CHECK(g.value(y).at(r, c) > 0.0);
  }
}

TEST_CASE("layer norm examples") {
  Graph g;
  NodeId gamma1 = g.input(Tensor({2}, {1.0, 1.0}));
  NodeId beta0 = g.input(Tensor({2}, {0.0, 0.0}));
  SECTION("constant input maps to zeros") {
    NodeId y = g.layer_norm_rows(g.input(Tensor({1, 2}, {3.0, 3.0})), gamma1, beta0, 1e-5);
    CHECK(g.value(y).data[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(g.value(y).data[1] == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("unit-variance pair") {
    NodeId y = g.layer_norm_rows(g.input(Tensor({1, 2}, {1.0, 3.0})), gamma1, beta0, 1e-12);
    CHECK(g.value(y).data[0] == Catch::Approx(-1.0).epsilon(1e-6));
    CHECK(g.value(y).data[1] == Catch::Approx(1.0).epsilon(1e-6));
  }
  SECTION("zero gamma passes beta through") {
    NodeId y = g.layer_norm_rows(g.input(Tensor({1, 2}, {-7.0, 42.0})),
                                 g.input(Tensor({2}, {0.0, 0.0})),
                                 g.input(Tensor({2}, {5.0, 5.0})), 1e-5);
    CHECK(g.value(y).data[0] == Catch::Approx(5.0));
    CHECK(g.value(y).data[1] == Catch::Approx(5.0));
  }
  SECTION("zero-length input rejected") {
    CHECK_THROWS_AS(
        g.layer_norm_rows(g.input(Tensor::zeros({1, 0})), gamma1, beta0, 1e-5),
        std::invalid_argument);
  }
}

TEST_CASE("backward basics") {
  SECTION("sum gives all-ones gradient") {
    Graph g;
    NodeId x = g.variable(Tensor({1, 4}, {1.0, -2.0, 3.0, 0.5}));
    g.backward(g.sum_all(x));
    for (double v : g.grad(x).data) CHECK(v == 1.0);
  }
  SECTION("quadratic form gradient") {
    Graph g;
    NodeId x = g.variable(Tensor({1, 2}, {1.0, 2.0}));
    g.backward(g.sum_all(g.mul(x, x)));
    CHECK(g.grad(x).data[0] == Catch::Approx(2.0));
    CHECK(g.grad(x).data[1] == Catch::Approx(4.0));
  }
  SECTION("backward on non-scalar rejected") {
    Graph g;
    NodeId x = g.variable(Tensor({1, 2}, {1.0, 2.0}));
    CHECK_THROWS_AS(g.backward(x), std::invalid_argument);
  }
}

TEST_CASE("finite differences validate every op") {
  Rng rng(1234);
  const double h = 1e-5;

  SECTION("matmul chain") {
    auto x0 = random_vec(rng, 12);
    auto f = [](const std::vector<double>& xv) {
      Graph g;
      NodeId x = g.variable(Tensor({3, 4}, xv));
      Tensor w = Tensor::zeros({4, 2});
      for (size_t i = 0; i < w.data.size(); ++i) w.data[i] = 0.1 * double(i + 1);
      NodeId y = g.matmul(x, g.input(w));
      NodeId loss = g.mean_all(g.mul(y, y));
      return g.value(loss).data[0];
    };
    Graph g;
    NodeId x = g.variable(Tensor({3, 4}, x0));
    Tensor w = Tensor::zeros({4, 2});
    for (size_t i = 0; i < w.data.size(); ++i) w.data[i] = 0.1 * double(i + 1);
    NodeId y = g.matmul(x, g.input(w));
    g.backward(g.mean_all(g.mul(y, y)));
    CHECK(max_rel_err(g.grad(x).data, fd_grad(f, x0, h)) < 1e-4);
  }

  SECTION("softmax + cross entropy") {
    auto x0 = random_vec(rng, 10, -2.0, 2.0);
    std::vector<int> targets = {1, 3};
    std::vector<double> weights = {0.7, 0.3};
    auto f = [&](const std::vector<double>& xv) {
      Graph g;
      NodeId x = g.variable(Tensor({2, 5}, xv));
      return g.value(g.cross_entropy_rows(x, targets, weights)).data[0];
    };
    Graph g;
    NodeId x = g.variable(Tensor({2, 5}, x0));
    g.backward(g.cross_entropy_rows(x, targets, weights));
    CHECK(max_rel_err(g.grad(x).data, fd_grad(f, x0, h)) < 1e-4);
  }

  SECTION("layer norm, gelu, sigmoid, transpose, slices") {
    auto x0 = random_vec(rng, 12, -1.5, 1.5);
    auto build = [](Graph& g, const std::vector<double>& xv) {
      NodeId x = g.variable(Tensor({3, 4}, xv));
      NodeId gamma = g.input(Tensor({4}, {1.1, 0.9, 1.0, 1.2}));
      NodeId beta = g.input(Tensor({4}, {0.1, -0.1, 0.0, 0.2}));
      NodeId ln = g.layer_norm_rows(x, gamma, beta, 1e-5);
      NodeId act = g.gelu(ln);
      NodeId sg = g.sigmoid(g.transpose(act));
      NodeId top = g.slice_rows(g.concat_cols({sg, sg}), 0, 2);
      NodeId picked = g.gather_rows(top, {1, 0, 1});
      return std::pair(x, g.mean_all(g.mul(picked, picked)));
    };
    auto f = [&](const std::vector<double>& xv) {
      Graph g;
      return g.value(build(g, xv).second).data[0];
    };
    Graph g;
    auto [x, loss] = build(g, x0);
    g.backward(loss);
    CHECK(max_rel_err(g.grad(x).data, fd_grad(f, x0, h)) < 1e-4);
  }

  SECTION("L1 loss and row-wise bias") {
    auto x0 = random_vec(rng, 6);
    Tensor target = Tensor({2, 3}, {0.3, -0.4, 0.9, 0.0, 0.25, -0.75});
    auto f = [&](const std::vector<double>& xv) {
      Graph g;
      NodeId x = g.variable(Tensor({2, 3}, xv));
      NodeId b = g.input(Tensor({3}, {0.05, -0.02, 0.01}));
      return g.value(g.mean_abs_diff(g.add_rowwise(x, b), target)).data[0];
    };
    Graph g;
    NodeId x = g.variable(Tensor({2, 3}, x0));
    NodeId b = g.input(Tensor({3}, {0.05, -0.02, 0.01}));
    g.backward(g.mean_abs_diff(g.add_rowwise(x, b), target));
    CHECK(max_rel_err(g.grad(x).data, fd_grad(f, x0, h)) < 1e-4);
  }
}

TEST_CASE("forward passes are deterministic") {
  Rng rng(77);
  Tensor x = Tensor::zeros({5, 8});
  for (double& v : x.data) v = rng.normal();
  auto run = [&]() {
    Graph g;
    NodeId in = g.input(x);
    NodeId gamma = g.input(Tensor::full({8}, 1.0));
    NodeId beta = g.input(Tensor::zeros({8}));
    NodeId y = g.gelu(g.layer_norm_rows(in, gamma, beta, 1e-5));
    return g.value(g.softmax_rows(y)).data;
  };
  auto a = run();
  auto b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("named parameter gradients accumulate") {
  ParamStore store;
  store.create_const("w", {2}, 2.0);
  Graph g;
  NodeId w1 = g.param("w", store.get("w"));
  NodeId w2 = g.param("w", store.get("w"));
  g.backward(g.sum_all(g.mul(w1, w2)));  // d/dw (w*w) summed over both leaves
  auto grads = g.named_grads();
  REQUIRE(grads.count("w") == 1);
  CHECK(grads["w"].data[0] == Catch::Approx(4.0));
  CHECK(grads["w"].data[1] == Catch::Approx(4.0));
}

TEST_CASE("graph rejects non-finite production") {
  Graph g;
  NodeId x = g.input(Tensor({1, 2}, {1e308, 1e308}));
  CHECK_THROWS_AS(g.add(x, x), std::runtime_error);
}
