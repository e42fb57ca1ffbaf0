#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mfd/errors.hpp"
#include "mfd/finite_diff.hpp"
#include "mfd/graph.hpp"
#include "mfd/random.hpp"
#include "oracles.hpp"

using namespace mfd;

namespace {

std::vector<double> flat(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

Tensor with_values(const Tensor& shape, std::span<const double> v) {
  Tensor t = Tensor::zeros_like(shape);
  std::copy(v.begin(), v.end(), t.values().begin());
  return t;
}

}  // namespace

TEST(Tensor, ConstructionValidatesShape) {
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t(1, 2), 6.0);
  EXPECT_THROW(Tensor({2, 2, 2}, std::vector<double>(8)).rows(), ShapeError);
}

TEST(Tensor, MatmulVariantsAgree) {
  Rng rng(1);
  const Tensor a = oracle::random_matrix(rng, 3, 4);
  const Tensor b = oracle::random_matrix(rng, 4, 5);
  const Tensor c = matmul(a, b);
  const Tensor c_tn = matmul_tn(transpose(a), b);
  const Tensor c_nt = matmul_nt(a, transpose(b));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < 4; ++k) ref += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), ref, 1e-12);
      EXPECT_NEAR(c_tn(i, j), ref, 1e-12);
      EXPECT_NEAR(c_nt(i, j), ref, 1e-12);
    }
  }
  EXPECT_THROW(matmul(a, a), ShapeError);
}

TEST(PairwiseSqdist, HandExamples) {
  const Tensor x = Tensor::from_rows({{0}, {2}});
  EXPECT_EQ(pairwise_sqdist(x, x), Tensor::from_rows({{0, 4}, {4, 0}}));
  EXPECT_EQ(pairwise_sqdist(Tensor::from_rows({{1, 1}}), Tensor::from_rows({{1, 1}})), Tensor::from_rows({{0}}));
  EXPECT_EQ(pairwise_sqdist(Tensor::from_rows({{0, 0}}), Tensor::from_rows({{3, 4}}))(0, 0), 25.0);
}

TEST(PairwiseSqdist, DimensionMismatchThrows) {
  EXPECT_THROW(pairwise_sqdist(Tensor(2, 3), Tensor(2, 4)), ShapeError);
  Graph g;
  EXPECT_THROW(pairwise_sqdist(g.parameter(Tensor(2, 3)), g.parameter(Tensor(2, 4))), ShapeError);
}

TEST(PairwiseSqdist, SelfDistanceSymmetricWithZeroDiagonal) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Tensor x = oracle::random_matrix(rng, 2 + rng.below(8), 1 + rng.below(6), 3.0);
    const Tensor d = pairwise_sqdist(x, x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      EXPECT_LE(std::abs(d(i, i)), 1e-12);
      for (std::size_t j = 0; j < x.rows(); ++j) {
        EXPECT_LE(std::abs(d(i, j) - d(j, i)), 1e-12);
        EXPECT_NEAR(d(i, j), oracle::sqdist(x, i, x, j), 1e-12);
      }
    }
  }
}

TEST(SoftmaxCrossEntropy, ClosedFormValues) {
  Graph g;
  const std::vector<int> zero{0};
  EXPECT_NEAR(softmax_cross_entropy(g.constant(Tensor::from_rows({{0, 0}})), zero).value().item(), std::log(2.0),
              1e-12);
  EXPECT_LT(softmax_cross_entropy(g.constant(Tensor::from_rows({{50, 0}})), zero).value().item(), 1e-9);
  EXPECT_NEAR(softmax_cross_entropy(g.constant(Tensor::from_rows({{0, 50}})), zero).value().item(),
              50.0 + std::log1p(std::exp(-50.0)), 1e-9);
}

TEST(SoftmaxCrossEntropy, LabelOutOfRangeIsDomainError) {
  Graph g;
  const std::vector<int> bad{2};
  const std::vector<int> negative{-1};
  EXPECT_THROW(softmax_cross_entropy(g.constant(Tensor::from_rows({{0, 0}})), bad), DomainError);
  EXPECT_THROW(softmax_cross_entropy(g.constant(Tensor::from_rows({{0, 0}})), negative), DomainError);
}

TEST(SoftmaxCrossEntropy, ShiftInvariant) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Tensor z = oracle::random_matrix(rng, 4, 3, 5.0);
    Tensor shifted = z;
    for (std::size_t i = 0; i < 4; ++i) {
      const double c = rng.uniform(-100, 100);
      for (std::size_t j = 0; j < 3; ++j) shifted(i, j) += c;
    }
    const std::vector<int> labels{0, 1, 2, 1};
    Graph g;
    const double a = softmax_cross_entropy(g.constant(z), labels).value().item();
    const double b = softmax_cross_entropy(g.constant(shifted), labels).value().item();
    EXPECT_LE(std::abs(a - b), 1e-9);
  }
}

TEST(Backward, SumGivesOnes) {
  Graph g;
  Var w = g.parameter(Tensor(3, 4, 0.7));
  g.backward(sum(w));
  for (double v : w.grad().values()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, HalfSquaredNormGivesW) {
  Rng rng(4);
  const Tensor w0 = oracle::random_matrix(rng, 3, 2);
  Graph g;
  Var w = g.parameter(w0);
  g.backward(scale(sum_squares(w), 0.5));
  for (std::size_t i = 0; i < w0.size(); ++i) EXPECT_DOUBLE_EQ(w.grad().values()[i], w0.values()[i]);
}

TEST(Backward, RepeatedCallsGiveIdenticalGradients) {
  Rng rng(5);
  Graph g;
  Var x = g.parameter(oracle::random_matrix(rng, 3, 2));
  Var loss = sum(exp(pairwise_sqdist(x, x)));
  g.backward(loss);
  const Tensor first = x.grad();
  g.backward(loss);
  EXPECT_EQ(first, x.grad());
}

TEST(Backward, FanOutAccumulates) {
  Graph g;
  Var x = g.parameter(Tensor::from_rows({{2.0}}));
  g.backward(add(x, add(x, x)));
  EXPECT_EQ(x.grad().item(), 3.0);
}

TEST(Backward, NonScalarOutputIsContractError) {
  Graph g;
  Var x = g.parameter(Tensor(2, 2, 1.0));
  EXPECT_THROW(g.backward(x), ContractError);
}

TEST(Backward, ConstantsCarryNoGradient) {
  Graph g;
  Var c = g.constant(Tensor(1, 1, 2.0));
  Var x = g.parameter(Tensor(1, 1, 3.0));
  Var d = g.detach(x);
  g.backward(sum(add(matmul(c, x), d)));
  EXPECT_EQ(x.grad().item(), 2.0);
  EXPECT_FALSE(g.requires_grad(d));
  EXPECT_THROW(c.grad(), ContractError);
}

TEST(Backward, SoftmaxCrossEntropyMatchesFiniteDifferences) {
  const Tensor z0 = Tensor::from_rows({{0, 0}});
  const std::vector<int> labels{0};
  Graph g;
  Var z = g.parameter(z0);
  g.backward(softmax_cross_entropy(z, labels));
  auto f = [&](std::span<const double> p) {
    Graph h;
    return softmax_cross_entropy(h.constant(with_values(z0, p)), labels).value().item();
  };
  const auto numeric = finite_diff_grad(f, flat(z0));
  EXPECT_LT(relative_error(flat(z.grad()), numeric), 1e-6);
}

TEST(FiniteDiff, SimpleFunctions) {
  const std::vector<double> three{3.0};
  const auto g = finite_diff_grad([](std::span<const double> p) { return p[0] * p[0]; }, three, 1e-5);
  EXPECT_NEAR(g[0], 6.0, 1e-8);
  const std::vector<double> many{1, 2, 3};
  for (double v : finite_diff_grad([](std::span<const double>) { return 4.2; }, many)) EXPECT_LE(std::abs(v), 1e-10);
}

TEST(FiniteDiff, Errors) {
  const std::vector<double> p{1.0};
  EXPECT_THROW(finite_diff_grad([](std::span<const double>) { return 1.0; }, p, 0.0), ParameterError);
  EXPECT_THROW(finite_diff_grad([](std::span<const double> q) { return q[0] > 1.0 ? NAN : 0.0; }, p),
               NumericError);
}

// Every differentiable op, 100 random instances each, against central
// differences of the value-level computation.
TEST(Backward, EveryOpMatchesFiniteDifferences) {
  Rng rng(6);
  using Build = std::function<Var(Graph&, Var, Var)>;
  const std::vector<std::pair<const char*, Build>> ops = {
      {"matmul", [](Graph&, Var a, Var b) { return matmul(a, b); }},
      {"add_row_bias", [](Graph& g, Var a, Var) { return add_row_bias(a, g.parameter(Tensor(1, a.value().cols(), 0.3))); }},
      {"add", [](Graph&, Var a, Var) { return add(a, scale(a, 2.0)); }},
      {"sub", [](Graph&, Var a, Var) { return sub(relu(a), exp(scale(a, 0.1))); }},
      {"relu", [](Graph&, Var a, Var) { return relu(a); }},
      {"exp", [](Graph&, Var a, Var) { return exp(scale(a, 0.5)); }},
      {"mean", [](Graph&, Var a, Var) { return mean(a); }},
      {"sum_squares", [](Graph&, Var a, Var) { return sum_squares(a); }},
      {"pairwise_sqdist", [](Graph&, Var a, Var b) { return pairwise_sqdist(a, matmul(a, b)); }},
      {"gather_rows", [](Graph&, Var a, Var) {
         const std::vector<std::size_t> idx{0, 2, 0};
         return gather_rows(a, idx);
       }},
      {"softmax_cross_entropy", [](Graph&, Var a, Var) {
         const std::vector<int> labels{1, 0, 2};
         return softmax_cross_entropy(a, labels);
       }},
      {"softened_kl", [](Graph&, Var a, Var) {
         return softened_kl(a, Tensor::from_rows({{0.5, -1, 2}, {0, 0, 0}, {1, 1, -3}}), 2.5);
       }},
  };
  for (const auto& [name, build] : ops) {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      Tensor a0 = oracle::random_matrix(rng, 3, 3);
      // keep relu inputs away from the kink
      for (double& v : a0.values()) {
        if (std::abs(v) < 1e-3) v = 0.5;
      }
      const Tensor b0 = oracle::random_matrix(rng, 3, 3, 0.5);
      const Tensor c0 = oracle::random_matrix(rng, 3, 3);
      auto scalarize = [&](Graph& g, Var out) {
        const Tensor& v = out.value();
        if (v.size() == 1) return out;
        Tensor c = Tensor::zeros_like(v);
        std::copy_n(c0.values().begin(), std::min(c.size(), c0.size()), c.values().begin());
        if (v.rank() == 2 && v.cols() == 3 && v.rows() <= 3) return sum(matmul(out, g.constant(transpose(c))));
        return sum(out);
      };
      Graph g;
      Var a = g.parameter(a0), b = g.parameter(b0);
      Var loss = scalarize(g, build(g, a, b));
      g.backward(loss);
      std::vector<double> analytic = flat(a.grad());
      const auto gb = flat(b.grad());
      analytic.insert(analytic.end(), gb.begin(), gb.end());
      std::vector<double> params = flat(a0);
      params.insert(params.end(), b0.values().begin(), b0.values().end());
      auto f = [&](std::span<const double> p) {
        Graph h;
        Var ha = h.constant(with_values(a0, p.subspan(0, 9)));
        Var hb = h.constant(with_values(b0, p.subspan(9, 9)));
        return scalarize(h, build(h, ha, hb)).value().item();
      };
      worst = std::max(worst, relative_error(analytic, finite_diff_grad(f, params)));
    }
    EXPECT_LT(worst, 1e-4) << name;
  }
}
