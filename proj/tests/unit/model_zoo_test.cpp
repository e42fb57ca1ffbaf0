#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mfd/checkpoint.hpp"
#include "mfd/errors.hpp"
#include "mfd/finite_diff.hpp"
#include "mfd/mlp.hpp"
#include "oracles.hpp"

using namespace mfd;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mfd_test_" + name);
}

}  // namespace

TEST(MlpSpec, Validation) {
  EXPECT_THROW((MlpSpec{{4, 3}}).validate(), ParameterError);
  EXPECT_THROW((MlpSpec{{4, 0, 3}}).validate(), ParameterError);
  EXPECT_NO_THROW((MlpSpec{{4, 8, 3}}).validate());
  const auto s = MlpSpec::standard(20, 4);
  EXPECT_EQ(s.layer_dims, (std::vector<std::size_t>{20, 64, 64, 4}));
  EXPECT_EQ(s.penultimate_dim(), 64u);
}

TEST(InitParams, GlorotBoundsZeroBiasesDeterminism) {
  const MlpSpec spec{{4, 8, 3}};
  const auto p = init_params(spec, 11);
  const double bound = std::sqrt(6.0 / 12.0);
  EXPECT_NEAR(bound, 0.7071, 1e-4);
  for (double w : p.layers[0].weight.values()) EXPECT_LE(std::abs(w), bound);
  for (const auto& l : p.layers)
    for (double b : l.bias.values()) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(p.flatten(), init_params(spec, 11).flatten());
  EXPECT_NE(p.flatten(), init_params(spec, 12).flatten());
  EXPECT_EQ(p.parameter_count(), 4u * 8 + 8 + 8 * 3 + 3);
}

TEST(MlpForward, ZeroNetwork) {
  auto p = init_params(MlpSpec{{3, 5, 2}}, 0);
  p.assign(std::vector<double>(p.parameter_count(), 0.0));
  const auto out = mlp_forward(p, Tensor::from_rows({{1, -2, 3}, {0.5, 0.5, 0.5}}));
  for (double v : out.features.values()) EXPECT_EQ(v, 0.0);
  for (double v : out.logits.values()) EXPECT_EQ(v, 0.0);
}

TEST(MlpForward, IdentityLikeRectifier) {
  auto p = init_params(MlpSpec{{1, 1, 1}}, 0);
  p.assign(std::vector<double>{1.0, 0.0, 1.0, 0.0});
  const auto out = mlp_forward(p, Tensor::from_rows({{-1}, {2}}));
  EXPECT_EQ(out.features(0, 0), 0.0);
  EXPECT_EQ(out.features(1, 0), 2.0);
  EXPECT_EQ(out.logits(1, 0), 2.0);
}

TEST(MlpForward, LogitsAreFinalAffineOfFeatures) {
  Rng rng(5);
  auto p = init_params(MlpSpec{{6, 9, 7, 4}}, 2);
  for (auto& l : p.layers)
    for (double& b : l.bias.values()) b = rng.normal();
  const Tensor x = oracle::random_matrix(rng, 13, 6);
  const auto out = mlp_forward(p, x);
  const auto& last = p.layers.back();
  for (std::size_t i = 0; i < 13; ++i) {
    for (std::size_t m = 0; m < 4; ++m) {
      double z = last.bias(0, m);
      for (std::size_t k = 0; k < 7; ++k) z += out.features(i, k) * last.weight(k, m);
      EXPECT_NEAR(out.logits(i, m), z, 1e-12);
    }
  }
  const auto again = mlp_forward(p, x);
  EXPECT_EQ(again.logits, out.logits);
  EXPECT_THROW(mlp_forward(p, Tensor(2, 5)), ShapeError);
}

TEST(MlpForward, GraphMatchesValuePathAndCeGradientsPassFiniteDifferences) {
  Rng rng(8);
  const MlpSpec spec{{3, 6, 5, 3}};
  auto p = init_params(spec, 4);
  for (auto& l : p.layers)
    for (double& b : l.bias.values()) b = 0.1 * rng.normal();
  const Tensor x = oracle::random_matrix(rng, 7, 3);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2, 0};

  Graph g;
  const auto vars = bind_parameters(g, p, true);
  const auto nodes = mlp_forward(vars, g.constant(x));
  EXPECT_EQ(nodes.logits.value(), mlp_forward(p, x).logits);
  Var loss = softmax_cross_entropy(nodes.logits, labels);
  g.backward(loss);
  std::vector<double> analytic;
  for (const auto& t : collect_gradients(vars)) analytic.insert(analytic.end(), t.values().begin(), t.values().end());

  const auto flat = p.flatten();
  const auto numeric = finite_diff_grad(
      [&](std::span<const double> theta) {
        auto q = p;
        q.assign(theta);
        Graph h;
        const auto v = bind_parameters(h, q, false);
        return softmax_cross_entropy(mlp_forward(v, h.constant(x)).logits, labels).value().item();
      },
      flat, 1e-6);
  EXPECT_LT(relative_error(analytic, numeric), 1e-4);
}

TEST(Checkpoint, RoundTripBitExactWithMetadata) {
  const auto p = init_params(MlpSpec{{5, 7, 3}}, 9);
  CheckpointMeta meta;
  meta.seed = 42;
  meta.method = "MFD";
  meta.epoch = 50;
  meta.hyper["lambda"] = 3.0;
  const auto ck = make_checkpoint(p, meta);
  const auto path = temp_path("model.ckpt");
  save_checkpoint(path, ck);
  const auto back = load_checkpoint(path);
  EXPECT_EQ(back.params.spec, ck.params.spec);
  EXPECT_EQ(back.params.flatten(), ck.params.flatten());
  EXPECT_EQ(back.meta, ck.meta);
  EXPECT_EQ(back.meta.method, "MFD");
  EXPECT_EQ(back.meta.hyper.at("lambda"), 3.0);
  // float storage rounds every weight once
  for (double w : ck.params.flatten()) EXPECT_EQ(w, static_cast<double>(static_cast<float>(w)));
}

TEST(Checkpoint, CorruptFilesRejected) {
  const auto ck = make_checkpoint(init_params(MlpSpec{{2, 3, 2}}, 1), {});
  const auto path = temp_path("bad.ckpt");
  save_checkpoint(path, ck);
  const auto size = std::filesystem::file_size(path);

  std::filesystem::resize_file(path, size - 4);
  EXPECT_THROW(load_checkpoint(path), FormatError);

  save_checkpoint(path, ck);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const char v[4] = {9, 0, 0, 0};
    f.write(v, 4);
  }
  EXPECT_THROW(load_checkpoint(path), FormatError);

  {
    std::ofstream f(path, std::ios::binary);
    f << "not a checkpoint at all";
  }
  EXPECT_THROW(load_checkpoint(path), FormatError);
  EXPECT_THROW(load_checkpoint(temp_path("does_not_exist.ckpt")), IoError);
}
