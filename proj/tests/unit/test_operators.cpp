// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "diffgraph/ops.hpp"
#include "error.hpp"
#include "mri/fft.hpp"
#include "mri/generators.hpp"
#include "operators/combined.hpp"
#include "operators/score_network.hpp"
#include "operators/spectral.hpp"
#include "support.hpp"

using namespace mnm;
using namespace mnm::ops;
using mnm::test::random_tensor;
using mnm::test::rel_err;

namespace {

mri::MeasurementModel undersampled(std::size_t n, std::uint64_t seed) {
  const Tensor mask = n >= 16 ? mri::generate_vd_mask(n, n, 4, seed) : test::random_mask(n, n, 0.3, seed);
  return mri::MeasurementModel(mask, mri::generate_coil_maps(3, n, n, seed + 1));
}

NetworkSpec small_spec(ScoreForm form = ScoreForm::direct) {
  NetworkSpec s;
  s.channels = {2, 4, 2};
  s.form = form;
  return s;
}

}  // namespace

TEST_CASE("zero network outputs zero") {
  const ScoreNetwork net = ScoreNetwork::zeros(NetworkSpec{});
  CHECK(norm(net.apply(random_tensor({2, 8, 8}, 1))) == 0.0);
  CHECK(net.parameter_count() == 16 * 2 * 9 + 16 + 16 * 16 * 9 + 16 + 2 * 16 * 9 + 2);
}

TEST_CASE("network with relu is not linear") {
  const ScoreNetwork net = ScoreNetwork::random(NetworkSpec{}, 3);
  const Tensor x = random_tensor({2, 8, 8}, 2);
  const Tensor y = random_tensor({2, 8, 8}, 3);
  CHECK(rel_err(net.apply(x + y), net.apply(x) + net.apply(y)) > 1e-3);
  // zero biases leave it positively homogeneous; generic biases break that too
  ScoreNetwork biased = net;
  for (ConvLayer& l : biased.layers()) l.bias = random_tensor(l.bias.shape(), 4, 0.1);
  CHECK(rel_err(biased.apply(2.0 * x), 2.0 * biased.apply(x)) > 1e-3);
}

TEST_CASE("theta round-trips and the graph forward matches the tensor forward") {
  ScoreNetwork net = ScoreNetwork::random(small_spec(ScoreForm::residual), 5);
  const std::vector<double> theta = net.theta();
  CHECK(theta.size() == net.parameter_count());
  ScoreNetwork other = ScoreNetwork::zeros(small_spec(ScoreForm::residual));
  other.set_theta(theta);
  const Tensor x = random_tensor({2, 6, 6}, 6);
  CHECK(other.apply(x) == net.apply(x));
  ad::Graph g;
  const auto params = net.bind(g, true);
  CHECK(net.apply(g.leaf(x), params).value() == net.apply(x));
  CHECK(rel_err(net.apply(x), x - net.apply_cnn(x)) < 1e-15);
  CHECK_THROWS_AS(other.set_theta(std::vector<double>(3)), ShapeError);
}

TEST_CASE("parameter gradient of ||F(x)||^2 matches finite differences") {
  const ScoreNetwork net = ScoreNetwork::random(small_spec(), 7);
  const Tensor x = random_tensor({2, 5, 5}, 8);
  ad::Graph g;
  const auto params = net.bind(g, true);
  ad::Var y = net.apply(g.constant(x), params);
  auto grads = g.grad(ad::inner(y, y), params);
  std::vector<double> flat;
  for (const Tensor& t : grads) flat.insert(flat.end(), t.values().begin(), t.values().end());
  const Tensor theta({net.parameter_count()}, net.theta());
  const Tensor fd = test::fd_gradient(
      [&](const Tensor& th) {
        ScoreNetwork n = net;
        n.set_theta(th.values());
        return squared_norm(n.apply(x));
      },
      theta, 1e-5);
  CHECK(rel_err(Tensor({flat.size()}, flat), fd) < 1e-4);
}

TEST_CASE("combined operator identities") {
  const mri::MeasurementModel mm = undersampled(16, 1);
  const CombinedOperator zero(ScoreNetwork::zeros(NetworkSpec{}), mm, 10.0);
  const Tensor x = random_tensor(mm.image_shape(), 2);
  CHECK(combined_Q(zero, x) == mri::apply_AHA(x, mm));
  CHECK(norm(combined_Q(zero, Tensor(mm.image_shape()))) == 0.0);

  const CombinedOperator op(ScoreNetwork::random(NetworkSpec{}, 3), mm, 10.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Tensor z = random_tensor(mm.image_shape(), 100 + s);
    const Tensor sum = combined_Q(op, z) + residual_H(op, z);
    CHECK(norm(sum - z) <= 1e-14 * norm(z) * 10);
  }
  ad::Graph g;
  const OperatorBinding b = bind(op, g, true, true);
  CHECK(rel_err(combined_Q(op, g.leaf(x), b).value(), combined_Q(op, x)) < 1e-15);
  CHECK(rel_err(residual_H(op, g.leaf(x), b).value(), residual_H(op, x)) < 1e-15);

  const CombinedOperator full(ScoreNetwork::zeros(NetworkSpec{}), mri::MeasurementModel::identity(8, 8), 10.0);
  CHECK(norm(residual_H(full, random_tensor({2, 8, 8}, 4))) < 1e-14);
  CHECK_THROWS_AS(CombinedOperator(ScoreNetwork::zeros(NetworkSpec{}), mm, 0.0), InvalidArgument);
}

TEST_CASE("linear surrogate gives Q = (beta / lambda) I although F is negative definite") {
  const mri::MeasurementModel full = mri::MeasurementModel::identity(8, 8);
  const CombinedOperator op(LinearScore{0.1, 10.0, full}, full, 10.0);
  const Tensor x = random_tensor(full.image_shape(), 5);
  CHECK(rel_err(combined_Q(op, x), 0.01 * x) < 1e-13);
  CHECK(dot(x, score_apply(op.score, x)) < 0.0);
  CHECK(rel_err(score_apply(op.score, x), (0.1 - 10.0) * x) < 1e-13);
  const Tensor y = random_tensor(full.image_shape(), 6);
  CHECK(monotonicity_probe(op, x, y) == doctest::Approx(0.01).epsilon(1e-10));
  CHECK(norm(residual_H(op, x) - residual_H(op, y)) / norm(x - y) == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("monotonicity probe") {
  const mri::MeasurementModel full = mri::MeasurementModel::identity(8, 8);
  const CombinedOperator mi(LinearScore{0.5, 10.0, full}, full, 10.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    CHECK(monotonicity_probe(mi, random_tensor({2, 8, 8}, s), random_tensor({2, 8, 8}, 50 + s)) ==
          doctest::Approx(0.05).epsilon(1e-10));
  }
  const Tensor z = random_tensor({2, 8, 8}, 1);
  CHECK_THROWS_AS(monotonicity_probe(mi, z, z), InvalidArgument);

  // A^H A annihilates a masked-out Fourier mode.
  const mri::MeasurementModel mm = mri::MeasurementModel::single_coil(mri::generate_vd_mask(16, 16, 4, 2));
  std::size_t hole = 0;
  while (mm.mask()[hole] != 0.0) ++hole;
  std::vector<std::complex<double>> mode(256);
  mode[hole] = 1.0;
  mri::ifft2_unitary(mode, 16, 16);
  Tensor d({2, 16, 16});
  for (std::size_t i = 0; i < 256; ++i) {
    d[i] = mode[i].real();
    d[256 + i] = mode[i].imag();
  }
  const CombinedOperator aha(ScoreNetwork::zeros(NetworkSpec{}), mm, 10.0);
  const Tensor base = random_tensor({2, 16, 16}, 3);
  CHECK(std::abs(monotonicity_probe(aha, base + d, base)) < 1e-14);
}

TEST_CASE("probe is at least 1 - ratio of H on the same pair") {
  const mri::MeasurementModel mm = undersampled(16, 4);
  const CombinedOperator op(ScoreNetwork::random(NetworkSpec{}, 9), mm, 10.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Tensor z1 = random_tensor(mm.image_shape(), 200 + s);
    const Tensor z2 = z1 + random_tensor(mm.image_shape(), 300 + s, 0.1);
    const double ratio = norm(residual_H(op, z1) - residual_H(op, z2)) / norm(z1 - z2);
    CHECK(monotonicity_probe(op, z1, z2) >= 1.0 - ratio - 1e-12);
  }
}

TEST_CASE("spectral normalization trivial cases") {
  ScoreNetwork five({ConvLayer{Tensor({2, 2, 1, 1}, {5.0, 0.0, 0.0, 5.0}), Tensor({2})}}, ScoreForm::direct);
  const ScoreNetwork a = spectral_normalize(five, 0.9, 8, 8);
  CHECK(a.layers()[0].weight[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(a.layers()[0].weight[3] == doctest::Approx(0.9).epsilon(1e-12));

  Tensor id({2, 2, 3, 3});
  id[4] = 1.0;
  id[(1 * 2 + 1) * 9 + 4] = 1.0;
  const ScoreNetwork b =
      spectral_normalize(ScoreNetwork({ConvLayer{id, Tensor({2})}}, ScoreForm::direct), 0.99, 8, 8);
  CHECK(rel_err(b.layers()[0].weight, 0.99 * id) < 1e-12);
  CHECK_THROWS_AS(spectral_normalize(five, 1.0, 8, 8), InvalidArgument);
}

TEST_CASE("power iteration matches the dense SVD of the conv matrix") {
  const Tensor w = random_tensor({2, 2, 3, 3}, 11);
  const Eigen::MatrixXd m = test::materialize([&](const Tensor& e) { return test::naive_conv(e, w, nullptr); }, {2, 16, 16});
  CHECK(m.rows() == 512);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const double want = svd.singularValues()(0);
  CHECK(std::abs(conv_spectral_norm(w, 16, 16) - want) < 1e-6 * want);
}

TEST_CASE("spectral normalization bounds the layer product and is idempotent") {
  const ScoreNetwork net = ScoreNetwork::random(NetworkSpec{}, 13);
  SpectralState state;
  const ScoreNetwork once = spectral_normalize(net, 0.9, 16, 16, &state);
  CHECK(layer_norm_product(once, 16, 16) <= 0.9 * (1 + 1e-5));
  const ScoreNetwork twice = spectral_normalize(once, 0.9, 16, 16, &state);
  for (std::size_t i = 0; i < once.layers().size(); ++i) {
    const Tensor& a = once.layers()[i].weight;
    const Tensor& b = twice.layers()[i].weight;
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-12);
  }
  // the CNN itself is then 0.9-Lipschitz on sampled pairs
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor x = random_tensor({2, 16, 16}, 400 + s);
    const Tensor y = random_tensor({2, 16, 16}, 500 + s);
    CHECK(norm(once.apply_cnn(x) - once.apply_cnn(y)) <= 0.9 * norm(x - y) * (1 + 1e-5));
  }
}
