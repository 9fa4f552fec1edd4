#include <doctest.h>

#include <cmath>
#include <random>

#include "snnse/engine/adam.hpp"
#include "snnse/engine/clamp.hpp"
#include "snnse/engine/conv.hpp"
#include "snnse/engine/loss.hpp"
#include "snnse/engine/ops.hpp"
#include "snnse/engine/shape_ops.hpp"
#include "snnse/engine/tape.hpp"
#include "snnse/error.hpp"
#include "support/fd.hpp"

using namespace snnse;
using namespace snnse::engine;
using snnse::testing::numeric_gradient;
using snnse::testing::random_tensor;
using snnse::testing::relative_error;
using snnse::testing::weighted_sum;

namespace {

// Direct cross-correlation with zero padding.
Tensor<double> conv_oracle(const Tensor<double>& x, const Tensor<double>& w,
                           const Tensor<double>& b, int stride) {
  const long L = static_cast<long>(x.dim(0)), cin = static_cast<long>(x.dim(1));
  const long k = static_cast<long>(w.dim(0)), cout = static_cast<long>(w.dim(2));
  const long pad = (k - 1) / 2;
  const long out_len = (L + 2 * pad - k) / stride + 1;
  Tensor<double> y({static_cast<std::size_t>(out_len), static_cast<std::size_t>(cout)});
  for (long o = 0; o < out_len; ++o) {
    for (long co = 0; co < cout; ++co) {
      double s = b[co];
      for (long t = 0; t < k; ++t) {
        const long i = o * stride - pad + t;
        if (i < 0 || i >= L) continue;
        for (long ci = 0; ci < cin; ++ci) s += x[i * cin + ci] * w[(t * cin + ci) * cout + co];
      }
      y[o * cout + co] = s;
    }
  }
  return y;
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor<float> t({2, 3}, 1.5f);
  CHECK(t.size() == 6);
  CHECK(t.at(1, 2) == 1.5f);
  CHECK(to_string(t.shape()) == "{2, 3}");
  CHECK_THROWS_AS(Tensor<float>({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  t[4] = NAN;
  CHECK_THROWS_AS(check_finite(t, "t"), NumericError);
  const auto d = Tensor<float>({2}, std::vector<float>{1, 2}).cast<double>();
  CHECK(d[1] == 2.0);
  Tensor<float> acc({2}, std::vector<float>{1, 1});
  accumulate(acc, Tensor<float>({2}, std::vector<float>{2, 3}));
  CHECK(acc == Tensor<float>({2}, std::vector<float>{3, 4}));
}

TEST_CASE("conv1d_forward examples") {
  SUBCASE("k=1 unit weight is the identity") {
    Tensor<double> x({4, 1}, std::vector<double>{1, -2, 3, 0.5});
    Tensor<double> w({1, 1, 1}, std::vector<double>{1});
    Tensor<double> b({1});
    CHECK(conv1d_forward(x, w, b, ConvGeometry{1, 1}) == x);
  }
  SUBCASE("hand cross-correlation with zero padding") {
    Tensor<double> x({3, 1}, std::vector<double>{1, 2, 3});
    Tensor<double> w({3, 1, 1}, std::vector<double>{1, 0, -1});
    Tensor<double> b({1});
    const auto y = conv1d_forward(x, w, b, ConvGeometry{3, 1});
    CHECK(y.storage() == std::vector<double>{-2, -2, 2});
  }
  SUBCASE("length formula") {
    CHECK(ConvGeometry{5, 2}.output_length(257) == 129);
    CHECK(ConvGeometry{5, 1}.output_length(257) == 257);
    CHECK(ConvGeometry{5, 2}.output_length(3) == 2);
  }
  SUBCASE("invalid geometry and shapes") {
    CHECK_THROWS_AS(ConvGeometry({4, 1}).validate(), ShapeError);
    CHECK_THROWS_AS(ConvGeometry({5, 3}).validate(), ShapeError);
    Tensor<double> x({5, 2}), w({5, 3, 4}), b({4});
    CHECK_THROWS_AS(conv1d_forward(x, w, b, ConvGeometry{5, 1}), ShapeError);
  }
}

TEST_CASE("conv1d_forward matches the direct oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t L = 3 + rng() % 20, cin = 1 + rng() % 5, cout = 1 + rng() % 40;
    const int k = 1 + 2 * static_cast<int>(rng() % 3);
    const int stride = 1 + static_cast<int>(rng() % 2);
    auto x = random_tensor({L, cin}, rng);
    if (trial % 2) {
      for (auto& v : x.storage()) v = v > 0.5 ? 1.0 : 0.0;
    }
    const auto w = random_tensor({static_cast<std::size_t>(k), cin, cout}, rng);
    const auto b = random_tensor({cout}, rng);
    const auto y = conv1d_forward(x, w, b, ConvGeometry{k, stride});
    REQUIRE(relative_error(y, conv_oracle(x, w, b, stride)) < 1e-13);
  }
}

TEST_CASE("conv1d_backward examples") {
  std::mt19937_64 rng(2);
  const auto x = random_tensor({9, 3}, rng);
  const auto w = random_tensor({5, 3, 4}, rng);
  const ConvGeometry g{5, 2};
  const std::size_t out_len = g.output_length(9);
  const auto ones = conv1d_backward(Tensor<double>({out_len, 4}, 1.0), x, w, g);
  for (double v : ones.db.values()) CHECK(v == static_cast<double>(out_len));
  const auto zero = conv1d_backward(Tensor<double>({out_len, 4}), x, w, g);
  for (double v : zero.dx.values()) CHECK(v == 0.0);
  for (double v : zero.dw.values()) CHECK(v == 0.0);
  for (double v : zero.db.values()) CHECK(v == 0.0);
}

TEST_CASE("conv1d gradients match finite differences") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t L = 2 + rng() % 9, cin = 1 + rng() % 4;
    // Cover both the dot-product and the transposed dx paths.
    const std::size_t cout = trial % 3 == 0 ? 128 + rng() % 8 : 1 + rng() % 6;
    const int k = 1 + 2 * static_cast<int>(rng() % 3);
    const ConvGeometry g{k, 1 + static_cast<int>(rng() % 2)};
    auto x = random_tensor({L, cin}, rng);
    auto w = random_tensor({static_cast<std::size_t>(k), cin, cout}, rng);
    auto b = random_tensor({cout}, rng);
    const auto probe = random_tensor({g.output_length(L), cout}, rng);
    auto loss = [&] { return weighted_sum(conv1d_forward(x, w, b, g), probe); };
    const auto grads = conv1d_backward(probe, x, w, g);
    REQUIRE(relative_error(grads.dx, numeric_gradient(x, loss)) < 1e-3);
    REQUIRE(relative_error(grads.dw, numeric_gradient(w, loss)) < 1e-3);
    REQUIRE(relative_error(grads.db, numeric_gradient(b, loss)) < 1e-3);
  }
}

TEST_CASE("conv1d float and double paths agree") {
  std::mt19937_64 rng(4);
  const auto x = random_tensor({33, 64}, rng);
  const auto w = random_tensor({5, 64, 128}, rng, 0.2);
  const auto b = random_tensor({128}, rng);
  const ConvGeometry g{5, 2};
  const auto yd = conv1d_forward(x, w, b, g);
  const auto yf = conv1d_forward(x.cast<float>(), w.cast<float>(), b.cast<float>(), g);
  CHECK(relative_error(yf.cast<double>(), yd) < 1e-5);
}

TEST_CASE("shape ops forward") {
  Tensor<double> x({3, 1}, std::vector<double>{1, 2, 3});
  CHECK(nearest_upsample2(x).storage() == std::vector<double>{1, 1, 2, 2, 3, 3});
  const auto up = nearest_upsample2(x);
  CHECK(trailing_crop(up, 5).storage() == std::vector<double>{1, 1, 2, 2, 3});
  CHECK_THROWS_AS(trailing_crop(up, 7), ShapeError);

  Tensor<double> a({2, 1}, std::vector<double>{1, 2});
  Tensor<double> b({2, 2}, std::vector<double>{3, 4, 5, 6});
  CHECK(channel_concat(a, b).storage() == std::vector<double>{1, 3, 4, 2, 5, 6});
  CHECK_THROWS_AS(channel_concat(a, Tensor<double>({3, 1})), ShapeError);
  CHECK(affine(a, 2.0, 1.0).storage() == std::vector<double>{3, 5});
}

TEST_CASE("shape ops backward") {
  Tensor<double> g({4, 1}, std::vector<double>{1, 2, 3, 4});
  CHECK(nearest_upsample2_backward(g).storage() == std::vector<double>{3, 7});
  CHECK(trailing_crop_backward(Tensor<double>({2, 1}, std::vector<double>{1, 2}), 4).storage() ==
        std::vector<double>{1, 2, 0, 0});
  Tensor<double> u({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const auto [ga, gb] = channel_concat_backward(u, 1);
  CHECK(ga.storage() == std::vector<double>{1, 4});
  CHECK(gb.storage() == std::vector<double>{2, 3, 5, 6});
}

TEST_CASE("shape ops on the tape match finite differences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t L = 2 + rng() % 6, ca = 1 + rng() % 3, cb = 1 + rng() % 3;
    const std::size_t crop_len = 2 * L - (trial % 2);
    auto a = random_tensor({L, ca}, rng);
    auto skip = random_tensor({crop_len, cb}, rng);
    const double scale = 0.5 + static_cast<double>(rng() % 100) / 100.0, shift = -0.3;
    const auto ref = random_tensor({crop_len, ca + cb}, rng);
    auto run = [&](Tape<double>& tape, VarId va, VarId vs) {
      const VarId up = crop(tape, upsample2(tape, scale_shift(tape, va, scale, shift)), crop_len);
      return concat_channels(tape, up, vs);
    };
    auto loss = [&] {
      Tape<double> tape;
      return lsd_value(tape.value(run(tape, tape.constant(a), tape.constant(skip))), ref);
    };
    Tape<double> tape;
    const VarId va = tape.input(a), vs = tape.input(skip);
    tape.backward(lsd(tape, run(tape, va, vs), ref));
    REQUIRE(relative_error(tape.grad(va), numeric_gradient(a, loss)) < 1e-3);
    REQUIRE(relative_error(tape.grad(vs), numeric_gradient(skip, loss)) < 1e-3);
  }
}

TEST_CASE("select_frame and stack_frames round trip with exact adjoints") {
  std::mt19937_64 rng(6);
  auto x = random_tensor({4, 6}, rng);
  const auto ref = random_tensor({4, 6}, rng);
  auto run = [&](Tape<double>& tape, VarId v) {
    std::vector<VarId> frames;
    for (std::size_t m = 0; m < 4; ++m) frames.push_back(select_frame(tape, v, 3 - m));
    return stack_frames(tape, std::span<const VarId>(frames));
  };
  Tape<double> tape;
  const VarId v = tape.input(x);
  const VarId out = run(tape, v);
  CHECK(tape.value(out).at(0, 2) == x.at(3, 2));
  tape.backward(lsd(tape, out, ref));
  auto loss = [&] {
    Tape<double> t;
    return lsd_value(t.value(run(t, t.constant(x))), ref);
  };
  CHECK(relative_error(tape.grad(v), numeric_gradient(x, loss)) < 1e-3);
}

TEST_CASE("leaky integrator matches finite differences") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t L = 2 + rng() % 8, T = 1 + rng() % 5;
    std::vector<Tensor<double>> drives;
    for (std::size_t t = 0; t < T; ++t) drives.push_back(random_tensor({L, 1}, rng));
    Tensor<double> beta({1}, 0.1 + 0.8 * static_cast<double>(rng() % 100) / 100.0);
    const auto ref = random_tensor({L, 1}, rng);
    auto run = [&](Tape<double>& tape, VarId vbeta, std::vector<VarId>& vd) {
      VarId u = tape.constant(Tensor<double>({L, 1}));
      for (std::size_t t = 0; t < T; ++t) u = leaky_integrate(tape, u, vd[t], vbeta);
      return u;
    };
    Tape<double> tape;
    const VarId vb = tape.input(beta);
    std::vector<VarId> vd;
    for (const auto& d : drives) vd.push_back(tape.input(d));
    tape.backward(lsd(tape, run(tape, vb, vd), ref));
    auto loss = [&] {
      Tape<double> t;
      std::vector<VarId> cd;
      for (const auto& d : drives) cd.push_back(t.constant(d));
      return lsd_value(t.value(run(t, t.constant(beta), cd)), ref);
    };
    REQUIRE(relative_error(tape.grad(vb), numeric_gradient(beta, loss)) < 1e-3);
    REQUIRE(relative_error(tape.grad(vd[0]), numeric_gradient(drives[0], loss)) < 1e-3);
  }
}

TEST_CASE("lsd_loss examples") {
  Tensor<double> a({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(lsd_loss(a, a).value <= 1e-6);
  CHECK(lsd_value(a, a, 0.0) == 0.0);
  Tensor<double> shifted = a;
  for (auto& v : shifted.storage()) v -= 2.5;
  CHECK(lsd_loss(shifted, a).value == doctest::Approx(2.5).epsilon(1e-9));
  Tensor<double> est({1, 2}, std::vector<double>{0, 0});
  Tensor<double> ref({1, 2}, std::vector<double>{3, 4});
  CHECK(std::abs(lsd_loss(est, ref).value - 3.5355339) < 1e-7);
  CHECK(lsd_value(est, ref, 0.0) == std::sqrt(12.5));
  CHECK_THROWS_AS(lsd_loss(est, a), ShapeError);
  CHECK_THROWS_AS(lsd_loss(Tensor<double>({0, 2}), Tensor<double>({0, 2})), ShapeError);
}

TEST_CASE("lsd_loss is symmetric, frame-permutation invariant, and exact in gradient") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t M = 1 + rng() % 5, K = 1 + rng() % 9;
    auto est = random_tensor({M, K}, rng);
    const auto ref = random_tensor({M, K}, rng);
    const auto forward = lsd_loss(est, ref);
    const auto backward = lsd_loss(ref, est);
    CHECK(forward.value == doctest::Approx(backward.value).epsilon(1e-14));
    for (std::size_t i = 0; i < est.size(); ++i) {
      REQUIRE(forward.grad[i] == doctest::Approx(-backward.grad[i]).epsilon(1e-12));
    }
    Tensor<double> pe({M, K}), pr({M, K});
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < K; ++k) {
        pe.at(m, k) = est.at(M - 1 - m, k);
        pr.at(m, k) = ref.at(M - 1 - m, k);
      }
    }
    CHECK(lsd_loss(pe, pr).value == doctest::Approx(forward.value).epsilon(1e-14));
    auto loss = [&] { return lsd_loss(est, ref).value; };
    REQUIRE(relative_error(forward.grad, numeric_gradient(est, loss)) < 1e-3);
  }
}

TEST_CASE("tape backward semantics") {
  SUBCASE("only reached nodes run and frozen inputs get no gradient") {
    Tape<double> tape;
    const VarId frozen = tape.constant(Tensor<double>({2, 1}, 1.0));
    const VarId x = tape.input(Tensor<double>({2, 1}, std::vector<double>{1, 2}));
    const VarId y = scale_shift(tape, x, 3.0, 0.0);
    const VarId z = concat_channels(tape, y, frozen);
    tape.backward(lsd(tape, z, Tensor<double>({2, 2})));
    CHECK(tape.grad_if_any(frozen) == nullptr);
    CHECK(tape.grad(x)[0] != 0.0);
  }
  SUBCASE("bound parameters accumulate into caller buffers") {
    Tensor<double> w({1, 1, 1}, 2.0), b({1}), gw({1, 1, 1}), gb({1});
    for (int rep = 0; rep < 2; ++rep) {
      Tape<double> tape;
      const VarId x = tape.constant(Tensor<double>({1, 1}, 1.0));
      const VarId y = conv1d(tape, x, tape.parameter(w, gw), tape.parameter(b, gb), ConvGeometry{1, 1});
      tape.backward(lsd(tape, y, Tensor<double>({1, 1}, 5.0)));
    }
    // d/dw |5 - w| at w=2 is -1 per run.
    CHECK(gw[0] == doctest::Approx(-2.0));
    CHECK(gb[0] == doctest::Approx(-2.0));
  }
  SUBCASE("mismatched gradient buffer is rejected") {
    Tensor<double> w({2}), g({3});
    Tape<double> tape;
    CHECK_THROWS_AS(tape.parameter(w, g), ShapeError);
  }
  SUBCASE("cycles are detected") {
    Tape<double> tape;
    const VarId a = tape.input(Tensor<double>({1}, 1.0));
    const VarId b = tape.emit(Tensor<double>({1}, 1.0), true);
    tape.record({a}, {b}, [](Tape<double>&) {});
    tape.record({b}, {a}, [](Tape<double>&) {});
    CHECK_THROWS_AS(tape.backward(b), InternalError);
  }
  SUBCASE("non-scalar loss is rejected") {
    Tape<double> tape;
    const VarId a = tape.input(Tensor<double>({2}));
    CHECK_THROWS_AS(tape.backward(a), ShapeError);
  }
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Tensor<double> p({3}, std::vector<double>{1, -2, 3});
    const auto before = p;
    Tensor<double> g({3});
    Adam<double> adam;
    Tensor<double>* ps[] = {&p};
    const Tensor<double>* gs[] = {&g};
    adam.step(ps, gs);
    CHECK(p == before);
  }
  SUBCASE("first step moves by about lr") {
    for (double g0 : {1e-3, 0.5, -7.0}) {
      Tensor<double> p({1}, 1.0), g({1}, g0);
      Adam<double> adam;
      Tensor<double>* ps[] = {&p};
      const Tensor<double>* gs[] = {&g};
      adam.step(ps, gs);
      const double expected = 0.002 * std::abs(g0) / (std::abs(g0) + 1e-8);
      CHECK(std::abs(1.0 - p[0]) == doctest::Approx(expected).epsilon(1e-12));
      CHECK((p[0] < 1.0) == (g0 > 0.0));
    }
  }
  SUBCASE("three-step scalar trace matches a hand recurrence") {
    const double grads[] = {0.3, -1.2, 0.7};
    Tensor<double> p({1}, 0.25);
    Adam<double> adam;
    double x = 0.25, m = 0.0, v = 0.0;
    for (int t = 1; t <= 3; ++t) {
      Tensor<double> g({1}, grads[t - 1]);
      Tensor<double>* ps[] = {&p};
      const Tensor<double>* gs[] = {&g};
      adam.step(ps, gs);
      m = 0.5 * m + 0.5 * grads[t - 1];
      v = 0.9 * v + 0.1 * grads[t - 1] * grads[t - 1];
      const double mh = m / (1.0 - std::pow(0.5, t));
      const double vh = v / (1.0 - std::pow(0.9, t));
      x -= 0.002 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(std::abs(p[0] - x) < 1e-7);
    }
    CHECK(adam.state().step == 3);
  }
  SUBCASE("non-finite gradient aborts without changes") {
    Tensor<double> p({2}, 1.0), q({1}, 1.0), g({2}, 0.5), bad({1}, NAN);
    Adam<double> adam;
    Tensor<double>* ps[] = {&p, &q};
    const Tensor<double>* gs[] = {&g, &bad};
    CHECK_THROWS_AS(adam.step(ps, gs), NumericError);
    CHECK(p[0] == 1.0);
    CHECK(adam.state().step == 0);
  }
}

TEST_CASE("clamp_neuron_params") {
  auto p = core::LifParams<double>::uniform(1, 1.2, -0.1, -0.5);
  clamp_neuron_params(p);
  CHECK(p.alpha[0] == 0.999);
  CHECK(p.beta[0] == 0.0);
  CHECK(p.threshold[0] == 0.01);
  auto q = core::LifParams<double>::uniform(2, 0.3, 0.5, 1.1);
  const auto before = q;
  clamp_neuron_params(q);
  CHECK(q.alpha == before.alpha);
  CHECK(q.beta == before.beta);
  CHECK(q.threshold == before.threshold);
}
