#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "snnse/core/layers.hpp"
#include "snnse/core/lif.hpp"
#include "snnse/core/spike_stats.hpp"
#include "snnse/engine/loss.hpp"
#include "snnse/engine/ops.hpp"
#include "snnse/engine/tape.hpp"
#include "snnse/error.hpp"
#include "support/fd.hpp"

using namespace snnse;
using namespace snnse::core;
using engine::Tape;
using engine::Tensor;
using engine::VarId;
using snnse::testing::numeric_gradient;
using snnse::testing::random_tensor;
using snnse::testing::relative_error;

namespace {

// Independent scalar recurrence for one neuron.
struct ScalarLif {
  double alpha, beta, threshold;
  double current = 0.0, membrane = 0.0;

  double step(double drive) {
    const double spike = membrane >= threshold ? 1.0 : 0.0;
    const double next_membrane = beta * membrane + current - threshold * spike;
    current = alpha * current + drive;
    membrane = next_membrane;
    return spike;
  }
};

}  // namespace

TEST_CASE("LIF hand trace") {
  auto params = LifParams<double>::uniform(1, 0.0, 0.5, 1.0);
  auto state = LifState<double>::zeros(1, 1);
  const Tensor<double> drive({1, 1}, 0.6);
  const double expected_u[] = {0.0, 0.0, 0.6, 0.9, 1.05, 0.125};
  for (int t = 0; t < 5; ++t) {
    CHECK(std::abs(state.membrane[0] - expected_u[t]) < 1e-7);
    const auto s = lif_step(state, params, drive);
    CHECK(s[0] == (t == 4 ? 1.0 : 0.0));
  }
  CHECK(std::abs(state.membrane[0] - expected_u[5]) < 1e-7);
}

TEST_CASE("LIF matches the scalar recurrence over 1000 random steps") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d(0.4, 0.8);
  const std::size_t L = 3, C = 2;
  LifParams<double> params{Tensor<double>({C}, std::vector<double>{0.3, 0.7}),
                           Tensor<double>({C}, std::vector<double>{0.5, 0.9}),
                           Tensor<double>({C}, std::vector<double>{1.0, 0.4})};
  auto state = LifState<double>::zeros(L, C);
  std::vector<ScalarLif> oracle;
  for (std::size_t j = 0; j < L * C; ++j) {
    const std::size_t c = j % C;
    oracle.push_back({params.alpha[c], params.beta[c], params.threshold[c]});
  }
  std::size_t spikes = 0;
  for (int t = 0; t < 1000; ++t) {
    Tensor<double> drive({L, C});
    for (auto& v : drive.storage()) v = d(rng);
    const auto s = lif_step(state, params, drive);
    for (std::size_t j = 0; j < L * C; ++j) {
      REQUIRE(s[j] == oracle[j].step(drive[j]));
      REQUIRE(std::abs(state.membrane[j] - oracle[j].membrane) < 1e-6);
      REQUIRE(std::abs(state.current[j] - oracle[j].current) < 1e-6);
      spikes += static_cast<std::size_t>(s[j]);
    }
  }
  CHECK(spikes > 100);
}

TEST_CASE("LIF edge cases") {
  SUBCASE("zero drive never spikes") {
    auto params = LifParams<float>::uniform(2, 0.5f, 0.5f, 1.0f);
    auto state = LifState<float>::zeros(4, 2);
    const Tensor<float> zero({4, 2});
    for (int t = 0; t < 50; ++t) {
      const auto s = lif_step(state, params, zero);
      for (float v : s.values()) REQUIRE(v == 0.0f);
      for (float v : state.membrane.values()) REQUIRE(v == 0.0f);
    }
  }
  SUBCASE("membrane exactly at threshold spikes and resets") {
    auto params = LifParams<double>::uniform(1, 0.0, 0.5, 1.0);
    LifState<double> state{Tensor<double>({1, 1}, 0.0), Tensor<double>({1, 1}, 1.0)};
    const auto s = lif_step(state, params, Tensor<double>({1, 1}));
    CHECK(s[0] == 1.0);
    CHECK(state.membrane[0] == 0.5 - 1.0);
  }
  SUBCASE("non-finite drive is rejected") {
    auto params = LifParams<double>::uniform(1, 0.0, 0.5, 1.0);
    auto state = LifState<double>::zeros(1, 1);
    CHECK_THROWS_AS(lif_step(state, params, Tensor<double>({1, 1}, NAN)), NumericError);
    CHECK_THROWS_AS(lif_step(state, params, Tensor<double>({2, 1})), ShapeError);
  }
  SUBCASE("subthreshold dynamics are linear") {
    const double inf = std::numeric_limits<double>::infinity();
    auto params = LifParams<double>::uniform(1, 0.6, 0.8, inf);
    auto a = LifState<double>::zeros(1, 1), b = LifState<double>::zeros(1, 1);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> d;
    for (int t = 0; t < 40; ++t) {
      const double x = d(rng);
      lif_step(a, params, Tensor<double>({1, 1}, x));
      lif_step(b, params, Tensor<double>({1, 1}, 2.0 * x));
      REQUIRE(b.membrane[0] == 2.0 * a.membrane[0]);
    }
  }
  SUBCASE("reset state reproduces a fresh run") {
    auto params = LifParams<double>::uniform(3, 0.2, 0.6, 0.7);
    std::mt19937_64 rng(4);
    std::vector<Tensor<double>> seq_a, seq_b;
    for (int t = 0; t < 20; ++t) {
      seq_a.push_back(random_tensor({2, 3}, rng));
      seq_b.push_back(random_tensor({2, 3}, rng));
    }
    auto state = LifState<double>::zeros(2, 3);
    for (const auto& x : seq_a) lif_step(state, params, x);
    state.reset();
    auto fresh = LifState<double>::zeros(2, 3);
    for (const auto& x : seq_b) {
      REQUIRE(lif_step(state, params, x) == lif_step(fresh, params, x));
    }
    CHECK(state.membrane == fresh.membrane);
  }
}

TEST_CASE("arctan surrogate") {
  CHECK(arctan_surrogate_grad(0.0) == 1.0);
  CHECK(arctan_surrogate_grad(1.0 / std::numbers::pi) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(arctan_surrogate_grad(0.0, SurrogateConfig{2.0}) == 0.5);
  for (double x : {0.1, 0.7, 3.0, 25.0}) {
    CHECK(arctan_surrogate_grad(x) == arctan_surrogate_grad(-x));
    const double h = 1e-6;
    const double fd = (arctan_sigmoid(x + h, {0.5}) - arctan_sigmoid(x - h, {0.5})) / (2 * h);
    CHECK(fd == doctest::Approx(arctan_surrogate_grad(x, {0.5})).epsilon(1e-6));
  }
  CHECK(arctan_sigmoid(0.0) == 0.5);
  CHECK_THROWS(SurrogateConfig{0.0}.validate());
  CHECK_THROWS(SurrogateConfig{-1.0}.validate());
}

TEST_CASE("spike_node_backward") {
  SpikeOptions opts;
  opts.surrogate.width = 2.0;
  const auto at_threshold = engine::spike_node_backward(1.0, 0.0, 0.8, 0.8, opts);
  CHECK(at_threshold.membrane == 0.5);
  CHECK(at_threshold.threshold == -0.5);
  const auto none = engine::spike_node_backward(0.0, 0.0, 0.3, 0.8, opts);
  CHECK(none.membrane == 0.0);
  CHECK(none.threshold == 0.0);

  // The reset path only feeds the surrogate when not detached.
  opts.detach_reset = true;
  const auto detached = engine::spike_node_backward(0.0, 1.0, 1.0, 0.8, opts);
  CHECK(detached.membrane == 0.0);
  CHECK(detached.threshold == -1.0);  // -S * dL/dU(t+1), S = 1
  opts.detach_reset = false;
  const auto attached = engine::spike_node_backward(0.0, 1.0, 1.0, 0.8, opts);
  const double g = arctan_surrogate_grad(0.2, opts.surrogate);
  CHECK(attached.membrane == doctest::Approx(-0.8 * g));
  CHECK(attached.threshold == doctest::Approx(0.8 * g - 1.0));
}

namespace {

// T relaxed LIF steps of a single conv layer on the tape; returns the last
// membrane concatenated with the spike sum through scale_shift.
struct LifGraph {
  Tensor<double> w, b, alpha, beta, threshold;
  std::vector<Tensor<double>> inputs;
  SpikeOptions opts;

  VarId build(Tape<double>& t, std::vector<VarId>& p, bool track,
              std::vector<VarId>* spikes = nullptr) const {
    auto leaf = [&](const Tensor<double>& v) { return track ? t.input(v) : t.constant(v); };
    p = {leaf(w), leaf(b), leaf(alpha), leaf(beta), leaf(threshold)};
    const std::size_t L = inputs[0].dim(0), C = w.dim(2);
    VarId cur = t.constant(Tensor<double>({L, C})), mem = t.constant(Tensor<double>({L, C}));
    VarId acc = 0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      const VarId drive = engine::conv1d(t, t.constant(inputs[s]), p[0], p[1], engine::ConvGeometry{3, 1});
      const auto v = engine::lif_step(t, cur, mem, drive, p[2], p[3], p[4], opts);
      cur = v.current;
      mem = v.membrane;
      if (spikes) spikes->push_back(v.spikes);
      const VarId scaled = engine::scale_shift(t, v.spikes, 1.0 + static_cast<double>(s), 0.0);
      acc = s == 0 ? scaled : engine::concat_channels(t, acc, scaled);
    }
    return engine::concat_channels(t, acc, mem);
  }
};

}  // namespace

TEST_CASE("relaxed LIF layer gradients match finite differences") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t L = 2 + rng() % 4, cin = 1 + rng() % 2, C = 1 + rng() % 3, T = 2 + rng() % 3;
    LifGraph g;
    g.w = random_tensor({3, cin, C}, rng, 0.6);
    g.b = random_tensor({C}, rng, 0.2);
    g.alpha = random_tensor({C}, rng, 0.1, 0.4);
    g.beta = random_tensor({C}, rng, 0.1, 0.5);
    g.threshold = random_tensor({C}, rng, 0.1, 0.8);
    for (std::size_t t = 0; t < T; ++t) g.inputs.push_back(random_tensor({L, cin}, rng));
    g.opts.mode = SpikeMode::kRelaxed;
    g.opts.detach_reset = false;
    const auto ref = random_tensor({L, C * (T + 1)}, rng);

    Tape<double> tape;
    std::vector<VarId> p;
    tape.backward(engine::lsd(tape, g.build(tape, p, true), ref));
    auto loss = [&] {
      Tape<double> t;
      std::vector<VarId> q;
      return engine::lsd_value(t.value(g.build(t, q, false)), ref);
    };
    Tensor<double>* params[] = {&g.w, &g.b, &g.alpha, &g.beta, &g.threshold};
    for (std::size_t i = 0; i < 5; ++i) {
      INFO("parameter " << i);
      REQUIRE(relative_error(tape.grad(p[i]), numeric_gradient(*params[i], loss)) < 1e-3);
    }
  }
}

TEST_CASE("spike backward never reads the stored spikes") {
  std::mt19937_64 rng(31);
  for (bool detach : {true, false}) {
    LifGraph g;
    g.w = random_tensor({3, 2, 4}, rng, 1.0);
    g.b = random_tensor({4}, rng, 0.3, 0.5);
    g.alpha = Tensor<double>({4}, 0.3);
    g.beta = Tensor<double>({4}, 0.6);
    g.threshold = Tensor<double>({4}, 0.5);
    for (int t = 0; t < 4; ++t) g.inputs.push_back(random_tensor({5, 2}, rng));
    g.opts.detach_reset = detach;
    const auto ref = random_tensor({5, 4 * 5}, rng);

    auto gradients = [&](bool corrupt) {
      Tape<double> tape;
      std::vector<VarId> p;
      std::vector<VarId> spikes;
      const VarId out = g.build(tape, p, true, &spikes);
      if (corrupt) {
        for (VarId v : spikes) {
          for (auto& x : tape.mutable_value_for_testing(v).storage()) x = 1.0 - x;
        }
      }
      tape.backward(engine::lsd(tape, out, ref));
      std::vector<Tensor<double>> out_grads;
      for (VarId id : p) out_grads.push_back(tape.grad(id));
      return out_grads;
    };
    const auto clean = gradients(false);
    const auto corrupted = gradients(true);
    for (std::size_t i = 0; i < clean.size(); ++i) CHECK(clean[i] == corrupted[i]);
  }
}

TEST_CASE("encoder layer") {
  std::mt19937_64 rng(41);
  SpikingLayer<double> layer{ConvWeights<double>::zeros({5, 2}, 3, 4),
                             LifParams<double>::uniform(4, 0.05, 0.05, 1.0)};
  layer.conv.weight = random_tensor({5, 3, 4}, rng, 2.0);
  SUBCASE("zero input and state give no spikes") {
    auto state = LifState<double>::zeros(129, 4);
    const auto s = encoder_layer_forward(Tensor<double>({257, 3}), layer, state);
    CHECK(s.shape() == engine::Shape{129, 4});
    for (double v : s.values()) CHECK(v == 0.0);
  }
  SUBCASE("outputs are binary") {
    auto state = LifState<double>::zeros(129, 4);
    std::size_t ones = 0;
    for (int t = 0; t < 6; ++t) {
      const auto s = encoder_layer_forward(random_tensor({257, 3}, rng, 3.0), layer, state);
      for (double v : s.values()) {
        REQUIRE((v == 0.0 || v == 1.0));
        ones += v == 1.0;
      }
    }
    CHECK(ones > 0);
  }
  SUBCASE("state shape must match the output") {
    auto state = LifState<double>::zeros(128, 4);
    CHECK_THROWS_AS(encoder_layer_forward(Tensor<double>({257, 3}), layer, state), ShapeError);
  }
}

TEST_CASE("decoder layer") {
  Tensor<double> in({3, 1}, std::vector<double>{1, 0, 1});
  Tensor<double> skip5({5, 2}, 0.0), skip6({6, 2}, 0.0), skip4({4, 2}, 0.0);
  const auto x = decoder_input(in, skip5);
  CHECK(x.shape() == engine::Shape{5, 3});
  CHECK(x.at(0, 0) == 1.0);
  CHECK(x.at(1, 0) == 1.0);
  CHECK(x.at(2, 0) == 0.0);
  CHECK(x.at(4, 0) == 1.0);
  CHECK(decoder_input(in, skip6).dim(0) == 6);
  CHECK_THROWS_AS(decoder_input(in, skip4), ShapeError);

  std::mt19937_64 rng(42);
  SpikingLayer<double> layer{ConvWeights<double>::zeros({5, 1}, 3, 2),
                             LifParams<double>::uniform(2, 0.05, 0.05, 1.0)};
  layer.conv.weight = random_tensor({5, 3, 2}, rng);
  auto state = LifState<double>::zeros(5, 2);
  for (int t = 0; t < 4; ++t) {
    const auto s = decoder_layer_forward(Tensor<double>({3, 1}), skip5, layer, state);
    for (double v : s.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("readout integrator") {
  ReadoutLayer<double> layer{ConvWeights<double>::zeros({1, 1}, 1, 1), Tensor<double>({1}, 0.0)};
  layer.conv.weight[0] = 1.0;
  Tensor<double> membrane({3, 1});
  SUBCASE("beta zero is memoryless") {
    for (double c : {0.5, -2.0, 3.0}) {
      const auto o = readout_forward(Tensor<double>({3, 1}, c), layer, membrane);
      for (double v : o.values()) CHECK(v == c);
    }
  }
  SUBCASE("constant drive converges to c / (1 - beta)") {
    layer.beta[0] = 0.5;
    Tensor<double> o;
    for (int t = 0; t < 60; ++t) o = readout_forward(Tensor<double>({3, 1}, 0.3), layer, membrane);
    for (double v : o.values()) CHECK(v == doctest::Approx(0.6).epsilon(1e-12));
  }
  SUBCASE("zero drive gives zero output") {
    layer.beta[0] = 0.9;
    const auto o = readout_forward(Tensor<double>({3, 1}), layer, membrane);
    for (double v : o.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("spike_stats counts") {
  auto record_with = [](std::size_t L, std::size_t C, std::size_t T, float fill) {
    SpikeRecord r;
    r.layers.push_back({"l", L, C, std::vector<float>(L * C * T, fill)});
    return r;
  };
  SUBCASE("all zero") {
    auto r = record_with(4, 3, 5, 0.0f);
    r.projections.push_back({0, "next", Routing::kDirect, 4, {3, 1}, 2});
    const auto s = spike_stats(r);
    CHECK(s.layers[0].firing_rate == 0.0);
    CHECK(s.total_synops == 0);
  }
  SUBCASE("all ones") {
    const auto s = spike_stats(record_with(4, 3, 5, 1.0f));
    CHECK(s.layers[0].firing_rate == 1.0);
    CHECK(s.layers[0].spikes == 60);
  }
  SUBCASE("a single spike") {
    auto r = record_with(4, 3, 5, 0.0f);
    r.layers[0].values[17] = 1.0f;
    const auto s = spike_stats(r);
    CHECK(s.layers[0].firing_rate == doctest::Approx(1.0 / 60.0));
  }
  SUBCASE("non-binary values are rejected") {
    auto r = record_with(2, 2, 2, 0.0f);
    r.layers[0].values[3] = 0.5f;
    CHECK_THROWS_AS(spike_stats(r), IntegrityError);
  }
}

TEST_CASE("fan_out counts covering output positions") {
  const engine::ConvGeometry g{5, 2};
  // 9 inputs -> 5 outputs; output o covers inputs [2o - 2, 2o + 2].
  CHECK(fan_out(0, 9, g, 7) == 2 * 7);  // o = 0, 1
  CHECK(fan_out(4, 9, g, 7) == 3 * 7);  // o = 1, 2, 3
  CHECK(fan_out(8, 9, g, 7) == 2 * 7);  // o = 3, 4
  std::uint64_t total = 0;
  for (std::size_t p = 0; p < 9; ++p) total += fan_out(p, 9, g, 1);
  // Every output position sees exactly the in-range taps.
  std::uint64_t taps = 0;
  for (long o = 0; o < 5; ++o) {
    for (long k = 0; k < 5; ++k) taps += (2 * o - 2 + k >= 0 && 2 * o - 2 + k < 9);
  }
  CHECK(total == taps);
}
