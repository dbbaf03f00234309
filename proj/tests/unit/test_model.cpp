#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fairmine/checkpoint.hpp"
#include "fairmine/model.hpp"
#include "support/oracles.hpp"

using namespace fairmine;

namespace {

NetworkShape small_shape(Activation a = Activation::Tanh) { return {6, {8, 5}, a}; }

}  // namespace

TEST_CASE("forward is unit norm and matches the direct oracle") {
  Rng rng(1);
  for (Activation act : {Activation::Tanh, Activation::Relu}) {
    EmbeddingNetwork net(NetworkShape{32, {64, 32}, act}, rng);
    for (int i = 0; i < 1000; ++i) {
      const auto x = oracle::random_vector(32, rng);
      const auto e = net.forward(x);
      double norm = 0.0;
      for (double v : e.values()) norm += v * v;
      CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-12);
      const auto ref = oracle::forward(net, x);
      for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(e.values()[k] - ref[k]) < 1e-12);
      if (i == 0) {
        const auto again = net.forward(x);
        CHECK(std::equal(again.values().begin(), again.values().end(), e.values().begin()));
      }
    }
  }
}

TEST_CASE("zero-weight network output depends only on the last bias") {
  auto net = EmbeddingNetwork::zeros(small_shape());
  Rng rng(2);
  for (std::size_t l = 0; l < net.layer_count(); ++l)
    for (double& b : net.bias(l)) b = rng.normal();
  const auto last = net.bias(net.layer_count() - 1);
  const auto expected = normalize(Vector(last.begin(), last.end()));
  for (int i = 0; i < 5; ++i) {
    const auto e = net.forward(oracle::random_vector(6, rng));
    for (std::size_t k = 0; k < e.dim(); ++k) CHECK(e.values()[k] == doctest::Approx(expected.values()[k]).epsilon(1e-14));
  }
}

TEST_CASE("forward rejects a wrong input dimension") {
  Rng rng(3);
  EmbeddingNetwork net(small_shape(), rng);
  CHECK_THROWS_AS(net.forward(Vector(5, 1.0)), DimensionError);
}

TEST_CASE("triplet loss examples") {
  // Unit vectors placed to realize D2_ap = 0.5 and D2_an = 0.7.
  auto at_distance = [](double d2) {
    const double c = 1.0 - d2 / 2.0;
    return Embedding::from_unit({c, std::sqrt(1.0 - c * c), 0.0});
  };
  const auto a = Embedding::from_unit({1.0, 0.0, 0.0});
  CHECK(triplet_loss(a, at_distance(0.5), at_distance(0.7), 0.6) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(triplet_loss(a, at_distance(0.1), at_distance(1.5), 0.6) == 0.0);
  CHECK(triplet_loss(a, a, at_distance(0.5), 0.5) == 0.0);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto r = oracle::gradient_check(6, {8, 5}, 6, 0.6, 1e-5, rng);
    REQUIRE(r.triplets_used > 0);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("hinge-inactive minibatch gives a zero gradient") {
  Rng rng(5);
  EmbeddingNetwork net(small_shape(), rng);
  const auto x = oracle::random_vector(6, rng), y = oracle::random_vector(6, rng);
  // Anchor equals positive and the margin is tiny: loss is -D2_an + margin < 0.
  std::vector<TripletInputs> mb{{x, x, y}};
  const auto lg = loss_gradients(net, mb, 1e-9);
  CHECK(lg.active == 0);
  CHECK(lg.loss == 0.0);
  for (double g : lg.grad) CHECK(g == 0.0);
}

TEST_CASE("duplicating every triplet leaves the mean gradient unchanged") {
  Rng rng(6);
  EmbeddingNetwork net(small_shape(), rng);
  std::vector<std::vector<double>> store;
  for (int i = 0; i < 24; ++i) store.push_back(oracle::random_vector(6, rng));
  std::vector<TripletInputs> mb, doubled;
  for (int t = 0; t < 8; ++t) mb.push_back({store[3 * t], store[3 * t + 1], store[3 * t + 2]});
  doubled = mb;
  doubled.insert(doubled.end(), mb.begin(), mb.end());
  const auto a = loss_gradients(net, mb, 2.0), b = loss_gradients(net, doubled, 2.0);
  CHECK(a.active > 0);
  CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-14));
  for (std::size_t k = 0; k < a.grad.size(); ++k) CHECK(std::abs(a.grad[k] - b.grad[k]) <= 1e-14 * (1.0 + std::abs(a.grad[k])));
  CHECK_THROWS_AS(loss_gradients(net, std::vector<TripletInputs>{}, 0.6), Error);
}

TEST_CASE("first Adam step moves by lr times the sign of the gradient") {
  const std::vector<double> g{0.3, -2.0, 1e-3, 0.0};
  std::vector<double> p{1.0, 1.0, 1.0, 1.0};
  auto st = OptimizerState::for_parameters(4);
  const LrSchedule lr{1e-2, 1e-4, 100};
  adam_step(st, p, g, lr);
  CHECK(st.step == 1);
  CHECK(p[0] == doctest::Approx(1.0 - 1e-2).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(1.0 + 1e-2).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(1.0 - 1e-2).epsilon(1e-4));
  CHECK(p[3] == 1.0);
  std::vector<double> bad(3, 0.0);
  CHECK_THROWS_AS(adam_step(st, p, bad, lr), DimensionError);
}

TEST_CASE("Adam is deterministic and zero gradients leave parameters") {
  Rng rng(7);
  std::vector<double> p1 = oracle::random_vector(20, rng), p2 = p1, zero(20, 0.0);
  auto s1 = OptimizerState::for_parameters(20), s2 = s1;
  const LrSchedule lr;
  for (int i = 0; i < 10; ++i) {
    const auto g = oracle::random_vector(20, rng);
    adam_step(s1, p1, g, lr);
    adam_step(s2, p2, g, lr);
  }
  CHECK(p1 == p2);
  CHECK(s1 == s2);
  std::vector<double> p3 = oracle::random_vector(5, rng), before = p3;
  auto s3 = OptimizerState::for_parameters(5);
  adam_step(s3, p3, std::vector<double>(5, 0.0), lr);
  CHECK(p3 == before);
}

TEST_CASE("learning-rate schedule decays exponentially between endpoints") {
  const LrSchedule s{1e-3, 1e-5, 101};
  CHECK(s.at(0) == 1e-3);
  CHECK(s.at(100) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(s.at(50) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(s.at(500) == s.at(100));
}

TEST_CASE("normalization survives optimizer steps") {
  Rng rng(8);
  EmbeddingNetwork net(small_shape(), rng);
  auto st = OptimizerState::for_parameters(net.parameters().size());
  std::vector<std::vector<double>> store;
  for (int i = 0; i < 30; ++i) store.push_back(oracle::random_vector(6, rng));
  std::vector<TripletInputs> mb;
  for (int t = 0; t < 10; ++t) mb.push_back({store[3 * t], store[3 * t + 1], store[3 * t + 2]});
  for (int step = 0; step < 50; ++step) {
    const auto lg = loss_gradients(net, mb, 0.6);
    adam_step(st, net.parameters(), lg.grad, LrSchedule{1e-2, 1e-3, 50});
    for (const auto& x : store) {
      const auto e = net.forward(x);
      double n = 0.0;
      for (double v : e.values()) n += v * v;
      CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("training loss decreases on a tiny fixed dataset") {
  Rng rng(9);
  const std::size_t ids = 10, dim = 8;
  std::vector<std::vector<double>> selfie, doc;
  for (std::size_t i = 0; i < ids; ++i) {
    const auto center = oracle::random_vector(dim, rng);
    auto s = center, d = center;
    for (std::size_t k = 0; k < dim; ++k) {
      s[k] += 0.5 * rng.normal();
      d[k] = 0.8 * d[k] + 0.5 * rng.normal();
    }
    selfie.push_back(s);
    doc.push_back(d);
  }
  std::vector<TripletInputs> all;
  for (std::size_t i = 0; i < ids; ++i)
    for (std::size_t j = 0; j < ids; ++j)
      if (i != j) {
        all.push_back({selfie[i], doc[i], doc[j]});
        all.push_back({doc[i], selfie[i], selfie[j]});
      }
  EmbeddingNetwork net(NetworkShape{dim, {16, 8}, Activation::Tanh}, rng);
  auto st = OptimizerState::for_parameters(net.parameters().size());
  const std::size_t steps = 400;
  const LrSchedule lr{3e-3, 3e-4, steps};
  std::vector<double> losses;
  for (std::size_t step = 0; step < steps; ++step) {
    std::vector<TripletInputs> mb;
    for (int k = 0; k < 16; ++k) mb.push_back(all[rng.below(all.size())]);
    const auto lg = loss_gradients(net, mb, 0.6);
    losses.push_back(lg.loss);
    adam_step(st, net.parameters(), lg.grad, lr);
  }
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < steps / 10; ++i) {
    first += losses[i];
    last += losses[steps - 1 - i];
  }
  CHECK(last < first);
}

TEST_CASE("checkpoint round trip and hash check") {
  Rng rng(10);
  EmbeddingNetwork net(small_shape(), rng);
  auto st = OptimizerState::for_parameters(net.parameters().size());
  adam_step(st, net.parameters(), oracle::random_vector(net.parameters().size(), rng), LrSchedule{});
  const auto path = std::filesystem::temp_directory_path() / "fairmine_test_ckpt.fmck";
  save_checkpoint(path, make_checkpoint(0xabcdef, net, st, "{\"k\":1}"));
  const auto ck = load_checkpoint(path, 0xabcdef);
  CHECK(ck.network() == net);
  CHECK(ck.optimizer == st);
  CHECK(ck.run_state == "{\"k\":1}");
  CHECK_THROWS_AS(load_checkpoint(path, 0xabcdee), ConfigError);
  std::filesystem::remove(path);
}
