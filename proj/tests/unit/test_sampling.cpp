#include <doctest.h>

#include <cmath>

#include "fairmine/datagen.hpp"
#include "fairmine/sampling.hpp"

using namespace fairmine;

namespace {

const Dataset& default_dataset() {
  static const Dataset ds = [] {
    GeneratorConfig c;
    c.n_pairs = 50000;
    return generate_dataset(c);
  }();
  return ds;
}

}  // namespace

TEST_CASE("presets") {
  const auto adj = continent_adjusted_weights();
  CHECK(adj == Vector{1, 1, 3, 3, 1, 1});
  const auto ctry = country_adjusted_weights();
  const auto& tax = GroupTaxonomy::canonical();
  CHECK(ctry[tax.country("US").value] == 1.0);
  CHECK(ctry[tax.country("CA").value] == 1.0);
  CHECK(ctry[tax.country("BR").value] == 4.0);
  CHECK(ctry[tax.country("AM_REM").value] == 4.0);
  CHECK(ctry[tax.country("NG").value] == 4.0);
  CHECK(ctry[tax.country("TH").value] == 4.0);
  CHECK(ctry[tax.country("FR").value] == 1.0);
  CHECK(ctry[tax.country("OC").value] == 1.0);
  CHECK(ctry[tax.country("UNK").value] == 1.0);
}

TEST_CASE("probabilities") {
  const Dataset& ds = default_dataset();
  const auto p = probabilities(SamplerSpec::fixed(Axis::Continent, continent_adjusted_weights()), ds);
  CHECK(p[static_cast<std::size_t>(Continent::AF)] == doctest::Approx(0.3).epsilon(1e-12));
  for (double x : probabilities(SamplerSpec::fixed(Axis::Continent, equal_weights(Axis::Continent)), ds))
    CHECK(x == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  const auto nat = probabilities(SamplerSpec::natural(), ds);
  const double af = nat[static_cast<std::size_t>(Continent::AF)];
  CHECK(std::abs(af - 0.005) < 4.0 * std::sqrt(0.005 * 0.995 / 50000.0));
  CHECK_THROWS_AS(probabilities(SamplerSpec::fixed(Axis::Continent, Vector(6, 0.0)), ds), ConfigError);
  CHECK_THROWS_AS(probabilities(SamplerSpec::fixed(Axis::Continent, Vector(5, 1.0)), ds), ConfigError);
}

TEST_CASE("probabilities sum to one and are scale invariant") {
  Rng rng(3);
  const Dataset& ds = default_dataset();
  for (int trial = 0; trial < 200; ++trial) {
    Vector w(kCountryCount);
    for (double& x : w) x = rng.uniform() < 0.2 ? 0.0 : rng.uniform() * 10.0;
    w[rng.below(kCountryCount)] = 1.0;
    const auto p = probabilities(SamplerSpec::fixed(Axis::Country, w), ds);
    double s = 0.0;
    for (double x : p) s += x;
    CHECK(std::abs(s - 1.0) < 1e-12);
    const double c = std::exp(rng.normal() * 5.0);
    Vector scaled = w;
    for (double& x : scaled) x *= c;
    const auto q = probabilities(SamplerSpec::fixed(Axis::Country, scaled), ds);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - q[i]) < 1e-12);
  }
}

TEST_CASE("raw dynamic weights") {
  const double lambda = std::log10(4.0);
  const auto w = raw_dynamic_weights(Vector{1e-3, 1e-2, 0.0, 1e-3}, lambda, 1e-6);
  CHECK(std::abs(w[1] / w[0] - 4.0) < 1e-12);
  CHECK(w[0] == w[3]);
  CHECK(w[2] == std::pow(1e-6, lambda));
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector far{rng.uniform(), rng.uniform()};
    const auto r = raw_dynamic_weights(far, lambda, 1e-9);
    if (far[0] >= far[1]) CHECK(r[0] >= r[1]);
  }
}

TEST_CASE("dynamic update arithmetic") {
  DynamicState s = DynamicState::uniform(2, 1.0, 0.2);
  s.weights = {0.5, 0.25};
  const auto next = update_dynamic_weights(s, Vector{1.0, 0.25}, 1e-6);
  CHECK(next.weights[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(next.weights[1] == 0.25);  // raw == previous: exact fixed point
  CHECK(next.epoch == 1);

  DynamicState one = DynamicState::uniform(3, std::log10(4.0), 1.0);
  const Vector far{0.1, 0.01, 0.0};
  const auto raw = raw_dynamic_weights(far, one.exponent, 1e-5);
  CHECK(update_dynamic_weights(one, far, 1e-5).weights == raw);
  CHECK_THROWS_AS(update_dynamic_weights(one, Vector{0.1}, 1e-5), DimensionError);
  CHECK_THROWS_AS(update_dynamic_weights(one, far, 0.0), ConfigError);
}

TEST_CASE("constant FAR input converges geometrically") {
  DynamicState s = DynamicState::uniform(3);
  const Vector far{0.2, 0.02, 0.002};
  const auto target = raw_dynamic_weights(far, s.exponent, 1e-6);
  double prev_err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) prev_err = std::max(prev_err, std::abs(s.weights[i] - target[i]));
  for (int t = 0; t < 30; ++t) {
    s = update_dynamic_weights(s, far, 1e-6);
    double err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) err = std::max(err, std::abs(s.weights[i] - target[i]));
    CHECK(err <= (1.0 - s.smoothing) * prev_err * (1.0 + 1e-9) + 1e-15);
    prev_err = err;
  }
}

TEST_CASE("homogeneous group choice") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) CHECK(choose_homogeneous_group(Vector{0, 0, 2, 0}, rng) == 2);
  const int n = 10000;
  int a = 0;
  for (int i = 0; i < n; ++i) a += choose_homogeneous_group(Vector{3, 1}, rng) == 0;
  CHECK(std::abs(a - 0.75 * n) < 4.0 * std::sqrt(n * 0.75 * 0.25));
  std::vector<int> counts(6, 0);
  for (int i = 0; i < n; ++i) ++counts[choose_homogeneous_group(Vector(6, 1.0), rng)];
  for (int c : counts) CHECK(std::abs(c - n / 6.0) < 4.0 * std::sqrt(n * (1.0 / 6) * (5.0 / 6)));
}

TEST_CASE("sampler validation") {
  CHECK_THROWS_AS(SamplerSpec::fixed(Axis::Continent, Vector{1, 1}).validate(), ConfigError);
  CHECK_THROWS_AS(SamplerSpec::fixed(Axis::Continent, Vector{1, 1, -1, 1, 1, 1}).validate(), ConfigError);
  auto d = SamplerSpec::dynamic_weights(Axis::Continent);
  d.state.smoothing = 0.0;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  CHECK(to_string(parse_sampler_kind("homogeneous")) == "homogeneous");
  CHECK_THROWS_AS(parse_sampler_kind("weird"), ConfigError);
}
