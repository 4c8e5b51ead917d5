#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "spfc/error.hpp"
#include "spfc/operators.hpp"
#include "spfc/rng.hpp"

using namespace spfc;

namespace {

constexpr std::size_t kDraws = 200000;

double empirical_mean(double z, const OperatorSpec& spec, std::size_t draws,
                      std::uint64_t seed) {
  RngStream rng = derive_stream(seed, 0, 0);
  double acc = 0.0;
  for (std::size_t i = 0; i < draws; ++i) acc += apply_operator(z, spec, rng);
  return acc / double(draws);
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(OperatorSpec{OperatorKind::OneBitQuantize, 0.0}.validate(),
                  Error);
  CHECK_THROWS_AS(OperatorSpec{OperatorKind::OneBitQuantize, -1.0}.validate(),
                  Error);
  CHECK_THROWS_AS((OperatorSpec{OperatorKind::Prune, 1.0, 0.0}.validate()),
                  Error);
  CHECK_THROWS_AS((OperatorSpec{OperatorKind::Prune, 1.0, 1.5}.validate()),
                  Error);
  CHECK_NOTHROW((OperatorSpec{OperatorKind::Prune, 1.0, 1.0}.validate()));
  // c is irrelevant for pure quantization
  CHECK_NOTHROW((OperatorSpec{OperatorKind::OneBitQuantize, 1.0, 7.0}.validate()));
}

TEST_CASE("kind names round-trip") {
  for (auto kind : {OperatorKind::OneBitQuantize, OperatorKind::Prune,
                    OperatorKind::QuantizePrune, OperatorKind::RtnOneBit,
                    OperatorKind::Identity})
    CHECK(operator_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(operator_kind_from_string("bogus"), Error);
}

TEST_CASE("deviation bounds per kind") {
  CHECK(deviation_bound({OperatorKind::OneBitQuantize, 1.0}).M == 4.0);
  CHECK(deviation_bound({OperatorKind::OneBitQuantize, 2.0}).M == 8.0);
  CHECK(deviation_bound({OperatorKind::Prune, 1.0, 0.5}).M == 1.0);
  CHECK(deviation_bound({OperatorKind::QuantizePrune, 1.0, 0.5}).M == 2.0);
  CHECK(deviation_bound({OperatorKind::Identity, 1.0}).M == 0.0);
  CHECK(deviation_bound({OperatorKind::OneBitQuantize, 1.0}).bounded);
  CHECK_FALSE(deviation_bound({OperatorKind::RtnOneBit, 1.0}).bounded);
}

TEST_CASE("onebit quantizer: alphabet points are fixed points") {
  OperatorSpec spec{OperatorKind::OneBitQuantize, 1.0};
  RngStream rng = derive_stream(1, 0, 0);
  for (double z : {2.0, -2.0, 6.0, -10.0})
    for (int i = 0; i < 50; ++i) CHECK(quantize_onebit(z, spec, rng) == z);
}

TEST_CASE("onebit quantizer at z=0: +-2K with probability 1/2") {
  OperatorSpec spec{OperatorKind::OneBitQuantize, 1.0};
  RngStream rng = derive_stream(2, 0, 0);
  std::size_t plus = 0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    const double q = quantize_onebit(0.0, spec, rng);
    REQUIRE((q == 2.0 || q == -2.0));
    if (q == 2.0) ++plus;
  }
  const double freq = double(plus) / double(kDraws);
  const double sigma = std::sqrt(0.25 / double(kDraws));
  CHECK(std::abs(freq - 0.5) <= 3 * sigma);
  CHECK(std::abs(empirical_mean(0.0, spec, kDraws, 3)) <=
        4.0 * 4.0 / std::sqrt(double(kDraws)));
}

TEST_CASE("onebit quantizer at z=1: -2 w.p. 1/4, +2 w.p. 3/4") {
  OperatorSpec spec{OperatorKind::OneBitQuantize, 1.0};
  RngStream rng = derive_stream(4, 0, 0);
  std::size_t plus = 0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    const double q = quantize_onebit(1.0, spec, rng);
    REQUIRE((q == 2.0 || q == -2.0));
    if (q == 2.0) ++plus;
  }
  const double freq = double(plus) / double(kDraws);
  const double sigma = std::sqrt(0.75 * 0.25 / double(kDraws));
  CHECK(std::abs(freq - 0.75) <= 3 * sigma);
}

TEST_CASE("pruner: pass-through, zero, and resampling") {
  OperatorSpec spec{OperatorKind::Prune, 1.0, 0.5};
  RngStream rng = derive_stream(5, 0, 0);

  for (int i = 0; i < 50; ++i) CHECK(prune(0.8, spec, rng) == 0.8);
  for (int i = 0; i < 50; ++i) CHECK(prune(0.0, spec, rng) == 0.0);

  std::size_t nonzero = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    const double q = prune(0.3, spec, rng);
    if (q != 0.0) {
      ++nonzero;
      REQUIRE(q >= 0.5);
      REQUIRE(q <= 1.0);
    }
    acc += q;
  }
  const double p_nonzero = 2.0 * 0.3 / 1.5;  // 0.4
  const double freq = double(nonzero) / double(kDraws);
  CHECK(std::abs(freq - p_nonzero) <=
        3 * std::sqrt(p_nonzero * (1 - p_nonzero) / double(kDraws)));
  CHECK(std::abs(acc / double(kDraws) - 0.3) <=
        4.0 * 1.0 / std::sqrt(double(kDraws)));

  // negative input resamples with negative sign
  for (std::size_t i = 0; i < 1000; ++i) {
    const double q = prune(-0.3, spec, rng);
    CHECK(q <= 0.0);
  }
}

TEST_CASE("quantize-prune: grid support and closed-form two-stage law") {
  OperatorSpec spec{OperatorKind::QuantizePrune, 1.0, 0.5};
  RngStream rng = derive_stream(6, 0, 0);

  for (int i = 0; i < 50; ++i) CHECK(quantize_prune(2.0, spec, rng) == 2.0);

  CHECK(std::abs(empirical_mean(0.0, spec, kDraws, 7)) <=
        4.0 * 2.0 / std::sqrt(double(kDraws)));

  // z = 0.3: support {0, 2}, P(2) = E[S(z)]/2K = 0.15 by the tower property
  std::size_t hits = 0;
  for (std::size_t i = 0; i < kDraws; ++i) {
    const double q = quantize_prune(0.3, spec, rng);
    REQUIRE((q == 0.0 || q == 2.0));
    if (q == 2.0) ++hits;
  }
  const double freq = double(hits) / double(kDraws);
  CHECK(std::abs(freq - 0.15) <=
        3 * std::sqrt(0.15 * 0.85 / double(kDraws)));
}

TEST_CASE("rtn: nearest alphabet element, ties toward +inf") {
  OperatorSpec spec{OperatorKind::RtnOneBit, 1.0};
  CHECK(rtn(0.9, spec) == 2.0);
  CHECK(rtn(-0.9, spec) == -2.0);
  CHECK(rtn(0.0, spec) == 2.0);   // midpoint
  CHECK(rtn(4.0, spec) == 6.0);   // midpoint between 2 and 6
  CHECK(rtn(-4.0, spec) == -2.0);
  CHECK(rtn(5.9, spec) == 6.0);
  CHECK(rtn(2.0, spec) == 2.0);
}

TEST_CASE("identity returns its argument") {
  OperatorSpec spec{OperatorKind::Identity, 1.0};
  RngStream rng = derive_stream(8, 0, 0);
  CHECK(apply_operator(0.123, spec, rng) == 0.123);
  CHECK(rng.counter() == 0);  // consumes no randomness
}

TEST_CASE("non-finite inputs are rejected") {
  RngStream rng = derive_stream(9, 0, 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(
      quantize_onebit(inf, {OperatorKind::OneBitQuantize, 1.0}, rng), Error);
  CHECK_THROWS_AS(prune(nan, {OperatorKind::Prune, 1.0, 0.5}, rng), Error);
  CHECK_THROWS_AS(
      quantize_prune(-inf, {OperatorKind::QuantizePrune, 1.0, 0.5}, rng),
      Error);
  CHECK_THROWS_AS(rtn(nan, {OperatorKind::RtnOneBit, 1.0}), Error);
}

TEST_CASE("unbiasedness across a z-grid, every stochastic kind") {
  const std::vector<OperatorSpec> specs = {
      {OperatorKind::OneBitQuantize, 1.0},
      {OperatorKind::Prune, 1.0, 0.5},
      {OperatorKind::QuantizePrune, 1.0, 0.5},
  };
  const std::size_t draws = 50000;
  for (const auto& spec : specs) {
    const double M = deviation_bound(spec).M;
    for (double z = -3.0; z <= 3.0; z += 0.5) {
      const double mean =
          empirical_mean(z, spec, draws, 1000 + std::uint64_t(10 * (z + 4)));
      CHECK(std::abs(mean - z) <= 4.0 * M / std::sqrt(double(draws)));
    }
  }
}

TEST_CASE("deviation bound holds for every draw") {
  const std::vector<OperatorSpec> specs = {
      {OperatorKind::OneBitQuantize, 1.0},
      {OperatorKind::Prune, 1.0, 0.5},
      {OperatorKind::QuantizePrune, 1.0, 0.5},
      {OperatorKind::Identity, 1.0},
  };
  for (const auto& spec : specs) {
    const double M = deviation_bound(spec).M;
    RngStream zgen = derive_stream(11, 0, 0);
    RngStream rng = derive_stream(12, 0, 0);
    for (std::size_t i = 0; i < 100000; ++i) {
      const double z = 8.0 * zgen.next_double() - 4.0;
      const double q = apply_operator(z, spec, rng);
      REQUIRE(std::abs(q - z) <= M);
      REQUIRE(on_alphabet(q, spec));
    }
  }
}

TEST_CASE("identical stream state gives identical output") {
  OperatorSpec spec{OperatorKind::QuantizePrune, 1.0, 0.5};
  RngStream a = derive_stream(13, 2, 3);
  RngStream b = derive_stream(13, 2, 3);
  for (int i = 0; i < 200; ++i) {
    const double z = -1.5 + 0.01 * i;
    CHECK(apply_operator(z, spec, a) == apply_operator(z, spec, b));
  }
}
