#include "mmoe/distribution.hpp"
#include "mmoe/errors.hpp"
#include "mmoe/rng.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace mmoe;

TEST_SUITE("distribution") {

TEST_CASE("from_probs accepts an exact simplex point") {
    const auto d = LabelDistribution::from_probs({0.25, 0.25, 0.5});
    CHECK(d.size() == 3);
    CHECK(d[0] == 0.25);
    CHECK(d[2] == 0.5);
}

TEST_CASE("from_probs renormalizes drift inside the ingest tolerance") {
    const auto d = LabelDistribution::from_probs({0.5, 0.5 + 5e-7});
    CHECK(d[0] + d[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.valid(LabelDistribution::kStrictTolerance));
}

TEST_CASE("from_probs rejects sums outside the tolerance") {
    CHECK_THROWS_AS(LabelDistribution::from_probs({0.5, 0.6}), ValidationError);
    CHECK_THROWS_AS(LabelDistribution::from_probs({0.4, 0.4}), ValidationError);
}

TEST_CASE("strict tolerance rejects what the ingest tolerance repairs") {
    CHECK_NOTHROW(LabelDistribution::from_probs({0.5, 0.5 + 5e-7}));
    CHECK_THROWS_AS(
        LabelDistribution::from_probs({0.5, 0.5 + 5e-7}, LabelDistribution::kStrictTolerance),
        ValidationError);
}

TEST_CASE("from_probs rejects degenerate and invalid rows") {
    CHECK_THROWS_AS(LabelDistribution::from_probs({1.0}), DimensionError);
    CHECK_THROWS_AS(LabelDistribution::from_probs({}), DimensionError);
    CHECK_THROWS_AS(LabelDistribution::from_probs({-0.1, 1.1}), ValidationError);
    CHECK_THROWS_AS(LabelDistribution::from_probs({0.5, std::nan("")}), NumericError);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(LabelDistribution::from_probs({inf, 0.0}), NumericError);
}

TEST_CASE("l1_distance matches hand sums") {
    const auto half = LabelDistribution::from_probs({0.5, 0.5});
    CHECK(l1_distance(half, half) == 0.0);

    const auto one = LabelDistribution::from_probs({1.0, 0.0});
    const auto two = LabelDistribution::from_probs({0.0, 1.0});
    CHECK(l1_distance(one, two) == 2.0);

    const auto a = LabelDistribution::from_probs({0.7, 0.3});
    const auto b = LabelDistribution::from_probs({0.4, 0.6});
    CHECK(l1_distance(a, b) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("l1_distance on dyadic values is exact") {
    const auto a = LabelDistribution::from_probs({0.75, 0.25});
    const auto b = LabelDistribution::from_probs({0.5, 0.5});
    CHECK(l1_distance(a, b) == 0.5);
}

TEST_CASE("l1_distance names both lengths on mismatch") {
    const auto a = LabelDistribution::from_probs({0.5, 0.5});
    const auto b = LabelDistribution::from_probs({0.2, 0.3, 0.5});
    CHECK_THROWS_WITH_AS(l1_distance(a, b),
                         "label distributions have different cardinalities: 2 vs 3",
                         DimensionError);
}

TEST_CASE("l1_distance is a metric on sampled points") {
    std::mt19937_64 g(2024);
    for (int i = 0; i < 500; ++i) {
        const std::size_t k = 2 + uniform_index(g, 9);
        const auto x = LabelDistribution::from_probs(sample_simplex(g, k));
        const auto y = LabelDistribution::from_probs(sample_simplex(g, k));
        const auto z = LabelDistribution::from_probs(sample_simplex(g, k));
        const double dxy = l1_distance(x, y);
        CHECK(dxy >= 0.0);
        CHECK(dxy <= 2.0);
        CHECK(dxy == l1_distance(y, x));
        CHECK(l1_distance(x, x) == 0.0);
        CHECK(l1_distance(x, z) <= dxy + l1_distance(y, z) + 1e-12);
    }
}

TEST_CASE("argmax_label breaks ties toward the lowest index") {
    CHECK(argmax_label(LabelDistribution::from_probs({0.5, 0.5})) == 0);
    CHECK(argmax_label(LabelDistribution::from_probs({0.2, 0.4, 0.4})) == 1);
    CHECK(argmax_label(LabelDistribution::from_probs({0.1, 0.2, 0.7})) == 2);
}

TEST_CASE("normalize_logits reproduces the closed form") {
    const auto d = normalize_logits({2.0, 0.0}, 2.0);
    const double e = std::exp(1.0);
    CHECK(d[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
    CHECK(d[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));

    const auto unit = normalize_logits({2.0, 0.0}, 1.0);
    CHECK(unit[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("normalize_logits is shift invariant") {
    const auto base = normalize_logits({2.0, 0.0, -1.0}, 1.0);
    const auto shifted = normalize_logits({102.0, 100.0, 99.0}, 1.0);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i] == shifted[i]);
    }
}

TEST_CASE("normalize_logits survives extreme magnitudes") {
    const auto d = normalize_logits({1e8, 0.0}, 1.0);
    CHECK(d.valid(LabelDistribution::kStrictTolerance));
    CHECK(d[0] == doctest::Approx(1.0));

    const auto low = normalize_logits({-1e8, -1e8 - 1.0}, 1.0);
    CHECK(low.valid(LabelDistribution::kStrictTolerance));
}

TEST_CASE("normalize_logits keeps the argmax") {
    std::mt19937_64 g(77);
    for (int i = 0; i < 300; ++i) {
        const std::size_t k = 2 + uniform_index(g, 6);
        std::vector<double> logits(k);
        for (double& l : logits) l = uniform_range(g, -30.0, 30.0);
        const auto d = normalize_logits(logits, uniform_range(g, 0.1, 10.0));
        std::size_t raw_arg = 0;
        for (std::size_t j = 1; j < k; ++j) {
            if (logits[j] > logits[raw_arg]) raw_arg = j;
        }
        CHECK(argmax_label(d) == static_cast<int>(raw_arg));
        CHECK(d.valid(LabelDistribution::kStrictTolerance));
    }
}

TEST_CASE("normalize_logits rejects bad temperatures and logits") {
    CHECK_THROWS_AS(normalize_logits({1.0, 2.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(normalize_logits({1.0, 2.0}, -1.0), ConfigError);
    CHECK_THROWS_AS(normalize_logits({1.0}, 1.0), DimensionError);
    CHECK_THROWS_AS(normalize_logits({std::nan(""), 0.0}, 1.0), NumericError);
}

}  // TEST_SUITE
