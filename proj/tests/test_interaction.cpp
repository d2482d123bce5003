#include "mmoe/errors.hpp"
#include "mmoe/interaction.hpp"
#include "mmoe/rng.hpp"

#include "doctest.h"

#include <random>
#include <set>
#include <sstream>

using namespace mmoe;

namespace {

LabelDistribution dist(std::initializer_list<double> probs) {
    return LabelDistribution::from_probs(std::vector<double>(probs));
}

DataPointRecord record(std::string id, LabelDistribution d1, LabelDistribution d2,
                       LabelDistribution dm) {
    DataPointRecord r;
    r.id = std::move(id);
    r.delta1 = std::move(d1);
    r.delta2 = std::move(d2);
    r.delta_m = std::move(dm);
    return r;
}

}  // namespace

TEST_SUITE("interaction") {

TEST_CASE("pairwise_distances computes the three sums") {
    const auto d = pairwise_distances(dist({0.9, 0.1}), dist({0.8, 0.2}), dist({0.2, 0.8}));
    CHECK(d.d12 == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(d.d1m == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(d.d2m == doctest::Approx(1.2).epsilon(1e-12));

    const auto zero = pairwise_distances(dist({1.0, 0.0}), dist({1.0, 0.0}), dist({1.0, 0.0}));
    CHECK(zero.d12 == 0.0);
    CHECK(zero.d1m == 0.0);
    CHECK(zero.d2m == 0.0);

    const auto far = pairwise_distances(dist({1.0, 0.0}), dist({0.0, 1.0}), dist({0.5, 0.5}));
    CHECK(far.d12 == 2.0);
    CHECK(far.d1m == 1.0);
    CHECK(far.d2m == 1.0);
}

TEST_CASE("disagreement_classify splits on gamma") {
    CategorizationConfig cfg;
    CHECK(disagreement_classify(PairwiseDistances{0.2, 0.0, 0.0}, cfg) ==
          AgreementLabel::Agreement);
    CHECK(disagreement_classify(PairwiseDistances{1.4, 0.0, 0.0}, cfg) ==
          AgreementLabel::Disagreement);
    CHECK(disagreement_classify(PairwiseDistances{0.0, 0.0, 0.0}, cfg) ==
          AgreementLabel::Agreement);
    // The threshold itself still counts as agreement.
    CHECK(disagreement_classify(PairwiseDistances{0.5, 0.0, 0.0}, cfg) ==
          AgreementLabel::Agreement);
}

TEST_CASE("rus_scores matches direct arithmetic") {
    const auto a = rus_scores(PairwiseDistances{0.2, 1.4, 1.2});
    CHECK(a.redundancy == doctest::Approx(-2.8).epsilon(1e-12));
    CHECK(a.unique1 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.unique2 == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(a.synergy == doctest::Approx(2.6).epsilon(1e-12));

    const auto zero = rus_scores(PairwiseDistances{0.0, 0.0, 0.0});
    CHECK(zero.redundancy == 0.0);
    CHECK(zero.unique1 == 0.0);
    CHECK(zero.unique2 == 0.0);
    CHECK(zero.synergy == 0.0);

    const auto far = rus_scores(PairwiseDistances{2.0, 1.0, 1.0});
    CHECK(far.redundancy == -4.0);
    CHECK(far.unique1 == 2.0);
    CHECK(far.unique2 == 2.0);
    CHECK(far.synergy == 2.0);
}

TEST_CASE("score identities hold on random triples") {
    std::mt19937_64 g(11);
    CategorizationConfig cfg;
    for (int i = 0; i < 2000; ++i) {
        const std::size_t k = 2 + uniform_index(g, 9);
        const auto d1 = LabelDistribution::from_probs(sample_simplex(g, k));
        const auto d2 = LabelDistribution::from_probs(sample_simplex(g, k));
        const auto dm = LabelDistribution::from_probs(sample_simplex(g, k));
        const auto d = pairwise_distances(d1, d2, dm);
        const auto s = rus_scores(d);
        CHECK(s.unique1 + s.unique2 == doctest::Approx(2.0 * d.d12).epsilon(1e-9));
        CHECK(s.redundancy + s.synergy == doctest::Approx(-d.d12).epsilon(1e-9));
        CHECK(s.redundancy <= 1e-9);
        CHECK(s.unique1 >= -1e-9);
        CHECK(s.unique2 >= -1e-9);
        CHECK(s.synergy >= 0.0);
    }
}

TEST_CASE("categorize reproduces the worked examples") {
    CategorizationConfig cfg;
    const auto ar =
        pairwise_distances(dist({0.9, 0.1}), dist({0.85, 0.15}), dist({0.88, 0.12}));
    CHECK(categorize(ar, cfg).category == InteractionCategory::AgreementRedundancy);

    const auto as = pairwise_distances(dist({0.9, 0.1}), dist({0.8, 0.2}), dist({0.2, 0.8}));
    CHECK(categorize(as, cfg).category == InteractionCategory::AgreementSynergy);

    const auto du1 = pairwise_distances(dist({0.9, 0.1}), dist({0.2, 0.8}), dist({0.85, 0.15}));
    CHECK(categorize(du1, cfg).category == InteractionCategory::DisagreementUnique1);

    const auto du2 = pairwise_distances(dist({0.2, 0.8}), dist({0.9, 0.1}), dist({0.85, 0.15}));
    CHECK(categorize(du2, cfg).category == InteractionCategory::DisagreementUnique2);

    const auto ds = pairwise_distances(dist({1.0, 0.0}), dist({0.0, 1.0}), dist({0.5, 0.5}));
    CHECK(categorize(ds, cfg).category == InteractionCategory::DisagreementSynergy);
}

TEST_CASE("categorize boundaries follow the comparison conventions") {
    CategorizationConfig cfg;  // gamma = tau = 0.5

    // d12 exactly at gamma stays in the agreement branch.
    const auto at_gamma = pairwise_distances(dist({0.75, 0.25}), dist({0.5, 0.5}),
                                             dist({0.625, 0.375}));
    CHECK(at_gamma.d12 == 0.5);
    CHECK(categorize(at_gamma, cfg).category == InteractionCategory::AgreementRedundancy);

    // max(d1m, d2m) exactly at tau keeps redundancy.
    const auto at_tau = pairwise_distances(dist({0.75, 0.25}), dist({0.75, 0.25}),
                                           dist({0.5, 0.5}));
    CHECK(at_tau.d1m == 0.5);
    CHECK(categorize(at_tau, cfg).category == InteractionCategory::AgreementRedundancy);

    // A tie on d1m = d2m in the disagreement branch goes to Unique1.
    const PairwiseDistances tie{1.0, 0.25, 0.25};
    CHECK(categorize(tie, cfg).category == InteractionCategory::DisagreementUnique1);

    // min(d1m, d2m) exactly at tau is not synergy.
    const PairwiseDistances at_min{1.0, 0.5, 0.5};
    CHECK(categorize(at_min, cfg).category == InteractionCategory::DisagreementUnique1);
}

TEST_CASE("categorize is total and stable on random input") {
    std::mt19937_64 g(23);
    CategorizationConfig cfg;
    for (int i = 0; i < 2000; ++i) {
        const std::size_t k = 2 + uniform_index(g, 4);
        const auto d = pairwise_distances(LabelDistribution::from_probs(sample_simplex(g, k)),
                                          LabelDistribution::from_probs(sample_simplex(g, k)),
                                          LabelDistribution::from_probs(sample_simplex(g, k)));
        const auto first = categorize(d, cfg);
        const auto second = categorize(d, cfg);
        CHECK(first.category == second.category);
        const bool agreement = d.d12 <= cfg.gamma;
        const bool in_agreement_set =
            first.category == InteractionCategory::AgreementRedundancy ||
            first.category == InteractionCategory::AgreementSynergy;
        CHECK(agreement == in_agreement_set);
    }
}

TEST_CASE("raising d12 across gamma never flips disagreement back to agreement") {
    CategorizationConfig cfg;
    const double d1m = 0.3;
    const double d2m = 0.7;
    bool disagreed = false;
    for (double d12 = 0.0; d12 <= 1.0; d12 += 0.01) {
        const auto c = categorize(PairwiseDistances{d12, d1m, d2m}, cfg);
        const bool now =
            c.category == InteractionCategory::DisagreementUnique1 ||
            c.category == InteractionCategory::DisagreementUnique2 ||
            c.category == InteractionCategory::DisagreementSynergy;
        if (disagreed) CHECK(now);
        disagreed = now;
    }
    CHECK(disagreed);
}

TEST_CASE("argmax strategy agrees with threshold on clear-cut inputs") {
    CategorizationConfig argmax;
    argmax.strategy = Strategy::ArgmaxRule;

    // Agreement with tiny distances: S small, stays redundancy.
    CHECK(categorize(PairwiseDistances{0.1, 0.05, 0.05}, argmax).category ==
          InteractionCategory::AgreementRedundancy);
    // Agreement with the fusion far away: S large, synergy.
    CHECK(categorize(PairwiseDistances{0.1, 1.4, 1.4}, argmax).category ==
          InteractionCategory::AgreementSynergy);
    // Disagreement with the fusion hugging modality 1: U1 dominates.
    CHECK(categorize(PairwiseDistances{1.4, 0.1, 1.4}, argmax).category ==
          InteractionCategory::DisagreementUnique1);
    // Mirror image: U2 dominates.
    CHECK(categorize(PairwiseDistances{1.4, 1.4, 0.1}, argmax).category ==
          InteractionCategory::DisagreementUnique2);
    // Mild disagreement, fusion far from both: the scaled synergy score wins
    // (U1 = U2 = 0.6 against S * tau/2 = 0.7).
    CHECK(categorize(PairwiseDistances{0.6, 1.4, 1.4}, argmax).category ==
          InteractionCategory::DisagreementSynergy);
}

TEST_CASE("argmax strategy breaks disagreement ties in listed order") {
    CategorizationConfig argmax;
    argmax.strategy = Strategy::ArgmaxRule;
    // d1m = d2m makes U1 = U2; Unique1 is listed first.
    const auto c = categorize(PairwiseDistances{1.0, 0.6, 0.6}, argmax);
    const auto s = rus_scores(PairwiseDistances{1.0, 0.6, 0.6});
    REQUIRE(s.unique1 == s.unique2);
    if (s.unique1 >= s.synergy * (argmax.tau / 2.0)) {
        CHECK(c.category == InteractionCategory::DisagreementUnique1);
    }
}

TEST_CASE("config validation rejects out-of-range thresholds") {
    CategorizationConfig cfg;
    cfg.gamma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.gamma = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.gamma = 0.5;
    cfg.tau = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("partition_dataset buckets every record exactly once") {
    CategorizationConfig cfg;
    std::vector<DataPointRecord> records;
    records.push_back(record("r1", dist({0.9, 0.1}), dist({0.85, 0.15}), dist({0.88, 0.12})));
    records.push_back(record("r2", dist({0.9, 0.1}), dist({0.8, 0.2}), dist({0.2, 0.8})));
    records.push_back(record("r3", dist({0.9, 0.1}), dist({0.2, 0.8}), dist({0.85, 0.15})));

    const Partition p = partition_dataset(records, cfg);
    CHECK(p.at(InteractionCategory::AgreementRedundancy) == std::vector<std::string>{"r1"});
    CHECK(p.at(InteractionCategory::AgreementSynergy) == std::vector<std::string>{"r2"});
    CHECK(p.at(InteractionCategory::DisagreementUnique1) == std::vector<std::string>{"r3"});
    CHECK(p.at(InteractionCategory::DisagreementUnique2).empty());
    CHECK(p.at(InteractionCategory::DisagreementSynergy).empty());
}

TEST_CASE("partition_dataset on empty input yields five empty buckets") {
    const Partition p = partition_dataset({}, CategorizationConfig{});
    CHECK(p.size() == 5);
    for (const auto& [category, ids] : p) {
        CHECK(ids.empty());
    }
}

TEST_CASE("partition_dataset rejects duplicates and names bad records") {
    CategorizationConfig cfg;
    std::vector<DataPointRecord> records;
    records.push_back(record("dup", dist({0.5, 0.5}), dist({0.5, 0.5}), dist({0.5, 0.5})));
    records.push_back(record("dup", dist({0.5, 0.5}), dist({0.5, 0.5}), dist({0.5, 0.5})));
    CHECK_THROWS_WITH_AS(partition_dataset(records, cfg), "record 'dup': duplicate id",
                         ValidationError);

    std::vector<DataPointRecord> bad;
    bad.push_back(record("mismatch", dist({0.5, 0.5}), dist({0.2, 0.3, 0.5}), dist({0.5, 0.5})));
    CHECK_THROWS_AS(partition_dataset(bad, cfg), ValidationError);
}

TEST_CASE("partition buckets are disjoint and exhaustive on random datasets") {
    std::mt19937_64 g(31);
    CategorizationConfig cfg;
    for (int round = 0; round < 20; ++round) {
        std::vector<DataPointRecord> records;
        const std::size_t n = 1 + uniform_index(g, 60);
        const std::size_t k = 2 + uniform_index(g, 3);
        for (std::size_t i = 0; i < n; ++i) {
            records.push_back(record("r" + std::to_string(i),
                                     LabelDistribution::from_probs(sample_simplex(g, k)),
                                     LabelDistribution::from_probs(sample_simplex(g, k)),
                                     LabelDistribution::from_probs(sample_simplex(g, k))));
        }
        const Partition p = partition_dataset(records, cfg);
        std::size_t total = 0;
        std::set<std::string> seen;
        for (const auto& [category, ids] : p) {
            total += ids.size();
            for (const auto& id : ids) {
                CHECK(seen.insert(id).second);
            }
        }
        CHECK(total == n);
    }
}

TEST_CASE("partition result ignores record presentation order") {
    std::mt19937_64 g(57);
    CategorizationConfig cfg;
    std::vector<DataPointRecord> records;
    for (std::size_t i = 0; i < 40; ++i) {
        records.push_back(record("r" + std::to_string(i),
                                 LabelDistribution::from_probs(sample_simplex(g, 3)),
                                 LabelDistribution::from_probs(sample_simplex(g, 3)),
                                 LabelDistribution::from_probs(sample_simplex(g, 3))));
    }
    const Partition forward = partition_dataset(records, cfg);
    std::vector<DataPointRecord> reversed(records.rbegin(), records.rend());
    const Partition backward = partition_dataset(reversed, cfg);
    for (const auto& [category, ids] : forward) {
        std::set<std::string> a(ids.begin(), ids.end());
        const auto& rids = backward.at(category);
        std::set<std::string> b(rids.begin(), rids.end());
        CHECK(a == b);
    }
}

TEST_CASE("partition documents round-trip through their JSON form") {
    CategorizationConfig cfg;
    cfg.gamma = 0.75;
    cfg.tau = 0.25;
    std::vector<DataPointRecord> records;
    records.push_back(record("a", dist({0.9, 0.1}), dist({0.85, 0.15}), dist({0.88, 0.12})));
    records.push_back(record("b", dist({1.0, 0.0}), dist({0.0, 1.0}), dist({0.5, 0.5})));
    const Partition p = partition_dataset(records, cfg);

    std::stringstream buffer;
    write_partition(p, cfg, buffer);
    const auto [loaded, loaded_cfg] = read_partition(buffer);
    CHECK(loaded == p);
    CHECK(loaded_cfg.gamma == cfg.gamma);
    CHECK(loaded_cfg.tau == cfg.tau);
    CHECK(loaded_cfg.strategy == cfg.strategy);
}

TEST_CASE("category names round-trip") {
    for (const InteractionCategory c : kAllCategories) {
        CHECK(category_from_string(to_string(c)) == c);
    }
    CHECK_THROWS_AS(category_from_string("nonsense"), ConfigError);
    CHECK(strategy_from_string("threshold") == Strategy::ThresholdRule);
    CHECK(strategy_from_string("argmax") == Strategy::ArgmaxRule);
    CHECK_THROWS_AS(strategy_from_string("other"), ConfigError);
}

}  // TEST_SUITE
