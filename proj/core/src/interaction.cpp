#include "mmoe/interaction.hpp"

#include "mmoe/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_set>

namespace mmoe {

std::string to_string(Strategy s) {
    return s == Strategy::ThresholdRule ? "threshold" : "argmax";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "threshold") return Strategy::ThresholdRule;
    if (name == "argmax") return Strategy::ArgmaxRule;
    throw ConfigError("unknown strategy '" + name + "' (expected threshold|argmax)");
}

void CategorizationConfig::validate() const {
    if (!(gamma > 0.0) || !(gamma < 2.0)) {
        throw ConfigError("gamma must lie in (0, 2), got " + std::to_string(gamma));
    }
    if (!(tau > 0.0) || !(tau < 2.0)) {
        throw ConfigError("tau must lie in (0, 2), got " + std::to_string(tau));
    }
}

std::string to_string(InteractionCategory c) {
    switch (c) {
        case InteractionCategory::DisagreementUnique1: return "disagreement_unique1";
        case InteractionCategory::DisagreementUnique2: return "disagreement_unique2";
        case InteractionCategory::DisagreementSynergy: return "disagreement_synergy";
        case InteractionCategory::AgreementRedundancy: return "agreement_redundancy";
        case InteractionCategory::AgreementSynergy: return "agreement_synergy";
    }
    return "unknown";
}

InteractionCategory category_from_string(const std::string& name) {
    for (InteractionCategory c : kAllCategories) {
        if (to_string(c) == name) return c;
    }
    throw ConfigError("unknown interaction category '" + name + "'");
}

std::string category_display_name(InteractionCategory c) {
    switch (c) {
        case InteractionCategory::DisagreementUnique1: return "Disagreement & Unique [m1]";
        case InteractionCategory::DisagreementUnique2: return "Disagreement & Unique [m2]";
        case InteractionCategory::DisagreementSynergy: return "Disagreement & Synergy";
        case InteractionCategory::AgreementRedundancy: return "Agreement & Redundancy";
        case InteractionCategory::AgreementSynergy: return "Agreement & Synergy";
    }
    return "Unknown";
}

PairwiseDistances pairwise_distances(const LabelDistribution& d1, const LabelDistribution& d2,
                                     const LabelDistribution& dm) {
    return PairwiseDistances{
        l1_distance(d1, d2),
        l1_distance(d1, dm),
        l1_distance(d2, dm),
    };
}

AgreementLabel disagreement_classify(const PairwiseDistances& dist,
                                     const CategorizationConfig& cfg) {
    cfg.validate();
    return dist.d12 > cfg.gamma ? AgreementLabel::Disagreement : AgreementLabel::Agreement;
}

RusScores rus_scores(const PairwiseDistances& dist) {
    RusScores s;
    s.redundancy = -(dist.d1m + dist.d12 + dist.d2m);
    s.unique1 = dist.d2m + dist.d12 - dist.d1m;
    s.unique2 = dist.d1m + dist.d12 - dist.d2m;
    s.synergy = dist.d1m + dist.d2m;
    s.distances = dist;
    return s;
}

Categorization categorize(const PairwiseDistances& dist, const CategorizationConfig& cfg) {
    cfg.validate();
    RusScores scores = rus_scores(dist);
    InteractionCategory category;

    if (cfg.strategy == Strategy::ThresholdRule) {
        if (dist.d12 > cfg.gamma) {
            if (std::min(dist.d1m, dist.d2m) > cfg.tau) {
                category = InteractionCategory::DisagreementSynergy;
            } else if (dist.d1m <= dist.d2m) {
                category = InteractionCategory::DisagreementUnique1;
            } else {
                category = InteractionCategory::DisagreementUnique2;
            }
        } else {
            category = std::max(dist.d1m, dist.d2m) <= cfg.tau
                           ? InteractionCategory::AgreementRedundancy
                           : InteractionCategory::AgreementSynergy;
        }
    } else {
        if (dist.d12 > cfg.gamma) {
            // Raw R is never positive, so the disagreement branch competes
            // U1, U2, and a tau-scaled synergy score.
            const double synergy_score = scores.synergy * (cfg.tau / 2.0);
            category = InteractionCategory::DisagreementUnique1;
            double best = scores.unique1;
            if (scores.unique2 > best) {
                category = InteractionCategory::DisagreementUnique2;
                best = scores.unique2;
            }
            if (synergy_score > best) {
                category = InteractionCategory::DisagreementSynergy;
            }
        } else {
            category = scores.synergy > cfg.tau ? InteractionCategory::AgreementSynergy
                                                : InteractionCategory::AgreementRedundancy;
        }
    }
    return Categorization{category, scores};
}

Partition partition_dataset(const std::vector<DataPointRecord>& records,
                            const CategorizationConfig& cfg) {
    cfg.validate();
    Partition out;
    for (InteractionCategory c : kAllCategories) {
        out[c];
    }
    std::unordered_set<std::string> seen;
    seen.reserve(records.size());
    for (const DataPointRecord& r : records) {
        try {
            r.validate();
        } catch (const Error& e) {
            throw ValidationError("record '" + r.id + "': " + e.what());
        }
        if (!seen.insert(r.id).second) {
            throw ValidationError("record '" + r.id + "': duplicate id");
        }
        const auto result = categorize(pairwise_distances(r.delta1, r.delta2, r.delta_m), cfg);
        out[result.category].push_back(r.id);
    }
    return out;
}

void write_partition(const Partition& partition, const CategorizationConfig& cfg,
                     std::ostream& out) {
    nlohmann::ordered_json j;
    j["gamma"] = cfg.gamma;
    j["tau"] = cfg.tau;
    j["strategy"] = to_string(cfg.strategy);
    nlohmann::ordered_json counts, buckets;
    for (InteractionCategory c : kReportOrder) {
        const auto it = partition.find(c);
        const std::vector<std::string> empty;
        const auto& ids = it == partition.end() ? empty : it->second;
        counts[to_string(c)] = ids.size();
        buckets[to_string(c)] = ids;
    }
    j["counts"] = std::move(counts);
    j["buckets"] = std::move(buckets);
    out << j.dump(2) << '\n';
}

std::pair<Partition, CategorizationConfig> read_partition(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, std::string("invalid partition document: ") + e.what());
    }
    CategorizationConfig cfg;
    try {
        cfg.gamma = j.at("gamma").get<double>();
        cfg.tau = j.at("tau").get<double>();
        cfg.strategy = strategy_from_string(j.at("strategy").get<std::string>());
        Partition partition;
        for (InteractionCategory c : kAllCategories) {
            partition[c];
        }
        for (const auto& [name, ids] : j.at("buckets").items()) {
            auto& bucket = partition[category_from_string(name)];
            for (const auto& id : ids) {
                bucket.push_back(id.get<std::string>());
            }
        }
        return {std::move(partition), cfg};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, std::string("invalid partition document: ") + e.what());
    }
}

}  // namespace mmoe
