#include "mmoe/synth.hpp"

#include "mmoe/errors.hpp"
#include "mmoe/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mmoe {

namespace {

bool constraints_hold(InteractionCategory category, double d12, double d1m, double d2m,
                      double gamma, double tau, double m) {
    switch (category) {
        case InteractionCategory::AgreementRedundancy:
            return d12 <= gamma - m && std::max(d1m, d2m) <= tau - m;
        case InteractionCategory::AgreementSynergy:
            return d12 <= gamma - m && std::min(d1m, d2m) >= tau + m;
        case InteractionCategory::DisagreementUnique1:
            return d12 >= gamma + m && d1m <= tau - m && d2m - d1m >= m;
        case InteractionCategory::DisagreementUnique2:
            return d12 >= gamma + m && d2m <= tau - m && d1m - d2m >= m;
        case InteractionCategory::DisagreementSynergy:
            return d12 >= gamma + m && std::min(d1m, d2m) >= tau + m;
    }
    return false;
}

std::string record_id(const PlantedSpec& spec, std::size_t index) {
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "%04zu", index + 1);
    return to_string(spec.category) + "-s" + std::to_string(spec.seed) + "-" + suffix;
}

}  // namespace

std::optional<std::string> feasibility_issue(const PlantedSpec& spec,
                                             const CategorizationConfig& cfg) {
    const double m = spec.margin;
    if (!(m > 0.0) || !std::isfinite(m)) {
        return "margin must be a positive finite number";
    }
    switch (spec.category) {
        case InteractionCategory::AgreementRedundancy:
            if (m >= cfg.gamma) return "margin leaves no room under gamma";
            if (m >= cfg.tau) return "margin leaves no room under tau";
            break;
        case InteractionCategory::AgreementSynergy:
            if (m >= cfg.gamma) return "margin leaves no room under gamma";
            if (cfg.tau + m >= 2.0) return "tau plus margin reaches the distance ceiling";
            break;
        case InteractionCategory::DisagreementUnique1:
        case InteractionCategory::DisagreementUnique2:
            if (cfg.gamma + m >= 2.0) return "gamma plus margin reaches the distance ceiling";
            if (m >= cfg.tau) return "margin leaves no room under tau";
            if (cfg.gamma + m > cfg.tau - m + 2.0) {
                return "triangle inequality rules the region out";
            }
            break;
        case InteractionCategory::DisagreementSynergy:
            if (cfg.gamma + m >= 2.0) return "gamma plus margin reaches the distance ceiling";
            if (cfg.tau + m >= 2.0) return "tau plus margin reaches the distance ceiling";
            break;
    }
    return std::nullopt;
}

std::string planted_payload_token(InteractionCategory category, int label) {
    return "[cat=" + to_string(category) + ";label=" + std::to_string(label) + "]";
}

std::vector<DataPointRecord> generate(const std::vector<PlantedSpec>& specs,
                                      const CategorizationConfig& cfg,
                                      std::size_t label_cardinality) {
    cfg.validate();
    if (label_cardinality < 2) {
        throw GenerationError("label cardinality must be at least 2, got " +
                              std::to_string(label_cardinality));
    }
    for (const PlantedSpec& spec : specs) {
        if (const auto issue = feasibility_issue(spec, cfg)) {
            throw GenerationError("spec for " + to_string(spec.category) +
                                  " is infeasible: " + *issue);
        }
    }

    std::vector<DataPointRecord> out;
    for (const PlantedSpec& spec : specs) {
        std::mt19937_64 g(fnv1a(to_string(spec.category), spec.seed ^ 0xa0761d6478bd642full));
        for (std::size_t i = 0; i < spec.count; ++i) {
            bool accepted = false;
            for (std::size_t attempt = 0; attempt < kMaxAttemptsPerRecord; ++attempt) {
                LabelDistribution d1 = LabelDistribution::from_probs(
                    sample_simplex(g, label_cardinality), LabelDistribution::kStrictTolerance);
                LabelDistribution d2 = LabelDistribution::from_probs(
                    sample_simplex(g, label_cardinality), LabelDistribution::kStrictTolerance);
                LabelDistribution dm = LabelDistribution::from_probs(
                    sample_simplex(g, label_cardinality), LabelDistribution::kStrictTolerance);
                const double d12 = l1_distance(d1, d2);
                const double d1m = l1_distance(d1, dm);
                const double d2m = l1_distance(d2, dm);
                if (!constraints_hold(spec.category, d12, d1m, d2m, cfg.gamma, cfg.tau,
                                      spec.margin)) {
                    continue;
                }
                DataPointRecord r;
                r.id = record_id(spec, i);
                r.delta1 = std::move(d1);
                r.delta2 = std::move(d2);
                r.delta_m = std::move(dm);
                r.gold_label = argmax_label(r.delta_m);
                const std::string token = planted_payload_token(spec.category, *r.gold_label);
                r.payload.text1 = "m1 " + token;
                r.payload.text2 = "m2 " + token;
                out.push_back(std::move(r));
                accepted = true;
                break;
            }
            if (!accepted) {
                throw GenerationError("spec for " + to_string(spec.category) + " exhausted " +
                                      std::to_string(kMaxAttemptsPerRecord) +
                                      " attempts at record " + std::to_string(i + 1) +
                                      "; loosen the margin or thresholds");
            }
        }
    }
    return out;
}

InteractionCategory oracle_categorize(const DataPointRecord& record,
                                      const CategorizationConfig& cfg) {
    if (cfg.strategy != Strategy::ThresholdRule) {
        throw ConfigError("the oracle re-derives the threshold rule only");
    }
    record.validate();

    const auto naive_l1 = [](const LabelDistribution& a, const LabelDistribution& b) {
        double total = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double diff = a[i] - b[i];
            total += diff < 0.0 ? -diff : diff;
        }
        return total;
    };
    const double d12 = naive_l1(record.delta1, record.delta2);
    const double d1m = naive_l1(record.delta1, record.delta_m);
    const double d2m = naive_l1(record.delta2, record.delta_m);

    if (d12 <= cfg.gamma) {
        const double farther = d1m > d2m ? d1m : d2m;
        if (farther <= cfg.tau) return InteractionCategory::AgreementRedundancy;
        return InteractionCategory::AgreementSynergy;
    }
    const double nearer = d1m < d2m ? d1m : d2m;
    if (nearer > cfg.tau) return InteractionCategory::DisagreementSynergy;
    if (d1m <= d2m) return InteractionCategory::DisagreementUnique1;
    return InteractionCategory::DisagreementUnique2;
}

}  // namespace mmoe
