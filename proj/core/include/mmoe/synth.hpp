#pragma once

#include "mmoe/interaction.hpp"
#include "mmoe/record.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mmoe {

struct PlantedSpec {
    InteractionCategory category = InteractionCategory::AgreementRedundancy;
    std::size_t count = 0;
    double margin = 0.1;  // minimum slack on every threshold comparison
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxAttemptsPerRecord = 10000;

// Non-empty when the spec's constraint region is provably empty for this
// (gamma, tau, margin) triple.
std::optional<std::string> feasibility_issue(const PlantedSpec& spec,
                                             const CategorizationConfig& cfg);

// Rejection sampling from uniform simplex draws until every comparison holds
// with the requested slack. Each spec runs on its own seed stream, so output
// per spec does not depend on the other specs. Gold labels are argmax of the
// fused distribution; payload texts carry a token naming category and label.
std::vector<DataPointRecord> generate(const std::vector<PlantedSpec>& specs,
                                      const CategorizationConfig& cfg,
                                      std::size_t label_cardinality);

// "[cat=<category>;label=<k>]", the token planted into payload texts.
std::string planted_payload_token(InteractionCategory category, int label);

// Brute-force re-derivation of the threshold rule with its own distance loops;
// shares no helpers with the main categorizer on purpose. Only the threshold
// strategy is re-derived here, so any other strategy is rejected.
InteractionCategory oracle_categorize(const DataPointRecord& record,
                                      const CategorizationConfig& cfg);

}  // namespace mmoe
