#pragma once

#include "mmoe/distribution.hpp"
#include "mmoe/record.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mmoe {

/// The three pairwise L1 distances between the partial labels and the full
/// label. Each value lies in [0, 2] and the triple obeys the triangle
/// inequality.
struct PairwiseDistances {
    double d12 = 0.0;  ///< distance between the two partial labels
    double d1m = 0.0;  ///< partial label 1 vs full label
    double d2m = 0.0;  ///< partial label 2 vs full label

    friend bool operator==(const PairwiseDistances&, const PairwiseDistances&) = default;
};

/// Redundancy / uniqueness / synergy scores derived from the distances.
///
/// Identities that always hold (and are enforced by tests):
///   unique1 + unique2 == 2 * d12
///   redundancy + synergy == -d12
///   redundancy <= 0 <= synergy, unique1 >= 0, unique2 >= 0
struct RusScores {
    double redundancy = 0.0;
    double unique1 = 0.0;
    double unique2 = 0.0;
    double synergy = 0.0;
    PairwiseDistances distances;
};

/// How the five-way categorization combines the distances.
enum class Strategy {
    ThresholdRule,  ///< distance thresholds on d1m/d2m inside each branch (default)
    ArgmaxRule,     ///< pick by the largest RUS score inside each branch
};

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

/// Thresholds for the agreement split and the per-branch closeness test.
struct CategorizationConfig {
    double gamma = 0.5;  ///< agreement/disagreement threshold on d12
    double tau = 0.5;    ///< closeness threshold on d1m / d2m
    Strategy strategy = Strategy::ThresholdRule;

    void validate() const;  ///< gamma and tau must lie in (0, 2)
};

/// The five non-overlapping interaction types.
enum class InteractionCategory {
    DisagreementUnique1,
    DisagreementUnique2,
    DisagreementSynergy,
    AgreementRedundancy,
    AgreementSynergy,
};

inline constexpr std::array<InteractionCategory, 5> kAllCategories = {
    InteractionCategory::DisagreementUnique1, InteractionCategory::DisagreementUnique2,
    InteractionCategory::DisagreementSynergy, InteractionCategory::AgreementRedundancy,
    InteractionCategory::AgreementSynergy,
};

/// Row order used by report tables: agreement rows first.
inline constexpr std::array<InteractionCategory, 5> kReportOrder = {
    InteractionCategory::AgreementRedundancy, InteractionCategory::AgreementSynergy,
    InteractionCategory::DisagreementUnique1, InteractionCategory::DisagreementUnique2,
    InteractionCategory::DisagreementSynergy,
};

std::string to_string(InteractionCategory c);
InteractionCategory category_from_string(const std::string& name);
/// Human-facing name, e.g. "Agreement & Redundancy".
std::string category_display_name(InteractionCategory c);

enum class AgreementLabel { Agreement, Disagreement };

/// d12 = |delta1 - delta2|_1 and so on. All three inputs must share one
/// cardinality.
PairwiseDistances pairwise_distances(const LabelDistribution& d1,
                                     const LabelDistribution& d2,
                                     const LabelDistribution& dm);

/// Disagreement iff d12 > gamma. The two outcomes partition all inputs.
AgreementLabel disagreement_classify(const PairwiseDistances& dist,
                                     const CategorizationConfig& cfg);

/// R = -(d1m + d12 + d2m), U1 = d2m + d12 - d1m, U2 = d1m + d12 - d2m,
/// S = d1m + d2m.
RusScores rus_scores(const PairwiseDistances& dist);

struct Categorization {
    InteractionCategory category;
    RusScores scores;
};

/// Total function from distances to exactly one of the five categories.
///
/// ThresholdRule: the agreement branch (d12 <= gamma) yields redundancy when
/// max(d1m, d2m) <= tau and synergy otherwise; the disagreement branch yields
/// synergy when min(d1m, d2m) > tau, and otherwise the uniqueness of the
/// modality the full label follows (ties go to modality 1).
///
/// ArgmaxRule: the agreement branch picks synergy iff S > tau; the
/// disagreement branch takes the argmax of {U1, U2, S * tau/2}, ties broken
/// in that order.
Categorization categorize(const PairwiseDistances& dist, const CategorizationConfig& cfg);

/// Category buckets holding datapoint ids in input order. All five keys are
/// always present.
using Partition = std::map<InteractionCategory, std::vector<std::string>>;

/// Buckets are pairwise disjoint and jointly cover the input id set.
/// Any invalid or duplicated record aborts with the offending id.
Partition partition_dataset(const std::vector<DataPointRecord>& records,
                            const CategorizationConfig& cfg);

/// Partition file I/O: a single JSON document with the thresholds, the five
/// bucket counts, and the per-bucket id lists.
void write_partition(const Partition& partition, const CategorizationConfig& cfg,
                     std::ostream& out);
std::pair<Partition, CategorizationConfig> read_partition(std::istream& in);

}  // namespace mmoe
