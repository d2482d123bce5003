#pragma once

#include <cstddef>
#include <vector>

namespace mmoe {

/// A point on the probability simplex over the task's label set.
///
/// Every instance is validated on construction: entries are finite and
/// non-negative, there are at least two of them, and they sum to one within
/// the given tolerance. The stored entries are divided by the observed sum,
/// so downstream code can rely on a unit total up to rounding.
class LabelDistribution {
public:
    /// Tolerance applied when loading classifier dumps (they carry float noise).
    static constexpr double kIngestTolerance = 1e-6;
    /// Tolerance used for internal invariant checks.
    static constexpr double kStrictTolerance = 1e-9;

    LabelDistribution() = default;

    static LabelDistribution from_probs(std::vector<double> probs,
                                        double tolerance = kIngestTolerance);

    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    bool empty() const { return probs_.empty(); }

    /// True when the simplex invariants hold within eps.
    bool valid(double eps = kStrictTolerance) const;

    friend bool operator==(const LabelDistribution& a, const LabelDistribution& b) {
        return a.probs_ == b.probs_;
    }

private:
    explicit LabelDistribution(std::vector<double> probs) : probs_(std::move(probs)) {}

    std::vector<double> probs_;
};

/// Total-variation style L1 distance between two distributions of equal
/// cardinality. Result lies in [0, 2]; zero iff the entries are identical.
double l1_distance(const LabelDistribution& a, const LabelDistribution& b);

/// Index of the largest entry; ties resolve to the lowest index.
int argmax_label(const LabelDistribution& d);

/// Temperature-scaled, max-subtracted exponential normalization of raw
/// classifier scores. Safe for arbitrarily large logits; preserves the argmax
/// for any temperature > 0.
LabelDistribution normalize_logits(const std::vector<double>& logits,
                                   double temperature = 1.0);

}  // namespace mmoe
