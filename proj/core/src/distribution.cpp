#include "mmoe/distribution.hpp"

#include "mmoe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmoe {

LabelDistribution LabelDistribution::from_probs(std::vector<double> probs, double tolerance) {
    if (probs.size() < 2) {
        throw DimensionError("a label distribution needs at least 2 entries, got " +
                             std::to_string(probs.size()));
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p)) {
            throw NumericError("non-finite probability entry");
        }
        if (p < 0.0) {
            throw ValidationError("negative probability entry " + std::to_string(p));
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > tolerance) {
        throw ValidationError("probabilities sum to " + std::to_string(sum) +
                              ", outside tolerance " + std::to_string(tolerance));
    }
    for (double& p : probs) {
        p /= sum;
    }
    return LabelDistribution(std::move(probs));
}

bool LabelDistribution::valid(double eps) const {
    if (probs_.size() < 2) return false;
    double sum = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) return false;
        sum += p;
    }
    return std::fabs(sum - 1.0) <= eps;
}

double l1_distance(const LabelDistribution& a, const LabelDistribution& b) {
    if (a.size() != b.size()) {
        throw DimensionError("label distributions have different cardinalities: " +
                             std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += std::fabs(a[i] - b[i]);
    }
    return sum;
}

int argmax_label(const LabelDistribution& d) {
    const auto& p = d.probs();
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

LabelDistribution normalize_logits(const std::vector<double>& logits, double temperature) {
    if (logits.size() < 2) {
        throw DimensionError("need at least 2 logits, got " + std::to_string(logits.size()));
    }
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ConfigError("temperature must be > 0, got " + std::to_string(temperature));
    }
    for (double l : logits) {
        if (!std::isfinite(l)) {
            throw NumericError("non-finite logit");
        }
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - max_logit) / temperature);
        sum += out[i];
    }
    for (double& p : out) {
        p /= sum;
    }
    return LabelDistribution::from_probs(std::move(out), LabelDistribution::kStrictTolerance);
}

}  // namespace mmoe
