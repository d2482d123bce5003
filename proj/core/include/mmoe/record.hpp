#pragma once

#include "mmoe/distribution.hpp"

#include <optional>
#include <string>

namespace mmoe {

/// Text projections of the two modalities. Either side may be empty.
struct ModalityPayload {
    std::string text1;
    std::string text2;

    friend bool operator==(const ModalityPayload&, const ModalityPayload&) = default;
};

/// One datapoint: the two partial-label distributions, the full-label
/// distribution, an optional gold label, and the textual payloads.
struct DataPointRecord {
    std::string id;
    LabelDistribution delta1;
    LabelDistribution delta2;
    LabelDistribution delta_m;
    std::optional<int> gold_label;
    ModalityPayload payload;

    /// Throws if the id is empty, the three distributions disagree on
    /// cardinality or are off the simplex, or the gold label is out of range.
    void validate() const;
};

}  // namespace mmoe
