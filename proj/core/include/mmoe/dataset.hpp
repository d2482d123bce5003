#pragma once

#include "mmoe/interaction.hpp"
#include "mmoe/record.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mmoe {

/// Whether dataset rows carry ready-made probabilities or raw logits.
enum class RowFormat { ProbabilityRows, LogitRows };

std::string to_string(RowFormat f);
RowFormat row_format_from_string(const std::string& name);

struct ParseOptions {
    RowFormat format = RowFormat::ProbabilityRows;
    /// Applied per row when format == LogitRows.
    double temperature = 1.0;
};

/// Parse a line-delimited dataset file: one JSON object per line with fields
/// `id`, `delta_1`/`delta_2`/`delta_m` (or `logits_1`/`logits_2`/`logits_m`),
/// optional `label`, optional `payload` {`text_1`, `text_2`}. Unknown fields
/// are ignored. Records come back in file order; every error names the line.
std::vector<DataPointRecord> parse_dataset(const std::filesystem::path& path,
                                           const ParseOptions& opts = {});
std::vector<DataPointRecord> parse_dataset_stream(std::istream& in,
                                                  const ParseOptions& opts = {});

/// Optional per-record annotation appended by the categorize command.
struct RecordAnnotation {
    RusScores scores;
    InteractionCategory category;
};

/// One dataset line, without the trailing newline. Serialized numbers
/// round-trip exactly.
std::string serialize_record(const DataPointRecord& record,
                             const RecordAnnotation* annotation = nullptr);
void serialize_dataset(const std::vector<DataPointRecord>& records, std::ostream& out);

struct DatasetSummary {
    std::size_t count = 0;
    std::optional<std::size_t> label_cardinality;
    double gold_label_coverage = 0.0;
    std::optional<LabelDistribution> marginal_delta1;
    std::optional<LabelDistribution> marginal_delta2;
    std::optional<LabelDistribution> marginal_delta_m;
};

/// Counts, cardinality, gold coverage, and the elementwise means of the three
/// distributions. An empty input yields count 0 with absent marginals.
DatasetSummary summarize(const std::vector<DataPointRecord>& records);

}  // namespace mmoe
