#pragma once

#include "mmoe/interaction.hpp"
#include "mmoe/record.hpp"
#include "mmoe/routing.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mmoe {

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Full K x K tally, row = gold, column = predicted. Binary metrics read the
// one-vs-rest cells for positive_label.
struct ConfusionCounts {
    std::size_t cardinality = 2;
    int positive_label = 1;
    std::vector<std::size_t> cells;

    ConfusionCounts() : cells(4, 0) {}
    ConfusionCounts(std::size_t k, int positive);

    std::size_t& at(std::size_t gold, std::size_t predicted);
    std::size_t at(std::size_t gold, std::size_t predicted) const;

    std::size_t tp() const;
    std::size_t fp() const;
    std::size_t fn() const;
    std::size_t tn() const;
    std::size_t total() const;
};

ConfusionCounts confusion(const std::vector<int>& gold, const std::vector<int>& predicted,
                          int positive_label, std::size_t cardinality = 0);

// Gold labels come from the records, matched by id. Every prediction must
// name a record that carries a gold label.
ConfusionCounts confusion(const std::vector<ExpertPrediction>& predictions,
                          const std::vector<DataPointRecord>& records, int positive_label);

// Every denominator-zero case yields 0.
Prf prf1(const ConfusionCounts& c);
Prf prf1(std::size_t tp, std::size_t fp, std::size_t fn);

// Unweighted mean of one-vs-rest P/R/F1 over all labels.
Prf macro_prf1(const ConfusionCounts& c);

// Binary tallies use prf1 on the positive label; larger cardinalities fall
// back to the macro average.
Prf bucket_metrics(const ConfusionCounts& c);

struct CategoryReport {
    InteractionCategory category = InteractionCategory::AgreementRedundancy;
    std::size_t example_count = 0;
    Prf metrics;
    double mean_confidence = 0.0;
    bool present = false;
};

struct RunMetadata {
    double gamma = 0.5;
    double tau = 0.5;
    Strategy strategy = Strategy::ThresholdRule;
    std::vector<std::uint64_t> seeds;
    std::string timestamp;  // empty unless the caller stamps the run
    int positive_label = 1;
};

struct EvaluationReport {
    RunMetadata meta;
    std::size_t total = 0;
    Prf overall;
    double overall_mean_confidence = 0.0;
    std::vector<CategoryReport> per_category;  // five entries, report order
};

// Buckets come from the partition; gold labels from the records. Predictions
// outside the partition or without gold are rejected.
EvaluationReport per_category_report(const std::vector<ExpertPrediction>& predictions,
                                     const std::vector<DataPointRecord>& records,
                                     const Partition& partition, int positive_label = 1);

// Self-contained variant: category and gold ride on each prediction line.
// Predictions without gold are skipped; at least one must carry it.
EvaluationReport per_category_report(const std::vector<ExpertPrediction>& predictions,
                                     int positive_label = 1);

struct ImprovementRow {
    InteractionCategory category = InteractionCategory::AgreementRedundancy;
    std::size_t example_count = 0;
    double f1_single = 0.0;
    double f1_expert = 0.0;
    std::optional<double> improvement_pct;  // empty when the baseline F1 is 0
};

double improvement_pct(double single_value, double expert_value);

std::vector<ImprovementRow> compare_runs(const EvaluationReport& single_run,
                                         const EvaluationReport& expert_run);

std::string render_report_table(const EvaluationReport& report);
std::string render_comparison_table(const std::vector<ImprovementRow>& rows);

void write_report(const EvaluationReport& report, std::ostream& out);
EvaluationReport read_report(std::istream& in);

// Mean and sample standard deviation across repeated runs of one setup.
struct AggregateCell {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t runs = 0;
};

struct AggregateCategory {
    InteractionCategory category = InteractionCategory::AgreementRedundancy;
    std::size_t example_count = 0;
    AggregateCell f1;
    bool present = false;
};

struct AggregateReport {
    std::size_t runs = 0;
    AggregateCell overall_f1;
    std::vector<AggregateCategory> per_category;
};

AggregateReport aggregate_reports(const std::vector<EvaluationReport>& reports);

// "74.93±0.50" with scores scaled to percentages.
std::string format_mean_std(const AggregateCell& cell);
std::string render_aggregate_table(const AggregateReport& aggregate);

}  // namespace mmoe
