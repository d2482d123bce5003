#include "mmoe/evaluation.hpp"

#include "mmoe/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace mmoe {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::size_t infer_cardinality(const std::vector<int>& gold, const std::vector<int>& predicted) {
    int top = 1;
    for (const int g : gold) top = std::max(top, g);
    for (const int p : predicted) top = std::max(top, p);
    return static_cast<std::size_t>(top) + 1;
}

std::string pct(double value) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << value * 100.0;
    return os.str();
}

std::string fixed2(double value) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << value;
    return os.str();
}

std::string signed_pct(double value) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << std::showpos << value;
    return os.str();
}

void pad(std::string& line, std::size_t width) {
    if (line.size() < width) line.append(width - line.size(), ' ');
}

std::string row(const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string cell = cells[i];
        if (i == 0) {
            pad(cell, widths[i]);
            line += cell;
        } else {
            line += "  ";
            line += std::string(widths[i] > cell.size() ? widths[i] - cell.size() : 0, ' ');
            line += cell;
        }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line;
}

struct Bucket {
    std::vector<int> gold;
    std::vector<int> predicted;
    double confidence_sum = 0.0;
};

EvaluationReport report_from_buckets(std::map<InteractionCategory, Bucket>& buckets,
                                     int positive_label) {
    std::vector<int> all_gold;
    std::vector<int> all_predicted;
    double all_confidence = 0.0;
    for (const auto& [category, bucket] : buckets) {
        all_gold.insert(all_gold.end(), bucket.gold.begin(), bucket.gold.end());
        all_predicted.insert(all_predicted.end(), bucket.predicted.begin(),
                             bucket.predicted.end());
        all_confidence += bucket.confidence_sum;
    }
    if (all_gold.empty()) {
        throw ValidationError("no gold labels to evaluate against");
    }
    const std::size_t cardinality = infer_cardinality(all_gold, all_predicted);

    EvaluationReport report;
    report.meta.positive_label = positive_label;
    report.total = all_gold.size();
    report.overall =
        bucket_metrics(confusion(all_gold, all_predicted, positive_label, cardinality));
    report.overall_mean_confidence = all_confidence / static_cast<double>(all_gold.size());

    for (const InteractionCategory category : kReportOrder) {
        const Bucket& bucket = buckets[category];
        CategoryReport entry;
        entry.category = category;
        entry.example_count = bucket.gold.size();
        entry.present = !bucket.gold.empty();
        if (entry.present) {
            entry.metrics = bucket_metrics(
                confusion(bucket.gold, bucket.predicted, positive_label, cardinality));
            entry.mean_confidence =
                bucket.confidence_sum / static_cast<double>(bucket.gold.size());
        }
        report.per_category.push_back(entry);
    }
    return report;
}

}  // namespace

ConfusionCounts::ConfusionCounts(std::size_t k, int positive)
    : cardinality(k), positive_label(positive), cells(k * k, 0) {
    if (k < 2) {
        throw DimensionError("confusion matrix needs at least two labels, got " +
                             std::to_string(k));
    }
    if (positive < 0 || static_cast<std::size_t>(positive) >= k) {
        throw ValidationError("positive label " + std::to_string(positive) + " outside [0, " +
                              std::to_string(k) + ")");
    }
}

std::size_t& ConfusionCounts::at(std::size_t gold, std::size_t predicted) {
    return cells[gold * cardinality + predicted];
}

std::size_t ConfusionCounts::at(std::size_t gold, std::size_t predicted) const {
    return cells[gold * cardinality + predicted];
}

std::size_t ConfusionCounts::tp() const {
    const auto p = static_cast<std::size_t>(positive_label);
    return at(p, p);
}

std::size_t ConfusionCounts::fp() const {
    const auto p = static_cast<std::size_t>(positive_label);
    std::size_t n = 0;
    for (std::size_t g = 0; g < cardinality; ++g) {
        if (g != p) n += at(g, p);
    }
    return n;
}

std::size_t ConfusionCounts::fn() const {
    const auto p = static_cast<std::size_t>(positive_label);
    std::size_t n = 0;
    for (std::size_t c = 0; c < cardinality; ++c) {
        if (c != p) n += at(p, c);
    }
    return n;
}

std::size_t ConfusionCounts::tn() const {
    return total() - tp() - fp() - fn();
}

std::size_t ConfusionCounts::total() const {
    return std::accumulate(cells.begin(), cells.end(), std::size_t{0});
}

ConfusionCounts confusion(const std::vector<int>& gold, const std::vector<int>& predicted,
                          int positive_label, std::size_t cardinality) {
    if (gold.size() != predicted.size()) {
        throw DimensionError("gold and predicted label sequences differ in length: " +
                             std::to_string(gold.size()) + " vs " +
                             std::to_string(predicted.size()));
    }
    if (cardinality == 0) {
        cardinality = std::max<std::size_t>(infer_cardinality(gold, predicted), 2);
    }
    ConfusionCounts c(cardinality, positive_label);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] < 0 || static_cast<std::size_t>(gold[i]) >= cardinality) {
            throw ValidationError("gold label " + std::to_string(gold[i]) + " outside [0, " +
                                  std::to_string(cardinality) + ")");
        }
        if (predicted[i] < 0 || static_cast<std::size_t>(predicted[i]) >= cardinality) {
            throw ValidationError("predicted label " + std::to_string(predicted[i]) +
                                  " outside [0, " + std::to_string(cardinality) + ")");
        }
        ++c.at(static_cast<std::size_t>(gold[i]), static_cast<std::size_t>(predicted[i]));
    }
    return c;
}

ConfusionCounts confusion(const std::vector<ExpertPrediction>& predictions,
                          const std::vector<DataPointRecord>& records, int positive_label) {
    std::unordered_map<std::string, const DataPointRecord*> by_id;
    for (const DataPointRecord& r : records) by_id.emplace(r.id, &r);

    std::vector<int> gold;
    std::vector<int> predicted;
    gold.reserve(predictions.size());
    predicted.reserve(predictions.size());
    std::size_t cardinality = 0;
    for (const ExpertPrediction& p : predictions) {
        if (!p.ok()) continue;
        const auto it = by_id.find(p.id);
        if (it == by_id.end()) {
            throw ValidationError("prediction for unknown record '" + p.id + "'");
        }
        if (!it->second->gold_label) {
            throw ValidationError("record '" + p.id + "' has no gold label");
        }
        gold.push_back(*it->second->gold_label);
        predicted.push_back(p.label);
        cardinality = std::max(cardinality, it->second->delta1.size());
    }
    return confusion(gold, predicted, positive_label, std::max<std::size_t>(cardinality, 2));
}

Prf prf1(std::size_t tp, std::size_t fp, std::size_t fn) {
    Prf out;
    out.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    out.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double denom = out.precision + out.recall;
    out.f1 = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
    return out;
}

Prf prf1(const ConfusionCounts& c) {
    return prf1(c.tp(), c.fp(), c.fn());
}

Prf macro_prf1(const ConfusionCounts& c) {
    Prf sum;
    for (std::size_t label = 0; label < c.cardinality; ++label) {
        ConfusionCounts view = c;
        view.positive_label = static_cast<int>(label);
        const Prf one = prf1(view);
        sum.precision += one.precision;
        sum.recall += one.recall;
        sum.f1 += one.f1;
    }
    const double k = static_cast<double>(c.cardinality);
    return Prf{sum.precision / k, sum.recall / k, sum.f1 / k};
}

Prf bucket_metrics(const ConfusionCounts& c) {
    return c.cardinality <= 2 ? prf1(c) : macro_prf1(c);
}

EvaluationReport per_category_report(const std::vector<ExpertPrediction>& predictions,
                                     const std::vector<DataPointRecord>& records,
                                     const Partition& partition, int positive_label) {
    std::unordered_map<std::string, InteractionCategory> category_of;
    for (const auto& [category, ids] : partition) {
        for (const std::string& id : ids) category_of.emplace(id, category);
    }
    std::unordered_map<std::string, const DataPointRecord*> by_id;
    for (const DataPointRecord& r : records) by_id.emplace(r.id, &r);

    std::map<InteractionCategory, Bucket> buckets;
    for (const InteractionCategory c : kAllCategories) buckets[c];
    for (const ExpertPrediction& p : predictions) {
        if (!p.ok()) continue;
        const auto cat_it = category_of.find(p.id);
        if (cat_it == category_of.end()) {
            throw ValidationError("prediction '" + p.id + "' is outside the partition");
        }
        const auto rec_it = by_id.find(p.id);
        if (rec_it == by_id.end()) {
            throw ValidationError("prediction for unknown record '" + p.id + "'");
        }
        if (!rec_it->second->gold_label) {
            throw ValidationError("record '" + p.id + "' has no gold label");
        }
        Bucket& bucket = buckets[cat_it->second];
        bucket.gold.push_back(*rec_it->second->gold_label);
        bucket.predicted.push_back(p.label);
        bucket.confidence_sum += std::clamp(p.confidence, 0.0, 5.0);
    }
    return report_from_buckets(buckets, positive_label);
}

EvaluationReport per_category_report(const std::vector<ExpertPrediction>& predictions,
                                     int positive_label) {
    std::map<InteractionCategory, Bucket> buckets;
    for (const InteractionCategory c : kAllCategories) buckets[c];
    for (const ExpertPrediction& p : predictions) {
        if (!p.ok() || !p.gold_label) continue;
        Bucket& bucket = buckets[p.category];
        bucket.gold.push_back(*p.gold_label);
        bucket.predicted.push_back(p.label);
        bucket.confidence_sum += std::clamp(p.confidence, 0.0, 5.0);
    }
    return report_from_buckets(buckets, positive_label);
}

double improvement_pct(double single_value, double expert_value) {
    return (expert_value - single_value) / single_value * 100.0;
}

std::vector<ImprovementRow> compare_runs(const EvaluationReport& single_run,
                                         const EvaluationReport& expert_run) {
    if (single_run.per_category.size() != expert_run.per_category.size()) {
        throw ValidationError("reports disagree on the category breakdown: " +
                              std::to_string(single_run.per_category.size()) + " vs " +
                              std::to_string(expert_run.per_category.size()));
    }
    std::vector<ImprovementRow> rows;
    rows.reserve(expert_run.per_category.size());
    for (std::size_t i = 0; i < expert_run.per_category.size(); ++i) {
        const CategoryReport& s = single_run.per_category[i];
        const CategoryReport& e = expert_run.per_category[i];
        if (s.category != e.category) {
            throw ValidationError("reports disagree on category order at row " +
                                  std::to_string(i));
        }
        ImprovementRow row;
        row.category = e.category;
        row.example_count = e.example_count;
        row.f1_single = s.metrics.f1;
        row.f1_expert = e.metrics.f1;
        if (s.metrics.f1 != 0.0) {
            row.improvement_pct = improvement_pct(s.metrics.f1, e.metrics.f1);
        }
        rows.push_back(row);
    }
    return rows;
}

std::string render_report_table(const EvaluationReport& report) {
    const std::vector<std::string> header = {"Category", "#Example", "Precision",
                                             "Recall",   "F1",       "MeanConf"};
    std::vector<std::vector<std::string>> body;
    for (const CategoryReport& c : report.per_category) {
        if (!c.present) {
            body.push_back({category_display_name(c.category), "0", "-", "-", "-", "-"});
            continue;
        }
        body.push_back({category_display_name(c.category), std::to_string(c.example_count),
                        pct(c.metrics.precision), pct(c.metrics.recall), pct(c.metrics.f1),
                        fixed2(c.mean_confidence)});
    }
    body.push_back({"Overall", std::to_string(report.total), pct(report.overall.precision),
                    pct(report.overall.recall), pct(report.overall.f1),
                    fixed2(report.overall_mean_confidence)});

    std::vector<std::size_t> widths(header.size(), 0);
    for (std::size_t i = 0; i < header.size(); ++i) widths[i] = header[i].size();
    for (const auto& cells : body) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            widths[i] = std::max(widths[i], cells[i].size());
        }
    }
    std::string out = row(header, widths) + "\n";
    for (const auto& cells : body) out += row(cells, widths) + "\n";
    return out;
}

std::string render_comparison_table(const std::vector<ImprovementRow>& rows) {
    const std::vector<std::string> header = {"Category", "#Example", "F1 single", "F1 expert",
                                             "Improvement (%)"};
    std::vector<std::vector<std::string>> body;
    for (const ImprovementRow& r : rows) {
        body.push_back({category_display_name(r.category), std::to_string(r.example_count),
                        pct(r.f1_single), pct(r.f1_expert),
                        r.improvement_pct ? signed_pct(*r.improvement_pct) : "n/a"});
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (std::size_t i = 0; i < header.size(); ++i) widths[i] = header[i].size();
    for (const auto& cells : body) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            widths[i] = std::max(widths[i], cells[i].size());
        }
    }
    std::string out = row(header, widths) + "\n";
    for (const auto& cells : body) out += row(cells, widths) + "\n";
    return out;
}

void write_report(const EvaluationReport& report, std::ostream& out) {
    ordered_json meta;
    meta["kind"] = "meta";
    meta["gamma"] = report.meta.gamma;
    meta["tau"] = report.meta.tau;
    meta["strategy"] = to_string(report.meta.strategy);
    meta["seeds"] = report.meta.seeds;
    meta["timestamp"] = report.meta.timestamp;
    meta["positive_label"] = report.meta.positive_label;
    meta["total"] = report.total;
    out << meta.dump() << '\n';

    ordered_json overall;
    overall["kind"] = "overall";
    overall["count"] = report.total;
    overall["precision"] = report.overall.precision;
    overall["recall"] = report.overall.recall;
    overall["f1"] = report.overall.f1;
    overall["mean_confidence"] = report.overall_mean_confidence;
    out << overall.dump() << '\n';

    for (const CategoryReport& c : report.per_category) {
        ordered_json j;
        j["kind"] = "category";
        j["category"] = to_string(c.category);
        j["count"] = c.example_count;
        j["present"] = c.present;
        j["precision"] = c.metrics.precision;
        j["recall"] = c.metrics.recall;
        j["f1"] = c.metrics.f1;
        j["mean_confidence"] = c.mean_confidence;
        out << j.dump() << '\n';
    }
}

EvaluationReport read_report(std::istream& in) {
    EvaluationReport report;
    bool saw_meta = false;
    bool saw_overall = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        try {
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "meta") {
                report.meta.gamma = j.value("gamma", 0.5);
                report.meta.tau = j.value("tau", 0.5);
                report.meta.strategy =
                    strategy_from_string(j.value("strategy", std::string{"threshold"}));
                report.meta.seeds = j.value("seeds", std::vector<std::uint64_t>{});
                report.meta.timestamp = j.value("timestamp", std::string{});
                report.meta.positive_label = j.value("positive_label", 1);
                report.total = j.value("total", std::size_t{0});
                saw_meta = true;
            } else if (kind == "overall") {
                report.total = j.value("count", report.total);
                report.overall.precision = j.at("precision").get<double>();
                report.overall.recall = j.at("recall").get<double>();
                report.overall.f1 = j.at("f1").get<double>();
                report.overall_mean_confidence = j.value("mean_confidence", 0.0);
                saw_overall = true;
            } else if (kind == "category") {
                CategoryReport c;
                c.category = category_from_string(j.at("category").get<std::string>());
                c.example_count = j.at("count").get<std::size_t>();
                c.present = j.value("present", c.example_count > 0);
                c.metrics.precision = j.value("precision", 0.0);
                c.metrics.recall = j.value("recall", 0.0);
                c.metrics.f1 = j.value("f1", 0.0);
                c.mean_confidence = j.value("mean_confidence", 0.0);
                report.per_category.push_back(c);
            } else {
                throw ParseError(lineno, "unknown report line kind '" + kind + "'");
            }
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("malformed report line: ") + e.what());
        }
    }
    if (!saw_meta || !saw_overall) {
        throw ParseError(lineno, "report is missing its meta or overall line");
    }
    return report;
}

AggregateReport aggregate_reports(const std::vector<EvaluationReport>& reports) {
    if (reports.empty()) {
        throw ValidationError("nothing to aggregate");
    }
    const std::size_t categories = reports.front().per_category.size();
    for (const EvaluationReport& r : reports) {
        if (r.per_category.size() != categories) {
            throw ValidationError("reports disagree on the category breakdown");
        }
    }

    const auto cell_of = [](std::vector<double> values) {
        AggregateCell cell;
        cell.runs = values.size();
        cell.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                    static_cast<double>(values.size());
        if (values.size() > 1) {
            double ss = 0.0;
            for (const double v : values) ss += (v - cell.mean) * (v - cell.mean);
            cell.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
        return cell;
    };

    AggregateReport aggregate;
    aggregate.runs = reports.size();
    {
        std::vector<double> overall;
        overall.reserve(reports.size());
        for (const EvaluationReport& r : reports) overall.push_back(r.overall.f1);
        aggregate.overall_f1 = cell_of(std::move(overall));
    }
    for (std::size_t i = 0; i < categories; ++i) {
        AggregateCategory entry;
        entry.category = reports.front().per_category[i].category;
        std::vector<double> values;
        for (const EvaluationReport& r : reports) {
            if (r.per_category[i].category != entry.category) {
                throw ValidationError("reports disagree on category order at row " +
                                      std::to_string(i));
            }
            if (r.per_category[i].present) {
                values.push_back(r.per_category[i].metrics.f1);
                entry.example_count = r.per_category[i].example_count;
                entry.present = true;
            }
        }
        if (!values.empty()) entry.f1 = cell_of(std::move(values));
        aggregate.per_category.push_back(entry);
    }
    return aggregate;
}

std::string format_mean_std(const AggregateCell& cell) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << cell.mean * 100.0;
    if (cell.runs > 1) {
        os << "±" << std::fixed << std::setprecision(2) << cell.stddev * 100.0;
    }
    return os.str();
}

std::string render_aggregate_table(const AggregateReport& aggregate) {
    const std::vector<std::string> header = {"Category", "#Example", "Runs", "F1"};
    std::vector<std::vector<std::string>> body;
    for (const AggregateCategory& c : aggregate.per_category) {
        body.push_back({category_display_name(c.category), std::to_string(c.example_count),
                        std::to_string(c.present ? c.f1.runs : 0),
                        c.present ? format_mean_std(c.f1) : "-"});
    }
    body.push_back({"Overall", "", std::to_string(aggregate.overall_f1.runs),
                    format_mean_std(aggregate.overall_f1)});

    std::vector<std::size_t> widths(header.size(), 0);
    for (std::size_t i = 0; i < header.size(); ++i) widths[i] = header[i].size();
    for (const auto& cells : body) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            widths[i] = std::max(widths[i], cells[i].size());
        }
    }
    std::string out = row(header, widths) + "\n";
    for (const auto& cells : body) out += row(cells, widths) + "\n";
    return out;
}

}  // namespace mmoe
