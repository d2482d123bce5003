#include "mmoe/dataset.hpp"

#include "mmoe/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace mmoe {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool blank_line(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<double> number_array(const json& j, const std::string& field, std::size_t lineno) {
    const auto it = j.find(field);
    if (it == j.end()) {
        throw ParseError(lineno, "missing field '" + field + "'");
    }
    if (!it->is_array()) {
        throw ParseError(lineno, "field '" + field + "' must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_number()) {
            throw ParseError(lineno, "field '" + field + "' must be an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

LabelDistribution load_distribution(const json& j, const std::string& field,
                                    const ParseOptions& opts, std::size_t lineno) {
    std::vector<double> values = number_array(j, field, lineno);
    try {
        if (opts.format == RowFormat::ProbabilityRows) {
            return LabelDistribution::from_probs(std::move(values));
        }
        return normalize_logits(values, opts.temperature);
    } catch (const DimensionError& e) {
        throw DimensionError("line " + std::to_string(lineno) + ", field '" + field +
                             "': " + e.what());
    } catch (const Error& e) {
        throw ValidationError("line " + std::to_string(lineno) + ", field '" + field +
                              "': " + e.what());
    }
}

}  // namespace

void DataPointRecord::validate() const {
    if (id.empty()) {
        throw ValidationError("empty datapoint id");
    }
    if (!delta1.valid() || !delta2.valid() || !delta_m.valid()) {
        throw ValidationError("distribution off the simplex");
    }
    if (delta1.size() != delta2.size() || delta1.size() != delta_m.size()) {
        throw DimensionError("distribution cardinalities differ: " +
                             std::to_string(delta1.size()) + "/" + std::to_string(delta2.size()) +
                             "/" + std::to_string(delta_m.size()));
    }
    if (gold_label && (*gold_label < 0 || static_cast<std::size_t>(*gold_label) >= delta1.size())) {
        throw ValidationError("gold label " + std::to_string(*gold_label) +
                              " outside [0, " + std::to_string(delta1.size()) + ")");
    }
}

std::string to_string(RowFormat f) {
    return f == RowFormat::ProbabilityRows ? "probs" : "logits";
}

RowFormat row_format_from_string(const std::string& name) {
    if (name == "probs") return RowFormat::ProbabilityRows;
    if (name == "logits") return RowFormat::LogitRows;
    throw ConfigError("unknown row format '" + name + "' (expected probs|logits)");
}

std::vector<DataPointRecord> parse_dataset(const std::filesystem::path& path,
                                           const ParseOptions& opts) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open dataset file: " + path.string());
    }
    return parse_dataset_stream(in, opts);
}

std::vector<DataPointRecord> parse_dataset_stream(std::istream& in, const ParseOptions& opts) {
    std::vector<DataPointRecord> records;
    std::unordered_set<std::string> seen_ids;
    std::optional<std::size_t> cardinality;
    std::string line;
    std::size_t lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        if (blank_line(line) || line[0] == '#') continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) {
            throw ParseError(lineno, "expected a JSON object");
        }

        DataPointRecord r;
        const auto id_it = j.find("id");
        if (id_it == j.end() || !id_it->is_string()) {
            throw ParseError(lineno, "missing string field 'id'");
        }
        r.id = id_it->get<std::string>();
        if (r.id.empty()) {
            throw ValidationError("line " + std::to_string(lineno) + ": empty id");
        }
        if (!seen_ids.insert(r.id).second) {
            throw ValidationError("line " + std::to_string(lineno) + ": duplicate id '" + r.id +
                                  "'");
        }

        const bool probs = opts.format == RowFormat::ProbabilityRows;
        r.delta1 = load_distribution(j, probs ? "delta_1" : "logits_1", opts, lineno);
        r.delta2 = load_distribution(j, probs ? "delta_2" : "logits_2", opts, lineno);
        r.delta_m = load_distribution(j, probs ? "delta_m" : "logits_m", opts, lineno);

        if (r.delta1.size() != r.delta2.size() || r.delta1.size() != r.delta_m.size()) {
            throw DimensionError("line " + std::to_string(lineno) +
                                 ": distribution cardinalities differ: " +
                                 std::to_string(r.delta1.size()) + "/" +
                                 std::to_string(r.delta2.size()) + "/" +
                                 std::to_string(r.delta_m.size()));
        }
        if (!cardinality) {
            cardinality = r.delta1.size();
        } else if (r.delta1.size() != *cardinality) {
            throw DimensionError("line " + std::to_string(lineno) + ": cardinality " +
                                 std::to_string(r.delta1.size()) +
                                 " differs from the dataset-wide " + std::to_string(*cardinality));
        }

        const auto label_it = j.find("label");
        if (label_it != j.end() && !label_it->is_null()) {
            if (!label_it->is_number_integer()) {
                throw ParseError(lineno, "field 'label' must be an integer");
            }
            r.gold_label = label_it->get<int>();
        }

        const auto payload_it = j.find("payload");
        if (payload_it != j.end() && !payload_it->is_null()) {
            if (!payload_it->is_object()) {
                throw ParseError(lineno, "field 'payload' must be an object");
            }
            r.payload.text1 = payload_it->value("text_1", std::string{});
            r.payload.text2 = payload_it->value("text_2", std::string{});
        }

        try {
            r.validate();
        } catch (const Error& e) {
            throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::string serialize_record(const DataPointRecord& record, const RecordAnnotation* annotation) {
    ordered_json j;
    j["id"] = record.id;
    j["delta_1"] = record.delta1.probs();
    j["delta_2"] = record.delta2.probs();
    j["delta_m"] = record.delta_m.probs();
    if (record.gold_label) {
        j["label"] = *record.gold_label;
    }
    if (!record.payload.text1.empty() || !record.payload.text2.empty()) {
        j["payload"] = {{"text_1", record.payload.text1}, {"text_2", record.payload.text2}};
    }
    if (annotation) {
        const RusScores& s = annotation->scores;
        j["d12"] = s.distances.d12;
        j["d1m"] = s.distances.d1m;
        j["d2m"] = s.distances.d2m;
        j["redundancy"] = s.redundancy;
        j["unique1"] = s.unique1;
        j["unique2"] = s.unique2;
        j["synergy"] = s.synergy;
        j["category"] = to_string(annotation->category);
    }
    return j.dump();
}

void serialize_dataset(const std::vector<DataPointRecord>& records, std::ostream& out) {
    for (const DataPointRecord& r : records) {
        out << serialize_record(r) << '\n';
    }
}

DatasetSummary summarize(const std::vector<DataPointRecord>& records) {
    DatasetSummary s;
    s.count = records.size();
    if (records.empty()) {
        return s;
    }
    const std::size_t k = records.front().delta1.size();
    s.label_cardinality = k;

    std::size_t with_gold = 0;
    std::vector<double> m1(k, 0.0), m2(k, 0.0), mm(k, 0.0);
    for (const DataPointRecord& r : records) {
        if (r.gold_label) ++with_gold;
        for (std::size_t i = 0; i < k; ++i) {
            m1[i] += r.delta1[i];
            m2[i] += r.delta2[i];
            mm[i] += r.delta_m[i];
        }
    }
    const double n = static_cast<double>(records.size());
    for (std::size_t i = 0; i < k; ++i) {
        m1[i] /= n;
        m2[i] /= n;
        mm[i] /= n;
    }
    s.gold_label_coverage = static_cast<double>(with_gold) / n;
    s.marginal_delta1 = LabelDistribution::from_probs(std::move(m1));
    s.marginal_delta2 = LabelDistribution::from_probs(std::move(m2));
    s.marginal_delta_m = LabelDistribution::from_probs(std::move(mm));
    return s;
}

}  // namespace mmoe
