#include "mmoe/dataset.hpp"
#include "mmoe/errors.hpp"
#include "mmoe/evaluation.hpp"
#include "mmoe/interaction.hpp"
#include "mmoe/routing.hpp"
#include "mmoe/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using mmoe::CategorizationConfig;
using mmoe::DataPointRecord;
using mmoe::InteractionCategory;
using mmoe::ParseOptions;

constexpr const char* kDefaultInstruction =
    "Answer with the label index that best fits the two modalities.";

// Values from --config fill in for flags the user did not pass; flags win.
struct ConfigFile {
    nlohmann::json values = nlohmann::json::object();

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw mmoe::ConfigError("cannot open config file: " + path);
        }
        try {
            values = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw mmoe::ConfigError("config file " + path + " is not valid JSON: " + e.what());
        }
        if (!values.is_object()) {
            throw mmoe::ConfigError("config file " + path + " must hold a JSON object");
        }
    }

    template <class T>
    void fill(const CLI::App* cmd, const std::string& flag, const char* key, T& target) const {
        if (cmd->count(flag) > 0) return;
        const auto it = values.find(key);
        if (it == values.end() || it->is_null()) return;
        try {
            target = it->get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw mmoe::ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    }
};

std::vector<DataPointRecord> load_records(const std::string& path, const ParseOptions& opts) {
    if (path == "-") {
        return mmoe::parse_dataset_stream(std::cin, opts);
    }
    return mmoe::parse_dataset(path, opts);
}

std::ostream& resolve_output(const std::string& path, std::ofstream& file) {
    if (path == "-") return std::cout;
    file.open(path);
    if (!file) {
        throw mmoe::ConfigError("cannot open output file: " + path);
    }
    return file;
}

std::ifstream open_input_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw mmoe::ConfigError("cannot open input file: " + path);
    }
    return in;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

mmoe::RoutingTable builtin_mock_table(std::size_t cardinality) {
    mmoe::RoutingTable table;
    auto probe = std::make_shared<mmoe::ConcurrencyProbe>();
    for (const InteractionCategory category : mmoe::kAllCategories) {
        mmoe::ExpertSpec spec;
        spec.category = category;
        spec.shot_count = 0;
        spec.instruction = kDefaultInstruction;
        std::vector<mmoe::MockRule> rules;
        for (std::size_t k = 0; k < cardinality; ++k) {
            rules.push_back(mmoe::MockRule{
                mmoe::planted_payload_token(category, static_cast<int>(k)), static_cast<int>(k),
                5.0});
        }
        auto mock = std::make_shared<mmoe::MockExpert>(std::move(rules), mmoe::MockRule{"", 0, 2.0});
        mock->set_probe(probe);
        spec.mock = std::move(mock);
        table.experts.emplace(category, std::move(spec));
    }
    return table;
}

struct ParseFlags {
    std::string format = "probs";
    double temperature = 1.0;

    ParseOptions options() const {
        ParseOptions opts;
        opts.format = mmoe::row_format_from_string(format);
        opts.temperature = temperature;
        return opts;
    }
};

void add_parse_flags(CLI::App* cmd, ParseFlags& flags) {
    cmd->add_option("--format", flags.format, "Row format of the dataset: probs|logits")
        ->check(CLI::IsMember({"probs", "logits"}));
    cmd->add_option("--temperature", flags.temperature,
                    "Softmax temperature applied to logit rows");
}

struct CategorizationFlags {
    double gamma = mmoe::CategorizationConfig{}.gamma;
    double tau = mmoe::CategorizationConfig{}.tau;
    std::string strategy = "threshold";

    CategorizationConfig config() const {
        CategorizationConfig cfg;
        cfg.gamma = gamma;
        cfg.tau = tau;
        cfg.strategy = mmoe::strategy_from_string(strategy);
        cfg.validate();
        return cfg;
    }
};

void add_categorization_flags(CLI::App* cmd, CategorizationFlags& flags) {
    cmd->add_option("--gamma", flags.gamma, "Disagreement threshold on d12");
    cmd->add_option("--tau", flags.tau, "Closeness threshold on d1m/d2m");
    cmd->add_option("--strategy", flags.strategy, "Categorization strategy: threshold|argmax")
        ->check(CLI::IsMember({"threshold", "argmax"}));
}

void fill_parse_flags(const ConfigFile& cfg, const CLI::App* cmd, ParseFlags& flags) {
    cfg.fill(cmd, "--format", "format", flags.format);
    cfg.fill(cmd, "--temperature", "temperature", flags.temperature);
}

void fill_categorization_flags(const ConfigFile& cfg, const CLI::App* cmd,
                               CategorizationFlags& flags) {
    cfg.fill(cmd, "--gamma", "gamma", flags.gamma);
    cfg.fill(cmd, "--tau", "tau", flags.tau);
    cfg.fill(cmd, "--strategy", "strategy", flags.strategy);
}

int run(int argc, char** argv) {
    CLI::App app{"Quantify multimodal interactions, partition datasets, and route records to "
                 "category experts"};
    app.require_subcommand(1);

    // synth ------------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a dataset with planted categories");
    std::string synth_config_path;
    CategorizationFlags synth_cat;
    std::size_t synth_count = 10;
    double synth_margin = 0.1;
    std::uint64_t synth_seed = 42;
    std::size_t synth_cardinality = 2;
    std::vector<std::string> synth_categories;
    std::string synth_output = "-";
    synth->add_option("--config", synth_config_path, "JSON config file");
    add_categorization_flags(synth, synth_cat);
    synth->add_option("--count", synth_count, "Records per planted category");
    synth->add_option("--margin", synth_margin, "Slack each threshold comparison must satisfy");
    synth->add_option("--seed", synth_seed, "Deterministic generator seed");
    synth->add_option("--cardinality", synth_cardinality, "Label cardinality of the dataset");
    synth->add_option("--category", synth_categories,
                      "Restrict generation to these categories (repeatable)");
    synth->add_option("--output,-o", synth_output, "Output path, '-' for stdout");
    synth->callback([&] {
        ConfigFile cfg;
        if (!synth_config_path.empty()) cfg.load(synth_config_path);
        fill_categorization_flags(cfg, synth, synth_cat);
        cfg.fill(synth, "--count", "count", synth_count);
        cfg.fill(synth, "--margin", "margin", synth_margin);
        cfg.fill(synth, "--seed", "seed", synth_seed);
        cfg.fill(synth, "--cardinality", "cardinality", synth_cardinality);
        cfg.fill(synth, "--output", "output", synth_output);

        std::vector<InteractionCategory> wanted;
        if (synth_categories.empty()) {
            wanted.assign(mmoe::kReportOrder.begin(), mmoe::kReportOrder.end());
        } else {
            for (const std::string& name : synth_categories) {
                wanted.push_back(mmoe::category_from_string(name));
            }
        }
        std::vector<mmoe::PlantedSpec> specs;
        for (const InteractionCategory category : wanted) {
            specs.push_back(mmoe::PlantedSpec{category, synth_count, synth_margin, synth_seed});
        }
        const auto records = mmoe::generate(specs, synth_cat.config(), synth_cardinality);
        std::ofstream file;
        std::ostream& out = resolve_output(synth_output, file);
        mmoe::serialize_dataset(records, out);
    });

    // categorize -------------------------------------------------------------
    auto* categorize = app.add_subcommand(
        "categorize", "Score every record and split the dataset into the five categories");
    std::string cat_config_path;
    ParseFlags cat_parse;
    CategorizationFlags cat_cat;
    std::string cat_input = "-";
    std::string cat_output = "-";
    std::string cat_partition_path;
    categorize->add_option("--config", cat_config_path, "JSON config file");
    add_parse_flags(categorize, cat_parse);
    add_categorization_flags(categorize, cat_cat);
    categorize->add_option("--input,-i,input", cat_input, "Dataset path, '-' for stdin");
    categorize->add_option("--output,-o", cat_output, "Annotated record output, '-' for stdout");
    categorize->add_option("--partition", cat_partition_path,
                           "Also write the partition document here");
    categorize->callback([&] {
        ConfigFile cfg;
        if (!cat_config_path.empty()) cfg.load(cat_config_path);
        fill_parse_flags(cfg, categorize, cat_parse);
        fill_categorization_flags(cfg, categorize, cat_cat);
        cfg.fill(categorize, "--input", "dataset", cat_input);
        cfg.fill(categorize, "--output", "output", cat_output);
        cfg.fill(categorize, "--partition", "partition", cat_partition_path);

        const CategorizationConfig ccfg = cat_cat.config();
        const auto records = load_records(cat_input, cat_parse.options());
        const mmoe::Partition partition = mmoe::partition_dataset(records, ccfg);

        std::ofstream file;
        std::ostream& out = resolve_output(cat_output, file);
        for (const DataPointRecord& r : records) {
            const auto distances = mmoe::pairwise_distances(r.delta1, r.delta2, r.delta_m);
            const mmoe::Categorization c = mmoe::categorize(distances, ccfg);
            const mmoe::RecordAnnotation annotation{c.scores, c.category};
            out << mmoe::serialize_record(r, &annotation) << '\n';
        }
        if (!cat_partition_path.empty()) {
            std::ofstream pfile(cat_partition_path);
            if (!pfile) {
                throw mmoe::ConfigError("cannot open partition file: " + cat_partition_path);
            }
            mmoe::write_partition(partition, ccfg, pfile);
        }
        for (const InteractionCategory category : mmoe::kReportOrder) {
            std::cerr << mmoe::to_string(category) << ": " << partition.at(category).size()
                      << '\n';
        }
        std::cerr << "total: " << records.size() << '\n';
    });

    // route ------------------------------------------------------------------
    auto* route = app.add_subcommand("route", "Send each record to its category's expert");
    std::string route_config_path;
    ParseFlags route_parse;
    CategorizationFlags route_cat;
    std::string route_input = "-";
    std::string route_output = "-";
    std::string route_table_path;
    bool route_mock = false;
    std::string route_pools_path;
    int route_max_in_flight = 0;
    double route_backoff_base = 0.0;
    double route_backoff_factor = 0.0;
    bool route_fail_fast = false;
    bool route_scramble = false;
    std::int64_t route_shuffle_seed = -1;
    route->add_option("--config", route_config_path, "JSON config file");
    add_parse_flags(route, route_parse);
    add_categorization_flags(route, route_cat);
    route->add_option("--input,-i,input", route_input, "Dataset path, '-' for stdin");
    route->add_option("--output,-o", route_output, "Prediction output, '-' for stdout");
    route->add_option("--routing", route_table_path, "Routing table JSON");
    route->add_flag("--mock", route_mock, "Use the built-in offline mock experts");
    route->add_option("--pools", route_pools_path,
                      "Labeled dataset supplying few-shot examples");
    route->add_option("--max-in-flight", route_max_in_flight,
                      "Cap on concurrently active expert calls");
    route->add_option("--backoff-base", route_backoff_base, "Retry backoff base in seconds");
    route->add_option("--backoff-factor", route_backoff_factor, "Retry backoff growth factor");
    route->add_flag("--fail-fast", route_fail_fast,
                    "Abort on the first failed record instead of recording it inline");
    route->add_flag("--scramble-routing", route_scramble,
                    "Rotate experts across categories (test hook)");
    route->add_option("--shuffle-seed", route_shuffle_seed,
                      "Reshuffle few-shot pools with this seed");
    route->callback([&] {
        ConfigFile cfg;
        if (!route_config_path.empty()) cfg.load(route_config_path);
        fill_parse_flags(cfg, route, route_parse);
        fill_categorization_flags(cfg, route, route_cat);
        cfg.fill(route, "--input", "dataset", route_input);
        cfg.fill(route, "--output", "output", route_output);
        cfg.fill(route, "--routing", "routing", route_table_path);
        cfg.fill(route, "--pools", "pools", route_pools_path);
        cfg.fill(route, "--max-in-flight", "max_in_flight", route_max_in_flight);

        const CategorizationConfig ccfg = route_cat.config();
        const auto records = load_records(route_input, route_parse.options());

        mmoe::RoutingTable table;
        if (route_mock) {
            const std::size_t cardinality = records.empty() ? 2 : records.front().delta1.size();
            table = builtin_mock_table(cardinality);
        } else if (!route_table_path.empty()) {
            table = mmoe::load_routing_table(route_table_path);
        } else {
            throw mmoe::ConfigError("route needs --routing CONFIG or --mock");
        }
        if (route_max_in_flight > 0) table.max_in_flight = route_max_in_flight;
        if (route_backoff_base > 0.0) table.backoff_base_s = route_backoff_base;
        if (route_backoff_factor > 0.0) table.backoff_factor = route_backoff_factor;
        if (route_scramble) table = mmoe::scramble_routing(table);

        mmoe::RouteOptions opts;
        opts.fail_fast = route_fail_fast;
        if (route_shuffle_seed >= 0) {
            opts.shuffle_seed = static_cast<std::uint64_t>(route_shuffle_seed);
        }
        if (!route_pools_path.empty()) {
            const auto pool_records = load_records(route_pools_path, route_parse.options());
            opts.pools = mmoe::build_pools(pool_records, ccfg);
        }

        const mmoe::RouteResult result = mmoe::route_dataset(records, table, ccfg, opts);
        std::ofstream file;
        std::ostream& out = resolve_output(route_output, file);
        mmoe::write_predictions(result.predictions, ccfg, out);
        if (result.failures > 0) {
            std::cerr << result.failures << " of " << records.size()
                      << " records failed; their lines carry an error field\n";
        }
    });

    // evaluate ---------------------------------------------------------------
    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold labels");
    std::string eval_config_path;
    std::vector<std::string> eval_inputs;
    std::string eval_dataset_path;
    std::string eval_partition_path;
    int eval_positive = 1;
    std::string eval_report_path;
    std::string eval_compare_path;
    bool eval_stamp = false;
    std::vector<std::uint64_t> eval_seeds;
    evaluate->add_option("--config", eval_config_path, "JSON config file");
    evaluate->add_option("--input,-i,input", eval_inputs,
                         "Prediction files, '-' for stdin; several files aggregate");
    evaluate->add_option("--dataset", eval_dataset_path,
                         "Dataset with gold labels (otherwise gold rides on predictions)");
    evaluate->add_option("--partition", eval_partition_path,
                         "Partition document fixing each record's category");
    evaluate->add_option("--positive", eval_positive, "Positive class for binary metrics");
    evaluate->add_option("--report", eval_report_path, "Write the machine-readable report here");
    evaluate->add_option("--compare", eval_compare_path,
                         "Baseline report; adds the improvement table");
    evaluate->add_flag("--stamp", eval_stamp, "Stamp the report with the current UTC time");
    evaluate->add_option("--seed", eval_seeds, "Seeds to carry in the report metadata");
    evaluate->callback([&] {
        ConfigFile cfg;
        if (!eval_config_path.empty()) cfg.load(eval_config_path);
        cfg.fill(evaluate, "--dataset", "dataset", eval_dataset_path);
        cfg.fill(evaluate, "--partition", "partition", eval_partition_path);
        cfg.fill(evaluate, "--positive", "positive", eval_positive);
        if (eval_inputs.empty()) eval_inputs.push_back("-");

        std::optional<std::vector<DataPointRecord>> records;
        if (!eval_dataset_path.empty()) {
            records = load_records(eval_dataset_path, ParseOptions{});
        }
        std::optional<mmoe::Partition> partition;
        CategorizationConfig partition_cfg;
        if (!eval_partition_path.empty()) {
            std::ifstream pin = open_input_file(eval_partition_path);
            auto loaded = mmoe::read_partition(pin);
            partition = std::move(loaded.first);
            partition_cfg = loaded.second;
        }
        if (records.has_value() != partition.has_value()) {
            throw mmoe::ConfigError("--dataset and --partition must be given together");
        }

        std::vector<mmoe::EvaluationReport> reports;
        for (const std::string& path : eval_inputs) {
            std::vector<mmoe::ExpertPrediction> predictions;
            if (path == "-") {
                predictions = mmoe::read_predictions(std::cin);
            } else {
                std::ifstream in = open_input_file(path);
                predictions = mmoe::read_predictions(in);
            }
            mmoe::EvaluationReport report;
            if (records) {
                report = mmoe::per_category_report(predictions, *records, *partition,
                                                   eval_positive);
                report.meta.gamma = partition_cfg.gamma;
                report.meta.tau = partition_cfg.tau;
                report.meta.strategy = partition_cfg.strategy;
            } else {
                report = mmoe::per_category_report(predictions, eval_positive);
            }
            report.meta.seeds = eval_seeds;
            if (eval_stamp) report.meta.timestamp = utc_timestamp();
            reports.push_back(std::move(report));
        }

        if (reports.size() == 1) {
            const mmoe::EvaluationReport& report = reports.front();
            std::cout << mmoe::render_report_table(report);
            if (!eval_compare_path.empty()) {
                std::ifstream bin = open_input_file(eval_compare_path);
                const mmoe::EvaluationReport baseline = mmoe::read_report(bin);
                const auto rows = mmoe::compare_runs(baseline, report);
                std::cout << '\n' << mmoe::render_comparison_table(rows);
            }
            if (!eval_report_path.empty()) {
                std::ofstream rout(eval_report_path);
                if (!rout) {
                    throw mmoe::ConfigError("cannot open report file: " + eval_report_path);
                }
                mmoe::write_report(report, rout);
            }
        } else {
            if (!eval_report_path.empty() || !eval_compare_path.empty()) {
                throw mmoe::ConfigError(
                    "--report and --compare work on a single prediction file");
            }
            const mmoe::AggregateReport aggregate = mmoe::aggregate_reports(reports);
            std::cout << mmoe::render_aggregate_table(aggregate);
        }
    });

    // summarize --------------------------------------------------------------
    auto* summarize = app.add_subcommand("summarize", "Describe a dataset file");
    std::string sum_config_path;
    ParseFlags sum_parse;
    std::string sum_input = "-";
    bool sum_json = false;
    summarize->add_option("--config", sum_config_path, "JSON config file");
    add_parse_flags(summarize, sum_parse);
    summarize->add_option("--input,-i,input", sum_input, "Dataset path, '-' for stdin");
    summarize->add_flag("--json", sum_json, "Emit the summary as one JSON object");
    summarize->callback([&] {
        ConfigFile cfg;
        if (!sum_config_path.empty()) cfg.load(sum_config_path);
        fill_parse_flags(cfg, summarize, sum_parse);
        cfg.fill(summarize, "--input", "dataset", sum_input);

        const auto records = load_records(sum_input, sum_parse.options());
        const mmoe::DatasetSummary summary = mmoe::summarize(records);
        if (sum_json) {
            nlohmann::ordered_json j;
            j["count"] = summary.count;
            if (summary.label_cardinality) j["label_cardinality"] = *summary.label_cardinality;
            j["gold_label_coverage"] = summary.gold_label_coverage;
            if (summary.marginal_delta1) j["marginal_delta_1"] = summary.marginal_delta1->probs();
            if (summary.marginal_delta2) j["marginal_delta_2"] = summary.marginal_delta2->probs();
            if (summary.marginal_delta_m) j["marginal_delta_m"] = summary.marginal_delta_m->probs();
            std::cout << j.dump(2) << '\n';
            return;
        }
        std::cout << "records: " << summary.count << '\n';
        if (summary.label_cardinality) {
            std::cout << "label cardinality: " << *summary.label_cardinality << '\n';
        }
        std::cout << "gold label coverage: " << summary.gold_label_coverage << '\n';
        const auto print_marginal = [](const char* name,
                                       const std::optional<mmoe::LabelDistribution>& d) {
            if (!d) return;
            std::cout << name << ":";
            for (std::size_t i = 0; i < d->size(); ++i) std::cout << ' ' << (*d)[i];
            std::cout << '\n';
        };
        print_marginal("mean delta_1", summary.marginal_delta1);
        print_marginal("mean delta_2", summary.marginal_delta2);
        print_marginal("mean delta_m", summary.marginal_delta_m);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mmoe::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const mmoe::GenerationError& e) {
        std::cerr << "generation error: " << e.what() << '\n';
        return 1;
    } catch (const mmoe::RoutingError& e) {
        std::cerr << "routing error: " << e.what() << '\n';
        return 3;
    } catch (const mmoe::TransportError& e) {
        std::cerr << "transport error: " << e.what() << '\n';
        return 3;
    } catch (const mmoe::ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << '\n';
        return 3;
    } catch (const mmoe::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
