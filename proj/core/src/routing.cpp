#include "mmoe/routing.hpp"

#include "mmoe/errors.hpp"
#include "mmoe/rng.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace mmoe {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

WireResponse mock_roundtrip(const ExpertSpec& spec, const WireRequest& req) {
    const MockResponse m = spec.mock->respond(req.prompt);
    return WireResponse{m.label, m.confidence, m.raw};
}

WireResponse http_roundtrip(const ExpertSpec& spec, const WireRequest& req) {
    const HttpUrl url = parse_http_url(spec.endpoint);
    httplib::Client client(url.host, url.port);
    const auto sec = static_cast<time_t>(spec.timeout_s);
    const auto usec = static_cast<time_t>((spec.timeout_s - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    const auto res = client.Post(url.path, to_json(req), "application/json");
    if (!res) {
        throw TransportError("request to " + spec.endpoint +
                             " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TransportError("expert at " + spec.endpoint + " answered HTTP " +
                             std::to_string(res->status));
    }
    return wire_response_from_json(res->body);
}

MockRule parse_mock_rule(const json& j) {
    MockRule r;
    r.contains = j.value("contains", std::string{});
    r.label = j.at("label").get<int>();
    r.confidence = j.value("confidence", 0.0);
    return r;
}

}  // namespace

std::string to_json(const WireRequest& req) {
    ordered_json j;
    j["prompt"] = req.prompt;
    j["label_cardinality"] = req.label_cardinality;
    return j.dump();
}

std::string to_json(const WireResponse& resp) {
    ordered_json j;
    j["label"] = resp.label;
    j["confidence"] = resp.confidence;
    j["raw"] = resp.raw;
    return j.dump();
}

WireRequest wire_request_from_json(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("request body is not JSON: ") + e.what(), body);
    }
    if (!j.is_object() || !j.contains("prompt") || !j["prompt"].is_string() ||
        !j.contains("label_cardinality") || !j["label_cardinality"].is_number_integer()) {
        throw ProtocolError("request body must carry string 'prompt' and integer "
                            "'label_cardinality'",
                            body);
    }
    return WireRequest{j["prompt"].get<std::string>(), j["label_cardinality"].get<int>()};
}

WireResponse wire_response_from_json(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("expert reply is not JSON: ") + e.what(), body);
    }
    if (!j.is_object() || !j.contains("label") || !j["label"].is_number_integer() ||
        !j.contains("confidence") || !j["confidence"].is_number()) {
        throw ProtocolError("expert reply must carry integer 'label' and numeric 'confidence'",
                            body);
    }
    WireResponse resp;
    resp.label = j["label"].get<int>();
    resp.confidence = j["confidence"].get<double>();
    if (j.contains("raw") && j["raw"].is_string()) {
        resp.raw = j["raw"].get<std::string>();
    }
    return resp;
}

HttpUrl parse_http_url(const std::string& url) {
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
        throw ConfigError("expert endpoint must use http://: " + url);
    }
    const std::string rest = url.substr(scheme.size());
    const std::size_t slash = rest.find('/');
    const std::string authority = rest.substr(0, slash);
    if (authority.empty()) {
        throw ConfigError("expert endpoint has no host: " + url);
    }
    HttpUrl out;
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    const std::size_t colon = authority.rfind(':');
    if (colon == std::string::npos) {
        out.host = authority;
    } else {
        out.host = authority.substr(0, colon);
        try {
            out.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("expert endpoint has a malformed port: " + url);
        }
        if (out.port <= 0 || out.port > 65535) {
            throw ConfigError("expert endpoint port out of range: " + url);
        }
    }
    if (out.host.empty()) {
        throw ConfigError("expert endpoint has no host: " + url);
    }
    return out;
}

PoolMap build_pools(const std::vector<DataPointRecord>& records, const CategorizationConfig& cfg) {
    cfg.validate();
    PoolMap pools;
    for (const InteractionCategory c : kAllCategories) pools[c];
    for (const DataPointRecord& r : records) {
        if (!r.gold_label) continue;
        const auto d = pairwise_distances(r.delta1, r.delta2, r.delta_m);
        const InteractionCategory c = categorize(d, cfg).category;
        pools[c].push_back(FewShotExample{r.id, r.payload.text1, r.payload.text2, *r.gold_label});
    }
    return pools;
}

PoolMap shuffled_pools(const PoolMap& pools, std::uint64_t seed) {
    PoolMap out = pools;
    for (auto& [category, pool] : out) {
        std::mt19937_64 g(fnv1a(to_string(category), seed ^ 0x9e3779b97f4a7c15ull));
        shuffle_inplace(pool, g);
    }
    return out;
}

void RoutingTable::validate() const {
    if (experts.empty()) {
        throw ConfigError("routing table has no experts");
    }
    if (max_in_flight < 1) {
        throw ConfigError("max_in_flight must be at least 1, got " +
                          std::to_string(max_in_flight));
    }
    if (!(backoff_base_s > 0.0) || !std::isfinite(backoff_base_s)) {
        throw ConfigError("backoff_base_s must be positive");
    }
    if (!(backoff_factor >= 1.0) || !std::isfinite(backoff_factor)) {
        throw ConfigError("backoff_factor must be at least 1");
    }
    // The key is the category being served; spec.category names the expert
    // itself. They diverge on purpose under scramble_routing.
    for (const auto& [category, spec] : experts) {
        if (!spec.mock && spec.endpoint.empty()) {
            throw ConfigError("expert for " + to_string(category) +
                              " has neither an endpoint nor mock behaviour");
        }
        if (!spec.endpoint.empty()) {
            parse_http_url(spec.endpoint);
        }
        if (!(spec.timeout_s > 0.0)) {
            throw ConfigError("expert for " + to_string(category) + " has a non-positive timeout");
        }
        if (spec.max_retries < 0) {
            throw ConfigError("expert for " + to_string(category) + " has negative max_retries");
        }
    }
}

RoutingTable load_routing_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open routing config: " + path.string());
    }
    return load_routing_table_stream(in, path.string());
}

RoutingTable load_routing_table_stream(std::istream& in, const std::string& origin) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("routing config " + origin + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("routing config " + origin + " must be a JSON object");
    }

    RoutingTable table;
    std::shared_ptr<ConcurrencyProbe> probe;
    try {
        table.max_in_flight = j.value("max_in_flight", 1);
        table.backoff_base_s = j.value("backoff_base_s", 1.0);
        table.backoff_factor = j.value("backoff_factor", 2.0);
        if (!j.contains("experts") || !j["experts"].is_array()) {
            throw ConfigError("routing config needs an 'experts' array");
        }
        for (const json& je : j["experts"]) {
            ExpertSpec spec;
            spec.category = category_from_string(je.at("category").get<std::string>());
            spec.endpoint = je.value("endpoint", std::string{});
            spec.shot_count = je.value("shot_count", std::size_t{0});
            spec.instruction = je.value("instruction", std::string{});
            spec.timeout_s = je.value("timeout_s", 10.0);
            spec.max_retries = je.value("max_retries", 3);
            if (je.contains("mock_behavior")) {
                const json& jm = je["mock_behavior"];
                std::vector<MockRule> rules;
                if (jm.contains("rules")) {
                    for (const json& jr : jm["rules"]) rules.push_back(parse_mock_rule(jr));
                }
                if (!jm.contains("default")) {
                    throw ConfigError("mock_behavior needs a 'default' rule");
                }
                auto mock = std::make_shared<MockExpert>(std::move(rules),
                                                         parse_mock_rule(jm["default"]));
                mock->set_latency_ms(jm.value("latency_ms", 0));
                mock->set_fail_first(jm.value("fail_first", 0));
                if (!probe) probe = std::make_shared<ConcurrencyProbe>();
                mock->set_probe(probe);
                spec.mock = std::move(mock);
            }
            if (!table.experts.emplace(spec.category, spec).second) {
                throw ConfigError("duplicate expert for category " + to_string(spec.category));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError("routing config " + origin + " is malformed: " + e.what());
    }
    table.validate();
    return table;
}

RoutingTable scramble_routing(const RoutingTable& table) {
    RoutingTable out = table;
    std::vector<InteractionCategory> keys;
    keys.reserve(table.experts.size());
    for (const auto& [category, spec] : table.experts) keys.push_back(category);
    if (keys.size() < 2) return out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        out.experts[keys[i]] = table.experts.at(keys[(i + 1) % keys.size()]);
    }
    return out;
}

std::string assemble_prompt(const ExpertSpec& spec, const FewShotPool& pool,
                            const DataPointRecord& target) {
    std::string prompt;
    if (!spec.instruction.empty()) {
        prompt += spec.instruction;
        prompt += "\n\n";
    }
    std::size_t used = 0;
    for (const FewShotExample& ex : pool) {
        if (used >= spec.shot_count) break;
        if (ex.id == target.id) continue;
        prompt += "Modality1: " + ex.text1 + "\n";
        prompt += "Modality2: " + ex.text2 + "\n";
        prompt += "Answer: " + std::to_string(ex.label) + "\n\n";
        ++used;
    }
    prompt += "Modality1: " + target.payload.text1 + "\n";
    prompt += "Modality2: " + target.payload.text2 + "\n";
    prompt += "Answer:";
    return prompt;
}

ExpertPrediction dispatch(const ExpertSpec& spec, const std::string& prompt,
                          std::size_t label_cardinality, double backoff_base_s,
                          double backoff_factor, std::uint64_t jitter_seed) {
    if (!spec.mock && spec.endpoint.empty()) {
        throw ConfigError("expert for " + to_string(spec.category) +
                          " has neither an endpoint nor mock behaviour");
    }
    const WireRequest req{prompt, static_cast<int>(label_cardinality)};
    std::mt19937_64 jitter(fnv1a(prompt, jitter_seed ^ 0x9e3779b97f4a7c15ull));
    std::string last_error = "no attempt made";

    for (int attempt = 0; attempt <= spec.max_retries; ++attempt) {
        if (attempt > 0) {
            const double cap = backoff_base_s * std::pow(backoff_factor, attempt - 1);
            const double delay_s = uniform_range(jitter, 0.0, cap);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay_s));
        }
        try {
            const WireResponse resp =
                spec.mock ? mock_roundtrip(spec, req) : http_roundtrip(spec, req);
            if (resp.label < 0 || resp.label >= static_cast<int>(label_cardinality)) {
                throw ProtocolError("expert label " + std::to_string(resp.label) +
                                        " outside [0, " + std::to_string(label_cardinality) + ")",
                                    resp.raw);
            }
            if (!std::isfinite(resp.confidence)) {
                throw ProtocolError("expert confidence is not finite", resp.raw);
            }
            ExpertPrediction p;
            p.category = spec.category;
            p.label = resp.label;
            p.confidence = std::clamp(resp.confidence, 0.0, 5.0);
            p.attempts = attempt + 1;
            return p;
        } catch (const TransportError& e) {
            last_error = e.what();
        }
    }
    throw RoutingError("expert for " + to_string(spec.category) + " failed after " +
                       std::to_string(spec.max_retries + 1) + " attempts: " + last_error);
}

RouteResult route_dataset(const std::vector<DataPointRecord>& records, const RoutingTable& table,
                          const CategorizationConfig& cfg, const RouteOptions& opts) {
    table.validate();
    cfg.validate();

    const std::size_t n = records.size();
    std::vector<InteractionCategory> categories(n, InteractionCategory::AgreementRedundancy);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            records[i].validate();
        } catch (const Error& e) {
            throw ValidationError("record '" + records[i].id + "': " + e.what());
        }
        const auto d = pairwise_distances(records[i].delta1, records[i].delta2,
                                          records[i].delta_m);
        categories[i] = categorize(d, cfg).category;
        if (table.experts.find(categories[i]) == table.experts.end()) {
            throw ConfigError("no expert configured for category " + to_string(categories[i]) +
                              " (record '" + records[i].id + "')");
        }
    }

    PoolMap pools = opts.pools ? *opts.pools : build_pools(records, cfg);
    for (const InteractionCategory c : kAllCategories) pools[c];
    if (opts.shuffle_seed) {
        pools = shuffled_pools(pools, *opts.shuffle_seed);
    }
    const PoolMap& frozen_pools = pools;
    const std::size_t cardinality = n == 0 ? 0 : records.front().delta1.size();

    RouteResult result;
    result.predictions.resize(n);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};
    std::atomic<bool> stop{false};
    std::mutex failure_mutex;
    std::exception_ptr first_failure;

    auto worker = [&] {
        while (!stop.load(std::memory_order_acquire)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_acq_rel);
            if (i >= n) break;
            try {
                const ExpertSpec& spec = table.experts.at(categories[i]);
                const FewShotPool& pool = frozen_pools.at(spec.category);
                const std::string prompt = assemble_prompt(spec, pool, records[i]);
                ExpertPrediction p = dispatch(spec, prompt, cardinality, table.backoff_base_s,
                                              table.backoff_factor, opts.jitter_seed);
                p.id = records[i].id;
                p.category = categories[i];
                p.gold_label = records[i].gold_label;
                result.predictions[i] = std::move(p);
            } catch (...) {
                if (opts.fail_fast) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!first_failure) first_failure = std::current_exception();
                    stop.store(true, std::memory_order_release);
                } else {
                    std::string message = "unknown routing failure";
                    try {
                        throw;
                    } catch (const std::exception& e) {
                        message = e.what();
                    } catch (...) {
                    }
                    ExpertPrediction p;
                    p.id = records[i].id;
                    p.category = categories[i];
                    p.gold_label = records[i].gold_label;
                    p.error = std::move(message);
                    result.predictions[i] = std::move(p);
                    failures.fetch_add(1, std::memory_order_acq_rel);
                }
            }
        }
    };

    const std::size_t worker_count = std::min<std::size_t>(
        static_cast<std::size_t>(table.max_in_flight), std::max<std::size_t>(n, 1));
    std::vector<std::thread> threads;
    threads.reserve(worker_count);
    for (std::size_t t = 0; t < worker_count; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();

    if (first_failure) {
        std::rethrow_exception(first_failure);
    }
    result.failures = failures.load(std::memory_order_acquire);
    return result;
}

void write_predictions(const std::vector<ExpertPrediction>& predictions,
                       const CategorizationConfig& cfg, std::ostream& out) {
    ordered_json header;
    header["gamma"] = cfg.gamma;
    header["tau"] = cfg.tau;
    header["strategy"] = to_string(cfg.strategy);
    out << "# " << header.dump() << '\n';
    for (const ExpertPrediction& p : predictions) {
        ordered_json j;
        j["id"] = p.id;
        j["category"] = to_string(p.category);
        if (p.ok()) {
            j["label"] = p.label;
            j["confidence"] = p.confidence;
            j["attempts"] = p.attempts;
            if (p.gold_label) j["gold"] = *p.gold_label;
        } else {
            j["error"] = p.error;
            if (p.gold_label) j["gold"] = *p.gold_label;
        }
        out << j.dump() << '\n';
    }
}

std::vector<ExpertPrediction> read_predictions(std::istream& in) {
    std::vector<ExpertPrediction> out;
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
            ExpertPrediction p;
            p.id = j.at("id").get<std::string>();
            p.category = category_from_string(j.at("category").get<std::string>());
            if (j.contains("error") && !j["error"].is_null()) {
                p.error = j["error"].get<std::string>();
            } else {
                p.label = j.at("label").get<int>();
                p.confidence = j.value("confidence", 0.0);
                p.attempts = j.value("attempts", 1);
            }
            if (j.contains("gold") && !j["gold"].is_null()) {
                p.gold_label = j["gold"].get<int>();
            }
            out.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("malformed prediction: ") + e.what());
        }
    }
    return out;
}

}  // namespace mmoe
