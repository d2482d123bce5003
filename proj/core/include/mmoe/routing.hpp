#pragma once

#include "mmoe/interaction.hpp"
#include "mmoe/mock_expert.hpp"
#include "mmoe/record.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mmoe {

// One expert call on the wire: POST <endpoint> with a JSON body carrying the
// prompt and the label cardinality; the expert answers with a label index,
// a confidence in [0, 5], and its raw completion text.
struct WireRequest {
    std::string prompt;
    int label_cardinality = 0;
};

struct WireResponse {
    int label = 0;
    double confidence = 0.0;
    std::string raw;
};

std::string to_json(const WireRequest& req);
std::string to_json(const WireResponse& resp);
WireRequest wire_request_from_json(const std::string& body);

// Throws ProtocolError when the body is not the expected shape.
WireResponse wire_response_from_json(const std::string& body);

struct HttpUrl {
    std::string host;
    int port = 80;
    std::string path = "/";
};

HttpUrl parse_http_url(const std::string& url);

struct FewShotExample {
    std::string id;  // lets the assembler drop the target from its own prompt
    std::string text1;
    std::string text2;
    int label = 0;
};

using FewShotPool = std::vector<FewShotExample>;
using PoolMap = std::map<InteractionCategory, FewShotPool>;

// Pools hold the gold-labelled records of each category, in input order.
PoolMap build_pools(const std::vector<DataPointRecord>& records, const CategorizationConfig& cfg);

// Deterministic per-category reshuffle; each pool gets its own stream keyed by
// the seed and the category name.
PoolMap shuffled_pools(const PoolMap& pools, std::uint64_t seed);

struct ExpertSpec {
    InteractionCategory category = InteractionCategory::AgreementRedundancy;
    std::string endpoint;  // http://host:port/path, ignored when mock is set
    std::size_t shot_count = 0;
    std::string instruction;
    double timeout_s = 10.0;
    int max_retries = 3;
    std::shared_ptr<MockExpert> mock;  // in-process transport when non-null
};

struct RoutingTable {
    std::map<InteractionCategory, ExpertSpec> experts;
    int max_in_flight = 1;
    double backoff_base_s = 1.0;
    double backoff_factor = 2.0;

    void validate() const;
};

// Reads the JSON routing config. Mock behaviour blocks, when present, turn the
// expert into an in-process mock sharing one concurrency probe per table.
RoutingTable load_routing_table(const std::filesystem::path& path);
RoutingTable load_routing_table_stream(std::istream& in, const std::string& origin = "<stream>");

// Rotates which expert serves which category; each spec keeps its own pools
// and behaviour, so every category is answered by a foreign expert.
RoutingTable scramble_routing(const RoutingTable& table);

// Instruction, then one block per example, then the target with a trailing
// open answer slot. Effective shots = min(shot_count, pool size).
std::string assemble_prompt(const ExpertSpec& spec, const FewShotPool& pool,
                            const DataPointRecord& target);

struct ExpertPrediction {
    std::string id;
    InteractionCategory category = InteractionCategory::AgreementRedundancy;
    std::optional<int> gold_label;
    int label = 0;
    double confidence = 0.0;
    int attempts = 1;
    std::string error;  // non-empty marks a failed record kept in place

    bool ok() const { return error.empty(); }
};

// Single call with retries. TransportError is retried up to spec.max_retries
// times with full-jitter exponential backoff; ProtocolError is not.
ExpertPrediction dispatch(const ExpertSpec& spec, const std::string& prompt,
                          std::size_t label_cardinality, double backoff_base_s,
                          double backoff_factor, std::uint64_t jitter_seed);

struct RouteOptions {
    bool fail_fast = false;  // default keeps failed records inline as error lines
    std::optional<std::uint64_t> shuffle_seed;
    std::uint64_t jitter_seed = 0;
    std::optional<PoolMap> pools;  // few-shot source; defaults to the routed records
};

struct RouteResult {
    std::vector<ExpertPrediction> predictions;  // one entry per record, input order
    std::size_t failures = 0;
};

// Categorizes every record, then dispatches to the matching expert with at
// most table.max_in_flight requests active at once. A category without an
// expert raises ConfigError before any dispatch. Exhausted retries either
// throw (fail_fast) or leave an error entry at the record's slot.
RouteResult route_dataset(const std::vector<DataPointRecord>& records, const RoutingTable& table,
                          const CategorizationConfig& cfg, const RouteOptions& opts = {});

void write_predictions(const std::vector<ExpertPrediction>& predictions,
                       const CategorizationConfig& cfg, std::ostream& out);
std::vector<ExpertPrediction> read_predictions(std::istream& in);

}  // namespace mmoe
