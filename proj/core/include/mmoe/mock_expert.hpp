#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <vector>

namespace mmoe {

// Tracks how many requests the routing engine keeps active at once.
// Shared across the experts of one run; peak() is the high-water mark.
class ConcurrencyProbe {
public:
    void enter() {
        const int now = in_flight_.fetch_add(1, std::memory_order_acq_rel) + 1;
        int prev = peak_.load(std::memory_order_relaxed);
        while (now > prev && !peak_.compare_exchange_weak(prev, now, std::memory_order_acq_rel)) {
        }
    }
    void leave() { in_flight_.fetch_sub(1, std::memory_order_acq_rel); }

    int in_flight() const { return in_flight_.load(std::memory_order_acquire); }
    int peak() const { return peak_.load(std::memory_order_acquire); }
    int total() const { return total_.load(std::memory_order_acquire); }
    void count_request() { total_.fetch_add(1, std::memory_order_acq_rel); }

private:
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_{0};
    std::atomic<int> total_{0};
};

struct MockRule {
    std::string contains;  // first rule whose key appears in the prompt wins
    int label = 0;
    double confidence = 0.0;
};

struct MockResponse {
    int label = 0;
    double confidence = 0.0;
    std::string raw;
};

// In-process stand-in for an expert endpoint. Deterministic: the answer is a
// pure function of the prompt and the ordered rule list.
class MockExpert {
public:
    MockExpert() = default;
    MockExpert(std::vector<MockRule> rules, MockRule fallback)
        : rules_(std::move(rules)), fallback_(fallback) {}

    // Throws TransportError for the first `fail_first` calls when configured.
    MockResponse respond(const std::string& prompt);

    void set_latency_ms(int ms) { latency_ms_ = ms; }
    void set_fail_first(int n) { fail_first_.store(n); }
    void set_probe(std::shared_ptr<ConcurrencyProbe> probe) { probe_ = std::move(probe); }
    const std::shared_ptr<ConcurrencyProbe>& probe() const { return probe_; }

    const std::vector<MockRule>& rules() const { return rules_; }
    const MockRule& fallback() const { return fallback_; }

private:
    std::vector<MockRule> rules_;
    MockRule fallback_{};
    int latency_ms_ = 0;
    std::atomic<int> fail_first_{0};
    std::shared_ptr<ConcurrencyProbe> probe_;
};

// Loopback HTTP server wrapping a set of mock experts, one route per expert
// path. Used to exercise the real wire path in tests.
class MockExpertServer {
public:
    MockExpertServer();
    ~MockExpertServer();
    MockExpertServer(const MockExpertServer&) = delete;
    MockExpertServer& operator=(const MockExpertServer&) = delete;

    // Registers an expert at POST <path>; path must start with '/'.
    void add_expert(const std::string& path, std::shared_ptr<MockExpert> expert);

    // Starts listening on 127.0.0.1 at an ephemeral port.
    void start();
    void stop();
    int port() const;
    std::string base_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mmoe
