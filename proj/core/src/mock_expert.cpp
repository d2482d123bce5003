#include "mmoe/mock_expert.hpp"

#include "mmoe/errors.hpp"
#include "mmoe/routing.hpp"

#include "httplib.h"

#include <chrono>
#include <thread>
#include <utility>

namespace mmoe {

namespace {

struct ProbeGuard {
    ConcurrencyProbe* probe;
    explicit ProbeGuard(ConcurrencyProbe* p) : probe(p) {
        if (probe) probe->enter();
    }
    ~ProbeGuard() {
        if (probe) probe->leave();
    }
    ProbeGuard(const ProbeGuard&) = delete;
    ProbeGuard& operator=(const ProbeGuard&) = delete;
};

}  // namespace

MockResponse MockExpert::respond(const std::string& prompt) {
    ProbeGuard guard(probe_.get());
    if (probe_) probe_->count_request();

    if (fail_first_.fetch_sub(1, std::memory_order_acq_rel) > 0) {
        throw TransportError("mock expert configured to fail this call");
    }
    if (latency_ms_ > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms_));
    }
    const MockRule* hit = &fallback_;
    for (const MockRule& r : rules_) {
        if (!r.contains.empty() && prompt.find(r.contains) != std::string::npos) {
            hit = &r;
            break;
        }
    }
    return MockResponse{hit->label, hit->confidence, std::to_string(hit->label)};
}

struct MockExpertServer::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    bool running = false;
};

MockExpertServer::MockExpertServer() : impl_(std::make_unique<Impl>()) {}

MockExpertServer::~MockExpertServer() {
    stop();
}

void MockExpertServer::add_expert(const std::string& path, std::shared_ptr<MockExpert> expert) {
    if (path.empty() || path.front() != '/') {
        throw ConfigError("expert path must start with '/': " + path);
    }
    impl_->server.Post(path, [expert = std::move(expert)](const httplib::Request& req,
                                                          httplib::Response& res) {
        try {
            const WireRequest wire = wire_request_from_json(req.body);
            const MockResponse m = expert->respond(wire.prompt);
            res.set_content(to_json(WireResponse{m.label, m.confidence, m.raw}),
                            "application/json");
        } catch (const TransportError& e) {
            res.status = 503;
            res.set_content(e.what(), "text/plain");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
        }
    });
}

void MockExpertServer::start() {
    if (impl_->running) return;
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) {
        throw TransportError("cannot bind a loopback port for the mock expert server");
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    impl_->running = true;
}

void MockExpertServer::stop() {
    if (!impl_->running) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
    impl_->running = false;
}

int MockExpertServer::port() const {
    return impl_->port;
}

std::string MockExpertServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

}  // namespace mmoe
