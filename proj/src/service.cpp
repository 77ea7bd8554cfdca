#include "smartpick/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "json.hpp"

#include "smartpick/errors.hpp"

namespace smartpick {

namespace {
constexpr std::size_t kMaxLineBytes = 1 << 20;
}

PlanRequest plan_request_from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad request json: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("request must be a json object");
    PlanRequest req;
    try {
        if (j.contains("query_id") && !j["query_id"].is_null())
            req.query_id = j["query_id"].get<std::string>();
        if (j.contains("query_text") && !j["query_text"].is_null())
            req.query_text = j["query_text"].get<std::string>();
        if (j.contains("n_map_tasks") && !j["n_map_tasks"].is_null())
            req.n_map_tasks = j["n_map_tasks"].get<double>();
        if (j.contains("input_size_bytes") && !j["input_size_bytes"].is_null())
            req.input_size_bytes = j["input_size_bytes"].get<double>();
        if (j.contains("epsilon") && !j["epsilon"].is_null())
            req.epsilon = j["epsilon"].get<double>();
        if (j.contains("relay") && !j["relay"].is_null()) req.relay = j["relay"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad request field: ") + e.what());
    }
    return req;
}

std::string plan_response_to_json(const PlanResponse& resp) {
    nlohmann::json j{{"fleet", {{"n_vm", resp.fleet.n_vm}, {"n_sl", resp.fleet.n_sl}}},
                     {"predicted_time_s", resp.predicted_time_s},
                     {"estimated_cost", resp.estimated_cost.dollars()},
                     {"matched_query_id", resp.matched_query_id},
                     {"similarity_score", resp.similarity_score},
                     {"search_evaluations", resp.search_evaluations},
                     {"model_version", resp.model_version},
                     {"t_best_s", resp.t_best_s},
                     {"c_best", resp.c_best.dollars()},
                     {"terminated_by", resp.terminated_by}};
    return j.dump();
}

struct PlanService::Impl {
    Planner& planner;
    int requested_port;
    int listen_fd = -1;
    int bound_port = 0;
    std::atomic<bool> stopping{false};
    bool started = false;
    std::thread acceptor;
    std::mutex mu; // guards clients + workers
    std::set<int> clients;
    std::vector<std::thread> workers;

    Impl(Planner& p, int port) : planner(p), requested_port(port) {}

    static void send_all(int fd, const std::string& text) {
        std::size_t off = 0;
        while (off < text.size()) {
            const ssize_t n = ::send(fd, text.data() + off, text.size() - off, MSG_NOSIGNAL);
            if (n <= 0) return; // peer gone; nothing sensible left to do
            off += static_cast<std::size_t>(n);
        }
    }

    std::string answer(const std::string& line) {
        try {
            const PlanRequest req = plan_request_from_json(line);
            return plan_response_to_json(planner.plan(req));
        } catch (const std::exception& e) {
            nlohmann::json j{{"error", e.what()}};
            return j.dump();
        }
    }

    void serve_client(int fd) {
        std::string acc;
        char buf[4096];
        for (;;) {
            const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
            if (n <= 0) break;
            acc.append(buf, static_cast<std::size_t>(n));
            if (acc.size() > kMaxLineBytes) {
                send_all(fd, "{\"error\":\"request line too long\"}\n");
                break;
            }
            std::size_t pos;
            while ((pos = acc.find('\n')) != std::string::npos) {
                std::string line = acc.substr(0, pos);
                acc.erase(0, pos + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) continue;
                send_all(fd, answer(line) + "\n");
            }
        }
        {
            std::lock_guard<std::mutex> lock(mu);
            clients.erase(fd); // unregister before close so stop() never
                               // touches a recycled descriptor
        }
        ::close(fd);
    }

    void accept_loop() {
        for (;;) {
            const int fd = ::accept(listen_fd, nullptr, nullptr);
            if (fd < 0) {
                if (stopping.load() || (errno != EINTR && errno != ECONNABORTED)) return;
                continue;
            }
            std::lock_guard<std::mutex> lock(mu);
            if (stopping.load()) {
                ::close(fd);
                return;
            }
            clients.insert(fd);
            workers.emplace_back([this, fd] { serve_client(fd); });
        }
    }
};

PlanService::PlanService(Planner& planner, int port)
    : impl_(std::make_unique<Impl>(planner, port)) {}

PlanService::~PlanService() { stop(); }

void PlanService::start() {
    if (impl_->started) throw StateError("service already started");
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<uint16_t>(impl_->requested_port));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        const std::string why = std::strerror(errno);
        ::close(fd);
        throw IoError("bind port " + std::to_string(impl_->requested_port) + ": " + why);
    }
    if (::listen(fd, 64) < 0) {
        const std::string why = std::strerror(errno);
        ::close(fd);
        throw IoError("listen: " + why);
    }
    socklen_t len = sizeof(addr);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) < 0) {
        const std::string why = std::strerror(errno);
        ::close(fd);
        throw IoError("getsockname: " + why);
    }
    impl_->bound_port = ntohs(addr.sin_port);
    impl_->listen_fd = fd;
    impl_->started = true;
    impl_->stopping.store(false);
    impl_->acceptor = std::thread([this] { impl_->accept_loop(); });
}

void PlanService::stop() {
    if (!impl_->started) return;
    impl_->stopping.store(true);
    ::shutdown(impl_->listen_fd, SHUT_RDWR);
    ::close(impl_->listen_fd);
    if (impl_->acceptor.joinable()) impl_->acceptor.join();
    {
        std::lock_guard<std::mutex> lock(impl_->mu);
        for (int fd : impl_->clients) ::shutdown(fd, SHUT_RDWR);
    }
    std::vector<std::thread> workers;
    {
        std::lock_guard<std::mutex> lock(impl_->mu);
        workers.swap(impl_->workers);
    }
    for (auto& t : workers) {
        if (t.joinable()) t.join();
    }
    impl_->listen_fd = -1;
    impl_->started = false;
}

int PlanService::port() const { return impl_->bound_port; }

} // namespace smartpick
