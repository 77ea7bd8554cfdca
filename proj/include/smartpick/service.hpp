#pragma once

#include <memory>
#include <string>

#include "smartpick/planner.hpp"

namespace smartpick {

// Wire schema: one JSON object per line, field names matching PlanRequest /
// PlanResponse. Failures come back as {"error": "..."} lines.
PlanRequest plan_request_from_json(const std::string& line);
std::string plan_response_to_json(const PlanResponse& resp);

// Minimal TCP planning endpoint: accepts connections on 127.0.0.1, reads one
// JSON request per line, answers with one JSON response per line. Each
// connection is served by its own thread; planning itself is concurrent and
// read-only per Planner::plan's contract.
class PlanService {
  public:
    // port 0 picks an ephemeral port (see port() after start()).
    PlanService(Planner& planner, int port);
    ~PlanService();
    PlanService(const PlanService&) = delete;
    PlanService& operator=(const PlanService&) = delete;

    void start(); // throws IoError when the socket cannot be bound
    void stop();  // idempotent; unblocks and joins all connection threads
    int port() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace smartpick
