#pragma once
// Task dispatch for the CLI and the acceptance-suite driver.

#include <optional>
#include <string>
#include <vector>

#include "lo/json_io.hpp"

namespace lo {

enum class Task { rho, construct, decouple, inverse_linear, inverse_bilinear, inverse_quadratic, verify, accept };

const char* to_string(Task t);
Task parse_task(const std::string& name);

/// `params` holds the task's options by CLI flag name (beta, dist, matrix, ...);
/// file-valued options are paths.
struct ExperimentConfig {
    Task task = Task::rho;
    io::Json params = io::Json::object();
    std::optional<std::string> output;  // RunReport destination
};

struct RunReport {
    io::Json config;
    double seconds = 0;
    io::Json payload;
    std::string version;
    std::uint64_t seed = 0;
    std::string error_class;  // empty on success
    std::string error_message;
    int exit_code = 0;
};

/// Never throws lo::Error: failures land in error_class / exit_code.
RunReport run(const ExperimentConfig& config);
io::Json to_json(const RunReport& report);

enum class AcceptanceLevel { quick, full };

struct CriterionResult {
    std::string id;
    bool passed = false;
    std::string measured;
    double seconds = 0;
};

std::vector<CriterionResult> acceptance_suite(AcceptanceLevel level);
io::Json to_json(const std::vector<CriterionResult>& results);

/// Canonical payloads of criteria A1, A4 and A7, compared byte-for-byte across thread counts.
std::string acceptance_payload(const std::string& id, AcceptanceLevel level);

}  // namespace lo
