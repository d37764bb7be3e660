#pragma once

#include "prema/simulator.hpp"
#include "prema/workspace.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace prema {

inline constexpr int kDefaultPort = 7421;

// Payload builders shared by the CLI and the HTTP service, so both paths
// serialize identical analysis results.

// Throws PremaError(E104) when `var` has no extracted state machine.
std::string state_diagram_text(const Model& model, const std::string& var);
// Throws PremaError(E104) for an unknown variable. depth <= 0 = unlimited.
std::string dependency_diagram_text(const Model& model, const std::string& var, int depth);

struct VerifyRequest {
    std::string property;     // empty with runtime_safety
    std::string assumption;
    std::optional<std::vector<std::string>> selection; // patterns, resolved against the model
    int depth = 1;
    bool runtime_safety = false;
};

VerifyRequest verify_request_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json run_verify(const Model& model, const VerifyRequest& req);

// Coverage JSON, with the test-case CSV under "csv".
nlohmann::ordered_json run_testgen(const Model& model, const std::optional<std::string>& task_id);

// Project summary returned after a load.
nlohmann::ordered_json project_summary(const CompiledProject& project);

// Runs the input rows through the whole schedule or a selection. Error
// diagnostics of the simulated tasks (dimension errors aside) and cyclic
// schedules block the run and are returned instead of a trace.
struct SimulationRun {
    Trace trace;
    Diagnostics blocking;
    std::vector<std::string> schedule;
};

SimulationRun simulate_project(const CompiledProject& project, const std::string& csv_text,
                               const std::optional<std::vector<std::string>>& selection = std::nullopt);

// E301/E302 fault as a diagnostic.
Diagnostic fault_diagnostic(const RuntimeFault& fault);

struct ReportOptions {
    std::string project_path;
    std::optional<std::string> inputs_csv;
    std::optional<std::vector<std::string>> selection;
    std::vector<std::string> properties;
    std::string assumption;
    int depth = 1;
    bool runtime_safety = true;
    bool testgen = true;
};

// "prema-report/1": diagnostics (static plus runtime faults), diagram
// manifest, trace summary, coverage, verification results and counts.
nlohmann::ordered_json build_report(const CompiledProject& project, const ReportOptions& options);

// Text rendering of a JSON payload; what the CLI writes and the service sends.
std::string payload_text(const nlohmann::ordered_json& j);

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

// Transport-independent request handling. The project is immutable once
// loaded; a reload swaps it atomically and keeps existing sessions on the
// model they started with.
class Service {
public:
    Service() = default;
    explicit Service(CompiledProject project);

    void load(CompiledProject project);
    [[nodiscard]] std::shared_ptr<const CompiledProject> project() const;

    HttpResponse handle(const std::string& method, const std::string& path, const std::string& body,
                        const std::map<std::string, std::string>& query = {});

private:
    HttpResponse route(const std::string& method, const std::vector<std::string>& parts, const std::string& body,
                       const std::map<std::string, std::string>& query);
    std::shared_ptr<const CompiledProject> require_project() const;

    mutable std::mutex mu_;
    std::shared_ptr<const CompiledProject> project_;
    SessionManager sessions_;
};

// PREMA_PORT wins over the flag, the flag over the default.
int resolve_port(std::optional<int> flag);

// HTTP transport over a Service; serves on a background thread.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Port 0 binds any free port. Returns the bound port; throws
    // PremaError(E002) when the address cannot be bound.
    int start(const std::string& host, int port);
    // Blocks until the listener exits.
    void wait();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Blocks serving `service` until the process stops.
void serve_http(Service& service, const std::string& host, int port);

} // namespace prema
