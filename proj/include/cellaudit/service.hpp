#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "cellaudit/audit.hpp"

namespace httplib {
class Server;
}

namespace cellaudit::service {

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

struct Options {
    std::string source;                   // shown in report stamps
    std::optional<std::string> log_path;  // audit log appended on every mark
    // Re-reads the workbook text before each mark; a changed fingerprint
    // rejects the mark with 409.
    std::function<std::string()> reload;
};

// JSON API over one workbook and its audit session. Thread-safe.
class Service {
public:
    Service(Workbook wb, audit::AuditState state, Options options = {});
    ~Service();

    Response handle(const std::string& method, const std::string& target, const std::string& body = {});

    // Blocks serving HTTP until stop() is called or the listener fails.
    bool listen(const std::string& host, int port);
    // Binds an ephemeral port and returns it; serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

    audit::AuditState state() const;

private:
    Response workbook_json() const;
    Response graph_json(bool rows) const;
    Response lint_json() const;
    Response cascades_json(bool rows, double error_rate) const;
    Response audit_json(const std::optional<CellAddress>& focus) const;
    Response mark(const std::string& body);
    std::optional<CellAddress> parse_cell(const std::string& text) const;

    audit::AuditContext ctx_;
    audit::AuditState state_;
    Options options_;
    mutable std::mutex mu_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace cellaudit::service
