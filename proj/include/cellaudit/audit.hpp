#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cellaudit/graph.hpp"

namespace cellaudit::audit {

enum class Color { Green, Yellow, DarkYellow, Red };
std::string_view color_name(Color c);

struct Check {
    std::string auditor;
    std::string timestamp;  // RFC 3339, UTC
    friend bool operator==(const Check&, const Check&) = default;
};

struct AuditState {
    std::string fingerprint;
    std::map<CellAddress, Check> checked;
    std::set<CellAddress> scope;
    bool default_scope = true;  // scope is every occupied cell
    friend bool operator==(const AuditState&, const AuditState&) = default;
};

// The workbook changed since the session began.
class StaleSession : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfScope : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct MarkResult {
    AuditState state;
    std::optional<std::string> warning;  // set when marking a red cell
};

struct Progress {
    std::size_t green = 0;
    std::size_t yellow = 0;
    std::size_t dark_yellow = 0;
    std::size_t red = 0;
    std::size_t total = 0;
    bool complete = false;
};

// Per-workbook data shared by all session operations.
class AuditContext {
public:
    explicit AuditContext(Workbook wb);

    const Workbook& workbook() const { return wb_; }
    const graph::DepGraph& graph() const { return graph_; }
    const std::string& fingerprint() const { return fingerprint_; }

    AuditState new_session(std::optional<std::set<CellAddress>> scope = std::nullopt) const;
    MarkResult mark(const AuditState& state, const CellAddress& cell, bool checked, const std::string& auditor,
                    const std::string& timestamp) const;
    std::map<CellAddress, Color> colors(const AuditState& state,
                                        const std::optional<CellAddress>& focus = std::nullopt) const;
    Progress progress(const AuditState& state) const;

    // Append-only log: a header naming the fingerprint, an optional scope
    // line, then one `mark|unmark <addr> <auditor> <timestamp>` per event.
    std::string log_header(const AuditState& state) const;
    static std::string log_line(bool checked, const CellAddress& cell, const std::string& auditor,
                                const std::string& timestamp);
    // Rebuilds the state by replaying every event; StaleSession on mismatch.
    AuditState replay(std::string_view log) const;
    // Header plus one mark line per checked cell.
    std::string save(const AuditState& state) const;

private:
    void require_fresh(const AuditState& state) const;

    Workbook wb_;
    graph::DepGraph graph_;
    std::string fingerprint_;
    std::map<CellAddress, std::string> forms_;
};

std::string now_rfc3339();

}  // namespace cellaudit::audit
