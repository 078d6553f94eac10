#include "cellaudit/audit.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <sstream>

#include "cellaudit/analyze.hpp"
#include "cellaudit/wbt.hpp"

namespace cellaudit::audit {

std::string_view color_name(Color c) {
    switch (c) {
        case Color::Green: return "green";
        case Color::Yellow: return "yellow";
        case Color::DarkYellow: return "dark-yellow";
        case Color::Red: return "red";
    }
    return "";
}

std::string now_rfc3339() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

AuditContext::AuditContext(Workbook wb)
    : wb_(std::move(wb)),
      graph_(graph::build_graph(wb_)),
      fingerprint_(wbt::fingerprint(wb_)),
      forms_(analyze::normal_forms(wb_)) {}

AuditState AuditContext::new_session(std::optional<std::set<CellAddress>> scope) const {
    AuditState s;
    s.fingerprint = fingerprint_;
    if (scope) {
        for (const auto& a : *scope) {
            if (!wb_.cell(a)) throw OutOfScope(qualified_r1c1(a) + " is not an occupied cell");
        }
        s.scope = std::move(*scope);
        s.default_scope = false;
    } else {
        const auto& nodes = graph_.nodes();
        s.scope.insert(nodes.begin(), nodes.end());
    }
    return s;
}

void AuditContext::require_fresh(const AuditState& state) const {
    if (state.fingerprint != fingerprint_) {
        throw StaleSession("workbook changed since the audit began (session " + state.fingerprint +
                           ", workbook " + fingerprint_ + ")");
    }
}

MarkResult AuditContext::mark(const AuditState& state, const CellAddress& cell, bool checked,
                              const std::string& auditor, const std::string& timestamp) const {
    require_fresh(state);
    if (!state.scope.count(cell)) throw OutOfScope(qualified_r1c1(cell) + " is outside the audit scope");
    MarkResult r{state, std::nullopt};
    if (checked) {
        auto before = colors(state);
        if (before.at(cell) == Color::Red) {
            r.warning = qualified_r1c1(cell) + " marked before all its precedents were checked";
        }
        r.state.checked[cell] = Check{auditor, timestamp};
    } else {
        r.state.checked.erase(cell);
    }
    return r;
}

std::map<CellAddress, Color> AuditContext::colors(const AuditState& state,
                                                  const std::optional<CellAddress>& focus) const {
    std::map<CellAddress, Color> out;
    for (const auto& a : state.scope) {
        if (state.checked.count(a)) {
            out[a] = Color::Green;
            continue;
        }
        bool ready = true;
        for (const auto& p : graph_.precedents_of(a)) {
            if (state.scope.count(p) && !state.checked.count(p)) {
                ready = false;
                break;
            }
        }
        out[a] = ready ? Color::Yellow : Color::Red;
    }
    if (focus) {
        auto it = forms_.find(*focus);
        if (it != forms_.end()) {
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (!dr && !dc) continue;
                    CellAddress n{focus->sheet, focus->row + dr, focus->col + dc};
                    auto c = out.find(n);
                    auto f = forms_.find(n);
                    if (c != out.end() && c->second == Color::Yellow && f != forms_.end() && f->second == it->second) {
                        c->second = Color::DarkYellow;
                    }
                }
            }
        }
    }
    return out;
}

Progress AuditContext::progress(const AuditState& state) const {
    Progress p;
    for (const auto& [a, c] : colors(state)) {
        switch (c) {
            case Color::Green: ++p.green; break;
            case Color::Yellow: ++p.yellow; break;
            case Color::DarkYellow: ++p.dark_yellow; break;
            case Color::Red: ++p.red; break;
        }
    }
    p.total = state.scope.size();
    p.complete = p.green == p.total;
    return p;
}

std::string AuditContext::log_header(const AuditState& state) const {
    std::string out = "%audit 1 fingerprint=" + state.fingerprint + "\n";
    if (!state.default_scope) {
        out += "scope";
        for (const auto& a : state.scope) out += " " + qualified_r1c1(a);
        out += "\n";
    }
    return out;
}

std::string AuditContext::log_line(bool checked, const CellAddress& cell, const std::string& auditor,
                                   const std::string& timestamp) {
    if (auditor.empty() || std::any_of(auditor.begin(), auditor.end(), [](unsigned char c) { return std::isspace(c); })) {
        throw std::invalid_argument("auditor name must be a single non-empty word");
    }
    return std::string(checked ? "mark " : "unmark ") + qualified_r1c1(cell) + " " + auditor + " " + timestamp + "\n";
}

std::string AuditContext::save(const AuditState& state) const {
    std::string out = log_header(state);
    for (const auto& [a, c] : state.checked) out += log_line(true, a, c.auditor, c.timestamp);
    return out;
}

namespace {

std::vector<std::string> split_words(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> words;
    for (std::string w; is >> w;) words.push_back(w);
    return words;
}

CellAddress parse_logged_address(const std::string& text, int line) {
    auto a = parse_address(text);
    if (!a || a->sheet.empty()) {
        throw std::invalid_argument("audit log line " + std::to_string(line) + ": bad cell address '" + text + "'");
    }
    return *a;
}

}  // namespace

AuditState AuditContext::replay(std::string_view log) const {
    std::istringstream is{std::string(log)};
    std::string line;
    int n = 0;
    std::optional<AuditState> state;
    while (std::getline(is, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!state) {
            const std::string prefix = "%audit 1 fingerprint=";
            if (line.rfind(prefix, 0) != 0) throw std::invalid_argument("audit log: missing header");
            std::string fp = line.substr(prefix.size());
            if (fp != fingerprint_) {
                throw StaleSession("audit log belongs to workbook " + fp + ", current workbook is " + fingerprint_);
            }
            state = new_session();
            continue;
        }
        if (line.rfind("scope", 0) == 0 && state->default_scope && state->checked.empty()) {
            // Addresses may contain quoted sheet names with spaces.
            std::set<CellAddress> scope;
            std::string rest = line.substr(5);
            std::size_t i = 0;
            while (i < rest.size()) {
                while (i < rest.size() && rest[i] == ' ') ++i;
                if (i >= rest.size()) break;
                std::size_t j = i;
                if (rest[j] == '\'') {
                    j = rest.find("'!", j + 1);
                    if (j == std::string::npos) throw std::invalid_argument("audit log: bad scope line");
                }
                j = rest.find(' ', j);
                if (j == std::string::npos) j = rest.size();
                scope.insert(parse_logged_address(rest.substr(i, j - i), n));
                i = j;
            }
            state = new_session(scope);
            continue;
        }
        auto words = split_words(line);
        if (words.size() < 4 || (words[0] != "mark" && words[0] != "unmark")) {
            throw std::invalid_argument("audit log line " + std::to_string(n) + ": unrecognised entry");
        }
        // The address may contain spaces; auditor and timestamp never do.
        std::string ts = words.back();
        std::string auditor = words[words.size() - 2];
        std::size_t start = line.find(' ') + 1;
        std::size_t end = line.rfind(' ' + auditor + ' ' + ts);
        CellAddress a = parse_logged_address(line.substr(start, end - start), n);
        state = mark(*state, a, words[0] == "mark", auditor, ts).state;
    }
    if (!state) throw std::invalid_argument("audit log: missing header");
    return *state;
}

}  // namespace cellaudit::audit
