#include "cellaudit/service.hpp"

#include <httplib.h>

#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "cellaudit/analyze.hpp"
#include "cellaudit/lint.hpp"
#include "cellaudit/wbt.hpp"

namespace cellaudit::service {

using nlohmann::json;

namespace {

Response json_response(int status, const json& j) { return {status, j.dump(2) + "\n", "application/json"}; }

Response error_response(int status, const std::string& message) {
    return json_response(status, json{{"error", message}, {"status", status}});
}

std::string url_decode(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') {
            out += ' ';
        } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
                   std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::map<std::string, std::string> parse_query(std::string_view q) {
    std::map<std::string, std::string> out;
    while (!q.empty()) {
        auto amp = q.find('&');
        auto part = q.substr(0, amp);
        auto eq = part.find('=');
        out[url_decode(part.substr(0, eq))] = eq == std::string_view::npos ? "" : url_decode(part.substr(eq + 1));
        if (amp == std::string_view::npos) break;
        q.remove_prefix(amp + 1);
    }
    return out;
}

json value_json(const Value& v) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    if (auto* e = std::get_if<ErrorValue>(&v)) {
        json j{{"error", std::string(error_text(e->code))}};
        if (!e->message.empty()) j["message"] = e->message;
        return j;
    }
    return nullptr;
}

json address_json(const CellAddress& a) {
    return {{"id", node_id(a)}, {"sheet", a.sheet}, {"address", to_r1c1(a)}, {"row", a.row}, {"col", a.col}};
}

}  // namespace

Service::Service(Workbook wb, audit::AuditState state, Options options)
    : ctx_(std::move(wb)),
      state_(std::move(state)),
      options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        auto r = handle(req.method, req.target, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server_->Get(".*", forward);
    server_->Post(".*", forward);
    server_->Put(".*", forward);
    server_->Delete(".*", forward);
}

Service::~Service() = default;

audit::AuditState Service::state() const {
    std::lock_guard lock(mu_);
    return state_;
}

std::optional<CellAddress> Service::parse_cell(const std::string& text) const {
    auto a = parse_address(text);
    if (!a) return std::nullopt;
    if (a->sheet.empty()) {
        if (ctx_.workbook().sheets.empty()) return std::nullopt;
        a->sheet = ctx_.workbook().sheets.front().name;
    }
    return a;
}

Response Service::handle(const std::string& method, const std::string& target, const std::string& body) {
    auto q = target.find('?');
    std::string path = target.substr(0, q);
    auto params = parse_query(q == std::string::npos ? std::string_view() : std::string_view(target).substr(q + 1));
    bool rows = params.count("level") && params["level"] == "rows";

    static const std::set<std::string> get_routes{"/api/workbook", "/api/graph", "/api/lint", "/api/cascades",
                                                  "/api/audit"};
    if (path == "/api/audit/mark") {
        if (method != "POST") return error_response(405, "use POST");
        return mark(body);
    }
    if (!get_routes.count(path)) return error_response(404, "no such route: " + path);
    if (method != "GET") return error_response(405, "use GET");

    if (path == "/api/workbook") return workbook_json();
    if (path == "/api/graph") return graph_json(rows);
    if (path == "/api/lint") return lint_json();
    if (path == "/api/cascades") {
        double e = 0.05;
        if (params.count("error_rate")) {
            try {
                std::size_t used = 0;
                e = std::stod(params["error_rate"], &used);
                if (used != params["error_rate"].size()) throw std::invalid_argument("trailing text");
            } catch (const std::exception&) {
                return error_response(400, "error_rate must be a number");
            }
            if (!(e >= 0 && e <= 1)) return error_response(400, "error_rate must lie in [0, 1]");
        }
        return cascades_json(rows, e);
    }
    std::optional<CellAddress> focus;
    if (params.count("focus") && !params["focus"].empty()) {
        focus = parse_cell(params["focus"]);
        if (!focus) return error_response(400, "malformed cell address: " + params["focus"]);
    }
    return audit_json(focus);
}

Response Service::workbook_json() const {
    const Workbook& wb = ctx_.workbook();
    auto grid = eval::recalculate(wb);
    auto classes = analyze::classify_cells(wb);
    json sheets = json::array();
    for (const auto& s : wb.sheets) {
        int rows = 0, cols = 0;
        json cells = json::array();
        for (const auto& [pos, cell] : s.cells) {
            CellAddress a{s.name, pos.row, pos.col};
            rows = std::max(rows, pos.row);
            cols = std::max(cols, pos.col);
            json c = address_json(a);
            auto v = grid.count(a) ? grid.at(a) : Value(Blank{});
            c["display"] = eval::display_text(wb, grid, a);
            c["value"] = value_json(v);
            c["type"] = std::string(type_name(v));
            c["class"] = std::string(analyze::class_name(classes.at(a)));
            c["input"] = cell.input;
            c["format"] = cell.format;
            c["formula"] = cell.formula() ? json(cell.formula()->source) : json(nullptr);
            cells.push_back(std::move(c));
        }
        sheets.push_back({{"name", s.name}, {"rows", rows}, {"cols", cols}, {"cells", std::move(cells)}});
    }
    json props = json::object();
    for (const auto& [k, v] : wb.properties) props[k] = v;
    return json_response(200, {{"fingerprint", ctx_.fingerprint()},
                               {"source", options_.source},
                               {"properties", props},
                               {"sheets", sheets}});
}

Response Service::graph_json(bool rows) const {
    const auto& g = ctx_.graph();
    json nodes = json::array(), edges = json::array(), cycles = json::array();
    if (rows) {
        auto d = graph::row_digraph(g, ctx_.workbook());
        for (std::size_t i = 0; i < d.size(); ++i) nodes.push_back({{"id", d.ids[i]}, {"label", d.labels[i]}});
        for (std::size_t i = 0; i < d.size(); ++i) {
            for (auto j : d.out[i]) edges.push_back({{"from", d.ids[i]}, {"to", d.ids[j]}, {"precision", "precise"}});
        }
        for (const auto& c : graph::topological_order(d).cycles) {
            json ids = json::array();
            for (auto v : c) ids.push_back(d.ids[v]);
            cycles.push_back(ids);
        }
    } else {
        for (const auto& n : g.nodes()) nodes.push_back(address_json(n));
        for (const auto& e : g.edges()) {
            edges.push_back({{"from", node_id(e.precedent)},
                             {"to", node_id(e.dependent)},
                             {"precision", std::string(graph::precision_name(e.precision))}});
        }
        for (const auto& c : graph::topological_order(g).cycles) {
            json ids = json::array();
            for (const auto& a : c) ids.push_back(node_id(a));
            cycles.push_back(ids);
        }
    }
    json dangling = json::array();
    for (const auto& d : g.dangling()) dangling.push_back({{"cell", node_id(d.cell)}, {"name", d.name}});
    return json_response(200, {{"level", rows ? "rows" : "cell"},
                               {"nodes", nodes},
                               {"edges", edges},
                               {"cycles", cycles},
                               {"dangling", dangling}});
}

Response Service::lint_json() const {
    json findings = json::array();
    for (const auto& f : lint::lint(ctx_.workbook())) {
        findings.push_back({{"code", f.code},
                            {"address", f.where.single_cell() ? qualified_r1c1(f.where.first)
                                                              : qualified_r1c1(f.where.first) + ":" + to_r1c1(f.where.last)},
                            {"severity", std::string(lint::severity_name(f.severity))},
                            {"message", f.message}});
    }
    return json_response(200, {{"findings", findings}});
}

Response Service::cascades_json(bool rows, double error_rate) const {
    const auto& g = ctx_.graph();
    auto d = rows ? graph::row_digraph(g, ctx_.workbook()) : graph::cell_digraph(g);
    auto census = analyze::enumerate_cascades(d, {analyze::CascadeOptions{}.cap, false});
    json hist = json::array();
    for (const auto& [len, count] : census.histogram) {
        hist.push_back({{"length", len}, {"count", count}, {"risk", analyze::cascade_risk(error_rate, static_cast<long long>(len))}});
    }
    return json_response(200, {{"level", rows ? "rows" : "cell"},
                               {"error_rate", error_rate},
                               {"total", census.total},
                               {"truncated", census.truncated},
                               {"histogram", hist}});
}

Response Service::audit_json(const std::optional<CellAddress>& focus) const {
    std::lock_guard lock(mu_);
    auto colors = ctx_.colors(state_, focus);
    auto p = ctx_.progress(state_);
    json cells = json::array();
    for (const auto& [a, c] : colors) {
        json j = address_json(a);
        j["color"] = std::string(audit::color_name(c));
        if (auto it = state_.checked.find(a); it != state_.checked.end()) {
            j["auditor"] = it->second.auditor;
            j["timestamp"] = it->second.timestamp;
        }
        cells.push_back(std::move(j));
    }
    json progress{{"green", p.green},       {"yellow", p.yellow}, {"dark_yellow", p.dark_yellow},
                  {"red", p.red},           {"total", p.total},   {"complete", p.complete}};
    json out{{"fingerprint", state_.fingerprint}, {"cells", cells}, {"progress", progress}};
    out["focus"] = focus ? json(node_id(*focus)) : json(nullptr);
    return json_response(200, out);
}

Response Service::mark(const std::string& body) {
    json req = json::parse(body, nullptr, false);
    if (req.is_discarded() || !req.is_object()) return error_response(400, "body must be a JSON object");
    if (!req.contains("cell") || !req["cell"].is_string()) return error_response(400, "missing \"cell\"");
    auto cell = parse_cell(req["cell"].get<std::string>());
    if (!cell) return error_response(400, "malformed cell address: " + req["cell"].get<std::string>());
    bool checked = req.value("checked", true);
    std::string auditor = req.value("auditor", std::string());
    if (auditor.empty()) return error_response(400, "missing \"auditor\"");

    std::lock_guard lock(mu_);
    if (req.contains("fingerprint") && req["fingerprint"] != state_.fingerprint) {
        return error_response(409, "stale session: fingerprint does not match the workbook");
    }
    if (options_.reload) {
        std::string current;
        try {
            current = wbt::fingerprint(wbt::parse_workbook(options_.reload()));
        } catch (const std::exception&) {
            current.clear();
        }
        if (current != state_.fingerprint) return error_response(409, "stale session: workbook changed on disk");
    }
    try {
        std::string ts = audit::now_rfc3339();
        std::string line = audit::AuditContext::log_line(checked, *cell, auditor, ts);
        auto r = ctx_.mark(state_, *cell, checked, auditor, ts);
        if (options_.log_path) {
            std::ofstream log(*options_.log_path, std::ios::app);
            if (!log) return error_response(500, "cannot append to audit log");
            log << line;
        }
        state_ = std::move(r.state);
        json out{{"ok", true}, {"cell", node_id(*cell)}, {"checked", checked}};
        out["warning"] = r.warning ? json(*r.warning) : json(nullptr);
        auto p = ctx_.progress(state_);
        out["progress"] = {{"green", p.green}, {"total", p.total}, {"complete", p.complete}};
        return json_response(200, out);
    } catch (const audit::StaleSession& e) {
        return error_response(409, e.what());
    } catch (const std::invalid_argument& e) {
        return error_response(400, e.what());
    }
}

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::wait_until_ready() const { server_->wait_until_ready(); }

void Service::stop() { server_->stop(); }

}  // namespace cellaudit::service
