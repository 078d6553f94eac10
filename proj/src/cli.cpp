#include "cellaudit/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cellaudit/analyze.hpp"
#include "cellaudit/audit.hpp"
#include "cellaudit/cellmap.hpp"
#include "cellaudit/inventory.hpp"
#include "cellaudit/lint.hpp"
#include "cellaudit/report.hpp"
#include "cellaudit/service.hpp"
#include "cellaudit/wbt.hpp"

namespace cellaudit::cli {

using nlohmann::json;

std::string current_user() {
    for (const char* var : {"CELLAUDIT_USER", "USER"}) {
        if (const char* v = std::getenv(var); v && *v) return v;
    }
    return "unknown";
}

std::string stamp_line(const std::string& user, const std::string& file, const std::string& timestamp) {
    return "# generated by " + user + " from " + file + " at " + timestamp;
}

namespace {

// A failure that should end the run with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class StampStyle { Line, Markup, None };

struct Report {
    std::string text;
    int code = kOk;
    StampStyle stamp = StampStyle::Line;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Workbook load(const std::string& path) {
    std::string text = read_text(path);
    try {
        return wbt::parse_workbook(text);
    } catch (const wbt::ParseError& e) {
        throw UsageError(path + ": " + e.what());
    }
}

CellAddress cell_arg(const Workbook& wb, const std::string& text) {
    auto a = parse_address(text);
    if (!a) throw UsageError("malformed cell address '" + text + "'");
    if (a->sheet.empty()) {
        if (wb.sheets.empty()) throw UsageError("workbook has no sheets");
        a->sheet = wb.sheets.front().name;
    }
    return *a;
}

CellRange range_arg(const Workbook& wb, const std::string& text) {
    auto r = parse_range(text);
    if (!r) throw UsageError("malformed range '" + text + "'");
    if (r->first.sheet.empty()) {
        if (wb.sheets.empty()) throw UsageError("workbook has no sheets");
        r->first.sheet = r->last.sheet = wb.sheets.front().name;
    }
    return *r;
}

std::string local_text(const Workbook& wb, const CellAddress& a) {
    return wb.sheets.size() > 1 ? qualified_r1c1(a) : to_r1c1(a);
}

Value literal_value(const std::string& text) {
    if (text == "TRUE" || text == "true") return true;
    if (text == "FALSE" || text == "false") return false;
    char* end = nullptr;
    double d = std::strtod(text.c_str(), &end);
    if (!text.empty() && end && *end == '\0') return d;
    return text;
}

json read_json(const std::string& path) {
    json j = json::parse(read_text(path), nullptr, false);
    if (j.is_discarded()) throw UsageError(path + ": not valid JSON");
    return j;
}

std::string fixed(double x, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, x);
    return buf;
}

// --- subcommands -------------------------------------------------------

Report cmd_eval(const std::string& file, const std::vector<std::string>& sets) {
    Workbook wb = load(file);
    eval::Overrides overrides;
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects ADDR=VALUE, got '" + s + "'");
        overrides[cell_arg(wb, s.substr(0, eq))] = literal_value(s.substr(eq + 1));
    }
    return {report::grid_table(wb, eval::recalculate(wb, overrides))};
}

Report cmd_graph(const std::string& file, bool dot, bool rows) {
    Workbook wb = load(file);
    auto g = graph::build_graph(wb);
    if (dot) return {graph::export_dot(g, wb, rows ? graph::DotLevel::RowLabel : graph::DotLevel::Cell)};
    std::string out;
    if (rows) {
        auto d = graph::row_digraph(g, wb);
        out += "precedent\tdependent\n";
        for (std::size_t i = 0; i < d.size(); ++i) {
            for (auto j : d.out[i]) out += d.labels[i] + "\t" + d.labels[j] + "\n";
        }
        return {out};
    }
    out += "precedent\tdependent\tprecision\n";
    for (const auto& e : g.edges()) {
        out += local_text(wb, e.precedent) + "\t" + local_text(wb, e.dependent) + "\t" +
               std::string(graph::precision_name(e.precision)) + "\n";
    }
    for (const auto& c : graph::topological_order(g).cycles) {
        out += "cycle";
        for (const auto& a : c) out += "\t" + local_text(wb, a);
        out += "\n";
    }
    for (const auto& d : g.dangling()) out += "undeclared-name\t" + local_text(wb, d.cell) + "\t" + d.name + "\n";
    return {out};
}

Report cmd_cascades(const std::string& file, double error_rate, bool rows, std::size_t cap, bool paths) {
    if (!(error_rate >= 0 && error_rate <= 1)) throw UsageError("--error-rate must lie in [0, 1]");
    Workbook wb = load(file);
    auto g = graph::build_graph(wb);
    auto d = rows ? graph::row_digraph(g, wb) : graph::cell_digraph(g);
    auto census = analyze::enumerate_cascades(d, {cap, paths});
    std::string out = "length\tpaths\trisk\n";
    for (const auto& [len, count] : census.histogram) {
        out += std::to_string(len) + "\t" + std::to_string(count) + "\t" +
               fixed(analyze::cascade_risk(error_rate, static_cast<long long>(len)), 4) + "\n";
    }
    out += "total\t" + std::to_string(census.total) + "\n";
    if (census.truncated) out += "truncated\tcap " + std::to_string(cap) + "\n";
    for (const auto& c : census.excluded_cycles) {
        out += "excluded-cycle";
        for (auto v : c) out += "\t" + d.labels[v];
        out += "\n";
    }
    for (const auto& p : census.paths) {
        out += "path";
        for (auto v : p) out += "\t" + d.labels[v];
        out += "\n";
    }
    return {out};
}

Report cmd_map(const std::string& file, bool html, bool svg) {
    Workbook wb = load(file);
    if (html) return {cellmap::render_html(wb), kOk, StampStyle::Markup};
    if (svg) return {cellmap::render_svg(wb), kOk, StampStyle::Markup};
    return {cellmap::render_text(wb)};
}

lint::Config lint_config(const std::string& config_path, bool allow_carry, const std::vector<std::string>& disabled,
                         const std::vector<double>& allowed) {
    lint::Config cfg;
    if (!config_path.empty()) {
        json j = read_json(config_path);
        if (j.contains("disabled")) cfg.disabled = j["disabled"].get<std::set<std::string>>();
        if (j.contains("allowed_numbers")) cfg.allowed_numbers = j["allowed_numbers"].get<std::vector<double>>();
        cfg.allow_column_carry = j.value("allow_column_carry", false);
    }
    if (allow_carry) cfg.allow_column_carry = true;
    cfg.disabled.insert(disabled.begin(), disabled.end());
    cfg.allowed_numbers.insert(cfg.allowed_numbers.end(), allowed.begin(), allowed.end());
    return cfg;
}

Report cmd_lint(const std::string& file, const lint::Config& cfg) {
    Workbook wb = load(file);
    auto findings = lint::lint(wb, cfg);
    std::string out;
    for (const auto& f : findings) out += lint::format_finding(f) + "\n";
    return {out, findings.empty() ? kOk : kFindings};
}

Report cmd_check(const std::string& file, const std::string& config_path) {
    Workbook wb = load(file);
    json cfg = read_json(config_path);
    std::string out;
    bool failed = false;
    try {
        if (cfg.contains("zero_test")) {
            std::string range_text = cfg["zero_test"].at("outputs").get<std::string>();
            auto r = analyze::zero_test(wb, range_arg(wb, range_text));
            out += "zero-test\t" + range_text + "\t" + (r.pass ? "PASS" : "FAIL");
            for (const auto& f : r.failures) out += "\t" + local_text(wb, f.cell) + "=" + to_display(f.value);
            out += "\n";
            failed |= !r.pass;
        }
        if (cfg.value("assertions", true)) {
            for (const auto& a : analyze::check_assertions(wb, eval::recalculate(wb))) {
                out += "assertion\t" + local_text(wb, a.cell) + "\t" + (a.ok ? "PASS" : "FAIL");
                if (!a.ok) out += "\t" + a.detail;
                out += "\n";
                failed |= !a.ok;
            }
        }
        for (const auto& s : cfg.value("sensitivity", json::array())) {
            auto input = cell_arg(wb, s.at("input").get<std::string>());
            double delta = s.value("delta", 1.0);
            double tolerance = s.value("tolerance", 1e-9);
            std::vector<CellAddress> watch;
            for (const auto& w : s.at("watch")) watch.push_back(cell_arg(wb, w.get<std::string>()));
            std::map<CellAddress, Value> deltas;
            try {
                deltas = analyze::sensitivity(wb, input, delta, watch);
            } catch (const std::exception& e) {
                throw UsageError(std::string("sensitivity: ") + e.what());
            }
            for (const auto& w : watch) {
                const Value& v = deltas.at(w);
                out += "sensitivity\t" + local_text(wb, input) + "\t" + general_number(delta) + "\t" +
                       local_text(wb, w) + "\t" + to_display(v);
                json expect = s.value("expect", json::object());
                for (const auto& [key, want] : expect.items()) {
                    if (cell_arg(wb, key) != w) continue;
                    auto got = as_number(v);
                    bool ok = got && std::fabs(*got - want.get<double>()) <= tolerance;
                    out += ok ? "\tPASS" : "\tFAIL";
                    failed |= !ok;
                }
                out += "\n";
            }
        }
    } catch (const json::exception& e) {
        throw UsageError(config_path + ": " + e.what());
    }
    return {out, failed ? kFindings : kOk};
}

std::string default_log(const std::string& file) { return file + ".audit"; }

audit::AuditState load_session(const audit::AuditContext& ctx, const std::string& log) {
    try {
        return ctx.replay(read_text(log));
    } catch (const audit::StaleSession& e) {
        throw UsageError(std::string("stale session: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

Report cmd_audit_init(const std::string& file, std::string log, const std::vector<std::string>& scope, bool force) {
    audit::AuditContext ctx(load(file));
    if (log.empty()) log = default_log(file);
    if (std::filesystem::exists(log) && !force) throw UsageError(log + " already exists (use --force)");
    std::optional<std::set<CellAddress>> cells;
    if (!scope.empty()) {
        cells.emplace();
        for (const auto& s : scope) {
            auto r = range_arg(ctx.workbook(), s);
            const Sheet* sheet = ctx.workbook().find_sheet(r.first.sheet);
            if (!sheet) throw UsageError("no sheet " + r.first.sheet);
            for (int row = r.first.row; row <= r.last.row; ++row) {
                for (int col = r.first.col; col <= r.last.col; ++col) {
                    if (!sheet->find({row, col})) throw UsageError(to_r1c1(CellAddress{"", row, col}) + " is not occupied");
                    cells->insert({sheet->name, row, col});
                }
            }
        }
    }
    auto state = ctx.new_session(cells);
    std::ofstream out(log, std::ios::trunc);
    if (!out) throw UsageError("cannot write " + log);
    out << ctx.log_header(state);
    return {"session\t" + log + "\nfingerprint\t" + state.fingerprint + "\nscope\t" + std::to_string(state.scope.size()) + "\n"};
}

std::string progress_text(const audit::Progress& p) {
    return "green\t" + std::to_string(p.green) + "\nyellow\t" + std::to_string(p.yellow) + "\ndark-yellow\t" +
           std::to_string(p.dark_yellow) + "\nred\t" + std::to_string(p.red) + "\ntotal\t" + std::to_string(p.total) +
           "\ncomplete\t" + (p.complete ? "yes" : "no") + "\n";
}

Report cmd_audit_mark(const std::string& file, std::string log, const std::vector<std::string>& cells,
                      bool checked, std::string auditor, std::ostream& err) {
    audit::AuditContext ctx(load(file));
    if (log.empty()) log = default_log(file);
    if (auditor.empty()) auditor = current_user();
    auto state = load_session(ctx, log);
    std::string lines;
    for (const auto& c : cells) {
        auto a = cell_arg(ctx.workbook(), c);
        std::string ts = audit::now_rfc3339();
        try {
            lines += audit::AuditContext::log_line(checked, a, auditor, ts);
            auto r = ctx.mark(state, a, checked, auditor, ts);
            if (r.warning) err << "warning: " << *r.warning << "\n";
            state = std::move(r.state);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    std::ofstream out(log, std::ios::app);
    if (!out) throw UsageError("cannot append to " + log);
    out << lines;
    return {progress_text(ctx.progress(state))};
}

Report cmd_audit_status(const std::string& file, std::string log, const std::string& focus, bool cells) {
    audit::AuditContext ctx(load(file));
    if (log.empty()) log = default_log(file);
    auto state = load_session(ctx, log);
    std::optional<CellAddress> f;
    if (!focus.empty()) f = cell_arg(ctx.workbook(), focus);
    std::string out = progress_text(ctx.progress(state));
    if (cells) {
        for (const auto& [a, c] : ctx.colors(state, f)) {
            out += local_text(ctx.workbook(), a) + "\t" + std::string(audit::color_name(c));
            if (auto it = state.checked.find(a); it != state.checked.end()) {
                out += "\t" + it->second.auditor + "\t" + it->second.timestamp;
            }
            out += "\n";
        }
    }
    return {out, kOk};
}

Report cmd_crawl(const std::string& root, const std::string& pattern, bool no_recurse) {
    try {
        return {inventory::to_tsv(inventory::crawl(root, pattern, !no_recurse))};
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
}

int cmd_serve(const std::string& file, const std::string& host, int port, std::string log, std::ostream& err) {
    Workbook wb = load(file);
    audit::AuditContext ctx(wb);
    if (log.empty()) log = default_log(file);
    audit::AuditState state;
    if (std::filesystem::exists(log)) {
        state = load_session(ctx, log);
    } else {
        state = ctx.new_session();
        std::ofstream out(log);
        if (!out) throw UsageError("cannot write " + log);
        out << ctx.log_header(state);
    }
    service::Options opts;
    opts.source = file;
    opts.log_path = log;
    opts.reload = [file] { return read_text(file); };
    service::Service svc(std::move(wb), std::move(state), opts);
    err << "serving " << file << " on http://" << host << ":" << port << "\n";
    if (!svc.listen(host, port)) {
        err << "error: cannot listen on " << host << ":" << port << "\n";
        return kUsage;
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spreadsheet audit toolkit for WBT workbooks", "cellaudit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(CELLAUDIT_VERSION));
    bool no_stamp = false;
    app.add_flag("--no-stamp", no_stamp, "Replace the report stamp with a fixed placeholder");

    std::string file;
    auto with_file = [&](CLI::App* sub) {
        sub->fallthrough();
        sub->add_option("file", file, "WBT workbook")->required();
        return sub;
    };

    auto* eval_cmd = with_file(app.add_subcommand("eval", "Recalculate and print the formatted grid"));
    std::vector<std::string> sets;
    eval_cmd->add_option("--set", sets, "Override a cell for this run (ADDR=VALUE)");

    auto* names_cmd = with_file(app.add_subcommand("names", "List named ranges"));
    auto* valid_cmd = with_file(app.add_subcommand("validations", "List validation rules"));
    auto* listing_cmd = with_file(app.add_subcommand("listing", "Print one line per distinct formula of each row"));

    auto* graph_cmd = with_file(app.add_subcommand("graph", "Dependency graph"));
    bool dot = false, rows = false;
    graph_cmd->add_flag("--dot", dot, "Emit Graphviz DOT");
    graph_cmd->add_flag("--rows", rows, "Collapse each row into one node named by its caption");

    auto* casc_cmd = with_file(app.add_subcommand("cascades", "Cascade census and compound error risk"));
    double error_rate = 0.05;
    std::size_t cap = 1000000;
    bool paths = false;
    casc_cmd->add_option("--error-rate", error_rate, "Per-cell error probability")->capture_default_str();
    casc_cmd->add_flag("--rows", rows, "Use the row-level graph");
    casc_cmd->add_option("--cap", cap, "Stop after this many paths")->capture_default_str();
    casc_cmd->add_flag("--paths", paths, "Print every path");

    auto* map_cmd = with_file(app.add_subcommand("map", "Cell map of input, formula and copied cells"));
    bool html = false, svg = false;
    auto* html_opt = map_cmd->add_flag("--html", html, "HTML table");
    map_cmd->add_flag("--svg", svg, "SVG picture")->excludes(html_opt);

    auto* lint_cmd = with_file(app.add_subcommand("lint", "Run the L001-L009 detectors"));
    std::string config;
    bool allow_carry = false;
    std::vector<std::string> disabled;
    std::vector<double> allowed;
    lint_cmd->add_option("--config", config, "JSON lint configuration");
    lint_cmd->add_flag("--allow-carry", allow_carry, "Allow the column-carry pattern in L009");
    lint_cmd->add_option("--disable", disabled, "Detector code to skip");
    lint_cmd->add_option("--allow-number", allowed, "Extra literal allowed by L003");

    auto* check_cmd = with_file(app.add_subcommand("check", "Zero test, assertions and sensitivity checks"));
    check_cmd->add_option("--config", config, "JSON check specification")->required();

    auto* audit_cmd = app.add_subcommand("audit", "Traffic-lights audit session");
    audit_cmd->require_subcommand(1);
    audit_cmd->fallthrough();
    std::string log, auditor, focus;
    std::vector<std::string> scope, cells;
    bool force = false, show_cells = false;
    auto* init_cmd = with_file(audit_cmd->add_subcommand("init", "Start a session log"));
    init_cmd->add_option("--log", log, "Session log (default FILE.audit)");
    init_cmd->add_option("--scope", scope, "Restrict the audit to these cells or ranges");
    init_cmd->add_flag("--force", force, "Overwrite an existing log");
    auto* mark_cmd = with_file(audit_cmd->add_subcommand("mark", "Mark cells as checked"));
    auto* unmark_cmd = with_file(audit_cmd->add_subcommand("unmark", "Withdraw checks"));
    for (auto* c : {mark_cmd, unmark_cmd}) {
        c->add_option("cells", cells, "Cell addresses")->required();
        c->add_option("--log", log, "Session log (default FILE.audit)");
        c->add_option("--auditor", auditor, "Auditor name (default $CELLAUDIT_USER or $USER)");
    }
    auto* status_cmd = with_file(audit_cmd->add_subcommand("status", "Progress and colours"));
    status_cmd->add_option("--log", log, "Session log (default FILE.audit)");
    status_cmd->add_option("--focus", focus, "Cell about to be checked (enables dark-yellow)");
    status_cmd->add_flag("--cells", show_cells, "List the colour of every cell");

    auto* crawl_cmd = app.add_subcommand("crawl", "Inventory of workbooks under a directory");
    crawl_cmd->fallthrough();
    std::string root, pattern = "*.wbt";
    bool no_recurse = false;
    crawl_cmd->add_option("root", root, "Directory to crawl")->required();
    crawl_cmd->add_option("--pattern", pattern, "File name pattern")->capture_default_str();
    crawl_cmd->add_flag("--no-recurse", no_recurse, "Only the top directory");

    auto* serve_cmd = with_file(app.add_subcommand("serve", "HTTP API for the audit interface"));
    std::string host = "127.0.0.1";
    int port = 8080;
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();
    serve_cmd->add_option("--log", log, "Session log (default FILE.audit)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << CELLAUDIT_VERSION << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    Report r;
    std::string source = file;
    try {
        if (*eval_cmd) {
            r = cmd_eval(file, sets);
        } else if (*names_cmd) {
            r = {report::names_table(load(file))};
        } else if (*valid_cmd) {
            r = {report::validations_table(load(file))};
        } else if (*listing_cmd) {
            r = {report::formula_listing(load(file))};
        } else if (*graph_cmd) {
            r = cmd_graph(file, dot, rows);
        } else if (*casc_cmd) {
            r = cmd_cascades(file, error_rate, rows, cap, paths);
        } else if (*map_cmd) {
            r = cmd_map(file, html, svg);
        } else if (*lint_cmd) {
            r = cmd_lint(file, lint_config(config, allow_carry, disabled, allowed));
        } else if (*check_cmd) {
            r = cmd_check(file, config);
        } else if (*init_cmd) {
            r = cmd_audit_init(file, log, scope, force);
        } else if (*mark_cmd || *unmark_cmd) {
            r = cmd_audit_mark(file, log, cells, static_cast<bool>(*mark_cmd), auditor, err);
        } else if (*status_cmd) {
            r = cmd_audit_status(file, log, focus, show_cells);
        } else if (*crawl_cmd) {
            r = cmd_crawl(root, pattern, no_recurse);
            source = root;
        } else if (*serve_cmd) {
            return cmd_serve(file, host, port, log, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    std::string stamp = no_stamp ? stamp_line("-", "-", "-") : stamp_line(current_user(), source, audit::now_rfc3339());
    out << r.text;
    if (r.stamp == StampStyle::Markup) {
        out << "<!-- " << stamp << " -->\n";
    } else if (r.stamp == StampStyle::Line) {
        out << stamp << "\n";
    }
    return r.code;
}

}  // namespace cellaudit::cli
