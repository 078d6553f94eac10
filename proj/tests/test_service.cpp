#include <doctest.h>

#include <httplib.h>
#include <unistd.h>

#include <filesystem>
#include <thread>

#include <json.hpp>

#include "cellaudit/service.hpp"
#include "support.hpp"

using namespace cellaudit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

service::Service make_service(service::Options opts = {}) {
    audit::AuditContext ctx(testsupport::sample());
    auto state = ctx.new_session();
    return service::Service(ctx.workbook(), state, std::move(opts));
}

json body(const service::Response& r) { return json::parse(r.body); }

json post_mark(service::Service& svc, json req, int expected_status) {
    auto r = svc.handle("POST", "/api/audit/mark", req.dump());
    CHECK(r.status == expected_status);
    return body(r);
}

}  // namespace

TEST_CASE("workbook endpoint") {
    auto svc = make_service({"sample.wbt", std::nullopt, nullptr});
    auto r = svc.handle("GET", "/api/workbook");
    CHECK(r.status == 200);
    CHECK(r.content_type == "application/json");
    auto j = body(r);
    CHECK(j["source"] == "sample.wbt");
    CHECK(j["properties"]["author"] == "Pat Analyst");
    REQUIRE(j["sheets"].size() == 1);
    auto& sheet = j["sheets"][0];
    CHECK(sheet["rows"] == 11);
    CHECK(sheet["cols"] == 7);
    CHECK(sheet["cells"].size() == 71);
    json r2c4;
    for (auto& c : sheet["cells"]) {
        if (c["address"] == "R2C4") r2c4 = c;
    }
    CHECK(r2c4["display"] == "13,800");
    CHECK(r2c4["class"] == "formula");
    CHECK(r2c4["formula"] == "=(1+Growth_Rate)*Prior_Year");
    CHECK(r2c4["id"] == "Forecast.R2C4");
    CHECK(r2c4["input"] == false);
    CHECK(svc.handle("GET", "/api/workbook").body == r.body);  // deterministic
}

TEST_CASE("graph, lint and cascades endpoints") {
    auto svc = make_service();
    auto g = body(svc.handle("GET", "/api/graph"));
    CHECK(g["nodes"].size() == 71);
    CHECK(g["edges"].size() == 96);
    CHECK(g["edges"][0].contains("precision"));
    auto rows = body(svc.handle("GET", "/api/graph?level=rows"));
    CHECK(rows["nodes"].size() == 11);
    CHECK(rows["edges"].size() == 11);
    CHECK(body(svc.handle("GET", "/api/lint"))["findings"].empty());
    auto c = body(svc.handle("GET", "/api/cascades?error_rate=0.05"));
    bool saw6 = false;
    for (auto& h : c["histogram"]) {
        if (h["length"] == 6) {
            saw6 = true;
            CHECK(h["risk"].get<double>() == doctest::Approx(0.264908109375));
        }
    }
    CHECK(saw6);
    CHECK(svc.handle("GET", "/api/cascades?error_rate=abc").status == 400);
    CHECK(svc.handle("GET", "/api/cascades?error_rate=1.5").status == 400);
}

TEST_CASE("routing errors") {
    auto svc = make_service();
    CHECK(svc.handle("GET", "/api/nope").status == 404);
    CHECK(svc.handle("POST", "/api/workbook").status == 405);
    CHECK(svc.handle("GET", "/api/audit/mark").status == 405);
    CHECK(svc.handle("GET", "/api/audit?focus=zzz").status == 400);
    auto e = body(svc.handle("GET", "/api/nope"));
    CHECK(e["status"] == 404);
}

TEST_CASE("audit marking") {
    auto svc = make_service();
    auto a = body(svc.handle("GET", "/api/audit"));
    CHECK(a["progress"]["total"] == 71);
    CHECK(a["focus"].is_null());

    auto m = post_mark(svc, {{"cell", "R2C1"}, {"auditor", "amy"}}, 200);
    CHECK(m["ok"] == true);
    CHECK(m["warning"].is_null());
    CHECK(m["progress"]["green"] == 1);
    auto w = post_mark(svc, {{"cell", "R11C7"}, {"auditor", "amy"}}, 200);
    CHECK(w["warning"].is_string());
    post_mark(svc, {{"cell", "R11C7"}, {"auditor", "amy"}, {"checked", false}}, 200);
    CHECK(svc.state().checked.size() == 1);

    post_mark(svc, {{"cell", "R2C3"}, {"auditor", "amy"}}, 200);
    auto focused = body(svc.handle("GET", "/api/audit?focus=R2C5"));
    for (auto& c : focused["cells"]) {
        if (c["address"] == "R2C4") CHECK(c["color"] == "dark-yellow");
        if (c["address"] == "R2C1") CHECK(c["auditor"] == "amy");
    }

    post_mark(svc, {{"auditor", "amy"}}, 400);
    post_mark(svc, {{"cell", "R2C3"}}, 400);
    post_mark(svc, {{"cell", "bad"}, {"auditor", "amy"}}, 400);
    post_mark(svc, {{"cell", "R2C3"}, {"auditor", "two words"}}, 400);
    post_mark(svc, {{"cell", "R30C3"}, {"auditor", "amy"}}, 400);  // out of scope
    CHECK(svc.handle("POST", "/api/audit/mark", "not json").status == 400);
    post_mark(svc, {{"cell", "R2C3"}, {"auditor", "amy"}, {"fingerprint", "0000000000000000"}}, 409);
}

TEST_CASE("changed workbook on disk is a stale session") {
    auto wb = testsupport::sample();
    std::string text = wbt::serialize_workbook(wb);
    service::Options opts;
    opts.reload = [&text] { return text; };
    auto svc = make_service(opts);
    post_mark(svc, {{"cell", "R2C1"}, {"auditor", "amy"}}, 200);
    text += "cell R30C1 num 1\n";
    post_mark(svc, {{"cell", "R2C3"}, {"auditor", "amy"}}, 409);
    text = "garbage";
    post_mark(svc, {{"cell", "R2C3"}, {"auditor", "amy"}}, 409);
}

TEST_CASE("marks are appended to the log and replay") {
    auto log = fs::temp_directory_path() / ("cellaudit_svc_" + std::to_string(::getpid()) + ".audit");
    audit::AuditContext ctx(testsupport::sample());
    auto state = ctx.new_session();
    std::ofstream(log) << ctx.log_header(state);
    service::Service svc(ctx.workbook(), state, {"s", log.string(), nullptr});
    post_mark(svc, {{"cell", "R2C1"}, {"auditor", "amy"}}, 200);
    post_mark(svc, {{"cell", "Forecast!R2C3"}, {"auditor", "bo"}}, 200);
    auto replayed = ctx.replay(testsupport::read_file(log.string()));
    CHECK(replayed == svc.state());
    fs::remove(log);
}

TEST_CASE("HTTP round trip on an ephemeral port") {
    auto svc = make_service();
    int port = svc.bind_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server([&] { svc.listen_after_bind(); });
    svc.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto wb = client.Get("/api/workbook");
    REQUIRE(wb);
    CHECK(wb->status == 200);
    CHECK(wb->get_header_value("Content-Type").find("application/json") == 0);
    CHECK(json::parse(wb->body)["sheets"][0]["cells"].size() == 71);

    auto mark = client.Post("/api/audit/mark", R"({"cell":"R2C1","auditor":"amy"})", "application/json");
    REQUIRE(mark);
    CHECK(mark->status == 200);
    CHECK(svc.state().checked.size() == 1);

    auto missing = client.Get("/api/missing");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto focus = client.Get("/api/audit?focus=Forecast%21R2C4");
    REQUIRE(focus);
    CHECK(json::parse(focus->body)["focus"] == "Forecast.R2C4");

    svc.stop();
    server.join();
}
