#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "lo/error.hpp"
#include "lo/harness.hpp"
#include "lo/parallel.hpp"

using namespace lo;
using io::Json;
namespace fs = std::filesystem;

namespace {

// Scratch directory removed on destruction.
struct Scratch {
    fs::path dir;
    Scratch() {
        std::random_device rd;
        dir = fs::temp_directory_path() / ("lo_harness_" + std::to_string(rd()));
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string put(const std::string& name, const std::string& text) const {
        const auto p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

RunReport run_task(Task t, Json params) {
    ExperimentConfig c;
    c.task = t;
    c.params = std::move(params);
    return run(c);
}

}  // namespace

TEST_CASE("rho task reproduces the all-ones value") {
    Scratch s;
    const auto v = s.put("v.json", R"({"d":1,"entries":[1,1,1,1,1,1,1,1,1,1]})");
    auto r = run_task(Task::rho, {{"form", "linear"}, {"matrix", v}, {"beta", "0"}, {"dist", "bernoulli"}});
    REQUIRE(r.exit_code == 0);
    CHECK(r.payload.at("value") == "63/256");
    CHECK(r.payload.at("kind") == "exact");
    CHECK(r.error_class.empty());
}

TEST_CASE("malformed input maps to configuration errors") {
    Scratch s;
    const auto bad = s.put("bad.json", "{not json");
    auto r = run_task(Task::rho, {{"form", "linear"}, {"matrix", bad}, {"beta", "0"}});
    CHECK(r.exit_code == 2);
    CHECK(r.error_class == "ConfigInvalid");

    r = run_task(Task::rho, {{"form", "linear"}, {"matrix", s.path("missing.json")}, {"beta", "0"}});
    CHECK(r.exit_code == 2);

    const auto v = s.put("v.json", R"({"d":1,"entries":[1,2]})");
    r = run_task(Task::rho, {{"form", "cubic"}, {"matrix", v}, {"beta", "0"}});
    CHECK(r.exit_code == 2);
    r = run_task(Task::rho, {{"form", "linear"}, {"matrix", v}, {"beta", "-1"}});
    CHECK(r.exit_code == 2);
    r = run_task(Task::rho, {{"form", "linear"}, {"matrix", v}, {"beta", "0"}, {"dist", "poisson"}});
    CHECK(r.exit_code == 2);
}

TEST_CASE("budget errors exit with code 3") {
    Scratch s;
    const auto v = s.put("v.json", R"({"d":1,"entries":[1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20,21,22,23,24,25,26,27,28,29,30]})");
    auto r = run_task(Task::rho, {{"form", "linear"}, {"matrix", v}, {"beta", "0"}, {"budget", "1000"}});
    CHECK(r.exit_code == 3);
    CHECK(r.error_class == "BudgetExceeded");
}

TEST_CASE("constructed instance feeds rho and verify") {
    Scratch s;
    const auto p = s.put("p.json", R"({"n":6,"k":[1,1,1,-1,-1,-1],"b":["1","1","1","1","1","1"],"delta":"0"})");
    auto built = run_task(Task::construct, {{"kind", "ex1.5"}, {"params", p}, {"seed", "1"}});
    REQUIRE(built.exit_code == 0);
    CHECK(built.payload.contains("hidden"));
    CHECK(built.payload.at("check").at("holds") == true);
    const auto inst = s.path("inst.json");
    io::write_file(inst, built.payload);

    auto rho = run_task(Task::rho, {{"form", "bilinear"}, {"matrix", inst}, {"beta", "1/2"}});
    REQUIRE(rho.exit_code == 0);

    // No pivots: each combined row is the row itself.
    const auto cert = s.put("c.json", R"({"k":1,"pivot_rows":[],
        "row_coeffs":{"0":[],"1":[],"2":[],"3":[],"4":[],"5":[]},"surviving":[0,1,2,3,4,5],
        "bound_exponent":1,"radius_factor":"1"})");
    auto v = run_task(Task::verify, {{"matrix", inst}, {"cert", cert}, {"beta", "1/2"}});
    REQUIRE(v.exit_code == 0);
    CHECK(v.payload.at("rows").size() == 6);
}

TEST_CASE("inverse-linear fits the near-progression") {
    Scratch s;
    const auto pts = s.put("pts.json", "[0.1, 1.05, 2.02, 2.98]");
    auto r = run_task(Task::inverse_linear, {{"points", pts}, {"beta", "1/10"}});
    REQUIRE(r.exit_code == 0);
    const Json& fit = r.payload.at("fit");
    CHECK(fit.at("gap").at("generators").size() == 1);
    CHECK(fit.at("covered").size() == 4);
}

TEST_CASE("inverse-quadratic certificate verifies") {
    Scratch s;
    const auto p = s.put("p.json", R"({"n":6,"k":[1,1,1,-1,-1,-1],"b":["1","1","1","1","1","1"],"delta":"0"})");
    auto built = run_task(Task::construct, {{"kind", "ex1.5"}, {"params", p}});
    REQUIRE(built.exit_code == 0);
    const auto inst = s.path("inst.json");
    io::write_file(inst, built.payload);

    auto q = run_task(Task::inverse_quadratic,
                      {{"matrix", inst}, {"beta", "1/2"}, {"subsets", "sample:16"}, {"seed", "3"}});
    REQUIRE(q.exit_code == 0);
    const auto cert = s.path("c.json");
    io::write_file(cert, q.payload.at("certificate"));
    auto v = run_task(Task::verify, {{"matrix", inst}, {"cert", cert}, {"beta", "1/2"}});
    REQUIRE(v.exit_code == 0);
    CHECK(v.payload.at("all_meet_floor") == true);
}

TEST_CASE("reports are written and round-trip") {
    Scratch s;
    const auto v = s.put("v.json", R"(["1","1","2"])");
    ExperimentConfig c;
    c.task = Task::rho;
    c.params = {{"form", "linear"}, {"matrix", v}, {"beta", "1/2"}, {"mode", "mc"}, {"samples", "500"}, {"seed", "9"}};
    c.output = s.path("report.json");
    const auto r = run(c);
    REQUIRE(r.exit_code == 0);
    const Json back = io::read_file(*c.output);
    CHECK(back == to_json(r));
    CHECK(back.at("seed") == 9);
    CHECK(back.at("config").at("task") == "rho");
}

TEST_CASE("payloads do not depend on the thread count") {
    Scratch s;
    const auto m = s.put("m.json", R"({"d":1,"entries":[[1,2,0],[2,0,1],[0,1,3]]})");
    const Json params = {{"form", "quadratic"}, {"matrix", m}, {"beta", "1"}, {"dist", "lazy-sym-bernoulli"}};
    set_thread_count(1);
    const auto one = run_task(Task::rho, params).payload.dump();
    set_thread_count(4);
    const auto four = run_task(Task::rho, params).payload.dump();
    set_thread_count(0);
    CHECK(one == four);
}

TEST_CASE("task names round-trip") {
    for (Task t : {Task::rho, Task::construct, Task::decouple, Task::inverse_linear, Task::inverse_bilinear,
                   Task::inverse_quadratic, Task::verify, Task::accept})
        CHECK(parse_task(to_string(t)) == t);
    CHECK_THROWS_AS(parse_task("bogus"), ConfigInvalid);
}
