#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "platelab/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int counter = 0;

fs::path fresh_dir() {
    fs::path d = fs::temp_directory_path() /
                 ("platelab_cli_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++));
    fs::create_directories(d);
    return d;
}

void put(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(PLATELAB_CLI_PATH) + " " + args + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

json report_of(const fs::path& dir) { return json::parse(slurp(dir / "report.json")); }

}  // namespace

TEST_CASE("analyze-load on the worked example") {
    fs::path d = fresh_dir();
    put(d / "c.json", R"({"domain": {"n": 129}, "load": {"id": "tilt"}})");
    REQUIRE(run_cli("analyze-load --config " + (d / "c.json").string() + " --out " +
                    d.string()) == 0);
    json r = report_of(d);
    CHECK(r["command"] == "analyze-load");
    CHECK(r["optimal_set"]["dim"] == 1);
    CHECK(std::abs(r["optimal_set"]["max_value"].get<double>() - 1.0 / 12.0) < 1e-6);
    CHECK(std::abs(r["moment_matrix"][2][0].get<double>() - 1.0 / 12.0) < 1e-6);
    CHECK(std::abs(r["coefficients"]["a"].get<double>() - 1.0 / 12.0) < 1e-6);
    CHECK(std::abs(r["coefficients"]["b"].get<double>()) < 1e-6);
    CHECK(r["compatibility_ok"] == true);
    CHECK(r["tangent_basis"].size() == 1);
    CHECK(r["normal_basis"].size() == 2);
}

TEST_CASE("config validation failures exit with code 1") {
    fs::path d = fresh_dir();
    put(d / "bad1.json", "{ not json");
    CHECK(run_cli("analyze-load --config " + (d / "bad1.json").string()) == 1);
    put(d / "bad2.json", R"({"domain": {"n": 65, "typo_key": 3}})");
    CHECK(run_cli("analyze-load --config " + (d / "bad2.json").string()) == 1);
    put(d / "bad3.json", R"({"tolerances": {"tau_iso": -1}})");
    CHECK(run_cli("analyze-load --config " + (d / "bad3.json").string()) == 1);
    put(d / "bad4.json", R"({"load": {"id": "no_such_load"}})");
    CHECK(run_cli("analyze-load --config " + (d / "bad4.json").string()) == 1);
    CHECK(run_cli("analyze-load --config " + (d / "missing.json").string()) == 1);
    // usage error: no subcommand
    CHECK(run_cli("--config " + (d / "bad1.json").string()) != 0);
}

TEST_CASE("stability verdicts per load class") {
    fs::path d = fresh_dir();
    put(d / "tilt.json", R"({"domain": {"n": 65}, "load": {"id": "tilt"}})");
    REQUIRE(run_cli("stability --config " + (d / "tilt.json").string() + " --out " +
                    d.string()) == 0);
    json r = report_of(d);
    CHECK(r["verdict"] == "affine-stable");
    CHECK(r["s2_affine_holds"] == true);
    CHECK(std::abs(r["s2_affine_min"].get<double>() - 1.0 / 24.0) < 1e-8);
    CHECK(r["s1_failure"] == false);

    fs::path d2 = fresh_dir();
    put(d2 / "c.json", R"({"domain": {"n": 65}, "load": {"id": "incompatible", "k": 40}})");
    REQUIRE(run_cli("stability --config " + (d2 / "c.json").string() + " --out " +
                    d2.string()) == 0);
    json r2 = report_of(d2);
    CHECK(r2["verdict"] == "kirchhoff-regime");
    CHECK(r2["compatibility_ok"] == false);
    CHECK(r2["s1_failure"] == true);

    fs::path d3 = fresh_dir();
    put(d3 / "c.json", R"({"domain": {"n": 65}, "load": {"id": "zero_moment"}})");
    REQUIRE(run_cli("stability --config " + (d3 / "c.json").string() + " --out " +
                    d3.string()) == 0);
    CHECK(report_of(d3)["verdict"] == "special-regime");
}

TEST_CASE("minimize writes fields and detects divergence") {
    fs::path d = fresh_dir();
    put(d / "c.json",
        R"({"domain": {"n": 33}, "load": {"id": "tilt"},
            "options": {"starts": 2, "max_iter": 200}})");
    REQUIRE(run_cli("minimize --config " + (d / "c.json").string() + " --out " +
                    d.string()) == 0);
    json r = report_of(d);
    CHECK(r["verdict"] == "minimizer-found");
    CHECK(r["value"].get<double>() < 0.0);
    CHECK(r["start_values"].size() == 2);
    CHECK(r["energy_trace"].size() >= 2);
    CHECK(fs::exists(d / "u.txt"));
    CHECK(fs::exists(d / "v.txt"));
    // the dumps parse back onto the same grid
    platelab::VectorField2D u = platelab::read_field((d / "u.txt").string());
    CHECK(u.grid.n1 == 33);
    CHECK(u.dim() == 2);

    fs::path d2 = fresh_dir();
    put(d2 / "c.json",
        R"({"domain": {"n": 33}, "load": {"id": "runaway"},
            "options": {"starts": 2, "max_iter": 150}})");
    REQUIRE(run_cli("minimize --config " + (d2 / "c.json").string() + " --out " +
                    d2.string()) == 0);
    CHECK(report_of(d2)["verdict"] == "unbounded-below");
}

TEST_CASE("scaling command emits a slope fit and a CSV series") {
    fs::path d = fresh_dir();
    put(d / "c.json",
        R"({"load": {"id": "tilt"}, "options": {"family": "kl",
            "h_values": [0.2, 0.1, 0.05, 0.02]}})");
    REQUIRE(run_cli("scaling --config " + (d / "c.json").string() + " --out " +
                    d.string()) == 0);
    json r = report_of(d);
    CHECK(r["degenerate"] == false);
    CHECK(r["slope"].get<double>() > 1.9);
    CHECK(r["slope"].get<double>() < 2.1);
    std::string csv = slurp(d / "scaling.csv");
    CHECK(csv.rfind("h,E_h,J_h", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

    fs::path d2 = fresh_dir();
    put(d2 / "c.json",
        R"({"load": {"id": "tilt"}, "options": {"family": "rigid",
            "h_values": [0.2, 0.1, 0.05, 0.02]}})");
    REQUIRE(run_cli("scaling --config " + (d2 / "c.json").string() + " --out " +
                    d2.string()) == 0);
    CHECK(report_of(d2)["degenerate"] == true);
}

TEST_CASE("embed command dumps the surface and rejects bad profiles") {
    fs::path d = fresh_dir();
    put(d / "c.json",
        R"({"domain": {"n": 129}, "options": {"profile": "sine",
            "profile_amplitude": 0.2}})");
    REQUIRE(run_cli("embed --config " + (d / "c.json").string() + " --out " +
                    d.string()) == 0);
    json r = report_of(d);
    CHECK(r["residual"].get<double>() < 1e-5);
    CHECK(fs::exists(d / "y.txt"));
    CHECK(fs::exists(d / "u.txt"));
    CHECK(fs::exists(d / "residual_map.txt"));
    platelab::VectorField2D rm = platelab::read_field((d / "residual_map.txt").string());
    CHECK(rm.values.maxCoeff() < 1e-5);

    fs::path d2 = fresh_dir();
    put(d2 / "c.json", R"({"domain": {"n": 65}, "options": {"profile": "bump"}})");
    CHECK(run_cli("embed --config " + (d2 / "c.json").string() + " --out " +
                  d2.string()) == 1);
}

TEST_CASE("reports are byte-identical for identical config and seed") {
    fs::path da = fresh_dir(), db = fresh_dir();
    std::string cfg =
        R"({"domain": {"n": 65}, "load": {"id": "tilt"}, "options": {"seed": 7}})";
    put(da / "c.json", cfg);
    put(db / "c.json", cfg);
    REQUIRE(run_cli("stability --config " + (da / "c.json").string() + " --out " +
                    da.string()) == 0);
    REQUIRE(run_cli("stability --config " + (db / "c.json").string() + " --out " +
                    db.string()) == 0);
    CHECK(slurp(da / "report.json") == slurp(db / "report.json"));
    CHECK(!slurp(da / "report.json").empty());

    // minimize with field dumps, fixed seed
    fs::path ma = fresh_dir(), mb = fresh_dir();
    std::string mcfg =
        R"({"domain": {"n": 33}, "load": {"id": "tilt"},
            "options": {"starts": 2, "max_iter": 100, "seed": 3}})";
    put(ma / "c.json", mcfg);
    put(mb / "c.json", mcfg);
    REQUIRE(run_cli("minimize --config " + (ma / "c.json").string() + " --out " +
                    ma.string()) == 0);
    REQUIRE(run_cli("minimize --config " + (mb / "c.json").string() + " --out " +
                    mb.string()) == 0);
    CHECK(slurp(ma / "report.json") == slurp(mb / "report.json"));
    CHECK(slurp(ma / "u.txt") == slurp(mb / "u.txt"));
    CHECK(slurp(ma / "v.txt") == slurp(mb / "v.txt"));

    // a different seed changes the hash but stays valid
    REQUIRE(run_cli("minimize --config " + (mb / "c.json").string() + " --seed 9" +
                    " --out " + mb.string()) == 0);
    CHECK(report_of(mb)["config_hash"] != report_of(ma)["config_hash"]);
}
