#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(NLBODE_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) {
        r.out.append(buf.data(), n);
    }
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("nlbode_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("bode writes curves and a JSON summary") {
    const auto dir = scratch("bode");
    const auto r = run("bode --json --grid 0.1:10:2 --out " + dir.string());
    REQUIRE(r.code == 0);
    const json s = json::parse(r.out);
    CHECK(s.at("points").get<int>() == 5);
    CHECK(s.at("gamma_full_S").get<double>() == doctest::Approx(1.29).epsilon(0.05));
    CHECK(s.at("ordering_violations").get<int>() == 0);
    CHECK(fs::exists(dir / "S_curve.csv"));
    CHECK(fs::exists(dir / "L_curve.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(json::parse(slurp(dir / "summary.json")) == s);
    const std::string csv = slurp(dir / "S_curve.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("bode output is byte-identical across runs") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    REQUIRE(run("bode --json --grid 0.5:5:3 --out " + a.string()).code == 0);
    REQUIRE(run("bode --json --grid 0.5:5:3 --out " + b.string()).code == 0);
    for (const char* f : {"S_curve.csv", "L_curve.csv", "S_curve.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("single-point grid has no bandwidths") {
    const auto dir = scratch("one");
    const auto r = run("bode --json --grid 1:1:1 --out " + dir.string());
    REQUIRE(r.code == 0);
    const json s = json::parse(r.out);
    CHECK(s.at("points").get<int>() == 1);
    CHECK(s.at("wB").is_null());
    CHECK(s.at("wc").is_null());
    const std::string csv = slurp(dir / "S_curve.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("configuration errors exit with code 2") {
    const auto dir = scratch("bad");
    CHECK(run("bode --config " + write_config(dir, "{\"grid\": {\"hgh\": 1}}").string()).code == 2);
    CHECK(run("bode --config " + write_config(dir, "{ not json").string()).code == 2);
    CHECK(run("bode --config /nonexistent.json").code == 2);
    CHECK(run("bode --grid 1:2").code == 2);
    CHECK(run("nosuchcommand").code == 2);
    CHECK(run("simulate --reference r9 --out " + dir.string()).code == 2);
    CHECK(run("srg --block nope --out " + dir.string()).code == 2);
    CHECK(run("srg --system Q --out " + dir.string()).code == 2);
}

TEST_CASE("unstable closed loop exits with code 3") {
    const auto dir = scratch("unstable");
    const auto cfg = write_config(dir, R"({"plant": {"num": [1], "den": [1, -20]}})");
    CHECK(run("bode --config " + cfg.string() + " --out " + dir.string()).code == 3);
}

TEST_CASE("srg dumps a boundary CSV") {
    const auto dir = scratch("srg");
    const auto r = run("srg --system S --block zw --space harmonic --omega 2 --out " + dir.string());
    REQUIRE(r.code == 0);
    bool found = false;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".csv" && e.path().filename().string().rfind("srg_S_zw_harmonic", 0) == 0) {
            found = true;
            CHECK(slurp(e.path()).find("re,im,segment_id") != std::string::npos);
        }
    }
    CHECK(found);
}

TEST_CASE("simulate writes the time series") {
    const auto dir = scratch("sim");
    const auto r = run("simulate --json --reference r1 --out " + dir.string());
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir / "sim_r1.csv");
    CHECK(csv.rfind("t,r,e,theta,u\n", 0) == 0);
}
