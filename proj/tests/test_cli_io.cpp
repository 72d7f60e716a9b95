#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pgs/cli_io.hpp"

using namespace pgs;
using namespace pgs::cli;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("pgslab_test_" + tag);
    std::filesystem::remove_all(dir);
    return dir.string();
}

RunConfig parse_args(const std::vector<std::string>& args) {
    std::vector<std::string> all{"pgslab"};
    all.insert(all.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : all) argv.push_back(s.c_str());
    return parse_config((int)argv.size(), argv.data());
}

}  // namespace

TEST_CASE("minimal solve flags give a valid config with defaults") {
    auto cfg = parse_args({"solve", "--system", "decay", "--out", temp_dir("defaults")});
    CHECK(cfg.command == "solve");
    CHECK(cfg.N == 64);
    CHECK(cfg.T == 1.0);
    CHECK(cfg.substeps == 8);
}

TEST_CASE("config files seed the defaults and flags override them") {
    auto path = std::filesystem::temp_directory_path() / "pgslab_cfg.txt";
    {
        std::ofstream out(path);
        out << "# comment\ncommand = solve\nsystem = forced\nN = 32\nsolver.grad_tol = 1e-9\n";
    }
    std::vector<const char*> argv{"pgslab", "--config", path.c_str(), "solve", "--N", "16"};
    auto cfg = parse_config((int)argv.size(), argv.data());
    CHECK(cfg.system == "forced");
    CHECK(cfg.N == 16);
    CHECK(cfg.tol == 1e-9);
}

TEST_CASE("unknown systems are rejected with the catalog listing") {
    try {
        parse_args({"solve", "--system", "nonsense"});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("decay") != std::string::npos);
        CHECK(msg.find("rds-osc-dissipation") != std::string::npos);
    }
}

TEST_CASE("the resolution rule is named in the rejection") {
    try {
        parse_args({"eps-sweep", "--resolution-factor", "4"});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("h <= eps/16") != std::string::npos);
    }
}

TEST_CASE("edb on the decay system writes a clean run table and exits zero") {
    RunConfig cfg;
    cfg.command = "edb";
    cfg.system = "decay";
    cfg.T = 1.0;
    cfg.N = 64;
    cfg.out_dir = temp_dir("edb");
    CHECK(execute(cfg) == 0);

    std::string csv = slurp(cfg.out_dir + "/run.csv");
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);  // header
    CHECK(line == "t,energy,duee_lhs,duee_rhs,duee_slack,edb_residual_cum,step_iters");
    int rows = 0;
    while (std::getline(ss, line)) {
        ++rows;
        // duee_slack is the fifth column
        std::stringstream ls(line);
        std::string cell;
        for (int c = 0; c < 5; ++c) std::getline(ls, cell, ',');
        CHECK(std::stod(cell) >= -1e-8);
    }
    CHECK(rows == 65);
    CHECK(std::filesystem::exists(cfg.out_dir + "/manifest.json"));
    CHECK(std::filesystem::exists(cfg.out_dir + "/config.txt"));
}

TEST_CASE("means of the oscillatory instance export the expected tensors") {
    RunConfig cfg;
    cfg.command = "means";
    cfg.instance = "osc-dissipation";
    cfg.out_dir = temp_dir("means");
    CHECK(execute(cfg) == 0);
    std::string j = slurp(cfg.out_dir + "/means.json");
    CHECK(j.find("\"A_aver\": 2.0") != std::string::npos);
    CHECK(j.find("\"A_harm\": 1.732050") != std::string::npos);
    CHECK(std::filesystem::exists(cfg.out_dir + "/tensors.json"));
}

TEST_CASE("probes pass on catalog systems") {
    RunConfig cfg;
    cfg.command = "probes";
    cfg.system = "forced";
    cfg.out_dir = temp_dir("probes");
    CHECK(execute(cfg) == 0);
    CHECK(std::filesystem::exists(cfg.out_dir + "/probes.json"));
}

TEST_CASE("identical configs produce byte-identical outputs") {
    RunConfig cfg;
    cfg.command = "solve";
    cfg.system = "forced";
    cfg.N = 16;
    cfg.out_dir = temp_dir("det");
    CHECK(execute(cfg) == 0);
    std::string csv1 = slurp(cfg.out_dir + "/run.csv");
    std::string manifest1 = slurp(cfg.out_dir + "/manifest.json");
    CHECK(execute(cfg) == 0);  // rerun of the very same config
    CHECK(slurp(cfg.out_dir + "/run.csv") == csv1);
    CHECK(slurp(cfg.out_dir + "/manifest.json") == manifest1);
}
