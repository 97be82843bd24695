#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "gtab/dp_solver.hpp"
#include "gtab/io.hpp"
#include "gtab/simulate.hpp"
#include "json.hpp"

using namespace gtab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_tool(std::vector<std::string> args) {
    args.insert(args.begin(), "gtab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("gtab_test_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("six significant digits") {
    CHECK(io::format6(0.6515697) == "0.65157");
    CHECK(io::round6(1.23456789) == 1.23457);
    CHECK(io::format6(1e-9) == "1e-09");
}

TEST_CASE("prior files") {
    const auto p = io::prior_from_json(json::parse(R"({"atoms":[{"w":0.5,"weight":0.4},{"w":2,"weight":0.6}],"c":3})"));
    CHECK(p.atoms().size() == 2);
    CHECK(p.support_bound() == 3.0);
    CHECK(io::prior_from_json(json::parse(R"({"d":1.2})")).atoms()[0].w == 1.2);
    CHECK_THROWS_AS(io::prior_from_json(json::parse(R"({"atoms":[{"w":1}]})")), io::FormatError);
    CHECK_THROWS_AS(io::prior_from_json(json::parse(R"({"atoms":[{"w":1,"weight":0.3}]})")), ConfigError);
}

TEST_CASE("strategy table round trip through CSV and metadata") {
    TempDir tmp;
    DpConfig cfg;
    cfg.epsilon = 0.1;
    cfg.prior = SymmetricPrior::two_point(1.4);
    cfg.grid = UGrid(3.0, 0.02);
    const auto s = solve_invariant(cfg).strategy;
    const auto path = tmp.file("s.csv");
    io::save_strategy(path, s, cfg.prior);
    CHECK(fs::exists(io::metadata_path(path)));
    CHECK_FALSE(fs::exists(path + ".tmp"));
    const auto back = io::load_strategy(path);
    CHECK(back == s);
    const auto meta = json::parse(slurp(io::metadata_path(path)));
    CHECK(meta.at("format_version") == 1);
    CHECK(meta.at("packets") == 10);
    CHECK(meta.at("tie_break") == "arm1");
}

TEST_CASE("malformed strategy files report line and field") {
    StrategyTable t(Lattice(4), UGrid(0.5, 0.25));
    const auto meta = io::strategy_metadata(t, SymmetricPrior::two_point(1.0));
    std::ostringstream good;
    io::write_strategy_csv(t, good);

    auto parse = [&](const std::string& text) {
        std::istringstream in(text);
        return io::read_strategy_csv(in, meta);
    };
    CHECK_NOTHROW(parse(good.str()));

    auto expect_error = [&](const std::string& text, const std::string& fragment) {
        try {
            parse(text);
            FAIL("no error for: " << fragment);
        } catch (const io::FormatError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
        }
    };
    std::string bad = good.str();
    bad.replace(bad.find("1,1,0,1"), 7, "1,1,0,3");
    expect_error(bad, "line 2, field 'action'");
    bad = good.str();
    bad.replace(bad.find("1,1,1,1"), 7, "1,1,x,1");
    expect_error(bad, "line 3, field 'u_index'");
    expect_error("k1,k2,u_index,action\n1,1,0,1\n", "rows, expected");
    expect_error("k1,k2,action\n", "line 1, field 'header'");
    expect_error("k1,k2,u_index,action\n1,1,0\n", "line 2");
    expect_error("k1,k2,u_index,action\n3,1,0,1\n", "not a decision state");
    auto meta2 = meta;
    meta2["format_version"] = 2;
    std::istringstream in(good.str());
    CHECK_THROWS_AS(io::read_strategy_csv(in, meta2), io::FormatError);
}

TEST_CASE("cli solve: two packets cost exactly d") {
    const auto r = run_tool({"solve", "--epsilon", "0.5", "--d", "1.0"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("bayes_risk").get<double>() == 1.0);
    CHECK(j.at("bayes_risk_no_initial").get<double>() == 0.0);
}

TEST_CASE("cli solve: negligible gap") {
    const auto r = run_tool({"solve", "--epsilon", "0.1", "--d", "1e-6", "--du", "0.02"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out).at("bayes_risk").get<double>() < 1e-5);
}

TEST_CASE("cli validation failures exit with 2 and write nothing") {
    TempDir tmp;
    const auto out = tmp.file("o.json");
    auto r = run_tool({"solve", "--epsilon", "0.03", "--out", out});
    CHECK(r.code == 2);
    CHECK(r.err.find("1/epsilon") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
    r = run_tool({"pde", "--du", "0.023", "--out", out});
    CHECK(r.code == 2);
    CHECK_FALSE(fs::exists(out));
    r = run_tool({"simulate", "--p", "1.5", "--out", out});
    CHECK(r.code == 2);
    CHECK_FALSE(fs::exists(out));
    CHECK(run_tool({"solve", "--bogus"}).code == 2);
    CHECK(run_tool({}).code == 2);
    CHECK(run_tool({"search", "--backend", "mc"}).code == 2);
}

TEST_CASE("config file provides defaults, flags override") {
    TempDir tmp;
    const auto cfg = tmp.file("c.json");
    spit(cfg, R"({"solve": {"epsilon": 0.5, "d": 0.7}})");
    auto r = run_tool({"--config", cfg, "solve"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out).at("bayes_risk").get<double>() == doctest::Approx(0.7));
    r = run_tool({"--config", cfg, "solve", "--d", "0.9"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out).at("bayes_risk").get<double>() == doctest::Approx(0.9));
    spit(cfg, R"({"solve": {"epsilon": "x"}})");
    CHECK(run_tool({"--config", cfg, "solve"}).code == 2);
    spit(cfg, "{not json");
    CHECK(run_tool({"--config", cfg, "solve"}).code == 2);
}

TEST_CASE("exported strategy reproduces the in-process simulation") {
    TempDir tmp;
    const auto csv = tmp.file("frozen.csv");
    auto r = run_tool({"export-strategy", "--epsilon", "0.02", "--d", "1.6", "--out", csv});
    REQUIRE(r.code == 0);
    const auto file_run = run_tool({"simulate", "--strategy", csv, "--reps", "2000", "--seed", "3", "--d", "0.8"});
    const auto mem_run = run_tool({"simulate", "--strategy-d", "1.6", "--reps", "2000", "--seed", "3", "--d", "0.8"});
    REQUIRE(file_run.code == 0);
    REQUIRE(mem_run.code == 0);
    CHECK(json::parse(file_run.out).at("mean") == json::parse(mem_run.out).at("mean"));

    // the library agrees with the tool
    BatchTrialConfig cfg;
    cfg.d = 0.8;
    cfg.replications = 2000;
    cfg.seed = 3;
    const auto lib = simulate_bernoulli(cfg, io::load_strategy(csv));
    CHECK(json::parse(file_run.out).at("mean").get<double>() == io::round6(lib.normalized_loss_mean));
}

TEST_CASE("malformed strategy file through the tool") {
    TempDir tmp;
    const auto csv = tmp.file("s.csv");
    REQUIRE(run_tool({"export-strategy", "--epsilon", "0.25", "--d", "1.0", "--u-max", "1", "--du", "0.25", "--out", csv}).code == 0);
    std::string text = slurp(csv);
    text.replace(text.rfind(",1\n") == std::string::npos ? text.rfind(",2\n") : text.rfind(",1\n"), 3, ",7\n");
    spit(csv, text);
    const auto r = run_tool({"simulate", "--t", "400", "--m", "100", "--strategy", csv, "--reps", "10"});
    CHECK(r.code == 2);
    CHECK(r.err.find("field 'action'") != std::string::npos);
    fs::remove(io::metadata_path(csv));
    CHECK(run_tool({"simulate", "--t", "400", "--m", "100", "--strategy", csv, "--reps", "10"}).code == 2);
}

TEST_CASE("figure CSV is deterministic and well formed") {
    TempDir tmp;
    const auto a = tmp.file("a.csv");
    const auto b = tmp.file("b.csv");
    const std::vector<std::string> args{"figure1", "--epsilon", "0.1", "--du", "0.02", "--d-min", "0.5",
                                        "--d-max", "3", "--step", "0.5", "--d-star", "1.5"};
    auto with_out = [&](const std::string& path) {
        auto v = args;
        v.push_back("--out");
        v.push_back(path);
        return v;
    };
    REQUIRE(run_tool(with_out(a)).code == 0);
    REQUIRE(run_tool(with_out(b)).code == 0);
    const auto text = slurp(a);
    CHECK(text == slurp(b));
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "d,bayes_risk,expected_loss,bayes_risk_no_init,expected_loss_no_init");
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
    }
    CHECK(rows == 6);
}

TEST_CASE("search and pde commands emit JSON summaries") {
    auto r = run_tool({"search", "--epsilon", "0.1", "--du", "0.02", "--d-min", "1", "--d-max", "2", "--step", "0.5"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("backend") == "dp");
    CHECK(j.at("curve").size() == 3);
    r = run_tool({"pde", "--epsilon", "0.01", "--du", "0.1", "--u-max", "3", "--d", "1.5"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out).at("limit_risk").get<double>() > 0.5);
}
