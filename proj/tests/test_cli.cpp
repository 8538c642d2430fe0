#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <expmod/cli.hpp>

using namespace expmod;

namespace {

int run(std::vector<std::string> args, const std::string& out_path = "") {
    std::vector<std::string> full{"expmod"};
    for (auto& a : args) full.push_back(std::move(a));
    if (!out_path.empty()) {
        full.push_back("--output");
        full.push_back(out_path);
    }
    std::vector<char*> argv;
    argv.reserve(full.size());
    for (auto& s : full) argv.push_back(s.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::string tmp_path(const std::string& name) { return "/tmp/expmod_cli_" + name; }

}  // namespace

TEST_CASE("correlation emits one row per distance with a pinned head") {
    auto path = tmp_path("corr.csv");
    REQUIRE(run({"correlation", "--p", "0.1", "--n-max", "12"}, path) == 0);
    auto ls = lines(slurp(path));
    REQUIRE(ls.size() == 12);  // header + n = 2..12
    CHECK(ls[0] == "n,value,mode,precision,schema");
    CHECK(ls[1] == "2,1.30208333333333333e-01,float,256,correlation.v1");
    for (std::size_t i = 1; i < ls.size(); ++i)
        CHECK(ls[i].substr(ls[i].size() - 15) == ",correlation.v1");
}

TEST_CASE("rational mode prints fractions and needs a fractional probability") {
    auto path = tmp_path("corr_rat.csv");
    REQUIRE(run({"correlation", "--p", "1/10", "--n-max", "6", "--mode", "rational"}, path) == 0);
    auto ls = lines(slurp(path));
    REQUIRE(ls.size() == 6);
    CHECK(ls[1] == "2,25/192,rational,exact,correlation.v1");
    CHECK(ls[5] == "6,223135901389515625/2034016911550005248,rational,exact,correlation.v1");

    CHECK(run({"correlation", "--p", "0.1", "--mode", "rational"}, path) == 2);
    // the exact-series horizon cap guards runaway denominators
    CHECK(run({"correlation", "--p", "1/10", "--n-max", "100", "--mode", "rational"}, path) == 2);
}

TEST_CASE("invalid configurations exit with code 2") {
    CHECK(run({"correlation"}) == 2);                                // no p
    CHECK(run({"bogus", "--p", "0.1"}) == 2);                        // unknown command
    CHECK(run({"correlation", "--p", "1.5"}) == 2);                  // out of range
    CHECK(run({"correlation", "--p", "0.1", "--n-max", "1"}) == 2);  // horizon too short
    CHECK(run({"correlation", "--p", "0.1", "--format", "tsv"}) == 2);
    CHECK(run({"correlation", "--p", "0.1", "--mode", "exact"}) == 2);
    CHECK(run({"correlation", "--p", "0.1", "--precision", "16"}) == 2);
    CHECK(run({"spectrum", "--p", "0.1", "--n-max", "100"}) == 2);   // empty frequency band
    CHECK(run({"correlation", "marginals", "--p", "0.1"}) == 2);     // stray suite positional
    CHECK(run({"verify", "everything"}) == 2);                       // unknown suite
    CHECK(run({"fit", "--p", "0.1", "--window", "50"}) == 2);        // malformed window
    CHECK(run({"fit", "--p", "0.1", "--window", "50:20"}) == 2);     // reversed window
    CHECK(run({"fit", "--p", "0.1", "--n-max", "100", "--window", "50:200"}) == 2);
    CHECK(run({"simulate", "--p", "0.1", "--n-max", "8", "--length", "5"}) == 2);
    CHECK(run({"--help"}) == 0);
}

TEST_CASE("a simulation that cannot grow fails with the numeric exit code") {
    // at p = 0.99999 the prefix virtually never reaches length 3 before the
    // round cap, which must surface as a numeric failure, not a hang
    CHECK(run({"simulate", "--p", "0.99999", "--n-max", "2", "--samples", "1"},
              tmp_path("stall.csv")) == 3);
}

TEST_CASE("stationary rows carry site words and exact masses") {
    auto path = tmp_path("stat.csv");
    REQUIRE(run({"stationary", "--p", "1/10", "--ell", "1", "--mode", "rational"}, path) == 0);
    auto ls = lines(slurp(path));
    REQUIRE(ls.size() == 5);
    CHECK(ls[1] == "1,0,00,11/24,rational,stationary.v1");
    CHECK(ls[2] == "1,1,10,1/24,rational,stationary.v1");
    CHECK(ls[3] == "1,2,01,1/24,rational,stationary.v1");
    CHECK(ls[4] == "1,3,11,11/24,rational,stationary.v1");

    REQUIRE(run({"stationary", "--p", "0.1", "--ell", "1"}, path) == 0);
    auto fl = lines(slurp(path));
    REQUIRE(fl.size() == 5);
    auto cell = [&](std::size_t row) {
        std::istringstream in(fl[row]);
        std::string field;
        for (int i = 0; i < 4; ++i) std::getline(in, field, ',');
        return std::stod(field);
    };
    CHECK(cell(1) == Catch::Approx(11.0 / 24).epsilon(1e-12));
    CHECK(cell(2) == Catch::Approx(1.0 / 24).epsilon(1e-12));

    // exact solves above the configured order cap are refused
    CHECK(run({"stationary", "--p", "1/10", "--ell", "9", "--mode", "rational"}, path) == 2);
    REQUIRE(run({"stationary", "--p", "1/10", "--ell", "9", "--mode", "rational",
                 "--rational-ell-max", "9"},
                path) == 0);
    CHECK(lines(slurp(path)).size() == 1025);
}

TEST_CASE("exponent classifies the singular probabilities") {
    auto path = tmp_path("expo.csv");
    REQUIRE(run({"exponent", "--p-grid", "0.1,0.5,0.58,2/3,0.7"}, path) == 0);
    auto ls = lines(slurp(path));
    REQUIRE(ls.size() == 6);
    CHECK(ls[1].substr(0, 4) == "0.1,");
    CHECK(ls[1].find(",valid,") != std::string::npos);
    CHECK(ls[2] == "0.5,,singular,exponent.v1");
    CHECK(ls[3] == "0.58,,singular-adjacent,exponent.v1");
    CHECK(ls[4] == "2/3,,singular,exponent.v1");
    CHECK(ls[5].find(",valid,") != std::string::npos);
}

TEST_CASE("fit reports the window actually used") {
    auto path = tmp_path("fit.csv");
    REQUIRE(run({"fit", "--p", "0.1", "--n-max", "400", "--window", "50:400"}, path) == 0);
    auto ls = lines(slurp(path));
    REQUIRE(ls.size() == 2);
    std::istringstream in(ls[1]);
    std::string p, beta, slope, residual, lo, hi, points, status;
    std::getline(in, p, ',');
    std::getline(in, beta, ',');
    std::getline(in, slope, ',');
    std::getline(in, residual, ',');
    std::getline(in, lo, ',');
    std::getline(in, hi, ',');
    std::getline(in, points, ',');
    std::getline(in, status, ',');
    CHECK(p == "0.1");
    CHECK(lo == "50");
    CHECK(hi == "400");
    CHECK(points == "351");
    CHECK(status == "valid");
    CHECK(std::stod(slope) < 0);
    CHECK(std::stod(beta) == Catch::Approx(0.52094284015).epsilon(1e-9));
}

TEST_CASE("pstar reproduces the pinned positivity threshold") {
    auto path = tmp_path("pstar.csv");
    REQUIRE(run({"pstar", "--n-max", "500"}, path) == 0);
    auto ls = lines(slurp(path));
    REQUIRE(ls.size() == 2);
    std::istringstream in(ls[1]);
    std::string value, lo, hi;
    std::getline(in, value, ',');
    std::getline(in, lo, ',');
    std::getline(in, hi, ',');
    CHECK(std::stod(value) == Catch::Approx(0.28101871).margin(1e-7));
    CHECK(std::stod(lo) <= std::stod(value));
    CHECK(std::stod(value) <= std::stod(hi));
}

TEST_CASE("json output embeds the configuration echo") {
    auto path = tmp_path("corr.json");
    REQUIRE(run({"correlation", "--p", "0.1", "--n-max", "12", "--format", "json"}, path) == 0);
    auto doc = nlohmann::json::parse(slurp(path));
    CHECK(doc["schema"] == "correlation.v1");
    CHECK(doc["config"]["p"] == "0.1");
    CHECK(doc["config"]["n-max"] == 12);
    CHECK(doc["config"]["format"] == "json");
    REQUIRE(doc["rows"].size() == 11);
    CHECK(doc["rows"][0][1] == "1.30208333333333333e-01");
    CHECK(doc["summary"]["verified-bits"] == 256);
}

TEST_CASE("config file supplies defaults and explicit flags win") {
    auto cfg_path = tmp_path("cfg.json");
    {
        std::ofstream out(cfg_path);
        out << R"({"p": "1/4", "n-max": 6, "mode": "rational", "seed": 7})";
    }
    auto path = tmp_path("cfg_out.csv");
    REQUIRE(run({"correlation", "--config", cfg_path}, path) == 0);
    auto ls = lines(slurp(path));
    REQUIRE(ls.size() == 6);
    CHECK(ls[1] == "2,1/33,rational,exact,correlation.v1");

    REQUIRE(run({"correlation", "--config", cfg_path, "--n-max", "3"}, path) == 0);
    CHECK(lines(slurp(path)).size() == 3);

    REQUIRE(run({"correlation", "--config", cfg_path, "--mode", "float", "--p", "0.1"}, path) ==
            0);
    CHECK(lines(slurp(path))[1].substr(0, 2) == "2,");
    CHECK(lines(slurp(path))[1].find("float") != std::string::npos);

    {
        std::ofstream out(cfg_path);
        out << R"({"p": "1/4", "horizon": 6})";
    }
    CHECK(run({"correlation", "--config", cfg_path}, path) == 2);
    {
        std::ofstream out(cfg_path);
        out << "not json";
    }
    CHECK(run({"correlation", "--config", cfg_path}, path) == 2);
    CHECK(run({"correlation", "--config", tmp_path("missing.json"), "--p", "0.1"}, path) == 2);
}

TEST_CASE("verify emits a json verdict with counted and informational checks") {
    auto path = tmp_path("verify.json");
    REQUIRE(run({"verify", "marginals", "--format", "csv"}, path) == 0);
    auto doc = nlohmann::json::parse(slurp(path));  // json regardless of --format
    CHECK(doc["schema"] == "verify.v1");
    CHECK(doc["ok"] == true);
    CHECK(doc["failed"] == 0);
    REQUIRE(doc["checks"].size() >= 5);
    for (const auto& c : doc["checks"]) {
        CHECK(c["suite"] == "marginals");
        CHECK(c["passed"] == true);
    }
    CHECK(doc["config"]["suite"] == "marginals");
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
    auto once = tmp_path("det1.csv"), twice = tmp_path("det2.csv");
    std::vector<std::string> sim{"simulate", "--p",       "0.25", "--n-max", "10",
                                 "--samples", "4096",     "--seed", "321"};
    setenv("EXPMOD_THREADS", "1", 1);
    REQUIRE(run(sim, once) == 0);
    setenv("EXPMOD_THREADS", "6", 1);
    REQUIRE(run(sim, twice) == 0);
    unsetenv("EXPMOD_THREADS");
    CHECK(slurp(once) == slurp(twice));
    REQUIRE(run(sim, twice) == 0);
    CHECK(slurp(once) == slurp(twice));

    std::vector<std::string> sweep{"sweep", "--p-grid", "0.1,0.2,0.3", "--n-max", "40"};
    setenv("EXPMOD_THREADS", "1", 1);
    REQUIRE(run(sweep, once) == 0);
    setenv("EXPMOD_THREADS", "5", 1);
    REQUIRE(run(sweep, twice) == 0);
    unsetenv("EXPMOD_THREADS");
    CHECK(slurp(once) == slurp(twice));
    auto ls = lines(slurp(once));
    CHECK(ls.size() == 1 + 3 * 39);
    CHECK(ls[1].substr(0, 4) == "0.1,");
    CHECK(ls[1 + 39].substr(0, 4) == "0.2,");
}

TEST_CASE("simulate rows compare the ensemble against the recurrence") {
    auto path = tmp_path("sim.json");
    REQUIRE(run({"simulate", "--p", "0.1", "--n-max", "6", "--samples", "20000", "--seed",
                 "20260814", "--format", "json"},
                path) == 0);
    auto doc = nlohmann::json::parse(slurp(path));
    REQUIRE(doc["rows"].size() == 6);
    long long inside = doc["summary"]["within-ci"].get<long long>();
    CHECK(inside >= 5);
    for (const auto& row : doc["rows"]) {
        double z = std::stod(row[4].get<std::string>());
        CHECK(std::fabs(z) < 4.0);
    }
}

TEST_CASE("spectrum summarizes the fitted band") {
    auto path = tmp_path("spec.json");
    REQUIRE(run({"spectrum", "--p", "0.1", "--n-max", "2048", "--format", "json"}, path) == 0);
    auto doc = nlohmann::json::parse(slurp(path));
    CHECK(doc["summary"]["points-used"] == 8);
    CHECK(doc["summary"]["target-exponent"].get<double>() ==
          Catch::Approx(1 - 0.52094284015).epsilon(1e-9));
    CHECK(doc["rows"].size() >= 2);
}

TEST_CASE("csv quoting follows the quoting rules") {
    Table t;
    t.schema = "demo.v1";
    t.columns = {"plain", "with,comma", "with\"quote"};
    t.rows.push_back({"a", "b,c", "d\"e"});
    t.rows.push_back({"line\nbreak", "", "plain"});
    std::ostringstream os;
    write_csv(os, t);
    auto text = os.str();
    CHECK(text == "plain,\"with,comma\",\"with\"\"quote\",schema\n"
                  "a,\"b,c\",\"d\"\"e\",demo.v1\n"
                  "\"line\nbreak\",,plain,demo.v1\n");
}
