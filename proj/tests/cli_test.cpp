#include "ccp/cli.hpp"
#include "ccp/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace ccp;
using namespace ccp::cli;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ccp_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const fs::path& p) {
    const auto text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

DetectConfig small_config() {
    DetectConfig c;
    c.t_wash = 30;
    c.t_train = 60;
    c.eps_train = 0.3;
    c.r_ensemble = 4;
    c.b_count = 10;
    c.seed = 7;
    return c;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("csv with and without a header") {
    const auto a = parse_csv("x,y\n1,2\n3,4.5\n");
    const auto b = parse_csv("1, 2\r\n3,4.5\n\n");
    CHECK(a == b);
    CHECK(a.length() == 2);
    CHECK(a.at(2)(1) == 4.5);
    CHECK_THROWS_AS(parse_csv("1,2\n3\n"), InputError);
    CHECK_THROWS_AS(parse_csv("a,b\n"), InputError);
    CHECK_THROWS_AS(parse_csv("1,2\nfoo,3\n"), InputError);
    CHECK_THROWS_AS(parse_csv("1,nan\n"), InputError);
}

TEST_CASE("csv round trip") {
    const auto dir = scratch("csv");
    std::mt19937_64 rng(1);
    const auto y = oracle::gaussian_series(rng, 30, 3);
    write_csv(dir / "y.csv", y);
    CHECK(read_csv(dir / "y.csv") == y);
}

TEST_CASE("config file then flags") {
    const auto dir = scratch("config");
    {
        std::ofstream out(dir / "run.cfg");
        out << "# detector settings\nt_train = 120\nt_wash = 60\neps_train = 0.08 # looser\nseed=3\n";
    }
    DetectConfig c;
    apply_settings(c, read_config_file(dir / "run.cfg"));
    CHECK(c.t_train == 120);
    CHECK(c.t_wash == std::optional<std::size_t>(60));
    CHECK(c.eps_train == 0.08);
    apply_settings(c, {{"seed", "9"}, {"t_wash", "auto"}});
    CHECK(c.seed == 9);
    CHECK_FALSE(c.t_wash.has_value());
    CHECK_THROWS_AS(apply_settings(c, {{"bogus", "1"}}), InputError);
    CHECK_THROWS_AS(apply_settings(c, {{"t_train", "-4"}}), InputError);
}

TEST_CASE("detect writes the report files deterministically") {
    const auto dir = scratch("detect");
    std::mt19937_64 rng(2);
    Matrix y = oracle::gaussian_series(rng, 200, 1).values();
    y.bottomRows(80).array() += 3.0;
    write_csv(dir / "y.csv", MultiSeries(y));

    const auto report = cmd_detect(dir / "y.csv", small_config(), dir / "a");
    (void)cmd_detect(dir / "y.csv", small_config(), dir / "b");
    for (const char* f : {"report.json", "statistic.csv", "similarity.csv", "null.csv"}) {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }

    const auto j = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
    CHECK(j["result"]["tau_hat"] == report.tau_hat());
    CHECK(j["result"]["t0"] == 90);
    CHECK(j["config"]["b_count"] == 10);
    CHECK(j["esn"]["n"].get<std::size_t>() >= 10);
    CHECK(j["provenance"]["hall"]["candidates"].size() >= 1);
    CHECK(line_count(dir / "a" / "statistic.csv") == 1 + 200 - 90 - 1);
    CHECK(line_count(dir / "a" / "similarity.csv") == 1 + 200 - 90);
    CHECK(line_count(dir / "a" / "null.csv") == 1 + 10);
    CHECK(report.tau_hat() == doctest::Approx(120).epsilon(0.05));
}

TEST_CASE("simulate resumes and evaluate summarizes") {
    const auto dir = scratch("simulate");
    SimulateOptions opts;
    opts.scenario_id = "5c";
    opts.reps = 2;
    opts.eps_train = {0.3};
    opts.seed = 3;
    opts.r_ensemble = 3;
    opts.b_count = 8;
    const auto first = cmd_simulate(opts, dir / "runs");
    CHECK(first.computed == 2);
    const auto before = slurp(dir / "runs" / record_file_name("5c", 0.3, 1));
    const auto second = cmd_simulate(opts, dir / "runs");
    CHECK(second.computed == 0);
    CHECK(second.skipped == 2);
    CHECK(slurp(dir / "runs" / record_file_name("5c", 0.3, 1)) == before);

    // a corrupt record is recomputed to the same bytes
    { std::ofstream(dir / "runs" / record_file_name("5c", 0.3, 1)) << "{"; }
    CHECK(cmd_simulate(opts, dir / "runs").computed == 1);
    CHECK(slurp(dir / "runs" / record_file_name("5c", 0.3, 1)) == before);

    opts.scenario_id = "5i";
    opts.reps = 1;
    cmd_simulate(opts, dir / "runs");

    const auto records = load_records(dir / "runs");
    CHECK(records.size() == 3);
    const auto summary = cmd_evaluate(dir / "runs", 0.05, eval::default_deltas(), dir / "tables");
    CHECK(summary.written.size() == 4);
    CHECK(line_count(dir / "tables" / "ari.csv") == 2);
    CHECK(line_count(dir / "tables" / "type1.csv") == 2);
    CHECK(line_count(dir / "tables" / "error_cdf.csv") == 1 + 101);
}

TEST_CASE("record json round trip") {
    eval::RunRecord r;
    r.scenario_id = "4b";
    r.rep = 3;
    r.eps_train = 0.08;
    r.truth = 412;
    r.tau_hat = 430;
    r.k = 0.123456789012345678;
    r.p = 0.0125;
    r.t0 = 180;
    r.t_total = 1000;
    r.seed = 18446744073709551615ULL;
    const auto back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
    CHECK(back.truth == r.truth);
    CHECK(back.k == r.k);
    CHECK(back.seed == r.seed);
    CHECK_THROWS_AS(record_from_json(nlohmann::json::object()), InputError);
}

TEST_CASE("number lists") {
    CHECK(parse_double_list("0.04,0.08") == std::vector<double>{0.04, 0.08});
    CHECK_THROWS_AS(parse_double_list("0.04,x"), InputError);
    CHECK(record_file_name("1b", 0.04, 7) == "1b_eps0.04_rep0007.json");
}

} // TEST_SUITE
