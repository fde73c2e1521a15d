#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "brw/experiment.hpp"

using namespace brw;

namespace {

const char* kSmallCfg = R"(
# small smoke experiment
law = discrete-binary
n_list = 2,4,6,8
trials = 400
seed = 42
mode = exact
statistic = w
summary = median
conditioning = survived
)";

} // namespace

TEST_CASE("config parsing and validation")
{
    auto cfg = parse_config(kSmallCfg);
    CHECK(cfg.law_name == "discrete-binary");
    CHECK(cfg.n_list == std::vector<int>{2, 4, 6, 8});
    CHECK(cfg.trials == 400);
    CHECK(cfg.seed == 42);
    CHECK(cfg.statistic == "w");
    cfg.validate();

    CHECK_THROWS_AS(parse_config("law discrete-binary"), ConfigError);
    CHECK_THROWS_AS(parse_config("unknown_key = 3"), ConfigError);
    CHECK_THROWS_AS(parse_config("trials = many"), ConfigError);

    auto bad = cfg;
    bad.n_list = {8, 4};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.trials = 50;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.summary = "quantile";
    bad.quantile_p = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.statistic = "free_energy";
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // min position under pruning is biased for laws that can step down
    bad = cfg;
    bad.statistic = "min_v";
    bad.mode_name = "prune";
    bad.prune_delta = 30.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.allow_biased_min = true;
    CHECK_NOTHROW(bad.validate());

    // hash is stable and ignores comments/ordering noise
    auto cfg2 = parse_config(std::string("seed=42\n") + kSmallCfg);
    CHECK(cfg.hash() == cfg2.hash());
    cfg2.seed = 43;
    CHECK(cfg.hash() != cfg2.hash());
}

TEST_CASE("run_experiment determinism and summaries")
{
    auto cfg = parse_config(kSmallCfg);
    auto r1 = run_experiment(cfg);
    auto r2 = run_experiment(cfg);

    REQUIRE(r1.cells.size() == 4);
    for (std::size_t i = 0; i < r1.cells.size(); ++i) {
        CHECK(r1.cells[i].value == r2.cells[i].value);
        CHECK(r1.cells[i].ci_lo == r2.cells[i].ci_lo);
        CHECK(r1.cells[i].ci_hi == r2.cells[i].ci_hi);
        CHECK(r1.cells[i].ci_lo <= r1.cells[i].value);
        CHECK(r1.cells[i].value <= r1.cells[i].ci_hi);
        // binary law never goes extinct
        CHECK(r1.cells[i].used == cfg.trials);
    }
    CHECK(r1.has_regression);
    CHECK(r1.slope == r2.slope);
    CHECK(r1.slope < 0.0); // W_n decreases

    // byte-identical reports on rerun
    CHECK(report(r1, "csv") == report(r2, "csv"));
    CHECK(report(r1, "markdown") == report(r2, "markdown"));
}

TEST_CASE("survived conditioning and extinction accounting")
{
    auto cfg = parse_config(kSmallCfg);
    cfg.law_name = "gw-atoms";
    auto r = run_experiment(cfg);
    // extinction probability 1/3 in the limit: some trials must drop out
    for (const auto& c : r.cells) {
        CHECK(c.used < cfg.trials);
        CHECK(c.used > cfg.trials / 3);
    }

    // all-conditioning keeps every trial
    cfg.conditioning = "all";
    auto ra = run_experiment(cfg);
    for (const auto& c : ra.cells) CHECK(c.used == cfg.trials);
}

TEST_CASE("report round-trip and formats")
{
    auto cfg = parse_config(kSmallCfg);
    cfg.has_bounds = true;
    cfg.slope_lo = -2.0;
    cfg.slope_hi = 0.0;
    auto r = run_experiment(cfg);
    CHECK(r.bounds_pass);

    auto text = report(r, "csv");
    auto back = parse_report_csv(text);
    CHECK(back.config_hash == r.config_hash);
    REQUIRE(back.cells.size() == r.cells.size());
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        CHECK(back.cells[i].n == r.cells[i].n);
        CHECK(back.cells[i].value == r.cells[i].value); // bit-exact
        CHECK(back.cells[i].ci_lo == r.cells[i].ci_lo);
        CHECK(back.cells[i].ci_hi == r.cells[i].ci_hi);
        CHECK(back.cells[i].used == r.cells[i].used);
    }
    CHECK(back.has_regression);
    CHECK(back.slope == r.slope);
    CHECK(back.r2 == r.r2);
    CHECK(back.bounds_pass == r.bounds_pass);

    // empty result -> header-only CSV
    ExperimentResult empty;
    auto et = report(empty, "csv");
    CHECK(et.find("n,value,ci_lo,ci_hi,used") != std::string::npos);
    CHECK(et.find("regression,") == std::string::npos);

    auto md = report(r, "markdown");
    CHECK(md.find("config hash") != std::string::npos);
    CHECK(md.find("PASS") != std::string::npos);
    CHECK_THROWS_AS(report(r, "xml"), ConfigError);
}

TEST_CASE("bootstrap CI shrinks when trials quadruple")
{
    auto base = parse_config(kSmallCfg);
    base.n_list = {6};
    std::vector<double> ratios;
    for (std::uint64_t s : {1u, 2u, 3u}) {
        auto small = base;
        small.seed = s;
        small.trials = 400;
        auto big = base;
        big.seed = s;
        big.trials = 1600;
        auto rs = run_experiment(small);
        auto rb = run_experiment(big);
        double ws = rs.cells[0].ci_hi - rs.cells[0].ci_lo;
        double wb = rb.cells[0].ci_hi - rb.cells[0].ci_lo;
        ratios.push_back(wb / ws);
    }
    std::sort(ratios.begin(), ratios.end());
    CHECK(ratios[1] <= 0.7); // median over the three replicates
}

TEST_CASE("w_star and lambda_w statistics run end to end")
{
    auto cfg = parse_config(kSmallCfg);
    cfg.n_list = {2, 4, 6};
    cfg.trials = 200;
    cfg.statistic = "w_star";
    cfg.summary = "mean";
    cfg.conditioning = "all";
    auto r = run_experiment(cfg);
    for (const auto& c : r.cells) {
        // mean W* stays near the martingale value 1/2
        CHECK(c.value > 0.35);
        CHECK(c.value < 0.65);
    }

    cfg.statistic = "lambda_w";
    cfg.summary = "median";
    auto rl = run_experiment(cfg);
    for (const auto& c : rl.cells) CHECK(c.value > 0.0);
}
