#include "doctest.h"

#include "tubeflow/error.hpp"
#include "tubeflow/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tubeflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ConfigError config_error(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("config accepted: " << text);
    return ConfigError("unreachable");
}

const char* kMinimal = "[space]\nname = \"RH3/RH1\"\n[base]\nrb = 1.0\n[init]\nr0 = 0.5\n";

} // namespace

TEST_CASE("defaults of a minimal config")
{
    const auto cfg = parse_config(kMinimal);
    CHECK(cfg.n == 200);
    CHECK(cfg.flow.cfl == 0.2);
    CHECK(cfg.flow.scheme == Scheme::Rk4);
    CHECK(cfg.flow.lap == LapMode::Paper61);
    CHECK(cfg.flow.sign == SignMode::Eq250);
    CHECK(cfg.space_name == "RH3/RH1");
    CHECK(cfg.amplitude == 0.0);
    CHECK(cfg.density == cfg.flow.space.mH);
}

TEST_CASE("config errors name the key and line")
{
    auto e = config_error("[space]\nname = \"RH3/RH1\"\n[base]\nrb = 1.0\n[init]\nr0 = 0.5\namplitude = 0.5\n");
    CHECK(std::string(e.what()).find("init amplitude") != std::string::npos);
    CHECK(e.key() == "amplitude");
    CHECK(e.line() == 7);

    e = config_error("[space]\nname = \"S3/S1\"\n[base]\nrb = 0.5\n[init]\nr0 = 1.5\namplitude = 0.1\n");
    CHECK(std::string(e.what()).find("focal radius") != std::string::npos);

    e = config_error(std::string(kMinimal) + "[solver]\nbogus = 1\n");
    CHECK(e.key() == "bogus");
    CHECK(e.line() == 8);

    e = config_error(std::string(kMinimal) + "[extra]\nx = 1\n");
    CHECK(e.key() == "extra");

    e = config_error("[space\nname = x\n");
    CHECK(e.line() == 1);

    e = config_error(std::string(kMinimal) + "[solver]\nlap = spectral\n");
    CHECK(e.key() == "lap");

    e = config_error(std::string(kMinimal) + "[solver]\ncfl = abc\n");
    CHECK(e.key() == "cfl");

    e = config_error("[space]\nname = \"SU(3) meridian\"\n[base]\nrb = 1.0\n[init]\nr0 = 0.5\n");
    CHECK(e.key() == "name");

    e = config_error("[space]\nname = \"RH3/RH1\"\n[init]\nr0 = 0.5\n");
    CHECK(e.key() == "rb");
}

TEST_CASE("explicit space parameters")
{
    const auto cfg = parse_config(
        "[space]\nepsilon = -1\nb = 1\nmv2 = 1\nmh = \"1:2\"\n[base]\nrb = 0.25\ndensity = 2\n"
        "[init]\nkind = const\nr0 = 0.5\n[solver]\nlap = full\nsign = eq34\nscheme = euler\n");
    CHECK(cfg.space_name.empty());
    CHECK(cfg.flow.space.mV[1] == 1);
    CHECK(cfg.flow.space.horizontal_dim() == 2);
    CHECK(cfg.density.size() == 1);
    CHECK(cfg.init_kind == InitKind::Const);
    CHECK(cfg.flow.lap == LapMode::Full);
    CHECK(cfg.flow.sign == SignMode::Eq34);
    CHECK(cfg.flow.scheme == Scheme::Euler);
}

TEST_CASE("run artifacts")
{
    const fs::path dir = fs::temp_directory_path() / "tubeflow_test_run";
    fs::remove_all(dir);
    const auto cfg = parse_config("[space]\nname = \"RH3/RH1\"\n[base]\nrb = 1.0\n[init]\nkind = const\nr0 = 0.5\n"
                       "[solver]\nn = 32\n");
    const auto art = cmd_run(cfg, dir);
    CHECK(art.exit_code == 0);
    CHECK(art.summary["outcome"] == "converged_cmc");
    CHECK(art.summary["vol_d_drift"].get<double>() == 0.0);
    REQUIRE(art.summary["audits"].size() == 3);
    CHECK(art.summary["audits"][0]["which"] == "id416");
    const auto csv = slurp(dir / "timeseries.csv");
    CHECK(csv.rfind("t,r_min,r_max,hbar,vol_d,vol_m,vhat_max,bound63_ok,bound65_ok,vhat_bound_ok\n", 0) == 0);
    const auto json = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(json.contains("bounds"));
    CHECK(json["bounds"]["r_f"].is_null());
    CHECK(json["final_profile"]["r"].size() == 33);
    fs::remove_all(dir);
}

TEST_CASE("identical configs give identical artifacts")
{
    const auto cfg = parse_config("[space]\nname = \"CH2/CH1\"\n[base]\nrb = 0.5\n[init]\nr0 = 0.5\namplitude = 0.1\n"
                                  "[solver]\nn = 32\n[stop]\nt_max = 0.002\n[output]\nstride = 5\n");
    const auto a = cmd_run(cfg, {});
    const auto b = cmd_run(cfg, {});
    CHECK(a.summary.dump() == b.summary.dump());
    CHECK(timeseries_csv(a.result.series) == timeseries_csv(b.result.series));
}

TEST_CASE("exit codes")
{
    RunResult r;
    r.series.resize(2);
    CHECK(exit_code(r) == 0);
    r.series[1].bound65_ok = false;
    CHECK(exit_code(r) == 3);
    r.outcome = FlowOutcome::NumericalFailure;
    CHECK(exit_code(r) == 2);
}

TEST_CASE("sweep grid and cells")
{
    const auto g = parse_grid("r0=0.3,0.5;amplitude=0.01,0.05,0.1");
    REQUIRE(g.size() == 2);
    CHECK(g[1].values.size() == 3);
    CHECK_THROWS_AS(parse_grid("n=1,2"), ConfigError);
    CHECK_THROWS_AS(parse_grid("r0=a"), ConfigError);

    const auto cfg = parse_config("[space]\nname = \"RH3/RH1\"\n[base]\nrb = 1.0\n[init]\nr0 = 0.5\n"
                                  "[solver]\nn = 16\n[stop]\nt_max = 0.001\n");
    const auto res = cmd_sweep(cfg, parse_grid("r0=0.3,0.5;amplitude=0.01,0.4"), {}, 2);
    REQUIRE(res.cells.size() == 4);
    CHECK(res.cells[1].name == "cell_0_1");
    CHECK(res.cells[1].outcome == "error");
    CHECK(res.cells[2].outcome != "error");
    CHECK(res.exit_code == 2);
}

TEST_CASE("bounds subcommand keys")
{
    const auto cfg = parse_config("[space]\nname = \"CH2/CH1\"\n[base]\nrb = 0.25\n[init]\nkind = const\nr0 = 0.5\n");
    const auto j = cmd_bounds(cfg);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"r_f", "r_hat1", "r_hat2", "a_rb", "prop63_bound", "c_prime", "hbar_lower",
                                           "k1", "k2", "vhat_bound", "thmc_lhs", "thmc_rhs", "thmc_satisfied"});
    CHECK(j["thmc_satisfied"] == true);
}

TEST_CASE("catalog csv")
{
    const auto csv = cmd_catalog();
    CHECK(csv.rfind("name,epsilon,b_default,mv1,mv2,mh,k0\n", 0) == 0);
    CHECK(csv.find("CH2/CH1,-1,1,0,1,2,1\n") != std::string::npos);
}
