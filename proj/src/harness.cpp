#include "tubeflow/harness.hpp"

#include "tubeflow/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace tubeflow {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(InitKind k)
{
    return k == InitKind::Const ? "const" : "cosine";
}

namespace {

const std::map<std::string, std::set<std::string>, std::less<>> kKnownKeys = {
    {"space", {"name", "epsilon", "b", "mv1", "mv2", "mh", "k0"}},
    {"base", {"rb", "density"}},
    {"init", {"kind", "r0", "amplitude"}},
    {"solver", {"n", "lap", "sign", "scheme", "cfl", "dt", "max_steps"}},
    {"stop", {"t_max", "r_stop", "tol_cmc"}},
    {"output", {"dir", "stride", "formats"}},
};

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::string unquote(std::string_view s)
{
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        s = s.substr(1, s.size() - 2);
    return std::string(s);
}

/// Line of "key = ..." inside [section], 0 if absent.
int locate(std::string_view text, std::string_view section, std::string_view key)
{
    int line_no = 0;
    std::string_view current;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        ++line_no;
        if (!line.empty() && line.front() == '[' && line.back() == ']') {
            current = trim(line.substr(1, line.size() - 2));
            if (key.empty() && current == section) return line_no;
        } else if (!key.empty() && current == section) {
            const auto eq = line.find('=');
            if (eq != std::string_view::npos && trim(line.substr(0, eq)) == key) return line_no;
        }
        pos = end + 1;
    }
    return 0;
}

class Reader {
public:
    Reader(std::string_view text, const boost::property_tree::ptree& tree) : text_(text), tree_(tree) {}

    bool has(std::string_view section, std::string_view key) const { return find(section, key) != nullptr; }

    std::string str(std::string_view section, std::string_view key, std::string fallback) const
    {
        const auto* v = find(section, key);
        return v ? unquote(*v) : fallback;
    }

    double num(std::string_view section, std::string_view key, double fallback) const
    {
        const auto* v = find(section, key);
        if (!v) return fallback;
        const auto s = unquote(*v);
        double x = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
        if (ec != std::errc{} || p != s.data() + s.size())
            fail(section, key, fmt::format("{}.{} is not a number: '{}'", section, key, s));
        return x;
    }

    long integer(std::string_view section, std::string_view key, long fallback) const
    {
        const auto* v = find(section, key);
        if (!v) return fallback;
        const auto s = unquote(*v);
        long x = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
        if (ec != std::errc{} || p != s.data() + s.size())
            fail(section, key, fmt::format("{}.{} is not an integer: '{}'", section, key, s));
        return x;
    }

    [[noreturn]] void fail(std::string_view section, std::string_view key, const std::string& what) const
    {
        throw ConfigError(what, std::string(key), locate(text_, section, key));
    }

private:
    const std::string* find(std::string_view section, std::string_view key) const
    {
        const auto sec = tree_.find(std::string(section));
        if (sec == tree_.not_found()) return nullptr;
        const auto it = sec->second.find(std::string(key));
        if (it == sec->second.not_found()) return nullptr;
        return &it->second.data();
    }

    std::string_view text_;
    const boost::property_tree::ptree& tree_;
};

/// "2" means {1:2}; otherwise a comma list of k:m pairs.
Multiplicities parse_multiplicities(std::string_view s)
{
    Multiplicities out;
    std::string_view rest = trim(s);
    if (rest.empty()) throw RangeError("empty multiplicity list");
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        RootMultiplicity rm;
        std::string_view mpart = item;
        if (const auto colon = item.find(':'); colon != std::string_view::npos) {
            const auto kpart = trim(item.substr(0, colon));
            mpart = trim(item.substr(colon + 1));
            const auto [p, ec] = std::from_chars(kpart.data(), kpart.data() + kpart.size(), rm.k);
            if (ec != std::errc{} || p != kpart.data() + kpart.size())
                throw RangeError(fmt::format("bad root index '{}'", kpart));
        }
        const auto [p, ec] = std::from_chars(mpart.data(), mpart.data() + mpart.size(), rm.m);
        if (ec != std::errc{} || p != mpart.data() + mpart.size() || rm.m < 0)
            throw RangeError(fmt::format("bad multiplicity '{}'", mpart));
        out.push_back(rm);
    }
    return out;
}

std::string format_multiplicities(const Multiplicities& m)
{
    std::string out;
    for (const auto& rm : m) {
        if (!out.empty()) out += ',';
        out += fmt::format("{}:{}", rm.k, rm.m);
    }
    return out;
}

} // namespace

void RunConfig::validate() const
{
    try {
        flow.space.validate();
    } catch (const RangeError& e) {
        throw ConfigError(std::string("space: ") + e.what(), "space");
    }
    flow.validate();
    if (!(rb > 0.0) || !std::isfinite(rb)) throw ConfigError("base rb must be positive", "rb");
    if (flow.space.compact()) {
        const double cap = std::numbers::pi / (2.0 * flow.space.b);
        if (rb >= cap) throw ConfigError(fmt::format("base rb must stay below {} for the compact type", cap), "rb");
    }
    for (const auto& rm : density)
        if (!(rm.k > 0.0) || rm.m < 0) throw ConfigError("base density multiplicities must be k > 0, m >= 0", "density");
    if (n < 8) throw ConfigError("solver n must be at least 8", "n");
    if (!(r0 > 0.0) || !std::isfinite(r0)) throw ConfigError("init r0 must be positive", "r0");
    if (!std::isfinite(amplitude)) throw ConfigError("init amplitude must be finite", "amplitude");
    if (init_kind == InitKind::Const && amplitude != 0.0)
        throw ConfigError("init amplitude must be 0 for kind = const", "amplitude");
    if (std::abs(amplitude) >= r0)
        throw ConfigError(fmt::format("init amplitude |{}| must be smaller than init r0 = {}", amplitude, r0),
                          "amplitude");
    const double rF = focal_radius(flow.space);
    if (r0 + std::abs(amplitude) >= rF)
        throw ConfigError(fmt::format("init r0 + |amplitude| = {} must stay below the focal radius r_F = {}",
                                      r0 + std::abs(amplitude), rF),
                          "r0");
    if (!write_csv && !write_json) throw ConfigError("output formats must name csv, json or both", "formats");
}

RunConfig parse_config(std::string_view text)
{
    boost::property_tree::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("parse error: " + e.message(), {},
                          static_cast<int>(e.line()));
    }

    for (const auto& [section, body] : tree) {
        const auto known = kKnownKeys.find(section);
        if (known == kKnownKeys.end()) {
            if (body.empty())
                throw ConfigError(fmt::format("key '{}' outside of any section", section), section,
                                  locate(text, "", section));
            throw ConfigError(fmt::format("unknown section [{}]", section), section, locate(text, section, ""));
        }
        for (const auto& kv : body)
            if (!known->second.contains(kv.first))
                throw ConfigError(fmt::format("unknown key {}.{}", section, kv.first), kv.first,
                                  locate(text, section, kv.first));
    }

    const Reader rd(text, tree);
    RunConfig cfg;

    // Space: catalog entry, optionally overridden field by field.
    SpaceParams& sp = cfg.flow.space;
    Multiplicities catalog_density;
    if (rd.has("space", "name")) {
        cfg.space_name = rd.str("space", "name", "");
        const CatalogEntry* entry = nullptr;
        try {
            entry = &catalog_lookup(cfg.space_name);
        } catch (const RangeError& e) {
            rd.fail("space", "name", e.what());
        }
        if (entry->informational)
            rd.fail("space", "name",
                    fmt::format("catalog entry '{}' lists names only and cannot be simulated", cfg.space_name));
        sp = entry->params;
        catalog_density = entry->density;
    } else {
        if (!rd.has("space", "epsilon") || !rd.has("space", "mh"))
            rd.fail("space", "name", "space needs a catalog name or explicit epsilon and mh");
    }
    sp.epsilon = static_cast<int>(rd.integer("space", "epsilon", sp.epsilon));
    if (sp.epsilon != 1 && sp.epsilon != -1) rd.fail("space", "epsilon", "space epsilon must be +1 or -1");
    sp.b = rd.num("space", "b", sp.b);
    sp.mV[0] = static_cast<int>(rd.integer("space", "mv1", sp.mV[0]));
    sp.mV[1] = static_cast<int>(rd.integer("space", "mv2", sp.mV[1]));
    sp.k0 = rd.num("space", "k0", sp.k0);
    if (rd.has("space", "mh")) {
        try {
            sp.mH = parse_multiplicities(rd.str("space", "mh", ""));
        } catch (const RangeError& e) {
            rd.fail("space", "mh", std::string("space mh: ") + e.what());
        }
        catalog_density.clear();
    }

    if (!rd.has("base", "rb")) rd.fail("base", "rb", "base rb is required");
    cfg.rb = rd.num("base", "rb", 0.0);
    if (rd.has("base", "density")) {
        try {
            cfg.density = parse_multiplicities(rd.str("base", "density", ""));
        } catch (const RangeError& e) {
            rd.fail("base", "density", std::string("base density: ") + e.what());
        }
    } else {
        cfg.density = catalog_density.empty() ? sp.mH : catalog_density;
    }

    const auto kind = rd.str("init", "kind", "cosine");
    if (kind == "const")
        cfg.init_kind = InitKind::Const;
    else if (kind == "cosine")
        cfg.init_kind = InitKind::Cosine;
    else
        rd.fail("init", "kind", fmt::format("init kind must be const or cosine, got '{}'", kind));
    if (!rd.has("init", "r0")) rd.fail("init", "r0", "init r0 is required");
    cfg.r0 = rd.num("init", "r0", 0.0);
    cfg.amplitude = rd.num("init", "amplitude", 0.0);

    FlowConfig& fc = cfg.flow;
    cfg.n = static_cast<int>(rd.integer("solver", "n", cfg.n));
    try {
        fc.lap = lap_mode_from_string(rd.str("solver", "lap", std::string(to_string(fc.lap))));
    } catch (const Error& e) {
        rd.fail("solver", "lap", e.what());
    }
    try {
        fc.sign = sign_mode_from_string(rd.str("solver", "sign", std::string(to_string(fc.sign))));
    } catch (const Error& e) {
        rd.fail("solver", "sign", e.what());
    }
    try {
        fc.scheme = scheme_from_string(rd.str("solver", "scheme", std::string(to_string(fc.scheme))));
    } catch (const Error& e) {
        rd.fail("solver", "scheme", e.what());
    }
    fc.cfl = rd.num("solver", "cfl", fc.cfl);
    fc.dt = rd.num("solver", "dt", fc.dt);
    fc.max_steps = rd.integer("solver", "max_steps", fc.max_steps);
    fc.t_max = rd.num("stop", "t_max", fc.t_max);
    fc.r_stop = rd.num("stop", "r_stop", fc.r_stop);
    fc.tol_cmc = rd.num("stop", "tol_cmc", fc.tol_cmc);

    cfg.out_dir = rd.str("output", "dir", cfg.out_dir);
    fc.stride = static_cast<int>(rd.integer("output", "stride", 100));
    if (rd.has("output", "formats")) {
        cfg.write_csv = cfg.write_json = false;
        std::string_view rest = rd.str("output", "formats", "");
        const std::string all(rest);
        rest = all;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = trim(rest.substr(0, comma));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            if (item == "csv")
                cfg.write_csv = true;
            else if (item == "json")
                cfg.write_json = true;
            else
                rd.fail("output", "formats", fmt::format("unknown output format '{}'", item));
        }
    }

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        const std::map<std::string, std::string, std::less<>> section_of = {
            {"rb", "base"},      {"density", "base"},  {"n", "solver"},     {"r0", "init"},
            {"amplitude", "init"}, {"formats", "output"}, {"cfl", "solver"}, {"dt", "solver"},
            {"t_max", "stop"},   {"r_stop", "stop"},   {"tol_cmc", "stop"}, {"stride", "output"},
        };
        const auto it = section_of.find(e.key());
        const int line = it == section_of.end() ? 0 : locate(text, it->second, e.key());
        throw ConfigError(e.what(), e.key(), line);
    }
    return cfg;
}

RunConfig load_config(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open config file '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RadialProfile initial_profile(const RunConfig& cfg)
{
    auto grid = make_base_grid(cfg.flow.space, cfg.rb, cfg.n, cfg.density);
    if (cfg.init_kind == InitKind::Const) return constant_profile(std::move(grid), cfg.r0);
    return cosine_profile(std::move(grid), cfg.r0, cfg.amplitude);
}

void write_timeseries_csv(std::ostream& os, const TimeSeries& series)
{
    os << "t,r_min,r_max,hbar,vol_d,vol_m,vhat_max,bound63_ok,bound65_ok,vhat_bound_ok\n";
    const auto b = [](bool v) { return v ? "true" : "false"; };
    for (const auto& r : series)
        os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.t, r.r_min, r.r_max, r.hbar, r.vol_d, r.vol_m,
                          r.vhat_max, b(r.bound63_ok), b(r.bound65_ok), b(r.vhat_bound_ok));
}

std::string timeseries_csv(const TimeSeries& series)
{
    std::ostringstream os;
    write_timeseries_csv(os, series);
    return os.str();
}

json bounds_json(const BoundsReport& r)
{
    json j;
    if (std::isfinite(r.rF))
        j["r_f"] = r.rF;
    else
        j["r_f"] = nullptr;
    j["r_hat1"] = r.rHat1;
    j["r_hat2"] = r.rHat2;
    j["a_rb"] = r.aRB;
    j["prop63_bound"] = r.prop63Bound;
    j["c_prime"] = r.cPrimeOfA;
    j["hbar_lower"] = r.hbarLower;
    j["k1"] = r.K1;
    j["k2"] = r.K2;
    j["vhat_bound"] = r.vhatBound;
    j["thmc_lhs"] = r.thmCLHS;
    j["thmc_rhs"] = r.thmCRHS;
    j["thmc_satisfied"] = r.thmCSatisfied;
    return j;
}

json audits_json(const std::vector<ResidualReport>& audits)
{
    json a = json::array();
    for (const auto& r : audits)
        a.push_back({{"which", std::string(to_string(r.which))}, {"n", r.n}, {"dt", r.dt}, {"sup", r.sup}, {"l2", r.l2}});
    return a;
}

json config_json(const RunConfig& cfg)
{
    const auto& sp = cfg.flow.space;
    json space;
    if (!cfg.space_name.empty()) space["name"] = cfg.space_name;
    space["epsilon"] = sp.epsilon;
    space["b"] = sp.b;
    space["mv1"] = sp.mV[0];
    space["mv2"] = sp.mV[1];
    space["mh"] = format_multiplicities(sp.mH);
    space["k0"] = sp.k0;
    return {
        {"space", space},
        {"base", {{"rb", cfg.rb}, {"density", format_multiplicities(cfg.density)}}},
        {"init", {{"kind", std::string(to_string(cfg.init_kind))}, {"r0", cfg.r0}, {"amplitude", cfg.amplitude}}},
        {"solver",
         {{"n", cfg.n},
          {"lap", std::string(to_string(cfg.flow.lap))},
          {"sign", std::string(to_string(cfg.flow.sign))},
          {"scheme", std::string(to_string(cfg.flow.scheme))},
          {"cfl", cfg.flow.cfl},
          {"dt", cfg.flow.dt},
          {"max_steps", cfg.flow.max_steps}}},
        {"stop", {{"t_max", cfg.flow.t_max}, {"r_stop", cfg.flow.r_stop}, {"tol_cmc", cfg.flow.tol_cmc}}},
        {"output", {{"stride", cfg.flow.stride}}},
    };
}

int exit_code(const RunResult& result)
{
    if (result.outcome == FlowOutcome::NumericalFailure) return 2;
    for (const auto& row : result.series)
        if (!row.bound63_ok || !row.bound65_ok || !row.vhat_bound_ok) return 3;
    return 0;
}

namespace {

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << content;
    if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

json profile_json(const RadialProfile& p)
{
    return {{"z", p.grid->z}, {"r", p.r}};
}

} // namespace

RunArtifacts cmd_run(const RunConfig& cfg, const fs::path& dir)
{
    cfg.validate();
    RunArtifacts art;
    const auto initial = initial_profile(cfg);
    art.result = run(cfg.flow, initial);
    try {
        art.audits = run_audits(cfg.flow, initial);
    } catch (const Error& e) {
        art.audit_error = e.what();
    }
    art.exit_code = exit_code(art.result);

    const auto& res = art.result;
    bool b63 = true, b65 = true, bv = true;
    for (const auto& row : res.series) {
        b63 = b63 && row.bound63_ok;
        b65 = b65 && row.bound65_ok;
        bv = bv && row.vhat_bound_ok;
    }
    auto& s = art.summary;
    s["outcome"] = std::string(to_string(res.outcome));
    s["exit_code"] = art.exit_code;
    s["message"] = res.message;
    s["t_final"] = res.final_state.t;
    s["steps"] = res.steps;
    s["r_stop"] = res.r_stop;
    s["vol_d_initial"] = res.bounds.volD0;
    s["vol_d_final"] = res.final_state.volD;
    s["vol_d_drift"] = res.max_vol_d_drift;
    s["vol_m_initial"] = res.bounds.volM0;
    s["vol_m_final"] = res.final_state.volM;
    s["area_monotone"] = res.area_monotone;
    s["bound63_ok"] = b63;
    s["bound65_ok"] = b65;
    s["vhat_bound_ok"] = bv;
    s["endpoints_ok"] = res.endpoints_ok;
    s["bounds"] = bounds_json(res.bounds);
    s["audits"] = audits_json(art.audits);
    if (!art.audit_error.empty()) s["audit_error"] = art.audit_error;
    s["final_profile"] = profile_json(res.final_state.profile);
    s["config"] = config_json(cfg);

    if (!dir.empty()) {
        fs::create_directories(dir);
        if (cfg.write_csv) write_file(dir / "timeseries.csv", timeseries_csv(res.series));
        if (cfg.write_json) write_file(dir / "summary.json", s.dump(2) + "\n");
    }
    return art;
}

std::vector<GridAxis> parse_grid(std::string_view spec)
{
    std::vector<GridAxis> axes;
    std::string_view rest = trim(spec);
    while (!rest.empty()) {
        const auto semi = rest.find(';');
        const auto item = trim(rest.substr(0, semi));
        rest = semi == std::string_view::npos ? std::string_view{} : trim(rest.substr(semi + 1));
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ConfigError(fmt::format("grid axis '{}' lacks '='", item), "grid");
        GridAxis axis;
        axis.key = std::string(trim(item.substr(0, eq)));
        if (axis.key != "r0" && axis.key != "amplitude" && axis.key != "rb")
            throw ConfigError(fmt::format("grid axis must be r0, amplitude or rb, got '{}'", axis.key), "grid");
        for (const auto& a : axes)
            if (a.key == axis.key) throw ConfigError(fmt::format("grid axis '{}' repeated", axis.key), "grid");
        std::string_view vals = item.substr(eq + 1);
        while (!vals.empty()) {
            const auto comma = vals.find(',');
            const auto v = trim(vals.substr(0, comma));
            vals = comma == std::string_view::npos ? std::string_view{} : vals.substr(comma + 1);
            double x = 0.0;
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (v.empty() || ec != std::errc{} || p != v.data() + v.size())
                throw ConfigError(fmt::format("grid value '{}' is not a number", v), "grid");
            axis.values.push_back(x);
        }
        if (axis.values.empty()) throw ConfigError(fmt::format("grid axis '{}' has no values", axis.key), "grid");
        axes.push_back(std::move(axis));
    }
    if (axes.empty()) throw ConfigError("empty grid", "grid");
    return axes;
}

unsigned sweep_threads()
{
    if (const char* env = std::getenv("TUBEFLOW_THREADS")) {
        unsigned v = 0;
        const std::string_view s(env);
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && p == s.data() + s.size() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult cmd_sweep(const RunConfig& base, const std::vector<GridAxis>& grid, const fs::path& dir,
                      unsigned threads)
{
    SweepResult out;
    std::size_t total = 1;
    for (const auto& a : grid) total *= a.values.size();
    out.cells.resize(total);
    for (std::size_t c = 0; c < total; ++c) {
        auto& cell = out.cells[c];
        std::size_t rem = c;
        cell.index.assign(grid.size(), 0);
        for (std::size_t k = grid.size(); k-- > 0;) {
            cell.index[k] = rem % grid[k].values.size();
            rem /= grid[k].values.size();
        }
        cell.name = "cell";
        for (std::size_t k = 0; k < grid.size(); ++k) {
            cell.name += fmt::format("_{}", cell.index[k]);
            cell.values.push_back(grid[k].values[cell.index[k]]);
        }
    }

    auto work = [&](SweepCell& cell) {
        try {
            RunConfig cfg = base;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                if (grid[k].key == "r0") cfg.r0 = cell.values[k];
                if (grid[k].key == "amplitude") cfg.amplitude = cell.values[k];
                if (grid[k].key == "rb") cfg.rb = cell.values[k];
            }
            if (cfg.amplitude != 0.0 && cfg.init_kind == InitKind::Const) cfg.init_kind = InitKind::Cosine;
            const auto art = cmd_run(cfg, dir.empty() ? fs::path{} : dir / cell.name);
            const auto& s = art.summary;
            cell.outcome = s["outcome"].get<std::string>();
            cell.exit_code = art.exit_code;
            cell.bound63_ok = s["bound63_ok"].get<bool>();
            cell.bound65_ok = s["bound65_ok"].get<bool>();
            cell.vhat_bound_ok = s["vhat_bound_ok"].get<bool>();
            cell.area_monotone = art.result.area_monotone;
            cell.thmc_satisfied = art.result.bounds.thmCSatisfied;
            cell.max_vol_d_drift = art.result.max_vol_d_drift;
            cell.t_final = art.result.final_state.t;
            cell.message = art.result.message;
        } catch (const std::exception& e) {
            cell.outcome = "error";
            cell.exit_code = 2;
            cell.message = e.what();
        }
    };

    if (threads == 0) threads = sweep_threads();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t c = next++; c < total; c = next++) work(out.cells[c]);
            });
    }

    bool any_fail = false, any_monitor = false;
    for (const auto& c : out.cells) {
        any_fail = any_fail || c.exit_code == 2;
        any_monitor = any_monitor || c.exit_code == 3;
    }
    out.exit_code = any_fail ? 2 : any_monitor ? 3 : 0;

    if (!dir.empty()) {
        fs::create_directories(dir);
        std::string csv = "cell";
        for (const auto& a : grid) csv += "," + a.key;
        csv += ",outcome,exit_code,bound63_ok,bound65_ok,vhat_bound_ok,area_monotone,thmc_satisfied,vol_d_drift,"
               "t_final\n";
        const auto b = [](bool v) { return v ? "true" : "false"; };
        for (const auto& c : out.cells) {
            csv += c.name;
            for (double v : c.values) csv += fmt::format(",{}", v);
            csv += fmt::format(",{},{},{},{},{},{},{},{},{}\n", c.outcome, c.exit_code, b(c.bound63_ok),
                               b(c.bound65_ok), b(c.vhat_bound_ok), b(c.area_monotone), b(c.thmc_satisfied),
                               c.max_vol_d_drift, c.t_final);
        }
        write_file(dir / "sweep.csv", csv);
    }
    return out;
}

json cmd_bounds(const RunConfig& cfg)
{
    cfg.validate();
    return bounds_json(bounds_report(cfg.flow.space, initial_profile(cfg), cfg.flow.sign, cfg.flow.lap));
}

json cmd_cmc_search(const RunConfig& cfg, double hstar)
{
    cfg.validate();
    if (!std::isfinite(hstar)) throw ConfigError("hstar must be finite", "hstar");
    CmcOptions opt;
    opt.lap = cfg.flow.lap;
    opt.sign = cfg.flow.sign;
    opt.N = cfg.n;
    json j;
    j["hstar"] = hstar;
    j["lap"] = std::string(to_string(opt.lap));
    j["sign"] = std::string(to_string(opt.sign));
    const auto sol = cmc_search(cfg.flow.space, cfg.rb, hstar, cfg.r0, opt);
    j["found"] = sol.has_value();
    if (!sol) return j;
    const auto H = cmc_mean_curvature(cfg.flow.space, *sol, opt);
    double dev = 0.0;
    for (double v : H) dev = std::max(dev, std::abs(v - hstar));
    j["r0"] = sol->r0;
    j["constant"] = sol->constant;
    j["end_slope"] = sol->end_slope;
    j["max_h_residual"] = dev;
    j["profile"] = profile_json(sol->profile);
    return j;
}

RefineResult cmd_refine(const RunConfig& cfg, const std::vector<int>& ns)
{
    cfg.validate();
    RefineResult out;
    out.rows = audit_refinement(cfg.flow, cfg.rb, cfg.density, cfg.r0, cfg.amplitude, ns);
    std::string t = "which,n,dt,halved,sup,l2,order\n";
    for (AuditKind k : {AuditKind::Id416, AuditKind::Id418, AuditKind::Id520}) {
        for (bool halved : {false, true}) {
            const auto orders = empirical_orders(out.rows, k, halved);
            std::size_t seen = 0;
            for (const auto& row : out.rows) {
                if (row.halved != halved) continue;
                for (const auto& rep : row.reports) {
                    if (rep.which != k) continue;
                    const std::string order = seen == 0 || seen - 1 >= orders.size() || !std::isfinite(orders[seen - 1])
                                                  ? std::string{}
                                                  : fmt::format("{:.4f}", orders[seen - 1]);
                    t += fmt::format("{},{},{},{},{},{},{}\n", to_string(k), rep.n, rep.dt, halved ? "true" : "false",
                                     rep.sup, rep.l2, order);
                }
                ++seen;
            }
        }
    }
    out.table = std::move(t);
    return out;
}

std::string cmd_catalog()
{
    std::string out = "name,epsilon,b_default,mv1,mv2,mh,k0\n";
    for (const auto& e : catalog()) {
        const auto quoted = e.name.find(',') != std::string::npos ? "\"" + e.name + "\"" : e.name;
        if (e.informational)
            out += fmt::format("{},{},{},,,,\n", quoted, e.params.epsilon, e.params.b);
        else
            out += fmt::format("{},{},{},{},{},{},{}\n", quoted, e.params.epsilon, e.params.b, e.params.mV[0],
                               e.params.mV[1], e.params.horizontal_dim(), e.params.k0);
    }
    return out;
}

} // namespace tubeflow
