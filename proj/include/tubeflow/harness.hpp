#pragma once

#include "tubeflow/audit.hpp"
#include "tubeflow/flow.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tubeflow {

enum class InitKind { Const, Cosine };

std::string_view to_string(InitKind k);

struct RunConfig {
    std::string space_name;  ///< empty when the space is given by explicit parameters
    FlowConfig flow;         ///< solver and stop settings; flow.stride is the output stride
    double rb = 0.0;
    Multiplicities density;
    int n = 200;
    InitKind init_kind = InitKind::Cosine;
    double r0 = 0.0;
    double amplitude = 0.0;
    std::string out_dir = "out";
    bool write_csv = true;
    bool write_json = true;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// INI text with sections [space], [base], [init], [solver], [stop] and
/// [output]. Values may be quoted. Unknown sections and keys are rejected.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

RadialProfile initial_profile(const RunConfig& cfg);

void write_timeseries_csv(std::ostream& os, const TimeSeries& series);
std::string timeseries_csv(const TimeSeries& series);

/// Flat object with the keys of the bounds subcommand; an infinite focal
/// radius is written as null.
nlohmann::ordered_json bounds_json(const BoundsReport& report);
nlohmann::ordered_json audits_json(const std::vector<ResidualReport>& audits);
nlohmann::ordered_json config_json(const RunConfig& cfg);

/// 0 clean, 2 numerical failure, 3 any monitor column false.
int exit_code(const RunResult& result);

struct RunArtifacts {
    RunResult result;
    std::vector<ResidualReport> audits;
    std::string audit_error;
    nlohmann::ordered_json summary;
    int exit_code = 0;
};

/// Runs the flow and the residual audits of the initial profile. Files are
/// written only when dir is non-empty.
RunArtifacts cmd_run(const RunConfig& cfg, const std::filesystem::path& dir);

struct GridAxis {
    std::string key;  ///< r0, amplitude or rb
    std::vector<double> values;
};

/// "r0=0.3,0.5,0.7;amplitude=0.01,0.05,0.1"
std::vector<GridAxis> parse_grid(std::string_view spec);

struct SweepCell {
    std::string name;  ///< cell_<i>_<j>...
    std::vector<std::size_t> index;
    std::vector<double> values;
    std::string outcome;  ///< flow outcome, or "error" when the cell could not run
    int exit_code = 0;
    bool bound63_ok = true;
    bool bound65_ok = true;
    bool vhat_bound_ok = true;
    bool area_monotone = true;
    bool thmc_satisfied = false;
    double max_vol_d_drift = 0.0;
    double t_final = 0.0;
    std::string message;
};

struct SweepResult {
    std::vector<SweepCell> cells;  ///< row-major over the axes
    int exit_code = 0;             ///< 2 if any cell failed, else 3 if any monitor failed
};

/// TUBEFLOW_THREADS if set and positive, else the hardware concurrency.
unsigned sweep_threads();

/// Each cell writes into dir/cell_<i>_<j>; dir/sweep.csv collects one row
/// per cell. An empty dir runs without files.
SweepResult cmd_sweep(const RunConfig& base, const std::vector<GridAxis>& grid, const std::filesystem::path& dir,
                      unsigned threads = 0);

nlohmann::ordered_json cmd_bounds(const RunConfig& cfg);

nlohmann::ordered_json cmd_cmc_search(const RunConfig& cfg, double hstar);

struct RefineResult {
    std::vector<RefinementRow> rows;
    std::string table;  ///< CSV: which,n,dt,halved,sup,l2,order
};

RefineResult cmd_refine(const RunConfig& cfg, const std::vector<int>& ns = {100, 200, 400});

/// name,epsilon,b_default,mv1,mv2,mh,k0
std::string cmd_catalog();

} // namespace tubeflow
