// Named experiments, run records, boundary cache, sweeps and reports.
#pragma once

#include "nalab/config.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nalab {

struct Assertion {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    std::string relation;  ///< "<", "<=", ">=", "==" as applied to measured vs threshold
    bool pass = false;
    std::string detail;
};

struct RunRecord {
    std::string config_hash;
    std::string experiment;
    std::string claim;
    std::uint64_t seed = 0;
    std::string started;
    std::string finished;
    std::string directory;
    std::vector<std::string> outputs;
    std::vector<Assertion> assertions;
    std::vector<std::string> notes;

    [[nodiscard]] bool passed() const;
};

[[nodiscard]] std::string record_to_json(const RunRecord& r);
/// Throws std::runtime_error on malformed input.
[[nodiscard]] RunRecord record_from_json(const std::string& text);

struct RunOptions {
    std::string out_dir;     ///< overrides output.directory when not empty
    bool use_cache = true;
    bool quiet = false;
};

/// Runs config.experiment.name, writes CSV (and SVG if enabled) plus record.json
/// into <dir>/<name>_<hash>/. Failed prerequisites are recorded as failed
/// assertions; the remaining ones still run.
[[nodiscard]] RunRecord run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// One-line description of what a named experiment checks.
[[nodiscard]] std::string experiment_claim(const std::string& name);

// ---- boundary cache --------------------------------------------------------

/// Boundary trajectory keyed by the problem sections of the config and the
/// request; stored as CSV with %.17g so a reload is bit-identical.
[[nodiscard]] BoundaryTrajectory cached_boundary(const ExperimentConfig& config, const ProblemSpec& spec,
                                                 BasePoint p, double t_begin, double t_end, double dt_sample,
                                                 const PullbackParams& params, double anchor_every,
                                                 const std::string& cache_dir, bool* hit = nullptr);

void write_boundary_csv(const std::string& path, const BoundaryTrajectory& bt, const Basis& basis);
[[nodiscard]] BoundaryTrajectory read_boundary_csv(const std::string& path);

// ---- sweep -----------------------------------------------------------------

struct SweepRow {
    double offset = 0.0;
    ClassReport report;
    double b_norm = 0.0;
    double pullback_residual = 0.0;
    bool pullback_converged = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;          ///< first-occurrence order of the offsets
    std::vector<double> duplicates;      ///< offsets dropped as repeats
};

[[nodiscard]] SweepResult sweep(const ExperimentConfig& config, const std::vector<double>& offsets);
void write_sweep_csv(const std::string& path, const SweepResult& result, double tol);

// ---- report ----------------------------------------------------------------

struct ReportResult {
    std::string text;
    int exit_code = 0;  ///< 0 all pass, 1 an assertion failed, 2 nothing readable or a corrupt record
};

/// Summarizes every record.json below run_dir.
[[nodiscard]] ReportResult report(const std::string& run_dir);

// ---- output ----------------------------------------------------------------

/// Numeric CSV with a header row, values printed with %.17g.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Plain SVG line chart. With log_y, nonpositive values are dropped.
void write_svg(const std::string& path, const std::string& title, const std::string& x_label,
               const std::vector<Series>& series, bool log_y = false);

}  // namespace nalab
