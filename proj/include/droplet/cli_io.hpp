#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "droplet/affine_oracle.hpp"
#include "droplet/distance.hpp"

namespace droplet {

// Configuration, run artifacts, verification suites, and the command
// entry points behind the droplet executable.
//
// Config files are declarative "key = value" text with [section] headers
// and '#' comments; parsing is strict (unknown or duplicate keys are
// errors, every numeric field is validated on load).  The full schema is
// documented in README.md.
//
// Artifacts: diagnostics as JSON-lines (one record per step), snapshots as
// sectioned CSV matrices, summaries as JSON.  Every artifact carries
// schema_version; wall-clock timestamps live in their own field so that
// files from identical runs are byte-identical once that field is ignored.

inline constexpr int kSchemaVersion = 1;

struct InitialCondition {
    enum class Kind { Affine, Rotation, File };
    Kind kind = Kind::Affine;
    Mat2 A = (Mat2() << 0.25, 0.0, 0.0, -0.25).finished();  // affine: v = A x
    Mat2 Q = Mat2::Identity();                              // affine domain form
    Real omega = 1.0;                                       // rotation rate
    std::string path;                                       // snapshot to load
};

struct RunConfig {
    int n_theta = 64;
    int n_rho = 24;
    StepConfig step;
    InitialCondition init;
    Real horizon = 0.5;
    std::string out_dir = "out";
    int snapshot_every = 0;  // cadence in steps; 0 disables snapshots
    int compare_stride = 1;  // distance sampling stride for compare runs
    bool quiet = false;
    unsigned seed = 1234;  // seeds randomized verification checks
};

// Throws ConfigError naming the offending key.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

FluidState initial_state(const RunConfig& cfg);

// artifact writers/readers ------------------------------------------------

void write_diagnostics_line(std::ostream& os, int step, const StepReport& rep,
                            const std::string& timestamp);
void write_summary_json(std::ostream& os, const RunConfig& cfg, const Trajectory& traj,
                        const std::string& timestamp);
void write_snapshot(std::ostream& os, const FluidState& s, int step, Real t);
FluidState read_snapshot(std::istream& in, Real div_tol = kDefaultDivTol);
void write_distance_csv(std::ostream& os, const GronwallReport& rep);
void write_gronwall_json(std::ostream& os, const GronwallReport& rep,
                         const std::string& timestamp);
std::string iso_timestamp();

// verification suites -------------------------------------------------------

struct CheckRow {
    std::string name;
    Real measured = 0;
    Real threshold = 0;
    std::string relation;  // "<" or ">="
    bool pass = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckRow> rows;
    bool all_pass = true;
};

// Suites: "elliptic" (operator spectrum, manufactured solve),
// "identities" (product rule, moving-surface identities),
// "regularization" (dyadic error rates, divergence of the smoothed field).
// Throws UnknownSuite.
SuiteReport run_suite(const std::string& name, unsigned seed = 1234);
void write_suite_json(std::ostream& os, const SuiteReport& rep, const std::string& timestamp);

// commands ------------------------------------------------------------------
// Exit codes: 0 clean, 1 error (message on stderr), 2 monitor trip.

int cmd_simulate(const std::string& config_path,
                 const std::optional<std::string>& out_override = {},
                 std::optional<int> snapshots_override = {}, bool quiet = false);
int cmd_compare(const std::string& config_a, const std::string& config_b,
                const std::optional<std::string>& out_override = {}, bool quiet = false);
int cmd_verify(const std::string& suite, const std::optional<std::string>& out_dir = {},
               bool quiet = false, unsigned seed = 1234);

}  // namespace droplet
