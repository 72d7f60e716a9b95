#ifndef PGS_CLI_IO_HPP
#define PGS_CLI_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pgs/errors.hpp"

// Command-line front end: structured configuration, dispatch, and run-output
// persistence (CSV tables, JSON manifests, config echo).

namespace pgs::cli {

struct RunConfig {
    std::string command;  // solve | edb | moreau | cell | means | tau-sweep | eps-sweep | probes

    std::string system = "decay";            // catalog system name
    std::string instance = "osc-diffusion";  // coefficient instance name

    double T = 1.0;
    int N = 64;
    double eps = 0.25;
    int cells = 32;

    double u_value = 1.0;  // scalar state for moreau / cell / means
    double w_value = 0.0;  // applied covector for moreau
    double U_value = 1.0;  // macroscopic gradient for cell

    int resolution = 128;   // cell-problem resolution
    int quad_points = 256;  // cell quadrature points

    std::vector<double> r_list;    // moreau step lengths
    std::vector<double> tau_list;  // tau sweep
    std::vector<double> eps_list;  // eps sweep

    int substeps = 8;
    double tol = 1e-8;
    std::uint64_t seed = 12345;

    int sweep_N = 64;
    double sweep_T = 0.25;
    int resolution_factor = 16;
    std::string dissipation_mode = "aver";  // aver | harm
    std::string energy_mode = "hom";        // hom | aver (plain cell average)

    std::string out_dir = "out";
};

// Parses flags (CLI11 grammar, one subcommand per command) with optional
// --config file providing defaults; validates against the module
// preconditions before any solve starts.  Throws ConfigError with a
// field-level message.
RunConfig parse_config(int argc, const char* const* argv);

// Parses the simple key=value configuration format ('#' comments).
RunConfig parse_config_file(const std::string& path);

void validate(const RunConfig& cfg);

// Resolved output directory: $PGSLAB_OUT_ROOT/<out_dir> when the root
// override is set, <out_dir> otherwise.
std::string resolved_out_dir(const RunConfig& cfg);

// Canonical key=value echo of the effective config (also what gets hashed).
std::string canonical_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

// Dispatches to the module operation, writes the CSV/JSON artifacts and the
// manifest.  Returns the process exit code: 0 pass, 1 fail/violation, 2 error.
int execute(const RunConfig& cfg);

// Entry point used by the binary.
int main_entry(int argc, const char* const* argv);

}  // namespace pgs::cli

#endif
