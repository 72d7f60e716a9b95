#include "pgs/cli_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pgs/catalog.hpp"
#include "pgs/gamma_lab.hpp"
#include "pgs/homog.hpp"
#include "pgs/mm_engine.hpp"

namespace pgs::cli {

namespace {

using nlohmann::json;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::string join_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

struct OutputDir {
    std::string path;
    explicit OutputDir(const RunConfig& cfg) : path(resolved_out_dir(cfg)) {
        std::filesystem::create_directories(path);
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

void write_manifest(const OutputDir& out, const RunConfig& cfg, json extras = {}) {
    json m;
    m["tool"] = "pgslab";
    m["version"] = "0.1.0";
    m["command"] = cfg.command;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    m["config_hash"] = hash;
    if (!extras.is_null()) m["extras"] = extras;
    write_file(out.file("manifest.json"), m.dump(2) + "\n");
    write_file(out.file("config.txt"), canonical_config(cfg));
}

json probe_reports_json(const std::vector<model::AssumptionReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        json j;
        j["probe"] = r.probe_name;
        j["samples"] = r.samples;
        j["worst_violation"] = r.worst_violation;
        json c;
        for (const auto& [k, v] : r.inferred_constants) c[k] = v;
        j["constants"] = c;
        arr.push_back(j);
    }
    return arr;
}

// per-run CSV with the per-interval energy estimate and residuals
std::pair<std::string, bool> run_csv(const mm::Trajectory& traj,
                                     const mm::SolverSettings& settings, int substeps) {
    std::string csv = "t,energy,duee_lhs,duee_rhs,duee_slack,edb_residual_cum,step_iters\n";
    const auto& sys = *traj.system;
    double cum = 0.0;
    bool slack_ok = true;
    csv += fmt(traj.times[0]) + "," + fmt(sys.energy(traj.times[0], traj.nodes[0])) +
           ",0,0,0,0,0\n";
    for (std::size_t n = 0; n < traj.intervals(); ++n) {
        auto rep = mm::edb_report(traj, traj.times[n], traj.times[n + 1], substeps, settings);
        double lhs = rep.energy_end + rep.dissipation_primal + rep.dissipation_dual;
        double rhs = rep.energy_start + rep.power_integral + rep.perturbation_work;
        cum += rep.edb_residual;
        if (rep.duee_slack < -10.0 * rep.tolerance_budget) slack_ok = false;
        csv += fmt(traj.times[n + 1]) + "," + fmt(rep.energy_end) + "," + fmt(lhs) + "," +
               fmt(rhs) + "," + fmt(rep.duee_slack) + "," + fmt(cum) + "," +
               std::to_string(traj.step_iters[n]) + "\n";
    }
    return {csv, slack_ok};
}

std::string table_csv(const gamma::ConvergenceTable& table) {
    std::string csv;
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        csv += (i ? "," : "") + table.columns[i];
    csv += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) csv += (i ? "," : "") + fmt(row[i]);
        csv += "\n";
    }
    return csv;
}

Vec table_column(const gamma::ConvergenceTable& table, const std::string& name) {
    std::size_t idx = 0;
    while (idx < table.columns.size() && table.columns[idx] != name) ++idx;
    if (idx == table.columns.size()) throw Error("no column " + name);
    Vec v;
    for (const auto& row : table.rows) v.push_back(row[idx]);
    return v;
}

int cmd_solve_or_edb(const RunConfig& cfg) {
    auto sys = catalog::make_system(cfg.system, cfg.eps, cfg.cells);
    Vec u0 = catalog::default_initial_state(cfg.system, cfg.eps, cfg.cells);
    mm::SchemeOptions opts;
    opts.solver.cert_tol_rel = cfg.tol;
    auto traj = mm::run_scheme(sys, u0, cfg.T, cfg.N, opts);
    auto [csv, slack_ok] = run_csv(traj, opts.solver, cfg.substeps);

    OutputDir out(cfg);
    write_file(out.file("run.csv"), csv);
    auto probes = model::run_standard_probes(sys, 2.0, cfg.T, 100, cfg.seed);
    json extras;
    extras["system"] = sys.name;
    extras["tau"] = cfg.T / cfg.N;
    extras["probes"] = probe_reports_json(probes);
    write_manifest(out, cfg, extras);

    if (cfg.command == "edb") {
        std::cout << (slack_ok ? "PASS" : "FAIL") << " duee_slack within tolerance budget\n";
        return slack_ok ? 0 : 1;
    }
    return 0;
}

int cmd_moreau(const RunConfig& cfg) {
    auto sys = catalog::make_system(cfg.system, cfg.eps, cfg.cells);
    if (sys.dim != 1) throw ConfigError("moreau scan expects a scalar system");
    mm::StepProblem p;
    p.r = 1.0;
    p.t = 0.0;
    p.u = Vec{cfg.u_value};
    p.w = Vec{cfg.w_value};
    p.system = &sys;

    std::vector<double> r_list = cfg.r_list;
    if (r_list.empty())
        for (int k = 12; k >= 0; --k) r_list.push_back(std::ldexp(1.0, -k));
    std::sort(r_list.begin(), r_list.end());

    auto scan = mm::moreau_yosida_scan(p, r_list, std::nullopt, cfg.T);
    std::string csv = "r,phi,upper_bound,monotone_ok\n";
    for (const auto& row : scan.rows)
        csv += fmt(row.r) + "," + fmt(row.phi) + "," + fmt(row.upper_bound) + "," +
               (row.monotone_ok ? "1" : "0") + "\n";

    OutputDir out(cfg);
    write_file(out.file("moreau.csv"), csv);
    json extras;
    extras["extrapolated_r_to_zero"] = mm::extrapolate_to_zero(scan);
    extras["target"] = sys.energy(p.t, p.u) - dot(p.w, p.u);
    write_manifest(out, cfg, extras);
    std::cout << (scan.all_monotone ? "PASS" : "FAIL") << " envelope monotonicity\n";
    return scan.all_monotone ? 0 : 1;
}

int cmd_means(const RunConfig& cfg) {
    auto coeffs = catalog::rds_instance(cfg.instance);
    auto m = homog::mean_tensors(coeffs, cfg.u_value, cfg.quad_points);
    json j;
    j["A_aver"] = m.A_aver;
    j["A_harm"] = m.A_harm;
    j["quad_error"] = m.quad_error;

    json table = json::array();
    for (int i = 0; i <= 16; ++i) {
        double u = -2.0 + 4.0 * i / 16.0;
        auto mu = homog::mean_tensors(coeffs, u, cfg.quad_points);
        table.push_back({{"u", u}, {"A_aver", mu.A_aver}, {"A_harm", mu.A_harm}});
    }
    OutputDir out(cfg);
    write_file(out.file("means.json"), j.dump(2) + "\n");
    write_file(out.file("tensors.json"), table.dump(2) + "\n");
    write_manifest(out, cfg, j);
    std::cout << "A_aver=" << fmt(m.A_aver) << " A_harm=" << fmt(m.A_harm) << "\n";
    return 0;
}

int cmd_cell(const RunConfig& cfg) {
    auto coeffs = catalog::rds_instance(cfg.instance);
    auto cp = homog::solve_cell_problem(coeffs, cfg.u_value, cfg.U_value, cfg.resolution);

    json j;
    j["u"] = cp.u;
    j["U"] = cp.U;
    j["resolution"] = cp.resolution;
    j["value"] = cp.value;
    j["kkt_residual"] = cp.kkt_residual;
    if (cp.fast_path_value) j["fast_path_value"] = *cp.fast_path_value;

    std::string corr = "y,phi\n";
    for (int k = 0; k < cp.resolution; ++k)
        corr += fmt((double)k / cp.resolution) + "," + fmt(cp.corrector[k]) + "\n";

    // homogenized-density table export on a small grid
    homog::EffectiveModelOptions mopts;
    mopts.cell_resolution = std::min(cfg.resolution, 64);
    mopts.tabulate = true;
    mopts.check_tabulation = false;
    mopts.u_grid = {-2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2};
    mopts.U_grid = {-4, -3, -2, -1, 0, 1, 2, 3, 4};
    auto model = homog::build_effective_model(coeffs, homog::DissipationMode::Aver,
                                              homog::EnergyMode::CellHom, mopts);
    std::string fhom = "u,U,value\n";
    for (std::size_t i = 0; i < model.u_grid.size(); ++i)
        for (std::size_t k = 0; k < model.U_grid.size(); ++k)
            fhom += fmt(model.u_grid[i]) + "," + fmt(model.U_grid[k]) + "," +
                    fmt(model.F_table[i][k]) + "\n";

    OutputDir out(cfg);
    write_file(out.file("cell.json"), j.dump(2) + "\n");
    write_file(out.file("corrector.csv"), corr);
    write_file(out.file("fhom_table.csv"), fhom);
    write_manifest(out, cfg, j);
    std::cout << "value=" << fmt(cp.value) << " kkt=" << fmt(cp.kkt_residual) << "\n";
    return 0;
}

int cmd_probes(const RunConfig& cfg) {
    auto sys = catalog::make_system(cfg.system, cfg.eps, cfg.cells);
    auto reports = model::run_standard_probes(sys, 2.0, cfg.T, 1000, cfg.seed);
    OutputDir out(cfg);
    write_file(out.file("probes.json"), probe_reports_json(reports).dump(2) + "\n");
    write_manifest(out, cfg);
    bool ok = true;
    for (const auto& r : reports) {
        bool pass = r.worst_violation <= 1e-9;
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << r.probe_name
                  << " worst_violation=" << fmt(r.worst_violation) << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_tau_sweep(const RunConfig& cfg) {
    auto sys = catalog::make_system(cfg.system, cfg.eps, cfg.cells);
    Vec u0 = catalog::default_initial_state(cfg.system, cfg.eps, cfg.cells);
    std::vector<double> taus = cfg.tau_list;
    if (taus.empty()) taus = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    auto table = gamma::run_tau_sweep(sys, u0, cfg.T, taus);

    OutputDir out(cfg);
    write_file(out.file("tau_sweep.csv"), table_csv(table));
    json extras;
    for (const auto& [k, v] : table.empirical_orders) extras["order_" + k] = v;
    write_manifest(out, cfg, extras);

    bool ok = true;
    for (const char* metric : {"sup_state_err", "energy_err"}) {
        Vec v = table_column(table, metric);
        bool dead = *std::max_element(v.begin(), v.end()) <= 1e-12;
        bool pass = dead || gamma::strictly_decreasing(v);
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << metric << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_eps_sweep(const RunConfig& cfg) {
    auto coeffs = catalog::rds_instance(cfg.instance);
    gamma::EpsSweepConfig sc;
    sc.eps_list = cfg.eps_list.empty() ? std::vector<double>{0.25, 0.125, 0.0625}
                                       : cfg.eps_list;
    sc.resolution_factor = cfg.resolution_factor;
    sc.N = cfg.sweep_N;
    sc.T = cfg.sweep_T;
    sc.dmode = cfg.dissipation_mode == "harm" ? homog::DissipationMode::Harm
                                              : homog::DissipationMode::Aver;
    sc.emode = cfg.energy_mode == "aver" ? homog::EnergyMode::ZeroCorrector
                                         : homog::EnergyMode::CellHom;
    auto result = gamma::run_eps_sweep(coeffs, sc);

    OutputDir out(cfg);
    write_file(out.file("eps_sweep.csv"), table_csv(result.table));
    json extras;
    for (const auto& [k, v] : result.table.empirical_orders) extras["order_" + k] = v;
    write_manifest(out, cfg, extras);

    bool ok = true;
    for (const char* metric :
         {"state_sup", "energy_max", "diss_primal_diff", "diss_dual_diff", "wellprep_gap"}) {
        Vec v = table_column(result.table, metric);
        bool dead = *std::max_element(v.begin(), v.end()) <= 1e-10;
        bool pass = dead || gamma::strictly_decreasing(v);
        if (std::string(metric) == "state_sup") ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << metric << "\n";
    }
    return ok ? 0 : 1;
}

}  // namespace

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            auto last = s.find_last_not_of(" \t\r");
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        try {
            if (key == "command") cfg.command = value;
            else if (key == "system") cfg.system = value;
            else if (key == "instance") cfg.instance = value;
            else if (key == "T") cfg.T = std::stod(value);
            else if (key == "N") cfg.N = std::stoi(value);
            else if (key == "pde.eps" || key == "eps") cfg.eps = std::stod(value);
            else if (key == "pde.cells" || key == "cells") cfg.cells = std::stoi(value);
            else if (key == "pde.instance") cfg.instance = value;
            else if (key == "u") cfg.u_value = std::stod(value);
            else if (key == "w") cfg.w_value = std::stod(value);
            else if (key == "U") cfg.U_value = std::stod(value);
            else if (key == "resolution") cfg.resolution = std::stoi(value);
            else if (key == "quad_points") cfg.quad_points = std::stoi(value);
            else if (key == "r_list") cfg.r_list = parse_list(value);
            else if (key == "tau_list") cfg.tau_list = parse_list(value);
            else if (key == "eps_list") cfg.eps_list = parse_list(value);
            else if (key == "substeps") cfg.substeps = std::stoi(value);
            else if (key == "solver.grad_tol" || key == "tol") cfg.tol = std::stod(value);
            else if (key == "solver.max_iters") { /* accepted, defaulted per dimension */ }
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "sweep_N") cfg.sweep_N = std::stoi(value);
            else if (key == "sweep_T") cfg.sweep_T = std::stod(value);
            else if (key == "resolution_factor") cfg.resolution_factor = std::stoi(value);
            else if (key == "dissipation_mode") cfg.dissipation_mode = value;
            else if (key == "energy_mode") cfg.energy_mode = value;
            else if (key == "out") cfg.out_dir = value;
            else throw ConfigError("unknown config key '" + key + "' (line " +
                                   std::to_string(lineno) + ")");
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad value for '" + key + "' (line " + std::to_string(lineno) +
                              ")");
        }
    }
    return cfg;
}

RunConfig parse_config(int argc, const char* const* argv) {
    RunConfig cfg;
    // --config seeds the defaults, explicit flags override
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") cfg = parse_config_file(argv[i + 1]);

    CLI::App app{"pgslab - variational time stepping for perturbed gradient systems"};
    app.require_subcommand(0, 1);
    std::string config_path;
    app.add_option("--config", config_path, "key=value config file");

    std::string r_list_s, tau_list_s, eps_list_s;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--system", cfg.system);
        sub->add_option("--instance", cfg.instance);
        sub->add_option("--T", cfg.T);
        sub->add_option("--N", cfg.N);
        sub->add_option("--eps", cfg.eps);
        sub->add_option("--cells", cfg.cells);
        sub->add_option("--u", cfg.u_value);
        sub->add_option("--w", cfg.w_value);
        sub->add_option("--U", cfg.U_value);
        sub->add_option("--resolution", cfg.resolution);
        sub->add_option("--quad-points", cfg.quad_points);
        sub->add_option("--r-list", r_list_s);
        sub->add_option("--tau-list", tau_list_s);
        sub->add_option("--eps-list", eps_list_s);
        sub->add_option("--substeps", cfg.substeps);
        sub->add_option("--tol", cfg.tol);
        sub->add_option("--seed", cfg.seed);
        sub->add_option("--sweep-N", cfg.sweep_N);
        sub->add_option("--sweep-T", cfg.sweep_T);
        sub->add_option("--resolution-factor", cfg.resolution_factor);
        sub->add_option("--dissipation-mode", cfg.dissipation_mode);
        sub->add_option("--energy-mode", cfg.energy_mode);
        sub->add_option("--out", cfg.out_dir);
    };
    for (const char* name :
         {"solve", "edb", "moreau", "cell", "means", "tau-sweep", "eps-sweep", "probes"})
        add_common(app.add_subcommand(name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(std::string("flag parsing failed: ") + e.what());
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    if (!r_list_s.empty()) cfg.r_list = parse_list(r_list_s);
    if (!tau_list_s.empty()) cfg.tau_list = parse_list(tau_list_s);
    if (!eps_list_s.empty()) cfg.eps_list = parse_list(eps_list_s);
    if (cfg.command.empty()) throw ConfigError("no command given (and none in the config)");
    validate(cfg);
    return cfg;
}

void validate(const RunConfig& cfg) {
    static const std::vector<std::string> commands = {"solve",  "edb",       "moreau",
                                                      "cell",   "means",     "tau-sweep",
                                                      "eps-sweep", "probes"};
    if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end())
        throw ConfigError("unknown command '" + cfg.command + "'");

    auto names = catalog::all_names();
    if ((cfg.command == "solve" || cfg.command == "edb" || cfg.command == "moreau" ||
         cfg.command == "probes" || cfg.command == "tau-sweep")) {
        if (std::find(names.begin(), names.end(), cfg.system) == names.end()) {
            std::string listing;
            for (const auto& n : names) listing += " " + n;
            throw ConfigError("unknown system '" + cfg.system + "'; catalog:" + listing);
        }
    }
    if (cfg.command == "cell" || cfg.command == "means" || cfg.command == "eps-sweep") {
        auto inst = catalog::instance_names();
        if (std::find(inst.begin(), inst.end(), cfg.instance) == inst.end()) {
            std::string listing;
            for (const auto& n : inst) listing += " " + n;
            throw ConfigError("unknown instance '" + cfg.instance + "'; catalog:" + listing);
        }
    }
    if (!(cfg.T > 0)) throw ConfigError("T must be positive");
    if (cfg.N < 1) throw ConfigError("N must be at least 1");
    if (!(cfg.eps > 0 && cfg.eps <= 1)) throw ConfigError("eps must lie in (0,1]");
    if (cfg.substeps < 1) throw ConfigError("substeps must be at least 1");
    if (!(cfg.tol > 0)) throw ConfigError("tol must be positive");
    if (cfg.command == "cell" && cfg.resolution < 8)
        throw ConfigError("cell resolution must be at least 8");
    if (cfg.command == "eps-sweep") {
        if (cfg.resolution_factor < 16)
            throw ConfigError(
                "resolution_factor violates the rule h <= eps/16 (need at least 16)");
        for (double e : cfg.eps_list)
            if (!(e > 0 && e <= 1)) throw ConfigError("eps list entries must lie in (0,1]");
        if (cfg.dissipation_mode != "aver" && cfg.dissipation_mode != "harm")
            throw ConfigError("dissipation_mode must be aver or harm");
        if (cfg.energy_mode != "hom" && cfg.energy_mode != "aver")
            throw ConfigError("energy_mode must be hom or aver");
    }
}

std::string resolved_out_dir(const RunConfig& cfg) {
    const char* root = std::getenv("PGSLAB_OUT_ROOT");
    if (root && *root) return std::string(root) + "/" + cfg.out_dir;
    return cfg.out_dir;
}

std::string canonical_config(const RunConfig& cfg) {
    std::string s;
    s += "command=" + cfg.command + "\n";
    s += "system=" + cfg.system + "\n";
    s += "instance=" + cfg.instance + "\n";
    s += "T=" + fmt(cfg.T) + "\n";
    s += "N=" + std::to_string(cfg.N) + "\n";
    s += "eps=" + fmt(cfg.eps) + "\n";
    s += "cells=" + std::to_string(cfg.cells) + "\n";
    s += "u=" + fmt(cfg.u_value) + "\n";
    s += "w=" + fmt(cfg.w_value) + "\n";
    s += "U=" + fmt(cfg.U_value) + "\n";
    s += "resolution=" + std::to_string(cfg.resolution) + "\n";
    s += "quad_points=" + std::to_string(cfg.quad_points) + "\n";
    s += "r_list=" + join_list(cfg.r_list) + "\n";
    s += "tau_list=" + join_list(cfg.tau_list) + "\n";
    s += "eps_list=" + join_list(cfg.eps_list) + "\n";
    s += "substeps=" + std::to_string(cfg.substeps) + "\n";
    s += "tol=" + fmt(cfg.tol) + "\n";
    s += "seed=" + std::to_string(cfg.seed) + "\n";
    s += "sweep_N=" + std::to_string(cfg.sweep_N) + "\n";
    s += "sweep_T=" + fmt(cfg.sweep_T) + "\n";
    s += "resolution_factor=" + std::to_string(cfg.resolution_factor) + "\n";
    s += "dissipation_mode=" + cfg.dissipation_mode + "\n";
    s += "energy_mode=" + cfg.energy_mode + "\n";
    s += "out=" + cfg.out_dir + "\n";
    return s;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // FNV-1a over the canonical echo
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_config(cfg)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

int execute(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.command == "solve" || cfg.command == "edb") return cmd_solve_or_edb(cfg);
    if (cfg.command == "moreau") return cmd_moreau(cfg);
    if (cfg.command == "means") return cmd_means(cfg);
    if (cfg.command == "cell") return cmd_cell(cfg);
    if (cfg.command == "probes") return cmd_probes(cfg);
    if (cfg.command == "tau-sweep") return cmd_tau_sweep(cfg);
    if (cfg.command == "eps-sweep") return cmd_eps_sweep(cfg);
    throw ConfigError("unknown command '" + cfg.command + "'");
}

int main_entry(int argc, const char* const* argv) {
    try {
        RunConfig cfg = parse_config(argc, argv);
        return execute(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace pgs::cli
