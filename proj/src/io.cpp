#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "droplet/chart_fields.hpp"
#include "droplet/cli_io.hpp"

namespace droplet {

namespace {

std::string fmt(Real x) {
    if (!std::isfinite(x)) return "null";  // JSON has no inf/nan
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

std::string jstr(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    std::ostringstream es;
                    es << "\\u" << std::hex << std::setw(4) << std::setfill('0') << int(c);
                    out += es.str();
                } else {
                    out += c;
                }
        }
    }
    return out + "\"";
}

void write_matrix_csv(std::ostream& os, const Mat& m) {
    os << std::setprecision(17);
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j);
        }
        os << '\n';
    }
}

Mat read_matrix_csv(std::istream& in, int rows, int cols) {
    Mat m(rows, cols);
    std::string line;
    for (int i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw ConfigError("snapshot: truncated matrix block");
        std::istringstream ls(line);
        std::string cell;
        for (int j = 0; j < cols; ++j) {
            if (!std::getline(ls, cell, ','))
                throw ConfigError("snapshot: short row in matrix block");
            m(i, j) = std::stod(cell);
        }
    }
    return m;
}

std::string snapshot_name(int step) {
    std::ostringstream os;
    os << "snapshot_" << std::setw(6) << std::setfill('0') << step << ".csv";
    return os.str();
}

}  // namespace

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_diagnostics_line(std::ostream& os, int step, const StepReport& rep,
                            const std::string& timestamp) {
    os << "{\"schema_version\":" << kSchemaVersion << ",\"kind\":\"step\""
       << ",\"step\":" << step << ",\"t\":" << fmt(rep.t_pre) << ",\"eps\":" << fmt(rep.eps)
       << ",\"e_k_pre\":" << fmt(rep.energy_pre.e_k) << ",\"e_k_post\":" << fmt(rep.energy_post.e_k)
       << ",\"energy_ratio\":" << fmt(rep.energy_ratio)
       << ",\"min_a\":" << fmt(rep.control_post.min_a)
       << ",\"thickness\":" << fmt(rep.control_post.thickness)
       << ",\"a_sharp\":" << fmt(rep.control_post.a_sharp)
       << ",\"b_sharp\":" << fmt(rep.control_post.b_sharp)
       << ",\"b_diff\":" << fmt(rep.control_post.b_diff)
       << ",\"b_integral\":" << fmt(rep.b_integral)
       << ",\"residual_c0\":" << fmt(rep.residual_c0)
       << ",\"residual_c1\":" << fmt(rep.residual_c1)
       << ",\"volume_drift\":" << fmt(rep.volume_drift)
       << ",\"flux_mean\":" << fmt(rep.flux_mean)
       << ",\"velocity_change\":" << fmt(rep.velocity_change)
       << ",\"domain_change_c1\":" << fmt(rep.domain_change_c1)
       << ",\"invert_iters\":" << rep.invert_iters << ",\"timestamp\":" << jstr(timestamp)
       << "}\n";
}

void write_summary_json(std::ostream& os, const RunConfig& cfg, const Trajectory& traj,
                        const std::string& timestamp) {
    // conservation drifts over the stored states
    Real e0 = 0, a0 = 0, w0 = 0;
    Real energy_drift = 0, area_drift = 0, omega_drift = 0;
    for (size_t i = 0; i < traj.states.size(); ++i) {
        const Real e = conserved_energy(traj.states[i]);
        const Real a = enclosed_area(traj.states[i].gamma());
        const Real w = traj.states[i].vorticity().v.cwiseAbs().maxCoeff();
        if (i == 0) {
            e0 = e;
            a0 = a;
            w0 = w;
        } else {
            energy_drift = std::max(energy_drift, std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
            area_drift = std::max(area_drift, std::abs(a - a0) / a0);
            omega_drift = std::max(omega_drift, std::abs(w - w0));
        }
    }
    Real ratio_c = 0;  // fitted per-step energy growth constant
    for (const StepReport& r : traj.reports)
        ratio_c = std::max(ratio_c, (r.energy_ratio - 1) / r.eps);

    os << "{\"schema_version\":" << kSchemaVersion << ",\"kind\":\"summary\""
       << ",\"monitor\":" << jstr(to_string(traj.trip)) << ",\"trip_step\":" << traj.trip_step
       << ",\"trip_message\":" << jstr(traj.trip_message)
       << ",\"steps\":" << traj.steps() << ",\"dt\":" << fmt(traj.dt)
       << ",\"horizon\":" << fmt(cfg.horizon) << ",\"t_final\":"
       << fmt(traj.steps() > 0 ? traj.time(static_cast<int>(traj.states.size()) - 1) : 0.0)
       << ",\"energy_initial\":" << fmt(e0) << ",\"energy_drift\":" << fmt(energy_drift)
       << ",\"area_initial\":" << fmt(a0) << ",\"area_drift\":" << fmt(area_drift)
       << ",\"omega_initial\":" << fmt(w0) << ",\"omega_drift\":" << fmt(omega_drift)
       << ",\"energy_ratio_c\":" << fmt(ratio_c) << ",\"timestamp\":" << jstr(timestamp)
       << "}\n";
}

void write_snapshot(std::ostream& os, const FluidState& s, int step, Real t) {
    const ChartPtr& c = s.chart();
    os << std::setprecision(17);
    os << "# schema_version," << kSchemaVersion << '\n';
    os << "# kind,snapshot\n";
    os << "# step," << step << '\n';
    os << "# t," << t << '\n';
    os << "# n_theta," << c->n_theta() << '\n';
    os << "# n_rho," << c->n_rho() << '\n';
    os << "# gravity," << s.gravity() << '\n';
    os << "# block,eta\n";
    write_matrix_csv(os, s.gamma().eta.transpose());
    os << "# block,vx\n";
    write_matrix_csv(os, s.velocity().x.v);
    os << "# block,vy\n";
    write_matrix_csv(os, s.velocity().y.v);
}

FluidState read_snapshot(std::istream& in, Real div_tol) {
    int n_theta = -1, n_rho = -1;
    Real gravity = 0;
    Mat eta, vx, vy;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) != 0) continue;
        const std::string body = line.substr(2);
        const auto comma = body.find(',');
        if (comma == std::string::npos) continue;
        const std::string key = body.substr(0, comma);
        const std::string val = body.substr(comma + 1);
        if (key == "schema_version") {
            if (std::stoi(val) != kSchemaVersion)
                throw ConfigError("snapshot: unsupported schema_version " + val);
        } else if (key == "n_theta") {
            n_theta = std::stoi(val);
        } else if (key == "n_rho") {
            n_rho = std::stoi(val);
        } else if (key == "gravity") {
            gravity = std::stod(val);
        } else if (key == "block") {
            if (n_theta < 0 || n_rho < 0)
                throw ConfigError("snapshot: block before grid dimensions");
            if (val == "eta")
                eta = read_matrix_csv(in, 1, n_theta);
            else if (val == "vx")
                vx = read_matrix_csv(in, n_rho, n_theta);
            else if (val == "vy")
                vy = read_matrix_csv(in, n_rho, n_theta);
            else
                throw ConfigError("snapshot: unknown block '" + val + "'");
        }
    }
    if (eta.size() == 0 || vx.size() == 0 || vy.size() == 0)
        throw ConfigError("snapshot: missing blocks");
    const ChartPtr c = make_chart(BoundaryGraph(eta.transpose()), n_rho);
    return FluidState(VectorField(Field(c, vx), Field(c, vy)), gravity, div_tol);
}

void write_distance_csv(std::ostream& os, const GronwallReport& rep) {
    os << "t,d_value,fitted_ratio\n" << std::setprecision(17);
    for (int i = 0; i < rep.times.size(); ++i) {
        os << rep.times[i] << ',' << rep.d_values[i] << ',';
        if (i < rep.ratios.size() && std::isfinite(rep.ratios[i])) os << rep.ratios[i];
        os << '\n';
    }
}

void write_gronwall_json(std::ostream& os, const GronwallReport& rep,
                         const std::string& timestamp) {
    os << "{\"schema_version\":" << kSchemaVersion << ",\"kind\":\"gronwall\""
       << ",\"degenerate\":" << (rep.degenerate ? "true" : "false")
       << ",\"used_b_sharp\":" << (rep.used_b_sharp ? "true" : "false")
       << ",\"samples\":" << rep.times.size() << ",\"max_ratio\":" << fmt(rep.max_ratio)
       << ",\"d_initial\":" << fmt(rep.d_values.size() ? rep.d_values[0] : 0.0)
       << ",\"d_final\":"
       << fmt(rep.d_values.size() ? rep.d_values[rep.d_values.size() - 1] : 0.0)
       << ",\"timestamp\":" << jstr(timestamp) << "}\n";
}

void write_suite_json(std::ostream& os, const SuiteReport& rep, const std::string& timestamp) {
    os << "{\"schema_version\":" << kSchemaVersion << ",\"kind\":\"verify\""
       << ",\"suite\":" << jstr(rep.suite) << ",\"all_pass\":"
       << (rep.all_pass ? "true" : "false") << ",\"checks\":[";
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        const CheckRow& r = rep.rows[i];
        if (i) os << ',';
        os << "{\"name\":" << jstr(r.name) << ",\"measured\":" << fmt(r.measured)
           << ",\"threshold\":" << fmt(r.threshold) << ",\"relation\":" << jstr(r.relation)
           << ",\"pass\":" << (r.pass ? "true" : "false") << "}";
    }
    os << "],\"timestamp\":" << jstr(timestamp) << "}\n";
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    return f;
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::optional<std::string>& out_override,
                 std::optional<int> snapshots_override, bool quiet) {
    try {
        RunConfig cfg = load_config(config_path);
        if (out_override) cfg.out_dir = *out_override;
        if (snapshots_override) cfg.snapshot_every = *snapshots_override;
        if (quiet) cfg.quiet = true;

        const std::filesystem::path out(cfg.out_dir);
        std::filesystem::create_directories(out);
        const FluidState init = initial_state(cfg);

        std::ofstream diag = open_out(out / "diagnostics.jsonl");
        int step_idx = 0;
        const Trajectory traj = run(init, cfg.step, cfg.horizon, [&](const StepReport& r) {
            write_diagnostics_line(diag, step_idx++, r, iso_timestamp());
        });

        if (cfg.snapshot_every > 0) {
            for (size_t i = 0; i < traj.states.size(); i += cfg.snapshot_every) {
                std::ofstream snap = open_out(out / snapshot_name(static_cast<int>(i)));
                write_snapshot(snap, traj.states[i], static_cast<int>(i),
                               traj.time(static_cast<int>(i)));
            }
            const size_t last = traj.states.size() - 1;
            if (last % cfg.snapshot_every != 0) {
                std::ofstream snap = open_out(out / snapshot_name(static_cast<int>(last)));
                write_snapshot(snap, traj.states[last], static_cast<int>(last),
                               traj.time(static_cast<int>(last)));
            }
        }

        std::ofstream sum = open_out(out / "summary.json");
        write_summary_json(sum, cfg, traj, iso_timestamp());

        if (traj.trip != TripReason::None) {
            if (!cfg.quiet)
                std::cout << "monitor trip: " << to_string(traj.trip) << " at step "
                          << traj.trip_step << " (" << traj.trip_message << ")\n";
            return 2;
        }
        if (!cfg.quiet)
            std::cout << "clean finish: " << traj.steps() << " steps to t = "
                      << traj.time(static_cast<int>(traj.states.size()) - 1) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_compare(const std::string& config_a, const std::string& config_b,
                const std::optional<std::string>& out_override, bool quiet) {
    try {
        const RunConfig cfg_a = load_config(config_a);
        const RunConfig cfg_b = load_config(config_b);
        const std::filesystem::path out(out_override ? *out_override : cfg_a.out_dir);
        std::filesystem::create_directories(out);

        const Trajectory ta = run(initial_state(cfg_a), cfg_a.step, cfg_a.horizon);
        const Trajectory tb = run(initial_state(cfg_b), cfg_b.step, cfg_b.horizon);
        try {
            const GronwallReport rep = gronwall_check(ta, tb, cfg_a.compare_stride);
            std::ofstream csv = open_out(out / "distance_series.csv");
            write_distance_csv(csv, rep);
            std::ofstream js = open_out(out / "gronwall.json");
            write_gronwall_json(js, rep, iso_timestamp());
            if (!quiet) {
                if (rep.degenerate)
                    std::cout << "degenerate: distance at noise level at all samples\n";
                else
                    std::cout << "fitted max ratio: " << rep.max_ratio << " over "
                              << rep.times.size() << " samples\n";
            }
            return 0;
        } catch (const MonitorTrip& e) {
            if (!quiet) std::cout << "monitor trip: " << e.what() << "\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_verify(const std::string& suite, const std::optional<std::string>& out_dir, bool quiet,
               unsigned seed) {
    try {
        const SuiteReport rep = run_suite(suite, seed);
        if (!quiet) {
            for (const CheckRow& r : rep.rows)
                std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name
                          << "  measured=" << r.measured << "  wanted " << r.relation << " "
                          << r.threshold << "\n";
        }
        if (out_dir) {
            std::filesystem::create_directories(*out_dir);
            std::ofstream js =
                open_out(std::filesystem::path(*out_dir) / ("verify_" + suite + ".json"));
            write_suite_json(js, rep, iso_timestamp());
        }
        return rep.all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace droplet
