#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "droplet/cli_io.hpp"

namespace droplet {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Real parse_real(const std::string& key, const std::string& raw) {
    try {
        size_t used = 0;
        const Real v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        if (!std::isfinite(v)) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a finite number: '" + raw + "'");
    }
}

long parse_int(const std::string& key, const std::string& raw) {
    try {
        size_t used = 0;
        const long v = std::stol(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not an integer: '" + raw + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& raw) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + raw + "'");
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    // kernel parameters are collected and rebuilt once at the end
    Real k_width = cfg.step.kernel.width();
    Real k_shift = cfg.step.kernel.shift() / cfg.step.kernel.width();
    Real k_lateral = cfg.step.kernel.lateral() / cfg.step.kernel.width();
    int k_order = cfg.step.kernel.order();
    bool kernel_touched = false;

    std::string line, section;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            const std::set<std::string> known = {"grid", "step", "initial", "run"};
            require(known.count(section) > 0, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos,
                "line " + std::to_string(lineno) + ": expected key = value");
        const std::string bare = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string key = section.empty() ? bare : section + "." + bare;
        require(!val.empty(), "key '" + key + "': empty value");
        require(seen.insert(key).second, "duplicate key '" + key + "'");

        if (key == "schema_version") {
            require(parse_int(key, val) == kSchemaVersion,
                    "key 'schema_version': unsupported version " + val);
        } else if (key == "grid.n_theta") {
            cfg.n_theta = static_cast<int>(parse_int(key, val));
        } else if (key == "grid.n_rho") {
            cfg.n_rho = static_cast<int>(parse_int(key, val));
        } else if (key == "step.eps") {
            cfg.step.eps = parse_real(key, val);
        } else if (key == "step.k") {
            cfg.step.k = static_cast<int>(parse_int(key, val));
        } else if (key == "step.taylor_floor") {
            cfg.step.taylor_floor = parse_real(key, val);
        } else if (key == "step.thickness_min") {
            cfg.step.thickness_min = parse_real(key, val);
        } else if (key == "step.a_max") {
            cfg.step.a_max = parse_real(key, val);
        } else if (key == "step.b_budget") {
            cfg.step.b_budget = parse_real(key, val);
        } else if (key == "step.max_steps") {
            cfg.step.max_steps = static_cast<int>(parse_int(key, val));
        } else if (key == "step.c_margin") {
            cfg.step.c_margin = parse_real(key, val);
        } else if (key == "step.div_tol") {
            cfg.step.div_tol = parse_real(key, val);
        } else if (key == "step.mean_tol") {
            cfg.step.mean_tol = parse_real(key, val);
        } else if (key == "step.j_half") {
            cfg.step.j_half_override = static_cast<int>(parse_int(key, val));
        } else if (key == "step.kernel_order") {
            k_order = static_cast<int>(parse_int(key, val));
            kernel_touched = true;
        } else if (key == "step.kernel_width") {
            k_width = parse_real(key, val);
            kernel_touched = true;
        } else if (key == "step.kernel_shift_ratio") {
            k_shift = parse_real(key, val);
            kernel_touched = true;
        } else if (key == "step.kernel_lateral_frac") {
            k_lateral = parse_real(key, val);
            kernel_touched = true;
        } else if (key == "initial.type") {
            if (val == "affine")
                cfg.init.kind = InitialCondition::Kind::Affine;
            else if (val == "rotation")
                cfg.init.kind = InitialCondition::Kind::Rotation;
            else if (val == "file")
                cfg.init.kind = InitialCondition::Kind::File;
            else
                throw ConfigError("key 'initial.type': unknown kind '" + val + "'");
        } else if (key == "initial.a11") {
            cfg.init.A(0, 0) = parse_real(key, val);
        } else if (key == "initial.a12") {
            cfg.init.A(0, 1) = parse_real(key, val);
        } else if (key == "initial.a21") {
            cfg.init.A(1, 0) = parse_real(key, val);
        } else if (key == "initial.a22") {
            cfg.init.A(1, 1) = parse_real(key, val);
        } else if (key == "initial.q11") {
            cfg.init.Q(0, 0) = parse_real(key, val);
        } else if (key == "initial.q12") {
            cfg.init.Q(0, 1) = parse_real(key, val);
            cfg.init.Q(1, 0) = cfg.init.Q(0, 1);
        } else if (key == "initial.q22") {
            cfg.init.Q(1, 1) = parse_real(key, val);
        } else if (key == "initial.omega") {
            cfg.init.omega = parse_real(key, val);
        } else if (key == "initial.path") {
            cfg.init.path = val;
        } else if (key == "run.horizon") {
            cfg.horizon = parse_real(key, val);
        } else if (key == "run.out_dir") {
            cfg.out_dir = val;
        } else if (key == "run.snapshot_every") {
            cfg.snapshot_every = static_cast<int>(parse_int(key, val));
        } else if (key == "run.compare_stride") {
            cfg.compare_stride = static_cast<int>(parse_int(key, val));
        } else if (key == "run.quiet") {
            cfg.quiet = parse_bool(key, val);
        } else if (key == "run.seed") {
            const long s = parse_int(key, val);
            require(s >= 0, "key 'run.seed': must be nonnegative");
            cfg.seed = static_cast<unsigned>(s);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }

    // validation, naming the offending key
    require(cfg.n_theta >= 32 && cfg.n_theta % 2 == 0,
            "key 'grid.n_theta': must be even and >= 32");
    require(cfg.n_rho >= 8, "key 'grid.n_rho': must be >= 8");
    require(cfg.step.eps > 0, "key 'step.eps': must be positive");
    require(cfg.step.k >= 1, "key 'step.k': must be >= 1");
    require(cfg.step.max_steps >= 1, "key 'step.max_steps': must be >= 1");
    require(cfg.step.div_tol > 0, "key 'step.div_tol': must be positive");
    require(cfg.step.mean_tol > 0, "key 'step.mean_tol': must be positive");
    require(cfg.step.thickness_min > 0, "key 'step.thickness_min': must be positive");
    require(cfg.step.a_max > 0, "key 'step.a_max': must be positive");
    require(cfg.step.b_budget > 0, "key 'step.b_budget': must be positive");
    require(cfg.step.c_margin >= 0, "key 'step.c_margin': must be nonnegative");
    require(cfg.horizon >= 0 && std::isfinite(cfg.horizon),
            "key 'run.horizon': must be finite and nonnegative");
    require(cfg.snapshot_every >= 0, "key 'run.snapshot_every': must be nonnegative");
    require(cfg.compare_stride >= 1, "key 'run.compare_stride': must be >= 1");
    if (cfg.init.kind == InitialCondition::Kind::File)
        require(!cfg.init.path.empty(), "key 'initial.path': required for type = file");
    if (kernel_touched) {
        require(k_order >= 1, "key 'step.kernel_order': must be >= 1");
        require(k_width > 0, "key 'step.kernel_width': must be positive");
        require(k_shift > 1, "key 'step.kernel_shift_ratio': must exceed 1");
        require(k_lateral > 0, "key 'step.kernel_lateral_frac': must be positive");
        cfg.step.kernel = MomentKernel(k_order, k_width, k_shift, k_lateral);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return parse_config(in);
}

FluidState initial_state(const RunConfig& cfg) {
    switch (cfg.init.kind) {
        case InitialCondition::Kind::Affine: {
            try {
                return to_fluid_state(AffineState(cfg.init.A, cfg.init.Q), cfg.n_theta,
                                      cfg.n_rho);
            } catch (const ConfigError& e) {
                throw ConfigError(std::string("keys 'initial.a*/q*': ") + e.what());
            }
        }
        case InitialCondition::Kind::Rotation: {
            const ChartPtr c = make_chart(BoundaryGraph(Vec::Zero(cfg.n_theta)), cfg.n_rho);
            const Real om = cfg.init.omega;
            return FluidState(make_vector_field(
                c, [om](Real x, Real y) { return Vec2(-om * y, om * x); }), 0.0);
        }
        case InitialCondition::Kind::File: {
            std::ifstream in(cfg.init.path);
            if (!in) throw ConfigError("key 'initial.path': cannot read '" + cfg.init.path + "'");
            return read_snapshot(in, cfg.step.div_tol);
        }
    }
    throw ConfigError("key 'initial.type': unset");
}

}  // namespace droplet
