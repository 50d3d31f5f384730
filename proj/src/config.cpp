#include "aplab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace aplab {

ConfigError::ConfigError(std::string message, std::string field, int line)
    : std::runtime_error(std::move(message)), field_(std::move(field)), line_(line) {}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid number '" + v + "' for key '" + key + "'", key, line);
    }
}

int parse_int(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer '" + v + "' for key '" + key + "'", key, line);
    }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid boolean '" + v + "' for key '" + key + "'", key, line);
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key,
                                      int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, key, line));
    }
    if (out.empty())
        throw ConfigError("empty list for key '" + key + "'", key, line);
    return out;
}

std::vector<std::pair<double, double>> parse_pair_list(const std::string& v,
                                                       const std::string& key,
                                                       int line) {
    // "x0:v0, x1:v1, ..."
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("expected x:value pair in '" + item + "' for key '" +
                                  key + "'",
                              key, line);
        out.emplace_back(parse_double(trim(item.substr(0, colon)), key, line),
                         parse_double(trim(item.substr(colon + 1)), key, line));
    }
    if (out.size() < 2)
        throw ConfigError("need at least two x:value pairs for key '" + key + "'",
                          key, line);
    std::sort(out.begin(), out.end());
    return out;
}

void set_forcing_key(ForcingSpec& f, const std::string& sub, const std::string& value,
                     const std::string& key, int line) {
    if (sub == "kind") {
        if (value == "constant")
            f.kind = ForcingSpec::Kind::constant;
        else if (value == "table")
            f.kind = ForcingSpec::Kind::table;
        else if (value == "file")
            f.kind = ForcingSpec::Kind::file;
        else
            throw ConfigError("unknown forcing kind '" + value + "'", key, line);
    } else if (sub == "value") {
        f.value = parse_double(value, key, line);
    } else if (sub == "table") {
        f.table = parse_pair_list(value, key, line);
    } else if (sub == "file") {
        f.file = value;
    } else {
        throw ConfigError("unknown key '" + key + "'", key, line);
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

RunConfig parse_config(std::istream& in, const std::string& source_name) {
    RunConfig cfg;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string text = trim(raw);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(line) +
                                  ": expected 'key = value'",
                              "", line);
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(source_name + ":" + std::to_string(line) +
                                  ": empty key or value",
                              key, line);

        if (key == "mesh.left") cfg.mesh_left = parse_double(value, key, line);
        else if (key == "mesh.right") cfg.mesh_right = parse_double(value, key, line);
        else if (key == "mesh.n_cells") cfg.n_cells = parse_int(value, key, line);
        else if (key == "mesh.grading") cfg.grading = parse_double(value, key, line);
        else if (key == "mesh.radial_dimension")
            cfg.radial_dimension = parse_int(value, key, line);
        else if (key == "alpha") cfg.alpha = parse_double(value, key, line);
        else if (key == "f.kind") cfg.f_kind = value;
        else if (key == "f.a") cfg.f_a = parse_double(value, key, line);
        else if (key == "f.b") cfg.f_b = parse_double(value, key, line);
        else if (key == "f.table_file") cfg.f_table_file = value;
        else if (key == "f.c_f") cfg.f_constants.c_f = parse_double(value, key, line);
        else if (key == "f.c1") cfg.f_constants.c1 = parse_double(value, key, line);
        else if (key == "f.c2") cfg.f_constants.c2 = parse_double(value, key, line);
        else if (key == "f.c3") cfg.f_constants.c3 = parse_double(value, key, line);
        else if (key == "f.c4") cfg.f_constants.c4 = parse_double(value, key, line);
        else if (key == "f.u_check") cfg.u_check = parse_double(value, key, line);
        else if (key.rfind("phi.", 0) == 0)
            set_forcing_key(cfg.phi, key.substr(4), value, key, line);
        else if (key.rfind("h.", 0) == 0)
            set_forcing_key(cfg.h, key.substr(2), value, key, line);
        else if (key == "run.t") cfg.t = parse_double(value, key, line);
        else if (key == "run.t_grid") cfg.t_grid = parse_double_list(value, key, line);
        else if (key == "run.seed")
            cfg.seed = static_cast<std::uint64_t>(parse_int(value, key, line));
        else if (key == "run.jobs") cfg.jobs = parse_int(value, key, line);
        else if (key == "run.verbose") cfg.verbose = parse_bool(value, key, line);
        else if (key == "solver.tol_residual")
            cfg.solve.tol_residual = parse_double(value, key, line);
        else if (key == "solver.max_iters")
            cfg.solve.max_iters = parse_int(value, key, line);
        else if (key == "solver.damping")
            cfg.solve.damping = parse_double(value, key, line);
        else if (key == "solver.deflation_shift")
            cfg.solve.deflation_shift = parse_double(value, key, line);
        else if (key == "solver.deflation_power")
            cfg.solve.deflation_power = parse_double(value, key, line);
        else if (key == "solver.divergence_ceiling")
            cfg.solve.divergence_ceiling = parse_double(value, key, line);
        else if (key == "solver.newton_starts")
            cfg.solve.newton_starts = parse_int(value, key, line);
        else if (key == "linear.tol") cfg.linear_tol = parse_double(value, key, line);
        else if (key == "region.rho_plus")
            cfg.region.rho_plus = parse_double(value, key, line);
        else if (key == "region.rho_minus")
            cfg.region.rho_minus = parse_double(value, key, line);
        else if (key == "region.R") cfg.region.R = parse_double(value, key, line);
        else if (key == "output.dir") cfg.out_dir = value;
        else if (key == "output.probe_x") cfg.probe_x = parse_double(value, key, line);
        else if (key == "output.dump_matrices")
            cfg.dump_matrices = parse_bool(value, key, line);
        else if (key == "mms.refinements") {
            cfg.mms_refinements.clear();
            for (double v : parse_double_list(value, key, line))
                cfg.mms_refinements.push_back(static_cast<int>(v));
        } else {
            throw ConfigError(source_name + ":" + std::to_string(line) +
                                  ": unknown key '" + key + "'",
                              key, line);
        }
    }
    return cfg;
}

std::optional<std::string> builtin_config(const std::string& name) {
    if (name == "pl11") {
        return std::string(
            "# built-in model pl11\n"
            "mesh.left = -1\n"
            "mesh.right = 1\n"
            "mesh.n_cells = 400\n"
            "mesh.grading = 2\n"
            "mesh.radial_dimension = 1\n"
            "alpha = 0.5\n"
            "f.kind = piecewise_linear\n"
            "f.a = 1\n"
            "f.b = 1\n"
            "phi.kind = constant\n"
            "phi.value = 1\n"
            "h.kind = constant\n"
            "h.value = 0\n"
            "run.t = -1\n"
            "region.rho_plus = 0.5\n"
            "region.rho_minus = 2\n"
            "region.R = 10\n");
    }
    if (name == "smoothabs") {
        return std::string(
            "# built-in model smoothabs\n"
            "mesh.left = -1\n"
            "mesh.right = 1\n"
            "mesh.n_cells = 400\n"
            "mesh.grading = 2\n"
            "mesh.radial_dimension = 1\n"
            "alpha = 0.5\n"
            "f.kind = smooth_abs\n"
            "phi.kind = constant\n"
            "phi.value = 1\n"
            "h.kind = constant\n"
            "h.value = 0\n"
            "run.t = -1\n"
            "region.rho_plus = 1\n"
            "region.rho_minus = 4\n"
            "region.R = 10\n");
    }
    return std::nullopt;
}

RunConfig load_config(const std::string& path_or_model) {
    if (auto text = builtin_config(path_or_model)) {
        std::istringstream in(*text);
        return parse_config(in, "<builtin:" + path_or_model + ">");
    }
    std::ifstream in(path_or_model);
    if (!in)
        throw ConfigError("cannot open config file '" + path_or_model +
                          "' (and it is not a built-in model name)");
    return parse_config(in, path_or_model);
}

std::vector<double> sample_forcing(const ForcingSpec& forcing, const Mesh& mesh) {
    std::vector<double> out(mesh.n_nodes());
    switch (forcing.kind) {
    case ForcingSpec::Kind::constant:
        std::fill(out.begin(), out.end(), forcing.value);
        break;
    case ForcingSpec::Kind::table:
    case ForcingSpec::Kind::file: {
        std::vector<std::pair<double, double>> table = forcing.table;
        if (forcing.kind == ForcingSpec::Kind::file) {
            std::ifstream in(forcing.file);
            if (!in)
                throw ConfigError("cannot open forcing file '" + forcing.file + "'");
            table.clear();
            double x, v;
            while (in >> x >> v) table.emplace_back(x, v);
            if (table.size() < 2)
                throw ConfigError("forcing file '" + forcing.file +
                                  "' needs at least two 'x value' rows");
            std::sort(table.begin(), table.end());
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double x = mesh.nodes[i];
            // Piecewise-linear interpolation, clamped at the ends.
            if (x <= table.front().first) {
                out[i] = table.front().second;
            } else if (x >= table.back().first) {
                out[i] = table.back().second;
            } else {
                std::size_t j = 1;
                while (table[j].first < x) ++j;
                const auto& [x0, v0] = table[j - 1];
                const auto& [x1, v1] = table[j];
                out[i] = v0 + (v1 - v0) * (x - x0) / (x1 - x0);
            }
        }
        break;
    }
    }
    return out;
}

Nonlinearity make_nonlinearity(const RunConfig& config) {
    if (config.f_kind == "piecewise_linear")
        return Nonlinearity::piecewise_linear(config.f_a, config.f_b);
    if (config.f_kind == "smooth_abs") return Nonlinearity::smooth_abs();
    if (config.f_kind == "table") {
        std::ifstream in(config.f_table_file);
        if (!in)
            throw ConfigError("cannot open f.table_file '" + config.f_table_file + "'");
        std::vector<double> us, fs;
        double u, f;
        while (in >> u >> f) {
            us.push_back(u);
            fs.push_back(f);
        }
        return Nonlinearity::table(std::move(us), std::move(fs), config.f_constants);
    }
    throw ConfigError("unknown f.kind '" + config.f_kind + "'", "f.kind");
}

BuiltProblem build_problem(const RunConfig& config) {
    Mesh mesh;
    try {
        mesh = build_mesh(config.mesh_left, config.mesh_right, config.n_cells,
                          config.grading, config.radial_dimension);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("mesh: ") + e.what(), "mesh");
    }
    if (!(config.alpha >= 0.0 && config.alpha < 2.0))
        throw ConfigError("alpha must lie in [0, 2)", "alpha");

    ProblemSpec spec;
    spec.mesh = mesh;
    spec.alpha = config.alpha;
    spec.f = make_nonlinearity(config);
    spec.phi = sample_forcing(config.phi, mesh);
    spec.h = sample_forcing(config.h, mesh);
    try {
        spec.validate();
        config.solve.validate();
        config.region.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const CertificationReport cert = spec.f.certify(config.u_check);
    if (!cert.passed)
        throw ConfigError("nonlinearity failed the sampled hypothesis certification",
                          "f");

    WeightedOperator op = assemble(mesh, config.alpha);
    return BuiltProblem{std::move(mesh), std::move(op), std::move(spec)};
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> kv;
    auto add = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
    add("mesh.left", format_double(mesh_left));
    add("mesh.right", format_double(mesh_right));
    add("mesh.n_cells", std::to_string(n_cells));
    add("mesh.grading", format_double(grading));
    add("mesh.radial_dimension", std::to_string(radial_dimension));
    add("alpha", format_double(alpha));
    add("f.kind", f_kind);
    if (f_kind == "piecewise_linear") {
        add("f.a", format_double(f_a));
        add("f.b", format_double(f_b));
    }
    if (f_kind == "table") add("f.table_file", f_table_file);
    auto add_forcing = [&](const char* name, const ForcingSpec& f) {
        switch (f.kind) {
        case ForcingSpec::Kind::constant:
            add(std::string(name) + ".kind", "constant");
            add(std::string(name) + ".value", format_double(f.value));
            break;
        case ForcingSpec::Kind::table:
            add(std::string(name) + ".kind", "table");
            break;
        case ForcingSpec::Kind::file:
            add(std::string(name) + ".kind", "file");
            add(std::string(name) + ".file", f.file);
            break;
        }
    };
    add_forcing("phi", phi);
    add_forcing("h", h);
    add("run.t", format_double(t));
    add("run.seed", std::to_string(seed));
    add("run.jobs", std::to_string(jobs));
    add("solver.tol_residual", format_double(solve.tol_residual));
    add("solver.max_iters", std::to_string(solve.max_iters));
    add("solver.damping", format_double(solve.damping));
    add("solver.deflation_shift", format_double(solve.deflation_shift));
    add("solver.deflation_power", format_double(solve.deflation_power));
    add("solver.divergence_ceiling", format_double(solve.divergence_ceiling));
    add("solver.newton_starts", std::to_string(solve.newton_starts));
    add("linear.tol", format_double(linear_tol));
    add("region.rho_plus", format_double(region.rho_plus));
    add("region.rho_minus", format_double(region.rho_minus));
    add("region.R", format_double(region.R));
    add("output.probe_x", format_double(probe_x));
    return kv;
}

} // namespace aplab
