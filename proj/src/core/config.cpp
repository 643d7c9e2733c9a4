#include "config.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "csvio.hpp"

namespace mln {

using nlohmann::json;

const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Operators: return "operators";
        case ExperimentKind::Elliptic: return "elliptic";
        case ExperimentKind::Parabolic: return "parabolic";
        case ExperimentKind::Spectrum: return "spectrum";
        case ExperimentKind::Control: return "control";
        case ExperimentKind::GradCheck: return "gradcheck";
        case ExperimentKind::Sweep: return "sweep";
    }
    return "?";
}

std::optional<ExperimentKind> experiment_from_name(const std::string& name) {
    for (ExperimentKind k :
         {ExperimentKind::Operators, ExperimentKind::Elliptic,
          ExperimentKind::Parabolic, ExperimentKind::Spectrum,
          ExperimentKind::Control, ExperimentKind::GradCheck,
          ExperimentKind::Sweep})
        if (name == experiment_name(k)) return k;
    return std::nullopt;
}

namespace {

// Collects every validation problem before failing.
struct Validator {
    std::vector<std::string> errors;
    const std::filesystem::path& base_dir;

    void fail(const std::string& msg) { errors.push_back(msg); }

    void check_keys(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key()))
                fail(where + ": unknown key '" + it.key() + "'");
    }

    double number(const json& obj, const std::string& where,
                  const std::string& key, double fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_number()) {
            fail(where + "." + key + " must be a number");
            return fallback;
        }
        return obj[key].get<double>();
    }

    int integer(const json& obj, const std::string& where,
                const std::string& key, int fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_number_integer()) {
            fail(where + "." + key + " must be an integer");
            return fallback;
        }
        return obj[key].get<int>();
    }

    std::string text(const json& obj, const std::string& where,
                     const std::string& key, const std::string& fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_string()) {
            fail(where + "." + key + " must be a string");
            return fallback;
        }
        return obj[key].get<std::string>();
    }

    bool boolean(const json& obj, const std::string& where,
                 const std::string& key, bool fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_boolean()) {
            fail(where + "." + key + " must be a boolean");
            return fallback;
        }
        return obj[key].get<bool>();
    }

    std::optional<Expression> expression(const json& obj,
                                         const std::string& where,
                                         const std::string& key) {
        if (!obj.contains(key)) return std::nullopt;
        if (!obj[key].is_string()) {
            fail(where + "." + key + " must be an expression string");
            return std::nullopt;
        }
        try {
            return Expression::parse(obj[key].get<std::string>());
        } catch (const ConfigError& e) {
            fail(where + "." + key + ": " + e.what());
            return std::nullopt;
        }
    }

    std::optional<std::string> csv_path(const json& obj,
                                        const std::string& where,
                                        const std::string& key) {
        if (!obj.contains(key)) return std::nullopt;
        if (!obj[key].is_string()) {
            fail(where + "." + key + " must be a path string");
            return std::nullopt;
        }
        std::filesystem::path p = obj[key].get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        if (!std::filesystem::exists(p)) {
            fail(where + "." + key + ": file does not exist: " + p.string());
            return std::nullopt;
        }
        return p.string();
    }
};

CostVariant parse_variant(Validator& v, const std::string& where,
                          const std::string& name) {
    if (name == "j1") return CostVariant::J1;
    if (name == "j2") return CostVariant::J2;
    v.fail(where + ".variant must be 'j1' or 'j2'");
    return CostVariant::J1;
}

void parse_control_section(Validator& v, const json& obj,
                           const std::string& where, ControlConfig& out) {
    v.check_keys(obj, where,
                 {"variant", "beta", "target", "target_csv", "bounds", "tol",
                  "max_iters", "init", "dump_trajectories"});
    out.variant = parse_variant(v, where, v.text(obj, where, "variant", "j1"));
    out.beta = v.number(obj, where, "beta", out.beta);
    if (!(out.beta > 0)) v.fail(where + ".beta must be > 0");
    out.target = v.expression(obj, where, "target");
    out.target_csv = v.csv_path(obj, where, "target_csv");
    out.tol = v.number(obj, where, "tol", out.tol);
    if (!(out.tol > 0)) v.fail(where + ".tol must be > 0");
    out.max_iters = v.integer(obj, where, "max_iters", out.max_iters);
    if (out.max_iters < 1) v.fail(where + ".max_iters must be >= 1");
    out.init = v.text(obj, where, "init", out.init);
    if (out.init != "zero" && out.init != "random")
        v.fail(where + ".init must be 'zero' or 'random'");
    out.dump_trajectories =
        v.boolean(obj, where, "dump_trajectories", out.dump_trajectories);
    if (obj.contains("bounds")) {
        const json& b = obj["bounds"];
        const std::string bw = where + ".bounds";
        v.check_keys(b, bw, {"u1_min", "u1_max", "u2_min", "u2_max"});
        out.bounds.u1_min = v.number(b, bw, "u1_min", out.bounds.u1_min);
        out.bounds.u1_max = v.number(b, bw, "u1_max", out.bounds.u1_max);
        out.bounds.u2_min = v.number(b, bw, "u2_min", out.bounds.u2_min);
        out.bounds.u2_max = v.number(b, bw, "u2_max", out.bounds.u2_max);
        if (out.bounds.u1_min > out.bounds.u1_max)
            v.fail(bw + ": u1_min must be <= u1_max");
        if (out.bounds.u2_min > out.bounds.u2_max)
            v.fail(bw + ": u2_min must be <= u2_max");
    }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& content,
                                   std::optional<ExperimentKind> kind_override,
                                   const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(content);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");

    Validator v{{}, base_dir};
    ExperimentConfig cfg;
    cfg.echo = root.dump(2);

    v.check_keys(root, "config",
                 {"experiment", "geometry", "s", "time", "scheme", "seed",
                  "output_dir", "trajectory_format", "operators", "elliptic",
                  "parabolic", "spectrum", "control", "gradcheck", "sweep"});

    // Experiment kind: the file key and the CLI subcommand must agree.
    std::optional<ExperimentKind> file_kind;
    if (root.contains("experiment")) {
        const std::string name = v.text(root, "config", "experiment", "");
        file_kind = experiment_from_name(name);
        if (!file_kind)
            v.fail("config.experiment: unknown experiment '" + name + "'");
    }
    if (kind_override && file_kind && *kind_override != *file_kind)
        v.fail(std::string("config.experiment '") +
               experiment_name(*file_kind) +
               "' does not match the requested subcommand '" +
               experiment_name(*kind_override) + "'");
    if (kind_override)
        cfg.kind = *kind_override;
    else if (file_kind)
        cfg.kind = *file_kind;
    else
        v.fail("config.experiment is required when no subcommand names it");

    if (root.contains("geometry")) {
        const json& gj = root["geometry"];
        v.check_keys(gj, "geometry",
                     {"x_left", "x_right", "n_interior", "collar_width"});
        cfg.geometry.x_left = v.number(gj, "geometry", "x_left", 0.0);
        cfg.geometry.x_right = v.number(gj, "geometry", "x_right", 1.0);
        cfg.geometry.n_interior = v.integer(gj, "geometry", "n_interior", 64);
        cfg.geometry.collar_width =
            v.number(gj, "geometry", "collar_width", 1.0);
        if (!(cfg.geometry.x_left < cfg.geometry.x_right))
            v.fail("geometry: x_left must be < x_right");
        if (cfg.geometry.n_interior < 4)
            v.fail("geometry.n_interior must be >= 4");
        if (!(cfg.geometry.collar_width > 0))
            v.fail("geometry.collar_width must be > 0");
    }

    cfg.s = v.number(root, "config", "s", cfg.s);
    if (!(cfg.s > 0.0 && cfg.s < 1.0))
        v.fail("config.s must lie in the open interval (0,1)");
    else if (cfg.s > 0.75)
        cfg.warnings.push_back(
            "s = " + std::to_string(cfg.s) +
            " is above 3/4: the very-weak (transposition) theory backing the "
            "boundary/exterior data interpretation is proved only for s <= "
            "3/4; the discrete solves remain well-defined");

    if (root.contains("time")) {
        const json& tj = root["time"];
        v.check_keys(tj, "time", {"t_final", "n_steps"});
        cfg.time.t_final = v.number(tj, "time", "t_final", 1.0);
        cfg.time.n_steps = v.integer(tj, "time", "n_steps", 50);
        if (!(cfg.time.t_final > 0)) v.fail("time.t_final must be > 0");
        if (cfg.time.n_steps < 1) v.fail("time.n_steps must be >= 1");
    }

    if (root.contains("scheme")) {
        const json& sj = root["scheme"];
        v.check_keys(sj, "scheme", {"theta"});
        cfg.scheme.theta = v.number(sj, "scheme", "theta", 1.0);
        if (!(cfg.scheme.theta >= 0.5 && cfg.scheme.theta <= 1.0))
            v.fail("scheme.theta must lie in [0.5, 1]");
    }

    if (root.contains("seed")) {
        const json& sj = root["seed"];
        if (sj.is_number_unsigned())
            cfg.seed = sj.get<std::uint64_t>();
        else if (sj.is_number_integer() && sj.get<std::int64_t>() >= 0)
            cfg.seed = static_cast<std::uint64_t>(sj.get<std::int64_t>());
        else
            v.fail("config.seed must be a nonnegative integer");
    }
    cfg.output_dir = v.text(root, "config", "output_dir", "");
    cfg.trajectory_format =
        v.text(root, "config", "trajectory_format", "long");
    if (cfg.trajectory_format != "long" && cfg.trajectory_format != "frames")
        v.fail("config.trajectory_format must be 'long' or 'frames'");

    if (root.contains("operators")) {
        const json& oj = root["operators"];
        v.check_keys(oj, "operators", {"dump_matrices", "eigenpairs"});
        cfg.operators.dump_matrices =
            v.boolean(oj, "operators", "dump_matrices", false);
        cfg.operators.eigenpairs = v.integer(oj, "operators", "eigenpairs", 3);
        if (cfg.operators.eigenpairs < 1)
            v.fail("operators.eigenpairs must be >= 1");
    }

    if (root.contains("elliptic")) {
        const json& ej = root["elliptic"];
        v.check_keys(ej, "elliptic",
                     {"mode", "f", "f_csv", "g1_left", "g1_right", "g2",
                      "g2_csv", "test_count"});
        cfg.elliptic.mode = v.text(ej, "elliptic", "mode", "auto");
        if (cfg.elliptic.mode != "auto" && cfg.elliptic.mode != "weak" &&
            cfg.elliptic.mode != "lifted" && cfg.elliptic.mode != "very_weak")
            v.fail("elliptic.mode must be auto|weak|lifted|very_weak");
        cfg.elliptic.f = v.expression(ej, "elliptic", "f");
        cfg.elliptic.f_csv = v.csv_path(ej, "elliptic", "f_csv");
        cfg.elliptic.g1_left = v.number(ej, "elliptic", "g1_left", 0.0);
        cfg.elliptic.g1_right = v.number(ej, "elliptic", "g1_right", 0.0);
        cfg.elliptic.g2 = v.expression(ej, "elliptic", "g2");
        cfg.elliptic.g2_csv = v.csv_path(ej, "elliptic", "g2_csv");
        cfg.elliptic.test_count = v.integer(ej, "elliptic", "test_count", 8);
        if (cfg.elliptic.test_count < 0)
            v.fail("elliptic.test_count must be >= 0");
    }

    if (root.contains("parabolic")) {
        const json& pj = root["parabolic"];
        v.check_keys(pj, "parabolic",
                     {"u1_left", "u1_right", "u2", "f", "psi0"});
        cfg.parabolic.u1_left = v.expression(pj, "parabolic", "u1_left");
        cfg.parabolic.u1_right = v.expression(pj, "parabolic", "u1_right");
        cfg.parabolic.u2 = v.expression(pj, "parabolic", "u2");
        cfg.parabolic.f = v.expression(pj, "parabolic", "f");
        cfg.parabolic.psi0 = v.expression(pj, "parabolic", "psi0");
    }

    if (root.contains("spectrum")) {
        const json& sj = root["spectrum"];
        v.check_keys(sj, "spectrum", {"k", "audit_trials"});
        cfg.spectrum.k = v.integer(sj, "spectrum", "k", 3);
        if (cfg.spectrum.k < 1) v.fail("spectrum.k must be >= 1");
        if (cfg.spectrum.k > cfg.geometry.n_interior - 1)
            v.fail("spectrum.k must be <= the interior node count " +
                   std::to_string(cfg.geometry.n_interior - 1));
        cfg.spectrum.audit_trials =
            v.integer(sj, "spectrum", "audit_trials", 20);
        if (cfg.spectrum.audit_trials < 0)
            v.fail("spectrum.audit_trials must be >= 0");
    }

    if (root.contains("control"))
        parse_control_section(v, root["control"], "control", cfg.control);

    if (root.contains("gradcheck")) {
        const json& gj = root["gradcheck"];
        v.check_keys(gj, "gradcheck",
                     {"variants", "s_values", "epsilon", "trials",
                      "tolerance"});
        if (gj.contains("variants")) {
            cfg.gradcheck.variants.clear();
            for (const auto& item : gj["variants"])
                cfg.gradcheck.variants.push_back(parse_variant(
                    v, "gradcheck", item.is_string() ? item.get<std::string>()
                                                     : std::string()));
        }
        if (gj.contains("s_values")) {
            cfg.gradcheck.s_values.clear();
            for (const auto& item : gj["s_values"]) {
                if (!item.is_number()) {
                    v.fail("gradcheck.s_values must be numbers");
                    continue;
                }
                const double s = item.get<double>();
                if (!(s > 0 && s < 1))
                    v.fail("gradcheck.s_values must lie in (0,1)");
                cfg.gradcheck.s_values.push_back(s);
            }
        }
        cfg.gradcheck.epsilon = v.number(gj, "gradcheck", "epsilon", 1e-5);
        if (!(cfg.gradcheck.epsilon > 0))
            v.fail("gradcheck.epsilon must be > 0");
        cfg.gradcheck.trials = v.integer(gj, "gradcheck", "trials", 3);
        if (cfg.gradcheck.trials < 1) v.fail("gradcheck.trials must be >= 1");
        cfg.gradcheck.tolerance = v.number(gj, "gradcheck", "tolerance", 1e-4);
    }

    if (root.contains("sweep")) {
        const json& sj = root["sweep"];
        v.check_keys(sj, "sweep", {"betas", "control"});
        if (sj.contains("betas")) {
            cfg.sweep.betas.clear();
            for (const auto& item : sj["betas"]) {
                if (!item.is_number() || !(item.get<double>() > 0)) {
                    v.fail("sweep.betas must be positive numbers");
                    continue;
                }
                cfg.sweep.betas.push_back(item.get<double>());
            }
            if (cfg.sweep.betas.empty()) v.fail("sweep.betas must be nonempty");
        }
        if (sj.contains("control"))
            parse_control_section(v, sj["control"], "sweep.control",
                                  cfg.sweep.control);
    }

    if (!v.errors.empty()) {
        std::ostringstream msg;
        msg << "config validation failed with " << v.errors.size()
            << " problem(s):";
        for (const auto& e : v.errors) msg << "\n  - " << e;
        throw ConfigError(msg.str());
    }
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path,
                              std::optional<ExperimentKind> kind_override) {
    return parse_config_text(read_text_file(path), kind_override,
                             path.has_parent_path() ? path.parent_path()
                                                    : ".");
}

}  // namespace mln
