#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "control.hpp"
#include "expr.hpp"

namespace mln {

enum class ExperimentKind {
    Operators,
    Elliptic,
    Parabolic,
    Spectrum,
    Control,
    GradCheck,
    Sweep,
};

const char* experiment_name(ExperimentKind k);
std::optional<ExperimentKind> experiment_from_name(const std::string& name);

struct GeometryConfig {
    double x_left = 0.0, x_right = 1.0;
    int n_interior = 64;
    double collar_width = 1.0;
};

struct TimeConfig {
    double t_final = 1.0;
    int n_steps = 50;
};

struct EllipticConfig {
    std::string mode = "auto";  // auto | weak | lifted | very_weak
    std::optional<Expression> f;
    std::optional<std::string> f_csv;
    double g1_left = 0.0, g1_right = 0.0;
    std::optional<Expression> g2;
    std::optional<std::string> g2_csv;
    int test_count = 8;
};

struct ParabolicConfig {
    std::optional<Expression> u1_left, u1_right;  // functions of t
    std::optional<Expression> u2;                 // function of (x, t)
    std::optional<Expression> f;                  // function of (x, t)
    std::optional<Expression> psi0;               // function of x
};

struct SpectrumConfig {
    int k = 3;
    int audit_trials = 20;
};

struct BoundsConfig {
    double u1_min = -std::numeric_limits<double>::infinity();
    double u1_max = std::numeric_limits<double>::infinity();
    double u2_min = -std::numeric_limits<double>::infinity();
    double u2_max = std::numeric_limits<double>::infinity();
};

struct ControlConfig {
    CostVariant variant = CostVariant::J1;
    double beta = 1.0;
    std::optional<Expression> target;  // zd1(x,t) or zd2(x)
    std::optional<std::string> target_csv;
    BoundsConfig bounds;
    double tol = 1e-8;
    int max_iters = 2000;
    std::string init = "zero";  // zero | random
    bool dump_trajectories = true;
};

struct GradCheckConfig {
    std::vector<CostVariant> variants{CostVariant::J1, CostVariant::J2};
    std::vector<double> s_values{0.25, 0.5, 0.75};
    double epsilon = 1e-5;
    int trials = 3;
    double tolerance = 1e-4;
};

struct SweepConfig {
    std::vector<double> betas{0.1, 1.0, 10.0, 100.0};
    ControlConfig control;
};

struct OperatorsConfig {
    bool dump_matrices = false;
    int eigenpairs = 3;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Spectrum;
    GeometryConfig geometry;
    double s = 0.5;
    TimeConfig time;
    SchemeConfig scheme;
    std::uint64_t seed = 0;
    std::string output_dir;            // empty: resolved by the runner
    std::string trajectory_format = "long";  // long | frames

    OperatorsConfig operators;
    EllipticConfig elliptic;
    ParabolicConfig parabolic;
    SpectrumConfig spectrum;
    ControlConfig control;
    GradCheckConfig gradcheck;
    SweepConfig sweep;

    std::vector<std::string> warnings;  // e.g. the s > 3/4 theory note
    std::string echo;                   // the raw config text
};

// Parses and fully validates a JSON config file.  Every validation problem
// is collected; on failure the ConfigError message lists all of them.
// `kind_override` comes from the CLI subcommand and must agree with the
// file's "experiment" key when both are present.
ExperimentConfig parse_config(const std::filesystem::path& path,
                              std::optional<ExperimentKind> kind_override);

ExperimentConfig parse_config_text(const std::string& text,
                                   std::optional<ExperimentKind> kind_override,
                                   const std::filesystem::path& base_dir);

}  // namespace mln
