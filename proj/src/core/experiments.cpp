#include "experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "csvio.hpp"
#include "elliptic.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace mln {

namespace {

namespace fs = std::filesystem;

struct Workspace {
    std::shared_ptr<const Geometry> geom;
    MixedStiffness K;
    fs::path dir;
    std::vector<Check> checks;
    std::ostringstream report;
};

Workspace make_workspace(const ExperimentConfig& cfg, const fs::path& dir) {
    Workspace ws;
    ws.geom = std::make_shared<Geometry>(
        Geometry::build(cfg.geometry.x_left, cfg.geometry.x_right,
                        cfg.geometry.n_interior, cfg.geometry.collar_width));
    ws.K = assemble_mixed(ws.geom, cfg.s);
    ws.dir = dir;
    return ws;
}

void add_check(Workspace& ws, const std::string& name, bool pass, bool hard,
               const std::string& detail) {
    ws.checks.push_back({name, pass, hard, detail});
}

Eigen::VectorXd eval_on(const Geometry& g, Tag tag, const Expression& e,
                        double t = 0.0) {
    Eigen::VectorXd xs = g.coords(tag);
    Eigen::VectorXd out(xs.size());
    for (int i = 0; i < xs.size(); ++i) out[i] = e.eval(xs[i], t);
    return out;
}

std::string fmt(double v) { return format_number(v); }

// ---------------------------------------------------------------- operators

void run_operators(const ExperimentConfig& cfg, Workspace& ws) {
    const Geometry& g = *ws.geom;
    const MixedStiffness& K = ws.K;
    const int n = g.interior_nodes();

    const double sym = (K.A_II - K.A_II.transpose()).cwiseAbs().maxCoeff();
    add_check(ws, "symmetry", sym == 0.0, true,
              "max |A_II - A_II^T| = " + fmt(sym));

    int violations = 0;
    for (int i = 0; i < n; ++i) {
        if (!(K.A_II(i, i) > 0)) ++violations;
        for (int j = 0; j < n; ++j)
            if (j != i && K.A_II(i, j) > 0) ++violations;
    }
    violations += (K.A_Ib.array() > 0).count();
    violations += (K.A_Ic.array() > 0).count();
    add_check(ws, "m_matrix", violations == 0, true,
              std::to_string(violations) + " sign violations");

    double worst_row = 0;
    for (int i = 0; i < n; ++i) {
        const double rowsum = K.A_II.row(i).sum() + K.A_Ib.row(i).sum() +
                              K.A_Ic.row(i).sum();
        worst_row = std::max(worst_row, std::abs(rowsum - K.tail[i]) /
                                            std::max(1.0, K.A_II(i, i)));
    }
    add_check(ws, "row_sum_tail", worst_row <= 1e-10, true,
              "max relative defect = " + fmt(worst_row));

    SpectralReport rep = low_spectrum(K, std::min(cfg.operators.eigenpairs, n));
    const double lam_max = largest_eigenvalue(K.A_II);
    add_check(ws, "spectral_bounds",
              rep.eigenvalues[0] > 0 && rep.eigenvalues[0] > rep.lambda1_local,
              true,
              "lambda1 = " + fmt(rep.eigenvalues[0]) +
                  ", lambda1(local) = " + fmt(rep.lambda1_local) +
                  ", lambda_max = " + fmt(lam_max));

    ws.report << "operator diagnostics\n"
              << "  s = " << fmt(K.s) << ", C_{1,s} = " << fmt(K.C) << "\n"
              << "  interior nodes = " << n << ", h = " << fmt(g.h())
              << ", collar cells/side = " << g.n_collar() << "\n"
              << "  symmetry defect = " << fmt(sym) << "\n"
              << "  M-matrix violations = " << violations << "\n"
              << "  worst row-sum/tail defect (relative) = " << fmt(worst_row)
              << "\n"
              << "  tail range = [" << fmt(K.tail.minCoeff()) << ", "
              << fmt(K.tail.maxCoeff()) << "]\n"
              << "  lambda_min(mixed) = " << fmt(rep.eigenvalues[0])
              << ", lambda_min(local) = " << fmt(rep.lambda1_local)
              << ", lambda_max = " << fmt(lam_max) << "\n";
    write_text_file(ws.dir / "diagnostics.txt", ws.report.str());

    if (cfg.operators.dump_matrices) {
        write_matrix_coo(ws.dir / "a_ii.coo", K.A_II);
        write_matrix_coo(ws.dir / "a_ib.coo", K.A_Ib);
        write_matrix_coo(ws.dir / "a_ic.coo", K.A_Ic);
    }
}

// ----------------------------------------------------------------- elliptic

void run_elliptic(const ExperimentConfig& cfg, Workspace& ws,
                  std::uint64_t seed) {
    const Geometry& g = *ws.geom;
    EllipticData data;
    if (cfg.elliptic.f_csv)
        data.f = read_grid_function_csv(*cfg.elliptic.f_csv, g, Tag::Interior)
                     .values;
    else if (cfg.elliptic.f)
        data.f = eval_on(g, Tag::Interior, *cfg.elliptic.f);
    data.g1 = Eigen::Vector2d(cfg.elliptic.g1_left, cfg.elliptic.g1_right);
    if (cfg.elliptic.g2_csv)
        data.g2 =
            read_grid_function_csv(*cfg.elliptic.g2_csv, g, Tag::CollarOnly)
                .values;
    else if (cfg.elliptic.g2)
        data.g2 = eval_on(g, Tag::CollarOnly, *cfg.elliptic.g2);

    const bool homogeneous = data.g1.cwiseAbs().maxCoeff() == 0.0 &&
                             (data.g2.size() == 0 ||
                              data.g2.cwiseAbs().maxCoeff() == 0.0);
    std::string mode = cfg.elliptic.mode;
    if (mode == "auto")
        mode = homogeneous ? "weak"
                           : (data.compatible(g) ? "lifted" : "very_weak");

    GridFunction w;
    if (mode == "weak") {
        if (!homogeneous)
            throw ConfigError("elliptic.mode=weak requires zero g1 and g2");
        w = solve_weak(ws.K, data.f.size() ? data.f
                                           : Eigen::VectorXd::Zero(
                                                 g.interior_nodes()));
    } else if (mode == "lifted") {
        w = solve_lifted(ws.K, data);
    } else {
        w = solve_very_weak(ws.K, data);
    }

    // Residual of the interior linear system.
    GridFunction w_I = restrict_to(g, w, Tag::Interior);
    Eigen::VectorXd rhs =
        (data.f.size() ? data.f : Eigen::VectorXd::Zero(g.interior_nodes())) -
        ws.K.A_Ib * data.g1 -
        ws.K.A_Ic * (data.g2.size() ? data.g2
                                    : Eigen::VectorXd::Zero(g.collar_nodes()));
    const double resid = (ws.K.A_II * w_I.values - rhs).norm() /
                         std::max(1e-300, rhs.norm());
    add_check(ws, "linear_residual", resid <= 1e-10, true,
              "relative residual = " + fmt(resid));

    const double trans = transposition_residual(ws.K, w, data,
                                                cfg.elliptic.test_count, seed);
    add_check(ws, "transposition_residual", true, false,
              "max defect over " + std::to_string(cfg.elliptic.test_count) +
                  " smooth test functions = " + fmt(trans));

    // Maximum principle: with f = 0 the solution stays between the data
    // bounds extended by the zero far field.
    const bool f_zero = data.f.size() == 0 || data.f.cwiseAbs().maxCoeff() == 0;
    if (f_zero) {
        double lo = std::min({0.0, data.g1.minCoeff(),
                              data.g2.size() ? data.g2.minCoeff() : 0.0});
        double hi = std::max({0.0, data.g1.maxCoeff(),
                              data.g2.size() ? data.g2.maxCoeff() : 0.0});
        const double slack = 1e-12 * std::max(1.0, hi - lo);
        const bool inside = w.values.minCoeff() >= lo - slack &&
                            w.values.maxCoeff() <= hi + slack;
        add_check(ws, "maximum_principle", inside, true,
                  "solution in [" + fmt(w.values.minCoeff()) + ", " +
                      fmt(w.values.maxCoeff()) + "], data bounds [" +
                      fmt(lo) + ", " + fmt(hi) + "]");
    }

    write_grid_function_csv(ws.dir / "solution.csv", g, w);
    ws.report << "elliptic solve\n"
              << "  mode = " << mode
              << ", compatible = " << (data.compatible(g) ? "yes" : "no")
              << "\n"
              << "  relative linear residual = " << fmt(resid) << "\n"
              << "  transposition defect = " << fmt(trans) << "\n"
              << "  solution range = [" << fmt(w.values.minCoeff()) << ", "
              << fmt(w.values.maxCoeff()) << "]\n";
    write_text_file(ws.dir / "diagnostics.txt", ws.report.str());
}

// ---------------------------------------------------------------- parabolic

ParabolicData build_parabolic_data(const ExperimentConfig& cfg,
                                   const Geometry& g) {
    ParabolicData d;
    d.time = TimeGrid::build(cfg.time.t_final, cfg.time.n_steps);
    const int M = d.time.n_steps;
    if (cfg.parabolic.u1_left || cfg.parabolic.u1_right) {
        d.u1.resize(M + 1);
        for (int m = 0; m <= M; ++m) {
            const double t = d.time.t(m);
            d.u1[m] = Eigen::Vector2d(
                cfg.parabolic.u1_left ? cfg.parabolic.u1_left->eval(0, t) : 0,
                cfg.parabolic.u1_right ? cfg.parabolic.u1_right->eval(0, t)
                                       : 0);
        }
    }
    if (cfg.parabolic.u2) {
        d.u2.resize(M + 1);
        Eigen::VectorXd xc = g.coords(Tag::CollarOnly);
        for (int m = 0; m <= M; ++m) {
            d.u2[m].resize(xc.size());
            for (int i = 0; i < xc.size(); ++i)
                d.u2[m][i] = cfg.parabolic.u2->eval(xc[i], d.time.t(m));
        }
    }
    if (cfg.parabolic.f) {
        d.f.resize(M + 1);
        Eigen::VectorXd xi = g.coords(Tag::Interior);
        for (int m = 0; m <= M; ++m) {
            d.f[m].resize(xi.size());
            for (int i = 0; i < xi.size(); ++i)
                d.f[m][i] = cfg.parabolic.f->eval(xi[i], d.time.t(m));
        }
    }
    if (cfg.parabolic.psi0)
        d.psi0 = eval_on(g, Tag::Interior, *cfg.parabolic.psi0);
    return d;
}

void write_trajectory(const ExperimentConfig& cfg, const Workspace& ws,
                      const std::string& name, const Trajectory& traj) {
    if (cfg.trajectory_format == "frames")
        write_trajectory_frames(ws.dir / name, *ws.geom, traj);
    else
        write_trajectory_csv(ws.dir / (name + ".csv"), *ws.geom, traj);
}

void run_parabolic(const ExperimentConfig& cfg, Workspace& ws) {
    const Geometry& g = *ws.geom;
    ParabolicData d = build_parabolic_data(cfg, g);
    Trajectory traj = solve_forward(ws.K, d, cfg.scheme);

    bool finite = true;
    std::vector<std::vector<std::string>> rows;
    double energy_growth = 0, prev_energy = -1;
    for (int m = 0; m <= d.time.n_steps; ++m) {
        double mass = 0, energy = 0, lo = 1e300, sup = 0;
        for (int i = 0; i < g.interior_nodes(); ++i) {
            const double v = traj.frames[m][g.ext_interior(i)];
            if (!std::isfinite(v)) finite = false;
            mass += g.h() * v;
            energy += g.h() * v * v;
            lo = std::min(lo, v);
            sup = std::max(sup, std::abs(v));
        }
        if (prev_energy >= 0)
            energy_growth = std::max(energy_growth, energy - prev_energy);
        prev_energy = energy;
        rows.push_back({fmt(d.time.t(m)), fmt(mass), fmt(energy), fmt(lo),
                        fmt(sup)});
    }
    add_check(ws, "finite_values", finite, true,
              finite ? "all frames finite" : "non-finite value reached");

    const bool homogeneous = d.u1.empty() && d.u2.empty() && d.f.empty();
    if (homogeneous && cfg.scheme.theta == 1.0)
        add_check(ws, "energy_decay", energy_growth <= 1e-12, true,
                  "max per-step growth = " + fmt(energy_growth));
    else
        add_check(ws, "energy_decay", true, false,
                  "max per-step growth = " + fmt(energy_growth));

    write_table_csv(ws.dir / "diagnostics.csv",
                    {"t", "mass", "energy", "min", "sup_norm"}, rows);
    write_trajectory(cfg, ws, "trajectory", traj);
    ws.report << "parabolic solve\n"
              << "  theta = " << fmt(cfg.scheme.theta) << ", M = "
              << d.time.n_steps << ", tau = " << fmt(d.time.tau) << "\n"
              << "  max per-step energy growth = " << fmt(energy_growth)
              << "\n";
    write_text_file(ws.dir / "summary.txt", ws.report.str());
}

// ----------------------------------------------------------------- spectrum

void run_spectrum(const ExperimentConfig& cfg, Workspace& ws,
                  std::uint64_t seed) {
    SpectralReport rep = low_spectrum(ws.K, cfg.spectrum.k);
    std::vector<std::vector<std::string>> rows;
    for (int j = 0; j < cfg.spectrum.k; ++j)
        rows.push_back({std::to_string(j + 1), fmt(rep.eigenvalues[j]),
                        fmt(rep.residuals[j])});
    write_table_csv(ws.dir / "spectrum.csv", {"j", "lambda", "residual"},
                    rows);

    add_check(ws, "eigen_residuals", rep.residuals.maxCoeff() <= 1e-8, true,
              "max residual = " + fmt(rep.residuals.maxCoeff()));
    add_check(ws, "lambda1_positive", rep.eigenvalues[0] > 0, true,
              "lambda1 = " + fmt(rep.eigenvalues[0]));
    add_check(ws, "mixed_dominates_local",
              rep.eigenvalues[0] > rep.lambda1_local, true,
              "lambda1(mixed) = " + fmt(rep.eigenvalues[0]) +
                  " vs lambda1(local) = " + fmt(rep.lambda1_local));

    SemigroupAudit audit =
        semigroup_audit(ws.K, cfg.scheme, cfg.spectrum.audit_trials, seed);
    const bool hard = cfg.scheme.theta == 1.0;  // guaranteed only there
    add_check(ws, "audit_positivity", audit.positivity_pass, hard,
              "worst value = " + fmt(audit.positivity_worst));
    add_check(ws, "audit_contraction", audit.contraction_pass, hard,
              "worst sup-norm growth = " + fmt(audit.contraction_worst));
    add_check(ws, "audit_energy", audit.energy_pass, hard,
              "worst energy growth = " + fmt(audit.energy_worst));

    ws.report << "spectrum (k = " << cfg.spectrum.k << ")\n";
    for (int j = 0; j < cfg.spectrum.k; ++j)
        ws.report << "  lambda_" << j + 1 << " = " << fmt(rep.eigenvalues[j])
                  << "  (residual " << fmt(rep.residuals[j]) << ")\n";
    ws.report << "  lambda_1(local only) = " << fmt(rep.lambda1_local) << "\n"
              << "semigroup audit over " << audit.trials << " trials (theta = "
              << fmt(cfg.scheme.theta) << ")\n"
              << "  positivity: " << (audit.positivity_pass ? "pass" : "FAIL")
              << " (worst " << fmt(audit.positivity_worst) << ")\n"
              << "  L-infinity contraction: "
              << (audit.contraction_pass ? "pass" : "FAIL") << " (worst growth "
              << fmt(audit.contraction_worst) << ")\n"
              << "  energy decay: " << (audit.energy_pass ? "pass" : "FAIL")
              << " (worst growth " << fmt(audit.energy_worst) << ")\n"
              << "  spike sup-norm decreasing: "
              << (audit.spike_decreasing ? "yes" : "no")
              << ", max sup*sqrt(t) = " << fmt(audit.spike_sup_tsqrt) << "\n";
    write_text_file(ws.dir / "audit.txt", ws.report.str());
}

// ------------------------------------------------------------------ control

CostSpec build_cost_spec(const ControlConfig& cc, const Geometry& g,
                         const TimeGrid& time) {
    CostSpec spec;
    spec.variant = cc.variant;
    spec.beta = cc.beta;
    Eigen::VectorXd xi = g.coords(Tag::Interior);
    if (cc.variant == CostVariant::J1) {
        spec.zd1.assign(time.n_steps + 1, Eigen::VectorXd::Zero(xi.size()));
        if (cc.target_csv) {
            Eigen::VectorXd z =
                read_grid_function_csv(*cc.target_csv, g, Tag::Interior)
                    .values;
            for (auto& slice : spec.zd1) slice = z;
        } else if (cc.target) {
            for (int m = 0; m <= time.n_steps; ++m)
                for (int i = 0; i < xi.size(); ++i)
                    spec.zd1[m][i] = cc.target->eval(xi[i], time.t(m));
        }
    } else {
        if (cc.target_csv)
            spec.zd2 =
                read_grid_function_csv(*cc.target_csv, g, Tag::Interior)
                    .values;
        else if (cc.target)
            spec.zd2 = eval_on(g, Tag::Interior, *cc.target);
        else
            spec.zd2 = Eigen::VectorXd::Zero(xi.size());
    }
    return spec;
}

ControlPair random_controls(const Geometry& g, TimeGrid time,
                            std::uint64_t seed) {
    auto eng = make_engine(seed, 0x1217);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ControlPair u = ControlPair::zero(g, time);
    for (auto& v : u.u1) v = Eigen::Vector2d(dist(eng), dist(eng));
    for (auto& v : u.u2)
        for (int i = 0; i < v.size(); ++i) v[i] = dist(eng);
    return u;
}

AdmissibleSet admissible_from(const BoundsConfig& b) {
    return AdmissibleSet{b.u1_min, b.u1_max, b.u2_min, b.u2_max};
}

struct ControlRun {
    OptimizationResult result;
    CostSpec spec;
    AdmissibleSet adm;
};

ControlRun run_control_core(const ControlConfig& cc, const ExperimentConfig& cfg,
                            const MixedStiffness& K, std::uint64_t seed) {
    const Geometry& g = *K.geom;
    TimeGrid time = TimeGrid::build(cfg.time.t_final, cfg.time.n_steps);
    ControlRun run;
    run.spec = build_cost_spec(cc, g, time);
    run.adm = admissible_from(cc.bounds);
    SolveOptions opts;
    opts.tol = cc.tol;
    opts.max_iters = cc.max_iters;
    ControlPair init = cc.init == "random" ? random_controls(g, time, seed)
                                           : ControlPair::zero(g, time);
    run.result = solve_control(run.spec, run.adm, init, opts, K, cfg.scheme);
    return run;
}

void write_control_outputs(const ExperimentConfig& cfg, Workspace& ws,
                           const ControlRun& run, bool dump_traj) {
    const Geometry& g = *ws.geom;
    const OptimizationResult& res = run.result;
    const TimeGrid& time = res.controls.time;

    std::vector<std::vector<std::string>> conv;
    for (size_t i = 0; i < res.cost_history.size(); ++i) {
        std::vector<std::string> row{std::to_string(i),
                                     fmt(res.cost_history[i])};
        row.push_back(i < res.grad_norm_history.size()
                          ? fmt(res.grad_norm_history[i])
                          : "");
        row.push_back(i < res.step_history.size() ? fmt(res.step_history[i])
                                                  : "");
        conv.push_back(std::move(row));
    }
    write_table_csv(ws.dir / "convergence.csv",
                    {"iter", "cost", "grad_norm", "step"}, conv);

    std::vector<std::vector<std::string>> u1rows;
    for (int m = 0; m <= time.n_steps; ++m)
        u1rows.push_back({fmt(time.t(m)), fmt(res.controls.u1[m][0]),
                          fmt(res.controls.u1[m][1])});
    write_table_csv(ws.dir / "controls_u1.csv", {"t", "left", "right"},
                    u1rows);

    Eigen::VectorXd xc = g.coords(Tag::CollarOnly);
    std::vector<std::vector<std::string>> u2rows;
    for (int m = 0; m <= time.n_steps; ++m)
        for (int i = 0; i < xc.size(); ++i)
            u2rows.push_back({fmt(time.t(m)), fmt(xc[i]),
                              fmt(res.controls.u2[m][i])});
    write_table_csv(ws.dir / "controls_u2.csv", {"t", "x", "value"}, u2rows);

    if (dump_traj) {
        write_trajectory(cfg, ws, "state", res.state);
        write_trajectory(cfg, ws, "adjoint", res.adjoint);
    }
}

void run_control(const ExperimentConfig& cfg, Workspace& ws,
                 std::uint64_t seed) {
    ControlRun run = run_control_core(cfg.control, cfg, ws.K, seed);
    const OptimizationResult& res = run.result;
    const Geometry& g = *ws.geom;

    add_check(ws, "converged", res.converged, true,
              std::to_string(res.iterations) + " iterations");
    add_check(ws, "vi_residual", true, false, fmt(res.vi_residual));
    add_check(ws, "projection_formula", true, false,
              "relative residual = " + fmt(res.projection_residual));

    write_control_outputs(cfg, ws, run, cfg.control.dump_trajectories);

    ws.report << "control solve (" <<
        (run.spec.variant == CostVariant::J1 ? "J1" : "J2")
              << ", beta = " << fmt(run.spec.beta) << ")\n"
              << "  converged = " << (res.converged ? "yes" : "no") << " in "
              << res.iterations << " iterations\n"
              << "  final cost = " << fmt(res.cost_history.back()) << "\n"
              << "  control norm = " << fmt(zd_norm(g, res.controls)) << "\n"
              << "  vi residual = " << fmt(res.vi_residual) << "\n"
              << "  projection-formula residual = "
              << fmt(res.projection_residual) << "\n";
    write_text_file(ws.dir / "summary.txt", ws.report.str());
}

// ---------------------------------------------------------------- gradcheck

void run_gradcheck(const ExperimentConfig& cfg, Workspace& ws,
                   std::uint64_t seed) {
    const Geometry& g = *ws.geom;
    TimeGrid time = TimeGrid::build(cfg.time.t_final, cfg.time.n_steps);
    std::vector<std::vector<std::string>> rows;
    double worst = 0;
    std::uint64_t stream = 0;

    for (double s : cfg.gradcheck.s_values) {
        auto K = assemble_mixed(ws.geom, s);
        for (CostVariant variant : cfg.gradcheck.variants) {
            for (int trial = 0; trial < cfg.gradcheck.trials; ++trial) {
                ++stream;
                auto eng = make_engine(seed, stream);
                std::uniform_real_distribution<double> dist(-1.0, 1.0);
                CostSpec spec;
                spec.variant = variant;
                spec.beta = 1.0;
                if (variant == CostVariant::J1) {
                    spec.zd1.assign(time.n_steps + 1,
                                    Eigen::VectorXd::Zero(g.interior_nodes()));
                    for (auto& z : spec.zd1)
                        for (int i = 0; i < z.size(); ++i) z[i] = dist(eng);
                } else {
                    spec.zd2.resize(g.interior_nodes());
                    for (int i = 0; i < spec.zd2.size(); ++i)
                        spec.zd2[i] = dist(eng);
                }
                ControlPair u = ControlPair::zero(g, time);
                ControlPair du = ControlPair::zero(g, time);
                for (int m = 0; m <= time.n_steps; ++m) {
                    u.u1[m] = Eigen::Vector2d(dist(eng), dist(eng));
                    du.u1[m] = Eigen::Vector2d(dist(eng), dist(eng));
                    for (int i = 0; i < u.u2[m].size(); ++i) {
                        u.u2[m][i] = dist(eng);
                        du.u2[m][i] = dist(eng);
                    }
                }
                Gradient grad = reduced_gradient(u, spec, K, cfg.scheme);
                const double gd = zd_inner(g, grad.g, du);
                ControlPair up = u, um = u;
                const double eps = cfg.gradcheck.epsilon;
                for (int m = 0; m <= time.n_steps; ++m) {
                    up.u1[m] += eps * du.u1[m];
                    um.u1[m] -= eps * du.u1[m];
                    up.u2[m] += eps * du.u2[m];
                    um.u2[m] -= eps * du.u2[m];
                }
                const double jp = evaluate_cost(up, spec, K, cfg.scheme).cost;
                const double jm = evaluate_cost(um, spec, K, cfg.scheme).cost;
                const double fd = (jp - jm) / (2 * eps);
                const double rel =
                    std::abs(fd - gd) / std::max(1.0, std::abs(fd));
                worst = std::max(worst, rel);
                rows.push_back({variant == CostVariant::J1 ? "j1" : "j2",
                                fmt(s), std::to_string(trial), fmt(fd),
                                fmt(gd), fmt(rel)});
            }
        }
    }
    write_table_csv(ws.dir / "gradcheck.csv",
                    {"variant", "s", "trial", "fd", "adjoint", "rel_error"},
                    rows);
    add_check(ws, "gradient_check", worst <= cfg.gradcheck.tolerance, true,
              "max relative error = " + fmt(worst) + " (tolerance " +
                  fmt(cfg.gradcheck.tolerance) + ")");
    ws.report << "gradient check: max relative error = " << fmt(worst) << "\n";
    write_text_file(ws.dir / "summary.txt", ws.report.str());
}

// -------------------------------------------------------------------- sweep

void run_sweep(const ExperimentConfig& cfg, Workspace& ws, std::uint64_t seed,
               int workers) {
    const size_t jobs = cfg.sweep.betas.size();
    std::vector<ControlRun> runs(jobs);
    std::vector<std::string> errors(jobs);

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t j = next.fetch_add(1);
            if (j >= jobs) return;
            try {
                ControlConfig cc = cfg.sweep.control;
                cc.beta = cfg.sweep.betas[j];
                runs[j] = run_control_core(cc, cfg, ws.K,
                                           split_seed(seed, j + 1));
            } catch (const std::exception& e) {
                errors[j] = e.what();
            }
        }
    };
    const int nw = std::max(1, std::min<int>(workers, (int)jobs));
    std::vector<std::thread> pool;
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (size_t j = 0; j < jobs; ++j)
        if (!errors[j].empty())
            throw SolverError("sweep job beta=" +
                              std::to_string(cfg.sweep.betas[j]) +
                              " failed: " + errors[j]);

    const Geometry& g = *ws.geom;
    std::vector<std::vector<std::string>> rows;
    bool all_converged = true, decreasing = true;
    double prev_norm = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < jobs; ++j) {
        const OptimizationResult& r = runs[j].result;
        const double nrm = zd_norm(g, r.controls);
        all_converged = all_converged && r.converged;
        if (j > 0 && nrm >= prev_norm) decreasing = false;
        prev_norm = nrm;
        rows.push_back({fmt(cfg.sweep.betas[j]), fmt(nrm),
                        fmt(r.cost_history.back()),
                        std::to_string(r.iterations), fmt(r.vi_residual)});

        char sub[32];
        std::snprintf(sub, sizeof sub, "beta_%g", cfg.sweep.betas[j]);
        Workspace sub_ws;
        sub_ws.geom = ws.geom;
        sub_ws.dir = ws.dir / sub;
        write_control_outputs(cfg, sub_ws, runs[j],
                              cfg.sweep.control.dump_trajectories);
    }
    write_table_csv(ws.dir / "sweep.csv",
                    {"beta", "control_norm", "cost", "iterations",
                     "vi_residual"},
                    rows);
    add_check(ws, "all_converged", all_converged, true, "");
    add_check(ws, "norm_decreasing_in_beta", decreasing, true,
              "control norms strictly decrease across the beta grid");
    ws.report << "beta sweep over " << jobs << " values: converged = "
              << (all_converged ? "all" : "NOT all") << ", monotone = "
              << (decreasing ? "yes" : "no") << "\n";
    write_text_file(ws.dir / "summary.txt", ws.report.str());
}

// ----------------------------------------------------------------- manifest

void collect_files(const fs::path& dir, RunManifest& man) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() &&
            entry.path().filename() != "manifest.json")
            paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        const std::string bytes = read_text_file(p);
        man.files.push_back({fs::relative(p, dir).generic_string(),
                             bytes.size(), fnv1a64(bytes)});
    }
}

void write_manifest(const fs::path& dir, const RunManifest& man) {
    nlohmann::json j;
    j["experiment"] = man.experiment;
    j["version"] = man.version;
    j["seed"] = man.seed;
    j["wall_time_s"] = man.wall_time_s;
    j["ok"] = man.ok();
    j["warnings"] = man.warnings;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : man.checks)
        j["checks"].push_back({{"name", c.name},
                               {"pass", c.pass},
                               {"hard", c.hard},
                               {"detail", c.detail}});
    j["files"] = nlohmann::json::array();
    for (const auto& f : man.files)
        j["files"].push_back(
            {{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a}});
    j["config"] = nlohmann::json::parse(man.config_echo);

    const fs::path tmp = dir / "manifest.json.tmp";
    write_text_file(tmp, j.dump(2) + "\n");
    fs::rename(tmp, dir / "manifest.json");
}

}  // namespace

std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg,
                                      const std::string& override_dir) {
    if (!override_dir.empty()) return override_dir;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    const char* root = std::getenv("MLN_OUT_ROOT");
    fs::path base = root && *root ? fs::path(root) : fs::path("runs");
    return base / experiment_name(cfg.kind);
}

RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir, int workers) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);

    Workspace ws = make_workspace(cfg, out_dir);
    const std::uint64_t seed = cfg.seed;

    try {
        switch (cfg.kind) {
            case ExperimentKind::Operators: run_operators(cfg, ws); break;
            case ExperimentKind::Elliptic: run_elliptic(cfg, ws, seed); break;
            case ExperimentKind::Parabolic: run_parabolic(cfg, ws); break;
            case ExperimentKind::Spectrum: run_spectrum(cfg, ws, seed); break;
            case ExperimentKind::Control: run_control(cfg, ws, seed); break;
            case ExperimentKind::GradCheck: run_gradcheck(cfg, ws, seed); break;
            case ExperimentKind::Sweep: run_sweep(cfg, ws, seed, workers); break;
        }
    } catch (const std::exception& e) {
        // The module diagnostic lands in the manifest verbatim before the
        // error propagates.
        add_check(ws, "error", false, true, e.what());
        RunManifest man;
        man.experiment = experiment_name(cfg.kind);
        man.seed = seed;
        man.checks = ws.checks;
        man.warnings = cfg.warnings;
        man.config_echo = cfg.echo;
        collect_files(out_dir, man);
        man.wall_time_s = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        write_manifest(out_dir, man);
        throw;
    }

    RunResult out;
    out.out_dir = out_dir;
    out.manifest.experiment = experiment_name(cfg.kind);
    out.manifest.seed = seed;
    out.manifest.checks = ws.checks;
    out.manifest.warnings = cfg.warnings;
    out.manifest.config_echo = cfg.echo;
    collect_files(out_dir, out.manifest);
    out.manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(out_dir, out.manifest);

    std::ostringstream sum;
    sum << "experiment " << out.manifest.experiment << " -> "
        << out_dir.generic_string() << "\n";
    for (const auto& w : out.manifest.warnings) sum << "warning: " << w << "\n";
    for (const auto& c : out.manifest.checks)
        sum << "  [" << (c.pass ? "PASS" : "FAIL") << (c.hard ? "" : "*")
            << "] " << c.name << (c.detail.empty() ? "" : ": " + c.detail)
            << "\n";
    sum << (out.manifest.ok() ? "OK" : "FAILED") << " ("
        << format_number(out.manifest.wall_time_s) << " s)\n";
    out.summary = sum.str();
    return out;
}

}  // namespace mln
