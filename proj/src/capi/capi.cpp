#include "mln/mln.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "core/control.hpp"
#include "core/elliptic.hpp"
#include "core/experiments.hpp"
#include "core/spectral.hpp"

using namespace mln;

namespace {

thread_local std::string g_last_error;

mln_status fail(mln_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

// Maps core exceptions onto status codes.
template <typename Fn>
mln_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const TagMismatchError& e) {
        return fail(MLN_ERR_TAG_MISMATCH, e.what());
    } catch (const ConfigError& e) {
        return fail(MLN_ERR_CONFIG, e.what());
    } catch (const SolverError& e) {
        return fail(MLN_ERR_SOLVER, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(MLN_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(MLN_ERR_INTERNAL, e.what());
    }
}

Tag tag_of(mln_node_set set) {
    switch (set) {
        case MLN_NODES_INTERIOR: return Tag::Interior;
        case MLN_NODES_EXTENDED: return Tag::Extended;
        case MLN_NODES_BOUNDARY: return Tag::BoundaryTrace;
        case MLN_NODES_COLLAR: return Tag::CollarOnly;
    }
    throw ConfigError("unknown node set");
}

}  // namespace

struct mln_geometry {
    std::shared_ptr<const Geometry> geom;
};

struct mln_operator {
    MixedStiffness K;
};

struct mln_trajectory {
    Trajectory traj;
    int extended_nodes = 0;
};

struct mln_control_result {
    OptimizationResult res;
    int collar_nodes = 0;
};

extern "C" {

const char* mln_version(void) { return kVersion; }

const char* mln_last_error(void) { return g_last_error.c_str(); }

mln_status mln_geometry_create(double x_left, double x_right, int n_interior,
                               double collar_width, mln_geometry** out) {
    if (!out) return fail(MLN_ERR_INVALID_ARGUMENT, "out must not be null");
    *out = nullptr;
    return guarded([&] {
        auto g = std::make_unique<mln_geometry>();
        g->geom = std::make_shared<Geometry>(
            Geometry::build(x_left, x_right, n_interior, collar_width));
        *out = g.release();
        return MLN_OK;
    });
}

void mln_geometry_destroy(mln_geometry* g) { delete g; }

int mln_geometry_node_count(const mln_geometry* g, mln_node_set set) {
    if (!g) return -1;
    switch (set) {
        case MLN_NODES_INTERIOR:
        case MLN_NODES_EXTENDED:
        case MLN_NODES_BOUNDARY:
        case MLN_NODES_COLLAR: break;
        default: return -1;
    }
    return g->geom->node_count(tag_of(set));
}

double mln_geometry_h(const mln_geometry* g) {
    return g ? g->geom->h() : 0.0;
}

mln_status mln_geometry_coords(const mln_geometry* g, mln_node_set set,
                               double* xs, int capacity) {
    if (!g || !xs)
        return fail(MLN_ERR_INVALID_ARGUMENT, "null geometry or buffer");
    return guarded([&] {
        Eigen::VectorXd c = g->geom->coords(tag_of(set));
        if (capacity < c.size())
            return fail(MLN_ERR_INVALID_ARGUMENT,
                        "buffer capacity " + std::to_string(capacity) +
                            " below node count " + std::to_string(c.size()));
        std::memcpy(xs, c.data(), sizeof(double) * c.size());
        return MLN_OK;
    });
}

mln_status mln_operator_assemble(const mln_geometry* g, double s,
                                 mln_operator** out) {
    if (!g || !out) return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto op = std::make_unique<mln_operator>();
        op->K = assemble_mixed(g->geom, s);
        *out = op.release();
        return MLN_OK;
    });
}

void mln_operator_destroy(mln_operator* op) { delete op; }

mln_status mln_kernel_constant(double s, double* out) {
    if (!out) return fail(MLN_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&] {
        *out = kernel_constant(s);
        return MLN_OK;
    });
}

mln_status mln_operator_diagnostics(const mln_operator* op,
                                    mln_operator_report* out) {
    if (!op || !out) return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const MixedStiffness& K = op->K;
        const int n = K.geom->interior_nodes();
        out->symmetry_defect =
            (K.A_II - K.A_II.transpose()).cwiseAbs().maxCoeff();
        int violations = 0;
        for (int i = 0; i < n; ++i) {
            if (!(K.A_II(i, i) > 0)) ++violations;
            for (int j = 0; j < n; ++j)
                if (j != i && K.A_II(i, j) > 0) ++violations;
        }
        violations += (K.A_Ib.array() > 0).count();
        violations += (K.A_Ic.array() > 0).count();
        out->m_matrix_violations = violations;
        double worst = 0;
        for (int i = 0; i < n; ++i) {
            const double rowsum = K.A_II.row(i).sum() + K.A_Ib.row(i).sum() +
                                  K.A_Ic.row(i).sum();
            worst = std::max(worst, std::abs(rowsum - K.tail[i]) /
                                        std::max(1.0, K.A_II(i, i)));
        }
        out->row_sum_defect = worst;
        SpectralReport rep = low_spectrum(K, 1);
        out->lambda_min = rep.eigenvalues[0];
        out->lambda_min_local = rep.lambda1_local;
        out->lambda_max = largest_eigenvalue(K.A_II);
        return MLN_OK;
    });
}

mln_status mln_elliptic_solve(const mln_operator* op, mln_elliptic_mode mode,
                              const double* f_interior, const double* g1,
                              const double* g2_collar, double* w_extended) {
    if (!op || !w_extended)
        return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const Geometry& g = *op->K.geom;
        EllipticData data;
        if (f_interior)
            data.f = Eigen::Map<const Eigen::VectorXd>(f_interior,
                                                       g.interior_nodes());
        if (g1) data.g1 = Eigen::Vector2d(g1[0], g1[1]);
        if (g2_collar)
            data.g2 = Eigen::Map<const Eigen::VectorXd>(g2_collar,
                                                        g.collar_nodes());
        GridFunction w;
        switch (mode) {
            case MLN_ELLIPTIC_WEAK:
                if (data.g1.cwiseAbs().maxCoeff() != 0.0 ||
                    (data.g2.size() &&
                     data.g2.cwiseAbs().maxCoeff() != 0.0))
                    return fail(MLN_ERR_INVALID_ARGUMENT,
                                "weak mode requires zero g1 and g2");
                w = solve_weak(op->K,
                               data.f.size()
                                   ? data.f
                                   : Eigen::VectorXd::Zero(g.interior_nodes()));
                break;
            case MLN_ELLIPTIC_LIFTED: w = solve_lifted(op->K, data); break;
            case MLN_ELLIPTIC_VERY_WEAK:
                w = solve_very_weak(op->K, data);
                break;
            default:
                return fail(MLN_ERR_INVALID_ARGUMENT, "unknown elliptic mode");
        }
        std::memcpy(w_extended, w.values.data(),
                    sizeof(double) * w.values.size());
        return MLN_OK;
    });
}

mln_status mln_forward_solve(const mln_operator* op, double t_final,
                             int n_steps, double theta, const double* u1,
                             const double* u2, const double* psi0,
                             const double* f, mln_trajectory** out) {
    if (!op || !out) return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const Geometry& g = *op->K.geom;
        ParabolicData d;
        d.time = TimeGrid::build(t_final, n_steps);
        const int M = n_steps;
        if (u1) {
            d.u1.resize(M + 1);
            for (int m = 0; m <= M; ++m)
                d.u1[m] = Eigen::Vector2d(u1[2 * m], u1[2 * m + 1]);
        }
        if (u2) {
            const int nc = g.collar_nodes();
            d.u2.resize(M + 1);
            for (int m = 0; m <= M; ++m)
                d.u2[m] =
                    Eigen::Map<const Eigen::VectorXd>(u2 + m * nc, nc);
        }
        if (psi0)
            d.psi0 = Eigen::Map<const Eigen::VectorXd>(psi0,
                                                       g.interior_nodes());
        if (f) {
            const int nI = g.interior_nodes();
            d.f.resize(M + 1);
            for (int m = 0; m <= M; ++m)
                d.f[m] = Eigen::Map<const Eigen::VectorXd>(f + m * nI, nI);
        }
        SchemeConfig sc{theta};
        sc.validate();
        auto t = std::make_unique<mln_trajectory>();
        t->traj = solve_forward(op->K, d, sc);
        t->extended_nodes = g.extended_nodes();
        *out = t.release();
        return MLN_OK;
    });
}

void mln_trajectory_destroy(mln_trajectory* t) { delete t; }

int mln_trajectory_frames(const mln_trajectory* t) {
    return t ? static_cast<int>(t->traj.frames.size()) : -1;
}

mln_status mln_trajectory_frame(const mln_trajectory* t, int m,
                                double* extended_values, int capacity) {
    if (!t || !extended_values)
        return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    if (m < 0 || m >= static_cast<int>(t->traj.frames.size()))
        return fail(MLN_ERR_INVALID_ARGUMENT, "frame index out of range");
    if (capacity < t->extended_nodes)
        return fail(MLN_ERR_INVALID_ARGUMENT, "buffer too small");
    std::memcpy(extended_values, t->traj.frames[m].data(),
                sizeof(double) * t->extended_nodes);
    return MLN_OK;
}

mln_status mln_spectrum(const mln_operator* op, int k, double* lambdas,
                        double* residuals) {
    if (!op || !lambdas)
        return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        SpectralReport rep = low_spectrum(op->K, k);
        std::memcpy(lambdas, rep.eigenvalues.data(), sizeof(double) * k);
        if (residuals)
            std::memcpy(residuals, rep.residuals.data(), sizeof(double) * k);
        return MLN_OK;
    });
}

mln_status mln_control_solve(const mln_operator* op, double t_final,
                             int n_steps, double theta,
                             const mln_control_options* opts,
                             const double* target, mln_control_result** out) {
    if (!op || !opts || !out)
        return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const Geometry& g = *op->K.geom;
        if (opts->variant != 1 && opts->variant != 2)
            return fail(MLN_ERR_INVALID_ARGUMENT,
                        "variant must be 1 (J1) or 2 (J2)");
        TimeGrid time = TimeGrid::build(t_final, n_steps);
        CostSpec spec;
        spec.variant =
            opts->variant == 1 ? CostVariant::J1 : CostVariant::J2;
        spec.beta = opts->beta;
        const int nI = g.interior_nodes();
        if (spec.variant == CostVariant::J1) {
            spec.zd1.assign(n_steps + 1, Eigen::VectorXd::Zero(nI));
            if (target)
                for (int m = 0; m <= n_steps; ++m)
                    spec.zd1[m] =
                        Eigen::Map<const Eigen::VectorXd>(target + m * nI, nI);
        } else {
            if (target)
                spec.zd2 = Eigen::Map<const Eigen::VectorXd>(target, nI);
            else
                spec.zd2 = Eigen::VectorXd::Zero(nI);
        }
        AdmissibleSet adm{opts->u1_min, opts->u1_max, opts->u2_min,
                          opts->u2_max};
        SolveOptions so;
        if (opts->tol > 0) so.tol = opts->tol;
        if (opts->max_iters > 0) so.max_iters = opts->max_iters;
        SchemeConfig sc{theta};
        sc.validate();
        auto r = std::make_unique<mln_control_result>();
        r->res = solve_control(spec, adm, ControlPair::zero(g, time), so,
                               op->K, sc);
        r->collar_nodes = g.collar_nodes();
        *out = r.release();
        return MLN_OK;
    });
}

void mln_control_result_destroy(mln_control_result* r) { delete r; }

int mln_control_result_converged(const mln_control_result* r) {
    return r && r->res.converged ? 1 : 0;
}

int mln_control_result_iterations(const mln_control_result* r) {
    return r ? r->res.iterations : -1;
}

double mln_control_result_cost(const mln_control_result* r) {
    return r ? r->res.cost_history.back() : 0.0;
}

double mln_control_result_vi_residual(const mln_control_result* r) {
    return r ? r->res.vi_residual : -1.0;
}

double mln_control_result_projection_residual(const mln_control_result* r) {
    return r ? r->res.projection_residual : -1.0;
}

mln_status mln_control_result_u1(const mln_control_result* r, double* out,
                                 int capacity) {
    if (!r || !out) return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    const int need = 2 * static_cast<int>(r->res.controls.u1.size());
    if (capacity < need)
        return fail(MLN_ERR_INVALID_ARGUMENT, "buffer too small");
    for (size_t m = 0; m < r->res.controls.u1.size(); ++m) {
        out[2 * m] = r->res.controls.u1[m][0];
        out[2 * m + 1] = r->res.controls.u1[m][1];
    }
    return MLN_OK;
}

mln_status mln_control_result_u2(const mln_control_result* r, double* out,
                                 int capacity) {
    if (!r || !out) return fail(MLN_ERR_INVALID_ARGUMENT, "null argument");
    const int nc = r->collar_nodes;
    const int need = nc * static_cast<int>(r->res.controls.u2.size());
    if (capacity < need)
        return fail(MLN_ERR_INVALID_ARGUMENT, "buffer too small");
    for (size_t m = 0; m < r->res.controls.u2.size(); ++m)
        std::memcpy(out + m * nc, r->res.controls.u2[m].data(),
                    sizeof(double) * nc);
    return MLN_OK;
}

mln_status mln_run_experiment(const char* config_path, const char* subcommand,
                              const char* out_dir,
                              const uint64_t* seed_override, int workers,
                              const char* trajectory_format, char** summary,
                              int* ok) {
    if (!config_path)
        return fail(MLN_ERR_INVALID_ARGUMENT, "config_path must not be null");
    return guarded([&] {
        std::optional<ExperimentKind> kind;
        if (subcommand) {
            kind = experiment_from_name(subcommand);
            if (!kind)
                return fail(MLN_ERR_INVALID_ARGUMENT,
                            std::string("unknown experiment '") + subcommand +
                                "'");
        }
        ExperimentConfig cfg = parse_config(config_path, kind);
        if (seed_override) cfg.seed = *seed_override;
        if (trajectory_format) {
            const std::string tf = trajectory_format;
            if (tf != "long" && tf != "frames")
                return fail(MLN_ERR_INVALID_ARGUMENT,
                            "trajectory format must be 'long' or 'frames'");
            cfg.trajectory_format = tf;
        }
        const std::filesystem::path dir =
            resolve_out_dir(cfg, out_dir ? out_dir : "");
        RunResult res = run_experiment(cfg, dir, workers > 0 ? workers : 1);
        if (summary) {
            *summary = static_cast<char*>(std::malloc(res.summary.size() + 1));
            if (*summary)
                std::memcpy(*summary, res.summary.c_str(),
                            res.summary.size() + 1);
        }
        if (ok) *ok = res.manifest.ok() ? 1 : 0;
        return MLN_OK;
    });
}

void mln_string_free(char* s) { std::free(s); }

}  // extern "C"
