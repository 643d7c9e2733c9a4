#include "control.hpp"

#include <algorithm>
#include <cmath>

namespace mln {

ControlPair ControlPair::zero(const Geometry& g, TimeGrid time) {
    ControlPair u;
    u.time = time;
    u.u1.assign(time.n_steps + 1, Eigen::Vector2d::Zero());
    u.u2.assign(time.n_steps + 1,
                Eigen::VectorXd::Zero(g.collar_nodes()));
    return u;
}

double zd_inner(const Geometry& g, const ControlPair& a, const ControlPair& b) {
    const double tau = a.time.tau;
    const double h = g.h();
    double acc = 0;
    for (size_t m = 0; m < a.u1.size(); ++m)
        acc += tau * a.u1[m].dot(b.u1[m]);
    for (size_t m = 0; m < a.u2.size(); ++m)
        acc += tau * h * a.u2[m].dot(b.u2[m]);
    return acc;
}

double zd_norm(const Geometry& g, const ControlPair& a) {
    return std::sqrt(zd_inner(g, a, a));
}

void CostSpec::validate(const Geometry& g, const TimeGrid& time) const {
    if (!(beta > 0)) throw ConfigError("cost.beta must be > 0");
    if (variant == CostVariant::J1) {
        if (static_cast<int>(zd1.size()) != time.n_steps + 1)
            throw TagMismatchError("zd1 must have M+1 interior slices");
        for (const auto& z : zd1)
            if (z.size() != g.interior_nodes())
                throw TagMismatchError("zd1 slices must be interior functions");
    } else {
        if (zd2.size() != g.interior_nodes())
            throw TagMismatchError("zd2 must be an interior function");
    }
}

namespace {

Eigen::VectorXd interior_frame(const Geometry& g, const Eigen::VectorXd& fr) {
    Eigen::VectorXd out(g.interior_nodes());
    for (int i = 0; i < g.interior_nodes(); ++i)
        out[i] = fr[g.ext_interior(i)];
    return out;
}

double cost_of_state(const Trajectory& state, const ControlPair& u,
                     const CostSpec& spec, const MixedStiffness& K) {
    const Geometry& g = *K.geom;
    const double tau = state.time.tau;
    const double h = g.h();
    double mis = 0;
    if (spec.variant == CostVariant::J1) {
        for (int m = 0; m < state.time.n_steps; ++m) {
            Eigen::VectorXd d = interior_frame(g, state.frames[m]) - spec.zd1[m];
            mis += 0.5 * tau * h * d.squaredNorm();
        }
    } else {
        Eigen::VectorXd d =
            interior_frame(g, state.frames.back()) - spec.zd2;
        mis = 0.5 * h_minus1_inner(g, d, d);
    }
    return mis + 0.5 * spec.beta * zd_inner(g, u, u);
}

}  // namespace

CostEval evaluate_cost(const ControlPair& u, const CostSpec& spec,
                       const MixedStiffness& K, const SchemeConfig& sc) {
    const Geometry& g = *K.geom;
    spec.validate(g, u.time);
    ParabolicData data;
    data.time = u.time;
    data.u1 = u.u1;
    data.u2 = u.u2;
    CostEval ev;
    ev.state = solve_forward(K, data, sc);
    ev.cost = cost_of_state(ev.state, u, spec, K);
    return ev;
}

Gradient reduced_gradient(const ControlPair& u, const CostSpec& spec,
                          const MixedStiffness& K, const SchemeConfig& sc) {
    const Geometry& g = *K.geom;
    spec.validate(g, u.time);
    const int M = u.time.n_steps;
    const int nI = g.interior_nodes();
    const double h = g.h();
    const double th = sc.theta;

    ParabolicData data;
    data.time = u.time;
    data.u1 = u.u1;
    data.u2 = u.u2;
    ParabolicSolver solver(K, u.time, sc);
    Trajectory state = solver.forward(data);

    // Multiplier sources: d(misfit)/d(psi^k) scaled by 1/tau.
    std::vector<Eigen::VectorXd> eta(M + 1, Eigen::VectorXd::Zero(nI));
    Eigen::VectorXd terminal;
    const Eigen::VectorXd* terminal_ptr = nullptr;
    if (spec.variant == CostVariant::J1) {
        for (int m = 0; m < M; ++m)
            eta[m] = h * (interior_frame(g, state.frames[m]) - spec.zd1[m]);
    } else {
        Eigen::VectorXd d = interior_frame(g, state.frames[M]) - spec.zd2;
        terminal = h * dirichlet_laplacian_solve(g, d);
        terminal_ptr = &terminal;
    }
    std::vector<Eigen::VectorXd> q = solver.multipliers(eta, terminal_ptr);

    Gradient out;
    out.g.time = u.time;
    out.g.u1.resize(M + 1);
    out.g.u2.resize(M + 1);
    for (int m = 0; m <= M; ++m) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(nI);
        if (m >= 1) r += th * q[m];
        if (m + 1 <= M) r += (1 - th) * q[m + 1];
        out.g.u1[m] = spec.beta * u.u1[m] - K.A_Ib.transpose() * r;
        out.g.u2[m] = spec.beta * u.u2[m] - (K.A_Ic.transpose() * r) / h;
    }

    // Reported adjoint in the conventions of the optimality systems.
    if (spec.variant == CostVariant::J1) {
        out.adjoint.time = u.time;
        out.adjoint.frames.reserve(M + 1);
        for (int m = 0; m <= M; ++m) {
            Eigen::VectorXd fr = Eigen::VectorXd::Zero(g.extended_nodes());
            for (int i = 0; i < nI; ++i)
                fr[g.ext_interior(i)] = -q[m][i] / h;
            out.adjoint.frames.push_back(std::move(fr));
        }
    } else {
        out.adjoint = solve_adjoint_j2(K, interior_frame(g, state.frames[M]),
                                       spec.zd2, u.time, sc);
    }
    return out;
}

ControlPair project(const ControlPair& u, const AdmissibleSet& adm) {
    adm.validate();
    ControlPair out = u;
    for (auto& v : out.u1)
        v = v.cwiseMax(adm.a1).cwiseMin(adm.b1);
    for (auto& v : out.u2)
        v = v.cwiseMax(adm.a2).cwiseMin(adm.b2);
    return out;
}

namespace {

ControlPair axpy(const ControlPair& u, double alpha, const ControlPair& g) {
    ControlPair out = u;
    for (size_t m = 0; m < out.u1.size(); ++m) out.u1[m] += alpha * g.u1[m];
    for (size_t m = 0; m < out.u2.size(); ++m) out.u2[m] += alpha * g.u2[m];
    return out;
}

ControlPair diff(const ControlPair& a, const ControlPair& b) {
    return axpy(a, -1.0, b);
}

}  // namespace

OptimizationResult solve_control(const CostSpec& spec, const AdmissibleSet& adm,
                                 const ControlPair& init,
                                 const SolveOptions& opts,
                                 const MixedStiffness& K,
                                 const SchemeConfig& sc) {
    const Geometry& g = *K.geom;
    adm.validate();
    const double gamma0 = opts.gamma0 > 0 ? opts.gamma0 : 1.0 / spec.beta;

    OptimizationResult res;
    ControlPair u = project(init, adm);
    CostEval ev = evaluate_cost(u, spec, K, sc);
    res.cost_history.push_back(ev.cost);

    Gradient grad = reduced_gradient(u, spec, K, sc);
    for (int it = 0; it < opts.max_iters; ++it) {
        res.grad_norm_history.push_back(zd_norm(g, grad.g));
        const double stop =
            zd_norm(g, diff(u, project(axpy(u, -gamma0, grad.g), adm)));
        if (stop <= opts.tol) {
            res.converged = true;
            break;
        }

        double gamma = gamma0;
        bool accepted = false;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            ControlPair u_try = project(axpy(u, -gamma, grad.g), adm);
            CostEval ev_try = evaluate_cost(u_try, spec, K, sc);
            const double decrease = zd_inner(g, grad.g, diff(u, u_try));
            if (ev_try.cost <= ev.cost - opts.armijo_c * decrease) {
                u = std::move(u_try);
                ev = std::move(ev_try);
                accepted = true;
                break;
            }
            gamma *= opts.backtrack;
        }
        res.step_history.push_back(gamma);
        res.cost_history.push_back(ev.cost);
        res.iterations = it + 1;
        if (!accepted) break;  // line search stalled at roundoff level
        grad = reduced_gradient(u, spec, K, sc);
    }

    res.controls = u;
    res.state = ev.state;
    res.adjoint = grad.adjoint;
    res.vi_residual = zd_norm(g, diff(u, project(axpy(u, -1.0, grad.g), adm)));

    // Projection-formula residual: u against P(-beta^{-1} * adjoint fluxes).
    ControlPair flux = u;  // shape only
    const double beta = spec.beta;
    for (size_t m = 0; m < flux.u1.size(); ++m) {
        flux.u1[m] = u.u1[m] - grad.g.u1[m] / beta;  // = -residue/beta
        flux.u2[m] = u.u2[m] - grad.g.u2[m] / beta;
    }
    const double num = zd_norm(g, diff(u, project(flux, adm)));
    res.projection_residual = num / std::max(1.0, zd_norm(g, u));
    return res;
}

double vi_residual(const ControlPair& u, const CostSpec& spec,
                   const AdmissibleSet& adm, const MixedStiffness& K,
                   const SchemeConfig& sc) {
    const Geometry& g = *K.geom;
    Gradient grad = reduced_gradient(u, spec, K, sc);
    return zd_norm(g, diff(u, project(axpy(u, -1.0, grad.g), adm)));
}

}  // namespace mln
