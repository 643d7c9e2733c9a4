#include "parabolic.hpp"

#include <cmath>

namespace mln {

namespace {

Eigen::Vector2d u1_at(const ParabolicData& d, int m) {
    return d.u1.empty() ? Eigen::Vector2d::Zero() : d.u1[m];
}

Eigen::VectorXd u2_at(const ParabolicData& d, const Geometry& g, int m) {
    return d.u2.empty() ? Eigen::VectorXd::Zero(g.collar_nodes()) : d.u2[m];
}

Eigen::VectorXd f_at(const ParabolicData& d, const Geometry& g, int m) {
    return d.f.empty() ? Eigen::VectorXd::Zero(g.interior_nodes()) : d.f[m];
}

void check_sizes(const ParabolicData& d, const Geometry& g, int M) {
    auto bad = [](const char* what) {
        throw TagMismatchError(std::string("parabolic data: ") + what +
                               " does not match the time grid");
    };
    if (!d.u1.empty() && static_cast<int>(d.u1.size()) != M + 1) bad("u1");
    if (!d.u2.empty() && static_cast<int>(d.u2.size()) != M + 1) bad("u2");
    if (!d.f.empty() && static_cast<int>(d.f.size()) != M + 1) bad("f");
    if (d.psi0.size() != 0 && d.psi0.size() != g.interior_nodes())
        bad("psi0");
}

}  // namespace

ParabolicSolver::ParabolicSolver(const MixedStiffness& K, TimeGrid time,
                                 SchemeConfig sc)
    : K_(&K), time_(time), sc_(sc) {
    sc_.validate();
    const int n = K.geom->interior_nodes();
    const double tau = time_.tau;
    Eigen::MatrixXd lhs =
        Eigen::MatrixXd::Identity(n, n) + tau * sc_.theta * K.A_II;
    lhs_.compute(lhs);
    if (lhs_.info() != Eigen::Success)
        throw SolverError("time-step factorization failed");
    rhs_ = Eigen::MatrixXd::Identity(n, n) - tau * (1.0 - sc_.theta) * K.A_II;
}

Trajectory ParabolicSolver::forward(const ParabolicData& data) const {
    const Geometry& g = *K_->geom;
    const int M = time_.n_steps;
    const int nI = g.interior_nodes();
    const double tau = time_.tau;
    const double th = sc_.theta;
    check_sizes(data, g, M);

    Trajectory traj;
    traj.time = time_;
    traj.frames.reserve(M + 1);

    Eigen::VectorXd psi = data.psi0.size() ? data.psi0
                                           : Eigen::VectorXd::Zero(nI);
    auto store = [&](int m, const Eigen::VectorXd& interior) {
        Eigen::VectorXd fr = Eigen::VectorXd::Zero(g.extended_nodes());
        for (int i = 0; i < nI; ++i) fr[g.ext_interior(i)] = interior[i];
        Eigen::Vector2d b = u1_at(data, m);
        fr[g.ext_left_boundary()] = b[0];
        fr[g.ext_right_boundary()] = b[1];
        Eigen::VectorXd c = u2_at(data, g, m);
        for (int k = 0; k < g.collar_nodes(); ++k)
            fr[g.ext_collar(k)] = c[k];
        traj.frames.push_back(std::move(fr));
    };

    store(0, psi);
    for (int m = 0; m < M; ++m) {
        Eigen::Vector2d b = th * u1_at(data, m + 1) + (1 - th) * u1_at(data, m);
        Eigen::VectorXd c =
            th * u2_at(data, g, m + 1) + (1 - th) * u2_at(data, g, m);
        Eigen::VectorXd fm =
            th * f_at(data, g, m + 1) + (1 - th) * f_at(data, g, m);
        Eigen::VectorXd rhs =
            rhs_ * psi + tau * (fm - K_->A_Ib * b - K_->A_Ic * c);
        psi = lhs_.solve(rhs);
        store(m + 1, psi);
    }
    return traj;
}

Trajectory ParabolicSolver::dual(const std::vector<Eigen::VectorXd>& eta) const {
    const Geometry& g = *K_->geom;
    const int M = time_.n_steps;
    const int nI = g.interior_nodes();
    const double tau = time_.tau;
    const double th = sc_.theta;
    if (static_cast<int>(eta.size()) != M + 1)
        throw TagMismatchError("dual source must have M+1 slices");

    std::vector<Eigen::VectorXd> interior(M + 1);
    interior[M] = Eigen::VectorXd::Zero(nI);
    for (int m = M - 1; m >= 0; --m) {
        Eigen::VectorXd em = th * eta[m] + (1 - th) * eta[m + 1];
        interior[m] = lhs_.solve(rhs_ * interior[m + 1] + tau * em);
    }

    Trajectory traj;
    traj.time = time_;
    traj.frames.reserve(M + 1);
    for (int m = 0; m <= M; ++m) {
        Eigen::VectorXd fr = Eigen::VectorXd::Zero(g.extended_nodes());
        for (int i = 0; i < nI; ++i) fr[g.ext_interior(i)] = interior[m][i];
        traj.frames.push_back(std::move(fr));
    }
    return traj;
}

Trajectory ParabolicSolver::backward_homogeneous(
    const Eigen::VectorXd& terminal) const {
    const Geometry& g = *K_->geom;
    const int M = time_.n_steps;
    const int nI = g.interior_nodes();
    std::vector<Eigen::VectorXd> interior(M + 1);
    interior[M] = terminal;
    for (int m = M - 1; m >= 0; --m)
        interior[m] = lhs_.solve(rhs_ * interior[m + 1]);

    Trajectory traj;
    traj.time = time_;
    traj.frames.reserve(M + 1);
    for (int m = 0; m <= M; ++m) {
        Eigen::VectorXd fr = Eigen::VectorXd::Zero(g.extended_nodes());
        for (int i = 0; i < nI; ++i) fr[g.ext_interior(i)] = interior[m][i];
        traj.frames.push_back(std::move(fr));
    }
    return traj;
}

std::vector<Eigen::VectorXd> ParabolicSolver::multipliers(
    const std::vector<Eigen::VectorXd>& eta,
    const Eigen::VectorXd* terminal) const {
    const Geometry& g = *K_->geom;
    const int M = time_.n_steps;
    const int nI = g.interior_nodes();
    const double tau = time_.tau;

    std::vector<Eigen::VectorXd> q(M + 1);
    q[M] = terminal ? lhs_.solve(*terminal).eval()
                    : Eigen::VectorXd::Zero(nI);
    for (int k = M - 1; k >= 0; --k) {
        Eigen::VectorXd src = eta.empty() ? Eigen::VectorXd::Zero(nI) : eta[k];
        q[k] = lhs_.solve(rhs_ * q[k + 1] + tau * src);
    }
    return q;
}

Trajectory solve_forward(const MixedStiffness& K, const ParabolicData& data,
                         const SchemeConfig& sc) {
    return ParabolicSolver(K, data.time, sc).forward(data);
}

Trajectory solve_dual(const MixedStiffness& K, TimeGrid time,
                      const std::vector<Eigen::VectorXd>& eta,
                      const SchemeConfig& sc) {
    return ParabolicSolver(K, time, sc).dual(eta);
}

Trajectory solve_adjoint_j1(const MixedStiffness& K, const Trajectory& state,
                            const std::vector<Eigen::VectorXd>& zd1,
                            const SchemeConfig& sc) {
    const Geometry& g = *K.geom;
    const int M = state.time.n_steps;
    if (static_cast<int>(zd1.size()) != M + 1)
        throw TagMismatchError("zd1 must have M+1 slices");
    std::vector<Eigen::VectorXd> eta(M + 1);
    for (int m = 0; m <= M; ++m) {
        Eigen::VectorXd psi_m(g.interior_nodes());
        for (int i = 0; i < g.interior_nodes(); ++i)
            psi_m[i] = state.frames[m][g.ext_interior(i)];
        eta[m] = zd1[m] - psi_m;
    }
    return solve_dual(K, state.time, eta, sc);
}

Trajectory solve_adjoint_j2(const MixedStiffness& K,
                            const Eigen::VectorXd& state_T,
                            const Eigen::VectorXd& zd2, TimeGrid time,
                            const SchemeConfig& sc) {
    const Geometry& g = *K.geom;
    if (state_T.size() != g.interior_nodes() ||
        zd2.size() != g.interior_nodes())
        throw TagMismatchError("j2 adjoint expects interior state/target");
    Eigen::VectorXd rho = dirichlet_laplacian_solve(g, state_T - zd2);
    return ParabolicSolver(K, time, sc).backward_homogeneous(rho);
}

double duality_residual(const MixedStiffness& K, const ParabolicData& data,
                        const std::vector<Eigen::VectorXd>& eta,
                        const SchemeConfig& sc) {
    const Geometry& g = *K.geom;
    const int M = data.time.n_steps;
    const double tau = data.time.tau;
    const double h = g.h();
    if (data.psi0.size() != 0 && data.psi0.cwiseAbs().maxCoeff() != 0.0)
        throw ConfigError("duality residual requires a zero initial state");

    ParabolicSolver solver(K, data.time, sc);
    Trajectory psi = solver.forward(data);
    Trajectory phi = solver.dual(eta);

    // Left-endpoint rule in time, matching the zero terminal dual frame.
    double lhs = 0.0, rhs = 0.0;
    for (int m = 0; m < M; ++m) {
        for (int i = 0; i < g.interior_nodes(); ++i)
            lhs += tau * h * psi.frames[m][g.ext_interior(i)] * eta[m][i];
        GridFunction phim{Tag::Extended, phi.frames[m]};
        GridFunction dnu = normal_derivative(g, phim);
        Eigen::Vector2d b = data.u1.empty() ? Eigen::Vector2d::Zero()
                                            : data.u1[m];
        rhs -= tau * (b[0] * dnu.values[0] + b[1] * dnu.values[1]);
        GridFunction ns = nonlocal_normal_derivative(g, K.s, phim);
        if (!data.u2.empty()) rhs -= tau * h * data.u2[m].dot(ns.values);
    }
    return std::abs(lhs - rhs);
}

}  // namespace mln
