#include "spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <sstream>

#include "rng.hpp"

namespace mln {

namespace {

using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Lanczos with full reorthogonalization and a deterministic start vector.
struct LanczosState {
    Eigen::MatrixXd V;
    std::vector<double> alpha, beta;
};

void lanczos_extend(LanczosState& st, const ApplyFn& apply, int steps) {
    const int n = static_cast<int>(st.V.rows());
    int j = static_cast<int>(st.alpha.size());
    for (int it = 0; it < steps && j < n; ++it, ++j) {
        Eigen::VectorXd w = apply(st.V.col(j));
        st.alpha.push_back(st.V.col(j).dot(w));
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= j; ++i)
                w -= st.V.col(i).dot(w) * st.V.col(i);
        const double nb = w.norm();
        st.beta.push_back(nb);
        if (nb < 1e-14) break;  // invariant subspace found
        if (j + 1 < st.V.cols()) st.V.col(j + 1) = w / nb;
    }
}

struct EigResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // columns, h-orthonormal
    Eigen::VectorXd residuals;
};

EigResult smallest_pairs(const Eigen::MatrixXd& A, int k, double h) {
    const int n = static_cast<int>(A.rows());
    if (k > n) throw ConfigError("requested more eigenpairs than unknowns");

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw SolverError("eigensolver: matrix is not SPD");
    ApplyFn inv = [&](const Eigen::VectorXd& v) { return llt.solve(v).eval(); };

    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = 1.0 + 0.25 * std::sin(1.0 + i);
    v0.normalize();

    LanczosState st;
    st.V.setZero(n, n);
    st.V.col(0) = v0;

    const int maxit = 10 * n;
    const double tol = 1e-10;
    EigResult out;
    out.values.setZero(k);
    out.residuals.setZero(k);
    out.vectors.setZero(n, k);
    int done = 0;

    while (static_cast<int>(st.alpha.size()) < std::min(maxit, n)) {
        lanczos_extend(st, inv, 5);
        const int j = static_cast<int>(st.alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j, j);
        for (int i = 0; i < j; ++i) {
            T(i, i) = st.alpha[i];
            if (i + 1 < j) T(i, i + 1) = T(i + 1, i) = st.beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        done = 0;
        for (int m = 0; m < k && m < j; ++m) {
            const int idx = j - 1 - m;  // largest Ritz value of A^{-1}
            const double theta = es.eigenvalues()[idx];
            if (theta <= 0) break;
            Eigen::VectorXd y = st.V.leftCols(j) * es.eigenvectors().col(idx);
            y.normalize();
            const double lambda = 1.0 / theta;
            const double r = std::sqrt(h) * (A * y - lambda * y).norm() /
                             std::max(1.0, lambda);
            if (r > tol) break;
            out.values[m] = lambda;
            out.vectors.col(m) = y;
            out.residuals[m] = r;
            ++done;
        }
        if (done == k || j >= n) break;
    }

    if (done < k) {
        std::ostringstream msg;
        msg << "eigensolver: " << done << "/" << k
            << " pairs converged within the iteration cap; residuals:";
        for (int m = 0; m < done; ++m) msg << " " << out.residuals[m];
        throw SolverError(msg.str());
    }

    for (int m = 0; m < k; ++m) {
        Eigen::VectorXd y = out.vectors.col(m) / std::sqrt(h);
        for (int i = 0; i < y.size(); ++i) {
            if (std::abs(y[i]) > 1e-10) {
                if (y[i] < 0) y = -y;
                break;
            }
        }
        out.vectors.col(m) = y;
    }
    return out;
}

}  // namespace

Eigen::VectorXd smallest_eigenvalues(const Eigen::MatrixXd& A, int k,
                                     double h) {
    return smallest_pairs(A, k, h).values;
}

SpectralReport low_spectrum(const MixedStiffness& K, int k) {
    const Geometry& g = *K.geom;
    SpectralReport rep;
    EigResult res = smallest_pairs(K.A_II, k, g.h());
    rep.eigenvalues = res.values;
    rep.eigenvectors = res.vectors;
    rep.residuals = res.residuals;
    rep.lambda1_local = smallest_eigenvalues(K.L_loc_II, 1, g.h())[0];
    return rep;
}

double largest_eigenvalue(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    ApplyFn apply = [&](const Eigen::VectorXd& v) { return (A * v).eval(); };
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = 1.0 + 0.25 * std::cos(2.0 + i);
    v0.normalize();
    LanczosState st;
    const int cap = std::min(n, 120);
    st.V.setZero(n, cap);
    st.V.col(0) = v0;
    lanczos_extend(st, apply, cap - 1);
    const int j = static_cast<int>(st.alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j, j);
    for (int i = 0; i < j; ++i) {
        T(i, i) = st.alpha[i];
        if (i + 1 < j) T(i, i + 1) = T(i + 1, i) = st.beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    return es.eigenvalues().maxCoeff();
}

SemigroupAudit semigroup_audit(const MixedStiffness& K, const SchemeConfig& sc,
                               int trials, std::uint64_t seed) {
    SemigroupAudit audit;
    audit.trials = trials;
    if (trials <= 0) return audit;

    const Geometry& g = *K.geom;
    const int nI = g.interior_nodes();
    TimeGrid time = TimeGrid::build(1.0, 50);
    ParabolicSolver solver(K, time, sc);
    auto engine = make_engine(seed, 0xa0d1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);

    for (int t = 0; t < trials; ++t) {
        ParabolicData data;
        data.time = time;
        data.psi0.resize(nI);
        const bool positive = (t % 2 == 0);
        for (int i = 0; i < nI; ++i)
            data.psi0[i] = positive ? unit(engine) : sym(engine);
        Trajectory traj = solver.forward(data);

        double prev_sup = 0, prev_energy = 0;
        for (int m = 0; m <= time.n_steps; ++m) {
            double sup = 0, energy = 0, low = 0;
            for (int i = 0; i < nI; ++i) {
                const double v = traj.frames[m][g.ext_interior(i)];
                sup = std::max(sup, std::abs(v));
                energy += g.h() * v * v;
                low = std::min(low, v);
            }
            if (positive && low < audit.positivity_worst)
                audit.positivity_worst = low;
            if (m > 0) {
                audit.contraction_worst =
                    std::max(audit.contraction_worst, sup - prev_sup);
                audit.energy_worst =
                    std::max(audit.energy_worst, energy - prev_energy);
            }
            prev_sup = sup;
            prev_energy = energy;
        }
    }
    const double slack = 1e-12;
    audit.positivity_pass = audit.positivity_worst >= -slack;
    audit.contraction_pass = audit.contraction_worst <= slack;
    audit.energy_pass = audit.energy_worst <= slack;

    // Heat-spike probe: normalized discrete delta at the center node.
    ParabolicData spike;
    spike.time = time;
    spike.psi0 = Eigen::VectorXd::Zero(nI);
    spike.psi0[nI / 2] = 1.0 / g.h();
    Trajectory traj = solver.forward(spike);
    double prev = spike.psi0.cwiseAbs().maxCoeff();
    for (int m = 1; m <= time.n_steps; ++m) {
        double sup = 0;
        for (int i = 0; i < nI; ++i)
            sup = std::max(sup, std::abs(traj.frames[m][g.ext_interior(i)]));
        const double t = time.t(m);
        audit.spike.emplace_back(t, sup);
        if (sup > prev + slack) audit.spike_decreasing = false;
        audit.spike_sup_tsqrt = std::max(audit.spike_sup_tsqrt,
                                         sup * std::sqrt(t));
        prev = sup;
    }
    return audit;
}

}  // namespace mln
