#include "operators.hpp"

#include <cmath>

namespace mln {

void assemble_local(const Geometry& g, Eigen::MatrixXd& L_II,
                    Eigen::MatrixXd& L_Ib) {
    const int n = g.interior_nodes();
    const double ih2 = 1.0 / (g.h() * g.h());
    L_II.setZero(n, n);
    L_Ib.setZero(n, 2);
    for (int i = 0; i < n; ++i) {
        L_II(i, i) = 2.0 * ih2;
        if (i > 0) L_II(i, i - 1) = -ih2;
        if (i + 1 < n) L_II(i, i + 1) = -ih2;
    }
    L_Ib(0, 0) = -ih2;
    L_Ib(n - 1, 1) = -ih2;
}

namespace {

// Classify an extended node index into (block, column) for assembly.
enum class Block { Interior, Boundary, Collar };

struct Slot {
    Block block;
    int col;
};

Slot classify(const Geometry& g, int ext) {
    const int lb = g.ext_left_boundary();
    const int rb = g.ext_right_boundary();
    if (ext < lb) return {Block::Collar, ext};
    if (ext == lb) return {Block::Boundary, 0};
    if (ext < rb) return {Block::Interior, ext - lb - 1};
    if (ext == rb) return {Block::Boundary, 1};
    return {Block::Collar, g.n_collar() + (ext - rb - 1)};
}

}  // namespace

void assemble_fractional(const Geometry& g, double s, Eigen::MatrixXd& F_II,
                         Eigen::MatrixXd& F_Ib, Eigen::MatrixXd& F_Ic,
                         Eigen::VectorXd& tail) {
    if (g.n_collar() < 1) throw ConfigError("fractional assembly needs a collar");
    const auto fw = FractionalWeights::build(g, s);
    const double C = fw.C;
    const int n = g.interior_nodes();
    const int N = g.extended_nodes();

    F_II.setZero(n, n);
    F_Ib.setZero(n, 2);
    F_Ic.setZero(n, g.collar_nodes());
    tail.setZero(n);

    for (int i = 0; i < n; ++i) {
        const int e = g.ext_interior(i);
        tail[i] = C * (fw.tail(e) + fw.tail(N - 1 - e));
        double row = 0.0;
        for (int j = 0; j < N; ++j) {
            if (j == e) continue;
            const double wk = fw.w[std::abs(j - e)];
            row += wk;
            const Slot slot = classify(g, j);
            switch (slot.block) {
                case Block::Interior: F_II(i, slot.col) = -C * wk; break;
                case Block::Boundary: F_Ib(i, slot.col) = -C * wk; break;
                case Block::Collar: F_Ic(i, slot.col) = -C * wk; break;
            }
        }
        F_II(i, i) = C * row + tail[i];
    }
}

MixedStiffness assemble_mixed(std::shared_ptr<const Geometry> g, double s) {
    FractionalOrder order(s);  // validates the range
    MixedStiffness K;
    K.geom = std::move(g);
    K.s = order.s;
    K.weights = FractionalWeights::build(*K.geom, s);
    K.C = K.weights.C;
    assemble_local(*K.geom, K.L_loc_II, K.L_loc_Ib);
    assemble_fractional(*K.geom, s, K.L_frac_II, K.L_frac_Ib, K.L_frac_Ic,
                        K.tail);
    K.A_II = K.L_loc_II + K.L_frac_II;
    K.A_Ib = K.L_loc_Ib + K.L_frac_Ib;
    K.A_Ic = K.L_frac_Ic;
    return K;
}

double bilinear_form(const Geometry& g, double s, const GridFunction& u,
                     const GridFunction& v) {
    if (u.tag != Tag::Extended || v.tag != Tag::Extended)
        throw TagMismatchError("bilinear form expects extended grid functions");
    if (u.values.size() != g.extended_nodes() ||
        v.values.size() != g.extended_nodes())
        throw TagMismatchError("bilinear form: size mismatch");
    const auto fw = FractionalWeights::build(g, s);
    const int N = g.extended_nodes();
    const double h = g.h();
    double acc = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            acc += fw.w[j - i] * (u.values[i] - u.values[j]) *
                   (v.values[i] - v.values[j]);
    acc *= fw.C * h;
    for (int i = 0; i < N; ++i)
        acc += h * fw.C * (fw.tail(i) + fw.tail(N - 1 - i)) * u.values[i] *
               v.values[i];
    return acc;
}

H1NormReport h1_norm_report(const Geometry& g, double s,
                            const GridFunction& u) {
    if (u.tag != Tag::Extended)
        throw TagMismatchError("h1 report expects an extended grid function");
    H1NormReport rep;
    const double h = g.h();
    for (int e = g.ext_left_boundary(); e < g.ext_right_boundary(); ++e) {
        const double du = u.values[e + 1] - u.values[e];
        rep.dirichlet_energy += du * du / h;
    }
    rep.fractional_energy = bilinear_form(g, s, u, u);
    rep.total = rep.dirichlet_energy + rep.fractional_energy;
    return rep;
}

GridFunction nonlocal_normal_derivative(const Geometry& g, double s,
                                        const GridFunction& u) {
    if (u.tag != Tag::Extended)
        throw TagMismatchError("N_s expects an extended grid function");
    const auto fw = FractionalWeights::build(g, s);
    const int lb = g.ext_left_boundary();
    const int rb = g.ext_right_boundary();
    GridFunction out = make_grid_function(g, Tag::CollarOnly);

    for (int c = 0; c < g.collar_nodes(); ++c) {
        const int e = g.ext_collar(c);
        const double uc = u.values[e];
        double acc = 0.0;
        // Full interior hats.
        for (int j = lb + 1; j < rb; ++j)
            acc += fw.w[std::abs(e - j)] * (uc - u.values[j]);
        // Boundary hats contribute their half lying inside Omega.
        const int k_near = (e < lb) ? (lb - e) : (e - rb);
        const int k_far = (e < lb) ? (rb - e) : (e - lb);
        const double m_near =
            (k_near + 1) * kernel_mass(k_near * fw.h, (k_near + 1) * fw.h, s) -
            kernel_first_moment(k_near * fw.h, (k_near + 1) * fw.h, s) / fw.h;
        const double m_far =
            kernel_first_moment((k_far - 1) * fw.h, k_far * fw.h, s) / fw.h -
            (k_far - 1) * kernel_mass((k_far - 1) * fw.h, k_far * fw.h, s);
        const int near_b = (e < lb) ? lb : rb;
        const int far_b = (e < lb) ? rb : lb;
        acc += m_near * (uc - u.values[near_b]);
        acc += m_far * (uc - u.values[far_b]);
        out.values[c] = fw.C * acc;
    }
    return out;
}

GridFunction normal_derivative(const Geometry& g, const GridFunction& u) {
    if (u.tag != Tag::Extended)
        throw TagMismatchError("normal derivative expects an extended function");
    if (g.interior_nodes() < 2)
        throw ConfigError("normal derivative stencil needs n_interior >= 4");
    const int lb = g.ext_left_boundary();
    const int rb = g.ext_right_boundary();
    const double h = g.h();
    GridFunction out = make_grid_function(g, Tag::BoundaryTrace);
    out.values[0] = -(-3.0 * u.values[lb] + 4.0 * u.values[lb + 1] -
                      u.values[lb + 2]) /
                    (2.0 * h);
    out.values[1] = (3.0 * u.values[rb] - 4.0 * u.values[rb - 1] +
                     u.values[rb - 2]) /
                    (2.0 * h);
    return out;
}

Eigen::Vector2d boundary_flux(const MixedStiffness& K,
                              const Eigen::VectorXd& p_interior) {
    return K.geom->h() * (K.A_Ib.transpose() * p_interior);
}

Eigen::VectorXd dirichlet_laplacian_solve(const Geometry& g,
                                          const Eigen::VectorXd& u) {
    const int n = g.interior_nodes();
    if (u.size() != n)
        throw TagMismatchError("Dirichlet solve expects interior values");
    const double ih2 = 1.0 / (g.h() * g.h());
    // Thomas algorithm for the (-1, 2, -1)/h^2 system.
    Eigen::VectorXd c(n), d(n);
    double beta = 2.0 * ih2;
    c[0] = -ih2 / beta;
    d[0] = u[0] / beta;
    for (int i = 1; i < n; ++i) {
        beta = 2.0 * ih2 + ih2 * c[i - 1];
        c[i] = -ih2 / beta;
        d[i] = (u[i] + ih2 * d[i - 1]) / beta;
    }
    Eigen::VectorXd rho(n);
    rho[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) rho[i] = d[i] - c[i] * rho[i + 1];
    return rho;
}

double h_minus1_inner(const Geometry& g, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v) {
    if (u.size() != v.size())
        throw TagMismatchError("h_minus1_inner: size mismatch");
    return g.h() * dirichlet_laplacian_solve(g, u).dot(v);
}

double ibp_residual(const Geometry& g, double s, const GridFunction& phi,
                    const GridFunction& psi) {
    if (phi.tag != Tag::Extended || psi.tag != Tag::Extended)
        throw TagMismatchError("ibp residual expects extended grid functions");
    const auto fw = FractionalWeights::build(g, s);
    const int N = g.extended_nodes();
    const int lb = g.ext_left_boundary();
    const int rb = g.ext_right_boundary();
    const double h = g.h();
    auto interior = [&](int e) { return e > lb && e < rb; };

    double lhs = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            if (!interior(i) && !interior(j)) continue;
            lhs += fw.w[j - i] * (phi.values[i] - phi.values[j]) *
                   (psi.values[i] - psi.values[j]);
        }
    lhs *= fw.C * h;
    for (int e = lb + 1; e < rb; ++e)
        lhs += h * fw.C * (fw.tail(e) + fw.tail(N - 1 - e)) * phi.values[e] *
               psi.values[e];

    Eigen::MatrixXd F_II, F_Ib, F_Ic;
    Eigen::VectorXd tail;
    assemble_fractional(g, s, F_II, F_Ib, F_Ic, tail);
    GridFunction phi_I = restrict_to(g, phi, Tag::Interior);
    GridFunction phi_b = restrict_to(g, phi, Tag::BoundaryTrace);
    GridFunction phi_c = restrict_to(g, phi, Tag::CollarOnly);
    Eigen::VectorXd frac = F_II * phi_I.values + F_Ib * phi_b.values +
                           F_Ic * phi_c.values;
    GridFunction psi_I = restrict_to(g, psi, Tag::Interior);
    double rhs = h * psi_I.values.dot(frac);
    GridFunction ns = nonlocal_normal_derivative(g, s, phi);
    GridFunction psi_c = restrict_to(g, psi, Tag::CollarOnly);
    rhs += h * psi_c.values.dot(ns.values);

    return std::abs(lhs - rhs);
}

}  // namespace mln
