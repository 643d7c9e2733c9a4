#include "geometry.hpp"

#include <cmath>

namespace mln {

const char* tag_name(Tag t) {
    switch (t) {
        case Tag::Interior: return "interior";
        case Tag::Extended: return "extended";
        case Tag::BoundaryTrace: return "boundary";
        case Tag::CollarOnly: return "collar";
    }
    return "?";
}

Geometry Geometry::build(double x_left, double x_right, int n_interior,
                         double collar_width) {
    if (!(x_left < x_right))
        throw ConfigError("geometry.x_left must be < geometry.x_right");
    if (n_interior < 4)
        throw ConfigError("geometry.n_interior must be >= 4 (got " +
                          std::to_string(n_interior) + ")");
    const double h = (x_right - x_left) / n_interior;
    if (!(collar_width > 0) || collar_width < h)
        throw ConfigError("geometry.collar_width must be >= h = " +
                          std::to_string(h));

    Geometry g;
    g.x_left_ = x_left;
    g.x_right_ = x_right;
    g.n_interior_ = n_interior;
    g.h_ = h;
    g.n_collar_ = static_cast<int>(std::lround(collar_width / h));
    if (g.n_collar_ < 1) g.n_collar_ = 1;

    const int n = g.extended_nodes();
    g.xs_.resize(n);
    // Coordinates as exact multiples of h from x_left so the grid is
    // arithmetic to machine precision.
    for (int j = 0; j < n; ++j)
        g.xs_[j] = x_left + (j - g.n_collar_) * h;
    return g;
}

int Geometry::node_count(Tag t) const {
    switch (t) {
        case Tag::Interior: return interior_nodes();
        case Tag::Extended: return extended_nodes();
        case Tag::BoundaryTrace: return 2;
        case Tag::CollarOnly: return collar_nodes();
    }
    return 0;
}

int Geometry::ext_collar(int c) const {
    if (c < n_collar_) return c;                        // left collar
    return ext_right_boundary() + 1 + (c - n_collar_);  // right collar
}

Eigen::VectorXd Geometry::coords(Tag t) const {
    const int n = node_count(t);
    Eigen::VectorXd xs(n);
    switch (t) {
        case Tag::Extended: return xs_;
        case Tag::Interior:
            for (int i = 0; i < n; ++i) xs[i] = xs_[ext_interior(i)];
            break;
        case Tag::BoundaryTrace:
            xs[0] = xs_[ext_left_boundary()];
            xs[1] = xs_[ext_right_boundary()];
            break;
        case Tag::CollarOnly:
            for (int c = 0; c < n; ++c) xs[c] = xs_[ext_collar(c)];
            break;
    }
    return xs;
}

GridFunction make_grid_function(const Geometry& g, Tag t) {
    return GridFunction{t, Eigen::VectorXd::Zero(g.node_count(t))};
}

namespace {

void check_size(const Geometry& g, const GridFunction& u) {
    if (u.values.size() != g.node_count(u.tag))
        throw TagMismatchError(std::string("grid function sized ") +
                               std::to_string(u.values.size()) +
                               " does not match node set '" + tag_name(u.tag) +
                               "'");
}

}  // namespace

GridFunction restrict_to(const Geometry& g, const GridFunction& u, Tag target) {
    check_size(g, u);
    if (u.tag == target) return u;
    if (u.tag != Tag::Extended)
        throw TagMismatchError(std::string("cannot restrict '") +
                               tag_name(u.tag) + "' to '" + tag_name(target) +
                               "'");
    GridFunction out = make_grid_function(g, target);
    switch (target) {
        case Tag::Interior:
            for (int i = 0; i < g.interior_nodes(); ++i)
                out.values[i] = u.values[g.ext_interior(i)];
            break;
        case Tag::BoundaryTrace:
            out.values[0] = u.values[g.ext_left_boundary()];
            out.values[1] = u.values[g.ext_right_boundary()];
            break;
        case Tag::CollarOnly:
            for (int c = 0; c < g.collar_nodes(); ++c)
                out.values[c] = u.values[g.ext_collar(c)];
            break;
        case Tag::Extended:
            break;  // handled above
    }
    return out;
}

GridFunction extend_by_zero(const Geometry& g, const GridFunction& u) {
    check_size(g, u);
    if (u.tag == Tag::Extended) return u;
    GridFunction out = make_grid_function(g, Tag::Extended);
    switch (u.tag) {
        case Tag::Interior:
            for (int i = 0; i < g.interior_nodes(); ++i)
                out.values[g.ext_interior(i)] = u.values[i];
            break;
        case Tag::BoundaryTrace:
            out.values[g.ext_left_boundary()] = u.values[0];
            out.values[g.ext_right_boundary()] = u.values[1];
            break;
        case Tag::CollarOnly:
            for (int c = 0; c < g.collar_nodes(); ++c)
                out.values[g.ext_collar(c)] = u.values[c];
            break;
        case Tag::Extended:
            break;
    }
    return out;
}

TimeGrid TimeGrid::build(double t_final, int n_steps) {
    if (!(t_final > 0)) throw ConfigError("time.t_final must be > 0");
    if (n_steps < 1) throw ConfigError("time.n_steps must be >= 1");
    return TimeGrid{t_final, n_steps, t_final / n_steps};
}

}  // namespace mln
