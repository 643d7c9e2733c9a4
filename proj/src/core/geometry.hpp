#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "errors.hpp"

namespace mln {

enum class Tag { Interior, Extended, BoundaryTrace, CollarOnly };

const char* tag_name(Tag t);

// Uniform 1D grid over the interval (x_left, x_right) together with a
// truncated exterior collar of n_collar cells on each side.  Node ordering is
// fixed globally: left collar, left boundary, interior ascending, right
// boundary, right collar.  Immutable after construction.
class Geometry {
public:
    // n_interior counts interval cells, so there are n_interior-1 interior
    // nodes.  The collar is rounded to whole cells: n_collar = round(L/h).
    static Geometry build(double x_left, double x_right, int n_interior,
                          double collar_width);

    double x_left() const { return x_left_; }
    double x_right() const { return x_right_; }
    double h() const { return h_; }
    int n_cells() const { return n_interior_; }
    int n_collar() const { return n_collar_; }
    double collar_width() const { return n_collar_ * h_; }

    int interior_nodes() const { return n_interior_ - 1; }
    int collar_nodes() const { return 2 * n_collar_; }
    int extended_nodes() const { return interior_nodes() + 2 + collar_nodes(); }
    int node_count(Tag t) const;

    // Extended-ordering index helpers.
    int ext_left_boundary() const { return n_collar_; }
    int ext_right_boundary() const { return n_collar_ + n_interior_; }
    int ext_interior(int i) const { return n_collar_ + 1 + i; }   // i in [0, nI)
    int ext_collar(int c) const;                                  // c in [0, 2*nc)

    const Eigen::VectorXd& extended_coords() const { return xs_; }
    Eigen::VectorXd coords(Tag t) const;

private:
    Geometry() = default;
    double x_left_ = 0, x_right_ = 1, h_ = 0;
    int n_interior_ = 0, n_collar_ = 0;
    Eigen::VectorXd xs_;  // all extended nodes, strictly ascending
};

// A real-valued function sampled on one node set of a geometry.
struct GridFunction {
    Tag tag = Tag::Extended;
    Eigen::VectorXd values;
};

GridFunction make_grid_function(const Geometry& g, Tag t);

// Copy the shared nodes; the source must cover the target node set.
GridFunction restrict_to(const Geometry& g, const GridFunction& u, Tag target);

// Extended function equal to u on its own node set and 0 elsewhere.
GridFunction extend_by_zero(const Geometry& g, const GridFunction& u);

struct TimeGrid {
    double t_final = 1.0;
    int n_steps = 1;
    double tau = 1.0;

    static TimeGrid build(double t_final, int n_steps);
    double t(int m) const { return tau * m; }
};

// M+1 extended-tagged frames sharing one geometry and time grid.
struct Trajectory {
    TimeGrid time;
    std::vector<Eigen::VectorXd> frames;  // each of extended size
};

}  // namespace mln
