#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pmpc/lp.hpp"

namespace pmpc {

/// Convex polyhedron in halfspace form {x : Hx <= g}.
///
/// Rows are normalized to unit Euclidean norm on construction so that the
/// library-wide absolute tolerance of 1e-9 on support values is meaningful.
/// Zero rows are dropped (vacuous) or mark the set empty (unsatisfiable).
/// Emptiness is a first-class state, not an error: set operations can
/// legitimately produce it.
class HPolytope {
public:
    HPolytope() = default;

    /// Builds {x : Hx <= g}, normalizing rows. H must have g.size() rows.
    static HPolytope from_inequalities(Eigen::MatrixXd H, Eigen::VectorXd g);

    /// Axis-aligned box {x : lo <= x <= hi}.
    static HPolytope box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

    /// Centered box {x : |x_i| <= radius}.
    static HPolytope cube(int dim, double radius);

    /// The singleton {0} in the given dimension.
    static HPolytope origin(int dim);

    int ambient_dimension() const { return dim_; }
    int num_rows() const { return static_cast<int>(H_.rows()); }
    const Eigen::MatrixXd& H() const { return H_; }
    const Eigen::VectorXd& g() const { return g_; }

    /// True when a prior construction or operation already proved emptiness.
    bool known_empty() const { return empty_flag_; }
    HPolytope& mark_empty() { empty_flag_ = true; return *this; }

    bool contains_point(const Eigen::VectorXd& x, double tol = 1e-9) const;

private:
    Eigen::MatrixXd H_;
    Eigen::VectorXd g_;
    int dim_ = 0;
    bool empty_flag_ = false;
};

struct SupportResult {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Eigen::VectorXd maximizer;
};

/// max_{x in set} dir'x together with a maximizer.
SupportResult support(const HPolytope& set, const Eigen::VectorXd& dir);

/// LP feasibility test (ignores and updates nothing; the emptiness flag is a cache).
bool is_empty(const HPolytope& set);

/// Support finite along +/- every axis direction.
bool is_bounded(const HPolytope& set);

/// {x : x + map*s in set for all s in sub}; rows keep their normals, offsets
/// shrink by the support of `sub` in the mapped normal direction.
HPolytope pontryagin_difference(const HPolytope& set, const HPolytope& sub,
                                const Eigen::MatrixXd& map);

/// Row-stack of both constraint systems followed by redundancy removal.
HPolytope intersect(const HPolytope& a, const HPolytope& b);

/// {x : Mx in set}, returned unreduced.
HPolytope affine_preimage(const HPolytope& set, const Eigen::MatrixXd& M);

/// Drops every row whose removal does not change the set (1e-9 support slack).
HPolytope remove_redundancy(const HPolytope& set);

/// True iff b is contained in a (within 1e-9 on support values).
bool contains(const HPolytope& a, const HPolytope& b, double tol = 1e-9);

/// Boundary polyline of a 2-D polytope via a support-function ray sweep
/// (default 1 degree resolution); consecutive duplicates removed.
std::vector<Eigen::Vector2d> boundary_2d(const HPolytope& set, double step_deg = 1.0);

/// Euclidean radius of the tight axis-aligned bounding box; exact for boxes,
/// an upper bound on max ||x|| otherwise.
double bounding_radius(const HPolytope& set);

/// Vertices of the tight axis-aligned bounding box (2^d points).
std::vector<Eigen::VectorXd> bounding_box_vertices(const HPolytope& set);

}  // namespace pmpc
