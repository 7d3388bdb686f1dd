#pragma once

#include "mmd/cloud.hpp"
#include "mmd/linalg.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mmd {

/// Quartic compactly supported kernel (1 - rho/radius)^4_+.
struct Kernel {
    double radius = 0.0;

    double operator()(double rho) const {
        if (rho >= radius) return 0.0;
        const double t = 1.0 - rho / radius;
        const double t2 = t * t;
        return t2 * t2;
    }
};

/// Shared P1 monomial frame: phi = (1, (x - origin_x)/scale, (y - origin_y)/scale).
/// All nodal coefficients, face moments and metric weights are expressed in
/// this one frame so that contractions are basis-consistent. The origin is
/// placed so both frame monomials stay positive on the domain, which is what
/// keeps the weighted graph Laplacians M-matrices.
struct BasisFrame {
    Vec2 origin = Vec2::Zero();
    double scale = 1.0;

    static BasisFrame for_domain(const Domain& domain, double shift_fraction = 0.1);

    Eigen::Vector3d p1(const Vec2& x) const {
        return Eigen::Vector3d(1.0, (x.x() - origin.x()) / scale, (y_of(x) - origin.y()) / scale);
    }
    /// d(phi_r)/d(x_k), constant over space.
    double p1_deriv(int r, int k) const {
        if (r == 1 && k == 0) return 1.0 / scale;
        if (r == 2 && k == 1) return 1.0 / scale;
        return 0.0;
    }

    /// Value of a VectorP1 coefficient vector at x (ordering s = k*3 + r).
    Vec2 vec_eval(const Vec6& c, const Vec2& x) const {
        const Eigen::Vector3d phi = p1(x);
        return Vec2(c.head<3>().dot(phi), c.tail<3>().dot(phi));
    }
    /// Divergence of the VectorP1 expansion (a constant).
    double vec_divergence(const Vec6& c) const { return (c[1] + c[5]) / scale; }

    /// Exact coefficients of the linear field u(x) = A x + b.
    Vec6 linear_field_coeffs(const Eigen::Matrix2d& A, const Vec2& b) const;
    /// Exact coefficients of the scalar linear field u(x) = g . x + c.
    Eigen::Vector3d linear_scalar_coeffs(const Vec2& g, double c) const;

private:
    static double y_of(const Vec2& x) { return x.y(); }
};

/// Per-anchor GMLS solve operators, mapped to the shared frame. `p1_map`
/// takes neighborhood scalar samples to scalar-P1 coefficients; `grad_map`
/// takes them to the VectorP1 coefficients of the reconstructed gradient
/// (the P2-derived route used by the diffusive flux).
struct GmlsPlan {
    std::vector<int> nbrs;
    Eigen::MatrixXd p1_map;   // 3 x n
    Eigen::MatrixXd grad_map; // 6 x n, empty unless requested
    bool p1_ok = false;
    bool p2_ok = false;
};

/// Build a plan anchored at `anchor` from candidate sample points.
GmlsPlan build_plan(const Vec2& anchor,
                    const std::vector<int>& candidates,
                    const std::vector<Vec2>& points,
                    const Kernel& kernel,
                    const BasisFrame& frame,
                    bool want_p2);

/// Nodal plans: one per cloud point, anchored there, neighborhood = graph
/// adjacency plus the point itself (the kernel support equals the graph
/// radius when kernel.radius == graph.radius).
struct NodalGmls {
    BasisFrame frame;
    Kernel kernel;
    std::vector<GmlsPlan> plans;
    int p1_failures = 0;
    int p2_failures = 0;
};

NodalGmls build_nodal_gmls(const PointCloud& cloud, const CloudGraph& graph,
                           const Kernel& kernel, const BasisFrame& frame, bool want_p2);

/// Grow the graph radius (factor 1.25, max 4 retries) until every nodal
/// neighborhood is unisolvent for the requested reproduction order.
struct DiscreteNeighborhoods {
    CloudGraph graph;
    NodalGmls gmls;
    int retries = 0;
};
DiscreteNeighborhoods ensure_unisolvent_neighborhoods(const PointCloud& cloud,
                                                      double initial_radius,
                                                      const BasisFrame& frame,
                                                      bool want_p2);

/// Apply a plan to one component's point samples.
inline Eigen::Vector3d scalar_coeffs(const GmlsPlan& plan, const Eigen::VectorXd& samples) {
    Eigen::VectorXd local(plan.nbrs.size());
    for (std::size_t m = 0; m < plan.nbrs.size(); ++m) local[m] = samples[plan.nbrs[m]];
    return plan.p1_map * local;
}

/// VectorP1 coefficients of a sampled vector field (d independent scalar
/// solves sharing the plan's factorization).
Vec6 vector_coeffs(const GmlsPlan& plan, const Eigen::VectorXd& sx, const Eigen::VectorXd& sy);

/// Per-point nodal VectorP1 coefficients for a whole field.
std::vector<Vec6> nodal_vector_coefficients(const NodalGmls& gmls,
                                            const Eigen::VectorXd& sx,
                                            const Eigen::VectorXd& sy);

/// Blend nodal coefficients onto virtual faces: c_ij = theta c_i + (1-theta) c_j
/// per edge (i < j orientation of graph.edges).
std::vector<Vec6> blend_to_faces(const std::vector<Vec6>& nodal,
                                 const CloudGraph& graph,
                                 double theta = 0.5);
std::vector<Vec6> blend_to_faces(const std::vector<Vec6>& nodal,
                                 const CloudGraph& graph,
                                 const std::vector<double>& theta);

/// Upwind-restricted nodal solve: rows limited to the strictly upwind part
/// of the neighborhood (plus the anchor). Falls back to the full
/// neighborhood when the restricted set loses unisolvency.
struct UpwindPlan {
    std::vector<int> nbrs;
    Eigen::MatrixXd p1_map; // 3 x |nbrs|
    bool fallback = false;
};

struct UpwindGmls {
    std::vector<UpwindPlan> plans;
    int fallback_count = 0;
};

UpwindGmls build_upwind_gmls(const PointCloud& cloud, const NodalGmls& base,
                             const std::vector<Vec2>& velocity_at_points);

} // namespace mmd
