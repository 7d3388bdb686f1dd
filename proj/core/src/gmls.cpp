#include "mmd/gmls.hpp"

#include <cmath>

namespace mmd {

BasisFrame BasisFrame::for_domain(const Domain& domain, double shift_fraction) {
    BasisFrame frame;
    const double diam = domain.diameter();
    frame.origin = domain.bbox_min - shift_fraction * diam * Vec2::Ones();
    frame.scale = diam;
    return frame;
}

Vec6 BasisFrame::linear_field_coeffs(const Eigen::Matrix2d& A, const Vec2& b) const {
    // u_k(x) = b_k + A_k. x = (b_k + A_k . origin) + scale*A_k0 X + scale*A_k1 Y
    Vec6 c;
    for (int k = 0; k < 2; ++k) {
        c[3 * k + 0] = b[k] + A.row(k).dot(origin);
        c[3 * k + 1] = scale * A(k, 0);
        c[3 * k + 2] = scale * A(k, 1);
    }
    return c;
}

Eigen::Vector3d BasisFrame::linear_scalar_coeffs(const Vec2& g, double c) const {
    return Eigen::Vector3d(c + g.dot(origin), scale * g.x(), scale * g.y());
}

namespace {

/// Local-to-frame conversion for scalar P1 coefficients: the local basis is
/// monomials in (x - anchor)/eps.
Eigen::Matrix3d local_to_frame(const Vec2& anchor, double eps, const BasisFrame& frame) {
    const Vec2 d = anchor - frame.origin;
    Eigen::Matrix3d T = Eigen::Matrix3d::Zero();
    T(0, 0) = 1.0;
    T(0, 1) = -d.x() / eps;
    T(0, 2) = -d.y() / eps;
    T(1, 1) = frame.scale / eps;
    T(2, 2) = frame.scale / eps;
    return T;
}

struct WeightedRows {
    std::vector<int> ids;
    Eigen::VectorXd sqw;
    Eigen::MatrixXd xi; // local coordinates, n x 2
};

WeightedRows gather_rows(const Vec2& anchor, const std::vector<int>& candidates,
                         const std::vector<Vec2>& points, const Kernel& kernel) {
    WeightedRows rows;
    for (int id : candidates) {
        const double w = kernel((points[id] - anchor).norm());
        if (w <= 0.0) continue;
        rows.ids.push_back(id);
    }
    const int n = static_cast<int>(rows.ids.size());
    rows.sqw.resize(n);
    rows.xi.resize(n, 2);
    for (int m = 0; m < n; ++m) {
        const Vec2& p = points[rows.ids[m]];
        rows.sqw[m] = std::sqrt(kernel((p - anchor).norm()));
        rows.xi.row(m) = ((p - anchor) / kernel.radius).transpose();
    }
    return rows;
}

} // namespace

GmlsPlan build_plan(const Vec2& anchor,
                    const std::vector<int>& candidates,
                    const std::vector<Vec2>& points,
                    const Kernel& kernel,
                    const BasisFrame& frame,
                    bool want_p2) {
    GmlsPlan plan;
    WeightedRows rows = gather_rows(anchor, candidates, points, kernel);
    plan.nbrs = rows.ids;
    const int n = static_cast<int>(rows.ids.size());
    const double eps = kernel.radius;

    if (n >= 3) {
        Eigen::MatrixXd B(n, 3);
        for (int m = 0; m < n; ++m)
            B.row(m) << 1.0, rows.xi(m, 0), rows.xi(m, 1);
        const Eigen::MatrixXd A = rows.sqw.asDiagonal() * B;
        if (auto solve = qr_solve_operator(A)) {
            // columns scaled back by sqrt(w): maps raw samples to local coeffs
            const Eigen::MatrixXd local = (*solve) * rows.sqw.asDiagonal();
            plan.p1_map = local_to_frame(anchor, eps, frame) * local;
            plan.p1_ok = true;
        }
    }

    if (want_p2 && n >= 6) {
        Eigen::MatrixXd B(n, 6);
        for (int m = 0; m < n; ++m) {
            const double a = rows.xi(m, 0), b = rows.xi(m, 1);
            B.row(m) << 1.0, a, b, a * a, a * b, b * b;
        }
        const Eigen::MatrixXd A = rows.sqw.asDiagonal() * B;
        if (auto solve = qr_solve_operator(A)) {
            const Eigen::MatrixXd local = (*solve) * rows.sqw.asDiagonal();
            // d/dx and d/dy of the local quadratic, as local P1 coefficients
            Eigen::MatrixXd Dx = Eigen::MatrixXd::Zero(3, 6);
            Eigen::MatrixXd Dy = Eigen::MatrixXd::Zero(3, 6);
            Dx(0, 1) = 1.0; Dx(1, 3) = 2.0; Dx(2, 4) = 1.0;
            Dy(0, 2) = 1.0; Dy(1, 4) = 1.0; Dy(2, 5) = 2.0;
            const Eigen::Matrix3d T = local_to_frame(anchor, eps, frame);
            plan.grad_map.resize(6, n);
            plan.grad_map.topRows<3>() = T * (Dx * local) / eps;
            plan.grad_map.bottomRows<3>() = T * (Dy * local) / eps;
            plan.p2_ok = true;
        }
    }
    return plan;
}

NodalGmls build_nodal_gmls(const PointCloud& cloud, const CloudGraph& graph,
                           const Kernel& kernel, const BasisFrame& frame, bool want_p2) {
    NodalGmls out;
    out.frame = frame;
    out.kernel = kernel;
    out.plans.reserve(cloud.size());
    std::vector<int> candidates;
    for (int i = 0; i < cloud.size(); ++i) {
        candidates.clear();
        candidates.push_back(i);
        for (auto [j, e] : graph.adj[i]) {
            (void)e;
            candidates.push_back(j);
        }
        GmlsPlan plan = build_plan(cloud.points[i], candidates, cloud.points, kernel, frame, want_p2);
        if (!plan.p1_ok) ++out.p1_failures;
        if (want_p2 && !plan.p2_ok) ++out.p2_failures;
        out.plans.push_back(std::move(plan));
    }
    return out;
}

DiscreteNeighborhoods ensure_unisolvent_neighborhoods(const PointCloud& cloud,
                                                      double initial_radius,
                                                      const BasisFrame& frame,
                                                      bool want_p2) {
    double radius = initial_radius;
    for (int attempt = 0; attempt <= 4; ++attempt) {
        DiscreteNeighborhoods out;
        out.retries = attempt;
        out.graph = build_graph(cloud, radius);
        out.gmls = build_nodal_gmls(cloud, out.graph, Kernel{radius}, frame, want_p2);
        if (out.gmls.p1_failures == 0 && (!want_p2 || out.gmls.p2_failures == 0))
            return out;
        radius *= 1.25;
    }
    throw ConfigError("ensure_unisolvent_neighborhoods: neighborhoods stay unisolvency-deficient "
                      "after 4 radius increases");
}

Vec6 vector_coeffs(const GmlsPlan& plan, const Eigen::VectorXd& sx, const Eigen::VectorXd& sy) {
    Vec6 c;
    c.head<3>() = scalar_coeffs(plan, sx);
    c.tail<3>() = scalar_coeffs(plan, sy);
    return c;
}

std::vector<Vec6> nodal_vector_coefficients(const NodalGmls& gmls,
                                            const Eigen::VectorXd& sx,
                                            const Eigen::VectorXd& sy) {
    std::vector<Vec6> out;
    out.reserve(gmls.plans.size());
    for (const GmlsPlan& plan : gmls.plans) {
        if (!plan.p1_ok) throw SolverError("nodal_vector_coefficients: unisolvency-deficient plan");
        out.push_back(vector_coeffs(plan, sx, sy));
    }
    return out;
}

std::vector<Vec6> blend_to_faces(const std::vector<Vec6>& nodal,
                                 const CloudGraph& graph,
                                 double theta) {
    std::vector<Vec6> out;
    out.reserve(graph.edges.size());
    for (const auto& e : graph.edges)
        out.push_back(theta * nodal[e[0]] + (1.0 - theta) * nodal[e[1]]);
    return out;
}

std::vector<Vec6> blend_to_faces(const std::vector<Vec6>& nodal,
                                 const CloudGraph& graph,
                                 const std::vector<double>& theta) {
    if (theta.size() != graph.edges.size())
        throw InternalError("blend_to_faces: one theta per edge required");
    std::vector<Vec6> out;
    out.reserve(graph.edges.size());
    for (std::size_t e = 0; e < graph.edges.size(); ++e)
        out.push_back(theta[e] * nodal[graph.edges[e][0]] +
                      (1.0 - theta[e]) * nodal[graph.edges[e][1]]);
    return out;
}

UpwindGmls build_upwind_gmls(const PointCloud& cloud, const NodalGmls& base,
                             const std::vector<Vec2>& velocity_at_points) {
    UpwindGmls out;
    out.plans.reserve(cloud.size());
    for (int i = 0; i < cloud.size(); ++i) {
        const GmlsPlan& full = base.plans[i];
        const Vec2 a = velocity_at_points[i];
        UpwindPlan up;

        std::vector<int> restricted;
        for (int id : full.nbrs)
            if (id == i || a.dot(cloud.points[id] - cloud.points[i]) < 0.0)
                restricted.push_back(id);

        bool ok = false;
        if (restricted.size() >= 3) {
            GmlsPlan plan = build_plan(cloud.points[i], restricted, cloud.points,
                                       base.kernel, base.frame, false);
            if (plan.p1_ok) {
                up.nbrs = std::move(plan.nbrs);
                up.p1_map = std::move(plan.p1_map);
                ok = true;
            }
        }
        if (!ok) {
            up.nbrs = full.nbrs;
            up.p1_map = full.p1_map;
            up.fallback = true;
            ++out.fallback_count;
        }
        out.plans.push_back(std::move(up));
    }
    return out;
}

} // namespace mmd
