#include "mmd/metric.hpp"

#include <cmath>
#include <string>

namespace mmd {

VirtualVolumes uniform_volumes(int n_points, double domain_measure) {
    if (n_points <= 0) throw ConfigError("uniform_volumes: empty cloud");
    VirtualVolumes v;
    v.scheme = VolumeScheme::Uniform;
    v.mu = Eigen::VectorXd::Constant(n_points, domain_measure / n_points);
    return v;
}

VirtualVolumes multiresolution_volumes(const PointCloud& cloud, const CloudGraph& graph,
                                       const Kernel& kernel, double domain_measure) {
    VirtualVolumes v;
    v.scheme = VolumeScheme::Multiresolution;
    const int n = cloud.size();
    Eigen::VectorXd rho(n);
    for (int i = 0; i < n; ++i) {
        double density = kernel(0.0); // self term keeps rho finite
        for (auto [j, e] : graph.adj[i]) {
            (void)e;
            density += kernel((cloud.points[i] - cloud.points[j]).norm());
        }
        rho[i] = 1.0 / density;
    }
    v.mu = rho * (domain_measure / rho.sum());
    return v;
}

std::vector<std::vector<BoundaryPiece>> boundary_pieces_of(const PointCloud& cloud,
                                                           const std::vector<BoundarySegment>& segments) {
    std::vector<std::vector<BoundaryPiece>> pieces(cloud.size());
    for (int i = 0; i < cloud.size(); ++i) {
        const int seg = cloud.segment_of[i];
        if (seg < 0) continue;
        const BoundarySegment& s = segments.at(seg);
        pieces[i].push_back({s.centroid, s.normal, s.measure});
    }
    return pieces;
}

AreaPotentials solve_area_potentials(const PointCloud& cloud,
                                     const CloudGraph& graph,
                                     const VirtualVolumes& volumes,
                                     const std::vector<std::vector<BoundaryPiece>>& pieces,
                                     const BasisFrame& frame,
                                     const PotentialOptions& opts) {
    const int n = cloud.size();
    const int n_edges = graph.edge_count();
    AreaPotentials out;
    out.psi.resize(n, 6);
    out.edge_weights.resize(n_edges);

    for (int e = 0; e < n_edges; ++e) {
        const auto& edge = graph.edges[e];
        const Vec2 mid = 0.5 * (cloud.points[edge[0]] + cloud.points[edge[1]]);
        const Eigen::Vector3d phi = frame.p1(mid);
        for (int r = 0; r < 3; ++r) {
            if (phi[r] <= 0.0)
                throw InternalError("solve_area_potentials: nonpositive edge weight; frame shift too small");
            out.edge_weights[e][r] = phi[r];
        }
    }

    for (int r = 0; r < 3; ++r) {
        std::vector<Triplet> triplets;
        triplets.reserve(4 * n_edges);
        for (int e = 0; e < n_edges; ++e) {
            const double w = out.edge_weights[e][r];
            const int i = graph.edges[e][0];
            const int j = graph.edges[e][1];
            triplets.emplace_back(i, i, w);
            triplets.emplace_back(j, j, w);
            triplets.emplace_back(i, j, -w);
            triplets.emplace_back(j, i, -w);
        }
        SparseOperator L = SparseOperator::from_triplets(n, triplets, true, true, true);
        AmgPreconditioner amg(L);

        for (int k = 0; k < 2; ++k) {
            Eigen::VectorXd b(n);
            const double dphi = frame.p1_deriv(r, k);
            for (int i = 0; i < n; ++i) {
                double rhs = volumes.mu[i] * dphi;
                for (const BoundaryPiece& piece : pieces[i])
                    rhs -= piece.normal[k] * frame.p1(piece.midpoint)[r] * piece.length;
                b[i] = rhs;
            }

            const double violation = std::abs(b.sum()) / std::max(b.cwiseAbs().sum(), 1e-300);
            out.max_compatibility_violation = std::max(out.max_compatibility_violation, violation);
            if (violation > opts.compatibility_tol)
                throw SolverError("solve_area_potentials: compatibility 1^T b != 0 for (k,r)=(" +
                                  std::to_string(k + 1) + "," + std::to_string(r + 1) +
                                  "); volumes and boundary data are inconsistent");

            PcgOptions popts;
            popts.tol = opts.tol;
            popts.max_iterations = opts.max_iterations;
            popts.deflate_constant = true;
            auto [psi, report] = pcg(L, b, amg.as_preconditioner(), popts);
            if (!report.converged)
                throw SolverError("solve_area_potentials: PCG failed to converge for (k,r)=(" +
                                  std::to_string(k + 1) + "," + std::to_string(r + 1) + ")");
            out.psi.col(3 * k + r) = psi;
            out.solves.push_back(report);
        }
    }
    return out;
}

std::vector<Vec6> assemble_face_moments(const AreaPotentials& potentials,
                                        const CloudGraph& graph) {
    std::vector<Vec6> moments(graph.edge_count());
    for (int e = 0; e < graph.edge_count(); ++e) {
        const int i = graph.edges[e][0];
        const int j = graph.edges[e][1];
        Vec6 m;
        for (int k = 0; k < 2; ++k)
            for (int r = 0; r < 3; ++r) {
                const int s = 3 * k + r;
                m[s] = (potentials.psi(i, s) - potentials.psi(j, s)) * potentials.edge_weights[e][r];
            }
        moments[e] = m;
    }
    return moments;
}

std::vector<Vec6> boundary_face_moments(const std::vector<std::vector<BoundaryPiece>>& pieces,
                                        const BasisFrame& frame) {
    std::vector<Vec6> moments(pieces.size(), Vec6::Zero());
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        for (const BoundaryPiece& piece : pieces[i]) {
            const Eigen::Vector3d phi = frame.p1(piece.midpoint);
            for (int k = 0; k < 2; ++k)
                for (int r = 0; r < 3; ++r)
                    moments[i][3 * k + r] += piece.normal[k] * phi[r] * piece.length;
        }
    }
    return moments;
}

CartesianOracle cartesian_oracle_metric(int n_cells, const BasisFrame& frame) {
    if (n_cells < 2) throw ConfigError("cartesian_oracle_metric: need at least 2 cells per side");
    const int N = n_cells;
    const double h = 1.0 / N;

    CartesianOracle oracle;
    PointCloud& cloud = oracle.cloud;
    cloud.h_target = h;

    // interior lattice nodes first, then boundary lattice nodes
    std::vector<std::vector<int>> id(N + 1, std::vector<int>(N + 1, -1));
    for (int j = 1; j < N; ++j)
        for (int i = 1; i < N; ++i) {
            id[i][j] = cloud.size();
            cloud.points.emplace_back(i * h, j * h);
        }
    cloud.n_interior = cloud.size();
    for (int j = 0; j <= N; ++j)
        for (int i = 0; i <= N; ++i) {
            if (id[i][j] != -1 || (i > 0 && i < N && j > 0 && j < N)) continue;
            id[i][j] = cloud.size();
            cloud.points.emplace_back(i * h, j * h);
        }
    cloud.segment_of.assign(cloud.size(), -1);
    for (int p = cloud.n_interior; p < cloud.size(); ++p)
        cloud.segment_of[p] = p - cloud.n_interior;

    // 1D dual extents: half cells at the walls
    const auto extent = [&](int i) { return (i == 0 || i == N) ? 0.5 * h : h; };
    const auto lo = [&](int i) { return (i == 0) ? 0.0 : i * h - 0.5 * h; };
    const auto hi = [&](int i) { return (i == N) ? 1.0 : i * h + 0.5 * h; };

    oracle.volumes.resize(cloud.size());
    for (int j = 0; j <= N; ++j)
        for (int i = 0; i <= N; ++i)
            oracle.volumes[id[i][j]] = extent(i) * extent(j);

    CloudGraph& graph = oracle.graph;
    graph.radius = 1.5 * h;
    graph.adj.assign(cloud.size(), {});
    const auto add_edge = [&](int a, int b, const Vec2& centroid, const Vec2& normal, double len) {
        int lo_id = a, hi_id = b;
        Vec2 n = normal;
        if (lo_id > hi_id) {
            std::swap(lo_id, hi_id);
            n = -n;
        }
        const int e = graph.edge_count();
        graph.edges.push_back({lo_id, hi_id});
        graph.adj[lo_id].emplace_back(hi_id, e);
        graph.adj[hi_id].emplace_back(lo_id, e);
        oracle.face_centroids.push_back(centroid);
        Vec6 m;
        const Eigen::Vector3d phi = frame.p1(centroid);
        for (int k = 0; k < 2; ++k)
            for (int r = 0; r < 3; ++r)
                m[3 * k + r] = n[k] * phi[r] * len; // midpoint rule, exact for P1
        oracle.edge_moments.push_back(m);
    };

    for (int j = 0; j <= N; ++j)
        for (int i = 0; i < N; ++i) {
            // horizontal edge (i,j)-(i+1,j); dual face is vertical at x=(i+1/2)h
            const double x = (i + 0.5) * h;
            const Vec2 centroid(x, 0.5 * (lo(j) + hi(j)));
            add_edge(id[i][j], id[i + 1][j], centroid, Vec2(1, 0), extent(j));
        }
    for (int j = 0; j < N; ++j)
        for (int i = 0; i <= N; ++i) {
            const double y = (j + 0.5) * h;
            const Vec2 centroid(0.5 * (lo(i) + hi(i)), y);
            add_edge(id[i][j], id[i][j + 1], centroid, Vec2(0, 1), extent(i));
        }

    oracle.pieces.assign(cloud.size(), {});
    const auto add_piece = [&](int p, const Vec2& mid, const Vec2& n, double len) {
        oracle.pieces[p].push_back({mid, n, len});
    };
    for (int i = 0; i <= N; ++i) {
        const double xm = 0.5 * (lo(i) + hi(i));
        add_piece(id[i][0], Vec2(xm, 0.0), Vec2(0, -1), extent(i));
        add_piece(id[i][N], Vec2(xm, 1.0), Vec2(0, 1), extent(i));
    }
    for (int j = 0; j <= N; ++j) {
        const double ym = 0.5 * (lo(j) + hi(j));
        add_piece(id[0][j], Vec2(0.0, ym), Vec2(-1, 0), extent(j));
        add_piece(id[N][j], Vec2(1.0, ym), Vec2(1, 0), extent(j));
    }
    return oracle;
}

} // namespace mmd
