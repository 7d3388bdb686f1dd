#include "mmd/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace mmd {

PointCloud generate_cloud(const Domain& domain,
                          const std::vector<BoundarySegment>& segments,
                          double h_target,
                          double perturbation_fraction,
                          std::uint64_t seed,
                          PerturbMode mode) {
    if (h_target <= 0.0) throw ConfigError("generate_cloud: h_target must be positive");
    if (perturbation_fraction < 0.0 || perturbation_fraction >= 0.5)
        throw ConfigError("generate_cloud: perturbation_fraction must lie in [0, 0.5)");

    PointCloud cloud;
    cloud.h_target = h_target;
    cloud.seed = seed;
    SplitMix64 rng(seed);

    const double tol = 1e-12;
    const double amp = perturbation_fraction * h_target;
    const Vec2 lo = domain.bbox_min;
    const Vec2 hi = domain.bbox_max;

    // Lattice anchored at the bounding-box corner, strict interior test.
    const int imax = static_cast<int>(std::floor((hi.x() - lo.x()) / h_target)) + 1;
    const int jmax = static_cast<int>(std::floor((hi.y() - lo.y()) / h_target)) + 1;
    for (int j = 0; j <= jmax; ++j) {
        for (int i = 0; i <= imax; ++i) {
            const Vec2 base = lo + Vec2(i * h_target, j * h_target);
            if (!domain.contains(base, tol)) continue;
            Vec2 placed = base;
            if (amp > 0.0) {
                bool accepted = false;
                for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
                    Vec2 offset;
                    if (mode == PerturbMode::PerComponent) {
                        offset = Vec2(rng.uniform(-amp, amp), rng.uniform(-amp, amp));
                    } else {
                        const double angle = rng.uniform(0.0, 2.0 * M_PI);
                        const double radius = rng.uniform(0.0, amp);
                        offset = radius * Vec2(std::cos(angle), std::sin(angle));
                    }
                    const Vec2 candidate = base + offset;
                    if (domain.contains(candidate, tol)) {
                        placed = candidate;
                        accepted = true;
                    }
                }
            }
            cloud.points.push_back(placed);
        }
    }
    cloud.n_interior = static_cast<int>(cloud.points.size());
    if (cloud.n_interior == 0)
        throw ConfigError("generate_cloud: no interior points; domain smaller than spacing");

    cloud.segment_of.assign(cloud.points.size(), -1);
    for (const BoundarySegment& s : segments) {
        cloud.points.push_back(s.centroid);
        cloud.segment_of.push_back(s.index);
    }

    cloud.fill_distance = estimate_fill_distance(cloud.points, domain, 0.25 * h_target);

    // Separation distance via binning: the minimizing pair is within one
    // cell ring for any sane cloud.
    RadiusGrid grid(cloud.points, 2.0 * h_target);
    std::vector<int> nbrs;
    double min_pair = std::numeric_limits<double>::max();
    for (int i = 0; i < cloud.size(); ++i) {
        grid.query(cloud.points[i], 2.0 * h_target, nbrs);
        for (int j : nbrs)
            if (j != i) min_pair = std::min(min_pair, (cloud.points[i] - cloud.points[j]).norm());
    }
    cloud.separation = 0.5 * min_pair;
    return cloud;
}

double estimate_fill_distance(const std::vector<Vec2>& points,
                              const Domain& domain,
                              double probe_spacing) {
    if (points.empty()) throw ConfigError("estimate_fill_distance: empty cloud");
    RadiusGrid grid(points, std::max(probe_spacing * 4.0, 1e-12));
    double worst = 0.0;
    const Vec2 lo = domain.bbox_min;
    const Vec2 hi = domain.bbox_max;
    const int imax = static_cast<int>(std::floor((hi.x() - lo.x()) / probe_spacing)) + 1;
    const int jmax = static_cast<int>(std::floor((hi.y() - lo.y()) / probe_spacing)) + 1;
    for (int j = 0; j <= jmax; ++j) {
        for (int i = 0; i <= imax; ++i) {
            const Vec2 probe = lo + Vec2(i * probe_spacing, j * probe_spacing);
            if (!domain.contains(probe, 0.0)) continue;
            worst = std::max(worst, grid.nearest_distance(probe));
        }
    }
    return worst;
}

RadiusGrid::RadiusGrid(const std::vector<Vec2>& points, double cell_size)
    : points_(points), cell_(cell_size) {
    Vec2 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    Vec2 hi = -lo;
    for (const Vec2& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    if (points.empty()) lo = hi = Vec2::Zero();
    origin_ = lo;
    nx_ = std::max(1, static_cast<int>(std::floor((hi.x() - lo.x()) / cell_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::floor((hi.y() - lo.y()) / cell_)) + 1);
    bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (int i = 0; i < static_cast<int>(points.size()); ++i)
        bins_[bin_of(points[i])].push_back(i);
}

int RadiusGrid::bin_of(const Vec2& x) const {
    int bx = static_cast<int>(std::floor((x.x() - origin_.x()) / cell_));
    int by = static_cast<int>(std::floor((x.y() - origin_.y()) / cell_));
    bx = std::clamp(bx, 0, nx_ - 1);
    by = std::clamp(by, 0, ny_ - 1);
    return by * nx_ + bx;
}

void RadiusGrid::query(const Vec2& x, double r, std::vector<int>& out) const {
    out.clear();
    const int bx = static_cast<int>(std::floor((x.x() - origin_.x()) / cell_));
    const int by = static_cast<int>(std::floor((x.y() - origin_.y()) / cell_));
    const int ring = static_cast<int>(std::ceil(r / cell_));
    const double r2 = r * r;
    for (int dy = -ring; dy <= ring; ++dy) {
        const int cy = by + dy;
        if (cy < 0 || cy >= ny_) continue;
        for (int dx = -ring; dx <= ring; ++dx) {
            const int cx = bx + dx;
            if (cx < 0 || cx >= nx_) continue;
            for (int idx : bins_[static_cast<std::size_t>(cy) * nx_ + cx])
                if ((points_[idx] - x).squaredNorm() < r2) out.push_back(idx);
        }
    }
}

double RadiusGrid::nearest_distance(const Vec2& x) const {
    const int bx = static_cast<int>(std::floor((x.x() - origin_.x()) / cell_));
    const int by = static_cast<int>(std::floor((x.y() - origin_.y()) / cell_));
    double best = std::numeric_limits<double>::max();
    const int max_ring = std::max(nx_, ny_);
    for (int ring = 0; ring <= max_ring; ++ring) {
        bool scanned = false;
        for (int dy = -ring; dy <= ring; ++dy) {
            const int cy = by + dy;
            if (cy < 0 || cy >= ny_) continue;
            for (int dx = -ring; dx <= ring; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                const int cx = bx + dx;
                if (cx < 0 || cx >= nx_) continue;
                scanned = true;
                for (int idx : bins_[static_cast<std::size_t>(cy) * nx_ + cx])
                    best = std::min(best, (points_[idx] - x).norm());
            }
        }
        // One extra ring after the first hit covers diagonal corner cases.
        if (best < std::numeric_limits<double>::max() && ring > 0 &&
            best <= (ring - 1) * cell_)
            break;
        if (!scanned && ring > 0 && best < std::numeric_limits<double>::max()) break;
    }
    return best;
}

CloudGraph build_graph(const std::vector<Vec2>& points, double radius) {
    if (radius <= 0.0) throw ConfigError("build_graph: radius must be positive");
    CloudGraph graph;
    graph.radius = radius;
    const int n = static_cast<int>(points.size());
    graph.adj.assign(n, {});

    RadiusGrid grid(points, radius);
    std::vector<int> nbrs;
    for (int i = 0; i < n; ++i) {
        grid.query(points[i], radius, nbrs);
        for (int j : nbrs) {
            if (j <= i) continue;
            const int e = graph.edge_count();
            graph.edges.push_back({i, j});
            graph.adj[i].emplace_back(j, e);
            graph.adj[j].emplace_back(i, e);
        }
    }

    // Connectivity check (graph Laplacian solvability needs one component).
    std::vector<char> seen(n, 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (auto [w, e] : graph.adj[v]) {
            (void)e;
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                frontier.push(w);
            }
        }
    }
    if (reached != n)
        throw ConfigError("build_graph: epsilon-ball graph is disconnected; raise the graph radius");
    return graph;
}

CloudGraph build_graph(const PointCloud& cloud, double radius) {
    return build_graph(cloud.points, radius);
}

} // namespace mmd
