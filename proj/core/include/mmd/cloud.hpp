#pragma once

#include "mmd/geometry.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace mmd {

/// Quasi-uniform particle set: interior points first, then one boundary
/// point per boundary segment (its barycenter). Immutable after generation.
struct PointCloud {
    std::vector<Vec2> points;
    int n_interior = 0;
    std::vector<int> segment_of; // per point: owning segment index, -1 for interior
    double h_target = 0.0;
    double fill_distance = 0.0; // sampled estimate of sup_x min_i |x - x_i|
    double separation = 0.0;    // q_X = half the minimum pairwise distance
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(points.size()); }
    int n_boundary() const { return size() - n_interior; }
    bool is_boundary(int i) const { return i >= n_interior; }
};

enum class PerturbMode { PerComponent, Radial };

/// Interior lattice of spacing `h_target` clipped strictly to the domain,
/// each point perturbed componentwise by Uniform(-p*h, p*h) with
/// p = perturbation_fraction (redrawn while it lands outside, max 100
/// attempts), plus boundary segment barycenters.
PointCloud generate_cloud(const Domain& domain,
                          const std::vector<BoundarySegment>& segments,
                          double h_target,
                          double perturbation_fraction,
                          std::uint64_t seed,
                          PerturbMode mode = PerturbMode::PerComponent);

/// Estimate of the fill distance by probing the domain on a lattice with
/// spacing `probe_spacing` (an under-estimate within lattice resolution).
double estimate_fill_distance(const std::vector<Vec2>& points,
                              const Domain& domain,
                              double probe_spacing);

/// Uniform spatial binning for fixed-radius neighbor queries.
class RadiusGrid {
public:
    RadiusGrid(const std::vector<Vec2>& points, double cell_size);

    /// Indices of stored points with |p - x| < r; requires r <= cell size.
    void query(const Vec2& x, double r, std::vector<int>& out) const;

    /// Distance from x to the nearest stored point (full scan fallback when
    /// the neighborhood rings are empty).
    double nearest_distance(const Vec2& x) const;

private:
    const std::vector<Vec2>& points_;
    double cell_ = 0.0;
    Vec2 origin_ = Vec2::Zero();
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<int>> bins_;

    int bin_of(const Vec2& x) const;
};

/// epsilon-ball graph of the cloud: edge (i,j) iff |x_i - x_j| < radius.
/// Doubles as the virtual primal mesh of the meshless divergence operator.
struct CloudGraph {
    double radius = 0.0;
    std::vector<std::array<int, 2>> edges;              // i < j
    std::vector<std::vector<std::pair<int, int>>> adj;  // per vertex: (neighbor, edge id)

    int edge_count() const { return static_cast<int>(edges.size()); }
    int vertex_count() const { return static_cast<int>(adj.size()); }
};

/// Build the epsilon-ball graph by uniform binning and verify connectivity
/// by breadth-first traversal. Throws ConfigError with a hint to raise
/// `radius` when the graph is disconnected.
CloudGraph build_graph(const PointCloud& cloud, double radius);

/// As build_graph but for a bare point list (test and oracle use).
CloudGraph build_graph(const std::vector<Vec2>& points, double radius);

} // namespace mmd
