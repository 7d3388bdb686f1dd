#pragma once

#include "mmd/gmls.hpp"

#include <array>

namespace mmd {

enum class VolumeScheme { Uniform, Multiresolution };

/// Virtual dual-cell volumes: positive, summing to the domain measure.
struct VirtualVolumes {
    Eigen::VectorXd mu;
    VolumeScheme scheme = VolumeScheme::Uniform;

    double sum() const { return mu.sum(); }
};

/// mu_i = |Omega| / p for every point: the minimizer of sum mu_i^2 subject
/// to the sum constraint.
VirtualVolumes uniform_volumes(int n_points, double domain_measure);

/// Density-weighted volumes mu_i = rho_i |Omega| / sum rho_j with
/// rho_i = 1 / sum_j kernel(|x_i - x_j|); adapts to local point density.
VirtualVolumes multiresolution_volumes(const PointCloud& cloud, const CloudGraph& graph,
                                       const Kernel& kernel, double domain_measure);

/// One straight piece of the physical boundary owned by a cloud point.
struct BoundaryPiece {
    Vec2 midpoint = Vec2::Zero();
    Vec2 normal = Vec2::Zero();
    double length = 0.0;
};

/// Per-point boundary pieces (empty for interior points): each boundary
/// point owns its segment.
std::vector<std::vector<BoundaryPiece>> boundary_pieces_of(const PointCloud& cloud,
                                                           const std::vector<BoundarySegment>& segments);

/// Area potentials psi_{k,r} solving the weighted graph Laplacians whose
/// scaled graph gradients realize the virtual face moments; column s=k*3+r.
struct AreaPotentials {
    Eigen::MatrixXd psi; // p x 6, zero-mean columns
    std::vector<std::array<double, 3>> edge_weights; // phi_r at edge midpoints, all positive
    double max_compatibility_violation = 0.0;        // relative, over the 6 right-hand sides
    std::vector<SolveReport> solves;
};

struct PotentialOptions {
    double tol = 1e-10;
    int max_iterations = 2000;
    double compatibility_tol = 1e-10;
};

AreaPotentials solve_area_potentials(const PointCloud& cloud,
                                     const CloudGraph& graph,
                                     const VirtualVolumes& volumes,
                                     const std::vector<std::vector<BoundaryPiece>>& pieces,
                                     const BasisFrame& frame,
                                     const PotentialOptions& opts = {});

/// Face moments from the potential ansatz:
/// (mu_ij)_{k,r} = (psi_{k,r,i} - psi_{k,r,j}) * phi_r(x_ij), oriented i<j.
/// Antisymmetry is exact by storing one vector per unordered edge.
std::vector<Vec6> assemble_face_moments(const AreaPotentials& potentials,
                                        const CloudGraph& graph);

/// Exact boundary moments (mu_Gamma_i)_s = int_Gamma_i phi_s . n dS by
/// one-point midpoint quadrature (exact for straight pieces), per point.
std::vector<Vec6> boundary_face_moments(const std::vector<std::vector<BoundaryPiece>>& pieces,
                                        const BasisFrame& frame);

/// Mesh-based verification oracle on the unit square: unperturbed lattice
/// primal vertices (interior first), tensor-product dual cells clipped at
/// the boundary, and exact face integrals of the P1 basis.
struct CartesianOracle {
    PointCloud cloud;   // lattice nodes; boundary nodes carry synthetic segment ids
    CloudGraph graph;   // lattice 4-neighbor edges
    Eigen::VectorXd volumes;
    std::vector<Vec6> edge_moments;
    std::vector<std::vector<BoundaryPiece>> pieces;
    std::vector<Vec2> face_centroids; // per edge, the physical dual-face centroid
};

CartesianOracle cartesian_oracle_metric(int n_cells, const BasisFrame& frame);

} // namespace mmd
