#pragma once

#include "mmd/types.hpp"

#include <functional>
#include <vector>

namespace mmd {

enum class DomainKind { UnitSquare, UnitDisk, PerforatedSquare };

/// Closed polygonal loop; the segment from back() to front() is implied.
struct Loop {
    std::vector<Vec2> vertices;

    double signed_area() const;
    double perimeter() const;
};

/// Planar computational domain bounded by polygonal loops. The first loop is
/// the outer boundary (counterclockwise); any further loops are holes
/// (clockwise). The disk is polygonalized, so `measure` is the polygon area.
struct Domain {
    DomainKind kind = DomainKind::UnitSquare;
    double measure = 0.0;
    std::vector<Loop> loops;
    Vec2 bbox_min = Vec2::Zero();
    Vec2 bbox_max = Vec2::Zero();

    double perimeter() const;
    double diameter() const { return (bbox_max - bbox_min).norm(); }

    /// Strict interior test: points within `tol` of any boundary edge count
    /// as outside, as do points inside holes.
    bool contains(const Vec2& x, double tol = 1e-12) const;

    /// Distance to the nearest boundary edge (all loops).
    double boundary_distance(const Vec2& x) const;

    static Domain unit_square();
    /// Inscribed regular polygon with `edges` sides (>= 8).
    static Domain unit_disk(int edges);
    /// Unit square minus two axis-aligned square holes of side `hole_side`
    /// centered at `c1`, `c2`.
    static Domain perforated_square(double hole_side = 0.2,
                                    Vec2 c1 = Vec2(0.3, 0.3),
                                    Vec2 c2 = Vec2(0.7, 0.7));
};

/// Dirichlet segments form the prescribed-value part of the boundary;
/// Neumann segments carry flux data.
enum class BcType { Neumann, Dirichlet };

struct BoundarySegment {
    int index = -1;
    Vec2 a = Vec2::Zero();
    Vec2 b = Vec2::Zero();
    Vec2 centroid = Vec2::Zero();
    Vec2 normal = Vec2::Zero(); // unit, outward of the domain
    double measure = 0.0;       // |b - a|
    BcType bc = BcType::Neumann;
};

/// Partition every boundary loop into straight segments with target length
/// `h_target`; each produced length lies in [h_target/2, 2*h_target].
std::vector<BoundarySegment> segment_boundary(const Domain& domain, double h_target);

/// One tagging rule; `tag_boundary` requires exactly one rule to match each
/// segment.
struct BcRule {
    std::string name;
    std::function<bool(const BoundarySegment&)> applies;
    BcType tag;
};

void tag_boundary(std::vector<BoundarySegment>& segments, const std::vector<BcRule>& rules);

std::vector<BcRule> all_dirichlet();
std::vector<BcRule> all_neumann();
/// Bottom and left sides Dirichlet, top and right Neumann (unit square).
std::vector<BcRule> inflow_outflow_square();

/// Piecewise-constant diffusivity plus a velocity field. The region
/// predicates must partition the domain: exactly one piece matches any
/// query point.
struct CoefficientField {
    struct Piece {
        std::function<bool(const Vec2&)> region;
        double eps;
    };
    std::vector<Piece> pieces;
    std::function<Vec2(const Vec2&)> velocity = [](const Vec2&) { return Vec2::Zero(); };

    double eps_at(const Vec2& x) const;
    /// Verifies the exactly-one-piece invariant on a set of sample points.
    void validate(const std::vector<Vec2>& samples) const;

    static CoefficientField constant(double eps);
};

} // namespace mmd
