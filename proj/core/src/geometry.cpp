#include "mmd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmd {

double Loop::signed_area() const {
    double twice = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = vertices[i];
        const Vec2& q = vertices[(i + 1) % n];
        twice += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * twice;
}

double Loop::perimeter() const {
    double len = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i)
        len += (vertices[(i + 1) % n] - vertices[i]).norm();
    return len;
}

namespace {

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) return (x - a).norm();
    const double t = std::clamp((x - a).dot(d) / len2, 0.0, 1.0);
    return (x - (a + t * d)).norm();
}

/// Even-odd crossing test against one loop.
bool inside_loop(const Vec2& x, const Loop& loop) {
    bool inside = false;
    const std::size_t n = loop.vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& pi = loop.vertices[i];
        const Vec2& pj = loop.vertices[j];
        const bool cross = ((pi.y() > x.y()) != (pj.y() > x.y())) &&
                           (x.x() < (pj.x() - pi.x()) * (x.y() - pi.y()) / (pj.y() - pi.y()) + pi.x());
        if (cross) inside = !inside;
    }
    return inside;
}

void finalize(Domain& d) {
    double area = 0.0;
    d.bbox_min = Vec2(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    d.bbox_max = -d.bbox_min;
    for (const Loop& loop : d.loops) {
        area += loop.signed_area(); // holes are clockwise, so they subtract
        for (const Vec2& v : loop.vertices) {
            d.bbox_min = d.bbox_min.cwiseMin(v);
            d.bbox_max = d.bbox_max.cwiseMax(v);
        }
    }
    d.measure = area;
}

} // namespace

double Domain::perimeter() const {
    double len = 0.0;
    for (const Loop& loop : loops) len += loop.perimeter();
    return len;
}

double Domain::boundary_distance(const Vec2& x) const {
    double dist = std::numeric_limits<double>::max();
    for (const Loop& loop : loops) {
        const std::size_t n = loop.vertices.size();
        for (std::size_t i = 0; i < n; ++i)
            dist = std::min(dist, point_segment_distance(x, loop.vertices[i], loop.vertices[(i + 1) % n]));
    }
    return dist;
}

bool Domain::contains(const Vec2& x, double tol) const {
    if (loops.empty()) return false;
    if (!inside_loop(x, loops[0])) return false;
    for (std::size_t k = 1; k < loops.size(); ++k)
        if (inside_loop(x, loops[k])) return false;
    return boundary_distance(x) > tol;
}

Domain Domain::unit_square() {
    Domain d;
    d.kind = DomainKind::UnitSquare;
    d.loops = {Loop{{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}}};
    finalize(d);
    return d;
}

Domain Domain::unit_disk(int edges) {
    if (edges < 8) throw ConfigError("unit_disk: need at least 8 polygon edges");
    Domain d;
    d.kind = DomainKind::UnitDisk;
    Loop loop;
    loop.vertices.reserve(edges);
    for (int i = 0; i < edges; ++i) {
        const double t = 2.0 * M_PI * i / edges;
        loop.vertices.emplace_back(std::cos(t), std::sin(t));
    }
    d.loops = {loop};
    finalize(d);
    return d;
}

Domain Domain::perforated_square(double hole_side, Vec2 c1, Vec2 c2) {
    Domain d;
    d.kind = DomainKind::PerforatedSquare;
    d.loops.push_back(Loop{{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}});
    const double r = 0.5 * hole_side;
    for (const Vec2& c : {c1, c2}) {
        // clockwise, so the loop subtracts area and normals point out of the material
        Loop hole;
        hole.vertices = {Vec2(c.x() - r, c.y() - r), Vec2(c.x() - r, c.y() + r),
                         Vec2(c.x() + r, c.y() + r), Vec2(c.x() + r, c.y() - r)};
        d.loops.push_back(hole);
    }
    finalize(d);
    return d;
}

std::vector<BoundarySegment> segment_boundary(const Domain& domain, double h_target) {
    if (h_target <= 0.0) throw ConfigError("segment_boundary: h_target must be positive");
    for (const Loop& loop : domain.loops) {
        const std::size_t n = loop.vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double edge = (loop.vertices[(i + 1) % n] - loop.vertices[i]).norm();
            if (h_target > edge + 1e-14)
                throw ConfigError("segment_boundary: h_target exceeds shortest boundary edge");
        }
    }

    std::vector<BoundarySegment> segments;
    for (const Loop& loop : domain.loops) {
        const std::size_t n = loop.vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = loop.vertices[i];
            const Vec2 b = loop.vertices[(i + 1) % n];
            const double len = (b - a).norm();
            const int pieces = std::max(1, static_cast<int>(std::lround(len / h_target)));
            const Vec2 dir = (b - a) / len;
            const Vec2 normal(dir.y(), -dir.x()); // outward for ccw outer / cw holes
            for (int p = 0; p < pieces; ++p) {
                BoundarySegment s;
                s.index = static_cast<int>(segments.size());
                s.a = a + dir * (len * p / pieces);
                s.b = a + dir * (len * (p + 1) / pieces);
                s.centroid = 0.5 * (s.a + s.b);
                s.normal = normal;
                s.measure = len / pieces;
                segments.push_back(s);
            }
        }
    }
    return segments;
}

void tag_boundary(std::vector<BoundarySegment>& segments, const std::vector<BcRule>& rules) {
    for (BoundarySegment& s : segments) {
        int matches = 0;
        for (const BcRule& rule : rules) {
            if (rule.applies(s)) {
                s.bc = rule.tag;
                ++matches;
            }
        }
        if (matches != 1)
            throw ConfigError("tag_boundary: segment " + std::to_string(s.index) +
                              (matches == 0 ? " untagged" : " doubly tagged"));
    }
}

std::vector<BcRule> all_dirichlet() {
    return {{"all", [](const BoundarySegment&) { return true; }, BcType::Dirichlet}};
}

std::vector<BcRule> all_neumann() {
    return {{"all", [](const BoundarySegment&) { return true; }, BcType::Neumann}};
}

std::vector<BcRule> inflow_outflow_square() {
    const double tol = 1e-12;
    return {
        {"bottom", [=](const BoundarySegment& s) { return std::abs(s.centroid.y()) < tol; }, BcType::Dirichlet},
        {"left", [=](const BoundarySegment& s) { return std::abs(s.centroid.x()) < tol; }, BcType::Dirichlet},
        {"top", [=](const BoundarySegment& s) { return std::abs(s.centroid.y() - 1.0) < tol; }, BcType::Neumann},
        {"right", [=](const BoundarySegment& s) { return std::abs(s.centroid.x() - 1.0) < tol; }, BcType::Neumann},
    };
}

double CoefficientField::eps_at(const Vec2& x) const {
    for (const Piece& p : pieces)
        if (p.region(x)) return p.eps;
    throw ConfigError("CoefficientField: no piece matches query point");
}

void CoefficientField::validate(const std::vector<Vec2>& samples) const {
    for (const Vec2& x : samples) {
        int matches = 0;
        for (const Piece& p : pieces)
            if (p.region(x)) ++matches;
        if (matches != 1)
            throw ConfigError("CoefficientField: region predicates do not partition the domain");
    }
}

CoefficientField CoefficientField::constant(double eps) {
    if (eps <= 0.0) throw ConfigError("CoefficientField: diffusivity must be positive");
    CoefficientField f;
    f.pieces = {{[](const Vec2&) { return true; }, eps}};
    return f;
}

} // namespace mmd
