#ifndef TGMRF_GEOMETRY_HPP
#define TGMRF_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "tgmrf/rng.hpp"

namespace tgmrf {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Simple planar polygon with counterclockwise vertex order. Containment is
/// ray casting with an on-edge tolerance, so the test is for the closed
/// region.
class PlanarDomain {
public:
    explicit PlanarDomain(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
        if (vertices_.size() < 3)
            throw std::invalid_argument("PlanarDomain: need at least 3 vertices");
        if (signed_area() <= 0.0)
            throw std::invalid_argument("PlanarDomain: vertices must be counterclockwise");
        if (self_intersects())
            throw std::invalid_argument("PlanarDomain: polygon must be simple");
        cum_length_.resize(vertices_.size() + 1, 0.0);
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            cum_length_[i + 1] = cum_length_[i] + distance(vertices_[i], vertex(i + 1));
    }

    static PlanarDomain regular_polygon(int n, double radius = 1.0, Point center = {0, 0}) {
        std::vector<Point> v;
        v.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double a = -std::numbers::pi + 2.0 * std::numbers::pi * k / n;
            v.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
        }
        return PlanarDomain(std::move(v));
    }

    const std::vector<Point>& vertices() const { return vertices_; }
    double perimeter() const { return cum_length_.back(); }

    /// Point on the boundary at arc-length-normalized parameter theta in [0,1).
    Point boundary_point(double theta) const {
        double s = (theta - std::floor(theta)) * perimeter();
        std::size_t i = 0;
        while (i + 1 < vertices_.size() && cum_length_[i + 1] < s) ++i;
        const double seg = cum_length_[i + 1] - cum_length_[i];
        const double f = seg > 0.0 ? (s - cum_length_[i]) / seg : 0.0;
        const Point a = vertices_[i];
        const Point b = vertex(i + 1);
        return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
    }

    bool contains(Point p, double tol = 1e-12) const {
        bool inside = false;
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point a = vertices_[i];
            const Point b = vertex(i + 1);
            const double dx = b.x - a.x;
            const double dy = b.y - a.y;
            // On-edge counts as inside (closed region).
            const double cross = (p.x - a.x) * dy - (p.y - a.y) * dx;
            const double len = std::abs(dx) + std::abs(dy);
            if (std::abs(cross) <= tol * std::max(1.0, len)) {
                const double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
                if (t >= -tol && t <= 1.0 + tol) return true;
            }
            if ((a.y > p.y) != (b.y > p.y)) {
                const double x_cross = a.x + (p.y - a.y) * dx / dy;
                if (p.x < x_cross) inside = !inside;
            }
        }
        return inside;
    }

    /// Distance from a point to the boundary polyline.
    double boundary_distance(Point p) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            const Point a = vertices_[i];
            const Point b = vertex(i + 1);
            best = std::min(best, segment_distance(p, a, b));
        }
        return best;
    }

    static double segment_distance(Point p, Point a, Point b) {
        const double dx = b.x - a.x;
        const double dy = b.y - a.y;
        const double l2 = dx * dx + dy * dy;
        double t = l2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / l2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
    }

private:
    Point vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }

    double signed_area() const {
        double s = 0.0;
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            const Point a = vertices_[i];
            const Point b = vertex(i + 1);
            s += a.x * b.y - b.x * a.y;
        }
        return 0.5 * s;
    }

    static bool segments_cross(Point a, Point b, Point c, Point d) {
        const auto orient = [](Point p, Point q, Point r) {
            const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
            return v > 0 ? 1 : (v < 0 ? -1 : 0);
        };
        const int o1 = orient(a, b, c), o2 = orient(a, b, d);
        const int o3 = orient(c, d, a), o4 = orient(c, d, b);
        return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
    }

    bool self_intersects() const {
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue; // adjacent through the wrap
                if (segments_cross(vertices_[i], vertex(i + 1), vertices_[j], vertex(j + 1)))
                    return true;
            }
        return false;
    }

    std::vector<Point> vertices_;
    std::vector<double> cum_length_;
};

/// Homotopy h(theta, lambda) from a boundary curve (lambda = 0) to a single
/// point (lambda = 1). For the circle-based kinds theta is the polar angle;
/// for polygon-based (affine) homotopies theta is the arc-length parameter
/// in [0,1).
struct HomotopySpec {
    enum class Kind { radial, affine, ellipse, tabulated };
    Kind kind = Kind::radial;
    bool angular_param = true; // theta is an angle; false: arc-length in [0,1)
    Point center{0.0, 0.0};
    std::function<Point(double, double)> eval;

    /// Concentric circles: h = ((1-l) cos t, (1-l) sin t).
    static HomotopySpec radial() {
        HomotopySpec h;
        h.kind = Kind::radial;
        h.eval = [](double theta, double lambda) {
            return Point{(1.0 - lambda) * std::cos(theta), (1.0 - lambda) * std::sin(theta)};
        };
        return h;
    }

    /// Circles drifting toward (c1, c2): h = ((1-l)(cos t - c1) + c1,
    /// (1-l)(sin t - c2) + c2).
    static HomotopySpec shifted_circle(double c1, double c2) {
        HomotopySpec h;
        h.kind = Kind::affine;
        h.center = {c1, c2};
        h.eval = [c1, c2](double theta, double lambda) {
            return Point{(1.0 - lambda) * (std::cos(theta) - c1) + c1,
                         (1.0 - lambda) * (std::sin(theta) - c2) + c2};
        };
        return h;
    }

    /// Scaled translate of an arbitrary polygon boundary toward c:
    /// h = (1-l) t(theta) + l c.
    static HomotopySpec affine(const PlanarDomain& domain, Point c) {
        HomotopySpec h;
        h.kind = Kind::affine;
        h.angular_param = false;
        h.center = c;
        h.eval = [domain, c](double theta, double lambda) {
            const Point t = domain.boundary_point(theta);
            return Point{(1.0 - lambda) * t.x + lambda * c.x,
                         (1.0 - lambda) * t.y + lambda * c.y};
        };
        return h;
    }

    /// Ellipses (a(l) cos t, b(l) sin t); a and b must shrink from 1 to 0.
    static HomotopySpec ellipse(std::function<double(double)> a,
                                std::function<double(double)> b) {
        HomotopySpec h;
        h.kind = Kind::ellipse;
        h.eval = [a = std::move(a), b = std::move(b)](double theta, double lambda) {
            return Point{a(lambda) * std::cos(theta), b(lambda) * std::sin(theta)};
        };
        return h;
    }

    /// Piecewise-linear interpolation of tabulated surfaces: rows[i] samples
    /// the surface at lambda_grid[i] over a uniform theta grid.
    static HomotopySpec tabulated(std::vector<double> lambda_grid,
                                  std::vector<std::vector<Point>> rows) {
        if (lambda_grid.size() != rows.size() || lambda_grid.size() < 2)
            throw std::invalid_argument("HomotopySpec::tabulated: bad table");
        HomotopySpec h;
        h.kind = Kind::tabulated;
        h.angular_param = false;
        h.center = rows.back().front();
        h.eval = [lg = std::move(lambda_grid), rw = std::move(rows)](double theta, double lambda) {
            std::size_t i = 0;
            while (i + 2 < lg.size() && lg[i + 1] < lambda) ++i;
            const double span = lg[i + 1] - lg[i];
            const double f = span > 0.0 ? std::clamp((lambda - lg[i]) / span, 0.0, 1.0) : 0.0;
            const auto at = [](const std::vector<Point>& row, double th) {
                th -= std::floor(th);
                const double u = th * static_cast<double>(row.size());
                const std::size_t a = static_cast<std::size_t>(u) % row.size();
                const std::size_t b = (a + 1) % row.size();
                const double w = u - std::floor(u);
                return Point{row[a].x + w * (row[b].x - row[a].x),
                             row[a].y + w * (row[b].y - row[a].y)};
            };
            const Point p = at(rw[i], theta);
            const Point q = at(rw[i + 1], theta);
            return Point{p.x + f * (q.x - p.x), p.y + f * (q.y - p.y)};
        };
        return h;
    }
};

/// Sample the telescoping surface at one lambda. Circle-based homotopies use
/// theta = -pi..pi, polygon-based the unit parameter.
inline std::vector<Point> surface(const HomotopySpec& h, double lambda, int n_samples) {
    if (n_samples < 8) throw std::invalid_argument("surface: need at least 8 samples");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("surface: lambda must lie in [0,1]");
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double unit = static_cast<double>(i) / n_samples;
        const double theta =
            h.angular_param ? -std::numbers::pi + 2.0 * std::numbers::pi * unit : unit;
        out.push_back(h.eval(theta, lambda));
    }
    return out;
}

/// Star-center test behind the similar-surfaces construction: true iff
/// (1-lambda) t + lambda c stays in the closed domain for every sampled
/// boundary point t and every lambda in the grid.
inline bool check_star_center(const PlanarDomain& domain, Point c, int n_lambda = 64,
                              int n_boundary = 256) {
    for (int s = 0; s < n_boundary; ++s) {
        const Point t = domain.boundary_point(static_cast<double>(s) / n_boundary);
        for (int li = 0; li <= n_lambda; ++li) {
            const double lambda = static_cast<double>(li) / n_lambda;
            const Point p{(1.0 - lambda) * t.x + lambda * c.x,
                          (1.0 - lambda) * t.y + lambda * c.y};
            if (!domain.contains(p)) return false;
        }
    }
    return true;
}

/// Sampled verdicts for the telescoping-surface properties. P2 (each surface
/// is the boundary of the swept region) is not decidable from finite samples;
/// the report checks the sampled necessary conditions (closed, simple
/// polyline) and labels the verdict accordingly.
struct HomotopyReport {
    bool continuous = false;         // adjacent-sample jumps shrink under grid refinement
    bool p1_traces_boundary = false; // h(.,0) within Hausdorff tol of domain boundary
    bool p1_collapses = false;       // h(.,1) == center within 1e-12
    bool p2_sampled = false;         // sampled surfaces are closed simple polylines
    bool p3_nested = false;          // surfaces enclosed within earlier ones
    bool p4_covers = false;          // random domain points near some surface
    double p4_fraction = 0.0;
    double p4_epsilon = 0.0;
    bool pass() const {
        return continuous && p1_traces_boundary && p1_collapses && p2_sampled && p3_nested &&
               p4_covers;
    }
};

inline HomotopyReport validate_homotopy(const HomotopySpec& h, const PlanarDomain& domain,
                                        int n_theta = 256, int n_lambda = 64,
                                        std::uint64_t seed = 20250809) {
    HomotopyReport rep;
    const double hausdorff_tol = 1e-6;

    // Sampled continuity: the largest adjacent-sample jump must shrink when
    // the grid is refined (a genuine discontinuity stays put). Checked in
    // both parameters.
    {
        const auto max_jump = [&h](int nt, int nl) {
            double worst = 0.0;
            for (int li = 0; li <= nl; ++li) {
                const auto pts = surface(h, static_cast<double>(li) / nl, nt);
                for (std::size_t i = 0; i < pts.size(); ++i)
                    worst = std::max(worst, distance(pts[i], pts[(i + 1) % pts.size()]));
            }
            for (int ti = 0; ti < nt; ++ti) {
                const double unit = static_cast<double>(ti) / nt;
                const double theta =
                    h.angular_param ? -std::numbers::pi + 2.0 * std::numbers::pi * unit : unit;
                Point prev = h.eval(theta, 0.0);
                for (int li = 1; li <= nl; ++li) {
                    const Point cur = h.eval(theta, static_cast<double>(li) / nl);
                    worst = std::max(worst, distance(prev, cur));
                    prev = cur;
                }
            }
            return worst;
        };
        const double coarse = max_jump(std::max(8, n_theta / 2), std::max(2, n_lambda / 2));
        const double fine = max_jump(n_theta, n_lambda);
        rep.continuous = fine <= 0.75 * coarse + 1e-12;
    }

    // P1: the lambda = 0 trace must ride the domain boundary, both directions.
    {
        const auto trace = surface(h, 0.0, n_theta);
        double worst = 0.0;
        for (const Point p : trace) worst = std::max(worst, domain.boundary_distance(p));
        for (const Point v : domain.vertices()) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < trace.size(); ++i)
                best = std::min(best, PlanarDomain::segment_distance(
                                          v, trace[i], trace[(i + 1) % trace.size()]));
            worst = std::max(worst, best);
        }
        rep.p1_traces_boundary = worst <= hausdorff_tol;
    }
    {
        const auto top = surface(h, 1.0, n_theta);
        rep.p1_collapses = true;
        for (const Point p : top)
            if (distance(p, top.front()) > 1e-12) rep.p1_collapses = false;
    }

    // Sampled surfaces for the remaining properties.
    std::vector<std::vector<Point>> surfaces;
    std::vector<double> lambdas;
    for (int li = 0; li <= n_lambda; ++li) {
        lambdas.push_back(static_cast<double>(li) / n_lambda);
        surfaces.push_back(surface(h, lambdas.back(), n_theta));
    }

    // P2 (sampled necessary conditions): every surface closes on itself and,
    // below the collapse, does not self-cross.
    rep.p2_sampled = true;
    for (std::size_t si = 0; si + 1 < surfaces.size(); ++si) {
        std::vector<Point> poly = surfaces[si];
        double extent = 0.0;
        for (const Point p : poly) extent = std::max(extent, distance(p, poly.front()));
        if (extent < 1e-9) continue; // effectively collapsed
        try {
            std::vector<Point> ccw = poly;
            double area = 0.0;
            for (std::size_t i = 0; i < ccw.size(); ++i) {
                const Point a = ccw[i];
                const Point b = ccw[(i + 1) % ccw.size()];
                area += 0.5 * (a.x * b.y - b.x * a.y);
            }
            if (area < 0.0) std::reverse(ccw.begin(), ccw.end());
            PlanarDomain probe(ccw); // throws if not simple
        } catch (const std::invalid_argument&) {
            rep.p2_sampled = false;
        }
    }

    // P3: each sampled point of the later surface lies inside the polygon of
    // the earlier one.
    rep.p3_nested = true;
    for (std::size_t si = 0; si + 1 < surfaces.size() && rep.p3_nested; ++si) {
        std::vector<Point> outer = surfaces[si];
        double area = 0.0;
        for (std::size_t i = 0; i < outer.size(); ++i) {
            const Point a = outer[i];
            const Point b = outer[(i + 1) % outer.size()];
            area += 0.5 * (a.x * b.y - b.x * a.y);
        }
        if (std::abs(area) < 1e-15) { // outer already collapsed; inner must match
            for (const Point p : surfaces[si + 1])
                if (distance(p, outer.front()) > 1e-9) rep.p3_nested = false;
            continue;
        }
        if (area < 0.0) std::reverse(outer.begin(), outer.end());
        PlanarDomain outer_poly(outer);
        for (const Point p : surfaces[si + 1])
            if (!outer_poly.contains(p, 1e-9)) {
                rep.p3_nested = false;
                break;
            }
    }

    // P4: seeded random domain points must come within epsilon of a surface.
    {
        rep.p4_epsilon = 2.0 / std::sqrt(static_cast<double>(n_theta));
        const double eps2 = rep.p4_epsilon * rep.p4_epsilon;
        CounterRng rng(seed);
        double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
        for (const Point v : domain.vertices()) {
            lo_x = std::min(lo_x, v.x);
            hi_x = std::max(hi_x, v.x);
            lo_y = std::min(lo_y, v.y);
            hi_y = std::max(hi_y, v.y);
        }
        const int n_points = 10000;
        int near = 0;
        for (int k = 0; k < n_points; ++k) {
            Point p;
            do {
                p = {lo_x + (hi_x - lo_x) * rng.next_uniform(),
                     lo_y + (hi_y - lo_y) * rng.next_uniform()};
            } while (!domain.contains(p));
            bool hit = false;
            for (const auto& surf : surfaces) {
                for (const Point q : surf) {
                    const double dx = p.x - q.x, dy = p.y - q.y;
                    if (dx * dx + dy * dy <= eps2) {
                        hit = true;
                        break;
                    }
                }
                if (hit) break;
            }
            if (hit) ++near;
        }
        rep.p4_fraction = static_cast<double>(near) / n_points;
        rep.p4_covers = rep.p4_fraction > 0.99;
    }
    return rep;
}

} // namespace tgmrf

#endif
