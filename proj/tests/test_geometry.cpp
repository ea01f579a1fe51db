#include <catch2/catch_amalgamated.hpp>

#include "tgmrf/geometry.hpp"

using namespace tgmrf;
using Catch::Matchers::WithinAbs;

namespace {

PlanarDomain unit_square() {
    return PlanarDomain({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

PlanarDomain l_shape() {
    return PlanarDomain({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
}

} // namespace

TEST_CASE("polygon validation") {
    CHECK_THROWS_AS(PlanarDomain({{0, 0}, {1, 0}}), std::invalid_argument);
    // Clockwise order rejected.
    CHECK_THROWS_AS(PlanarDomain({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), std::invalid_argument);
    // Self-intersecting bowtie rejected.
    CHECK_THROWS_AS(PlanarDomain({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("containment with on-edge tolerance") {
    auto sq = unit_square();
    CHECK(sq.contains({0.5, 0.5}));
    CHECK(sq.contains({0.0, 0.5}));  // edge
    CHECK(sq.contains({0.0, 0.0}));  // vertex
    CHECK_FALSE(sq.contains({1.5, 0.5}));
    CHECK_FALSE(sq.contains({0.5, -0.1}));
    auto l = l_shape();
    CHECK(l.contains({1.5, 0.5}));
    CHECK(l.contains({0.5, 1.5}));
    CHECK_FALSE(l.contains({1.5, 1.5})); // the removed quadrant
    CHECK(l.contains({1.0, 1.0}));       // reflex corner on the boundary
}

TEST_CASE("arc-length boundary parameterization") {
    auto sq = unit_square();
    CHECK_THAT(sq.perimeter(), WithinAbs(4.0, 1e-15));
    auto p0 = sq.boundary_point(0.0);
    CHECK_THAT(p0.x, WithinAbs(0.0, 1e-15));
    auto p_quarter = sq.boundary_point(0.25);
    CHECK_THAT(p_quarter.x, WithinAbs(1.0, 1e-15));
    CHECK_THAT(p_quarter.y, WithinAbs(0.0, 1e-15));
    auto p_mid = sq.boundary_point(0.125);
    CHECK_THAT(p_mid.x, WithinAbs(0.5, 1e-15));
}

TEST_CASE("radial surface evaluation") {
    auto h = HomotopySpec::radial();
    auto pts = surface(h, 0.5, 64);
    REQUIRE(pts.size() == 64u);
    for (const Point p : pts) CHECK_THAT(std::hypot(p.x, p.y), WithinAbs(0.5, 1e-12));
    // theta = 0 lands at ((1-l), 0).
    CHECK_THAT(h.eval(0.0, 0.5).x, WithinAbs(0.5, 1e-15));
    CHECK_THAT(h.eval(0.0, 0.5).y, WithinAbs(0.0, 1e-15));
    // lambda = 1 collapses to the center.
    for (const Point p : surface(h, 1.0, 16)) {
        CHECK_THAT(p.x, WithinAbs(0.0, 1e-12));
        CHECK_THAT(p.y, WithinAbs(0.0, 1e-12));
    }
    CHECK_THROWS_AS(surface(h, 0.5, 4), std::invalid_argument);
    CHECK_THROWS_AS(surface(h, 1.5, 16), std::invalid_argument);
}

TEST_CASE("affine homotopy with center at the origin equals radial on the circle") {
    auto radial = HomotopySpec::radial();
    auto shifted = HomotopySpec::shifted_circle(0.0, 0.0);
    for (double lambda : {0.0, 0.25, 0.7, 1.0})
        for (double theta : {-3.0, -1.0, 0.0, 0.5, 2.5}) {
            const Point a = radial.eval(theta, lambda);
            const Point b = shifted.eval(theta, lambda);
            CHECK_THAT(a.x, WithinAbs(b.x, 1e-15));
            CHECK_THAT(a.y, WithinAbs(b.y, 1e-15));
        }
}

TEST_CASE("affine surfaces are exact scaled translates") {
    auto dom = PlanarDomain::regular_polygon(64);
    const Point c{0.2, -0.1};
    auto h = HomotopySpec::affine(dom, c);
    for (double lambda : {0.0, 0.3, 0.8}) {
        auto base = surface(h, 0.0, 128);
        auto surf = surface(h, lambda, 128);
        for (std::size_t i = 0; i < surf.size(); ++i) {
            CHECK_THAT(surf[i].x, WithinAbs((1.0 - lambda) * base[i].x + lambda * c.x, 1e-15));
            CHECK_THAT(surf[i].y, WithinAbs((1.0 - lambda) * base[i].y + lambda * c.y, 1e-15));
        }
    }
}

TEST_CASE("star-center test") {
    SECTION("convex domains accept interior centers") {
        auto sq = unit_square();
        CHECK(check_star_center(sq, {0.5, 0.5}));
        CHECK(check_star_center(sq, {0.1, 0.9}));
        auto disc = PlanarDomain::regular_polygon(64);
        CHECK(check_star_center(disc, {0.9, 0.0}));
    }
    SECTION("the L-shape kernel is its corner square") {
        auto l = l_shape();
        // Points of [0,1]^2 see the whole boundary.
        CHECK(check_star_center(l, {0.5, 0.5}));
        CHECK(check_star_center(l, {0.9, 0.9}));
        // Points in either arm beyond the kernel do not.
        CHECK_FALSE(check_star_center(l, {1.5, 0.5}));
        CHECK_FALSE(check_star_center(l, {0.5, 1.5}));
        CHECK_FALSE(check_star_center(l, {1.9, 0.1}));
    }
    SECTION("center outside the domain fails") {
        CHECK_FALSE(check_star_center(unit_square(), {2.0, 2.0}));
    }
}

TEST_CASE("homotopy validation on the disc") {
    auto disc = PlanarDomain::regular_polygon(256);
    SECTION("radial passes everything") {
        auto rep = validate_homotopy(HomotopySpec::radial(), disc, 256, 64);
        CHECK(rep.continuous);
        CHECK(rep.p1_traces_boundary);
        CHECK(rep.p1_collapses);
        CHECK(rep.p2_sampled);
        CHECK(rep.p3_nested);
        CHECK(rep.p4_covers);
        CHECK(rep.pass());
    }
    SECTION("a jump in lambda is flagged as discontinuous") {
        HomotopySpec h = HomotopySpec::radial();
        h.eval = [](double theta, double lambda) {
            const double r = lambda < 0.5 ? 1.0 - lambda : 0.5 * (1.0 - lambda);
            return Point{r * std::cos(theta), r * std::sin(theta)};
        };
        auto rep = validate_homotopy(h, disc, 256, 64);
        CHECK_FALSE(rep.continuous);
        CHECK_FALSE(rep.pass());
    }
    SECTION("valid shifted circle passes") {
        auto rep = validate_homotopy(HomotopySpec::shifted_circle(0.4, 0.2), disc, 256, 64);
        CHECK(rep.pass());
    }
    SECTION("shifted circle with |c| >= 1 violates nesting") {
        auto rep = validate_homotopy(HomotopySpec::shifted_circle(1.2, 0.0), disc, 256, 64);
        CHECK_FALSE(rep.p3_nested);
        CHECK_FALSE(rep.pass());
    }
    SECTION("ellipse with a = b = 1 - lambda reduces to radial") {
        auto h = HomotopySpec::ellipse([](double l) { return 1.0 - l; },
                                       [](double l) { return 1.0 - l; });
        auto rep = validate_homotopy(h, disc, 256, 64);
        CHECK(rep.pass());
    }
    SECTION("true ellipses pass on the disc") {
        auto h = HomotopySpec::ellipse([](double l) { return 1.0 - l; },
                                       [](double l) { return (1.0 - l) * (1.0 - 0.5 * l); });
        auto rep = validate_homotopy(h, disc, 256, 64);
        CHECK(rep.p1_traces_boundary);
        CHECK(rep.p1_collapses);
        CHECK(rep.p3_nested);
    }
}

TEST_CASE("affine homotopy on the square passes") {
    auto sq = unit_square();
    auto rep = validate_homotopy(HomotopySpec::affine(sq, {0.5, 0.5}), sq, 256, 64);
    CHECK(rep.pass());
}

TEST_CASE("tabulated homotopy interpolates its rows") {
    std::vector<double> grid{0.0, 0.5, 1.0};
    std::vector<std::vector<Point>> rows;
    auto radial = HomotopySpec::radial();
    rows.push_back(surface(radial, 0.0, 32));
    rows.push_back(surface(radial, 0.5, 32));
    rows.push_back(std::vector<Point>(32, Point{0.0, 0.0}));
    auto h = HomotopySpec::tabulated(grid, rows);
    const Point p = h.eval(0.0, 0.25);
    CHECK_THAT(std::hypot(p.x, p.y), WithinAbs(0.75, 1e-12));
    const Point q = h.eval(0.0, 1.0);
    CHECK_THAT(std::hypot(q.x, q.y), WithinAbs(0.0, 1e-12));
}

TEST_CASE("nesting is transitive on sampled radial surfaces") {
    auto h = HomotopySpec::radial();
    // If surf(l2) sits inside poly(l1) and surf(l3) inside poly(l2), then
    // surf(l3) sits inside poly(l1).
    const auto inside = [&](double outer_l, double inner_l) {
        auto outer = surface(h, outer_l, 128);
        PlanarDomain poly(outer);
        for (const Point p : surface(h, inner_l, 128))
            if (!poly.contains(p, 1e-9)) return false;
        return true;
    };
    CHECK(inside(0.1, 0.3));
    CHECK(inside(0.3, 0.6));
    CHECK(inside(0.1, 0.6));
}
