#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "nlbode/cgeom.hpp"

using namespace nlbode::cgeom;
using C = std::complex<double>;

namespace {

std::vector<C> random_upper(std::mt19937_64& rng, int n, double lo_y = 0.2) {
    std::uniform_real_distribution<double> ux(-3.0, 3.0);
    std::uniform_real_distribution<double> uy(lo_y, 2.5);
    std::vector<C> p;
    for (int i = 0; i < n; ++i) {
        p.emplace_back(ux(rng), uy(rng));
    }
    return p;
}

/// Signed side of z relative to the geodesic through p and q (semicircle centered
/// on the real axis, or a vertical line).
double geodesic_side(C p, C q, C z) {
    if (std::abs(p.real() - q.real()) < 1e-12) {
        return z.real() - p.real();
    }
    const double c = (std::norm(p) - std::norm(q)) / (2.0 * (p.real() - q.real()));
    const double rho2 = std::norm(p - c);
    return std::norm(z - c) - rho2;
}

/// Hyperbolic convex hull membership: z lies on the hull side of every pair
/// geodesic that has all points on one side.
bool in_hyperbolic_hull(const std::vector<C>& pts, C z) {
    const double eps = 1e-9;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            int sign = 0;
            bool supporting = true;
            for (const C& r : pts) {
                const double s = geodesic_side(pts[i], pts[j], r);
                if (std::abs(s) < eps) {
                    continue;
                }
                const int sg = s > 0 ? 1 : -1;
                if (sign == 0) {
                    sign = sg;
                } else if (sg != sign) {
                    supporting = false;
                    break;
                }
            }
            if (supporting && sign != 0 && geodesic_side(pts[i], pts[j], z) * sign < -1e-9) {
                return false;
            }
        }
    }
    return true;
}

std::vector<C> interior_samples(const Region& r, std::mt19937_64& rng, int n) {
    std::vector<C> b = r.boundary_samples();
    double x0 = 1e300, x1 = -1e300, y1 = 0;
    for (C z : b) {
        x0 = std::min(x0, z.real());
        x1 = std::max(x1, z.real());
        y1 = std::max(y1, std::abs(z.imag()));
    }
    std::uniform_real_distribution<double> ux(x0, x1), uy(-y1, y1);
    for (int got = 0, tries = 0; got < n && tries < 200 * n; ++tries) {
        C z(ux(rng), uy(rng));
        if (r.contains(z)) {
            b.push_back(z);
            ++got;
        }
    }
    return b;
}

}  // namespace

TEST_CASE("arc between two points lies on a real-centered circle") {
    const C a(-1.0, 0.5), b(2.0, 1.5);
    const auto arc = ArcSegment::through(a, b);
    const double c = (std::norm(a) - std::norm(b)) / (2.0 * (a.real() - b.real()));
    CHECK(arc.center == doctest::Approx(c));
    for (C z : arc.sample(720)) {
        CHECK(std::abs(z - c) == doctest::Approx(std::abs(a - c)).epsilon(1e-12));
        CHECK(z.imag() >= -1e-12);
    }
}

TEST_CASE("hco matches a raster oracle of the vertically filled hyperbolic hull") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        const auto pts = random_upper(rng, 7);
        const Region h = hco(pts);
        REQUIRE(h.kind() == Region::Kind::Bounded);

        double x0 = 1e300, x1 = -1e300, y1 = 0.0;
        for (C z : h.upper_boundary()) {
            x0 = std::min(x0, z.real());
            x1 = std::max(x1, z.real());
            y1 = std::max(y1, z.imag());
        }
        const int n = 400;
        const double dx = (x1 - x0) / (n - 1);
        const double dy = y1 / (n - 1);
        int mismatches_far = 0;
        // The end columns pass exactly through a vertex; skip them.
        for (int i = 1; i + 1 < n; ++i) {
            const double x = x0 + i * dx;
            // Column profile of the oracle: highest raster cell inside the hull.
            double top = -1.0;
            for (int j = n - 1; j >= 0; --j) {
                if (in_hyperbolic_hull(pts, C(x, j * dy))) {
                    top = j * dy;
                    break;
                }
            }
            for (int j = 0; j < n; ++j) {
                const double y = j * dy;
                const bool oracle = top >= 0.0 && y <= top;
                const bool got = h.contains(C(x, y), 1e-9);
                if (oracle != got && std::abs(y - top) > 2.0 * dy) {
                    ++mismatches_far;
                }
            }
        }
        CHECK(mismatches_far == 0);
    }
}

TEST_CASE("hco contains every pairwise arc and preserves the radius") {
    std::mt19937_64 rng(3);
    const auto pts = random_upper(rng, 12);
    const Region h = hco(pts);
    double rmax = 0.0;
    for (C p : pts) {
        rmax = std::max(rmax, std::abs(p));
        CHECK(h.contains(p));
        CHECK(h.contains(std::conj(p)));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            for (C z : ArcSegment::through(pts[i], pts[j]).sample(360)) {
                CHECK(h.contains(z, 1e-4 * (1 + rmax)));  // chord sagitta of the sampled arcs
            }
        }
    }
    CHECK(radius(h) == doctest::Approx(rmax).epsilon(1e-12));
}

TEST_CASE("hull is idempotent") {
    std::mt19937_64 rng(5);
    const Region h = hco(random_upper(rng, 10));
    const Region h2 = hco(h.boundary_samples());
    CHECK(hausdorff_distance(h, h2) < 1e-9 * radius(h));
}

TEST_CASE("disk_between and inversion") {
    const Region d = Region::disk_between(1.0, 3.0);
    CHECK(radius(d) == doctest::Approx(3.0));
    CHECK(d.contains(C(2.0, 0.99)));
    CHECK_FALSE(d.contains(C(2.0, 1.01)));

    const Region inv = mobius_invert(d);
    CHECK(hausdorff_distance(inv, Region::disk_between(1.0 / 3.0, 1.0)) < 1e-6);
    CHECK(hausdorff_distance(mobius_invert(inv), d) < 1e-6);

    // Pointwise: every boundary sample maps onto the inverted set.
    for (C z : d.boundary_samples()) {
        const C w = std::polar(1.0 / std::abs(z), std::arg(z));
        CHECK(inv.contains(w, 1e-4));
    }
}

TEST_CASE("inversion of a set containing zero is unbounded") {
    const Region d = Region::disk(0.0, 1.0);
    const Region inv = mobius_invert(d);
    CHECK(inv.is_unbounded());
    CHECK(std::isinf(radius(inv)));
}

TEST_CASE("inversion of a set surrounding zero excludes a hole") {
    const Region d = Region::disk(0.5, 2.0);  // [-1.5, 2.5]
    const Region inv = mobius_invert(d);
    CHECK(inv.kind() == Region::Kind::InvertedBounded);
    // Points with 1/|z| inside d lie in the inverted set; those mapping outside do not.
    CHECK(inv.contains(C(10.0, 0.0)));
    CHECK_FALSE(inv.contains(C(0.1, 0.0)));
    CHECK(inv.contains(C(-0.7, 0.0)));
}

TEST_CASE("Minkowski sum and product contain all dense pairwise combinations") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 4; ++trial) {
        const Region a = hco(random_upper(rng, 6, 0.0));
        const Region b = hco(random_upper(rng, 6, 0.0));
        const Region s = minkowski_sum(a, b);
        const Region p = minkowski_product(a, b);
        const auto pa = interior_samples(a, rng, 200);
        const auto pb = interior_samples(b, rng, 200);
        long bad_sum = 0;
        long bad_prod = 0;
        for (std::size_t i = 0; i < pa.size(); i += 2) {
            for (std::size_t j = 0; j < pb.size(); j += 2) {
                bad_sum += !s.contains(pa[i] + pb[j], tolerance(radius(s)));
                bad_prod += !p.contains(pa[i] * pb[j], tolerance(radius(p)));
            }
        }
        CHECK(bad_sum == 0);
        CHECK(bad_prod == 0);
        CHECK(radius(s) <= radius(a) + radius(b) + 1e-12);
        CHECK(radius(p) == doctest::Approx(radius(a) * radius(b)).epsilon(0.01));
    }
}

TEST_CASE("large products use the outer polygon and stay tight") {
    const Region a = Region::disk(2.0, 1.0);
    const Region b = Region::disk(-1.0, 0.5, {1440, 1e-9});
    const Region p = minkowski_product(a, b);
    CHECK(radius(p) == doctest::Approx(3.0 * 1.5).epsilon(1e-4));
    CHECK(p.contains(C(3.0, 0.0) * C(-1.5, 0.0), 1e-6));
    CHECK(p.contains(C(1.0, 0.0) * C(-0.5, 0.0), 1e-6));
}

TEST_CASE("point sets") {
    const std::vector<C> pts{{1.0, 1.0}, {2.0, -0.5}};
    const Region r = Region::points(pts);
    CHECK(r.kind() == Region::Kind::PointSet);
    CHECK(r.contains(C(1.0, -1.0)));
    CHECK(radius(r) == doctest::Approx(std::sqrt(4.25)));
    const Region s = minkowski_sum(r, Region::point({1.0, 0.0}));
    CHECK(s.contains(C(2.0, 1.0)));
    CHECK(s.contains(C(3.0, 0.5)));
}

TEST_CASE("completions enlarge and are idempotent") {
    std::mt19937_64 rng(23);
    const Region h = hco(random_upper(rng, 8));
    const Region ch = chord_complete(h);
    const Region ah = arc_complete(h);
    for (C z : h.boundary_samples()) {
        CHECK(ch.contains(z, 1e-9));
        CHECK(ah.contains(z, 1e-9));
    }
    CHECK(hausdorff_distance(chord_complete(ch), ch) < 1e-9);
    CHECK(hausdorff_distance(arc_complete(ah), ah) < 1e-9);
}

TEST_CASE("scale, set distance and Hausdorff distance of disks") {
    const Region a = Region::disk(0.0, 1.0);
    const Region b = Region::disk(5.0, 1.0);
    CHECK(set_distance(a, b) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(set_distance(a, Region::disk(0.5, 1.0)) == doctest::Approx(0.0));
    const Region s = scale(b, -2.0);
    CHECK(s.contains(C(-10.0, 0.0), 1e-6));
    CHECK(radius(s) == doctest::Approx(12.0));
    CHECK(hausdorff_distance(a, Region::disk(0.0, 1.5)) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("resolution doubling changes a product radius by less than 1%") {
    const Region a = hco(std::vector<C>{{1.0, 0.2}, {2.0, 1.0}, {0.5, 1.5}}, {720, 1e-9});
    const Region b = hco(std::vector<C>{{-1.0, 0.3}, {0.5, 0.8}}, {720, 1e-9});
    const Region a2 = hco(std::vector<C>{{1.0, 0.2}, {2.0, 1.0}, {0.5, 1.5}}, {1440, 1e-9});
    const Region b2 = hco(std::vector<C>{{-1.0, 0.3}, {0.5, 0.8}}, {1440, 1e-9});
    const double r1 = radius(minkowski_product(a, b, {720, 1e-9}));
    const double r2 = radius(minkowski_product(a2, b2, {1440, 1e-9}));
    CHECK(std::abs(r1 - r2) / r2 < 0.01);
}

TEST_CASE("boundary CSV dump") {
    std::ostringstream os;
    write_boundary_csv(os, Region::disk(0.0, 1.0));
    const std::string s = os.str();
    CHECK(s.rfind("# kind=", 0) == 0);
    CHECK(s.find("re,im,segment_id") != std::string::npos);
}
