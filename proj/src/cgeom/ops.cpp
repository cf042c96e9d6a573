#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "detail.hpp"
#include "nlbode/cgeom.hpp"

namespace nlbode::cgeom {

namespace {

constexpr std::size_t kExactProductPairs = 20000;

bool is_zero_singleton(const Region& r) {
    return r.kind() == Region::Kind::PointSet && r.point_list().size() == 1 && r.point_list()[0] == 0.0;
}

/// Distance from the origin to the boundary polygon of a Bounded region.
double origin_clearance(const Region& r) {
    const auto poly = detail::closed_polygon(r);
    const std::size_t n = poly.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const Complex p = poly[i];
        const Complex d = poly[(i + 1) % n] - p;
        const double len2 = std::norm(d);
        const double t = len2 == 0.0 ? 0.0 : std::clamp((-p * std::conj(d)).real() / len2, 0.0, 1.0);
        best = std::min(best, std::abs(p + t * d));
    }
    return best;
}

/// Exterior of a disk hole plus a bounded set: the complement is the
/// intersection of the translated holes, sampled along rays from the origin.
Region sum_with_inverted(const Region& inv, const Region& other, const GeometryOptions& opts) {
    const auto& hd = inv.hole_disk();
    if (!hd) {
        throw GeometryError("sum of an inverted region with a non-disk hole is unsupported");
    }
    const auto verts = detail::convex_vertices(other);
    const double big_r = hd->radius;
    double reach = 0.0;
    for (Complex b : verts) {
        reach = std::max(reach, std::abs(hd->center + b));
    }
    if (reach >= big_r - opts.abs_tol) {
        return Region::unbounded();  // 0 lies in the sum, its inverse contains infinity
    }
    const auto k = static_cast<std::size_t>(std::max(3, opts.resolution / 2 + 1));
    std::vector<double> hole(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Complex u = std::polar(1.0, std::numbers::pi * static_cast<double>(i) / static_cast<double>(k - 1));
        double t_min = std::numeric_limits<double>::infinity();
        for (Complex b : verts) {
            const Complex p = hd->center + b;
            const double proj = (u * std::conj(p)).real();
            const double t = proj + std::sqrt(proj * proj - std::norm(p) + big_r * big_r);
            t_min = std::min(t_min, t);
        }
        hole[i] = t_min;
    }
    return make_inverted_from_hole(std::move(hole), std::nullopt, opts);
}

std::vector<Complex> pairwise(std::span<const Complex> a, std::span<const Complex> b, bool product) {
    std::vector<Complex> out;
    out.reserve(a.size() * b.size());
    for (Complex x : a) {
        for (Complex y : b) {
            out.push_back(product ? x * y : x + y);
        }
    }
    return out;
}

double cross2(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

/// Rotates a counter-clockwise polygon so that it starts at its lowest (then leftmost) vertex.
std::vector<Complex> from_bottom(std::vector<Complex> p) {
    const auto it = std::min_element(p.begin(), p.end(), [](Complex a, Complex b) {
        return a.imag() < b.imag() || (a.imag() == b.imag() && a.real() < b.real());
    });
    std::rotate(p.begin(), it, p.end());
    return p;
}

/// Exact Minkowski sum of two convex polygons given counter-clockwise, by edge merging.
std::vector<Complex> convex_polygon_sum(std::vector<Complex> a, std::vector<Complex> b) {
    if (a.size() == 1 || b.size() == 1) {
        const Complex shift = a.size() == 1 ? a[0] : b[0];
        auto out = a.size() == 1 ? b : a;
        for (Complex& z : out) {
            z += shift;
        }
        return out;
    }
    a = from_bottom(std::move(a));
    b = from_bottom(std::move(b));
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<Complex> out;
    out.reserve(n + m);
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n || j < m) {
        out.push_back(a[i % n] + b[j % m]);
        if (i == n) {
            ++j;
            continue;
        }
        if (j == m) {
            ++i;
            continue;
        }
        const double c = cross2(a[(i + 1) % n] - a[i], b[(j + 1) % m] - b[j]);
        if (c >= 0.0) {
            ++i;
        }
        if (c <= 0.0) {
            ++j;
        }
    }
    return out;
}

/// Upper half of an outer polygon of conv(A B), built from the support
/// function h(theta) = max_a |a| h_B(theta - arg a) on m + 1 directions in
/// [0, pi]. B is a counter-clockwise convex polygon; A and B symmetric.
std::vector<Complex> product_outer_polygon(std::span<const Complex> va, std::span<const Complex> vb, int m) {
    const std::size_t n = vb.size();
    std::vector<double> h(static_cast<std::size_t>(m) + 1, -std::numeric_limits<double>::infinity());
    std::vector<Complex> dirs(h.size());
    for (std::size_t j = 0; j < dirs.size(); ++j) {
        dirs[j] = std::polar(1.0, -std::numbers::pi * static_cast<double>(j) / m);
    }
    std::vector<double> bx(n);
    std::vector<double> by(n);
    for (std::size_t q = 0; q < n; ++q) {
        bx[q] = vb[q].real();
        by[q] = vb[q].imag();
    }
    for (Complex a : va) {
        // Re(c b) with c = dir * a, written out to avoid the checked complex multiply.
        const auto coef = [&](std::size_t j) {
            const double dr = dirs[j].real();
            const double di = dirs[j].imag();
            return std::pair{dr * a.real() - di * a.imag(), dr * a.imag() + di * a.real()};
        };
        auto [cr, ci] = coef(0);
        std::size_t k = 0;
        double best = cr * bx[0] - ci * by[0];
        for (std::size_t q = 1; q < n; ++q) {
            const double v = cr * bx[q] - ci * by[q];
            if (v > best) {
                best = v;
                k = q;
            }
        }
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            std::tie(cr, ci) = coef(j);
            double cur = cr * bx[k] - ci * by[k];
            // The maximizing vertex advances counter-clockwise as the direction turns.
            for (std::size_t steps = 0; steps < n; ++steps) {
                const std::size_t nk = k + 1 == n ? 0 : k + 1;
                const double nxt = cr * bx[nk] - ci * by[nk];
                if (nxt < cur) {
                    break;
                }
                k = nk;
                cur = nxt;
            }
            h[j] = std::max(h[j], cur);
        }
    }
    std::vector<Complex> out;
    out.reserve(h.size() + 1);
    out.emplace_back(h.front(), 0.0);
    for (std::size_t j = 0; j + 1 < h.size(); ++j) {
        const double c0 = dirs[j].real();
        const double s0 = -dirs[j].imag();
        const double c1 = dirs[j + 1].real();
        const double s1 = -dirs[j + 1].imag();
        const double det = c0 * s1 - s0 * c1;
        out.emplace_back((h[j] * s1 - h[j + 1] * s0) / det, (c0 * h[j + 1] - c1 * h[j]) / det);
    }
    out.emplace_back(-h.back(), 0.0);
    return out;
}

/// Subdivides a polyline so that every piece subtends at most `step` radians
/// seen from the origin; inversion of long straight pieces near 0 stays accurate.
std::vector<Complex> densify_for_inversion(std::span<const Complex> poly, double step) {
    std::vector<Complex> out;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const Complex p = poly[i];
        const Complex q = poly[i + 1];
        const double near = std::min(std::abs(p), std::abs(q));
        const auto n = std::clamp(static_cast<int>(std::ceil(std::abs(q - p) / (near * step))), 1, 1000);
        for (int k = 0; k < n; ++k) {
            out.push_back(p + (q - p) * (static_cast<double>(k) / n));
        }
    }
    if (!poly.empty()) {
        out.push_back(poly.back());
    }
    return out;
}

}  // namespace

Region mobius_invert(const Region& r, const GeometryOptions& opts) {
    switch (r.kind()) {
        case Region::Kind::Empty:
            throw GeometryError("inversion of the empty set undefined");
        case Region::Kind::Unbounded:
            return r;
        case Region::Kind::InvertedBounded:
            return r.pre_image();
        case Region::Kind::PointSet: {
            if (is_zero_singleton(r)) {
                throw GeometryError("inversion of the zero singleton is the point at infinity");
            }
            if (r.contains_zero()) {
                return Region::unbounded();
            }
            std::vector<Complex> inv;
            for (Complex p : r.point_list()) {
                inv.push_back(p / std::norm(p));
            }
            return Region::points(inv);
        }
        case Region::Kind::Bounded:
            break;
    }

    if (const auto& d = r.as_disk()) {
        const double lo = d->center - d->radius;
        const double hi = d->center + d->radius;
        if (lo < -opts.abs_tol && hi > opts.abs_tol) {
            return make_inverted(r, opts);
        }
        if (lo > opts.abs_tol || hi < -opts.abs_tol) {
            return Region::disk_between(std::min(1.0 / lo, 1.0 / hi), std::max(1.0 / lo, 1.0 / hi), opts);
        }
        return Region::unbounded();
    }
    if (r.contains(0.0, 0.0) || origin_clearance(r) <= opts.abs_tol) {
        if (r.contains(0.0, 0.0) && origin_clearance(r) > opts.abs_tol) {
            return make_inverted(r, opts);
        }
        return Region::unbounded();
    }
    const auto poly = densify_for_inversion(r.upper_boundary(), 2.0 * std::numbers::pi / opts.resolution);
    std::vector<Complex> inv;
    inv.reserve(poly.size());
    for (Complex p : poly) {
        inv.push_back(p / std::norm(p));
    }
    return hco(inv, opts);
}

Region minkowski_sum(const Region& a, const Region& b, const GeometryOptions& opts) {
    using K = Region::Kind;
    if (a.is_empty() || b.is_empty()) {
        throw GeometryError("Minkowski sum with an empty set");
    }
    if (a.kind() == K::Unbounded || b.kind() == K::Unbounded) {
        return Region::unbounded();
    }
    if (a.kind() == K::InvertedBounded && b.kind() == K::InvertedBounded) {
        throw GeometryError("sum of two unbounded regions unsupported");
    }
    if (a.kind() == K::InvertedBounded) {
        return sum_with_inverted(a, b, opts);
    }
    if (b.kind() == K::InvertedBounded) {
        return sum_with_inverted(b, a, opts);
    }
    if (a.kind() == K::PointSet && b.kind() == K::PointSet) {
        const auto sa = a.boundary_samples();
        const auto sb = b.boundary_samples();
        return Region::points(pairwise(sa, sb, false));
    }
    // conv(A + B) = conv(V_A + V_B); the filled h-hull depends only on the convex hull.
    return hco(convex_polygon_sum(detail::convex_vertices(a), detail::convex_vertices(b)), opts);
}

Region minkowski_product(const Region& a, const Region& b, const GeometryOptions& opts) {
    using K = Region::Kind;
    if (a.is_empty() || b.is_empty()) {
        throw GeometryError("Minkowski product with an empty set");
    }
    if (a.kind() == K::InvertedBounded || b.kind() == K::InvertedBounded) {
        throw GeometryError("product with an inverted (unbounded) region; invert it first");
    }
    if (a.kind() == K::Unbounded || b.kind() == K::Unbounded) {
        return Region::unbounded();
    }
    if (is_zero_singleton(a) || is_zero_singleton(b)) {
        return Region::point(0.0);
    }
    if (a.kind() == K::PointSet && b.kind() == K::PointSet) {
        const auto sa = a.boundary_samples();
        const auto sb = b.boundary_samples();
        return Region::points(pairwise(sa, sb, true));
    }
    // For fixed x, x * conv(B) = conv(x * B), so conv(AB) = conv(V_A V_B).
    const auto va = detail::convex_vertices(a);
    const auto vb = detail::convex_vertices(b);
    if (va.size() * vb.size() <= kExactProductPairs) {
        return hco(convex_hull(pairwise(va, vb, true)), opts);
    }
    // Outer approximation: conservative, and within R (pi/m)^2 / 8 of the exact hull.
    const int m = 2 * opts.resolution;
    const auto poly = va.size() <= vb.size() ? product_outer_polygon(va, vb, m) : product_outer_polygon(vb, va, m);
    return hco(convex_hull(poly), opts);
}

Region scale(const Region& r, double alpha) {
    if (!std::isfinite(alpha)) {
        throw GeometryError("scale factor must be finite");
    }
    if (r.is_empty() || r.kind() == Region::Kind::Unbounded) {
        return r;
    }
    if (alpha == 0.0) {
        return Region::point(0.0);
    }
    // Negative scaling maps the upper half to the lower half; keep the upper
    // representative -conj(z) scaled by |alpha|.
    const auto map = [alpha](Complex z) { return Complex{alpha * z.real(), std::abs(alpha) * z.imag()}; };
    Region out;
    switch (r.kind()) {
        case Region::Kind::PointSet: {
            std::vector<Complex> pts;
            for (Complex p : r.point_list()) {
                pts.push_back(map(p));
            }
            return Region::points(pts);
        }
        case Region::Kind::Bounded: {
            out = r;
            for (Complex& p : out.pts_) {
                p = map(p);
            }
            if (alpha < 0.0) {
                std::reverse(out.pts_.begin(), out.pts_.end());
            }
            if (out.disk_) {
                out.disk_ = RealDisk{alpha * out.disk_->center, std::abs(alpha) * out.disk_->radius};
            }
            return out;
        }
        case Region::Kind::InvertedBounded: {
            out = r;
            for (double& t : out.hole_) {
                t *= std::abs(alpha);
            }
            if (alpha < 0.0) {
                std::reverse(out.hole_.begin(), out.hole_.end());
            }
            if (out.hole_disk_) {
                out.hole_disk_ = RealDisk{alpha * out.hole_disk_->center, std::abs(alpha) * out.hole_disk_->radius};
            }
            out.pre_ = std::make_shared<const Region>(scale(*r.pre_, 1.0 / alpha));
            return out;
        }
        default:
            return r;
    }
}

}  // namespace nlbode::cgeom
