#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "detail.hpp"
#include "nlbode/cgeom.hpp"

namespace nlbode::cgeom {

namespace {

double cross(Complex o, Complex a, Complex b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

bool lex_less(Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

}  // namespace

namespace detail {

std::vector<std::size_t> hull_indices(std::span<const Complex> keys) {
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return lex_less(keys[i], keys[j]); });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::size_t i, std::size_t j) { return keys[i] == keys[j]; }),
                order.end());
    if (order.size() < 3) {
        return order;
    }

    // Andrew's monotone chain.
    std::vector<std::size_t> hull(2 * order.size());
    std::size_t k = 0;
    for (std::size_t i : order) {
        while (k >= 2 && cross(keys[hull[k - 2]], keys[hull[k - 1]], keys[i]) <= 0.0) {
            --k;
        }
        hull[k++] = i;
    }
    const std::size_t lower = k + 1;
    for (auto it = order.rbegin() + 1; it != order.rend(); ++it) {
        while (k >= lower && cross(keys[hull[k - 2]], keys[hull[k - 1]], keys[*it]) <= 0.0) {
            --k;
        }
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    return hull;
}

std::vector<Complex> upper_chain(std::span<const Complex> ccw) {
    const std::size_t n = ccw.size();
    if (n <= 1) {
        return {ccw.begin(), ccw.end()};
    }
    double xmin = ccw[0].real();
    double xmax = ccw[0].real();
    double scale = 0.0;
    for (Complex p : ccw) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        scale = std::max(scale, std::abs(p));
    }
    const double eps = 1e-13 * std::max(scale, 1e-300);
    std::size_t imax = 0;
    std::size_t imin = 0;
    double ymax_right = -1.0;
    double ymax_left = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (ccw[i].real() >= xmax - eps && ccw[i].imag() > ymax_right) {
            ymax_right = ccw[i].imag();
            imax = i;
        }
        if (ccw[i].real() <= xmin + eps && ccw[i].imag() > ymax_left) {
            ymax_left = ccw[i].imag();
            imin = i;
        }
    }
    // Counter-clockwise from the right end runs along the top towards the left end.
    std::vector<Complex> chain;
    std::size_t i = imax;
    chain.push_back(ccw[i]);
    while (i != imin) {
        i = (i + 1) % n;
        chain.push_back(ccw[i]);
    }
    std::reverse(chain.begin(), chain.end());
    for (Complex& p : chain) {
        p = {p.real(), std::max(p.imag(), 0.0)};
    }
    return chain;
}

std::vector<Complex> upper_representatives(std::span<const Complex> pts) {
    std::vector<Complex> out;
    out.reserve(pts.size());
    for (Complex p : pts) {
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
            throw GeometryError("non-finite point in region construction");
        }
        out.emplace_back(p.real(), std::abs(p.imag()));
    }
    return out;
}

}  // namespace detail

std::vector<Complex> convex_hull(std::vector<Complex> pts) {
    const auto idx = detail::hull_indices(pts);
    std::vector<Complex> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        out.push_back(pts[i]);
    }
    return out;
}

ArcSegment ArcSegment::through(Complex z1, Complex z2) {
    ArcSegment arc{z1, z2, 0.0, std::numeric_limits<double>::infinity()};
    const double dx = z1.real() - z2.real();
    const double scale = std::max({std::abs(z1), std::abs(z2), 1e-300});
    if (std::abs(dx) > 1e-14 * scale) {
        arc.center = (std::norm(z1) - std::norm(z2)) / (2.0 * dx);
        arc.radius = std::abs(z1 - arc.center);
    } else {
        arc.center = z1.real();
    }
    return arc;
}

std::vector<Complex> ArcSegment::sample(int resolution) const {
    if (!std::isfinite(radius) || z1 == z2) {
        return {z1, z2};
    }
    const double t1 = std::atan2(z1.imag(), z1.real() - center);
    const double t2 = std::atan2(z2.imag(), z2.real() - center);
    const double step = 2.0 * std::numbers::pi / resolution;
    const auto n = static_cast<int>(std::ceil(std::abs(t2 - t1) / step));
    if (n <= 1) {
        return {z1, z2};
    }
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(z1);
    for (int k = 1; k < n; ++k) {
        const double t = t1 + (t2 - t1) * k / n;
        out.emplace_back(center + radius * std::cos(t), std::max(0.0, radius * std::sin(t)));
    }
    out.push_back(z2);
    return out;
}

Region hco(std::span<const Complex> pts, const GeometryOptions& opts) {
    auto upper = detail::upper_representatives(pts);
    if (upper.empty()) {
        return Region::empty();
    }
    double xmin = upper[0].real();
    double xmax = upper[0].real();
    for (Complex p : upper) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
    }
    const double cx = 0.5 * (xmin + xmax);
    double s = 0.0;
    for (Complex p : upper) {
        s = std::max(s, std::abs(p - cx));
    }
    if (s == 0.0) {
        if (upper[0].imag() == 0.0) {
            return Region::point(upper[0]);
        }
        return Region::from_upper_chain({upper[0]}, true);
    }

    // In the Klein model geodesics of the upper half-plane are straight lines,
    // so the hyperbolic convex hull is the Euclidean hull of the mapped points.
    std::vector<Complex> keys;
    keys.reserve(upper.size());
    const Complex j{0.0, 1.0};
    for (Complex p : upper) {
        const Complex zn = (p - cx) / s;
        const Complex w = (zn - j) / (zn + j);
        keys.push_back(2.0 * w / (1.0 + std::norm(w)));
    }
    const auto idx = detail::hull_indices(keys);
    if (idx.size() == 1) {
        const Complex p = upper[idx[0]];
        return p.imag() == 0.0 ? Region::point(p) : Region::from_upper_chain({p}, true);
    }
    std::vector<Complex> ccw;
    ccw.reserve(idx.size());
    for (std::size_t i : idx) {
        ccw.push_back(upper[i]);
    }
    const auto chain = detail::upper_chain(ccw);
    if (chain.size() == 1) {
        return chain[0].imag() == 0.0 ? Region::point(chain[0])
                                      : Region::from_upper_chain({chain[0]}, true);
    }
    std::vector<Complex> sampled;
    sampled.push_back(chain.front());
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        const auto arc = ArcSegment::through(chain[i], chain[i + 1]).sample(opts.resolution);
        sampled.insert(sampled.end(), arc.begin() + 1, arc.end());
    }
    return Region::from_upper_chain(std::move(sampled), true);
}

Region chord_complete(const Region& r) {
    switch (r.kind()) {
        case Region::Kind::Empty:
        case Region::Kind::Unbounded:
            return r;
        case Region::Kind::InvertedBounded:
            throw GeometryError("chord completion of an unbounded region is undefined");
        default:
            break;
    }
    const auto hull = convex_hull(r.boundary_samples());
    if (hull.size() == 1) {
        return Region::point(hull[0]);
    }
    auto chain = detail::upper_chain(hull);
    if (chain.size() == 1 && chain[0].imag() == 0.0) {
        return Region::point(chain[0]);
    }
    return Region::from_upper_chain(std::move(chain), false);
}

Region arc_complete(const Region& r, const GeometryOptions& opts) {
    switch (r.kind()) {
        case Region::Kind::Empty:
        case Region::Kind::Unbounded:
            return r;
        case Region::Kind::InvertedBounded:
            throw GeometryError("arc completion of an unbounded region is undefined");
        default:
            break;
    }
    if (r.is_hconvex()) {
        return r;
    }
    return hco(r.boundary_samples(), opts);
}

}  // namespace nlbode::cgeom
