#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "detail.hpp"
#include "nlbode/cgeom.hpp"

namespace nlbode::cgeom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

double point_segment_distance(Complex z, Complex p, Complex q) {
    const Complex d = q - p;
    const double len2 = std::norm(d);
    if (len2 == 0.0) {
        return std::abs(z - p);
    }
    const double t = std::clamp(((z - p) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(z - (p + t * d));
}

bool segments_intersect(Complex p1, Complex p2, Complex q1, Complex q2) {
    const double d1 = cross(p2 - p1, q1 - p1);
    const double d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1);
    const double d4 = cross(q2 - q1, p2 - q1);
    return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) && d1 != 0.0 && d2 != 0.0 &&
           d3 != 0.0 && d4 != 0.0;
}

/// Vertices of a bounded operand plus whether they close into a polygon.
struct Shape {
    std::vector<Complex> verts;
    bool polygon = false;
};

Shape shape_of(const Region& r) {
    if (r.kind() == Region::Kind::Bounded) {
        return {detail::closed_polygon(r), true};
    }
    return {r.boundary_samples(), false};
}

double distance_to_shape(Complex z, const Shape& s) {
    double best = kInf;
    const std::size_t n = s.verts.size();
    if (!s.polygon || n == 1) {
        for (Complex v : s.verts) {
            best = std::min(best, std::abs(z - v));
        }
        return best;
    }
    for (std::size_t i = 0; i < n; ++i) {
        best = std::min(best, point_segment_distance(z, s.verts[i], s.verts[(i + 1) % n]));
    }
    return best;
}

double hole_radius_at(std::span<const double> hole, double theta) {
    const auto k = hole.size();
    const double pos = theta / std::numbers::pi * static_cast<double>(k - 1);
    const auto i = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), k - 2);
    const double f = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    if (std::isinf(hole[i]) || std::isinf(hole[i + 1])) {
        return kInf;
    }
    return hole[i] * (1.0 - f) + hole[i + 1] * f;
}

std::vector<Complex> hole_boundary(std::span<const double> hole) {
    std::vector<Complex> out;
    const auto k = hole.size();
    for (std::size_t i = 0; i < k; ++i) {
        if (std::isfinite(hole[i])) {
            const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(k - 1);
            out.push_back(std::polar(hole[i], theta));
        }
    }
    return out;
}

}  // namespace

namespace detail {

std::vector<Complex> closed_polygon(const Region& r) {
    const auto prof = r.upper_boundary();
    std::vector<Complex> poly(prof.begin(), prof.end());
    for (std::size_t i = prof.size(); i-- > 0;) {
        if (prof[i].imag() > 0.0) {
            poly.push_back(std::conj(prof[i]));
        }
    }
    return poly;
}

std::vector<Complex> convex_vertices(const Region& r) { return convex_hull(r.boundary_samples()); }

}  // namespace detail

double tolerance(double radius, const GeometryOptions& opts) {
    return opts.abs_tol + 2.0 * std::numbers::pi * radius / opts.resolution;
}

Region Region::empty() { return {}; }

Region Region::unbounded() {
    Region r;
    r.kind_ = Kind::Unbounded;
    r.contains_zero_ = true;
    return r;
}

Region Region::points(std::span<const Complex> pts) {
    auto upper = detail::upper_representatives(pts);
    if (upper.empty()) {
        return empty();
    }
    std::sort(upper.begin(), upper.end(), [](Complex a, Complex b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    upper.erase(std::unique(upper.begin(), upper.end()), upper.end());
    Region r;
    r.kind_ = Kind::PointSet;
    r.contains_zero_ = std::any_of(upper.begin(), upper.end(), [](Complex p) { return p == 0.0; });
    r.pts_ = std::move(upper);
    return r;
}

Region Region::point(Complex z) { return points(std::span<const Complex>(&z, 1)); }

Region Region::disk(double center, double radius, const GeometryOptions& opts) {
    if (!(radius >= 0.0) || !std::isfinite(center) || !std::isfinite(radius)) {
        throw GeometryError("disk requires a finite center and a nonnegative radius");
    }
    if (radius == 0.0) {
        return point(center);
    }
    const int n = std::max(4, opts.resolution / 2);
    std::vector<Complex> prof;
    prof.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = std::numbers::pi * (1.0 - static_cast<double>(k) / n);
        prof.emplace_back(center + radius * std::cos(t), k == 0 || k == n ? 0.0 : radius * std::sin(t));
    }
    prof.front() = {center - radius, 0.0};
    prof.back() = {center + radius, 0.0};
    Region r = from_upper_chain(std::move(prof), true);
    r.disk_ = RealDisk{center, radius};
    return r;
}

Region Region::disk_between(double alpha, double beta, const GeometryOptions& opts) {
    if (alpha > beta) {
        throw GeometryError("disk_between requires alpha <= beta");
    }
    return disk(0.5 * (alpha + beta), 0.5 * (beta - alpha), opts);
}

Region Region::from_upper_chain(std::vector<Complex> chain, bool hconvex) {
    if (chain.empty()) {
        return empty();
    }
    for (std::size_t i = 1; i < chain.size(); ++i) {
        if (chain[i].real() < chain[i - 1].real()) {
            chain[i] = {chain[i - 1].real(), chain[i].imag()};
        }
    }
    for (Complex& p : chain) {
        p = {p.real(), std::max(0.0, p.imag())};
    }
    if (chain.front().imag() > 0.0 || chain.size() == 1) {
        chain.insert(chain.begin(), Complex{chain.front().real(), 0.0});
    }
    if (chain.back().imag() > 0.0 || chain.size() == 1) {
        chain.push_back({chain.back().real(), 0.0});
    }
    Region r;
    r.kind_ = Kind::Bounded;
    r.pts_ = std::move(chain);
    r.hconvex_ = hconvex;
    r.contains_zero_ = r.contains(0.0, 0.0);
    return r;
}

const Region& Region::pre_image() const {
    if (!pre_) {
        throw GeometryError("region has no pre-image");
    }
    return *pre_;
}

bool Region::contains(Complex z, double tol) const {
    switch (kind_) {
        case Kind::Empty:
            return false;
        case Kind::Unbounded:
            return true;
        case Kind::PointSet:
            return std::any_of(pts_.begin(), pts_.end(), [&](Complex p) {
                return std::abs(z - p) <= tol || std::abs(z - std::conj(p)) <= tol;
            });
        case Kind::InvertedBounded: {
            if (hole_disk_) {
                return std::abs(z - hole_disk_->center) >= hole_disk_->radius - tol;
            }
            const double theta = std::atan2(std::abs(z.imag()), z.real());
            return std::abs(z) >= hole_radius_at(hole_, theta) - tol;
        }
        case Kind::Bounded:
            break;
    }
    if (disk_) {
        return std::abs(z - disk_->center) <= disk_->radius + tol;
    }
    const double x = z.real();
    const double y = std::abs(z.imag());
    const double a = pts_.front().real();
    const double b = pts_.back().real();
    if (x < a - tol || x > b + tol) {
        return false;
    }
    const double xc = std::clamp(x, a, b);
    const auto first = std::lower_bound(pts_.begin(), pts_.end(), xc,
                                        [](Complex p, double v) { return p.real() < v; });
    std::size_t j = first == pts_.begin() ? 0 : static_cast<std::size_t>(first - pts_.begin()) - 1;
    double hi = -kInf;
    for (; j + 1 < pts_.size(); ++j) {
        const Complex p = pts_[j];
        const Complex q = pts_[j + 1];
        if (p.real() > xc) {
            break;
        }
        if (q.real() < xc) {
            continue;
        }
        const double dx = q.real() - p.real();
        const double y_here = dx <= 0.0 ? std::max(p.imag(), q.imag())
                                        : p.imag() + (q.imag() - p.imag()) * (xc - p.real()) / dx;
        hi = std::max(hi, y_here);
    }
    if (pts_.size() == 1) {
        hi = pts_[0].imag();
    }
    if (y <= hi + tol) {
        return true;
    }
    // Steep parts of the profile: accept points within tol of the boundary.
    const Complex zu(x, y);
    for (std::size_t k = 0; k + 1 < pts_.size(); ++k) {
        const Complex p = pts_[k];
        const Complex q = pts_[k + 1];
        if (std::max(p.real(), q.real()) < x - tol || std::min(p.real(), q.real()) > x + tol) {
            continue;
        }
        const Complex d = q - p;
        const double len2 = std::norm(d);
        const double t = len2 > 0.0 ? std::clamp(((zu - p) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
        if (std::abs(zu - (p + t * d)) <= tol) {
            return true;
        }
    }
    return false;
}

std::vector<Complex> Region::boundary_samples() const {
    std::vector<Complex> out;
    switch (kind_) {
        case Kind::PointSet:
        case Kind::Bounded:
            out.reserve(2 * pts_.size());
            for (Complex p : pts_) {
                out.push_back(p);
                if (p.imag() > 0.0) {
                    out.push_back(std::conj(p));
                }
            }
            break;
        case Kind::InvertedBounded:
            for (Complex p : hole_boundary(hole_)) {
                out.push_back(p);
                if (p.imag() > 0.0) {
                    out.push_back(std::conj(p));
                }
            }
            break;
        default:
            break;
    }
    return out;
}

std::string Region::kind_name() const {
    switch (kind_) {
        case Kind::Empty:
            return "Empty";
        case Kind::PointSet:
            return "PointSet";
        case Kind::Bounded:
            return "Bounded";
        case Kind::InvertedBounded:
            return "InvertedBounded";
        case Kind::Unbounded:
            return "Unbounded";
    }
    return "?";
}

Region make_inverted(const Region& pre, const GeometryOptions& opts) {
    const int k = std::max(3, opts.resolution / 2 + 1);
    std::vector<double> hole(static_cast<std::size_t>(k));
    std::optional<RealDisk> hole_disk;
    if (const auto& d = pre.as_disk()) {
        // Circle through c-R < 0 < c+R maps to the circle through their reciprocals.
        const double lo = 1.0 / (d->center - d->radius);
        const double hi = 1.0 / (d->center + d->radius);
        hole_disk = RealDisk{0.5 * (lo + hi), 0.5 * (hi - lo)};
        for (int i = 0; i < k; ++i) {
            const double t = std::numbers::pi * i / (k - 1);
            const double c = d->center;
            const double rho = c * std::cos(t) + std::sqrt(d->radius * d->radius - c * c * std::sin(t) * std::sin(t));
            hole[static_cast<std::size_t>(i)] = 1.0 / rho;
        }
    } else {
        const auto poly = detail::closed_polygon(pre);
        const std::size_t n = poly.size();
        for (int i = 0; i < k; ++i) {
            const Complex u = std::polar(1.0, std::numbers::pi * i / (k - 1));
            double rho = 0.0;
            for (std::size_t e = 0; e < n; ++e) {
                const Complex p = poly[e];
                const Complex d = poly[(e + 1) % n] - p;
                const double denom = cross(u, d);
                if (std::abs(denom) < 1e-300) {
                    continue;
                }
                const double t = cross(p, d) / denom;
                const double s = cross(p, u) / denom;
                if (t >= 0.0 && s >= -1e-12 && s <= 1.0 + 1e-12) {
                    rho = std::max(rho, t);
                }
            }
            if (rho <= 0.0) {
                throw GeometryError("inversion pre-image does not surround the origin");
            }
            hole[static_cast<std::size_t>(i)] = 1.0 / rho;
        }
    }
    Region r;
    r.kind_ = Region::Kind::InvertedBounded;
    r.hole_ = std::move(hole);
    r.hole_disk_ = hole_disk;
    r.pre_ = std::make_shared<const Region>(pre);
    r.contains_zero_ = false;
    return r;
}

Region make_inverted_from_hole(std::vector<double> hole, std::optional<RealDisk> hole_disk,
                               const GeometryOptions& opts) {
    const auto k = hole.size();
    std::vector<Complex> pre_pts;
    pre_pts.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(k - 1);
        pre_pts.push_back(std::isinf(hole[i]) ? Complex{0.0} : std::polar(1.0 / hole[i], theta));
    }
    Region r;
    r.kind_ = Region::Kind::InvertedBounded;
    r.hole_ = std::move(hole);
    r.hole_disk_ = hole_disk;
    r.pre_ = std::make_shared<const Region>(hco(pre_pts, opts));
    r.contains_zero_ = false;
    return r;
}

double radius(const Region& r) {
    switch (r.kind()) {
        case Region::Kind::Empty:
            throw GeometryError("radius of empty set undefined");
        case Region::Kind::InvertedBounded:
        case Region::Kind::Unbounded:
            return kInf;
        default:
            break;
    }
    double rho = 0.0;
    for (Complex p : r.upper_boundary()) {
        rho = std::max(rho, std::abs(p));
    }
    return rho;
}

double set_distance(const Region& a, const Region& b, const GeometryOptions& opts) {
    if (a.is_empty() || b.is_empty()) {
        throw GeometryError("distance to an empty set undefined");
    }
    using K = Region::Kind;
    if (a.kind() == K::Unbounded || b.kind() == K::Unbounded) {
        return 0.0;
    }
    if (a.kind() == K::InvertedBounded && b.kind() == K::InvertedBounded) {
        return 0.0;  // both contain the point at infinity
    }
    if (a.kind() == K::InvertedBounded || b.kind() == K::InvertedBounded) {
        const Region& inv = a.kind() == K::InvertedBounded ? a : b;
        const Region& other = a.kind() == K::InvertedBounded ? b : a;
        const auto samples = other.boundary_samples();
        if (const auto& d = inv.hole_disk()) {
            double far = 0.0;
            for (Complex z : samples) {
                far = std::max(far, std::abs(z - d->center));
            }
            return std::max(0.0, d->radius - far);
        }
        for (Complex z : samples) {
            if (inv.contains(z, -opts.abs_tol)) {
                return 0.0;
            }
        }
        Shape hole{hole_boundary(inv.hole_radii()), true};
        for (std::size_t i = hole.verts.size(); i-- > 0;) {
            if (hole.verts[i].imag() > 0.0) {
                hole.verts.push_back(std::conj(hole.verts[i]));
            }
        }
        double best = kInf;
        for (Complex z : samples) {
            best = std::min(best, distance_to_shape(z, hole));
        }
        return best;
    }

    const Shape sa = shape_of(a);
    const Shape sb = shape_of(b);
    for (Complex z : sa.verts) {
        if (b.contains(z, opts.abs_tol)) {
            return 0.0;
        }
    }
    for (Complex z : sb.verts) {
        if (a.contains(z, opts.abs_tol)) {
            return 0.0;
        }
    }
    if (sa.polygon && sb.polygon) {
        const std::size_t na = sa.verts.size();
        const std::size_t nb = sb.verts.size();
        for (std::size_t i = 0; i < na; ++i) {
            for (std::size_t j = 0; j < nb; ++j) {
                if (segments_intersect(sa.verts[i], sa.verts[(i + 1) % na], sb.verts[j],
                                       sb.verts[(j + 1) % nb])) {
                    return 0.0;
                }
            }
        }
    }
    double best = kInf;
    for (Complex z : sa.verts) {
        best = std::min(best, distance_to_shape(z, sb));
    }
    for (Complex z : sb.verts) {
        best = std::min(best, distance_to_shape(z, sa));
    }
    return best;
}

double hausdorff_distance(const Region& a, const Region& b) {
    if (a.is_unbounded() || b.is_unbounded() || a.is_empty() || b.is_empty()) {
        throw GeometryError("Hausdorff distance requires two bounded regions");
    }
    const Shape sa = shape_of(a);
    const Shape sb = shape_of(b);
    double h = 0.0;
    for (Complex z : sa.verts) {
        h = std::max(h, distance_to_shape(z, sb));
    }
    for (Complex z : sb.verts) {
        h = std::max(h, distance_to_shape(z, sa));
    }
    return h;
}

void write_boundary_csv(std::ostream& os, const Region& r) {
    os << "# kind=" << r.kind_name();
    if (r.kind() == Region::Kind::InvertedBounded) {
        os << " (set is the exterior of the listed curve, including infinity)";
    }
    os << "\nre,im,segment_id\n";
    os << std::setprecision(17);
    const auto row = [&](Complex z, int seg) { os << z.real() << ',' << z.imag() << ',' << seg << '\n'; };
    switch (r.kind()) {
        case Region::Kind::PointSet: {
            int id = 0;
            for (Complex p : r.point_list()) {
                row(p, id);
                if (p.imag() > 0.0) {
                    row(std::conj(p), id);
                }
                ++id;
            }
            break;
        }
        case Region::Kind::Bounded:
            for (Complex p : r.upper_boundary()) {
                row(p, 0);
            }
            for (Complex p : r.upper_boundary()) {
                row(std::conj(p), 1);
            }
            break;
        case Region::Kind::InvertedBounded: {
            const auto hole = hole_boundary(r.hole_radii());
            for (Complex p : hole) {
                row(p, 0);
            }
            for (Complex p : hole) {
                row(std::conj(p), 1);
            }
            break;
        }
        default:
            break;
    }
}

}  // namespace nlbode::cgeom
