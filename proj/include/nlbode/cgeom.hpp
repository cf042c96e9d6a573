#pragma once

/**
 * @file cgeom.hpp
 * @brief Complex-plane region algebra used to manipulate scaled relative graphs.
 *
 * Every region is symmetric about the real axis. Only the closed upper half is
 * stored; the lower half is implied by conjugation.
 *
 * Bounded regions are kept in a "vertically filled" form: an x-monotone upper
 * profile running from (a, 0) to (b, 0), and the region is
 * { x + jy : a <= x <= b, |y| <= profile(x) }. Filling below the profile only
 * ever enlarges a set, so every radius computed from it remains an upper bound.
 */

#include <complex>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlbode::cgeom {

using Complex = std::complex<double>;

class GeometryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct GeometryOptions {
    /// Boundary samples per full circle; arcs are discretized at 2*pi/resolution.
    int resolution = 720;
    double abs_tol = 1e-9;
};

/// Disk centered on the real axis.
struct RealDisk {
    double center = 0.0;
    double radius = 0.0;
};

/// Circle through z1, z2 centered on the real axis, restricted to the minimal
/// upper arc between the two points.
struct ArcSegment {
    Complex z1;
    Complex z2;
    double center = 0.0;
    double radius = 0.0;  ///< infinite for a vertical segment (Re z1 == Re z2)

    static ArcSegment through(Complex z1, Complex z2);
    /// Points along the arc from z1 to z2 with angular step <= 2*pi/resolution.
    [[nodiscard]] std::vector<Complex> sample(int resolution) const;
};

class Region {
  public:
    enum class Kind { Empty, PointSet, Bounded, InvertedBounded, Unbounded };

    Region() = default;

    static Region empty();
    /// The whole extended plane. Used as the "no finite bound" marker.
    static Region unbounded();
    /// Points are symmetrized: each point is stored by its upper-half representative.
    static Region points(std::span<const Complex> pts);
    static Region point(Complex z);
    static Region disk(double center, double radius, const GeometryOptions& opts = {});
    /// D_[alpha, beta]: the disk centered on R meeting R in [alpha, beta].
    static Region disk_between(double alpha, double beta, const GeometryOptions& opts = {});
    /// Builds a Bounded region from an x-monotone upper chain (left to right, Im >= 0).
    static Region from_upper_chain(std::vector<Complex> chain, bool hconvex);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] bool is_empty() const { return kind_ == Kind::Empty; }
    [[nodiscard]] bool is_unbounded() const {
        return kind_ == Kind::InvertedBounded || kind_ == Kind::Unbounded;
    }

    /// Upper-half representatives of a PointSet.
    [[nodiscard]] std::span<const Complex> point_list() const { return pts_; }
    /// x-monotone upper profile of a Bounded region, starting and ending on the real axis.
    [[nodiscard]] std::span<const Complex> upper_boundary() const { return pts_; }
    /// For InvertedBounded: the bounded region whose inversion this is.
    [[nodiscard]] const Region& pre_image() const;
    /// Radial extent of the excluded hole of an InvertedBounded region, sampled
    /// uniformly on theta in [0, pi].
    [[nodiscard]] std::span<const double> hole_radii() const { return hole_; }
    [[nodiscard]] const std::optional<RealDisk>& hole_disk() const { return hole_disk_; }
    [[nodiscard]] const std::optional<RealDisk>& as_disk() const { return disk_; }
    [[nodiscard]] bool contains_zero() const { return contains_zero_; }
    /// True when the stored profile is already an h-convex hull.
    [[nodiscard]] bool is_hconvex() const { return hconvex_; }

    [[nodiscard]] bool contains(Complex z, double tol = 1e-9) const;

    /// Full symmetric set of boundary samples (upper samples and their conjugates).
    [[nodiscard]] std::vector<Complex> boundary_samples() const;

    [[nodiscard]] std::string kind_name() const;

  private:
    friend Region make_inverted(const Region& pre, const GeometryOptions& opts);
    friend Region make_inverted_from_hole(std::vector<double> hole, std::optional<RealDisk> hole_disk,
                                          const GeometryOptions& opts);
    friend Region scale(const Region& r, double alpha);

    Kind kind_ = Kind::Empty;
    std::vector<Complex> pts_;
    std::shared_ptr<const Region> pre_;
    std::vector<double> hole_;
    std::optional<RealDisk> hole_disk_;
    std::optional<RealDisk> disk_;
    bool contains_zero_ = false;
    bool hconvex_ = false;
};

/// Tolerance used for geometric comparisons on a region of the given radius.
[[nodiscard]] double tolerance(double radius, const GeometryOptions& opts = {});

/// Euclidean convex hull (counter-clockwise, collinear points dropped).
[[nodiscard]] std::vector<Complex> convex_hull(std::vector<Complex> pts);

/// h-convex hull of P u conj(P), vertically filled.
[[nodiscard]] Region hco(std::span<const Complex> pts, const GeometryOptions& opts = {});

/// Euclidean convex hull of r u conj(r).
[[nodiscard]] Region chord_complete(const Region& r);
/// h-convex hull of the boundary of r.
[[nodiscard]] Region arc_complete(const Region& r, const GeometryOptions& opts = {});

/// Elementwise r e^{j theta} -> (1/r) e^{j theta}.
[[nodiscard]] Region mobius_invert(const Region& r, const GeometryOptions& opts = {});

[[nodiscard]] Region minkowski_sum(const Region& a, const Region& b, const GeometryOptions& opts = {});
[[nodiscard]] Region minkowski_product(const Region& a, const Region& b,
                                       const GeometryOptions& opts = {});

/// alpha * r for real alpha.
[[nodiscard]] Region scale(const Region& r, double alpha);

/// Smallest rho with r contained in D_rho(0); +inf for unbounded kinds.
[[nodiscard]] double radius(const Region& r);

/// inf |z1 - z2| over the two sets, with |inf - inf| := 0.
[[nodiscard]] double set_distance(const Region& a, const Region& b, const GeometryOptions& opts = {});

/// Symmetric Hausdorff distance between the boundaries of two bounded regions.
[[nodiscard]] double hausdorff_distance(const Region& a, const Region& b);

/// CSV dump: a `# kind=...` comment line, then `re,im,segment_id` rows.
void write_boundary_csv(std::ostream& os, const Region& r);

}  // namespace nlbode::cgeom
