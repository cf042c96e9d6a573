#pragma once

#include <span>
#include <vector>

#include "nlbode/cgeom.hpp"

namespace nlbode::cgeom {

/// InvertedBounded region whose pre-image is `pre` (a Bounded region with 0 inside).
Region make_inverted(const Region& pre, const GeometryOptions& opts);
/// InvertedBounded region from sampled hole radii on theta in [0, pi].
Region make_inverted_from_hole(std::vector<double> hole, std::optional<RealDisk> hole_disk,
                               const GeometryOptions& opts);

}  // namespace nlbode::cgeom

namespace nlbode::cgeom::detail {

/// Counter-clockwise convex hull of `keys`, returned as indices into `keys`.
std::vector<std::size_t> hull_indices(std::span<const Complex> keys);

/// Upper chain (left to right) of a counter-clockwise convex polygon.
std::vector<Complex> upper_chain(std::span<const Complex> ccw);

std::vector<Complex> upper_representatives(std::span<const Complex> pts);

/// Convex hull vertices of the full symmetric sample set of a bounded region.
std::vector<Complex> convex_vertices(const Region& r);

/// Closed symmetric boundary polygon of a Bounded region (no repeated closing vertex).
std::vector<Complex> closed_polygon(const Region& r);

}  // namespace nlbode::cgeom::detail
