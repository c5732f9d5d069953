#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "angiokit/raster.hpp"

namespace angiokit::vesseltree {

struct SquaredDistanceTag {};
struct DistanceTag {};

/// Exact Euclidean distance from every foreground pixel to the nearest
/// background pixel centre; background carries 0. A mask without any
/// background has no finite distances: every pixel then holds the sentinels
/// kNoBackgroundSquared / +infinity.
struct DistanceField {
    static constexpr std::int64_t kNoBackgroundSquared = std::numeric_limits<std::int64_t>::max();

    Raster<std::int64_t, SquaredDistanceTag> squared;
    Raster<double, DistanceTag> distance;

    double operator[](Point p) const { return distance[p]; }
};

/// Two-pass separable lower-envelope transform on squared distances
/// (columns, then rows).
DistanceField distance_transform(const BinaryMask& mask);

/// Topology-preserving thinning to an 8-connected, one-pixel-wide centreline.
///
/// Alternating south-east / north-west sub-iterations in the Zhang–Suen
/// style propose candidates in parallel; each candidate is then removed only
/// if it is still a simple point and not an end point in the current image,
/// which keeps component and hole counts intact (including the two-pixel-thick
/// diagonals plain Zhang–Suen erases). A final sweep removes the remaining
/// simple non-end pixels, i.e. staircase corners and 2x2 blocks.
BinaryMask skeletonize(const BinaryMask& mask);

// Number of 8-neighbours set in the skeleton.
int neighbour_count(const BinaryMask& skeleton, Point p);

// A pixel is simple when deleting it changes neither the 8-connected
// foreground nor the 4-connected background topology.
bool is_simple(const BinaryMask& mask, Point p);

/// Removes end-point-terminated branches of fewer than `min_len` pixels that
/// end at a junction. Shortest spurs go first; a spur is skipped once its
/// junction no longer has three neighbours, so pruning never disconnects.
BinaryMask prune_spurs(const BinaryMask& skeleton, int min_len = 5);

struct Joint {
    Point center;               // cluster member nearest the cluster centroid
    std::vector<Point> pixels;  // 8-connected pixels with >= 3 neighbours
};

struct KeyPoints {
    std::vector<Joint> joints;
    std::vector<Point> endpoints;  // 0 or 1 neighbours
};

KeyPoints key_points(const BinaryMask& skeleton);

enum class EndKind { end, joint };

struct VesselSegment {
    int id = 0;
    std::vector<Point> path;
    EndKind start_kind = EndKind::end;
    EndKind end_kind = EndKind::end;
    int start_joint = -1;  // index into KeyPoints::joints, or -1
    int end_joint = -1;

    std::vector<double> diameters_px;
    std::vector<double> diameters_mm;
    // Long-window moving average of diameters_mm, the healthy-lumen profile
    // from which the reference diameter is taken.
    std::vector<double> reference_mm;
    double d_max_mm = 0.0;  // over the whole path
    double d_min_mm = 0.0;

    // Measurement core [core_begin, core_end): the part of the path clear of
    // junction bulges and tapering tips. Defaults to the whole path.
    std::size_t core_begin = 0;
    std::size_t core_end = 0;

    std::size_t core_size() const noexcept { return core_end > core_begin ? core_end - core_begin : 0; }
};

/// Splits the skeleton into segments between key points. Every non-joint
/// skeleton pixel lands in exactly one segment. A closed loop without key
/// points is opened at its smallest row-major pixel. Each path starts at its
/// smaller row-major end; segments are sorted by first pixel and numbered
/// from 0.
std::vector<VesselSegment> decompose(const BinaryMask& skeleton, const KeyPoints& keys);

enum class DiameterMethod {
    distance_transform,  // 2 x EDT at the centreline pixel, less the boundary offset
    cross_section,       // mean chord along the local normal over a 3 px strip
};

struct DiameterOptions {
    DiameterMethod method = DiameterMethod::cross_section;
    bool median_smooth = false;  // window 3 along the path
    // Subtracted from 2 x EDT. The EDT reaches the first background pixel
    // centre, which lies half a pixel beyond the lumen boundary on each side.
    double boundary_offset_px = 1.0;
    // Reference profile: moving average over the core, window in multiples
    // of the core's median diameter. 0 uses the diameters unchanged.
    double reference_window_factor = 3.0;
    bool trim_ends = true;
    double joint_margin_factor = 2.0;  // x EDT at the junction
    double tip_margin_factor = 2.0;    // x median EDT of the segment
};

/// Fills per-pixel diameters, whole-path extrema, the measurement core and
/// the reference profile. The cross-section method needs the mask.
void assign_diameters(std::vector<VesselSegment>& segments, const DistanceField& field, double pixel_size_mm,
                      const std::vector<Joint>& joints, const DiameterOptions& options = {},
                      const BinaryMask* mask = nullptr);

struct CenterlineGraph {
    BinaryMask skeleton;
    Raster<double, DistanceTag> diameter_px;  // 0 off the skeleton
    std::vector<Joint> joints;
    std::vector<Point> endpoints;
    std::vector<VesselSegment> segments;
    std::optional<double> pixel_size_mm;
};

struct CenterlineOptions {
    int spur_min_len = 5;
    DiameterOptions diameters{};
};

/// EDT, thinning, spur pruning, key points, decomposition and diameters.
/// Requires the mask to carry a pixel size.
CenterlineGraph build_centerline_graph(const BinaryMask& mask, const CenterlineOptions& options = {});

}  // namespace angiokit::vesseltree
