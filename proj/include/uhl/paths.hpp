#pragma once

#include <array>
#include <functional>
#include <vector>

#include "uhl/linalg.hpp"

namespace uhl {

enum class SegmentKind { Meridian, Parallel, Custom };

// One smooth piece of a sphere path, parametrized by s in [0, 1].
//   meridian: phi = fixed, theta from -> to
//   parallel: theta = fixed, phi from -> to
//   custom:   s -> (theta, phi); if built from nodes, the node list is kept
//             so the segment serializes losslessly.
struct PathSegment {
    SegmentKind kind = SegmentKind::Meridian;
    double fixed = 0.0, from = 0.0, to = 0.0;
    std::function<std::array<double, 2>(double)> map;
    std::vector<std::array<double, 2>> nodes;

    std::array<double, 2> point(double s) const;
};

PathSegment meridian_segment(double phi, double theta_from, double theta_to);
PathSegment parallel_segment(double theta, double phi_from, double phi_to);
PathSegment custom_segment(std::function<std::array<double, 2>(double)> map);
// Piecewise-linear interpolation through explicit (theta, phi) nodes.
PathSegment custom_nodes_segment(std::vector<std::array<double, 2>> nodes);

// Piecewise-smooth curve on the parameter sphere. Consecutive segments must
// share endpoints; at the poles only theta has to agree (phi may jump there).
struct PathSpec {
    std::vector<PathSegment> segments;
    bool degenerate = false;  // zero-width slice (phi1 = phi0 mod 2 pi)

    void validate() const;
    std::array<double, 2> start() const;
    std::array<double, 2> end() const;
    bool closed() const;  // endpoints coincide on the sphere (poles compare theta only)
};

// Pole-to-pole slice: down the phi0 meridian, along the south parallel to
// phi1, back up, then a polar return arc phi1 -> phi1 + pi. Solid angle
// 2 (phi1 - phi0).
PathSpec orange_slice(double phi0, double phi1);

// Two slices traversed with opposite orientation; eight segments, exactly
// closed in parameter space, zero net solid angle.
PathSpec figure_eight(double phi0, double phi1);

// Same geometric curve with every segment's parameter warped by a monotone
// map with warp(0) = 0 and warp(1) = 1.
PathSpec reparametrized(const PathSpec& spec, std::function<double(double)> warp);

struct SampledPath {
    struct Node {
        double t = 0.0, theta = 0.0, phi = 0.0;
    };
    std::vector<Node> nodes;                       // t strictly increasing
    std::vector<Eigen::Index> segment_boundaries;  // first node index of each sampled span
    bool closed = false;
};

// n >= 2 nodes per segment, uniform in each segment's parameter. A polar
// junction where phi jumps between consecutive segments is materialized as an
// explicit pole-arc span so that downstream quadrature and transport see it.
SampledPath sample(const PathSpec& spec, int n_per_segment);

// Integral of (1 - cos theta) d phi by trapezoidal quadrature over the nodes;
// exact on meridian, parallel, and pole-arc spans.
double solid_angle(const SampledPath& path);

} // namespace uhl
