#include "uhl/paths.hpp"
#include <memory>

#include <cmath>
#include <string>

namespace uhl {

namespace {

constexpr double pos_tol = 1e-9;  // endpoint agreement tolerance

bool at_pole(double theta) { return theta <= pos_tol || theta >= pi - pos_tol; }

bool same_point(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    if (std::abs(a[0] - b[0]) > pos_tol) return false;
    if (at_pole(a[0]) && at_pole(b[0])) return true;
    return circular_distance(a[1], b[1]) <= pos_tol;
}

void check_finite(const std::array<double, 2>& p, const std::string& where) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
        throw InvalidInput(where + ": non-finite coordinates");
    if (p[0] < -pos_tol || p[0] > pi + pos_tol)
        throw InvalidInput(where + ": theta outside [0, pi]");
}

} // namespace

std::array<double, 2> PathSegment::point(double s) const {
    switch (kind) {
        case SegmentKind::Meridian:
            return {std::lerp(from, to, s), fixed};
        case SegmentKind::Parallel:
            return {fixed, std::lerp(from, to, s)};
        case SegmentKind::Custom:
            return map(s);
    }
    throw InvalidInput("unknown segment kind");
}

PathSegment meridian_segment(double phi, double theta_from, double theta_to) {
    PathSegment seg;
    seg.kind = SegmentKind::Meridian;
    seg.fixed = phi;
    seg.from = theta_from;
    seg.to = theta_to;
    return seg;
}

PathSegment parallel_segment(double theta, double phi_from, double phi_to) {
    PathSegment seg;
    seg.kind = SegmentKind::Parallel;
    seg.fixed = theta;
    seg.from = phi_from;
    seg.to = phi_to;
    return seg;
}

PathSegment custom_segment(std::function<std::array<double, 2>(double)> map) {
    PathSegment seg;
    seg.kind = SegmentKind::Custom;
    seg.map = std::move(map);
    return seg;
}

PathSegment custom_nodes_segment(std::vector<std::array<double, 2>> nodes) {
    if (nodes.size() < 2) throw InvalidInput("a custom segment needs at least two nodes");
    PathSegment seg;
    seg.kind = SegmentKind::Custom;
    seg.nodes = std::move(nodes);
    const auto pts = std::make_shared<std::vector<std::array<double, 2>>>(seg.nodes);
    seg.map = [pts](double s) -> std::array<double, 2> {
        const double x = std::clamp(s, 0.0, 1.0) * (pts->size() - 1);
        const size_t k = std::min(static_cast<size_t>(x), pts->size() - 2);
        const double f = x - static_cast<double>(k);
        return {(1.0 - f) * (*pts)[k][0] + f * (*pts)[k + 1][0],
                (1.0 - f) * (*pts)[k][1] + f * (*pts)[k + 1][1]};
    };
    return seg;
}

void PathSpec::validate() const {
    if (segments.empty()) throw InvalidInput("path has no segments");
    for (size_t k = 0; k < segments.size(); ++k) {
        const std::string where = "segment " + std::to_string(k + 1);
        const auto& seg = segments[k];
        if (seg.kind == SegmentKind::Custom && !seg.map)
            throw InvalidInput(where + ": custom segment without a map");
        const int probes = seg.kind == SegmentKind::Custom ? 65 : 2;
        for (int q = 0; q < probes; ++q)
            check_finite(seg.point(q / (probes - 1.0)), where);
        if (k > 0 && !same_point(segments[k - 1].point(1.0), seg.point(0.0)))
            throw InvalidInput(where + ": does not start where segment " + std::to_string(k) +
                               " ends (poles compare theta only)");
    }
}

std::array<double, 2> PathSpec::start() const {
    if (segments.empty()) throw InvalidInput("path has no segments");
    return segments.front().point(0.0);
}

std::array<double, 2> PathSpec::end() const {
    if (segments.empty()) throw InvalidInput("path has no segments");
    return segments.back().point(1.0);
}

bool PathSpec::closed() const { return same_point(end(), start()); }

PathSpec orange_slice(double phi0, double phi1) {
    PathSpec spec;
    spec.segments = {
        meridian_segment(phi0, 0.0, pi),
        parallel_segment(pi, phi0, phi1),
        meridian_segment(phi1, pi, 0.0),
        parallel_segment(0.0, phi1, phi1 + pi),
    };
    spec.degenerate = circular_distance(phi0, phi1) <= 1e-12;
    return spec;
}

PathSpec figure_eight(double phi0, double phi1) {
    PathSpec spec;
    spec.segments = {
        meridian_segment(phi0, 0.0, pi),
        parallel_segment(pi, phi0, phi1),
        meridian_segment(phi1, pi, 0.0),
        parallel_segment(0.0, phi1, phi1 + pi),
        meridian_segment(phi1 + pi, 0.0, pi),
        parallel_segment(pi, phi1 + pi, phi0 + pi),
        meridian_segment(phi0 + pi, pi, 0.0),
        parallel_segment(0.0, phi0 + pi, phi0),
    };
    spec.degenerate = circular_distance(phi0, phi1) <= 1e-12;
    return spec;
}

PathSpec reparametrized(const PathSpec& spec, std::function<double(double)> warp) {
    PathSpec out;
    out.degenerate = spec.degenerate;
    for (const auto& seg : spec.segments) {
        out.segments.push_back(custom_segment(
            [seg, warp](double s) { return seg.point(warp(s)); }));
    }
    return out;
}

SampledPath sample(const PathSpec& spec, int n_per_segment) {
    if (n_per_segment < 2) throw InvalidInput("sampling needs at least two nodes per segment");
    spec.validate();

    // materialize polar phi jumps between consecutive segments as pole arcs
    std::vector<PathSegment> effective;
    for (size_t k = 0; k < spec.segments.size(); ++k) {
        if (k > 0) {
            const auto prev = spec.segments[k - 1].point(1.0);
            const auto next = spec.segments[k].point(0.0);
            if (std::abs(prev[1] - next[1]) > 1e-12 && at_pole(prev[0])) {
                const double pole = prev[0] < 0.5 * pi ? 0.0 : pi;
                effective.push_back(parallel_segment(pole, prev[1], next[1]));
            }
        }
        effective.push_back(spec.segments[k]);
    }

    SampledPath path;
    path.closed = spec.closed();
    const Eigen::Index total =
        static_cast<Eigen::Index>(effective.size()) * (n_per_segment - 1) + 1;
    path.nodes.reserve(total);
    for (size_t k = 0; k < effective.size(); ++k) {
        path.segment_boundaries.push_back(static_cast<Eigen::Index>(k) * (n_per_segment - 1));
        const int first = k == 0 ? 0 : 1;
        for (int q = first; q < n_per_segment; ++q) {
            const auto p = effective[k].point(q / (n_per_segment - 1.0));
            SampledPath::Node node;
            node.theta = p[0];
            node.phi = p[1];
            path.nodes.push_back(node);
        }
    }
    for (Eigen::Index k = 0; k < total; ++k)
        path.nodes[k].t = static_cast<double>(k) / static_cast<double>(total - 1);
    return path;
}

double solid_angle(const SampledPath& path) {
    double omega = 0.0;
    for (size_t k = 0; k + 1 < path.nodes.size(); ++k) {
        const auto& a = path.nodes[k];
        const auto& b = path.nodes[k + 1];
        omega += 0.5 * ((1.0 - std::cos(a.theta)) + (1.0 - std::cos(b.theta))) * (b.phi - a.phi);
    }
    return omega;
}

} // namespace uhl
