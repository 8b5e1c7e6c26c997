#pragma once
// Deterministic frame-level relation estimation. Every operation returns a
// (label, support) pair where support in [0,1] measures how well the selected
// relation's geometric criterion is satisfied. A criterion only applies when
// its support is positive, so non-UNK labels always carry positive confidence.

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>

#include "esec/core.hpp"

namespace esec {

using SupportScore = double;

namespace detail {
inline double clamp01(double v) { return v < 0 ? 0 : (v > 1 ? 1 : v); }

inline void require_valid(const FrameDetection& d, const char* who) {
    if (!d.box.valid()) throw std::invalid_argument(std::string(who) + ": degenerate box");
}
} // namespace detail

// |region_i ∩ region_j| / |region_i|, from masks when both are present,
// otherwise from the boxes. Errors on a zero-area inner region.
inline double containment_ratio(const FrameDetection& inner, const FrameDetection& outer) {
    if (inner.mask && outer.mask && inner.mask->width == outer.mask->width &&
        inner.mask->height == outer.mask->height) {
        const Mask& mi = *inner.mask;
        const Mask& mj = *outer.mask;
        double both = 0, mine = 0;
        for (std::size_t k = 0; k < mi.data.size(); ++k) {
            const bool a = mi.data[k] != 0;
            mine += a;
            both += (a && mj.data[k] != 0);
        }
        if (mine == 0) throw std::invalid_argument("containment_ratio: empty inner mask");
        return both / mine;
    }
    detail::require_valid(inner, "containment_ratio");
    detail::require_valid(outer, "containment_ratio");
    return intersection_area(inner.box, outer.box) / inner.box.area();
}

// Static spatial relation with priority inside > on > above > below > around.
// A rule counts as satisfied only when its support is positive; if nothing
// is sufficiently supported the pair is (UNK, 0).
inline std::pair<StaticRel, SupportScore>
estimate_static_relation(const FrameDetection& det_i, const FrameDetection& det_j,
                         const EngineConfig& cfg) {
    detail::require_valid(det_i, "estimate_static_relation");
    detail::require_valid(det_j, "estimate_static_relation");

    const Box& bi = det_i.box;
    const Box& bj = det_j.box;
    const double mean_h = (bi.h + bj.h) / 2.0;
    const double vy_tol = cfg.delta_y * mean_h;

    // inside
    {
        const double ratio = containment_ratio(det_i, det_j);
        if (ratio >= cfg.tau_inside && ratio > 0) return {StaticRel::Inside, detail::clamp01(ratio)};
    }
    // on: horizontal projections overlap and i's bottom sits near j's top
    {
        const double ox = std::min(bi.right(), bj.right()) - std::max(bi.x, bj.x);
        const double vgap = std::abs(bi.bottom() - bj.y);
        if (ox > 0 && vgap <= vy_tol) {
            const double frac = ox / std::min(bi.w, bj.w);
            const double closeness = vy_tol > 0 ? 1.0 - vgap / vy_tol : 1.0;
            const double support = detail::clamp01(frac) * detail::clamp01(closeness);
            if (support > 0) return {StaticRel::On, support};
        }
    }
    // above / below by centroid vertical separation (y grows downward)
    {
        const auto [xi, yi] = det_i.centroid();
        const auto [xj, yj] = det_j.centroid();
        (void)xi;
        (void)xj;
        const double sep = yj - yi; // positive when i is higher
        if (std::abs(sep) >= vy_tol && vy_tol > 0) {
            const double support = std::min(1.0, std::abs(sep) / (2.0 * vy_tol));
            if (support > 0) return {sep > 0 ? StaticRel::Above : StaticRel::Below, support};
        }
    }
    // around: overlap or close adjacency
    {
        const double gap = box_gap(bi, bj).norm();
        if (gap <= cfg.adjacency_margin) {
            const double support = detail::clamp01(1.0 - gap / cfg.adjacency_margin);
            if (support > 0) return {StaticRel::Around, support};
        }
    }
    return {StaticRel::Unk, 0.0};
}

// Contact: T on sufficient overlap or near-touch, N on clear separation,
// UNK when either detection is too unreliable or the gap is ambiguous.
inline std::pair<Contact, SupportScore>
estimate_contact(const FrameDetection& det_i, const FrameDetection& det_j,
                 const EngineConfig& cfg) {
    detail::require_valid(det_i, "estimate_contact");
    detail::require_valid(det_j, "estimate_contact");

    if (det_i.detection_confidence < 0.1 || det_j.detection_confidence < 0.1)
        return {Contact::Unk, 0.0};

    const double inter = intersection_area(det_i.box, det_j.box);
    const double smaller = std::min(det_i.box.area(), det_j.box.area());
    const double overlap = smaller > 0 ? inter / smaller : 0.0;
    const double gap = box_gap(det_i.box, det_j.box).norm();

    if (overlap >= cfg.contact_overlap || gap <= cfg.adjacency_margin / 2.0) {
        const double support = overlap > 0
                                   ? std::min(1.0, overlap / cfg.contact_overlap)
                                   : detail::clamp01(1.0 - gap / cfg.adjacency_margin);
        if (support > 0) return {Contact::T, support};
    }
    if (gap > cfg.adjacency_margin) return {Contact::N, std::min(1.0, gap / cfg.adjacency_margin)};
    return {Contact::Unk, 0.0};
}

namespace detail {

// Inter-object distance used by the dynamic rules: the norm of the per-axis
// extent separation, normalized by the image diagonal. Zero while boxes
// touch or overlap, so motion parallel to an extended surface (sliding along
// a table) reads as "stable" rather than a spurious distance trend.
inline double gap_distance(const FrameDetection& a, const FrameDetection& b, double diag) {
    return box_gap(a.box, b.box).norm() / diag;
}

// Per-window path length of the centroid, normalized by the diagonal.
// Path length (not net displacement) so oscillatory motion counts as motion.
inline double window_path(std::span<const FrameDetection> hist, std::size_t from, std::size_t to,
                          double diag, double full_span) {
    double path = 0;
    for (std::size_t k = from + 1; k <= to; ++k) {
        const auto [x0, y0] = hist[k - 1].centroid();
        const auto [x1, y1] = hist[k].centroid();
        path += std::hypot(x1 - x0, y1 - y0);
    }
    const double span = static_cast<double>(to - from);
    return span > 0 ? (path / diag) * (full_span / span) : 0.0;
}

} // namespace detail

// Dynamic spatial relation over an aligned window of detections for both
// entities plus the contact labels across the same window. Rules are checked
// in a fixed order: co-motion labels first, then distance trends.
inline std::pair<DynamicRel, SupportScore>
estimate_dynamic_relation(std::span<const FrameDetection> history_i,
                          std::span<const FrameDetection> history_j,
                          std::span<const Contact> contact_history,
                          const EngineConfig& cfg) {
    const std::size_t w = static_cast<std::size_t>(cfg.window);
    if (history_i.size() < w || history_j.size() < w || contact_history.size() < w)
        throw std::invalid_argument("estimate_dynamic_relation: window shorter than cfg.window");

    const double diag = cfg.diagonal();
    const double eps = cfg.epsilon_motion;
    const std::size_t last = w - 1;
    const double full_span = static_cast<double>(last);

    for (std::size_t k = 0; k < w; ++k) {
        detail::require_valid(history_i[k], "estimate_dynamic_relation");
        detail::require_valid(history_j[k], "estimate_dynamic_relation");
    }

    const double speed_i = detail::window_path(history_i, 0, last, diag, full_span);
    const double speed_j = detail::window_path(history_j, 0, last, diag, full_span);

    const auto [ix0, iy0] = history_i[0].centroid();
    const auto [ix1, iy1] = history_i[last].centroid();
    const auto [jx0, jy0] = history_j[0].centroid();
    const auto [jx1, jy1] = history_j[last].centroid();
    const double vix = (ix1 - ix0) / diag, viy = (iy1 - iy0) / diag;
    const double vjx = (jx1 - jx0) / diag, vjy = (jy1 - jy0) / diag;

    // distances at every checkpoint
    std::vector<double> d(w);
    for (std::size_t k = 0; k < w; ++k)
        d[k] = detail::gap_distance(history_i[k], history_j[k], diag);
    const double total_change = d[last] - d[0];

    // fixed_moving_together: sustained contact, both moving, rigid co-motion
    {
        bool contact_all = true;
        for (std::size_t k = 0; k < w; ++k) contact_all = contact_all && contact_history[k] == Contact::T;
        const double rel_disp =
            std::hypot((ix1 - jx1) - (ix0 - jx0), (iy1 - jy1) - (iy0 - jy0)) / diag;
        if (contact_all && speed_i > eps && speed_j > eps && rel_disp <= eps)
            return {DynamicRel::FixedMovingTogether, detail::clamp01(1.0 - rel_disp / (2.0 * eps))};
    }
    // moving_together: coherent direction, distance roughly constant
    {
        const double ni = std::hypot(vix, viy), nj = std::hypot(vjx, vjy);
        if (speed_i > eps && speed_j > eps && ni > 0 && nj > 0) {
            const double cosang = (vix * vjx + viy * vjy) / (ni * nj);
            if (cosang >= 0.9 && std::abs(total_change) <= eps)
                return {DynamicRel::MovingTogether,
                        detail::clamp01(1.0 - std::abs(total_change) / (2.0 * eps))};
        }
    }
    // halting_together: both moved in the first half, both still in the last
    {
        const std::size_t mid = last / 2;
        const double si_first = detail::window_path(history_i, 0, mid, diag, full_span);
        const double sj_first = detail::window_path(history_j, 0, mid, diag, full_span);
        const double si_last = detail::window_path(history_i, mid, last, diag, full_span);
        const double sj_last = detail::window_path(history_j, mid, last, diag, full_span);
        if (si_first > eps && sj_first > eps && si_last <= eps && sj_last <= eps)
            return {DynamicRel::HaltingTogether,
                    detail::clamp01(1.0 - std::max(si_last, sj_last) / (2.0 * eps))};
    }
    // getting_close / moving_apart: near-monotone trend with one tolerated slip
    {
        std::size_t down_breaks = 0, up_breaks = 0;
        for (std::size_t k = 1; k < w; ++k) {
            if (d[k] >= d[k - 1]) ++down_breaks;
            if (d[k] <= d[k - 1]) ++up_breaks;
        }
        const double trend_support = detail::clamp01(std::abs(total_change) / (full_span * eps));
        if (total_change <= -eps && down_breaks <= 1) return {DynamicRel::GettingClose, trend_support};
        if (total_change >= eps && up_breaks <= 1) return {DynamicRel::MovingApart, trend_support};
    }
    // stable
    if (std::abs(total_change) < eps)
        return {DynamicRel::Stable, detail::clamp01(1.0 - std::abs(total_change) / (2.0 * eps))};

    return {DynamicRel::Unk, 0.0};
}

// p = min(s_i, s_j) * support, identical for all three channels.
inline double relation_confidence(double s_i, double s_j, SupportScore support) {
    if (s_i < 0 || s_i > 1 || s_j < 0 || s_j > 1 || support < 0 || support > 1)
        throw std::invalid_argument("relation_confidence: inputs must lie in [0,1]");
    return std::min(s_i, s_j) * support;
}

} // namespace esec
