#pragma once
// Shared domain types: relation vocabularies, detections, entity tracks,
// per-frame relation observations and the engine configuration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace esec {

// ---------------------------------------------------------------------------
// Relation vocabularies
// ---------------------------------------------------------------------------

enum class Contact : std::uint8_t { T, N, Unk };

enum class StaticRel : std::uint8_t { Inside, On, Above, Below, Around, Unk };

enum class DynamicRel : std::uint8_t {
    GettingClose,
    MovingApart,
    Stable,
    HaltingTogether,
    MovingTogether,
    FixedMovingTogether,
    Unk
};

inline const char* to_string(Contact c) {
    switch (c) {
        case Contact::T: return "T";
        case Contact::N: return "N";
        default: return "UNK";
    }
}

inline const char* to_string(StaticRel s) {
    switch (s) {
        case StaticRel::Inside: return "inside";
        case StaticRel::On: return "on";
        case StaticRel::Above: return "above";
        case StaticRel::Below: return "below";
        case StaticRel::Around: return "around";
        default: return "UNK";
    }
}

inline const char* to_string(DynamicRel d) {
    switch (d) {
        case DynamicRel::GettingClose: return "getting_close";
        case DynamicRel::MovingApart: return "moving_apart";
        case DynamicRel::Stable: return "stable";
        case DynamicRel::HaltingTogether: return "halting_together";
        case DynamicRel::MovingTogether: return "moving_together";
        case DynamicRel::FixedMovingTogether: return "fixed_moving_together";
        default: return "UNK";
    }
}

inline Contact contact_from_string(const std::string& s) {
    if (s == "T") return Contact::T;
    if (s == "N") return Contact::N;
    if (s == "UNK") return Contact::Unk;
    throw std::invalid_argument("unknown contact label: " + s);
}

inline StaticRel static_from_string(const std::string& s) {
    if (s == "inside") return StaticRel::Inside;
    if (s == "on") return StaticRel::On;
    if (s == "above") return StaticRel::Above;
    if (s == "below") return StaticRel::Below;
    if (s == "around") return StaticRel::Around;
    if (s == "UNK") return StaticRel::Unk;
    throw std::invalid_argument("unknown static label: " + s);
}

inline DynamicRel dynamic_from_string(const std::string& s) {
    if (s == "getting_close") return DynamicRel::GettingClose;
    if (s == "moving_apart") return DynamicRel::MovingApart;
    if (s == "stable") return DynamicRel::Stable;
    if (s == "halting_together") return DynamicRel::HaltingTogether;
    if (s == "moving_together") return DynamicRel::MovingTogether;
    if (s == "fixed_moving_together") return DynamicRel::FixedMovingTogether;
    if (s == "UNK") return DynamicRel::Unk;
    throw std::invalid_argument("unknown dynamic label: " + s);
}

// Strict priority used when several static criteria hold at once:
// inside > on > above > below > around.
inline int static_priority(StaticRel s) {
    switch (s) {
        case StaticRel::Inside: return 5;
        case StaticRel::On: return 4;
        case StaticRel::Above: return 3;
        case StaticRel::Below: return 2;
        case StaticRel::Around: return 1;
        default: return 0;
    }
}

// ---------------------------------------------------------------------------
// Geometry primitives
// ---------------------------------------------------------------------------

// Axis-aligned pixel rectangle, y grows downward.
struct Box {
    double x = 0;
    double y = 0;
    double w = 0;
    double h = 0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }
    bool valid() const { return w > 0 && h > 0; }
};

inline double intersection_area(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    return ix * iy;
}

// Per-axis separation between box extents; (0,0) when boxes touch or overlap.
struct GapVector {
    double gx = 0;
    double gy = 0;
    double norm() const { return std::hypot(gx, gy); }
};

inline GapVector box_gap(const Box& a, const Box& b) {
    GapVector g;
    g.gx = std::max(0.0, std::max(a.x, b.x) - std::min(a.right(), b.right()));
    g.gy = std::max(0.0, std::max(a.y, b.y) - std::min(a.bottom(), b.bottom()));
    return g;
}

// Binary raster at image resolution; data is row-major, one byte per pixel.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }

    double area() const {
        double n = 0;
        for (auto v : data) n += (v != 0);
        return n;
    }

    // Tight bounding rectangle of the set pixels; zero box when empty.
    Box bounding_box() const {
        int x0 = width, y0 = height, x1 = -1, y1 = -1;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                if (at(x, y)) {
                    x0 = std::min(x0, x);
                    y0 = std::min(y0, y);
                    x1 = std::max(x1, x);
                    y1 = std::max(y1, y);
                }
        if (x1 < 0) return {};
        return {static_cast<double>(x0), static_cast<double>(y0),
                static_cast<double>(x1 - x0 + 1), static_cast<double>(y1 - y0 + 1)};
    }

    std::pair<double, double> centroid() const {
        double sx = 0, sy = 0, n = 0;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                if (at(x, y)) {
                    sx += x + 0.5;
                    sy += y + 0.5;
                    n += 1;
                }
        if (n == 0) return {0, 0};
        return {sx / n, sy / n};
    }
};

// ---------------------------------------------------------------------------
// Detections and tracks
// ---------------------------------------------------------------------------

struct FrameDetection {
    int frame_index = 1;
    Box box;
    std::optional<Mask> mask;
    double detection_confidence = 1.0;

    // Mask centroid when a mask is present, box center otherwise.
    std::pair<double, double> centroid() const {
        if (mask && mask->area() > 0) return mask->centroid();
        return {box.cx(), box.cy()};
    }
};

struct EntityTrack {
    std::string entity_id;
    std::string entity_class;
    std::vector<FrameDetection> frames;

    const FrameDetection* find(int frame_index) const {
        auto it = std::lower_bound(frames.begin(), frames.end(), frame_index,
                                   [](const FrameDetection& d, int f) { return d.frame_index < f; });
        if (it == frames.end() || it->frame_index != frame_index) return nullptr;
        return &*it;
    }
};

// ---------------------------------------------------------------------------
// Per-frame relation observation
// ---------------------------------------------------------------------------

using EntityPair = std::pair<std::string, std::string>;

struct RelationObservation {
    EntityPair pair;
    int frame_index = 1;
    Contact contact = Contact::Unk;
    double contact_confidence = 0.0;
    StaticRel static_rel = StaticRel::Unk;
    double static_confidence = 0.0;
    DynamicRel dynamic_rel = DynamicRel::Unk;
    double dynamic_confidence = 0.0;
};

// ---------------------------------------------------------------------------
// Engine configuration
// ---------------------------------------------------------------------------

struct EngineConfig {
    double tau_inside = 0.8;       // containment ratio threshold
    double delta_y = 0.25;         // vertical tolerance, fraction of mean box height
    double contact_overlap = 0.05; // normalized overlap threshold for contact
    double adjacency_margin = 10;  // pixel margin for "around" closeness
    int window = 5;                // temporal window length in frames
    double epsilon_motion = 0.02;  // per-window motion threshold, fraction of image diagonal
    double tau_event = 0.5;        // event confidence threshold
    // Feasibility must stay reachable when detector confidence is degraded:
    // sigma is bounded by min(s_i, s_j) times the geometric support, so the
    // threshold sits below what a well-matched precondition can still reach
    // once detections are scaled to half confidence and jittered.
    double tau_feas = 0.15;
    double tau_sal = 0.5;          // saliency threshold
    double gamma = 0.0;            // prior weight
    int lookahead_depth = 0;
    enum class Aggregation { Median, Mean } aggregation = Aggregation::Median;

    // Canvas size, used only to normalize pixel distances by the image diagonal.
    double canvas_width = 640;
    double canvas_height = 480;

    double diagonal() const { return std::hypot(canvas_width, canvas_height); }

    void validate() const {
        auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!in01(tau_inside) || !in01(contact_overlap) || !in01(epsilon_motion) ||
            !in01(tau_event) || !in01(tau_feas) || !in01(tau_sal) || !in01(delta_y))
            throw std::invalid_argument("EngineConfig: threshold out of [0,1]");
        if (window < 2) throw std::invalid_argument("EngineConfig: window must be >= 2");
        if (lookahead_depth < 0 || lookahead_depth > 3)
            throw std::invalid_argument("EngineConfig: lookahead_depth must be in [0,3]");
        if (adjacency_margin < 0) throw std::invalid_argument("EngineConfig: adjacency_margin < 0");
        if (canvas_width <= 0 || canvas_height <= 0)
            throw std::invalid_argument("EngineConfig: canvas must be positive");
        if (gamma < 0) throw std::invalid_argument("EngineConfig: gamma must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// Episode validation
// ---------------------------------------------------------------------------

struct ValidationIssue {
    std::string entity_id;
    std::string message;
};

// A hole in a track's frame coverage, treated as occlusion (not a violation).
struct OcclusionInterval {
    std::string entity_id;
    int first_frame = 0;
    int last_frame = 0;
};

struct ValidationReport {
    std::vector<ValidationIssue> violations;
    std::vector<OcclusionInterval> occlusions;
    bool ok() const { return violations.empty(); }
};

// Checks track/detection invariants and that all tracks cover the same frame
// range. Gaps inside the range are reported as occlusion intervals only.
inline ValidationReport validate_episode(const std::vector<EntityTrack>& tracks) {
    ValidationReport report;
    auto add = [&](const std::string& id, std::string msg) {
        report.violations.push_back({id, std::move(msg)});
    };

    std::map<std::string, int> id_count;
    for (const auto& t : tracks) ++id_count[t.entity_id];
    for (const auto& [id, n] : id_count)
        if (n > 1) add(id, "entity_id appears in " + std::to_string(n) + " tracks");

    int range_min = 0, range_max = 0;
    bool range_set = false;

    for (const auto& t : tracks) {
        if (t.frames.empty()) {
            add(t.entity_id, "track has no frames");
            continue;
        }
        int prev = 0;
        bool first = true;
        for (const auto& d : t.frames) {
            if (d.frame_index < 1)
                add(t.entity_id, "frame_index " + std::to_string(d.frame_index) + " < 1");
            if (!first && d.frame_index <= prev)
                add(t.entity_id, "frames not strictly increasing at index " + std::to_string(d.frame_index));
            prev = d.frame_index;
            first = false;
            if (!d.box.valid())
                add(t.entity_id, "degenerate box at frame " + std::to_string(d.frame_index));
            if (d.detection_confidence < 0.0 || d.detection_confidence > 1.0)
                add(t.entity_id, "detection_confidence out of [0,1] at frame " + std::to_string(d.frame_index));
            if (d.mask) {
                const Box mb = d.mask->bounding_box();
                if (mb.valid()) {
                    const double tol = 2.0;
                    if (mb.x < d.box.x - tol || mb.y < d.box.y - tol ||
                        mb.right() > d.box.right() + tol || mb.bottom() > d.box.bottom() + tol)
                        add(t.entity_id, "mask extends outside box at frame " + std::to_string(d.frame_index));
                }
            }
        }
        const int lo = t.frames.front().frame_index;
        const int hi = t.frames.back().frame_index;
        if (!range_set) {
            range_min = lo;
            range_max = hi;
            range_set = true;
        } else if (lo != range_min || hi != range_max) {
            add(t.entity_id, "frame range [" + std::to_string(lo) + "," + std::to_string(hi) +
                                 "] differs from episode range [" + std::to_string(range_min) + "," +
                                 std::to_string(range_max) + "]");
        }
        // gaps => occlusion intervals
        for (std::size_t i = 1; i < t.frames.size(); ++i) {
            const int a = t.frames[i - 1].frame_index;
            const int b = t.frames[i].frame_index;
            if (b > a + 1) report.occlusions.push_back({t.entity_id, a + 1, b - 1});
        }
    }
    return report;
}

// Common frame range of an episode ([first, last] over all tracks).
inline std::pair<int, int> episode_frame_range(const std::vector<EntityTrack>& tracks) {
    int lo = 0, hi = -1;
    bool set = false;
    for (const auto& t : tracks) {
        if (t.frames.empty()) continue;
        const int a = t.frames.front().frame_index;
        const int b = t.frames.back().frame_index;
        if (!set) {
            lo = a;
            hi = b;
            set = true;
        } else {
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
    }
    if (!set) throw std::invalid_argument("episode has no frames");
    return {lo, hi};
}

} // namespace esec
