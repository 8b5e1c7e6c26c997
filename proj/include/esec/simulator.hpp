#pragma once
// Synthetic episode generation from declarative manipulation scripts.
// Scripts place entities on a 640x480 canvas and drive them through phases
// (linear moves, holds, co-motion, oscillation); each frame is labeled with
// its phase's primitive as ground truth.
//
// The bundled script families are co-designed with the reference operator
// library: phase velocities are scheduled so that every event a phase emits
// carries the relational signature of that phase's primitive. Slow "onset"
// segments stay below the motion threshold to pre-charge the distance
// windows before a fast transition, which keeps the window lag of the
// dynamic channel inside the preceding phase.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "esec/core.hpp"
#include "esec/rng.hpp"

namespace esec {

struct MotionDirective {
    enum class Kind : std::uint8_t { Hold, Linear, CoMove, Oscillate } kind = Kind::Hold;
    double vx = 0, vy = 0;    // Linear: displacement per frame
    std::string with;         // CoMove: entity to follow
    char axis = 'x';          // Oscillate
    double amplitude = 0;     // Oscillate: px
    int period = 4;           // Oscillate: frames per cycle

    static MotionDirective hold() { return {}; }
    static MotionDirective linear(double vx, double vy) {
        MotionDirective m;
        m.kind = Kind::Linear;
        m.vx = vx;
        m.vy = vy;
        return m;
    }
    static MotionDirective co_move(std::string other) {
        MotionDirective m;
        m.kind = Kind::CoMove;
        m.with = std::move(other);
        return m;
    }
    static MotionDirective oscillate(char axis, double amplitude, int period) {
        MotionDirective m;
        m.kind = Kind::Oscillate;
        m.axis = axis;
        m.amplitude = amplitude;
        m.period = period;
        return m;
    }
};

struct ScriptPhase {
    std::string label; // primitive name
    int duration = 0;  // frames
    std::map<std::string, MotionDirective> motions; // entities not listed hold still
    // Velocity changes inside the phase: in-phase frame offset -> velocity.
    std::map<std::string, std::map<int, std::pair<double, double>>> velocity_schedule;
};

struct ScriptEntity {
    std::string id;
    std::string entity_class;
    Box box;
};

struct EpisodeScript {
    std::string name;
    double canvas_w = 640;
    double canvas_h = 480;
    std::vector<ScriptEntity> entities;
    std::vector<ScriptPhase> phases;
    bool deterministic = true; // false marks branch-point scripts

    int total_frames() const {
        int n = 0;
        for (const auto& p : phases) n += p.duration;
        return n;
    }

    std::vector<std::string> validate(const EngineConfig& cfg) const;
};

struct GroundTruth {
    std::vector<std::string> frame_labels; // index 0 == frame 1
    bool deterministic = true;

    const std::string& label_at(int frame) const {
        if (frame < 1 || frame > static_cast<int>(frame_labels.size()))
            throw std::out_of_range("GroundTruth: frame out of range");
        return frame_labels[static_cast<std::size_t>(frame - 1)];
    }

    struct Segment {
        std::string label;
        int first_frame = 1;
        int last_frame = 1;
    };

    std::vector<Segment> segments() const {
        std::vector<Segment> out;
        for (int f = 1; f <= static_cast<int>(frame_labels.size()); ++f) {
            const std::string& l = label_at(f);
            if (out.empty() || out.back().label != l) out.push_back({l, f, f});
            else out.back().last_frame = f;
        }
        return out;
    }
};

inline const std::vector<std::string>& primitive_vocabulary() {
    static const std::vector<std::string> v = {"approach", "grasp", "lift", "tilt",
                                               "pour", "release", "cut"};
    return v;
}

inline std::vector<std::string> EpisodeScript::validate(const EngineConfig& cfg) const {
    std::vector<std::string> problems;
    if (entities.size() < 2) problems.push_back("script needs at least two entities");
    if (phases.empty()) problems.push_back("script has no phases");
    std::map<std::string, int> ids;
    for (const auto& e : entities) {
        ++ids[e.id];
        if (!e.box.valid()) problems.push_back("entity " + e.id + " has a degenerate box");
    }
    for (const auto& [id, n] : ids)
        if (n > 1) problems.push_back("duplicate entity id " + id);
    int merged = 0; // consecutive phases with the same label act as one
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const ScriptPhase& p = phases[i];
        merged += p.duration;
        if (i + 1 >= phases.size() || phases[i + 1].label != p.label) {
            if (merged < cfg.window)
                problems.push_back("phase '" + p.label + "' shorter than the temporal window");
            merged = 0;
        }
        bool known = false;
        for (const auto& u : primitive_vocabulary()) known = known || u == p.label;
        if (!known) problems.push_back("phase label '" + p.label + "' is not a primitive");
        for (const auto& [id, m] : p.motions) {
            if (!ids.count(id)) problems.push_back("motion for unknown entity " + id);
            if (m.kind == MotionDirective::Kind::CoMove) {
                if (!ids.count(m.with)) problems.push_back("co_move with unknown entity " + m.with);
                auto it = p.motions.find(m.with);
                if (it != p.motions.end() && it->second.kind == MotionDirective::Kind::CoMove)
                    problems.push_back("chained co_move via " + m.with);
            }
            if (m.kind == MotionDirective::Kind::Oscillate && m.period < 2)
                problems.push_back("oscillation period must be >= 2");
        }
    }
    return problems;
}

// Deterministic generation: per-frame boxes from the motion directives,
// detection confidence 1.0, ground truth from phase labels. The seed is part
// of the contract but clean generation does not consume randomness.
inline std::pair<std::vector<EntityTrack>, GroundTruth>
generate_episode(const EpisodeScript& script, std::uint64_t seed, const EngineConfig& cfg = {}) {
    (void)seed;
    auto problems = script.validate(cfg);
    if (!problems.empty()) {
        std::string msg = "invalid script '" + script.name + "':";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw std::invalid_argument(msg);
    }

    std::map<std::string, Box> pos;
    std::vector<EntityTrack> tracks;
    for (const auto& e : script.entities) {
        pos[e.id] = e.box;
        EntityTrack t;
        t.entity_id = e.id;
        t.entity_class = e.entity_class;
        tracks.push_back(t);
    }
    auto track_of = [&](const std::string& id) -> EntityTrack& {
        for (auto& t : tracks)
            if (t.entity_id == id) return t;
        throw std::logic_error("unknown entity " + id);
    };

    GroundTruth gt;
    gt.deterministic = script.deterministic;

    int frame = 0;
    for (const auto& phase : script.phases) {
        for (int k = 0; k < phase.duration; ++k) {
            ++frame;
            if (frame > 1) { // frame 1 shows the initial placement
                std::map<std::string, std::pair<double, double>> delta;
                for (const auto& e : script.entities) {
                    auto it = phase.motions.find(e.id);
                    if (it == phase.motions.end()) {
                        delta[e.id] = {0, 0};
                        continue;
                    }
                    const MotionDirective& m = it->second;
                    switch (m.kind) {
                        case MotionDirective::Kind::Hold: delta[e.id] = {0, 0}; break;
                        case MotionDirective::Kind::Linear: {
                            double vx = m.vx, vy = m.vy;
                            auto sched = phase.velocity_schedule.find(e.id);
                            if (sched != phase.velocity_schedule.end()) {
                                for (const auto& [offset, v] : sched->second)
                                    if (k >= offset) {
                                        vx = v.first;
                                        vy = v.second;
                                    }
                            }
                            delta[e.id] = {vx, vy};
                            break;
                        }
                        case MotionDirective::Kind::Oscillate: {
                            // triangle wave around the phase-entry position
                            const int half = std::max(1, m.period / 2);
                            const int cycle = k % m.period;
                            const double step = 2.0 * m.amplitude / half;
                            const double d = cycle < half ? step : -step;
                            delta[e.id] = m.axis == 'x' ? std::make_pair(d, 0.0)
                                                        : std::make_pair(0.0, d);
                            break;
                        }
                        case MotionDirective::Kind::CoMove: delta[e.id] = {0, 0}; break;
                    }
                }
                for (const auto& e : script.entities) {
                    auto it = phase.motions.find(e.id);
                    if (it != phase.motions.end() && it->second.kind == MotionDirective::Kind::CoMove)
                        delta[e.id] = delta[it->second.with];
                }
                for (auto& [id, d] : delta) {
                    pos[id].x += d.first;
                    pos[id].y += d.second;
                }
            }
            for (const auto& e : script.entities) {
                const Box& b = pos[e.id];
                if (b.x < 0 || b.y < 0 || b.right() > script.canvas_w || b.bottom() > script.canvas_h)
                    throw std::invalid_argument("script '" + script.name + "': entity " + e.id +
                                                " leaves the canvas at frame " + std::to_string(frame));
                FrameDetection det;
                det.frame_index = frame;
                det.box = b;
                det.detection_confidence = 1.0;
                track_of(e.id).frames.push_back(det);
            }
            gt.frame_labels.push_back(phase.label);
        }
    }
    return {tracks, gt};
}

// ---------------------------------------------------------------------------
// Bundled script suite
// ---------------------------------------------------------------------------

namespace scripts {

constexpr double kTableTop = 430;

struct TabletopLayout {
    double target_x = 400; // left edge of the grasp target, resting on the table
    double target_w = 48, target_h = 40;
    std::string target_class = "cup";
    int approach_steps = 13; // 20 px steps before the 40 px standoff
    int grasp_hold = 8;
    double prop_x = 600;
};

inline ScriptEntity table_entity() { return {"table", "table", {0, kTableTop, 640, 50}}; }

// A flat resting block keeps the table in the support role. It is low enough
// that hands and targets read "above" it from the first frame on, so its
// relations never flip mid-episode.
inline ScriptEntity prop_entity(double x) { return {"prop", "block", {x, 418, 26, 12}}; }

// The hand hovers with its centroid at the target's centroid height so that
// "around" (not above/below) labels the grasp configuration.
inline ScriptEntity hand_for(const TabletopLayout& l) {
    const double tcy = kTableTop - l.target_h / 2;
    const double hand_x = l.target_x - 60 - 40 - 20.0 * l.approach_steps;
    return {"hand", "hand", {hand_x, tcy - 30, 60, 60}};
}

inline ScriptEntity target_for(const TabletopLayout& l) {
    return {"target", l.target_class, {l.target_x, kTableTop - l.target_h, l.target_w, l.target_h}};
}

// hand closes from the 20px/frame cruise to a 40 px standoff
inline void add_approach(EpisodeScript& s, const TabletopLayout& l) {
    ScriptPhase p;
    p.label = "approach";
    p.duration = l.approach_steps + 1;
    p.motions["hand"] = MotionDirective::linear(20, 0);
    p.velocity_schedule["hand"][l.approach_steps + 1] = {0, 0};
    s.phases.push_back(p);
}

// two fast steps close the standoff to touch, then the hand holds
inline void add_grasp(EpisodeScript& s, int hold_frames) {
    ScriptPhase p;
    p.label = "grasp";
    p.duration = 2 + hold_frames;
    p.motions["hand"] = MotionDirective::linear(20, 0);
    p.velocity_schedule["hand"][2] = {0, 0};
    s.phases.push_back(p);
}

// sub-threshold upward creep (3 px x 3); relationally still a grasp, it
// pre-charges the distance windows for the lift transition
inline void add_lift_creep(EpisodeScript& s) {
    ScriptPhase p;
    p.label = "grasp";
    p.duration = 3;
    p.motions["hand"] = MotionDirective::linear(0, -3);
    p.motions["target"] = MotionDirective::co_move("hand");
    s.phases.push_back(p);
}

inline void add_lift(EpisodeScript& s, int frames) {
    ScriptPhase p;
    p.label = "lift";
    p.duration = frames;
    p.motions["hand"] = MotionDirective::linear(0, -28);
    p.velocity_schedule["hand"][1] = {0, -20};
    p.motions["target"] = MotionDirective::co_move("hand");
    s.phases.push_back(p);
}

inline double lift_rise(int frames) { return 9 + 28 + 20.0 * (frames - 1); }

// first glide frame, still labeled lift: the vertical distance windows lag
// the turn into horizontal motion by a frame
inline void add_glide_lag(EpisodeScript& s) {
    ScriptPhase p;
    p.label = "lift";
    p.duration = 1;
    p.motions["hand"] = MotionDirective::linear(-24, 0);
    p.motions["target"] = MotionDirective::co_move("hand");
    s.phases.push_back(p);
}

// horizontal glide toward a point above the recipient: fast 24 px steps,
// easing to 12 px for the last three, ending 12 px short
inline void add_tilt(EpisodeScript& s, double dx_total) {
    const double fast_travel = dx_total - 12 - 36;
    const int fast = static_cast<int>(fast_travel / 24.0 + 0.5);
    ScriptPhase p;
    p.label = "tilt";
    p.duration = fast + 3;
    p.motions["hand"] = MotionDirective::linear(-24, 0);
    p.velocity_schedule["hand"][fast] = {-12, 0};
    p.motions["target"] = MotionDirective::co_move("hand");
    s.phases.push_back(p);
}

// covers the remaining 12 px at 3 px/frame, then hovers
inline void add_pour(EpisodeScript& s, int hover = 3) {
    ScriptPhase p;
    p.label = "pour";
    p.duration = 4 + hover;
    p.motions["hand"] = MotionDirective::linear(-3, 0);
    p.velocity_schedule["hand"][4] = {0, 0};
    p.motions["target"] = MotionDirective::co_move("hand");
    s.phases.push_back(p);
}

// one descending frame still labeled lift: the distance windows of the
// dynamic channel lag the motion by a frame at the reversal
inline void add_descent_lag(EpisodeScript& s) {
    ScriptPhase p;
    p.label = "lift";
    p.duration = 1;
    p.motions["hand"] = MotionDirective::linear(0, 20);
    p.motions["target"] = MotionDirective::co_move("hand");
    s.phases.push_back(p);
}

// straight descent back onto the support; ends one frame after touchdown
inline void add_release(EpisodeScript& s, double height) {
    const int full = static_cast<int>(height / 20.0);
    const double rest = height - 20.0 * full;
    ScriptPhase p;
    p.label = "release";
    p.duration = full + (rest > 0 ? 1 : 0) + 1;
    p.motions["hand"] = MotionDirective::linear(0, 20);
    if (rest > 0) p.velocity_schedule["hand"][full] = {0, rest};
    p.velocity_schedule["hand"][full + (rest > 0 ? 1 : 0)] = {0, 0};
    p.motions["target"] = MotionDirective::co_move("hand");
    s.phases.push_back(p);
}

} // namespace scripts

inline EpisodeScript make_pick_script(const scripts::TabletopLayout& l, const std::string& name) {
    EpisodeScript s;
    s.name = name;
    s.entities = {scripts::hand_for(l), scripts::target_for(l), scripts::table_entity(),
                  scripts::prop_entity(l.prop_x)};
    scripts::add_approach(s, l);
    scripts::add_grasp(s, l.grasp_hold);
    return s;
}

inline EpisodeScript make_lift_script(const scripts::TabletopLayout& l, const std::string& name,
                                      int lift_frames = 8) {
    EpisodeScript s = make_pick_script(l, name);
    scripts::add_lift_creep(s);
    scripts::add_lift(s, lift_frames);
    return s;
}

inline EpisodeScript make_place_script(const scripts::TabletopLayout& l, const std::string& name,
                                       int lift_frames = 8) {
    EpisodeScript s = make_lift_script(l, name, lift_frames);
    scripts::add_descent_lag(s);
    scripts::add_release(s, scripts::lift_rise(lift_frames) - 20);
    return s;
}

// The bowl is as tall as a cup so the target never reads "above" it while
// still on the table, and it sits behind the hand's start with clearance.
inline EpisodeScript make_pour_script(const scripts::TabletopLayout& l, const std::string& name,
                                      double bowl_x) {
    EpisodeScript s;
    s.name = name;
    s.entities = {scripts::hand_for(l), scripts::target_for(l), scripts::table_entity(),
                  scripts::prop_entity(l.prop_x),
                  {"bowl", "bowl", {bowl_x, 390, 48, 40}}};
    scripts::add_approach(s, l);
    scripts::add_grasp(s, l.grasp_hold);
    scripts::add_lift_creep(s);
    scripts::add_lift(s, 8);
    scripts::add_glide_lag(s);
    scripts::add_tilt(s, l.target_x - bowl_x - 24);
    scripts::add_pour(s);
    return s;
}

// Cutting scene: the hand comes from the right, grasps the knife's right
// end and slides it leftward into the cucumber, then saws. The post-grasp
// continuation is scene-ambiguous, so cut scripts are branch-point scripts.
// knife_x must leave the slide distance to the cucumber congruent to
// 17 mod 20 so that the contact step lands with a solid overlap.
inline EpisodeScript make_cut_script(double knife_x, int approach_steps, int grasp_hold,
                                     const std::string& name) {
    using namespace scripts;
    EpisodeScript s;
    s.name = name;
    s.deterministic = false;

    const double knife_w = 56, knife_h = 22;
    const double knife_right = knife_x + knife_w;
    const double kcy = kTableTop - knife_h / 2;
    const double hand_x = knife_right + 40 + 20.0 * approach_steps;
    s.entities = {{"hand", "hand", {hand_x, kcy - 30, 60, 60}},
                  {"knife", "knife", {knife_x, kTableTop - knife_h, knife_w, knife_h}},
                  {"cucumber", "cucumber", {40, kTableTop - 26, 90, 26}},
                  table_entity(), prop_entity(590)};
    {
        ScriptPhase p;
        p.label = "approach";
        p.duration = approach_steps + 1;
        p.motions["hand"] = MotionDirective::linear(-20, 0);
        s.phases.push_back(p);
    }
    {
        ScriptPhase p;
        p.label = "grasp";
        p.duration = 2 + grasp_hold;
        p.motions["hand"] = MotionDirective::linear(-20, 0);
        p.velocity_schedule["hand"][2] = {0, 0};
        s.phases.push_back(p);
    }
    {
        // slow slide onset, still grasp relationally
        ScriptPhase p;
        p.label = "grasp";
        p.duration = 3;
        p.motions["hand"] = MotionDirective::linear(-3, 0);
        p.motions["knife"] = MotionDirective::co_move("hand");
        s.phases.push_back(p);
    }
    const double cuc_right = 40 + 90;
    const double travel = (knife_x - 9) - cuc_right; // distance to knife-cucumber contact
    const int fast_approach = static_cast<int>((travel - 37) / 20.0 + 0.5);
    {
        // fast slide toward the cucumber: approaching with the tool leading
        ScriptPhase p;
        p.label = "approach";
        p.duration = fast_approach;
        p.motions["hand"] = MotionDirective::linear(-20, 0);
        p.motions["knife"] = MotionDirective::co_move("hand");
        s.phases.push_back(p);
    }
    {
        // three more fast steps run the blade into the cucumber, then saw
        ScriptPhase p;
        p.label = "cut";
        p.duration = 3;
        p.motions["hand"] = MotionDirective::linear(-20, 0);
        p.motions["knife"] = MotionDirective::co_move("hand");
        s.phases.push_back(p);
        ScriptPhase saw;
        saw.label = "cut";
        saw.duration = 8;
        saw.motions["hand"] = MotionDirective::oscillate('x', 5, 4);
        saw.motions["knife"] = MotionDirective::co_move("hand");
        s.phases.push_back(saw);
    }
    return s;
}

// At least 50 scripts covering all seven primitives, including the
// hand-knife-cucumber cutting scene.
inline std::vector<EpisodeScript> bundled_suite() {
    std::vector<EpisodeScript> suite;
    using scripts::TabletopLayout;

    struct TargetSpec {
        const char* cls;
        double w, h;
    };
    const std::vector<TargetSpec> graspables = {
        {"cup", 48, 40}, {"knife", 56, 22}, {"bottle", 40, 56}, {"spoon", 50, 16}};

    int idx = 0;
    auto layout_variant = [&](int i, const TargetSpec& t) {
        TabletopLayout l;
        l.target_class = t.cls;
        l.target_w = t.w;
        l.target_h = t.h;
        l.target_x = 384 + 8 * (i % 4);
        l.approach_steps = 11 + (i % 3);
        l.grasp_hold = 7 + (i % 3);
        return l;
    };

    for (int i = 0; i < 10; ++i) {
        const auto& g = graspables[static_cast<std::size_t>(i) % graspables.size()];
        suite.push_back(make_pick_script(layout_variant(i, g),
                                         std::string("pick_") + g.cls + "_" + std::to_string(idx++)));
    }
    for (int i = 0; i < 10; ++i) {
        const auto& g = graspables[static_cast<std::size_t>(i) % graspables.size()];
        suite.push_back(make_lift_script(layout_variant(i, g),
                                         std::string("lift_") + g.cls + "_" + std::to_string(idx++),
                                         7 + (i % 3)));
    }
    for (int i = 0; i < 10; ++i) {
        const auto& g = graspables[static_cast<std::size_t>(i) % graspables.size()];
        suite.push_back(make_place_script(layout_variant(i, g),
                                          std::string("place_") + g.cls + "_" + std::to_string(idx++),
                                          7 + (i % 2)));
    }
    for (int i = 0; i < 12; ++i) {
        const std::vector<TargetSpec> vessels = {{"cup", 48, 40}, {"bottle", 40, 56},
                                                 {"pitcher", 48, 40}};
        auto l = layout_variant(i, vessels[static_cast<std::size_t>(i) % vessels.size()]);
        // the shorter approach run keeps the hand clear of the bowl, and the
        // glide span stays a multiple of 24 plus the 48 px easing tail
        l.approach_steps = 5 + (i % 3);
        const double total_dx = 24.0 * (l.approach_steps + 4) + 48;
        const double bowl_x = l.target_x - total_dx;
        suite.push_back(make_pour_script(l, std::string("pour_") + l.target_class + "_" +
                                                std::to_string(idx++),
                                         bowl_x));
    }
    for (int i = 0; i < 10; ++i) {
        suite.push_back(make_cut_script(276 + 20 * (i % 3), 5, 7 + (i % 3),
                                        i == 0 ? "cut_hand_knife_cucumber"
                                               : "cut_variant_" + std::to_string(idx)));
        ++idx;
    }
    return suite;
}

// Random clean episode for oracle-style tests: a random family with
// jittered parameters, valid by construction.
inline EpisodeScript random_clean_script(SplitMix64& rng) {
    scripts::TabletopLayout l;
    struct TargetSpec {
        const char* cls;
        double w, h;
    };
    const std::vector<TargetSpec> graspables = {
        {"cup", 48, 40}, {"knife", 56, 22}, {"bottle", 40, 56}, {"spoon", 50, 16}};
    const auto& g = graspables[static_cast<std::size_t>(rng.next_below(graspables.size()))];
    l.target_class = g.cls;
    l.target_w = g.w;
    l.target_h = g.h;
    l.target_x = 376 + static_cast<double>(rng.next_below(7)) * 8;
    l.approach_steps = 10 + static_cast<int>(rng.next_below(4));
    l.grasp_hold = 6 + static_cast<int>(rng.next_below(4));

    const auto family = rng.next_below(5);
    const std::string name = "random_" + std::to_string(rng.next_u64() % 1000000);
    switch (family) {
        case 0: return make_pick_script(l, name);
        case 1: return make_lift_script(l, name, 7 + static_cast<int>(rng.next_below(3)));
        case 2: return make_place_script(l, name, 7 + static_cast<int>(rng.next_below(3)));
        case 3: {
            l.approach_steps = 5 + static_cast<int>(rng.next_below(3));
            const double total_dx = 24.0 * (l.approach_steps + 4) + 48;
            return make_pour_script(l, name, l.target_x - total_dx);
        }
        default:
            return make_cut_script(276 + static_cast<double>(rng.next_below(3)) * 20, 5,
                                   6 + static_cast<int>(rng.next_below(4)), name);
    }
}

} // namespace esec
