#pragma once
// Perception-noise harness: per-detection dropout, uniform box jitter and
// multiplicative confidence degradation at named severity levels.

#include <stdexcept>
#include <string>
#include <vector>

#include "esec/core.hpp"
#include "esec/rng.hpp"

namespace esec {

struct NoiseSpec {
    double dropout_prob = 0.0; // per (frame, entity) removal probability
    double jitter_sigma = 0.0; // corner displacement scale, fraction of box size
    double conf_scale = 1.0;   // multiplicative detection-confidence factor
    std::string level_name = "clean";

    void validate() const {
        if (dropout_prob < 0 || dropout_prob > 1)
            throw std::invalid_argument("NoiseSpec: dropout_prob out of [0,1]");
        if (jitter_sigma < 0) throw std::invalid_argument("NoiseSpec: jitter_sigma < 0");
        if (conf_scale <= 0 || conf_scale > 1)
            throw std::invalid_argument("NoiseSpec: conf_scale out of (0,1]");
    }

    bool is_clean() const { return dropout_prob == 0 && jitter_sigma == 0 && conf_scale == 1; }

    static NoiseSpec clean() { return {}; }
    static NoiseSpec low() { return {0.05, 0.05, 0.9, "low"}; }
    static NoiseSpec medium() { return {0.15, 0.10, 0.7, "medium"}; }
    static NoiseSpec high() { return {0.30, 0.20, 0.5, "high"}; }

    static NoiseSpec by_name(const std::string& name) {
        if (name == "clean") return clean();
        if (name == "low") return low();
        if (name == "medium") return medium();
        if (name == "high") return high();
        throw std::invalid_argument("unknown noise level: " + name);
    }
};

inline const std::vector<std::string>& noise_level_names() {
    static const std::vector<std::string> v = {"clean", "low", "medium", "high"};
    return v;
}

// Independently per (frame, entity): drop the detection, jitter each box
// corner uniformly within jitter_sigma * box size, and scale the detection
// confidence. Deterministic given (tracks, spec, seed).
inline std::vector<EntityTrack> perturb(const std::vector<EntityTrack>& tracks,
                                        const NoiseSpec& spec, std::uint64_t seed,
                                        double canvas_w = 640, double canvas_h = 480) {
    spec.validate();
    if (spec.is_clean()) return tracks;

    std::vector<EntityTrack> out;
    out.reserve(tracks.size());
    for (const auto& track : tracks) {
        SplitMix64 rng(derive_seed(seed, track.entity_id));
        EntityTrack t;
        t.entity_id = track.entity_id;
        t.entity_class = track.entity_class;
        for (const auto& det : track.frames) {
            if (rng.bernoulli(spec.dropout_prob)) continue;
            FrameDetection d = det;
            if (spec.jitter_sigma > 0) {
                const double sx = spec.jitter_sigma * det.box.w;
                const double sy = spec.jitter_sigma * det.box.h;
                double x0 = det.box.x + rng.uniform(-sx, sx);
                double y0 = det.box.y + rng.uniform(-sy, sy);
                double x1 = det.box.right() + rng.uniform(-sx, sx);
                double y1 = det.box.bottom() + rng.uniform(-sy, sy);
                if (x1 < x0) std::swap(x0, x1);
                if (y1 < y0) std::swap(y0, y1);
                x0 = std::max(0.0, std::min(x0, canvas_w - 2));
                y0 = std::max(0.0, std::min(y0, canvas_h - 2));
                x1 = std::max(x0 + 2, std::min(x1, canvas_w));
                y1 = std::max(y0 + 2, std::min(y1, canvas_h));
                d.box = {x0, y0, x1 - x0, y1 - y0};
            }
            d.detection_confidence = det.detection_confidence * spec.conf_scale;
            t.frames.push_back(d);
        }
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace esec
