#pragma once
// Batch evaluation: event-level recognition and next-primitive accuracy,
// robustness across noise levels, ablation variants, consistency scores.

#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esec/noise.hpp"
#include "esec/pipeline.hpp"
#include "esec/simulator.hpp"

namespace esec {

struct Rate {
    int correct = 0;
    int total = 0;
    double value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

// Event-level top-1 recognition: at each event time the segment label must
// equal the ground-truth label of that frame.
inline Rate evaluate_recognition(const std::vector<PrimitiveSegment>& segments,
                                 const GroundTruth& gt, const std::vector<int>& events) {
    Rate r;
    for (int k = 1; k <= static_cast<int>(events.size()); ++k) {
        const int frame = events[static_cast<std::size_t>(k - 1)];
        const std::string& truth = gt.label_at(frame); // throws on range mismatch
        ++r.total;
        r.correct += segment_label_at(segments, k) == truth;
    }
    return r;
}

// Next-primitive top-1: scored at every event whose ground-truth segment has
// a successor; the prediction must equal the next segment's label.
inline Rate evaluate_next_primitive(const std::vector<DecisionRecord>& decisions,
                                    const GroundTruth& gt, const std::vector<int>& events) {
    const auto gt_segments = gt.segments();
    auto next_label = [&](int frame) -> std::optional<std::string> {
        for (std::size_t i = 0; i < gt_segments.size(); ++i)
            if (frame >= gt_segments[i].first_frame && frame <= gt_segments[i].last_frame)
                return i + 1 < gt_segments.size() ? std::optional<std::string>(gt_segments[i + 1].label)
                                                  : std::nullopt;
        throw std::invalid_argument("evaluate_next_primitive: event outside ground truth");
    };

    Rate r;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto expect = next_label(events[i]);
        if (!expect) continue; // terminal events excluded
        ++r.total;
        const auto& rec = decisions[i];
        r.correct += rec.predicted_next && *rec.predicted_next == *expect;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Suite evaluation
// ---------------------------------------------------------------------------

struct EpisodeOutcome {
    std::string script;
    bool deterministic = true;
    Rate recognition;
    Rate next_primitive;
    double consistency = 1.0;
    int events = 0;
};

struct VariantLevelResult {
    std::string variant;
    std::string level;
    std::vector<std::uint64_t> seeds;
    int episodes = 0;
    double top1_recognition = 0;      // mean over episodes
    double std_recognition = 0;       // sample std over per-seed means
    int recognition_events = 0;       // total denominator
    double top1_next_primitive = 0;   // branch-free scripts only
    int next_events = 0;
    double top1_next_branch = 0;      // branch-point scripts, reported separately
    int next_events_branch = 0;
    double mean_consistency = 0;
};

struct EvalReport {
    std::string suite;
    EngineConfig config;
    std::vector<VariantLevelResult> results;
};

inline EpisodeOutcome evaluate_episode(const std::vector<EntityTrack>& tracks,
                                       const GroundTruth& gt, const PrimitiveLibrary& library,
                                       const AffordanceRegistry& registry, const EngineConfig& cfg,
                                       Variant variant, const std::string& script_name) {
    EpisodeOutcome out;
    out.script = script_name;
    out.deterministic = gt.deterministic;

    PipelineResult res = run_pipeline(tracks, library, registry, cfg, variant);
    std::vector<int> events;
    events.reserve(res.matrix.columns.size());
    for (const auto& c : res.matrix.columns) events.push_back(c.event_time);

    out.events = static_cast<int>(events.size());
    out.recognition = evaluate_recognition(res.segments, gt, events);
    if (variant != Variant::NoPrimitiveReasoning) {
        out.next_primitive = evaluate_next_primitive(res.decisions, gt, events);
        out.consistency = res.traces.size() >= 2 ? explanation_consistency(res.traces) : 1.0;
    }
    return out;
}

// Runs one (variant, level) cell over the suite. Noisy levels are averaged
// over the given seeds; the clean level runs once with the first seed.
inline VariantLevelResult run_ablation(const std::vector<EpisodeScript>& suite, Variant variant,
                                       const std::string& level,
                                       const std::vector<std::uint64_t>& seeds,
                                       const PrimitiveLibrary& library,
                                       const AffordanceRegistry& registry,
                                       const EngineConfig& cfg) {
    const NoiseSpec spec = NoiseSpec::by_name(level);
    const std::vector<std::uint64_t> use_seeds =
        spec.is_clean() ? std::vector<std::uint64_t>{seeds.empty() ? 0 : seeds.front()} : seeds;

    VariantLevelResult out;
    out.variant = to_string(variant);
    out.level = level;
    out.seeds = use_seeds;

    std::vector<double> per_seed_recognition;
    double rec_sum = 0, next_sum = 0, branch_sum = 0, cons_sum = 0;
    int rec_n = 0, next_n = 0, branch_n = 0, cons_n = 0;
    int rec_events = 0, next_events = 0, branch_events = 0;

    for (std::uint64_t seed : use_seeds) {
        double seed_rec_sum = 0;
        int seed_rec_n = 0;
        // episodes are independent; evaluate in parallel, reduce in order
        std::vector<std::future<EpisodeOutcome>> futures;
        for (const auto& script : suite) {
            futures.push_back(std::async(std::launch::async | std::launch::deferred, [&, seed]() {
                auto [tracks, gt] = generate_episode(script, seed, cfg);
                auto noisy = perturb(tracks, spec, derive_seed(seed, script.name), script.canvas_w,
                                     script.canvas_h);
                return evaluate_episode(noisy, gt, library, registry, cfg, variant, script.name);
            }));
        }
        for (auto& f : futures) {
            EpisodeOutcome ep = f.get();
            rec_sum += ep.recognition.value();
            seed_rec_sum += ep.recognition.value();
            ++rec_n;
            ++seed_rec_n;
            rec_events += ep.recognition.total;
            if (ep.deterministic) {
                next_sum += ep.next_primitive.value();
                ++next_n;
                next_events += ep.next_primitive.total;
            } else {
                branch_sum += ep.next_primitive.value();
                ++branch_n;
                branch_events += ep.next_primitive.total;
            }
            cons_sum += ep.consistency;
            ++cons_n;
        }
        per_seed_recognition.push_back(seed_rec_n ? seed_rec_sum / seed_rec_n : 0.0);
    }

    out.episodes = rec_n;
    out.top1_recognition = rec_n ? rec_sum / rec_n : 0.0;
    out.recognition_events = rec_events;
    out.top1_next_primitive = next_n ? next_sum / next_n : 0.0;
    out.next_events = next_events;
    out.top1_next_branch = branch_n ? branch_sum / branch_n : 0.0;
    out.next_events_branch = branch_events;
    out.mean_consistency = cons_n ? cons_sum / cons_n : 1.0;

    if (per_seed_recognition.size() >= 2) {
        double mean = 0;
        for (double v : per_seed_recognition) mean += v;
        mean /= static_cast<double>(per_seed_recognition.size());
        double ss = 0;
        for (double v : per_seed_recognition) ss += (v - mean) * (v - mean);
        out.std_recognition = std::sqrt(ss / (static_cast<double>(per_seed_recognition.size()) - 1));
    }
    return out;
}

inline EvalReport run_evaluation(const std::vector<EpisodeScript>& suite,
                                 const std::vector<Variant>& variants,
                                 const std::vector<std::string>& levels,
                                 const std::vector<std::uint64_t>& seeds,
                                 const PrimitiveLibrary& library,
                                 const AffordanceRegistry& registry, const EngineConfig& cfg,
                                 const std::string& suite_name = "bundled") {
    EvalReport report;
    report.suite = suite_name;
    report.config = cfg;
    for (Variant v : variants)
        for (const auto& level : levels)
            report.results.push_back(run_ablation(suite, v, level, seeds, library, registry, cfg));
    return report;
}

} // namespace esec
