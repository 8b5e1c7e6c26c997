#pragma once
// Event-level abstraction: per-pair predicate streams, confidence-gated event
// boundary detection and construction of the event-indexed relation matrix.

#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "esec/core.hpp"
#include "esec/geometry.hpp"

namespace esec {

struct PredicateStream {
    EntityPair pair;
    int first_frame = 1;
    std::vector<RelationObservation> observations; // dense, one per frame

    int last_frame() const { return first_frame + static_cast<int>(observations.size()) - 1; }

    const RelationObservation& at_frame(int frame) const {
        const int idx = frame - first_frame;
        if (idx < 0 || idx >= static_cast<int>(observations.size()))
            throw std::out_of_range("PredicateStream: frame outside range");
        return observations[static_cast<std::size_t>(idx)];
    }
};

struct ChannelLabels {
    Contact contact = Contact::Unk;
    StaticRel static_rel = StaticRel::Unk;
    DynamicRel dynamic_rel = DynamicRel::Unk;

    bool operator==(const ChannelLabels& o) const {
        return contact == o.contact && static_rel == o.static_rel && dynamic_rel == o.dynamic_rel;
    }
};

struct ChannelConfidences {
    double contact = 0;
    double static_rel = 0;
    double dynamic_rel = 0;
};

// One event column; entries/confidences are aligned with ESecMatrix::pairs.
struct ESecColumn {
    int event_time = 1;
    std::vector<ChannelLabels> entries;
    std::vector<ChannelConfidences> confidences;

    bool same_labels(const ESecColumn& o) const {
        return entries == o.entries;
    }
};

struct ESecMatrix {
    std::vector<EntityPair> pairs; // fixed order: lexicographic by entity id
    std::vector<ESecColumn> columns;

    std::size_t pair_index(const EntityPair& p) const {
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i] == p) return i;
        throw std::out_of_range("ESecMatrix: unknown pair");
    }

    int event_count() const { return static_cast<int>(columns.size()); }
};

// ---------------------------------------------------------------------------
// Stream construction
// ---------------------------------------------------------------------------

// All ordered pairs of a track set, lexicographic by (first, second).
inline std::vector<EntityPair> ordered_pairs(const std::vector<EntityTrack>& tracks) {
    std::vector<std::string> ids;
    ids.reserve(tracks.size());
    for (const auto& t : tracks) ids.push_back(t.entity_id);
    std::sort(ids.begin(), ids.end());
    std::vector<EntityPair> pairs;
    for (const auto& a : ids)
        for (const auto& b : ids)
            if (a != b) pairs.push_back({a, b});
    return pairs;
}

// One RelationObservation per ordered pair and frame. Frames where either
// entity is undetected (or the dynamic window is not yet filled) yield UNK
// in the affected channels with confidence 0.
inline std::vector<PredicateStream> build_predicate_streams(const std::vector<EntityTrack>& tracks,
                                                            const EngineConfig& cfg) {
    if (tracks.size() < 2)
        throw std::invalid_argument("build_predicate_streams: need at least two entities");
    const auto [first_frame, last_frame] = episode_frame_range(tracks);
    const int total = last_frame - first_frame + 1;

    std::map<std::string, const EntityTrack*> by_id;
    for (const auto& t : tracks) by_id[t.entity_id] = &t;

    std::vector<PredicateStream> streams;
    for (const auto& pair : ordered_pairs(tracks)) {
        const EntityTrack* ti = by_id.at(pair.first);
        const EntityTrack* tj = by_id.at(pair.second);

        PredicateStream stream;
        stream.pair = pair;
        stream.first_frame = first_frame;
        stream.observations.resize(static_cast<std::size_t>(total));

        // per-frame contact and static
        std::vector<const FrameDetection*> di(static_cast<std::size_t>(total));
        std::vector<const FrameDetection*> dj(static_cast<std::size_t>(total));
        std::vector<Contact> contact_labels(static_cast<std::size_t>(total), Contact::Unk);

        for (int f = first_frame; f <= last_frame; ++f) {
            const std::size_t idx = static_cast<std::size_t>(f - first_frame);
            RelationObservation& obs = stream.observations[idx];
            obs.pair = pair;
            obs.frame_index = f;
            di[idx] = ti->find(f);
            dj[idx] = tj->find(f);
            if (!di[idx] || !dj[idx]) continue; // all channels stay UNK

            const auto [c, gc] = estimate_contact(*di[idx], *dj[idx], cfg);
            obs.contact = c;
            obs.contact_confidence =
                c == Contact::Unk
                    ? 0.0
                    : relation_confidence(di[idx]->detection_confidence, dj[idx]->detection_confidence, gc);

            const auto [s, gs] = estimate_static_relation(*di[idx], *dj[idx], cfg);
            obs.static_rel = s;
            obs.static_confidence =
                s == StaticRel::Unk
                    ? 0.0
                    : relation_confidence(di[idx]->detection_confidence, dj[idx]->detection_confidence, gs);
            contact_labels[idx] = c;
        }

        // dynamic channel from windows ending at each frame
        const std::size_t w = static_cast<std::size_t>(cfg.window);
        for (int f = first_frame; f <= last_frame; ++f) {
            const std::size_t idx = static_cast<std::size_t>(f - first_frame);
            if (idx + 1 < w) continue;
            bool complete = true;
            for (std::size_t k = idx + 1 - w; k <= idx; ++k)
                complete = complete && di[k] && dj[k];
            if (!complete) continue;

            std::vector<FrameDetection> hi, hj;
            hi.reserve(w);
            hj.reserve(w);
            for (std::size_t k = idx + 1 - w; k <= idx; ++k) {
                hi.push_back(*di[k]);
                hj.push_back(*dj[k]);
            }
            std::span<const Contact> ch(contact_labels.data() + (idx + 1 - w), w);
            const auto [dl, gd] = estimate_dynamic_relation(hi, hj, ch, cfg);
            RelationObservation& obs = stream.observations[idx];
            obs.dynamic_rel = dl;
            obs.dynamic_confidence =
                dl == DynamicRel::Unk
                    ? 0.0
                    : relation_confidence(di[idx]->detection_confidence, dj[idx]->detection_confidence, gd);
        }
        streams.push_back(std::move(stream));
    }
    return streams;
}

// ---------------------------------------------------------------------------
// Confidence aggregation and event detection
// ---------------------------------------------------------------------------

namespace detail {

inline double aggregate(std::vector<double>& vals, EngineConfig::Aggregation method) {
    if (vals.empty()) return 0.0;
    if (method == EngineConfig::Aggregation::Mean) {
        double s = 0;
        for (double v : vals) s += v;
        return s / static_cast<double>(vals.size());
    }
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    if (n % 2 == 1) return vals[n / 2];
    return (vals[n / 2 - 1] + vals[n / 2]) / 2.0; // even count: midpoint
}

} // namespace detail

// Per-channel aggregate of frame confidences over the window ending at
// event_time, restricted to frames whose label matches the label at
// event_time. No matching frame (UNK at the event) aggregates to 0.
// window_floor additionally clips the window: event-level confidences never
// reach back across the previous event, so a label that recurs after an
// intermediate change cannot mix confidences from the earlier segment.
inline ChannelConfidences aggregate_confidence(const PredicateStream& stream, int event_time,
                                               const EngineConfig& cfg,
                                               int window_floor = std::numeric_limits<int>::min()) {
    const RelationObservation& at = stream.at_frame(event_time);
    const int lo =
        std::max({stream.first_frame, event_time - cfg.window + 1, window_floor});

    std::vector<double> c, s, d;
    for (int f = lo; f <= event_time; ++f) {
        const RelationObservation& obs = stream.at_frame(f);
        if (at.contact != Contact::Unk && obs.contact == at.contact)
            c.push_back(obs.contact_confidence);
        if (at.static_rel != StaticRel::Unk && obs.static_rel == at.static_rel)
            s.push_back(obs.static_confidence);
        if (at.dynamic_rel != DynamicRel::Unk && obs.dynamic_rel == at.dynamic_rel)
            d.push_back(obs.dynamic_confidence);
    }
    ChannelConfidences out;
    out.contact = detail::aggregate(c, cfg.aggregation);
    out.static_rel = detail::aggregate(s, cfg.aggregation);
    out.dynamic_rel = detail::aggregate(d, cfg.aggregation);
    return out;
}

// The first frame always opens an event. Afterwards a frame is an event iff
// some pair/channel label differs from its value at the previous event and
// the aggregated confidence of the new label clears tau_event.
inline std::vector<int> detect_events(const std::vector<PredicateStream>& streams,
                                      const EngineConfig& cfg) {
    if (streams.empty()) throw std::invalid_argument("detect_events: no streams");
    const int first = streams.front().first_frame;
    const int last = streams.front().last_frame();
    for (const auto& s : streams)
        if (s.first_frame != first || s.last_frame() != last)
            throw std::invalid_argument("detect_events: streams not frame-aligned");

    std::vector<int> events{first};
    std::vector<ChannelLabels> prev(streams.size());
    for (std::size_t i = 0; i < streams.size(); ++i) {
        const auto& obs = streams[i].at_frame(first);
        prev[i] = {obs.contact, obs.static_rel, obs.dynamic_rel};
    }

    for (int f = first + 1; f <= last; ++f) {
        const int floor = events.back() + 1;
        bool fire = false;
        for (std::size_t i = 0; i < streams.size() && !fire; ++i) {
            const auto& obs = streams[i].at_frame(f);
            const ChannelConfidences agg = aggregate_confidence(streams[i], f, cfg, floor);
            if (obs.contact != prev[i].contact && agg.contact >= cfg.tau_event) fire = true;
            else if (obs.static_rel != prev[i].static_rel && agg.static_rel >= cfg.tau_event) fire = true;
            else if (obs.dynamic_rel != prev[i].dynamic_rel && agg.dynamic_rel >= cfg.tau_event) fire = true;
        }
        if (fire) {
            events.push_back(f);
            for (std::size_t i = 0; i < streams.size(); ++i) {
                const auto& obs = streams[i].at_frame(f);
                prev[i] = {obs.contact, obs.static_rel, obs.dynamic_rel};
            }
        }
    }
    return events;
}

// One column per event time; labels are sampled at the event frame and
// confidences are aggregated over the window ending there (clipped at the
// previous event). Consecutive duplicate columns are merged, keeping the
// earlier time.
inline ESecMatrix build_esec(const std::vector<PredicateStream>& streams,
                             const std::vector<int>& events, const EngineConfig& cfg) {
    if (events.empty()) throw std::invalid_argument("build_esec: no events");
    ESecMatrix m;
    for (const auto& s : streams) m.pairs.push_back(s.pair);

    for (std::size_t e = 0; e < events.size(); ++e) {
        const int t = events[e];
        const int floor = e > 0 ? events[e - 1] + 1 : std::numeric_limits<int>::min();
        ESecColumn col;
        col.event_time = t;
        col.entries.resize(streams.size());
        col.confidences.resize(streams.size());
        for (std::size_t i = 0; i < streams.size(); ++i) {
            const auto& obs = streams[i].at_frame(t);
            col.entries[i] = {obs.contact, obs.static_rel, obs.dynamic_rel};
            col.confidences[i] = aggregate_confidence(streams[i], t, cfg, floor);
        }
        if (!m.columns.empty() && m.columns.back().same_labels(col)) continue;
        m.columns.push_back(std::move(col));
    }
    return m;
}

// Piecewise-constant expansion of a matrix back to frame-level streams over
// [first_frame, last_frame]; confidences are held from the column.
inline std::vector<PredicateStream> expand_to_streams(const ESecMatrix& m, int first_frame,
                                                      int last_frame) {
    if (m.columns.empty()) throw std::invalid_argument("expand_to_streams: empty matrix");
    std::vector<PredicateStream> streams(m.pairs.size());
    for (std::size_t i = 0; i < m.pairs.size(); ++i) {
        streams[i].pair = m.pairs[i];
        streams[i].first_frame = first_frame;
        streams[i].observations.resize(static_cast<std::size_t>(last_frame - first_frame + 1));
    }
    std::size_t col = 0;
    for (int f = first_frame; f <= last_frame; ++f) {
        while (col + 1 < m.columns.size() && m.columns[col + 1].event_time <= f) ++col;
        for (std::size_t i = 0; i < m.pairs.size(); ++i) {
            RelationObservation obs;
            obs.pair = m.pairs[i];
            obs.frame_index = f;
            obs.contact = m.columns[col].entries[i].contact;
            obs.contact_confidence = m.columns[col].confidences[i].contact;
            obs.static_rel = m.columns[col].entries[i].static_rel;
            obs.static_confidence = m.columns[col].confidences[i].static_rel;
            obs.dynamic_rel = m.columns[col].entries[i].dynamic_rel;
            obs.dynamic_confidence = m.columns[col].confidences[i].dynamic_rel;
            streams[i].observations[static_cast<std::size_t>(f - first_frame)] = obs;
        }
    }
    return streams;
}

} // namespace esec
