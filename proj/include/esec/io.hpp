#pragma once
// File formats: detection-stream JSONL, engine config, eSEC matrix JSON,
// primitive library, affordance registry, scripts, ground truth, noise
// specs, decision records and evaluation reports.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "esec/eval.hpp"
#include "esec/explanation.hpp"
#include "esec/noise.hpp"
#include "esec/pipeline.hpp"
#include "esec/simulator.hpp"

namespace esec {

using json = nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace io {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

// ---------------------------------------------------------------------------
// Masks: run-length string "width height n0 n1 n2 ...", runs alternating
// zero/one and starting with a zero run, row-major.
// ---------------------------------------------------------------------------

inline std::string encode_mask_rle(const Mask& m) {
    std::ostringstream ss;
    ss << m.width << " " << m.height;
    std::size_t i = 0;
    const std::size_t n = m.data.size();
    bool value = false;
    while (i < n) {
        std::size_t run = 0;
        while (i + run < n && (m.data[i + run] != 0) == value) ++run;
        ss << " " << run;
        i += run;
        value = !value;
    }
    return ss.str();
}

inline Mask decode_mask_rle(const std::string& s) {
    std::istringstream ss(s);
    Mask m;
    if (!(ss >> m.width >> m.height) || m.width <= 0 || m.height <= 0)
        throw IoError("bad mask_rle header");
    m.data.assign(static_cast<std::size_t>(m.width) * m.height, 0);
    std::size_t i = 0;
    bool value = false;
    long long run = 0;
    while (ss >> run) {
        if (run < 0 || i + static_cast<std::size_t>(run) > m.data.size())
            throw IoError("mask_rle overruns the raster");
        if (value)
            for (long long k = 0; k < run; ++k) m.data[i + static_cast<std::size_t>(k)] = 1;
        i += static_cast<std::size_t>(run);
        value = !value;
    }
    if (i != m.data.size()) throw IoError("mask_rle does not cover the raster");
    return m;
}

// ---------------------------------------------------------------------------
// Detection streams: JSON Lines, one record per (frame, entity):
// {"frame": int, "id": str, "class": str, "box": [x,y,w,h], "conf": float,
//  "mask_rle": optional str}
// ---------------------------------------------------------------------------

inline std::string tracks_to_jsonl(const std::vector<EntityTrack>& tracks) {
    std::vector<const EntityTrack*> ordered;
    for (const auto& t : tracks) ordered.push_back(&t);
    std::sort(ordered.begin(), ordered.end(),
              [](const EntityTrack* a, const EntityTrack* b) { return a->entity_id < b->entity_id; });

    std::map<int, std::vector<json>> by_frame;
    for (const EntityTrack* t : ordered)
        for (const auto& d : t->frames) {
            json rec;
            rec["frame"] = d.frame_index;
            rec["id"] = t->entity_id;
            rec["class"] = t->entity_class;
            rec["box"] = {d.box.x, d.box.y, d.box.w, d.box.h};
            rec["conf"] = d.detection_confidence;
            if (d.mask) rec["mask_rle"] = encode_mask_rle(*d.mask);
            by_frame[d.frame_index].push_back(std::move(rec));
        }
    std::string out;
    for (const auto& [frame, recs] : by_frame) {
        (void)frame;
        for (const auto& r : recs) {
            out += r.dump();
            out += '\n';
        }
    }
    return out;
}

inline std::vector<EntityTrack> tracks_from_jsonl(const std::string& text) {
    std::map<std::string, EntityTrack> by_id;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!rec.contains("frame") || !rec.contains("id") || !rec.contains("box") ||
            !rec.contains("conf"))
            throw IoError("line " + std::to_string(lineno) + ": missing required field");
        FrameDetection d;
        d.frame_index = rec.at("frame").get<int>();
        const auto& b = rec.at("box");
        if (!b.is_array() || b.size() != 4)
            throw IoError("line " + std::to_string(lineno) + ": box must be [x,y,w,h]");
        d.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
        d.detection_confidence = rec.at("conf").get<double>();
        if (rec.contains("mask_rle") && !rec.at("mask_rle").is_null())
            d.mask = decode_mask_rle(rec.at("mask_rle").get<std::string>());
        const std::string id = rec.at("id").get<std::string>();
        EntityTrack& t = by_id[id];
        t.entity_id = id;
        if (rec.contains("class")) t.entity_class = rec.at("class").get<std::string>();
        t.frames.push_back(std::move(d));
    }
    std::vector<EntityTrack> out;
    for (auto& [id, t] : by_id) {
        (void)id;
        std::sort(t.frames.begin(), t.frames.end(),
                  [](const FrameDetection& a, const FrameDetection& b) {
                      return a.frame_index < b.frame_index;
                  });
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Engine config: flat key/value JSON mirroring the field names
// ---------------------------------------------------------------------------

inline json config_to_json(const EngineConfig& cfg) {
    json j;
    j["tau_inside"] = cfg.tau_inside;
    j["delta_y"] = cfg.delta_y;
    j["contact_overlap"] = cfg.contact_overlap;
    j["adjacency_margin"] = cfg.adjacency_margin;
    j["window"] = cfg.window;
    j["epsilon_motion"] = cfg.epsilon_motion;
    j["tau_event"] = cfg.tau_event;
    j["tau_feas"] = cfg.tau_feas;
    j["tau_sal"] = cfg.tau_sal;
    j["gamma"] = cfg.gamma;
    j["lookahead_depth"] = cfg.lookahead_depth;
    j["aggregation"] = cfg.aggregation == EngineConfig::Aggregation::Median ? "median" : "mean";
    j["canvas_width"] = cfg.canvas_width;
    j["canvas_height"] = cfg.canvas_height;
    return j;
}

inline EngineConfig config_from_json(const json& j) {
    EngineConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("tau_inside", cfg.tau_inside);
    get("delta_y", cfg.delta_y);
    get("contact_overlap", cfg.contact_overlap);
    get("adjacency_margin", cfg.adjacency_margin);
    get("window", cfg.window);
    get("epsilon_motion", cfg.epsilon_motion);
    get("tau_event", cfg.tau_event);
    get("tau_feas", cfg.tau_feas);
    get("tau_sal", cfg.tau_sal);
    get("gamma", cfg.gamma);
    get("lookahead_depth", cfg.lookahead_depth);
    get("canvas_width", cfg.canvas_width);
    get("canvas_height", cfg.canvas_height);
    if (j.contains("aggregation")) {
        const std::string a = j.at("aggregation").get<std::string>();
        if (a == "median") cfg.aggregation = EngineConfig::Aggregation::Median;
        else if (a == "mean") cfg.aggregation = EngineConfig::Aggregation::Mean;
        else throw IoError("unknown aggregation: " + a);
    }
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// eSEC matrix JSON (the `extract` output)
// ---------------------------------------------------------------------------

inline json matrix_to_json(const ESecMatrix& m, const std::map<std::string, std::string>& classes) {
    json j;
    j["pairs"] = json::array();
    for (const auto& p : m.pairs) j["pairs"].push_back({p.first, p.second});
    j["entities"] = json::array();
    for (const auto& [id, cls] : classes) j["entities"].push_back({{"id", id}, {"class", cls}});
    j["events"] = json::array();
    for (const auto& c : m.columns) j["events"].push_back(c.event_time);
    j["columns"] = json::array();
    for (const auto& c : m.columns) {
        json col;
        col["t"] = c.event_time;
        col["labels"] = json::array();
        col["conf"] = json::array();
        for (std::size_t i = 0; i < c.entries.size(); ++i) {
            col["labels"].push_back({to_string(c.entries[i].contact),
                                     to_string(c.entries[i].static_rel),
                                     to_string(c.entries[i].dynamic_rel)});
            col["conf"].push_back({c.confidences[i].contact, c.confidences[i].static_rel,
                                   c.confidences[i].dynamic_rel});
        }
        j["columns"].push_back(std::move(col));
    }
    return j;
}

inline std::pair<ESecMatrix, std::map<std::string, std::string>> matrix_from_json(const json& j) {
    ESecMatrix m;
    std::map<std::string, std::string> classes;
    for (const auto& p : j.at("pairs"))
        m.pairs.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
    if (j.contains("entities"))
        for (const auto& e : j.at("entities"))
            classes[e.at("id").get<std::string>()] = e.at("class").get<std::string>();
    for (const auto& col : j.at("columns")) {
        ESecColumn c;
        c.event_time = col.at("t").get<int>();
        for (const auto& l : col.at("labels")) {
            ChannelLabels e;
            e.contact = contact_from_string(l.at(0).get<std::string>());
            e.static_rel = static_from_string(l.at(1).get<std::string>());
            e.dynamic_rel = dynamic_from_string(l.at(2).get<std::string>());
            c.entries.push_back(e);
        }
        for (const auto& l : col.at("conf")) {
            ChannelConfidences e;
            e.contact = l.at(0).get<double>();
            e.static_rel = l.at(1).get<double>();
            e.dynamic_rel = l.at(2).get<double>();
            c.confidences.push_back(e);
        }
        if (c.entries.size() != m.pairs.size() || c.confidences.size() != m.pairs.size())
            throw IoError("matrix column does not cover every pair");
        m.columns.push_back(std::move(c));
    }
    return {std::move(m), std::move(classes)};
}

// ---------------------------------------------------------------------------
// Primitive library
// ---------------------------------------------------------------------------

inline json atom_to_json(const PredicateAtom& a) {
    json j;
    j["channel"] = to_string(a.channel);
    j["subject"] = a.subject.key();
    if (a.channel != Channel::RoleChannel) j["object"] = a.object.key();
    j["value"] = to_string(a.value);
    return j;
}

inline PredicateAtom atom_from_json(const json& j) {
    PredicateAtom a;
    const std::string ch = j.at("channel").get<std::string>();
    a.subject = selector_from_string(j.at("subject").get<std::string>());
    const std::string value = j.at("value").get<std::string>();
    if (ch == "C") {
        a.channel = Channel::C;
        a.value = contact_from_string(value);
    } else if (ch == "S") {
        a.channel = Channel::S;
        a.value = static_from_string(value);
    } else if (ch == "D") {
        a.channel = Channel::D;
        a.value = dynamic_from_string(value);
    } else if (ch == "role") {
        a.channel = Channel::RoleChannel;
        a.value = role_from_string(value);
    } else {
        throw IoError("unknown channel: " + ch);
    }
    if (a.channel != Channel::RoleChannel)
        a.object = selector_from_string(j.at("object").get<std::string>());
    return a;
}

inline json library_to_json(const PrimitiveLibrary& lib) {
    json j;
    j["primitives"] = json::array();
    for (const auto& op : lib.ops) {
        json o;
        o["name"] = op.name;
        o["roles"] = json::array();
        for (Role r : op.role_config) o["roles"].push_back(to_string(r));
        o["pre"] = json::array();
        for (const auto& a : op.pre) o["pre"].push_back(atom_to_json(a));
        o["post"] = json::array();
        for (const auto& a : op.post) o["post"].push_back(atom_to_json(a));
        o["bias"] = json::array();
        for (const auto& b : op.bias)
            o["bias"].push_back({{"target", b.target.key()},
                                 {"affordance",
                                  affordance_names()[static_cast<std::size_t>(b.required)]}});
        o["beta"] = op.beta;
        o["template"] = op.template_text;
        j["primitives"].push_back(std::move(o));
    }
    return j;
}

inline PrimitiveLibrary library_from_json(const json& j) {
    PrimitiveLibrary lib;
    for (const auto& o : j.at("primitives")) {
        PrimitiveOperator op;
        op.name = o.at("name").get<std::string>();
        if (o.contains("roles"))
            for (const auto& r : o.at("roles")) op.role_config.push_back(role_from_string(r));
        for (const auto& a : o.at("pre")) op.pre.push_back(atom_from_json(a));
        if (o.contains("post"))
            for (const auto& a : o.at("post")) op.post.push_back(atom_from_json(a));
        if (o.contains("bias"))
            for (const auto& b : o.at("bias"))
                op.bias.push_back({selector_from_string(b.at("target").get<std::string>()),
                                   affordance_from_string(b.at("affordance").get<std::string>())});
        if (o.contains("beta")) op.beta = o.at("beta").get<double>();
        if (o.contains("template")) op.template_text = o.at("template").get<std::string>();
        lib.ops.push_back(std::move(op));
    }
    lib.validate();
    return lib;
}

// ---------------------------------------------------------------------------
// Affordance registry: class -> [affordance names]
// ---------------------------------------------------------------------------

inline json registry_to_json(const AffordanceRegistry& r) {
    json j;
    for (const auto& [cls, v] : r.class_map) {
        json names = json::array();
        for (std::size_t i = 0; i < kAffordanceCount; ++i)
            if (v.bits[i]) names.push_back(affordance_names()[i]);
        j[cls] = std::move(names);
    }
    return j;
}

inline AffordanceRegistry registry_from_json(const json& j) {
    AffordanceRegistry r;
    for (auto it = j.begin(); it != j.end(); ++it) {
        AffordanceVector v;
        for (const auto& name : it.value()) v.set(affordance_from_string(name.get<std::string>()));
        r.class_map[it.key()] = v;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Scripts and ground truth
// ---------------------------------------------------------------------------

inline json script_to_json(const EpisodeScript& s) {
    json j;
    j["name"] = s.name;
    j["canvas"] = {s.canvas_w, s.canvas_h};
    j["deterministic"] = s.deterministic;
    j["entities"] = json::array();
    for (const auto& e : s.entities)
        j["entities"].push_back({{"id", e.id},
                                 {"class", e.entity_class},
                                 {"box", {e.box.x, e.box.y, e.box.w, e.box.h}}});
    j["phases"] = json::array();
    for (const auto& p : s.phases) {
        json ph;
        ph["label"] = p.label;
        ph["duration"] = p.duration;
        ph["motions"] = json::object();
        for (const auto& [id, m] : p.motions) {
            json mj;
            switch (m.kind) {
                case MotionDirective::Kind::Hold: mj["kind"] = "hold"; break;
                case MotionDirective::Kind::Linear:
                    mj["kind"] = "linear";
                    mj["velocity"] = {m.vx, m.vy};
                    break;
                case MotionDirective::Kind::CoMove:
                    mj["kind"] = "co_move";
                    mj["with"] = m.with;
                    break;
                case MotionDirective::Kind::Oscillate:
                    mj["kind"] = "oscillate";
                    mj["axis"] = std::string(1, m.axis);
                    mj["amplitude"] = m.amplitude;
                    mj["period"] = m.period;
                    break;
            }
            ph["motions"][id] = std::move(mj);
        }
        if (!p.velocity_schedule.empty()) {
            json sched = json::object();
            for (const auto& [id, entries] : p.velocity_schedule) {
                json se = json::array();
                for (const auto& [offset, v] : entries)
                    se.push_back({{"at", offset}, {"velocity", {v.first, v.second}}});
                sched[id] = std::move(se);
            }
            ph["velocity_schedule"] = std::move(sched);
        }
        j["phases"].push_back(std::move(ph));
    }
    return j;
}

inline EpisodeScript script_from_json(const json& j) {
    EpisodeScript s;
    s.name = j.at("name").get<std::string>();
    if (j.contains("canvas")) {
        s.canvas_w = j.at("canvas").at(0).get<double>();
        s.canvas_h = j.at("canvas").at(1).get<double>();
    }
    if (j.contains("deterministic")) s.deterministic = j.at("deterministic").get<bool>();
    for (const auto& e : j.at("entities")) {
        const auto& b = e.at("box");
        s.entities.push_back({e.at("id").get<std::string>(), e.at("class").get<std::string>(),
                              {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                               b.at(3).get<double>()}});
    }
    for (const auto& ph : j.at("phases")) {
        ScriptPhase p;
        p.label = ph.at("label").get<std::string>();
        p.duration = ph.at("duration").get<int>();
        if (ph.contains("motions"))
            for (auto it = ph.at("motions").begin(); it != ph.at("motions").end(); ++it) {
                const json& mj = it.value();
                const std::string kind = mj.at("kind").get<std::string>();
                MotionDirective m;
                if (kind == "hold") m = MotionDirective::hold();
                else if (kind == "linear")
                    m = MotionDirective::linear(mj.at("velocity").at(0).get<double>(),
                                                mj.at("velocity").at(1).get<double>());
                else if (kind == "co_move") m = MotionDirective::co_move(mj.at("with").get<std::string>());
                else if (kind == "oscillate")
                    m = MotionDirective::oscillate(mj.at("axis").get<std::string>().at(0),
                                                   mj.at("amplitude").get<double>(),
                                                   mj.at("period").get<int>());
                else throw IoError("unknown motion kind: " + kind);
                p.motions[it.key()] = std::move(m);
            }
        if (ph.contains("velocity_schedule"))
            for (auto it = ph.at("velocity_schedule").begin(); it != ph.at("velocity_schedule").end();
                 ++it)
                for (const auto& se : it.value())
                    p.velocity_schedule[it.key()][se.at("at").get<int>()] = {
                        se.at("velocity").at(0).get<double>(), se.at("velocity").at(1).get<double>()};
        s.phases.push_back(std::move(p));
    }
    return s;
}

inline json ground_truth_to_json(const GroundTruth& gt) {
    json j;
    j["frames"] = gt.frame_labels.size();
    j["deterministic"] = gt.deterministic;
    j["labels"] = gt.frame_labels;
    j["phases"] = json::array();
    for (const auto& seg : gt.segments())
        j["phases"].push_back(
            {{"label", seg.label}, {"start", seg.first_frame}, {"end", seg.last_frame}});
    return j;
}

inline GroundTruth ground_truth_from_json(const json& j) {
    GroundTruth gt;
    gt.frame_labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("deterministic")) gt.deterministic = j.at("deterministic").get<bool>();
    return gt;
}

// ---------------------------------------------------------------------------
// Noise spec
// ---------------------------------------------------------------------------

inline json noise_spec_to_json(const NoiseSpec& s) {
    return {{"dropout_prob", s.dropout_prob},
            {"jitter_sigma", s.jitter_sigma},
            {"conf_scale", s.conf_scale},
            {"level_name", s.level_name}};
}

inline NoiseSpec noise_spec_from_json(const json& j) {
    NoiseSpec s;
    if (j.contains("dropout_prob")) s.dropout_prob = j.at("dropout_prob").get<double>();
    if (j.contains("jitter_sigma")) s.jitter_sigma = j.at("jitter_sigma").get<double>();
    if (j.contains("conf_scale")) s.conf_scale = j.at("conf_scale").get<double>();
    if (j.contains("level_name")) s.level_name = j.at("level_name").get<std::string>();
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Decision records (the `reason` JSONL output, one record per event)
// ---------------------------------------------------------------------------

inline json trace_to_json(const ExplanationTrace& t) {
    json j;
    j["selected"] = t.selected;
    j["elements"] = json::array();
    for (const auto& el : t.elements)
        j["elements"].push_back({{"t", el.event_time},
                                 {"pair", {el.pair.first, el.pair.second}},
                                 {"channel", to_string(el.channel)},
                                 {"label", el.label},
                                 {"confidence", el.confidence},
                                 {"weight", el.weight}});
    j["verbal"] = t.verbal;
    j["warning"] = t.warning;
    return j;
}

inline json decision_to_json(const DecisionRecord& rec, const ExplanationTrace* trace = nullptr) {
    json j;
    j["t"] = rec.event_time;
    j["scores"] = rec.scores;
    j["feasible"] = rec.feasible;
    j["selected"] = rec.selected ? json(*rec.selected) : json(nullptr);
    j["predicted_next"] = rec.predicted_next ? json(*rec.predicted_next) : json(nullptr);
    j["event_saliency"] = rec.event_saliency;
    j["primitive_saliency"] = rec.primitive_saliency;
    if (!rec.binding.empty()) j["binding"] = rec.binding;
    if (trace) j["trace"] = trace_to_json(*trace);
    return j;
}

// ---------------------------------------------------------------------------
// Evaluation report
// ---------------------------------------------------------------------------

inline json report_to_json(const EvalReport& r) {
    json j;
    j["suite"] = r.suite;
    j["config"] = config_to_json(r.config);
    j["results"] = json::array();
    for (const auto& cell : r.results) {
        json c;
        c["variant"] = cell.variant;
        c["level"] = cell.level;
        c["seeds"] = cell.seeds;
        c["episodes"] = cell.episodes;
        c["top1_recognition"] = cell.top1_recognition;
        c["std_recognition"] = cell.std_recognition;
        c["recognition_events"] = cell.recognition_events;
        c["top1_next_primitive"] = cell.top1_next_primitive;
        c["next_events"] = cell.next_events;
        c["top1_next_branch"] = cell.top1_next_branch;
        c["next_events_branch"] = cell.next_events_branch;
        c["mean_consistency"] = cell.mean_consistency;
        j["results"].push_back(std::move(c));
    }
    return j;
}

// Schema check used by tests and by consumers of report.json.
inline void validate_report_json(const json& j) {
    if (!j.is_object() || !j.contains("suite") || !j.contains("config") || !j.contains("results"))
        throw IoError("report: missing suite/config/results");
    if (!j.at("results").is_array()) throw IoError("report: results must be an array");
    for (const auto& c : j.at("results")) {
        for (const char* key :
             {"variant", "level", "seeds", "episodes", "top1_recognition", "recognition_events",
              "top1_next_primitive", "next_events", "mean_consistency"})
            if (!c.contains(key)) throw IoError(std::string("report: result missing ") + key);
        for (const char* key : {"top1_recognition", "top1_next_primitive", "mean_consistency"}) {
            const double v = c.at(key).get<double>();
            if (v < 0.0 || v > 1.0) throw IoError(std::string("report: ") + key + " out of [0,1]");
        }
        if (c.at("episodes").get<int>() <= 0) throw IoError("report: episodes must be positive");
    }
}

} // namespace io
} // namespace esec
