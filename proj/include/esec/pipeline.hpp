#pragma once
// End-to-end episode processing: detection tracks -> predicate streams ->
// event matrix -> per-event decisions, segments and explanation traces.
// Ablation variants plug in here.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esec/event_chain.hpp"
#include "esec/explanation.hpp"
#include "esec/primitives.hpp"
#include "esec/semantics.hpp"

namespace esec {

enum class Variant : std::uint8_t {
    Full,
    NoConfidence,
    NoAffordance,
    NoRoles,
    NoPrimitiveReasoning
};

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoConfidence: return "no_confidence";
        case Variant::NoAffordance: return "no_affordance";
        case Variant::NoRoles: return "no_roles";
        default: return "no_primitive_reasoning";
    }
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no_confidence") return Variant::NoConfidence;
    if (s == "no_affordance") return Variant::NoAffordance;
    if (s == "no_roles") return Variant::NoRoles;
    if (s == "no_primitive_reasoning") return Variant::NoPrimitiveReasoning;
    throw std::invalid_argument("unknown variant: " + s);
}

struct PipelineResult {
    ESecMatrix matrix;
    std::vector<DecisionRecord> decisions;  // one per event column
    std::vector<PrimitiveSegment> segments; // selection merged into segments
    std::vector<ExplanationTrace> traces;   // one per event column
    std::map<std::string, std::string> classes;
};

namespace detail {

// no_confidence: every non-UNK channel becomes fully trusted
inline void force_unit_confidences(std::vector<PredicateStream>& streams) {
    for (auto& s : streams)
        for (auto& o : s.observations) {
            o.contact_confidence = o.contact == Contact::Unk ? 0.0 : 1.0;
            o.static_confidence = o.static_rel == StaticRel::Unk ? 0.0 : 1.0;
            o.dynamic_confidence = o.dynamic_rel == DynamicRel::Unk ? 0.0 : 1.0;
        }
}

// no_primitive_reasoning: per-column argmax of the raw atom-match count,
// ignoring confidences, feasibility and the pre/post structure
inline std::vector<PrimitiveSegment>
match_count_segments(const ESecMatrix& matrix, const std::map<std::string, std::string>& classes,
                     const std::map<std::string, AffordanceVector>& affordances,
                     const PrimitiveLibrary& library, const ReasoningOptions& opt) {
    ReasoningOptions count_opt = opt;
    count_opt.unit_confidence = true;
    count_opt.beta_override = 1.0;

    std::vector<PrimitiveSegment> segments;
    for (int k = 1; k <= matrix.event_count(); ++k) {
        RoleAssignment roles = opt.disable_roles ? RoleAssignment{} : infer_roles(matrix, k, classes);
        SymbolicState state = make_state(matrix, k, roles, affordances, classes);

        std::string best;
        int best_count = -1;
        for (const auto& op : library.ops) {
            ScoreDetail d = precondition_score(op, state, count_opt);
            const int count =
                static_cast<int>(d.sigma * static_cast<double>(op.pre.size()) + 0.5);
            if (count > best_count || (count == best_count && op.name < best)) {
                best_count = count;
                best = op.name;
            }
        }
        if (!segments.empty() && segments.back().label == best) segments.back().k_end = k;
        else segments.push_back({best, k, k});
    }
    return segments;
}

} // namespace detail

inline PipelineResult run_pipeline(const std::vector<EntityTrack>& tracks,
                                   const PrimitiveLibrary& library,
                                   const AffordanceRegistry& registry, EngineConfig cfg,
                                   Variant variant = Variant::Full,
                                   const std::map<std::string, double>& priors = {}) {
    ReasoningOptions opt;
    switch (variant) {
        case Variant::NoConfidence: cfg.tau_event = 0.0; break;
        case Variant::NoAffordance: opt.beta_override = 1.0; break;
        case Variant::NoRoles: opt.disable_roles = true; break;
        default: break;
    }

    std::map<std::string, std::string> classes;
    std::map<std::string, AffordanceVector> affordances;
    for (const auto& t : tracks) {
        classes[t.entity_id] = t.entity_class;
        affordances[t.entity_id] = assign_affordances(t.entity_class, registry);
    }

    auto streams = build_predicate_streams(tracks, cfg);
    if (variant == Variant::NoConfidence) detail::force_unit_confidences(streams);
    const auto events = detect_events(streams, cfg);

    PipelineResult result;
    result.classes = classes;
    result.matrix = build_esec(streams, events, cfg);

    if (variant == Variant::NoPrimitiveReasoning) {
        result.segments =
            detail::match_count_segments(result.matrix, classes, affordances, library, opt);
        return result;
    }

    result.segments = segment_primitives(result.matrix, classes, affordances, library, priors, cfg, opt);
    for (int k = 1; k <= result.matrix.event_count(); ++k) {
        RoleAssignment roles =
            opt.disable_roles ? RoleAssignment{} : infer_roles(result.matrix, k, classes);
        SymbolicState state = make_state(result.matrix, k, roles, affordances, classes);
        DecisionRecord rec = decide(state, library, priors, cfg, opt);
        ExplanationTrace trace;
        if (rec.selected) {
            const PrimitiveOperator* op = library.find(*rec.selected);
            Saliency sal = compute_saliency(rec, state, *op);
            trace = extract_trace(*rec.selected, sal, state, cfg);
            verbalize(*op, trace, state, rec.binding);
            trace.predicted_state_event = state.event_time();
        }
        result.decisions.push_back(std::move(rec));
        result.traces.push_back(std::move(trace));
    }
    return result;
}

} // namespace esec
