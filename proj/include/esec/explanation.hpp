#pragma once
// Saliency over the matched precondition evidence, thresholded trace
// extraction and deterministic template verbalization.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "esec/primitives.hpp"

namespace esec {

struct TraceElement {
    int event_time = 1;
    EntityPair pair;
    Channel channel = Channel::C;
    std::string label;
    double confidence = 0.0;
    double weight = 0.0;
};

struct ExplanationTrace {
    std::string selected;
    std::vector<TraceElement> elements;
    std::string verbal;
    bool warning = false; // set when a template slot could not be resolved
    int predicted_state_event = 0;
};

struct Saliency {
    double event_weight = 0.0;                       // w_k
    std::map<std::string, double> primitive_weights; // omega_u
    std::vector<TraceElement> atom_weights;          // matched atoms with w = p
};

// Per matched atom of Pre(u*) the weight is its contributing confidence; the
// event-level weight is the mean of the matched-atom weights and the
// primitive-level weights are the sigma scores of every operator.
inline Saliency compute_saliency(const DecisionRecord& decision, const SymbolicState& state,
                                 const PrimitiveOperator& u_star) {
    Saliency s;
    s.primitive_weights = decision.scores;

    double sum = 0;
    int n = 0;
    for (const auto& am : decision.selected_detail.atoms) {
        if (!am.matched) continue;
        const PredicateAtom& atom = u_star.pre[am.atom_index];
        TraceElement el;
        el.event_time = state.event_time();
        el.pair = {am.subject, am.object};
        el.channel = atom.channel;
        el.label = to_string(atom.value);
        el.confidence = am.confidence;
        el.weight = am.confidence;
        s.atom_weights.push_back(el);
        sum += am.confidence;
        ++n;
    }
    s.event_weight = n > 0 ? sum / n : 0.0;
    return s;
}

// Matched atoms whose weight clears tau_sal, ordered by event time then pair.
inline ExplanationTrace extract_trace(const std::string& u_star, const Saliency& saliency,
                                      const SymbolicState& state, const EngineConfig& cfg) {
    (void)state;
    ExplanationTrace trace;
    trace.selected = u_star;
    for (const auto& el : saliency.atom_weights)
        if (el.weight >= cfg.tau_sal) trace.elements.push_back(el);
    std::stable_sort(trace.elements.begin(), trace.elements.end(),
                     [](const TraceElement& a, const TraceElement& b) {
                         if (a.event_time != b.event_time) return a.event_time < b.event_time;
                         return a.pair < b.pair;
                     });
    return trace;
}

namespace detail {

inline std::string entity_phrase(const SymbolicState& state, const std::string& id) {
    auto it = state.classes.find(id);
    if (it == state.classes.end()) return id;
    return it->second + " '" + id + "'";
}

inline std::optional<std::string> slot_entity(const SymbolicState& state, const std::string& slot,
                                              const std::map<std::string, std::string>& binding) {
    auto by_role = [&](Role r) -> std::optional<std::string> {
        for (const auto& [id, role] : state.roles.roles)
            if (role == r) return id;
        return std::nullopt;
    };
    if (slot == "manipulator") {
        if (auto it = binding.find("role:manipulator"); it != binding.end() && !it->second.empty())
            return it->second;
        return by_role(Role::Manipulator);
    }
    if (slot == "tool") {
        if (auto it = binding.find("role:tool"); it != binding.end() && !it->second.empty())
            return it->second;
        if (auto it = binding.find("aff:pourable"); it != binding.end() && !it->second.empty())
            return it->second;
        return by_role(Role::Tool);
    }
    if (slot == "recipient") {
        if (auto it = binding.find("aff:receiving"); it != binding.end() && !it->second.empty())
            return it->second;
        if (auto it = binding.find("aff:cuttable"); it != binding.end() && !it->second.empty())
            return it->second;
        return by_role(Role::Recipient);
    }
    if (slot == "support") {
        if (auto it = binding.find("role:support"); it != binding.end() && !it->second.empty())
            return it->second;
        return by_role(Role::Support);
    }
    if (slot == "target") {
        if (auto it = binding.find("role:unassigned"); it != binding.end() && !it->second.empty())
            return it->second;
        if (auto it = binding.find("aff:graspable"); it != binding.end() && !it->second.empty())
            return it->second;
        return std::nullopt;
    }
    return std::nullopt;
}

inline std::string format_confidence(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace detail

// Deterministic slot substitution; unresolvable slots degrade to "[unknown]"
// and set the warning flag instead of failing.
inline std::string verbalize(const PrimitiveOperator& op, ExplanationTrace& trace,
                             const SymbolicState& state,
                             const std::map<std::string, std::string>& binding) {
    if (trace.elements.empty()) {
        trace.verbal = "Selected " + op.name + " with no salient supporting evidence above threshold.";
        return trace.verbal;
    }

    std::string text;
    const std::string& tmpl = op.template_text;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{') {
            const auto end = tmpl.find('}', i);
            if (end == std::string::npos) {
                text += tmpl.substr(i);
                break;
            }
            const std::string slot = tmpl.substr(i + 1, end - i - 1);
            const auto entity = detail::slot_entity(state, slot, binding);
            if (entity) {
                text += detail::entity_phrase(state, *entity);
            } else {
                text += "[unknown]";
                trace.warning = true;
            }
            i = end + 1;
        } else {
            text += tmpl[i];
            ++i;
        }
    }

    text += ", as evidenced by ";
    for (std::size_t i = 0; i < trace.elements.size(); ++i) {
        const auto& el = trace.elements[i];
        if (i) text += "; ";
        if (el.channel == Channel::RoleChannel) {
            text += detail::entity_phrase(state, el.pair.first) + " acting as " + el.label;
        } else {
            text += detail::entity_phrase(state, el.pair.first) + " " + el.label + " " +
                    detail::entity_phrase(state, el.pair.second);
        }
        text += " (confidence " + detail::format_confidence(el.confidence) + ", event c_" +
                std::to_string(el.event_time) + ")";
    }
    text += ".";
    trace.verbal = text;
    return text;
}

// Fraction of adjacent events with the same selected primitive whose traces
// share at least one (pair, channel) element; vacuously 1 when no adjacent
// pair repeats a selection.
inline double explanation_consistency(const std::vector<ExplanationTrace>& traces) {
    if (traces.size() < 2)
        throw std::invalid_argument("explanation_consistency: need at least two events");
    int considered = 0;
    int consistent = 0;
    for (std::size_t i = 1; i < traces.size(); ++i) {
        const auto& a = traces[i - 1];
        const auto& b = traces[i];
        if (a.selected.empty() || a.selected != b.selected) continue;
        ++considered;
        bool shared = false;
        for (const auto& ea : a.elements) {
            for (const auto& eb : b.elements)
                if (ea.pair == eb.pair && ea.channel == eb.channel) {
                    shared = true;
                    break;
                }
            if (shared) break;
        }
        consistent += shared;
    }
    if (considered == 0) return 1.0;
    return static_cast<double>(consistent) / considered;
}

} // namespace esec
