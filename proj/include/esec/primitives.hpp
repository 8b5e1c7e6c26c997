#pragma once
// Primitive operators with precondition/postcondition atoms, confidence-aware
// scoring, feasibility filtering, selection, postcondition rollout and episode
// segmentation into primitive sequences.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "esec/event_chain.hpp"
#include "esec/semantics.hpp"

namespace esec {

// ---------------------------------------------------------------------------
// Atoms and operators
// ---------------------------------------------------------------------------

enum class Channel : std::uint8_t { C, S, D, RoleChannel };

inline const char* to_string(Channel c) {
    switch (c) {
        case Channel::C: return "C";
        case Channel::S: return "S";
        case Channel::D: return "D";
        default: return "role";
    }
}

// Entity selector: a concrete id, a role, or an affordance requirement.
// Selectors with equal keys denote the same variable within one operator.
struct Selector {
    enum class Kind : std::uint8_t { EntityId, Role, Affordance } kind = Kind::EntityId;
    std::string entity_id;
    Role role = Role::Unassigned;
    Affordance affordance = Affordance::Graspable;

    static Selector id(std::string eid) {
        Selector s;
        s.kind = Kind::EntityId;
        s.entity_id = std::move(eid);
        return s;
    }
    static Selector by_role(Role r) {
        Selector s;
        s.kind = Kind::Role;
        s.role = r;
        return s;
    }
    static Selector by_affordance(Affordance a) {
        Selector s;
        s.kind = Kind::Affordance;
        s.affordance = a;
        return s;
    }

    std::string key() const {
        switch (kind) {
            case Kind::EntityId: return "id:" + entity_id;
            case Kind::Role: return std::string("role:") + to_string(role);
            default:
                return std::string("aff:") +
                       affordance_names()[static_cast<std::size_t>(affordance)];
        }
    }
};

inline Selector selector_from_string(const std::string& s) {
    if (s.rfind("id:", 0) == 0) return Selector::id(s.substr(3));
    if (s.rfind("role:", 0) == 0) return Selector::by_role(role_from_string(s.substr(5)));
    if (s.rfind("aff:", 0) == 0)
        return Selector::by_affordance(affordance_from_string(s.substr(4)));
    throw std::invalid_argument("bad selector: " + s);
}

using LabelValue = std::variant<Contact, StaticRel, DynamicRel, Role>;

inline std::string to_string(const LabelValue& v) {
    if (std::holds_alternative<Contact>(v)) return to_string(std::get<Contact>(v));
    if (std::holds_alternative<StaticRel>(v)) return to_string(std::get<StaticRel>(v));
    if (std::holds_alternative<DynamicRel>(v)) return to_string(std::get<DynamicRel>(v));
    return to_string(std::get<Role>(v));
}

struct PredicateAtom {
    Channel channel = Channel::C;
    Selector subject;
    Selector object; // ignored for role-channel atoms
    LabelValue value = Contact::T;
};

struct AffordanceBias {
    Selector target;
    Affordance required = Affordance::Graspable;
};

struct PrimitiveOperator {
    std::string name;
    std::vector<Role> role_config; // roles that must be present in the state
    std::vector<PredicateAtom> pre;
    std::vector<PredicateAtom> post;
    std::vector<AffordanceBias> bias;
    double beta = 0.8; // bias weight; 1.0 disables the affordance bias
    std::string template_text;
};

struct PrimitiveLibrary {
    std::vector<PrimitiveOperator> ops;

    const PrimitiveOperator* find(const std::string& name) const {
        for (const auto& op : ops)
            if (op.name == name) return &op;
        return nullptr;
    }

    void validate() const {
        std::set<std::string> names;
        for (const auto& op : ops) {
            if (op.name.empty()) throw std::invalid_argument("library: operator without name");
            if (!names.insert(op.name).second)
                throw std::invalid_argument("library: duplicate operator name " + op.name);
            if (op.pre.empty())
                throw std::invalid_argument("library: " + op.name + " has empty preconditions");
            if (op.beta < 0 || op.beta > 1)
                throw std::invalid_argument("library: " + op.name + " beta out of [0,1]");
            for (const auto& atom : op.post) {
                if (atom.channel == Channel::RoleChannel)
                    throw std::invalid_argument("library: " + op.name +
                                                " postcondition must assign vocabulary labels");
                const bool ok =
                    (atom.channel == Channel::C && std::holds_alternative<Contact>(atom.value) &&
                     std::get<Contact>(atom.value) != Contact::Unk) ||
                    (atom.channel == Channel::S && std::holds_alternative<StaticRel>(atom.value) &&
                     std::get<StaticRel>(atom.value) != StaticRel::Unk) ||
                    (atom.channel == Channel::D && std::holds_alternative<DynamicRel>(atom.value) &&
                     std::get<DynamicRel>(atom.value) != DynamicRel::Unk);
                if (!ok)
                    throw std::invalid_argument("library: " + op.name +
                                                " postcondition label/channel mismatch");
            }
            for (const auto& atom : op.pre) {
                const bool ok =
                    (atom.channel == Channel::C && std::holds_alternative<Contact>(atom.value)) ||
                    (atom.channel == Channel::S && std::holds_alternative<StaticRel>(atom.value)) ||
                    (atom.channel == Channel::D && std::holds_alternative<DynamicRel>(atom.value)) ||
                    (atom.channel == Channel::RoleChannel && std::holds_alternative<Role>(atom.value));
                if (!ok)
                    throw std::invalid_argument("library: " + op.name +
                                                " precondition label/channel mismatch");
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Symbolic state
// ---------------------------------------------------------------------------

struct SymbolicState {
    ESecColumn column;
    std::vector<EntityPair> pairs;
    RoleAssignment roles;
    std::map<std::string, AffordanceVector> affordances;
    std::map<std::string, std::string> classes;

    int event_time() const { return column.event_time; }

    const ChannelLabels* entry(const std::string& a, const std::string& b) const {
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i].first == a && pairs[i].second == b) return &column.entries[i];
        return nullptr;
    }

    // stable key over the label content, used to detect revisited states
    std::string label_key() const {
        std::string k;
        for (const auto& e : column.entries) {
            k += to_string(e.contact);
            k += '|';
            k += to_string(e.static_rel);
            k += '|';
            k += to_string(e.dynamic_rel);
            k += ';';
        }
        return k;
    }
};

inline SymbolicState make_state(const ESecMatrix& matrix, int k, const RoleAssignment& roles,
                                const std::map<std::string, AffordanceVector>& affordances,
                                const std::map<std::string, std::string>& classes) {
    if (k < 1 || k > matrix.event_count())
        throw std::out_of_range("make_state: column index out of range");
    SymbolicState s;
    s.column = matrix.columns[static_cast<std::size_t>(k - 1)];
    s.pairs = matrix.pairs;
    s.roles = roles;
    s.affordances = affordances;
    s.classes = classes;
    return s;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct ReasoningOptions {
    bool disable_roles = false;   // role selectors resolve by entity class instead
    double beta_override = -1.0;  // >= 0 replaces each operator's beta (1 = no bias)
    bool unit_confidence = false; // matched atoms count 1 regardless of confidence
};

struct AtomMatch {
    std::size_t atom_index = 0;
    std::string subject;
    std::string object;
    bool matched = false;
    double confidence = 0.0;
};

struct ScoreDetail {
    double sigma = 0.0;
    std::map<std::string, std::string> binding; // selector key -> entity id
    std::vector<AtomMatch> atoms;
    bool bias_satisfied = true;
};

namespace detail {

inline std::vector<std::string> resolve_selector(const Selector& sel, const SymbolicState& state,
                                                 const ReasoningOptions& opt) {
    std::vector<std::string> out;
    switch (sel.kind) {
        case Selector::Kind::EntityId:
            if (state.classes.count(sel.entity_id)) out.push_back(sel.entity_id);
            break;
        case Selector::Kind::Affordance:
            for (const auto& [id, v] : state.affordances)
                if (v.has(sel.affordance)) out.push_back(id);
            break;
        case Selector::Kind::Role:
            if (!opt.disable_roles) {
                for (const auto& [id, cls] : state.classes) {
                    (void)cls;
                    if (state.roles.of(id) == sel.role) out.push_back(id);
                }
            } else {
                // class fallback: manipulator and support have canonical
                // classes; tool and recipient are interaction-defined and
                // resolve to nothing without role inference
                for (const auto& [id, cls] : state.classes) {
                    bool take = false;
                    switch (sel.role) {
                        case Role::Manipulator: take = cls == "hand"; break;
                        case Role::Support: take = cls == "table"; break;
                        case Role::Tool:
                        case Role::Recipient: take = false; break;
                        case Role::Unassigned: take = cls != "hand" && cls != "table"; break;
                    }
                    if (take) out.push_back(id);
                }
            }
            break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Roles are crisp assignments without their own confidence channel; a role
// assertion is trusted only as far as the subject is observable, taken as
// the strongest relation confidence among the subject's pairs.
inline double role_observability(const SymbolicState& state, const std::string& subj) {
    double best = 0.0;
    for (std::size_t i = 0; i < state.pairs.size(); ++i) {
        if (state.pairs[i].first != subj && state.pairs[i].second != subj) continue;
        const ChannelConfidences& c = state.column.confidences[i];
        best = std::max({best, c.contact, c.static_rel, c.dynamic_rel});
    }
    return best;
}

inline double atom_score(const PredicateAtom& atom, const SymbolicState& state,
                         const std::string& subj, const std::string& obj, AtomMatch& match) {
    match.subject = subj;
    match.object = obj;
    match.matched = false;
    match.confidence = 0.0;
    if (subj.empty()) return 0.0;

    if (atom.channel == Channel::RoleChannel) {
        if (state.roles.of(subj) == std::get<Role>(atom.value)) {
            match.matched = true;
            match.confidence = role_observability(state, subj);
            return match.confidence;
        }
        return 0.0;
    }
    if (obj.empty() || obj == subj) return 0.0;

    std::size_t idx = state.pairs.size();
    for (std::size_t i = 0; i < state.pairs.size(); ++i)
        if (state.pairs[i].first == subj && state.pairs[i].second == obj) {
            idx = i;
            break;
        }
    if (idx == state.pairs.size()) return 0.0;

    const ChannelLabels& e = state.column.entries[idx];
    const ChannelConfidences& c = state.column.confidences[idx];
    switch (atom.channel) {
        case Channel::C:
            if (e.contact != Contact::Unk && e.contact == std::get<Contact>(atom.value)) {
                match.matched = true;
                match.confidence = c.contact;
            }
            break;
        case Channel::S:
            if (e.static_rel != StaticRel::Unk && e.static_rel == std::get<StaticRel>(atom.value)) {
                match.matched = true;
                match.confidence = c.static_rel;
            }
            break;
        case Channel::D:
            if (e.dynamic_rel != DynamicRel::Unk &&
                e.dynamic_rel == std::get<DynamicRel>(atom.value)) {
                match.matched = true;
                match.confidence = c.dynamic_rel;
            }
            break;
        default: break;
    }
    return match.matched ? match.confidence : 0.0;
}

} // namespace detail

// Confidence-aware precondition satisfaction. Selector variables are grounded
// jointly: all atoms sharing a selector bind to the same entity, the best
// grounding wins, and an unresolvable selector contributes 0 through its
// atoms. The affordance bias multiplies the score by beta + (1-beta)*sat.
inline ScoreDetail precondition_score(const PrimitiveOperator& op, const SymbolicState& state,
                                      const ReasoningOptions& opt = {}) {
    if (op.pre.empty()) throw std::invalid_argument("precondition_score: empty preconditions");

    for (Role r : op.role_config) {
        bool present = false;
        for (const auto& [id, role] : state.roles.roles) {
            (void)id;
            present = present || role == r;
        }
        if (!opt.disable_roles && !present) return {};
    }

    // collect selector variables in deterministic order
    std::vector<std::string> keys;
    std::vector<Selector> selectors;
    auto add_sel = [&](const Selector& s) {
        const std::string k = s.key();
        for (const auto& existing : keys)
            if (existing == k) return;
        keys.push_back(k);
        selectors.push_back(s);
    };
    for (const auto& atom : op.pre) {
        add_sel(atom.subject);
        if (atom.channel != Channel::RoleChannel) add_sel(atom.object);
    }
    for (const auto& b : op.bias) add_sel(b.target);

    std::vector<std::vector<std::string>> candidates(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        candidates[i] = detail::resolve_selector(selectors[i], state, opt);
        if (candidates[i].empty()) candidates[i].push_back(std::string()); // unbound sentinel
    }

    const double beta = opt.beta_override >= 0 ? opt.beta_override : op.beta;

    ScoreDetail best;
    bool have = false;
    std::vector<std::size_t> pick(keys.size(), 0);
    while (true) {
        std::map<std::string, std::string> binding;
        for (std::size_t i = 0; i < keys.size(); ++i) binding[keys[i]] = candidates[i][pick[i]];

        double sum = 0;
        std::vector<AtomMatch> atoms(op.pre.size());
        for (std::size_t a = 0; a < op.pre.size(); ++a) {
            const auto& atom = op.pre[a];
            atoms[a].atom_index = a;
            const std::string& subj = binding[atom.subject.key()];
            const std::string obj =
                atom.channel == Channel::RoleChannel ? std::string() : binding[atom.object.key()];
            double v = detail::atom_score(atom, state, subj, obj, atoms[a]);
            if (opt.unit_confidence && atoms[a].matched) {
                v = 1.0;
                atoms[a].confidence = 1.0;
            }
            sum += v;
        }
        double sigma = sum / static_cast<double>(op.pre.size());

        bool sat = true;
        for (const auto& b : op.bias) {
            const std::string& id = binding[b.target.key()];
            sat = sat && !id.empty() && state.affordances.count(id) &&
                  state.affordances.at(id).has(b.required);
        }
        sigma *= beta + (1.0 - beta) * (sat ? 1.0 : 0.0);

        if (!have || sigma > best.sigma + 1e-12) {
            best.sigma = sigma;
            best.binding = binding;
            best.atoms = atoms;
            best.bias_satisfied = sat;
            have = true;
        }

        // advance cartesian product
        std::size_t i = 0;
        for (; i < keys.size(); ++i) {
            if (++pick[i] < candidates[i].size()) break;
            pick[i] = 0;
        }
        if (i == keys.size()) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Feasibility, selection, postconditions
// ---------------------------------------------------------------------------

struct ScoredPrimitive {
    std::string name;
    ScoreDetail detail;
};

inline std::vector<ScoredPrimitive> feasible_set(const PrimitiveLibrary& library,
                                                 const SymbolicState& state,
                                                 const EngineConfig& cfg,
                                                 const ReasoningOptions& opt = {}) {
    std::vector<ScoredPrimitive> out;
    for (const auto& op : library.ops) {
        ScoreDetail d = precondition_score(op, state, opt);
        if (d.sigma >= cfg.tau_feas) out.push_back({op.name, std::move(d)});
    }
    return out;
}

// argmax of sigma + gamma * prior over the feasible set; deterministic
// lexicographic tie-break on the primitive name.
inline std::optional<std::string> select_primitive(const std::vector<ScoredPrimitive>& feasible,
                                                   const std::map<std::string, double>& priors,
                                                   double gamma) {
    if (gamma < 0) throw std::invalid_argument("select_primitive: gamma must be >= 0");
    std::optional<std::string> winner;
    double best = 0;
    for (const auto& sp : feasible) {
        double psi = 0;
        if (auto it = priors.find(sp.name); it != priors.end()) psi = it->second;
        const double score = sp.detail.sigma + gamma * psi;
        if (!winner || score > best + 1e-12 || (std::abs(score - best) <= 1e-12 && sp.name < *winner)) {
            winner = sp.name;
            best = score;
        }
    }
    return winner;
}

// Overwrites exactly the (pair, channel) slots named in Post(u) with the
// asserted labels at confidence 1.0, then re-infers roles on the predicted
// column. Unresolvable post selectors are an error.
inline SymbolicState apply_postconditions(const PrimitiveOperator& op, const SymbolicState& state,
                                          const std::map<std::string, std::string>& binding,
                                          const ReasoningOptions& opt = {}) {
    SymbolicState next = state;
    for (const auto& atom : op.post) {
        auto resolve_one = [&](const Selector& sel) -> std::string {
            auto it = binding.find(sel.key());
            if (it != binding.end() && !it->second.empty()) return it->second;
            const auto cands = detail::resolve_selector(sel, state, opt);
            if (cands.empty())
                throw std::runtime_error("apply_postconditions: unresolvable selector " + sel.key() +
                                         " in " + op.name);
            return cands.front();
        };
        const std::string subj = resolve_one(atom.subject);
        const std::string obj = resolve_one(atom.object);
        if (subj == obj)
            throw std::runtime_error("apply_postconditions: degenerate pair in " + op.name);

        std::size_t idx = next.pairs.size();
        for (std::size_t i = 0; i < next.pairs.size(); ++i)
            if (next.pairs[i].first == subj && next.pairs[i].second == obj) {
                idx = i;
                break;
            }
        if (idx == next.pairs.size())
            throw std::runtime_error("apply_postconditions: pair (" + subj + "," + obj +
                                     ") not in state");
        switch (atom.channel) {
            case Channel::C:
                next.column.entries[idx].contact = std::get<Contact>(atom.value);
                next.column.confidences[idx].contact = 1.0;
                break;
            case Channel::S:
                next.column.entries[idx].static_rel = std::get<StaticRel>(atom.value);
                next.column.confidences[idx].static_rel = 1.0;
                break;
            case Channel::D:
                next.column.entries[idx].dynamic_rel = std::get<DynamicRel>(atom.value);
                next.column.confidences[idx].dynamic_rel = 1.0;
                break;
            default: break;
        }
    }
    if (!opt.disable_roles)
        next.roles = infer_roles_from_columns(next.pairs, next.column, &state.column, next.classes);
    return next;
}

// ---------------------------------------------------------------------------
// Look-ahead
// ---------------------------------------------------------------------------

struct RankedPrimitive {
    std::string name;
    double score = 0;
};

namespace detail {

inline double rollout_best(const SymbolicState& state, const PrimitiveLibrary& library,
                           const std::map<std::string, double>& priors, const EngineConfig& cfg,
                           const ReasoningOptions& opt, int depth,
                           std::set<std::string>& visited) {
    if (depth <= 0) return 0;
    double best = 0;
    for (const auto& sp : feasible_set(library, state, cfg, opt)) {
        double psi = 0;
        if (auto it = priors.find(sp.name); it != priors.end()) psi = it->second;
        double score = sp.detail.sigma + cfg.gamma * psi;
        const PrimitiveOperator* op = library.find(sp.name);
        SymbolicState succ = apply_postconditions(*op, state, sp.detail.binding, opt);
        const std::string key = succ.label_key();
        if (!visited.count(key)) {
            visited.insert(key);
            score += rollout_best(succ, library, priors, cfg, opt, depth - 1, visited);
            visited.erase(key);
        }
        best = std::max(best, score);
    }
    return best;
}

} // namespace detail

// Ranked next-primitive prediction from the state reached by applying the
// selected primitive's postconditions. Depth 0 ranks every operator by its
// score on the predicted state; deeper settings expand feasible successors
// and rank first steps by their best cumulative score.
inline std::vector<RankedPrimitive> lookahead(const SymbolicState& state,
                                              const PrimitiveLibrary& library,
                                              const std::map<std::string, double>& priors,
                                              const EngineConfig& cfg,
                                              const std::optional<ScoredPrimitive>& selected,
                                              const ReasoningOptions& opt = {}) {
    std::vector<RankedPrimitive> ranking;
    if (!selected) return ranking;
    const PrimitiveOperator* op = library.find(selected->name);
    if (!op) throw std::invalid_argument("lookahead: unknown primitive " + selected->name);
    SymbolicState predicted = apply_postconditions(*op, state, selected->detail.binding, opt);

    if (cfg.lookahead_depth == 0) {
        for (const auto& o : library.ops)
            ranking.push_back({o.name, precondition_score(o, predicted, opt).sigma});
    } else {
        std::set<std::string> visited{predicted.label_key()};
        for (const auto& sp : feasible_set(library, predicted, cfg, opt)) {
            double psi = 0;
            if (auto it = priors.find(sp.name); it != priors.end()) psi = it->second;
            double score = sp.detail.sigma + cfg.gamma * psi;
            const PrimitiveOperator* succ_op = library.find(sp.name);
            SymbolicState succ = apply_postconditions(*succ_op, predicted, sp.detail.binding, opt);
            const std::string key = succ.label_key();
            if (!visited.count(key)) {
                visited.insert(key);
                score += detail::rollout_best(succ, library, priors, cfg, opt,
                                              cfg.lookahead_depth - 1, visited);
                visited.erase(key);
            }
            ranking.push_back({sp.name, score});
        }
    }
    std::sort(ranking.begin(), ranking.end(), [](const RankedPrimitive& a, const RankedPrimitive& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.name < b.name;
    });
    return ranking;
}

// ---------------------------------------------------------------------------
// Decision records and segmentation
// ---------------------------------------------------------------------------

struct DecisionRecord {
    int event_time = 1;
    std::map<std::string, double> scores;     // sigma_u for every operator
    std::vector<std::string> feasible;
    std::optional<std::string> selected;      // u*
    std::map<std::string, std::string> binding;
    std::optional<std::string> predicted_next; // u-hat
    std::optional<SymbolicState> predicted_state;
    double event_saliency = 0.0;               // w_k
    std::map<std::string, double> primitive_saliency; // omega_u
    ScoreDetail selected_detail;
};

inline DecisionRecord decide(const SymbolicState& state, const PrimitiveLibrary& library,
                             const std::map<std::string, double>& priors, const EngineConfig& cfg,
                             const ReasoningOptions& opt = {}) {
    DecisionRecord rec;
    rec.event_time = state.event_time();

    std::vector<ScoredPrimitive> feasible;
    for (const auto& op : library.ops) {
        ScoreDetail d = precondition_score(op, state, opt);
        rec.scores[op.name] = d.sigma;
        rec.primitive_saliency[op.name] = d.sigma;
        if (d.sigma >= cfg.tau_feas) feasible.push_back({op.name, d});
    }
    for (const auto& sp : feasible) rec.feasible.push_back(sp.name);

    rec.selected = select_primitive(feasible, priors, cfg.gamma);
    if (rec.selected) {
        std::optional<ScoredPrimitive> chosen;
        for (const auto& sp : feasible)
            if (sp.name == *rec.selected) chosen = sp;
        rec.binding = chosen->detail.binding;
        rec.selected_detail = chosen->detail;

        double sum = 0;
        int n = 0;
        for (const auto& am : chosen->detail.atoms)
            if (am.matched) {
                sum += am.confidence;
                ++n;
            }
        rec.event_saliency = n > 0 ? sum / n : 0.0;

        // Degraded observations can leave a postcondition selector without a
        // referent; the decision stands but no rollout prediction is made.
        try {
            const PrimitiveOperator* op = library.find(*rec.selected);
            rec.predicted_state = apply_postconditions(*op, state, chosen->detail.binding, opt);
            auto ranking = lookahead(state, library, priors, cfg, chosen, opt);
            if (!ranking.empty() && ranking.front().score > 0)
                rec.predicted_next = ranking.front().name;
        } catch (const std::runtime_error&) {
            rec.predicted_state.reset();
            rec.predicted_next.reset();
        }
    }
    return rec;
}

struct PrimitiveSegment {
    std::string label;
    int k_start = 1;
    int k_end = 1;
};

inline constexpr const char* kIdleLabel = "idle";

// Per-column feasibility + selection, merging consecutive identical picks.
// Columns with no feasible primitive inherit the previous segment's label;
// an infeasible first column opens a distinguished idle segment.
inline std::vector<PrimitiveSegment>
segment_primitives(const ESecMatrix& matrix, const std::map<std::string, std::string>& classes,
                   const std::map<std::string, AffordanceVector>& affordances,
                   const PrimitiveLibrary& library, const std::map<std::string, double>& priors,
                   const EngineConfig& cfg, const ReasoningOptions& opt = {}) {
    if (matrix.columns.empty()) throw std::invalid_argument("segment_primitives: empty matrix");

    std::vector<PrimitiveSegment> segments;
    for (int k = 1; k <= matrix.event_count(); ++k) {
        RoleAssignment roles = opt.disable_roles ? RoleAssignment{} : infer_roles(matrix, k, classes);
        SymbolicState state = make_state(matrix, k, roles, affordances, classes);
        auto feas = feasible_set(library, state, cfg, opt);
        auto pick = select_primitive(feas, priors, cfg.gamma);

        std::string label;
        if (pick) label = *pick;
        else if (!segments.empty()) label = segments.back().label;
        else label = kIdleLabel;

        if (!segments.empty() && segments.back().label == label) {
            segments.back().k_end = k;
        } else {
            segments.push_back({label, k, k});
        }
    }
    return segments;
}

inline const std::string& segment_label_at(const std::vector<PrimitiveSegment>& segments, int k) {
    for (const auto& s : segments)
        if (k >= s.k_start && k <= s.k_end) return s.label;
    throw std::out_of_range("segment_label_at: k not covered");
}

// ---------------------------------------------------------------------------
// Reference library
// ---------------------------------------------------------------------------

// Hand-authored operator set covering approach, grasp, lift, tilt, pour,
// release and cut. Selector conventions: M = manipulator role, X = an
// unassigned object (bias toward graspable), TOOL = tool role,
// V = pourable object, R = receiving object, K = cuttable object,
// SUP = support role.
inline PrimitiveLibrary reference_library() {
    using K = Selector;
    const Selector M = K::by_role(Role::Manipulator);
    const Selector X = K::by_role(Role::Unassigned);
    const Selector TOOL = K::by_role(Role::Tool);
    const Selector SUP = K::by_role(Role::Support);
    const Selector V = K::by_affordance(Affordance::Pourable);
    const Selector R = K::by_affordance(Affordance::Receiving);
    const Selector CUT = K::by_affordance(Affordance::Cuttable);

    PrimitiveLibrary lib;

    {
        PrimitiveOperator op;
        op.name = "approach";
        op.role_config = {Role::Manipulator};
        op.pre = {{Channel::C, M, X, Contact::N},
                  {Channel::D, M, X, DynamicRel::GettingClose},
                  {Channel::S, X, SUP, StaticRel::On}};
        op.post = {{Channel::C, M, X, Contact::T},
                   {Channel::D, M, X, DynamicRel::Stable},
                   {Channel::S, M, X, StaticRel::Around}};
        op.bias = {{X, Affordance::Graspable}};
        op.template_text =
            "The {manipulator} moved toward the {target} and established contact";
        lib.ops.push_back(op);
    }
    {
        PrimitiveOperator op;
        op.name = "grasp";
        op.role_config = {Role::Manipulator};
        op.pre = {{Channel::C, M, X, Contact::T},
                  {Channel::S, M, X, StaticRel::Around},
                  {Channel::S, X, SUP, StaticRel::On}};
        op.post = {{Channel::D, M, X, DynamicRel::FixedMovingTogether},
                   {Channel::D, X, SUP, DynamicRel::MovingApart}};
        op.bias = {{X, Affordance::Graspable}};
        op.template_text = "The {manipulator} closed around the {target} and took hold of it";
        lib.ops.push_back(op);
    }
    {
        PrimitiveOperator op;
        op.name = "lift";
        op.role_config = {Role::Manipulator, Role::Tool};
        op.pre = {{Channel::C, M, TOOL, Contact::T},
                  {Channel::D, TOOL, SUP, DynamicRel::MovingApart}};
        op.post = {{Channel::S, TOOL, SUP, StaticRel::Above},
                   {Channel::D, TOOL, SUP, DynamicRel::Stable}};
        op.template_text = "The {manipulator} raised the {tool} off the {support}";
        lib.ops.push_back(op);
    }
    {
        PrimitiveOperator op;
        op.name = "tilt";
        op.role_config = {Role::Manipulator};
        op.pre = {{Channel::C, M, V, Contact::T},
                  {Channel::D, M, V, DynamicRel::FixedMovingTogether},
                  {Channel::S, V, R, StaticRel::Above},
                  {Channel::D, V, R, DynamicRel::GettingClose}};
        op.post = {{Channel::D, V, R, DynamicRel::Stable}, {Channel::D, M, V, DynamicRel::Stable}};
        op.template_text = "The {manipulator} angled the {tool} over the {recipient}";
        lib.ops.push_back(op);
    }
    {
        PrimitiveOperator op;
        op.name = "pour";
        op.role_config = {Role::Manipulator};
        // the vessel is held still over the recipient: no co-motion, so it
        // has left the tool role by the time pouring is underway
        op.pre = {{Channel::C, M, V, Contact::T},
                  {Channel::RoleChannel, V, V, Role::Unassigned},
                  {Channel::S, V, R, StaticRel::Above},
                  {Channel::D, V, R, DynamicRel::Stable},
                  {Channel::D, M, V, DynamicRel::Stable}};
        op.post = {{Channel::D, V, R, DynamicRel::Stable}, {Channel::S, V, R, StaticRel::Above}};
        op.template_text = "The {manipulator} held the {tool} steady above the {recipient}, pouring";
        lib.ops.push_back(op);
    }
    {
        PrimitiveOperator op;
        op.name = "release";
        op.role_config = {Role::Manipulator, Role::Tool};
        op.pre = {{Channel::C, M, TOOL, Contact::T},
                  {Channel::D, TOOL, SUP, DynamicRel::GettingClose},
                  {Channel::S, TOOL, SUP, StaticRel::Above}};
        op.post = {{Channel::C, M, TOOL, Contact::N},
                   {Channel::D, M, TOOL, DynamicRel::MovingApart},
                   {Channel::S, TOOL, SUP, StaticRel::On},
                   {Channel::D, TOOL, SUP, DynamicRel::Stable}};
        op.template_text = "The {manipulator} lowered the {tool} onto the {support} and let go";
        lib.ops.push_back(op);
    }
    {
        PrimitiveOperator op;
        op.name = "cut";
        op.role_config = {Role::Manipulator, Role::Tool};
        op.pre = {{Channel::C, TOOL, CUT, Contact::T}, {Channel::S, TOOL, CUT, StaticRel::Around}};
        op.post = {{Channel::D, TOOL, CUT, DynamicRel::Stable}};
        op.template_text = "The {manipulator} worked the {tool} through the {recipient}";
        lib.ops.push_back(op);
    }

    lib.validate();
    return lib;
}

} // namespace esec
