#pragma once
// Semantic annotations on top of the relation matrix: per-class affordance
// vectors and per-event functional role inference.

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "esec/event_chain.hpp"

namespace esec {

// ---------------------------------------------------------------------------
// Affordances
// ---------------------------------------------------------------------------

enum class Affordance : std::uint8_t { Graspable, Pourable, Receiving, Cuttable, Openable };

inline constexpr std::size_t kAffordanceCount = 5;

inline const std::array<const char*, kAffordanceCount>& affordance_names() {
    static const std::array<const char*, kAffordanceCount> names = {
        "graspable", "pourable", "receiving", "cuttable", "openable"};
    return names;
}

inline Affordance affordance_from_string(const std::string& s) {
    const auto& names = affordance_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (s == names[i]) return static_cast<Affordance>(i);
    throw std::invalid_argument("unknown affordance: " + s);
}

struct AffordanceVector {
    std::array<bool, kAffordanceCount> bits{};

    bool has(Affordance a) const { return bits[static_cast<std::size_t>(a)]; }
    void set(Affordance a) { bits[static_cast<std::size_t>(a)] = true; }
    bool any() const {
        for (bool b : bits)
            if (b) return true;
        return false;
    }
    bool operator==(const AffordanceVector& o) const { return bits == o.bits; }
};

inline AffordanceVector make_affordances(std::initializer_list<Affordance> list) {
    AffordanceVector v;
    for (auto a : list) v.set(a);
    return v;
}

// Maps entity classes to affordance vectors; unknown classes are all-zero.
struct AffordanceRegistry {
    std::map<std::string, AffordanceVector> class_map;

    AffordanceVector lookup(const std::string& entity_class) const {
        auto it = class_map.find(entity_class);
        return it == class_map.end() ? AffordanceVector{} : it->second;
    }

    // Classes carrying a given affordance (used by the role-free fallback).
    std::vector<std::string> classes_with(Affordance a) const {
        std::vector<std::string> out;
        for (const auto& [cls, v] : class_map)
            if (v.has(a)) out.push_back(cls);
        return out;
    }

    static AffordanceRegistry defaults() {
        using A = Affordance;
        AffordanceRegistry r;
        r.class_map["cup"] = make_affordances({A::Graspable, A::Pourable, A::Receiving});
        r.class_map["mug"] = make_affordances({A::Graspable, A::Pourable, A::Receiving});
        r.class_map["bottle"] = make_affordances({A::Graspable, A::Pourable, A::Openable});
        r.class_map["pitcher"] = make_affordances({A::Graspable, A::Pourable});
        r.class_map["knife"] = make_affordances({A::Graspable});
        r.class_map["spoon"] = make_affordances({A::Graspable});
        r.class_map["bowl"] = make_affordances({A::Receiving});
        r.class_map["plate"] = make_affordances({A::Receiving});
        r.class_map["jar"] = make_affordances({A::Receiving, A::Openable});
        r.class_map["box"] = make_affordances({A::Receiving, A::Openable});
        r.class_map["cucumber"] = make_affordances({A::Cuttable});
        r.class_map["bread"] = make_affordances({A::Cuttable});
        r.class_map["apple"] = make_affordances({A::Cuttable});
        r.class_map["hand"] = AffordanceVector{};
        r.class_map["table"] = AffordanceVector{};
        r.class_map["block"] = AffordanceVector{};
        return r;
    }
};

inline AffordanceVector assign_affordances(const std::string& entity_class,
                                           const AffordanceRegistry& registry) {
    return registry.lookup(entity_class);
}

// ---------------------------------------------------------------------------
// Functional roles
// ---------------------------------------------------------------------------

enum class Role : std::uint8_t { Manipulator, Tool, Recipient, Support, Unassigned };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::Manipulator: return "manipulator";
        case Role::Tool: return "tool";
        case Role::Recipient: return "recipient";
        case Role::Support: return "support";
        default: return "unassigned";
    }
}

inline Role role_from_string(const std::string& s) {
    if (s == "manipulator") return Role::Manipulator;
    if (s == "tool") return Role::Tool;
    if (s == "recipient") return Role::Recipient;
    if (s == "support") return Role::Support;
    if (s == "unassigned") return Role::Unassigned;
    throw std::invalid_argument("unknown role: " + s);
}

struct RoleAssignment {
    std::map<std::string, Role> roles;

    Role of(const std::string& entity_id) const {
        auto it = roles.find(entity_id);
        return it == roles.end() ? Role::Unassigned : it->second;
    }
};

namespace detail {

inline const ChannelLabels* column_entry(const std::vector<EntityPair>& pairs,
                                         const ESecColumn& col, const std::string& a,
                                         const std::string& b) {
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (pairs[i].first == a && pairs[i].second == b) return &col.entries[i];
    return nullptr;
}

} // namespace detail

// Role rules over a column (and its predecessor for support persistence),
// evaluated per entity with precedence manipulator > tool > support > recipient.
inline RoleAssignment infer_roles_from_columns(const std::vector<EntityPair>& pairs,
                                               const ESecColumn& col, const ESecColumn* prev,
                                               const std::map<std::string, std::string>& entity_classes) {
    RoleAssignment out;

    std::vector<std::string> manipulators;
    for (const auto& [id, cls] : entity_classes)
        if (cls == "hand") manipulators.push_back(id);

    auto is_tool = [&](const std::string& id) {
        if (entity_classes.at(id) == "hand") return false;
        for (const auto& m : manipulators) {
            const ChannelLabels* e = detail::column_entry(pairs, col, m, id);
            if (!e) continue;
            const bool held = e->contact == Contact::T &&
                              (e->dynamic_rel == DynamicRel::MovingTogether ||
                               e->dynamic_rel == DynamicRel::FixedMovingTogether);
            if (held) return true;
        }
        return false;
    };

    // something rests on the entity: static=on toward it, contact T, and the
    // pair not in motion (UNK counts as no contrary motion evidence)
    auto rests_on = [&](const ESecColumn& c, const std::string& id) {
        for (const auto& [oid, ocls] : entity_classes) {
            if (oid == id) continue;
            (void)ocls;
            const ChannelLabels* e = detail::column_entry(pairs, c, oid, id);
            if (e && e->static_rel == StaticRel::On && e->contact == Contact::T &&
                (e->dynamic_rel == DynamicRel::Stable || e->dynamic_rel == DynamicRel::Unk))
                return true;
        }
        return false;
    };

    std::map<std::string, bool> tool_flag;
    for (const auto& [id, cls] : entity_classes) tool_flag[id] = is_tool(id);

    for (const auto& [id, cls] : entity_classes) {
        if (cls == "hand") {
            out.roles[id] = Role::Manipulator;
            continue;
        }
        if (tool_flag[id]) {
            out.roles[id] = Role::Tool;
            continue;
        }
        if (rests_on(col, id) && (prev == nullptr || rests_on(*prev, id))) {
            out.roles[id] = Role::Support;
            continue;
        }
        // recipient: a tool is directed at it via inside/on/above
        bool recipient = false;
        for (const auto& [oid, ocls] : entity_classes) {
            if (oid == id || !tool_flag[oid]) continue;
            (void)ocls;
            const ChannelLabels* e = detail::column_entry(pairs, col, oid, id);
            if (e && (e->static_rel == StaticRel::Inside || e->static_rel == StaticRel::On ||
                      e->static_rel == StaticRel::Above)) {
                recipient = true;
                break;
            }
        }
        out.roles[id] = recipient ? Role::Recipient : Role::Unassigned;
    }
    return out;
}

inline RoleAssignment infer_roles(const ESecMatrix& matrix, int column_index,
                                  const std::map<std::string, std::string>& entity_classes) {
    if (column_index < 1 || column_index > matrix.event_count())
        throw std::out_of_range("infer_roles: column index out of range");
    const ESecColumn& col = matrix.columns[static_cast<std::size_t>(column_index - 1)];
    const ESecColumn* prev =
        column_index > 1 ? &matrix.columns[static_cast<std::size_t>(column_index - 2)] : nullptr;
    return infer_roles_from_columns(matrix.pairs, col, prev, entity_classes);
}

} // namespace esec
