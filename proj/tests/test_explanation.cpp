#include <catch2/catch.hpp>

#include "esec/esec.hpp"

using namespace esec;

namespace {

// State where the hand touches a resting cup: grasp matches fully.
SymbolicState grasp_state(double p_contact, double p_around, double p_on, double p_dyn = 0.3) {
    SymbolicState st;
    st.classes = {{"hand", "hand"}, {"cup", "cup"}, {"table", "table"}};
    const auto reg = AffordanceRegistry::defaults();
    for (const auto& [id, cls] : st.classes) st.affordances[id] = reg.lookup(cls);
    std::vector<std::string> ids = {"cup", "hand", "table"};
    for (const auto& a : ids)
        for (const auto& b : ids)
            if (a != b) st.pairs.push_back({a, b});
    st.column.event_time = 2;
    st.column.entries.resize(st.pairs.size());
    st.column.confidences.resize(st.pairs.size());
    auto set = [&](const std::string& a, const std::string& b, ChannelLabels l, ChannelConfidences c) {
        for (std::size_t i = 0; i < st.pairs.size(); ++i)
            if (st.pairs[i] == EntityPair{a, b}) {
                st.column.entries[i] = l;
                st.column.confidences[i] = c;
            }
    };
    set("hand", "cup", {Contact::T, StaticRel::Around, DynamicRel::GettingClose},
        {p_contact, p_around, p_dyn});
    set("cup", "hand", {Contact::T, StaticRel::Around, DynamicRel::GettingClose},
        {p_contact, p_around, p_dyn});
    set("cup", "table", {Contact::T, StaticRel::On, DynamicRel::Stable}, {1.0, p_on, 1.0});
    set("table", "cup", {Contact::T, StaticRel::Below, DynamicRel::Stable}, {1.0, p_on, 1.0});
    st.roles.roles = {{"hand", Role::Manipulator}, {"cup", Role::Unassigned},
                      {"table", Role::Support}};
    return st;
}

struct Decided {
    DecisionRecord rec;
    SymbolicState state;
    Saliency sal;
    const PrimitiveOperator* op;
};

Decided decide_grasp(double p_contact, double p_around, double p_on, const PrimitiveLibrary& lib,
                     const EngineConfig& cfg, double p_dyn = 0.3) {
    Decided d{DecisionRecord{}, grasp_state(p_contact, p_around, p_on, p_dyn), Saliency{}, nullptr};
    d.rec = decide(d.state, lib, {}, cfg);
    REQUIRE(d.rec.selected);
    REQUIRE(*d.rec.selected == "grasp");
    d.op = lib.find(*d.rec.selected);
    d.sal = compute_saliency(d.rec, d.state, *d.op);
    return d;
}

} // namespace

TEST_CASE("saliency weights decompose the selected score") {
    EngineConfig cfg;
    const auto lib = reference_library();
    SECTION("all atoms matched at full confidence give event weight 1") {
        auto d = decide_grasp(1.0, 1.0, 1.0, lib, cfg);
        REQUIRE(*d.rec.selected == "grasp");
        REQUIRE(d.sal.event_weight == Approx(1.0));
        REQUIRE(d.sal.primitive_weights.at("grasp") == Approx(1.0));
    }
    SECTION("event weight is the mean of matched-atom confidences") {
        auto d = decide_grasp(1.0, 0.6, 1.0, lib, cfg);
        REQUIRE(d.sal.event_weight == Approx((1.0 + 0.6 + 1.0) / 3.0));
    }
    SECTION("primitive weights mirror every operator's sigma") {
        auto d = decide_grasp(1.0, 1.0, 1.0, lib, cfg);
        for (const auto& [name, sigma] : d.rec.scores)
            REQUIRE(d.sal.primitive_weights.at(name) == Approx(sigma));
    }
}

TEST_CASE("trace extraction thresholds by weight") {
    EngineConfig cfg;
    const auto lib = reference_library();
    SECTION("weights below the threshold leave an empty trace") {
        auto d = decide_grasp(0.4, 0.4, 0.4, lib, cfg);
        const auto trace = extract_trace(*d.rec.selected, d.sal, d.state, cfg);
        REQUIRE(trace.elements.empty());
    }
    SECTION("a single strong element survives") {
        auto d = decide_grasp(0.9, 0.2, 0.3, lib, cfg);
        const auto trace = extract_trace(*d.rec.selected, d.sal, d.state, cfg);
        REQUIRE(trace.elements.size() == 1);
        REQUIRE(trace.elements[0].channel == Channel::C);
        REQUIRE(trace.elements[0].confidence == Approx(0.9));
    }
    SECTION("a higher threshold filters mid-weight elements") {
        EngineConfig strict = cfg;
        strict.tau_sal = 0.8;
        auto d = decide_grasp(0.95, 0.7, 0.9, lib, cfg);
        const auto loose = extract_trace(*d.rec.selected, d.sal, d.state, cfg);
        const auto tight = extract_trace(*d.rec.selected, d.sal, d.state, strict);
        REQUIRE(loose.elements.size() == 3);
        REQUIRE(tight.elements.size() == 2);
        for (const auto& el : tight.elements) REQUIRE(el.weight >= 0.8);
    }
    SECTION("elements are ordered by event time then pair") {
        auto d = decide_grasp(0.9, 0.9, 0.9, lib, cfg);
        const auto trace = extract_trace(*d.rec.selected, d.sal, d.state, cfg);
        for (std::size_t i = 1; i < trace.elements.size(); ++i) {
            const auto& a = trace.elements[i - 1];
            const auto& b = trace.elements[i];
            REQUIRE((a.event_time < b.event_time ||
                     (a.event_time == b.event_time && !(b.pair < a.pair))));
        }
    }
}

TEST_CASE("verbalization") {
    EngineConfig cfg;
    const auto lib = reference_library();
    SECTION("identical input gives byte-identical text") {
        auto d1 = decide_grasp(1.0, 0.9, 0.8, lib, cfg);
        auto t1 = extract_trace(*d1.rec.selected, d1.sal, d1.state, cfg);
        auto t2 = t1;
        const std::string a = verbalize(*d1.op, t1, d1.state, d1.rec.binding);
        const std::string b = verbalize(*d1.op, t2, d1.state, d1.rec.binding);
        REQUIRE(a == b);
        REQUIRE_FALSE(a.empty());
        REQUIRE(a.find("confidence") != std::string::npos);
        REQUIRE(a.find("event c_2") != std::string::npos);
    }
    SECTION("an empty trace degrades to a fixed sentence") {
        auto d = decide_grasp(0.3, 0.3, 0.3, lib, cfg);
        auto trace = extract_trace(*d.rec.selected, d.sal, d.state, cfg);
        const std::string text = verbalize(*d.op, trace, d.state, d.rec.binding);
        REQUIRE(text == "Selected grasp with no salient supporting evidence above threshold.");
        REQUIRE_FALSE(trace.warning);
    }
    SECTION("unresolvable slots render as [unknown] with a warning, never a crash") {
        auto d = decide_grasp(1.0, 1.0, 1.0, lib, cfg);
        auto trace = extract_trace(*d.rec.selected, d.sal, d.state, cfg);
        PrimitiveOperator custom = *d.op;
        custom.template_text = "The {manipulator} uses the {tool}";
        // no tool exists in this scene and the binding has none
        std::map<std::string, std::string> binding = d.rec.binding;
        binding.erase("role:tool");
        const std::string text = verbalize(custom, trace, d.state, binding);
        REQUIRE(text.find("[unknown]") != std::string::npos);
        REQUIRE(trace.warning);
    }
    SECTION("the cutting scene names the tool and the cut object") {
        auto [tracks, gt] = generate_episode(make_cut_script(296, 5, 8, "verbal_cut"), 0, cfg);
        (void)gt;
        const auto res = run_pipeline(tracks, reference_library(), AffordanceRegistry::defaults(), cfg);
        bool saw_cut = false;
        for (std::size_t k = 0; k < res.traces.size(); ++k) {
            if (res.traces[k].selected != "cut") continue;
            saw_cut = true;
            REQUIRE(res.traces[k].verbal.find("knife") != std::string::npos);
            REQUIRE(res.traces[k].verbal.find("cucumber") != std::string::npos);
        }
        REQUIRE(saw_cut);
    }
}

TEST_CASE("explanation consistency metric") {
    auto trace_with = [](const std::string& sel,
                         std::vector<std::pair<EntityPair, Channel>> elems) {
        ExplanationTrace t;
        t.selected = sel;
        for (const auto& [pair, ch] : elems) {
            TraceElement el;
            el.pair = pair;
            el.channel = ch;
            el.weight = 1.0;
            t.elements.push_back(el);
        }
        return t;
    };
    SECTION("identical traces everywhere are fully consistent") {
        auto t = trace_with("grasp", {{{"h", "x"}, Channel::C}});
        REQUIRE(explanation_consistency({t, t, t}) == Approx(1.0));
    }
    SECTION("alternating selections are vacuously consistent") {
        auto a = trace_with("grasp", {{{"h", "x"}, Channel::C}});
        auto b = trace_with("lift", {{{"h", "x"}, Channel::D}});
        REQUIRE(explanation_consistency({a, b, a, b}) == Approx(1.0));
    }
    SECTION("a disjoint middle trace breaks both adjacencies") {
        auto a = trace_with("grasp", {{{"h", "x"}, Channel::C}});
        auto mid = trace_with("grasp", {{{"x", "t"}, Channel::S}});
        REQUIRE(explanation_consistency({a, mid, a}) == Approx(0.0));
    }
    SECTION("two events are required") {
        auto a = trace_with("grasp", {{{"h", "x"}, Channel::C}});
        REQUIRE_THROWS_AS(explanation_consistency({a}), std::invalid_argument);
    }
}

TEST_CASE("wrongly flipped relations stay visible in the trace with their confidence") {
    EngineConfig cfg;
    const auto lib = reference_library();
    // a perception error asserts contact with degraded confidence where the
    // script would have none; the trace must show that very element
    auto st = grasp_state(0.55, 0.9, 0.9);
    const auto rec = decide(st, lib, {}, cfg);
    REQUIRE(rec.selected);
    const auto* op = lib.find(*rec.selected);
    const auto sal = compute_saliency(rec, st, *op);
    const auto trace = extract_trace(*rec.selected, sal, st, cfg);
    bool found = false;
    for (const auto& el : trace.elements)
        if (el.channel == Channel::C && el.pair == EntityPair{"hand", "cup"}) {
            REQUIRE(el.confidence == Approx(0.55));
            found = true;
        }
    REQUIRE(found);
}

TEST_CASE("faithfulness: every element clears the threshold and matches a precondition atom") {
    EngineConfig cfg;
    const auto lib = reference_library();
    const auto reg = AffordanceRegistry::defaults();
    scripts::TabletopLayout l;
    l.approach_steps = 5; // pour layouts pair the approach run with the glide span
    auto [tracks, gt] = generate_episode(make_pour_script(l, "faithful", l.target_x - 264), 0, cfg);
    (void)gt;
    const auto res = run_pipeline(tracks, lib, reg, cfg);
    int checked = 0;
    for (const auto& trace : res.traces) {
        if (trace.selected.empty()) continue;
        const auto* op = lib.find(trace.selected);
        for (const auto& el : trace.elements) {
            ++checked;
            REQUIRE(el.weight >= cfg.tau_sal);
            bool matches = false;
            for (const auto& atom : op->pre)
                matches = matches ||
                          (atom.channel == el.channel && to_string(atom.value) == el.label);
            REQUIRE(matches);
        }
    }
    REQUIRE(checked > 0);
}
