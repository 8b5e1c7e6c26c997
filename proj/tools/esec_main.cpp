// Command-line surface: simulate, extract, reason, perturb, evaluate.
// Exit codes: 0 success, 1 validation failure, 2 I/O error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esec/esec.hpp"

namespace fs = std::filesystem;
using namespace esec;

namespace {

EngineConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    return io::config_from_json(json::parse(io::read_file(path)));
}

PrimitiveLibrary load_library(const std::string& path) {
    if (path.empty()) return reference_library();
    return io::library_from_json(json::parse(io::read_file(path)));
}

AffordanceRegistry load_registry(const std::string& path) {
    if (path.empty()) return AffordanceRegistry::defaults();
    return io::registry_from_json(json::parse(io::read_file(path)));
}

int run_simulate(const std::string& suite_dir, const std::string& script_path, std::uint64_t seed,
                 const std::string& config_path) {
    const EngineConfig cfg = load_config(config_path);
    std::vector<EpisodeScript> scripts;
    if (!script_path.empty()) {
        scripts.push_back(io::script_from_json(json::parse(io::read_file(script_path))));
    } else {
        scripts = bundled_suite();
    }
    fs::create_directories(suite_dir);
    for (const auto& script : scripts) {
        auto [tracks, gt] = generate_episode(script, seed, cfg);
        const std::string base = (fs::path(suite_dir) / script.name).string();
        io::write_file(base + ".script.json", io::script_to_json(script).dump(2) + "\n");
        io::write_file(base + ".stream.jsonl", io::tracks_to_jsonl(tracks));
        io::write_file(base + ".gt.json", io::ground_truth_to_json(gt).dump(2) + "\n");
    }
    std::cout << "wrote " << scripts.size() << " episodes to " << suite_dir << "\n";
    return 0;
}

int run_extract(const std::string& in_path, const std::string& config_path,
                const std::string& out_path) {
    const EngineConfig cfg = load_config(config_path);
    auto tracks = io::tracks_from_jsonl(io::read_file(in_path));
    const ValidationReport report = validate_episode(tracks);
    if (!report.ok()) {
        for (const auto& v : report.violations)
            std::cerr << "validation: " << v.entity_id << ": " << v.message << "\n";
        return 1;
    }
    auto streams = build_predicate_streams(tracks, cfg);
    auto events = detect_events(streams, cfg);
    auto matrix = build_esec(streams, events, cfg);
    std::map<std::string, std::string> classes;
    for (const auto& t : tracks) classes[t.entity_id] = t.entity_class;
    io::write_file(out_path, io::matrix_to_json(matrix, classes).dump(2) + "\n");
    std::cout << "events: " << matrix.event_count() << ", pairs: " << matrix.pairs.size() << "\n";
    return 0;
}

int run_reason(const std::string& esec_path, const std::string& library_path,
               const std::string& registry_path, const std::string& config_path,
               const std::string& out_path) {
    const EngineConfig cfg = load_config(config_path);
    const PrimitiveLibrary lib = load_library(library_path);
    const AffordanceRegistry reg = load_registry(registry_path);

    auto [matrix, classes] = io::matrix_from_json(json::parse(io::read_file(esec_path)));
    if (classes.empty()) {
        std::cerr << "esec file carries no entity classes; cannot infer roles\n";
        return 1;
    }
    std::map<std::string, AffordanceVector> affordances;
    for (const auto& [id, cls] : classes) affordances[id] = assign_affordances(cls, reg);

    std::string out;
    for (int k = 1; k <= matrix.event_count(); ++k) {
        RoleAssignment roles = infer_roles(matrix, k, classes);
        SymbolicState state = make_state(matrix, k, roles, affordances, classes);
        DecisionRecord rec = decide(state, lib, {}, cfg);
        ExplanationTrace trace;
        if (rec.selected) {
            const PrimitiveOperator* op = lib.find(*rec.selected);
            Saliency sal = compute_saliency(rec, state, *op);
            trace = extract_trace(*rec.selected, sal, state, cfg);
            verbalize(*op, trace, state, rec.binding);
        }
        out += io::decision_to_json(rec, rec.selected ? &trace : nullptr).dump();
        out += '\n';
    }
    io::write_file(out_path, out);
    std::cout << "wrote " << matrix.event_count() << " decision records\n";
    return 0;
}

int run_perturb(const std::string& in_path, const std::string& out_path, const std::string& level,
                const std::string& spec_path, std::uint64_t seed) {
    NoiseSpec spec = spec_path.empty() ? NoiseSpec::by_name(level)
                                       : io::noise_spec_from_json(json::parse(io::read_file(spec_path)));
    auto tracks = io::tracks_from_jsonl(io::read_file(in_path));
    auto noisy = perturb(tracks, spec, seed);
    io::write_file(out_path, io::tracks_to_jsonl(noisy));
    return 0;
}

int run_evaluate(const std::string& suite_dir, const std::string& variants_csv,
                 const std::string& levels_csv, int seed_count, std::uint64_t seed_base,
                 const std::string& library_path, const std::string& registry_path,
                 const std::string& config_path, const std::string& out_path) {
    const EngineConfig cfg = load_config(config_path);
    const PrimitiveLibrary lib = load_library(library_path);
    const AffordanceRegistry reg = load_registry(registry_path);

    std::vector<EpisodeScript> suite;
    std::string suite_name;
    if (suite_dir.empty()) {
        suite = bundled_suite();
        suite_name = "bundled";
    } else {
        suite_name = suite_dir;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(suite_dir))
            if (entry.path().string().ends_with(".script.json")) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files)
            suite.push_back(io::script_from_json(json::parse(io::read_file(p.string()))));
        if (suite.empty()) {
            std::cerr << "no *.script.json files in " << suite_dir << "\n";
            return 1;
        }
    }

    auto split = [](const std::string& csv) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream ss(csv);
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(item);
        return out;
    };
    std::vector<Variant> variants;
    for (const auto& v : split(variants_csv)) variants.push_back(variant_from_string(v));
    const std::vector<std::string> levels = split(levels_csv);
    for (const auto& l : levels) NoiseSpec::by_name(l); // validate names early

    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < seed_count; ++i) seeds.push_back(seed_base + static_cast<std::uint64_t>(i));

    EvalReport report = run_evaluation(suite, variants, levels, seeds, lib, reg, cfg, suite_name);
    const json j = io::report_to_json(report);
    io::validate_report_json(j);
    io::write_file(out_path, j.dump(2) + "\n");

    for (const auto& cell : report.results)
        std::printf("%-24s %-8s recognition %.4f (+/- %.4f)  next %.4f  consistency %.4f\n",
                    cell.variant.c_str(), cell.level.c_str(), cell.top1_recognition,
                    cell.std_recognition, cell.top1_next_primitive, cell.mean_consistency);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"event-level manipulation reasoning over detection streams"};
    app.require_subcommand(1);

    std::string suite_dir, script_path, config_path, in_path, out_path, esec_path;
    std::string library_path, registry_path, level = "medium", spec_path;
    std::string variants_csv = "full", levels_csv = "clean";
    std::uint64_t seed = 0;
    int seed_count = 10;

    auto* sim = app.add_subcommand("simulate", "generate detection streams from scripts");
    sim->add_option("--suite", suite_dir, "output directory")->required();
    sim->add_option("--script", script_path, "single script JSON instead of the bundled suite");
    sim->add_option("--seed", seed, "generation seed");
    sim->add_option("--config", config_path, "engine config JSON");

    auto* ext = app.add_subcommand("extract", "detection stream JSONL -> eSEC matrix JSON");
    ext->add_option("--in", in_path, "detection stream JSONL")->required();
    ext->add_option("--config", config_path, "engine config JSON");
    ext->add_option("--out", out_path, "output eSEC JSON")->required();

    auto* rsn = app.add_subcommand("reason", "eSEC matrix -> decision records JSONL");
    rsn->add_option("--esec", esec_path, "eSEC matrix JSON")->required();
    rsn->add_option("--library", library_path, "primitive library JSON");
    rsn->add_option("--affordances", registry_path, "affordance registry JSON");
    rsn->add_option("--config", config_path, "engine config JSON");
    rsn->add_option("--out", out_path, "output decisions JSONL")->required();

    auto* prt = app.add_subcommand("perturb", "apply perception noise to a stream");
    prt->add_option("--in", in_path, "detection stream JSONL")->required();
    prt->add_option("--out", out_path, "output JSONL")->required();
    prt->add_option("--level", level, "clean|low|medium|high");
    prt->add_option("--spec", spec_path, "explicit noise spec JSON");
    prt->add_option("--seed", seed, "noise seed");

    auto* evl = app.add_subcommand("evaluate", "run recognition/prediction metrics over a suite");
    evl->add_option("--suite", suite_dir, "directory of *.script.json (default: bundled suite)");
    evl->add_option("--variants", variants_csv, "comma list of variants");
    evl->add_option("--levels", levels_csv, "comma list of noise levels");
    evl->add_option("--seeds", seed_count, "number of seeds for noisy levels");
    evl->add_option("--seed-base", seed, "first seed");
    evl->add_option("--library", library_path, "primitive library JSON");
    evl->add_option("--affordances", registry_path, "affordance registry JSON");
    evl->add_option("--config", config_path, "engine config JSON");
    evl->add_option("--out", out_path, "output report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(suite_dir, script_path, seed, config_path);
        if (ext->parsed()) return run_extract(in_path, config_path, out_path);
        if (rsn->parsed())
            return run_reason(esec_path, library_path, registry_path, config_path, out_path);
        if (prt->parsed()) return run_perturb(in_path, out_path, level, spec_path, seed);
        if (evl->parsed())
            return run_evaluate(suite_dir, variants_csv, levels_csv, seed_count, seed, library_path,
                                registry_path, config_path, out_path);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
