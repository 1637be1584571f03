// sirf: command-line driver for the SiRF PUF simulator.
//
// Verbs:
//   simulate          end-to-end experiment from a JSON config
//   enroll            characterization + enrollment, writes helper data/keys
//   regenerate        regenerate keys at one corner from saved enrollment
//   stats             recompute bitstring statistics from saved reports
//   compare           class-by-class comparison tables from report JSONs
//   calibrate-preset  fit a class preset to target statistics

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sirf/calibrate.hpp"
#include "sirf/experiment.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

ojson load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw sirf::ConfigError("cannot open " + path);
    return ojson::parse(is);
}

void save_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw sirf::ExperimentError("cannot write " + path.string());
    os << text;
}

sirf::ExperimentConfig load_config(const std::string& config_path, const std::string& preset,
                                   int64_t seed_override, const std::string& out_dir) {
    sirf::ExperimentConfig cfg;
    if (!config_path.empty()) {
        cfg = sirf::ExperimentConfig::from_json(load_json(config_path));
    } else if (!preset.empty()) {
        cfg.params = sirf::preset_by_name(preset);
    } else {
        throw sirf::ConfigError("either --config or --class is required");
    }
    if (seed_override >= 0) {
        cfg.seeds.population = uint64_t(seed_override);
        cfg.seeds.challenges = uint64_t(seed_override) + 1;
        cfg.seeds.noise = uint64_t(seed_override) + 2;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
    return cfg;
}

int cmd_simulate(const sirf::ExperimentConfig& cfg) {
    sirf::ExperimentReport report = sirf::run_experiment(cfg);
    std::cout << report.to_json().dump(2) << "\n";
    if (!cfg.output_dir.empty())
        std::cerr << "artifacts written to " << cfg.output_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SiRF PUF simulator: device-population simulation, soft-data pipeline, "
                 "key generation and bitstring statistics"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir, corner_label = "regen_85";
    int64_t seed_override = -1;
    uint64_t regen_noise_seed = 99;
    std::vector<std::string> report_paths;
    std::string targets_path;
    bool fast = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config JSON");
        sub->add_option("--class", preset, "device-class preset name");
        sub->add_option("--seed", seed_override, "override all seeds (base value)");
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* sim = app.add_subcommand("simulate", "run the full experiment");
    add_common(sim);
    CLI::App* enr = app.add_subcommand("enroll", "characterize and enroll, save key material");
    add_common(enr);
    CLI::App* reg = app.add_subcommand("regenerate", "regenerate keys at one corner");
    reg->add_option("--out", out_dir, "directory of a previous enroll run")->required();
    reg->add_option("--corner", corner_label, "corner label (e.g. regen_85)");
    reg->add_option("--noise-seed", regen_noise_seed, "noise seed for the regeneration run");
    CLI::App* sta = app.add_subcommand("stats", "recompute statistics from saved bitstrings");
    sta->add_option("--out", out_dir, "directory of a previous enroll/regenerate run")->required();
    CLI::App* cmp = app.add_subcommand("compare", "compare experiment reports");
    cmp->add_option("--reports", report_paths, "report.json files")->required();
    cmp->add_option("--out", out_dir, "output directory for comparison CSV");
    CLI::App* cal = app.add_subcommand("calibrate-preset", "fit a preset to target statistics");
    cal->add_option("--class", preset, "device-class preset to start from")->required();
    cal->add_option("--targets", targets_path, "target statistics JSON (defaults per class)");
    cal->add_option("--out", out_dir, "output directory for the fitted preset");
    cal->add_flag("--fast", fast, "fewer challenge sets per evaluation");
    cal->add_option("--seed", seed_override, "override calibration seeds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return cmd_simulate(load_config(config_path, preset, seed_override, out_dir));
        }
        if (enr->parsed()) {
            sirf::ExperimentConfig cfg = load_config(config_path, preset, seed_override, out_dir);
            if (cfg.output_dir.empty())
                throw sirf::ConfigError("enroll requires --out (or output_dir in the config)");
            sirf::EnrollmentArtifacts art = sirf::run_enrollment(cfg);
            std::cout << art.summary.dump(2) << "\n";
            return 0;
        }
        if (reg->parsed()) {
            ojson result = sirf::run_regeneration(out_dir, corner_label, regen_noise_seed);
            std::cout << result.dump(2) << "\n";
            return 0;
        }
        if (sta->parsed()) {
            ojson result = sirf::recompute_stats(out_dir);
            std::cout << result.dump(2) << "\n";
            return 0;
        }
        if (cmp->parsed()) {
            std::vector<sirf::ExperimentReport> reports;
            std::vector<ojson> raw;
            for (const auto& p : report_paths) raw.push_back(load_json(p));
            sirf::ComparisonTables tables = sirf::compare_report_jsons(raw);
            if (!out_dir.empty()) {
                save_text(fs::path(out_dir) / "comparison.csv", tables.csv);
                std::cerr << "comparison written to " << out_dir << "/comparison.csv\n";
            } else {
                std::cout << tables.csv;
            }
            return 0;
        }
        if (cal->parsed()) {
            sirf::CalibrationTargets targets =
                targets_path.empty()
                    ? sirf::default_targets(preset)
                    : sirf::CalibrationTargets::from_json(load_json(targets_path));
            sirf::CalibrationOutcome outcome = sirf::calibrate_preset(
                sirf::preset_by_name(preset), targets,
                seed_override >= 0 ? uint64_t(seed_override) : 1, fast,
                [](const std::string& line) { std::cerr << line << "\n"; });
            std::cout << outcome.to_json().dump(2) << "\n";
            if (!out_dir.empty()) {
                save_text(fs::path(out_dir) / (outcome.params.name + ".preset.json"),
                          outcome.params.to_json().dump(2));
                std::cerr << "preset written to " << out_dir << "/" << outcome.params.name
                          << ".preset.json\n";
            }
            return 0;
        }
    } catch (const sirf::Error& e) {
        std::cerr << "error " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
