#include <cstdio>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "currl/config.hpp"
#include "currl/error.hpp"
#include "currl/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Curriculum RL for vulnerability repair: data construction, SFT, staged RL, evaluation"};
    app.fallthrough();

    std::string config_path, run_dir, profile, checkpoint;
    std::uint64_t seed = 0;
    bool mock = false;
    auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    app.add_option("--run-dir", run_dir, "Run directory (overrides paths.run_dir)");
    app.add_option("--profile", profile, "Base profile when no config is given")
        ->check(CLI::IsMember({"default", "toy"}));
    app.add_option("--checkpoint", checkpoint, "Starting policy for stages run without their predecessor");
    app.add_flag("--mock", mock, "Use the offline mock gateway");

    struct Sub {
        const char* name;
        const char* help;
        std::set<currl::Command> commands;
    };
    using C = currl::Command;
    const Sub subs[] = {
        {"toygen", "Write the synthetic corpora into <run-dir>/toy", {}},
        {"rac", "Generate reasoning answers", {C::rac}},
        {"filter", "Filter generated reasoning", {C::filter}},
        {"sft", "Warm-start the policy on the mixed reasoning set", {C::sft}},
        {"train-easy", "Multiple-choice RL stage", {C::train_easy}},
        {"train-hard", "Open-ended RL stage", {C::train_hard}},
        {"train-curriculum", "Easy stage followed by hard stage", {C::train_easy, C::train_hard}},
        {"eval", "Greedy evaluation on the configured split", {C::eval}},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help);
    // Several subcommands may be chained; they still run in canonical order.
    app.require_subcommand(1, 0);

    CLI11_PARSE(app, argc, argv);

    try {
        currl::RunConfig cfg;
        if (!config_path.empty())
            cfg = currl::RunConfig::load(config_path);
        else
            cfg = profile == "toy" ? currl::RunConfig::toy_profile() : currl::RunConfig::defaults();
        if (*seed_opt) cfg.seed = seed;
        if (!run_dir.empty()) cfg.paths.run_dir = run_dir;
        if (!checkpoint.empty()) cfg.paths.checkpoint = checkpoint;
        if (mock) cfg.gateway.mock = true;
        cfg.validate();

        std::set<currl::Command> commands;
        bool toygen = false;
        for (const auto* sc : app.get_subcommands()) {
            for (const auto& s : subs) {
                if (sc->get_name() != s.name) continue;
                toygen = toygen || s.commands.empty();
                commands.insert(s.commands.begin(), s.commands.end());
            }
        }
        if (toygen) {
            const auto files = currl::write_toy_corpora(cfg);
            std::printf("toy corpora written to %s\n", files.tasks.c_str());
        }
        if (!commands.empty()) {
            const auto dir = currl::run_pipeline(cfg, commands);
            std::printf("run directory: %s\n", dir.c_str());
        }
        return 0;
    } catch (const currl::Error& e) {
        std::fprintf(stderr, "%s error: %s\n", currl::to_string(e.kind()), e.what());
        return currl::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
