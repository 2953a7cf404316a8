#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "currl/config.hpp"
#include "currl/gateway.hpp"

namespace currl {

// Pipeline stages in their canonical order.
enum class Command { rac, filter, sft, train_easy, train_hard, eval };

const char* to_string(Command c) noexcept;
Command parse_command(const std::string& s);

// Offline stand-in for the generator, judge and critic models on the toy
// corpus. Reasoning replies restate the corrupted position and echo the
// reference fix, except for a seeded share that is planted with one defect
// each: a wrong answer, no reasoning, or broken tags. The judge rejects a
// small seeded share; the critic accepts any non-empty change to the code.
MockGateway::Responder toy_responder();

// Files written by `toygen` under <run_dir>/toy/.
struct ToyFiles {
    std::string tasks;
    std::string sft_samples;
    std::string code_samples;
    std::string code_reasoning;
};

ToyFiles toy_files(const std::string& run_dir);

// Writes the task corpus, the related warm-start corpus and the selection set.
ToyFiles write_toy_corpora(const RunConfig& cfg);

// Runs the requested stages in canonical order, reading missing inputs from
// earlier runs in the same directory, and returns the run directory. Throws
// ConfigError naming the absent artifact when a stage lacks its input.
std::string run_pipeline(const RunConfig& cfg, const std::set<Command>& commands);

// Paths (relative to the run directory) that every complete run leaves behind.
std::vector<std::string> run_manifest(const std::string& run_dir);

}  // namespace currl
