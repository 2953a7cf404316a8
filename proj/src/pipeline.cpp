#include "currl/pipeline.hpp"

#include <cctype>
#include <filesystem>
#include <optional>

#include "currl/corpus.hpp"
#include "currl/curriculum.hpp"
#include "currl/error.hpp"
#include "currl/eval.hpp"
#include "currl/filter.hpp"
#include "currl/policy.hpp"
#include "currl/rac.hpp"
#include "currl/reward.hpp"
#include "currl/rng.hpp"
#include "currl/sft.hpp"
#include "currl/text.hpp"
#include "currl/training_log.hpp"
#include "currl/vocab.hpp"

namespace fs = std::filesystem;

namespace currl {

const char* to_string(Command c) noexcept {
    switch (c) {
        case Command::rac: return "rac";
        case Command::filter: return "filter";
        case Command::sft: return "sft";
        case Command::train_easy: return "train-easy";
        case Command::train_hard: return "train-hard";
        case Command::eval: return "eval";
    }
    return "?";
}

Command parse_command(const std::string& s) {
    for (Command c : {Command::rac, Command::filter, Command::sft, Command::train_easy,
                      Command::train_hard, Command::eval})
        if (s == to_string(c)) return c;
    throw ArgumentError("unknown command: " + s);
}

namespace {

std::optional<std::string> between(const std::string& text, const std::string& open,
                                   const std::string& close) {
    const auto a = text.find(open);
    if (a == std::string::npos) return std::nullopt;
    const auto b = text.find(close, a + open.size());
    if (b == std::string::npos) return std::nullopt;
    return text.substr(a + open.size(), b - a - open.size());
}

std::string position_word(const std::string& prompt) {
    const auto at = prompt.find("position ");
    if (at == std::string::npos) return "unknown";
    std::string digits;
    for (std::size_t i = at + 9; i < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[i])); ++i)
        digits += prompt[i];
    return digits.empty() ? "unknown" : digits;
}

}  // namespace

MockGateway::Responder toy_responder() {
    return [](const ChatRequest& req, std::uint64_t key) -> std::string {
        std::string prompt;
        for (const auto& m : req.messages) prompt += m.content + "\n";
        const std::uint64_t roll = mix64(key) % 100;

        if (auto cand = between(prompt, "<candidate>", "</candidate>")) {
            auto code = between(prompt, "Vulnerable code:\n", "\nProposed repair:");
            const bool changed = !trim(*cand).empty() && (!code || !token_equal(*cand, *code));
            return changed ? "1" : "0";
        }
        if (auto ref = between(prompt, "<reference>", "</reference>")) {
            const std::string fix = trim(*ref);
            const std::string think = position_word(prompt);
            if (roll < 4) {
                // rotated answer: wrong unless every token is the same
                auto toks = normalize_tokens(fix);
                if (toks.size() > 1) toks.push_back(toks.front()), toks.erase(toks.begin());
                return render_tagged(think, join(toks, " "));
            }
            if (roll < 8) return render_tagged("", fix);
            if (roll < 12) return "<think>\n" + think + "\n</think>\n<answer>\n" + fix + "\n";
            return render_tagged(think, fix);
        }
        if (prompt.find("yes or no") != std::string::npos) return roll < 5 ? "no" : "yes";
        return "mock reply";
    };
}

ToyFiles toy_files(const std::string& run_dir) {
    const fs::path d = fs::path(run_dir) / "toy";
    return {(d / "tasks.jsonl").string(), (d / "sft_samples.jsonl").string(),
            (d / "code_samples.jsonl").string(), (d / "code_reasoning.jsonl").string()};
}

ToyFiles write_toy_corpora(const RunConfig& cfg) {
    const std::size_t v = cfg.policy.content_vocab;
    const std::size_t len = cfg.toy.seq_len;
    const std::uint64_t seed = cfg.seed;

    // Smallest corpus whose train split holds exactly cfg.toy.tasks items.
    std::size_t n = cfg.toy.tasks;
    auto train_count = [](std::size_t m) { return m - (m + 1) / 10 - m / 10; };
    while (train_count(n) < cfg.toy.tasks) ++n;

    const auto succ = toy_successor(seed, v);
    const auto tasks = generate_toy_corpus(seed, n, v, len, succ, "task");
    const auto warm_succ = perturb_successor(succ, cfg.toy.domain_swaps, seed);
    const auto warm = generate_toy_corpus(mix64(seed ^ 0x3a11), cfg.toy.tasks, v, len, warm_succ, "warm");
    const std::uint64_t sel_seed = mix64(seed ^ 0x5e1ec7);
    const auto sel = generate_toy_selection_set(sel_seed, cfg.toy.code_items, v, len,
                                                toy_successor(sel_seed, v));

    const ToyFiles files = toy_files(cfg.paths.run_dir);
    fs::create_directories(fs::path(files.tasks).parent_path());
    save_dataset(tasks, files.tasks);
    save_dataset(warm, files.sft_samples);
    save_dataset(sel.samples, files.code_samples);
    save_dataset(sel.reasoning, files.code_reasoning);
    return files;
}

namespace {

bool exists(const std::string& p) { return !p.empty() && fs::exists(p); }

// Explicit path, else the run directory's toy file, else a ConfigError.
std::string resolve_input(const std::string& configured, const std::string& fallback,
                          const std::string& what) {
    if (!configured.empty()) {
        if (!fs::exists(configured)) throw ConfigError(what + " not found: " + configured);
        return configured;
    }
    if (exists(fallback)) return fallback;
    throw ConfigError("no " + what + ": set it in the config or run toygen first (looked for " +
                      fallback + ")");
}

VulnDataset split_of(const VulnDataset& ds, Split s) {
    VulnDataset out;
    out.tag = ds.tag;
    out.provenance = ds.provenance + "[" + to_string(s) + "]";
    for (const auto& r : ds.records)
        if (r.split == s) out.records.push_back(r);
    return out;
}

void write_sft_log(const SftLog& log, const std::string& path) {
    std::string csv = "epoch,mean_loss\n";
    for (const auto& e : log) csv += std::to_string(e.epoch) + "," + format_real(e.mean_loss) + "\n";
    write_file(path, csv);
}

void write_mcqs(const std::vector<McqPrompt>& mcqs, const std::string& path) {
    std::string out;
    for (const auto& m : mcqs) {
        nlohmann::ordered_json j;
        j["sample_id"] = m.sample_id;
        j["options"] = m.options;
        j["correct_letter"] = std::string(1, m.correct_letter);
        j["seed"] = m.seed;
        out += j.dump() + "\n";
    }
    write_file(path, out);
}

TrainingLog read_log(const fs::path& p) {
    return fs::exists(p) ? TrainingLog::from_csv(read_file(p.string())) : TrainingLog{};
}

class Run {
public:
    Run(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.paths.run_dir), vocab_(cfg.policy.content_vocab) {
        toy_ = toy_files(cfg.paths.run_dir);
    }

    void rac() {
        auto res = generate_reasoning_batch(samples(), gateway(), cfg_.rac);
        fs::create_directories(dir_ / "rac");
        save_dataset(res.generated, (dir_ / "rac" / "reasoning.jsonl").string());
        std::string failures;
        for (const auto& [id, err] : res.failures)
            failures += nlohmann::ordered_json{{"sample_id", id}, {"error", err}}.dump() + "\n";
        write_file((dir_ / "rac" / "failures.jsonl").string(), failures);
        reasoning_ = std::move(res.generated);
    }

    void filter() {
        if (!reasoning_) {
            const auto p = dir_ / "rac" / "reasoning.jsonl";
            if (!fs::exists(p)) throw ConfigError("filter needs rac output: " + p.string() + " is missing");
            reasoning_ = load_dataset<ReasoningSample>(p.string());
        }
        auto res = filter_dataset(*reasoning_, samples(), gateway(), cfg_.filter);
        fs::create_directories(dir_ / "filter");
        save_dataset(res.kept, (dir_ / "filter" / "d_vul.jsonl").string());
        save_dataset(res.rejected, (dir_ / "filter" / "rejected.jsonl").string());
        write_file((dir_ / "filter" / "stats.json").string(), res.stats.to_json().dump(2) + "\n");
        d_vul_ = std::move(res.kept);
    }

    void sft() {
        const auto& vul = d_vul();
        auto index = index_by_id(samples());
        ReasoningDataset mixed = vul;
        const std::string code_s = pick(cfg_.paths.code_samples, toy_.code_samples);
        const std::string code_r = pick(cfg_.paths.code_reasoning, toy_.code_reasoning);
        if (!code_s.empty() && !code_r.empty()) {
            auto cs = load_dataset<VulnSample>(code_s);
            auto cr = load_dataset<ReasoningSample>(code_r, DatasetTag::d_code);
            for (const auto& s : cs.records) index.emplace(s.id, s);
            mixed = mix_datasets(vul, cr, Rng::derive(cfg_.seed, 0x313).next());
        }
        fs::create_directories(dir_ / "sft");
        save_dataset(mixed, (dir_ / "sft" / "d_mixed.jsonl").string());
        const auto items = build_sft_items(mixed, index, vocab_);
        SftConfig sc = cfg_.sft;
        sc.seed = Rng::derive(cfg_.seed, 0x5f7).next();
        auto [params, log] = sft_train(make_policy(vocab_, cfg_.policy.context_order), items, sc);
        write_sft_log(log, (dir_ / "sft" / "log.csv").string());
        keep(params, "sft");
    }

    void train_easy() {
        const auto start = starting_policy({"sft"}, "train-easy");
        auto critic = make_critic(cfg_.critic_backend, critic_gateway(), cfg_.critic);
        const auto& pool = d_vul();
        auto res = run_stage(start, train_tasks(), cfg_.easy, *critic, vocab_,
                             Rng::derive(cfg_.seed, 0xea5).next(), &pool, 0);
        fs::create_directories(dir_ / "easy");
        res.log.save((dir_ / "easy" / "log.csv").string());
        write_mcqs(res.mcqs, (dir_ / "easy" / "mcq.jsonl").string());
        easy_steps_ = res.log.size();
        keep(res.params, "easy");
        combine_logs();
    }

    void train_hard() {
        const auto start = starting_policy({"easy"}, "train-hard");
        auto critic = make_critic(cfg_.critic_backend, critic_gateway(), cfg_.critic);
        std::size_t offset = easy_steps_ ? *easy_steps_ : 0;
        if (!easy_steps_) {
            const auto prior = read_log(dir_ / "easy" / "log.csv");
            if (!prior.empty()) offset = prior.rows().back().step;
        }
        auto res = run_stage(start, train_tasks(), cfg_.hard, *critic, vocab_,
                             Rng::derive(cfg_.seed, 0x4a2d).next(), nullptr, offset);
        fs::create_directories(dir_ / "hard");
        res.log.save((dir_ / "hard" / "log.csv").string());
        keep(res.params, "hard");
        combine_logs();
    }

    void eval() {
        const auto params = starting_policy({"hard", "easy", "sft"}, "eval");
        const auto ds = split_of(tasks(), parse_split(cfg_.eval.split));
        const auto preds = greedy_predictions(params, ds, vocab_, cfg_.hard.rl.max_prompt_len,
                                              cfg_.eval.max_response_len);
        const auto report = evaluate(preds, ds);
        fs::create_directories(dir_ / "eval");
        write_file((dir_ / "eval" / "report.json").string(), report.to_json().dump(2) + "\n");
        write_file((dir_ / "eval" / "report.txt").string(), report.to_table());
        std::string out;
        for (const auto& s : ds.records)
            out += nlohmann::ordered_json{{"id", s.id}, {"prediction", preds.count(s.id) ? preds.at(s.id) : ""}}
                       .dump() + "\n";
        write_file((dir_ / "eval" / "predictions.jsonl").string(), out);
    }

private:
    static std::string pick(const std::string& configured, const std::string& fallback) {
        if (!configured.empty()) return configured;
        return exists(fallback) ? fallback : std::string{};
    }

    Gateway& gateway() {
        if (!gw_) {
            GatewayConfig gc = cfg_.gateway;
            gc.mock_seed = cfg_.seed;
            gw_ = make_gateway(gc, gc.mock ? toy_responder() : MockGateway::Responder{});
        }
        return *gw_;
    }

    Gateway* critic_gateway() {
        return cfg_.critic_backend == CriticBackend::llm ? &gateway() : nullptr;
    }

    const VulnDataset& tasks() {
        if (!tasks_) tasks_ = load_dataset<VulnSample>(resolve_input(cfg_.paths.tasks, toy_.tasks, "task dataset"));
        return *tasks_;
    }

    const VulnDataset& samples() {
        if (!samples_) {
            const std::string p = pick(cfg_.paths.sft_samples, toy_.sft_samples);
            samples_ = p.empty() ? tasks() : load_dataset<VulnSample>(p);
        }
        return *samples_;
    }

    VulnDataset train_tasks() { return split_of(tasks(), Split::train); }

    const ReasoningDataset& d_vul() {
        if (!d_vul_) {
            const auto p = dir_ / "filter" / "d_vul.jsonl";
            if (!fs::exists(p)) throw ConfigError("filtered reasoning set missing: " + p.string());
            d_vul_ = load_dataset<ReasoningSample>(p.string(), DatasetTag::d_vul);
        }
        return *d_vul_;
    }

    // Policy from this invocation, else the explicit checkpoint, else the
    // newest listed checkpoint in the run directory.
    PolicyParams starting_policy(std::initializer_list<const char*> stages, const std::string& who) {
        if (policy_) return *policy_;
        if (!cfg_.paths.checkpoint.empty()) {
            if (!fs::exists(cfg_.paths.checkpoint))
                throw ConfigError("checkpoint not found: " + cfg_.paths.checkpoint);
            return load_checkpoint(cfg_.paths.checkpoint);
        }
        for (const char* s : stages) {
            const auto p = dir_ / "checkpoints" / (std::string(s) + ".json");
            if (fs::exists(p)) return load_checkpoint(p.string());
        }
        throw ConfigError(who + " needs a starting checkpoint: run the preceding stage or set paths.checkpoint");
    }

    void keep(const PolicyParams& p, const std::string& stage) {
        fs::create_directories(dir_ / "checkpoints");
        save_checkpoint(p, (dir_ / "checkpoints" / (stage + ".json")).string());
        save_checkpoint(p, (dir_ / "checkpoints" / "final.json").string());
        policy_ = p;
    }

    void combine_logs() {
        TrainingLog all = read_log(dir_ / "easy" / "log.csv");
        const auto hard = read_log(dir_ / "hard" / "log.csv");
        if (!all.empty() && !hard.empty() && hard.rows().front().step <= all.rows().back().step)
            all = TrainingLog{};  // stale easy log from another lineage
        all.extend(hard);
        all.save((dir_ / "training_log.csv").string());
    }

    const RunConfig& cfg_;
    fs::path dir_;
    Vocab vocab_;
    ToyFiles toy_;
    std::unique_ptr<Gateway> gw_;
    std::optional<VulnDataset> tasks_, samples_;
    std::optional<ReasoningDataset> reasoning_, d_vul_;
    std::optional<PolicyParams> policy_;
    std::optional<std::size_t> easy_steps_;
};

}  // namespace

std::string run_pipeline(const RunConfig& cfg, const std::set<Command>& commands) {
    cfg.validate();
    const fs::path dir(cfg.paths.run_dir);
    fs::create_directories(dir);
    cfg.save((dir / "config.json").string());

    Run run(cfg);
    for (Command c : commands) {  // std::set orders them canonically
        switch (c) {
            case Command::rac: run.rac(); break;
            case Command::filter: run.filter(); break;
            case Command::sft: run.sft(); break;
            case Command::train_easy: run.train_easy(); break;
            case Command::train_hard: run.train_hard(); break;
            case Command::eval: run.eval(); break;
        }
    }

    std::string manifest;
    for (const auto& p : run_manifest(cfg.paths.run_dir))
        if (fs::exists(dir / p)) manifest += p + "\n";
    write_file((dir / "manifest.txt").string(), manifest);
    return dir.string();
}

std::vector<std::string> run_manifest(const std::string& /*run_dir*/) {
    return {"config.json",         "rac/reasoning.jsonl",    "filter/d_vul.jsonl",
            "filter/stats.json",   "sft/log.csv",            "checkpoints/sft.json",
            "easy/log.csv",        "checkpoints/easy.json",  "hard/log.csv",
            "checkpoints/hard.json", "training_log.csv",     "checkpoints/final.json",
            "eval/report.json",    "eval/report.txt"};
}

}  // namespace currl
