#include "currl/curriculum.hpp"

#include <algorithm>
#include <thread>

#include "currl/concurrency.hpp"
#include "currl/error.hpp"
#include "currl/filter.hpp"
#include "currl/sft.hpp"
#include "currl/templates.hpp"
#include "currl/text.hpp"

namespace currl {

const char* to_string(Stage s) noexcept { return s == Stage::easy ? "easy" : "hard"; }

Stage parse_stage(const std::string& s) {
    if (s == "easy") return Stage::easy;
    if (s == "hard") return Stage::hard;
    throw ConfigError("unknown stage: " + s);
}

StageConfig StageConfig::easy_defaults() {
    StageConfig c;
    c.stage = Stage::easy;
    c.rl.rollouts_per_prompt = 8;
    return c;
}

StageConfig StageConfig::hard_defaults() {
    StageConfig c;
    c.stage = Stage::hard;
    c.rl.rollouts_per_prompt = 16;
    return c;
}

void StageConfig::validate() const {
    rl.validate();
    if (stage == Stage::easy && distractor_budget != 3)
        throw ConfigError("the easy stage needs exactly 3 distractors per question");
}

namespace {

std::string normalized(const std::string& text) { return join(normalize_tokens(text), " "); }

bool contains_equal(const std::vector<std::string>& items, const std::string& text) {
    return std::any_of(items.begin(), items.end(),
                       [&](const std::string& s) { return token_equal(s, text); });
}

std::vector<Token> clip_prompt(std::vector<Token> tokens, std::size_t max_len) {
    // Keep BOS and the most recent tokens.
    if (max_len == 0 || tokens.size() <= max_len) return tokens;
    std::vector<Token> out{tokens.front()};
    out.insert(out.end(), tokens.end() - static_cast<std::ptrdiff_t>(max_len - 1), tokens.end());
    return out;
}

std::size_t worker_count(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

std::vector<std::string> collect_distractors(const VulnSample& sample, const PolicyParams& params,
                                             const Vocab& vocab, const ReasoningDataset& pool,
                                             std::size_t j, std::size_t attempts,
                                             const RlConfig& sampling, Rng& rng) {
    if (j < 1) throw ArgumentError("distractor budget must be >= 1");
    std::vector<std::string> out;
    const auto prompt = encode_hard_prompt(vocab, sample, sampling.max_prompt_len);
    for (std::size_t a = 0; a < attempts && out.size() < j; ++a) {
        const auto traj =
            sample_response(params, prompt, sampling.temperature, sampling.max_response_len, rng);
        const std::string raw = vocab.render(traj.response_tokens);
        if (!has_valid_tags(raw)) continue;
        const std::string answer = normalized(extract_tags(raw).answer);
        if (answer.empty() || token_equal(answer, sample.ground_truth_fix) ||
            contains_equal(out, answer))
            continue;
        out.push_back(answer);
    }

    if (out.size() < j) {
        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t i : order) {
            if (out.size() == j) break;
            const auto& rs = pool.records[i];
            const std::string answer = normalized(rs.answer);
            if (rs.sample_id == sample.id || answer.empty() ||
                token_equal(answer, sample.ground_truth_fix) || contains_equal(out, answer))
                continue;
            out.push_back(answer);
        }
    }
    if (out.size() < j)
        throw ConstructionError("only " + std::to_string(out.size()) + " of " + std::to_string(j) +
                                " distractors available for " + sample.id);
    return out;
}

McqPrompt build_multiple_choice(const VulnSample& sample, const std::vector<std::string>& distractors,
                                std::uint64_t seed, const std::string& template_text) {
    if (distractors.size() != 3) throw ArgumentError("a question needs exactly 3 distractors");
    std::vector<std::string> options{distractors[0], distractors[1], distractors[2],
                                     normalized(sample.ground_truth_fix)};
    for (std::size_t a = 0; a < options.size(); ++a)
        for (std::size_t b = a + 1; b < options.size(); ++b)
            if (token_equal(options[a], options[b]))
                throw ArgumentError("duplicate options for " + sample.id);

    std::array<std::size_t, 4> perm{0, 1, 2, 3};
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(perm));

    McqPrompt mcq;
    mcq.sample_id = sample.id;
    mcq.seed = seed;
    for (std::size_t slot = 0; slot < 4; ++slot) {
        mcq.options[slot] = options[perm[slot]];
        if (perm[slot] == 3) mcq.correct_letter = static_cast<char>('A' + slot);
    }
    mcq.stem = render_template(template_text, {{"cwe_id", sample.cwe_id},
                                               {"vulnerable_code", sample.vulnerable_code},
                                               {"context", sample.context},
                                               {"option_a", mcq.options[0]},
                                               {"option_b", mcq.options[1]},
                                               {"option_c", mcq.options[2]},
                                               {"option_d", mcq.options[3]}});
    return mcq;
}

McqPrompt build_multiple_choice(const VulnSample& sample, const std::vector<std::string>& distractors,
                                std::uint64_t seed) {
    return build_multiple_choice(sample, distractors, seed,
                                 load_template(default_template_path("mcq.txt")));
}

namespace {

bool is_tag_marker(const std::string& w) {
    return w == "<think>" || w == "</think>" || w == "<answer>" || w == "</answer>";
}

std::string spaced_tags(const std::string& raw) {
    std::string out;
    out.reserve(raw.size() + 16);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '<') out += ' ';
        out += raw[i];
        if (raw[i] == '>') out += ' ';
    }
    return out;
}

bool is_letter_word(const std::string& w) {
    return w.size() == 1 && w[0] >= 'A' && w[0] <= 'D';
}

}  // namespace

std::optional<char> extract_letter(const std::string& raw) {
    for (const auto& w : normalize_tokens(spaced_tags(raw))) {
        if (is_tag_marker(w)) continue;
        if (is_letter_word(w)) return w[0];
    }
    return std::nullopt;
}

RewardBreakdown grade_mcq(const std::string& raw, const McqPrompt& prompt, const VulnSample& sample,
                          Critic* code_critic) {
    RewardBreakdown r;
    TaggedResponse tagged;
    try {
        tagged = extract_tags(raw);
    } catch (const FormatError&) {
        return r;
    }
    auto words = normalize_tokens(tagged.answer);
    if (!words.empty() && is_letter_word(words.front())) words.erase(words.begin());
    const std::string code = join(words, " ");

    const auto letter = extract_letter(raw);
    int critic = letter && *letter == prompt.correct_letter ? 1 : 0;
    if (critic == 1 && code_critic) critic = code_critic->judge(code, sample);

    r.format = 1.0;
    r.critic = critic;
    r.sim = similarity(code, sample.ground_truth_fix);
    r.acc = accuracy_reward(r.critic, r.sim);
    r.total = r.acc + r.format;
    return r;
}

std::vector<Token> encode_hard_prompt(const Vocab& vocab, const VulnSample& sample,
                                      std::size_t max_len) {
    return clip_prompt(encode_task_prompt(vocab, sample), max_len);
}

std::vector<Token> encode_mcq_prompt(const Vocab& vocab, const VulnSample& sample,
                                     const McqPrompt& mcq, std::size_t max_len) {
    std::vector<Token> out{vocab.bos()};
    for (Token t : vocab.tokenize(sample.context)) out.push_back(t);
    for (std::size_t slot = 0; slot < 4; ++slot) {
        out.push_back(vocab.letter(static_cast<char>('A' + slot)));
        for (Token t : vocab.tokenize(mcq.options[slot])) out.push_back(t);
    }
    for (Token t : vocab.tokenize(sample.vulnerable_code)) out.push_back(t);
    return clip_prompt(std::move(out), max_len);
}

namespace {

struct Scored {
    Trajectory traj;
    RewardBreakdown reward;
};

}  // namespace

StageResult run_stage(const PolicyParams& params, const VulnDataset& tasks, const StageConfig& cfg,
                      Critic& critic, const Vocab& vocab, std::uint64_t seed,
                      const ReasoningDataset* pool, std::size_t step_offset) {
    cfg.validate();
    StageResult result{params, {}, {}};
    if (cfg.steps == 0) return result;
    if (tasks.empty()) throw ArgumentError("stage needs at least one task");
    const std::size_t workers = worker_count(cfg.workers);
    const std::uint64_t stage_key = cfg.stage == Stage::easy ? 0xea5 : 0x4a2d;

    std::vector<std::vector<Token>> prompts;
    prompts.reserve(tasks.size());
    if (cfg.stage == Stage::easy) {
        if (!pool) throw ArgumentError("the easy stage needs a distractor pool");
        const std::string tmpl = load_template(cfg.mcq_template_path.empty()
                                                   ? default_template_path("mcq.txt")
                                                   : cfg.mcq_template_path);
        result.mcqs = bounded_map(tasks.size(), workers, [&](std::size_t i) {
            Rng rng = Rng::derive(seed, 0xd157, i);
            const auto d = collect_distractors(tasks.records[i], params, vocab, *pool,
                                               cfg.distractor_budget, cfg.distractor_attempts,
                                               cfg.rl, rng);
            return build_multiple_choice(tasks.records[i], d, mix64(seed ^ (0x3c9 + i)), tmpl);
        });
        for (std::size_t i = 0; i < tasks.size(); ++i)
            prompts.push_back(
                encode_mcq_prompt(vocab, tasks.records[i], result.mcqs[i], cfg.rl.max_prompt_len));
    } else {
        for (const auto& s : tasks.records)
            prompts.push_back(encode_hard_prompt(vocab, s, cfg.rl.max_prompt_len));
    }

    const PolicyParams reference = params;
    const std::size_t n = cfg.rl.rollouts_per_prompt;
    Critic* code_critic = cfg.mcq_code_critic ? &critic : nullptr;

    for (std::size_t s = 0; s < cfg.steps; ++s) {
        const std::size_t step = step_offset + s + 1;
        const std::uint64_t step_seed = Rng::derive(seed, stage_key, step).next();
        Rng pick(step_seed);
        std::vector<std::size_t> batch(cfg.rl.batch_size);
        for (auto& b : batch) b = pick.below(tasks.size());

        const PolicyParams& current = result.params;
        auto scored = bounded_map(batch.size() * n, workers, [&](std::size_t k) {
            const std::size_t b = k / n, r = k % n;
            Rng rng = Rng::derive(step_seed, b, r);
            const std::size_t task = batch[b];
            Scored out;
            out.traj = sample_response(current, prompts[task], cfg.rl.temperature,
                                       cfg.rl.max_response_len, rng);
            annotate_trajectory(out.traj, reference);
            const std::string raw = vocab.render(out.traj.response_tokens);
            out.reward = cfg.stage == Stage::easy
                             ? grade_mcq(raw, result.mcqs[task], tasks.records[task], code_critic)
                             : total_reward(raw, tasks.records[task], critic);
            out.traj.terminal_reward = out.reward.total;
            return out;
        });

        std::vector<RolloutGroup> groups(batch.size());
        std::size_t correct = 0;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            auto& g = groups[b];
            g.prompt_id = tasks.records[batch[b]].id;
            for (std::size_t r = 0; r < n; ++r) {
                auto& sc = scored[b * n + r];
                correct += static_cast<std::size_t>(sc.reward.critic);
                g.trajectories.push_back(std::move(sc.traj));
                g.rewards.push_back(sc.reward);
            }
            compute_advantages(g, cfg.rl);
        }

        auto [next, stats] = policy_update(result.params, groups, cfg.rl);
        result.params = std::move(next);

        LogRow row;
        row.step = step;
        row.stage = to_string(cfg.stage);
        row.mean_shaped_reward = stats.mean_shaped_reward;
        row.mean_terminal_reward = stats.mean_terminal_reward;
        row.mean_response_length = stats.mean_response_length;
        row.mean_kl = stats.mean_kl;
        row.format_valid_rate = stats.format_valid_rate;
        if (cfg.stage == Stage::easy)
            row.mcq_accuracy = static_cast<double>(correct) / static_cast<double>(batch.size() * n);
        row.objective = stats.objective;
        result.log.append(std::move(row));
    }
    return result;
}

}  // namespace currl
