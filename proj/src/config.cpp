#include "currl/config.hpp"

#include <exception>
#include <set>

#include "currl/error.hpp"
#include "currl/text.hpp"

namespace currl {

namespace {

using ojson = nlohmann::ordered_json;

ojson rl_to_json(const RlConfig& c) {
    ojson j;
    j["clip_epsilon"] = c.clip_epsilon;
    j["kl_beta"] = c.kl_beta;
    j["learning_rate"] = c.learning_rate;
    j["rollouts_per_prompt"] = c.rollouts_per_prompt;
    j["batch_size"] = c.batch_size;
    j["temperature"] = c.temperature;
    j["max_prompt_len"] = c.max_prompt_len;
    j["max_response_len"] = c.max_response_len;
    j["kl_in_reward"] = c.kl_in_reward;
    j["kl_in_loss"] = c.kl_in_loss;
    j["kl_tail_sum"] = c.kl_tail_sum;
    j["std_floor"] = c.std_floor;
    return j;
}

ojson stage_to_json(const StageConfig& c) {
    ojson j;
    j["steps"] = c.steps;
    j["distractor_budget"] = c.distractor_budget;
    j["distractor_attempts"] = c.distractor_attempts;
    j["mcq_template"] = c.mcq_template_path;
    j["mcq_code_critic"] = c.mcq_code_critic;
    j["workers"] = c.workers;
    j["rl"] = rl_to_json(c.rl);
    return j;
}

// Reads the keys of one JSON object, rejecting any not claimed by a reader.
class Section {
public:
    Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("config section \"" + name_ + "\" is not an object");
    }
    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("unknown config key \"" + name_ + "." + it.key() + "\"");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config key \"" + name_ + "." + key + "\" has the wrong type");
        }
    }

    const nlohmann::json* sub(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string path(const char* key) const { return name_ + "." + key; }

private:
    const nlohmann::json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

void rl_from_json(const nlohmann::json& j, const std::string& name, RlConfig& c) {
    Section s(j, name);
    s.get("clip_epsilon", c.clip_epsilon);
    s.get("kl_beta", c.kl_beta);
    s.get("learning_rate", c.learning_rate);
    s.get("rollouts_per_prompt", c.rollouts_per_prompt);
    s.get("batch_size", c.batch_size);
    s.get("temperature", c.temperature);
    s.get("max_prompt_len", c.max_prompt_len);
    s.get("max_response_len", c.max_response_len);
    s.get("kl_in_reward", c.kl_in_reward);
    s.get("kl_in_loss", c.kl_in_loss);
    s.get("kl_tail_sum", c.kl_tail_sum);
    s.get("std_floor", c.std_floor);
}

void stage_from_json(const nlohmann::json& j, const std::string& name, StageConfig& c) {
    Section s(j, name);
    s.get("steps", c.steps);
    s.get("distractor_budget", c.distractor_budget);
    s.get("distractor_attempts", c.distractor_attempts);
    s.get("mcq_template", c.mcq_template_path);
    s.get("mcq_code_critic", c.mcq_code_critic);
    s.get("workers", c.workers);
    if (auto* rl = s.sub("rl")) rl_from_json(*rl, s.path("rl"), c.rl);
}

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.sft.epochs = 3;
    c.sft.learning_rate = 1e-4;
    c.sft.batch_size = 16;
    c.easy.steps = 125;
    c.hard.steps = 125;
    return c;
}

RunConfig RunConfig::toy_profile() {
    RunConfig c = defaults();
    // Inputs resolve to <run_dir>/toy/ as written by toygen.
    c.paths = PathsConfig{};
    c.gateway.mock = true;
    c.gateway.model_id = "mock";
    c.filter.min_reasoning_tokens = 1;
    c.critic_backend = CriticBackend::oracle;
    c.policy.content_vocab = 16;
    c.policy.context_order = 20;
    c.sft.epochs = 10;
    c.sft.learning_rate = 0.5;
    c.sft.batch_size = 16;
    for (StageConfig* st : {&c.easy, &c.hard}) {
        st->steps = 250;
        st->rl.learning_rate = 20.0;
        st->rl.max_prompt_len = 128;
        st->rl.max_response_len = 40;
    }
    c.eval.max_response_len = 40;
    return c;
}

nlohmann::ordered_json RunConfig::to_json() const {
    ojson j;
    j["seed"] = seed;
    j["paths"] = {{"tasks", paths.tasks},
                  {"sft_samples", paths.sft_samples},
                  {"code_samples", paths.code_samples},
                  {"code_reasoning", paths.code_reasoning},
                  {"checkpoint", paths.checkpoint},
                  {"run_dir", paths.run_dir}};
    j["gateway"] = {{"url", gateway.url},
                    {"model_id", gateway.model_id},
                    {"mock", gateway.mock},
                    {"max_retries", gateway.max_retries},
                    {"parallelism", gateway.parallelism},
                    {"backoff_ms", gateway.backoff.count()},
                    {"timeout_s", gateway.timeout.count()}};
    j["rac"] = {{"template", rac.template_path},
                {"model_id", rac.model_id},
                {"temperature", rac.temperature},
                {"max_tokens", rac.max_tokens},
                {"attempts", rac.attempts}};
    j["filter"] = {{"min_reasoning_tokens", filter.min_reasoning_tokens},
                   {"judge_template", filter.judge_template_path},
                   {"judge_model_id", filter.judge_model_id},
                   {"judge_temperature", filter.judge_temperature}};
    j["reward"] = {{"critic_backend", to_string(critic_backend)},
                   {"critic_template", critic.template_path},
                   {"critic_model_id", critic.model_id},
                   {"critic_temperature", critic.temperature}};
    j["policy"] = {{"content_vocab", policy.content_vocab},
                   {"context_order", policy.context_order}};
    j["sft"] = {{"epochs", sft.epochs},
                {"learning_rate", sft.learning_rate},
                {"batch_size", sft.batch_size}};
    j["easy"] = stage_to_json(easy);
    j["hard"] = stage_to_json(hard);
    j["eval"] = {{"split", eval.split}, {"max_response_len", eval.max_response_len}};
    j["toy"] = {{"tasks", toy.tasks},
                {"seq_len", toy.seq_len},
                {"code_items", toy.code_items},
                {"domain_swaps", toy.domain_swaps}};
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, RunConfig c) {
    Section root(j, "config");
    root.get("seed", c.seed);
    if (auto* p = root.sub("paths")) {
        Section s(*p, "paths");
        s.get("tasks", c.paths.tasks);
        s.get("sft_samples", c.paths.sft_samples);
        s.get("code_samples", c.paths.code_samples);
        s.get("code_reasoning", c.paths.code_reasoning);
        s.get("checkpoint", c.paths.checkpoint);
        s.get("run_dir", c.paths.run_dir);
    }
    if (auto* p = root.sub("gateway")) {
        Section s(*p, "gateway");
        s.get("url", c.gateway.url);
        s.get("model_id", c.gateway.model_id);
        s.get("mock", c.gateway.mock);
        s.get("max_retries", c.gateway.max_retries);
        s.get("parallelism", c.gateway.parallelism);
        long long backoff = c.gateway.backoff.count(), timeout = c.gateway.timeout.count();
        s.get("backoff_ms", backoff);
        s.get("timeout_s", timeout);
        c.gateway.backoff = std::chrono::milliseconds(backoff);
        c.gateway.timeout = std::chrono::seconds(timeout);
    }
    if (auto* p = root.sub("rac")) {
        Section s(*p, "rac");
        s.get("template", c.rac.template_path);
        s.get("model_id", c.rac.model_id);
        s.get("temperature", c.rac.temperature);
        s.get("max_tokens", c.rac.max_tokens);
        s.get("attempts", c.rac.attempts);
    }
    if (auto* p = root.sub("filter")) {
        Section s(*p, "filter");
        s.get("min_reasoning_tokens", c.filter.min_reasoning_tokens);
        s.get("judge_template", c.filter.judge_template_path);
        s.get("judge_model_id", c.filter.judge_model_id);
        s.get("judge_temperature", c.filter.judge_temperature);
    }
    if (auto* p = root.sub("reward")) {
        Section s(*p, "reward");
        std::string backend = to_string(c.critic_backend);
        s.get("critic_backend", backend);
        c.critic_backend = parse_critic_backend(backend);
        s.get("critic_template", c.critic.template_path);
        s.get("critic_model_id", c.critic.model_id);
        s.get("critic_temperature", c.critic.temperature);
    }
    if (auto* p = root.sub("policy")) {
        Section s(*p, "policy");
        s.get("content_vocab", c.policy.content_vocab);
        s.get("context_order", c.policy.context_order);
    }
    if (auto* p = root.sub("sft")) {
        Section s(*p, "sft");
        s.get("epochs", c.sft.epochs);
        s.get("learning_rate", c.sft.learning_rate);
        s.get("batch_size", c.sft.batch_size);
    }
    if (auto* p = root.sub("easy")) stage_from_json(*p, "easy", c.easy);
    if (auto* p = root.sub("hard")) stage_from_json(*p, "hard", c.hard);
    if (auto* p = root.sub("eval")) {
        Section s(*p, "eval");
        s.get("split", c.eval.split);
        s.get("max_response_len", c.eval.max_response_len);
    }
    if (auto* p = root.sub("toy")) {
        Section s(*p, "toy");
        s.get("tasks", c.toy.tasks);
        s.get("seq_len", c.toy.seq_len);
        s.get("code_items", c.toy.code_items);
        s.get("domain_swaps", c.toy.domain_swaps);
    }
    c.easy.stage = Stage::easy;
    c.hard.stage = Stage::hard;
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    // A "profile" key picks the base the remaining keys are laid over.
    RunConfig base = defaults();
    if (j.is_object() && j.contains("profile")) {
        const auto profile = j["profile"].is_string() ? j["profile"].get<std::string>() : "";
        if (profile == "toy")
            base = toy_profile();
        else if (profile != "default")
            throw ConfigError("unknown profile \"" + profile + "\"");
        j.erase("profile");
    }
    return from_json(j, base);
}

void RunConfig::save(const std::string& path) const { write_file(path, to_json().dump(2) + "\n"); }

void RunConfig::validate() const {
    if (policy.content_vocab < 4) throw ConfigError("policy.content_vocab must be >= 4");
    if (policy.context_order < 1) throw ConfigError("policy.context_order must be >= 1");
    if (sft.batch_size < 1) throw ConfigError("sft.batch_size must be >= 1");
    if (rac.attempts < 1) throw ConfigError("rac.attempts must be >= 1");
    if (eval.max_response_len < 1) throw ConfigError("eval.max_response_len must be >= 1");
    parse_split(eval.split);
    easy.validate();
    hard.validate();
}

}  // namespace currl
