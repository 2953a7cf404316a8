#include "currl/rac.hpp"

#include <optional>

#include "currl/concurrency.hpp"
#include "currl/error.hpp"
#include "currl/filter.hpp"
#include "currl/templates.hpp"
#include "currl/text.hpp"

namespace currl {

RacPrompt build_rac_prompt(const VulnSample& sample, const std::string& template_path) {
    if (trim(sample.ground_truth_fix).empty())
        throw ArgumentError("sample " + sample.id + " has no ground-truth fix to verify against");
    if (sample.vulnerable_code.empty() || sample.cwe_id.empty() || sample.description.empty())
        throw ArgumentError("sample " + sample.id + " is missing required fields");

    const auto sections = split_sections(load_template(
        template_path.empty() ? default_template_path("rac.txt") : template_path));
    for (const char* name : {"instructions", "guidance", "specification"})
        if (!sections.count(name))
            throw ConfigError(std::string("RAC template lacks section [[") + name + "]]");

    const TemplateVars vars = {
        {"cwe_id", sample.cwe_id},
        {"description", sample.description},
        {"vulnerable_code", sample.vulnerable_code},
        {"context", sample.context},
        {"ground_truth_fix", sample.ground_truth_fix},
    };
    RacPrompt p;
    p.instructions = trim(render_template(sections.at("instructions"), vars));
    p.guidance = trim(render_template(sections.at("guidance"), vars));
    p.specification = trim(render_template(sections.at("specification"), vars));
    p.rendered = p.instructions + "\n\n" + p.guidance + "\n\n" + p.specification + "\n";
    return p;
}

ReasoningSample generate_reasoning(const VulnSample& sample, Gateway& gw,
                                   const RacOptions& options) {
    if (options.attempts < 1) throw ArgumentError("RAC needs at least one attempt");
    const RacPrompt prompt = build_rac_prompt(sample, options.template_path);

    ChatRequest req;
    req.model_id = options.model_id;
    req.temperature = options.temperature;
    req.max_tokens = options.max_tokens;
    req.messages.push_back({Role::user, prompt.rendered});

    std::string last_raw;
    for (std::size_t attempt = 0; attempt < options.attempts; ++attempt) {
        last_raw = gw.complete(req).content;
        try {
            const TaggedResponse tagged = extract_tags(last_raw);
            ReasoningSample rs;
            rs.sample_id = sample.id;
            rs.think = tagged.think;
            rs.answer = tagged.answer;
            rs.source_model = options.model_id;
            rs.raw = last_raw;
            return rs;
        } catch (const FormatError&) {
        }
    }
    throw GenerationError("no tagged reasoning for " + sample.id + " after " +
                              std::to_string(options.attempts) + " attempts",
                          last_raw);
}

RacBatchResult generate_reasoning_batch(const VulnDataset& samples, Gateway& gw,
                                        const RacOptions& options) {
    using Outcome = std::pair<std::optional<ReasoningSample>, std::string>;
    const auto outcomes =
        bounded_map(samples.records.size(), gw.parallelism(), [&](std::size_t i) -> Outcome {
            try {
                return {generate_reasoning(samples.records[i], gw, options), {}};
            } catch (const GenerationError& e) {
                return {std::nullopt, e.what()};
            }
        });

    RacBatchResult out;
    out.generated.tag = DatasetTag::external;
    out.generated.provenance = "rac(" + samples.provenance + ")";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].first)
            out.generated.records.push_back(*outcomes[i].first);
        else
            out.failures.emplace_back(samples.records[i].id, outcomes[i].second);
    }
    return out;
}

}  // namespace currl
