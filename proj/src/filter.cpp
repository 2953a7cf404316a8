#include "currl/filter.hpp"

#include <vector>

#include "currl/concurrency.hpp"
#include "currl/error.hpp"
#include "currl/templates.hpp"
#include "currl/text.hpp"

namespace currl {

namespace {

std::vector<std::size_t> find_all(const std::string& text, const std::string& needle) {
    std::vector<std::size_t> out;
    for (auto pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        out.push_back(pos);
    return out;
}

}  // namespace

TaggedResponse extract_tags(const std::string& text) {
    const auto think_open = find_all(text, "<think>");
    const auto think_close = find_all(text, "</think>");
    const auto answer_open = find_all(text, "<answer>");
    const auto answer_close = find_all(text, "</answer>");

    if (think_open.empty()) throw FormatError(TagViolation::missing_think);
    if (think_open.size() > 1 || think_close.size() > 1)
        throw FormatError(TagViolation::duplicate_think);
    if (think_close.empty()) throw FormatError(TagViolation::unclosed_think);
    if (answer_open.empty()) throw FormatError(TagViolation::missing_answer);
    if (answer_open.size() > 1 || answer_close.size() > 1)
        throw FormatError(TagViolation::duplicate_answer);
    if (answer_close.empty()) throw FormatError(TagViolation::unclosed_answer);

    const std::size_t t0 = think_open[0], t1 = think_close[0];
    const std::size_t a0 = answer_open[0], a1 = answer_close[0];
    if (!(t0 < t1 && t1 < a0 && a0 < a1)) throw FormatError(TagViolation::out_of_order);

    TaggedResponse r;
    r.think = trim(std::string_view(text).substr(t0 + 7, t1 - t0 - 7));
    r.answer = trim(std::string_view(text).substr(a0 + 8, a1 - a0 - 8));
    r.raw = text;
    return r;
}

bool has_valid_tags(const std::string& text) noexcept {
    try {
        extract_tags(text);
        return true;
    } catch (const FormatError&) {
        return false;
    }
}

const char* to_string(FilterReason r) noexcept {
    switch (r) {
        case FilterReason::pass: return "pass";
        case FilterReason::model_rejected: return "model_rejected";
        case FilterReason::rule_wrong_answer: return "rule_wrong_answer";
        case FilterReason::rule_no_reasoning: return "rule_no_reasoning";
        case FilterReason::rule_bad_format: return "rule_bad_format";
    }
    return "pass";
}

FilterStatus status_for(FilterReason r) noexcept {
    switch (r) {
        case FilterReason::pass: return FilterStatus::kept;
        case FilterReason::model_rejected: return FilterStatus::rejected_model;
        case FilterReason::rule_wrong_answer: return FilterStatus::rejected_rule_1;
        case FilterReason::rule_no_reasoning: return FilterStatus::rejected_rule_2;
        case FilterReason::rule_bad_format: return FilterStatus::rejected_rule_3;
    }
    return FilterStatus::kept;
}

FilterVerdict model_filter(const ReasoningSample& rs, const VulnSample& sample, Gateway& gw,
                           const FilterOptions& options) {
    if (rs.filter_status != FilterStatus::unfiltered)
        throw StateError("model_filter needs an unfiltered record: " + rs.sample_id);
    const std::string path = options.judge_template_path.empty()
                                 ? default_template_path("judge.txt")
                                 : options.judge_template_path;
    ChatRequest req;
    req.model_id = options.judge_model_id;
    req.temperature = options.judge_temperature;
    req.max_tokens = 16;
    req.messages.push_back({Role::user, render_template(load_template(path),
                                                        {{"cwe_id", sample.cwe_id},
                                                         {"description", sample.description},
                                                         {"reasoning", rs.think}})});
    const std::string reply = to_lower(trim(gw.complete(req).content));
    if (starts_with(reply, "yes")) return FilterVerdict::pass();
    if (starts_with(reply, "no")) return FilterVerdict::reject(FilterReason::model_rejected);
    throw ProtocolError("judge reply is neither yes nor no: \"" + reply + "\"");
}

FilterVerdict rule_filter(const ReasoningSample& rs, const VulnSample& sample,
                          const FilterOptions& options) {
    if (!token_equal(rs.answer, sample.ground_truth_fix))
        return FilterVerdict::reject(FilterReason::rule_wrong_answer);
    const auto steps = normalize_tokens(rs.think);
    if (steps.empty() || steps.size() < options.min_reasoning_tokens)
        return FilterVerdict::reject(FilterReason::rule_no_reasoning);
    const std::string& raw = rs.raw.empty() ? render_tagged(rs.think, rs.answer) : rs.raw;
    if (!has_valid_tags(raw)) return FilterVerdict::reject(FilterReason::rule_bad_format);
    return FilterVerdict::pass();
}

void FilterStats::count(FilterReason r) {
    ++total;
    switch (r) {
        case FilterReason::pass: ++kept; break;
        case FilterReason::model_rejected: ++model_rejected; break;
        case FilterReason::rule_wrong_answer: ++rule_wrong_answer; break;
        case FilterReason::rule_no_reasoning: ++rule_no_reasoning; break;
        case FilterReason::rule_bad_format: ++rule_bad_format; break;
    }
}

nlohmann::ordered_json FilterStats::to_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    j["kept"] = kept;
    j["model_rejected"] = model_rejected;
    j["rule_wrong_answer"] = rule_wrong_answer;
    j["rule_no_reasoning"] = rule_no_reasoning;
    j["rule_bad_format"] = rule_bad_format;
    return j;
}

FilterResult filter_dataset(const ReasoningDataset& ds, const VulnDataset& samples, Gateway& gw,
                            const FilterOptions& options) {
    const auto index = index_by_id(samples);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& rs = ds.records[i];
        if (!index.count(rs.sample_id))
            throw IntegrityError("reasoning record " + std::to_string(i + 1) +
                                 " references unknown sample \"" + rs.sample_id + "\"");
        if (rs.filter_status != FilterStatus::unfiltered)
            throw StateError("record for " + rs.sample_id + " is already filtered");
    }

    const auto verdicts = bounded_map(ds.records.size(), gw.parallelism(), [&](std::size_t i) {
        const auto& rs = ds.records[i];
        const auto& sample = index.at(rs.sample_id);
        FilterVerdict v = model_filter(rs, sample, gw, options);
        if (v.kept) v = rule_filter(rs, sample, options);
        return v;
    });

    FilterResult out;
    out.kept.tag = DatasetTag::d_vul;
    out.kept.provenance = "filter(" + ds.provenance + ")";
    out.rejected.tag = ds.tag;
    out.rejected.provenance = "rejected(" + ds.provenance + ")";
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        ReasoningSample rs = ds.records[i];
        settle(rs, status_for(verdicts[i].reason));
        out.stats.count(verdicts[i].reason);
        (verdicts[i].kept ? out.kept : out.rejected).records.push_back(std::move(rs));
    }
    return out;
}

}  // namespace currl
