#include "currl/eval.hpp"

#include <cstdio>

#include "currl/curriculum.hpp"
#include "currl/error.hpp"
#include "currl/filter.hpp"
#include "currl/reward.hpp"
#include "currl/text.hpp"
#include "currl/training_log.hpp"

namespace currl {

bool exact_match(const std::string& prediction, const std::string& truth) {
    return token_equal(prediction, truth);
}

EvalReport evaluate(const std::map<std::string, std::string>& predictions, const VulnDataset& ds) {
    const auto index = index_by_id(ds);
    for (const auto& [id, _] : predictions)
        if (!index.count(id)) throw IntegrityError("prediction for unknown sample \"" + id + "\"");

    EvalReport report;
    report.total = ds.size();
    double sim_sum = 0.0;
    for (const auto& s : ds.records) {
        SampleScore score{s.id, false, 0.0};
        auto it = predictions.find(s.id);
        if (it != predictions.end()) {
            score.exact = exact_match(it->second, s.ground_truth_fix);
            score.sim = similarity(it->second, s.ground_truth_fix);
        }
        report.success += score.exact ? 1 : 0;
        sim_sum += score.sim;
        report.per_sample.push_back(std::move(score));
    }
    if (report.total > 0) {
        report.em_percent =
            100.0 * static_cast<double>(report.success) / static_cast<double>(report.total);
        report.mean_sim = sim_sum / static_cast<double>(report.total);
    }
    return report;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    j["success"] = success;
    j["em_percent"] = em_percent;
    j["mean_sim"] = mean_sim;
    j["note"] = "CodeBLEU is not computed; mean_sim (LCS token ratio) is reported instead";
    auto rows = nlohmann::ordered_json::array();
    for (const auto& s : per_sample) {
        nlohmann::ordered_json r;
        r["id"] = s.id;
        r["exact"] = s.exact;
        r["sim"] = s.sim;
        rows.push_back(std::move(r));
    }
    j["per_sample"] = std::move(rows);
    return j;
}

std::string EvalReport::to_table() const {
    char buf[256];
    std::string out = "# CodeBLEU omitted; Sim is the LCS token ratio\n";
    std::snprintf(buf, sizeof buf, "%-10s %10s\n", "metric", "value");
    out += buf;
    std::snprintf(buf, sizeof buf, "%-10s %10zu\n%-10s %10zu\n%-10s %10.2f\n%-10s %10.4f\n",
                  "total", total, "success", success, "EM (%)", em_percent, "mean Sim", mean_sim);
    out += buf;
    return out;
}

std::map<std::string, std::string> greedy_predictions(const PolicyParams& params,
                                                      const VulnDataset& ds, const Vocab& vocab,
                                                      std::size_t max_prompt_len,
                                                      std::size_t max_response_len) {
    std::map<std::string, std::string> out;
    for (const auto& s : ds.records) {
        const auto prompt = encode_hard_prompt(vocab, s, max_prompt_len);
        const std::string raw = vocab.render(greedy_response(params, prompt, max_response_len));
        std::string answer;
        if (has_valid_tags(raw)) answer = extract_tags(raw).answer;
        out[s.id] = answer;
    }
    return out;
}

}  // namespace currl
