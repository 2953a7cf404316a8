#include "currl/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "currl/error.hpp"
#include "currl/rng.hpp"
#include "currl/text.hpp"

namespace currl {

using ojson = nlohmann::ordered_json;

const char* to_string(Split s) noexcept {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "train";
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "valid") return Split::valid;
    if (s == "test") return Split::test;
    throw ArgumentError("unknown split: " + s);
}

const char* to_string(FilterStatus s) noexcept {
    switch (s) {
        case FilterStatus::unfiltered: return "unfiltered";
        case FilterStatus::kept: return "kept";
        case FilterStatus::rejected_model: return "rejected_model";
        case FilterStatus::rejected_rule_1: return "rejected_rule_1";
        case FilterStatus::rejected_rule_2: return "rejected_rule_2";
        case FilterStatus::rejected_rule_3: return "rejected_rule_3";
    }
    return "unfiltered";
}

FilterStatus parse_filter_status(const std::string& s) {
    static const std::pair<const char*, FilterStatus> table[] = {
        {"unfiltered", FilterStatus::unfiltered},
        {"kept", FilterStatus::kept},
        {"rejected_model", FilterStatus::rejected_model},
        {"rejected_rule_1", FilterStatus::rejected_rule_1},
        {"rejected_rule_2", FilterStatus::rejected_rule_2},
        {"rejected_rule_3", FilterStatus::rejected_rule_3},
    };
    for (const auto& [name, status] : table)
        if (s == name) return status;
    throw ArgumentError("unknown filter_status: " + s);
}

std::string render_tagged(const std::string& think, const std::string& answer) {
    return "<think>\n" + think + "\n</think>\n<answer>\n" + answer + "\n</answer>";
}

void settle(ReasoningSample& rs, FilterStatus terminal) {
    if (rs.filter_status != FilterStatus::unfiltered)
        throw StateError("record " + rs.sample_id + " already settled as " +
                         to_string(rs.filter_status));
    if (terminal == FilterStatus::unfiltered)
        throw ArgumentError("settle() needs a terminal status");
    rs.filter_status = terminal;
}

const char* to_string(DatasetTag t) noexcept {
    switch (t) {
        case DatasetTag::d_vul: return "d_vul";
        case DatasetTag::d_code: return "d_code";
        case DatasetTag::d_mixed: return "d_mixed";
        case DatasetTag::toy: return "toy";
        case DatasetTag::external: return "external";
    }
    return "external";
}

const std::string& record_id(const VulnSample& s) { return s.id; }
const std::string& record_id(const ReasoningSample& s) { return s.sample_id; }

ojson to_json(const VulnSample& s) {
    ojson j;
    j["id"] = s.id;
    j["cwe_id"] = s.cwe_id;
    j["description"] = s.description;
    j["vulnerable_code"] = s.vulnerable_code;
    j["context"] = s.context;
    j["ground_truth_fix"] = s.ground_truth_fix;
    j["split"] = to_string(s.split);
    return j;
}

ojson to_json(const ReasoningSample& s) {
    ojson j;
    j["sample_id"] = s.sample_id;
    j["think"] = s.think;
    j["answer"] = s.answer;
    j["source_model"] = s.source_model;
    j["filter_status"] = to_string(s.filter_status);
    if (!s.raw.empty() && s.raw != render_tagged(s.think, s.answer)) j["raw"] = s.raw;
    return j;
}

namespace {

std::string required_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ArgumentError(std::string("missing field \"") + key + "\"");
    if (!it->is_string()) throw ArgumentError(std::string("field \"") + key + "\" is not a string");
    return it->get<std::string>();
}

}  // namespace

VulnSample vuln_from_json(const nlohmann::json& j) {
    VulnSample s;
    s.id = required_string(j, "id");
    s.cwe_id = required_string(j, "cwe_id");
    s.description = required_string(j, "description");
    s.vulnerable_code = required_string(j, "vulnerable_code");
    s.context = j.contains("context") ? required_string(j, "context") : "";
    s.ground_truth_fix = required_string(j, "ground_truth_fix");
    s.split = parse_split(required_string(j, "split"));
    if (s.id.empty()) throw ArgumentError("empty id");
    if (s.vulnerable_code.empty()) throw ArgumentError("empty vulnerable_code");
    if (s.ground_truth_fix.empty()) throw ArgumentError("empty ground_truth_fix");
    return s;
}

ReasoningSample reasoning_from_json(const nlohmann::json& j) {
    ReasoningSample s;
    s.sample_id = required_string(j, "sample_id");
    s.think = required_string(j, "think");
    s.answer = required_string(j, "answer");
    s.source_model = required_string(j, "source_model");
    s.filter_status = parse_filter_status(required_string(j, "filter_status"));
    s.raw = j.contains("raw") ? required_string(j, "raw") : render_tagged(s.think, s.answer);
    if (s.sample_id.empty()) throw ArgumentError("empty sample_id");
    return s;
}

namespace {

template <typename Record>
Record record_from_json(const nlohmann::json& j);

template <>
VulnSample record_from_json<VulnSample>(const nlohmann::json& j) {
    return vuln_from_json(j);
}

template <>
ReasoningSample record_from_json<ReasoningSample>(const nlohmann::json& j) {
    return reasoning_from_json(j);
}

}  // namespace

template <typename Record>
Dataset<Record> parse_dataset(const std::string& jsonl, DatasetTag tag) {
    Dataset<Record> ds;
    ds.tag = tag;
    std::set<std::string> seen;
    std::istringstream in(jsonl);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) throw ParseError(lineno, "blank line");
        Record rec;
        try {
            rec = record_from_json<Record>(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lineno, e.what());
        } catch (const ArgumentError& e) {
            throw ParseError(lineno, e.what());
        }
        if (!seen.insert(record_id(rec)).second)
            throw IntegrityError("duplicate id \"" + record_id(rec) + "\"", lineno);
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

template <typename Record>
Dataset<Record> load_dataset(const std::string& path, DatasetTag tag) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto ds = parse_dataset<Record>(ss.str(), tag);
    ds.provenance = path;
    return ds;
}

template <typename Record>
std::string serialize_dataset(const Dataset<Record>& ds) {
    std::string out;
    for (const auto& rec : ds.records) {
        out += to_json(rec).dump();
        out += '\n';
    }
    return out;
}

template <typename Record>
void save_dataset(const Dataset<Record>& ds, const std::string& path) {
    write_file(path, serialize_dataset(ds));
}

template <typename Record>
Dataset<Record> mix_datasets(const Dataset<Record>& d_vul, const Dataset<Record>& d_code,
                             std::uint64_t seed) {
    std::set<std::string> ids;
    for (const auto& r : d_vul.records) ids.insert(record_id(r));
    for (const auto& r : d_code.records)
        if (ids.count(record_id(r)))
            throw IntegrityError("id \"" + record_id(r) + "\" present in both datasets");

    Dataset<Record> out;
    out.tag = DatasetTag::d_mixed;
    out.provenance = "mix(" + std::string(to_string(d_vul.tag)) + ", " + to_string(d_code.tag) +
                     ", seed=" + std::to_string(seed) + ")";
    out.records = d_vul.records;
    out.records.insert(out.records.end(), d_code.records.begin(), d_code.records.end());
    Rng rng(seed);
    rng.shuffle(std::span<Record>(out.records));
    return out;
}

#define CURRL_INSTANTIATE(Record)                                                          \
    template Dataset<Record> parse_dataset<Record>(const std::string&, DatasetTag);        \
    template Dataset<Record> load_dataset<Record>(const std::string&, DatasetTag);         \
    template std::string serialize_dataset<Record>(const Dataset<Record>&);                \
    template void save_dataset<Record>(const Dataset<Record>&, const std::string&);        \
    template Dataset<Record> mix_datasets<Record>(const Dataset<Record>&,                  \
                                                  const Dataset<Record>&, std::uint64_t);

CURRL_INSTANTIATE(VulnSample)
CURRL_INSTANTIATE(ReasoningSample)

#undef CURRL_INSTANTIATE

std::map<std::string, VulnSample> index_by_id(const VulnDataset& ds) {
    std::map<std::string, VulnSample> out;
    for (const auto& s : ds.records) out.emplace(s.id, s);
    return out;
}

std::vector<int> toy_successor(std::uint64_t seed, std::size_t vocab_size) {
    // One cycle through the non-terminal tokens, so every chain is unambiguous.
    const std::size_t m = vocab_size - 1;
    std::vector<int> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = static_cast<int>(i);
    Rng rng = Rng::derive(seed, 0x50cc);
    rng.shuffle(std::span<int>(order));
    std::vector<int> succ(m);
    for (std::size_t i = 0; i < m; ++i) succ[order[i]] = order[(i + 1) % m];
    return succ;
}

namespace {

std::string render_tokens(const std::vector<int>& toks) {
    std::vector<std::string> parts;
    parts.reserve(toks.size());
    for (int t : toks) parts.push_back(std::to_string(t));
    return join(parts, " ");
}

void check_toy_shape(std::size_t n, std::size_t vocab_size, std::size_t seq_len) {
    if (vocab_size < 4) throw ArgumentError("toy corpus needs vocab_size >= 4");
    if (seq_len < 2) throw ArgumentError("toy corpus needs seq_len >= 2");
    if (n < 1) throw ArgumentError("toy corpus needs n >= 1");
}

}  // namespace

VulnDataset generate_toy_corpus(std::uint64_t seed, std::size_t n, std::size_t vocab_size,
                                std::size_t seq_len) {
    check_toy_shape(n, vocab_size, seq_len);
    return generate_toy_corpus(seed, n, vocab_size, seq_len, toy_successor(seed, vocab_size));
}

VulnDataset generate_toy_corpus(std::uint64_t seed, std::size_t n, std::size_t vocab_size,
                                std::size_t seq_len, const std::vector<int>& successor,
                                const std::string& id_prefix) {
    check_toy_shape(n, vocab_size, seq_len);
    if (successor.size() != vocab_size - 1)
        throw ArgumentError("successor map must cover vocab_size - 1 tokens");

    static const char* const kCwes[] = {"CWE-787", "CWE-125", "CWE-190", "CWE-476"};
    const int terminal = static_cast<int>(vocab_size) - 1;

    VulnDataset ds;
    ds.tag = DatasetTag::toy;
    ds.provenance = id_prefix + "(seed=" + std::to_string(seed) + ", n=" + std::to_string(n) +
                    ", vocab=" + std::to_string(vocab_size) + ", len=" + std::to_string(seq_len) +
                    ")";
    Rng rng = Rng::derive(seed, 0xc0de);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> fix(seq_len);
        fix[0] = static_cast<int>(rng.below(vocab_size - 1));
        for (std::size_t t = 1; t + 1 < seq_len; ++t) fix[t] = successor[fix[t - 1]];
        fix[seq_len - 1] = terminal;

        std::vector<int> bad = fix;
        const std::size_t pos = rng.below(seq_len);
        int replacement = static_cast<int>(rng.below(vocab_size - 1));
        if (replacement >= fix[pos]) ++replacement;
        bad[pos] = replacement;

        VulnSample s;
        s.id = id_prefix + "-" + std::to_string(seed) + "-" + std::to_string(i);
        s.cwe_id = kCwes[i % 4];
        s.description = "token at position " + std::to_string(pos) + " is corrupted";
        s.vulnerable_code = render_tokens(bad);
        s.ground_truth_fix = render_tokens(fix);
        s.split = (i % 10 == 8) ? Split::valid : (i % 10 == 9) ? Split::test : Split::train;
        ds.records.push_back(std::move(s));
    }
    return ds;
}

std::vector<int> perturb_successor(const std::vector<int>& successor, std::size_t swaps,
                                   std::uint64_t seed) {
    const std::size_t m = successor.size();
    if (m == 0) throw ArgumentError("empty successor map");
    std::vector<int> order{0};
    while (order.size() < m) order.push_back(successor[static_cast<std::size_t>(order.back())]);
    if (order.back() < 0 || successor[static_cast<std::size_t>(order.back())] != 0)
        throw ArgumentError("successor map is not a single cycle");
    Rng rng = Rng::derive(seed, 0x5a9);
    for (std::size_t k = 0; k < swaps; ++k) std::swap(order[rng.below(m)], order[rng.below(m)]);
    std::vector<int> out(m);
    for (std::size_t i = 0; i < m; ++i)
        out[static_cast<std::size_t>(order[i])] = order[(i + 1) % m];
    return out;
}

ToySelectionSet generate_toy_selection_set(std::uint64_t seed, std::size_t n,
                                           std::size_t vocab_size, std::size_t seq_len,
                                           const std::vector<int>& successor) {
    const auto base = generate_toy_corpus(seed, n, vocab_size, seq_len, successor, "sel");
    std::vector<std::string> fixes;
    for (const auto& s : base.records) {
        bool seen = false;
        for (const auto& f : fixes) seen = seen || f == s.ground_truth_fix;
        if (!seen) fixes.push_back(s.ground_truth_fix);
    }
    if (fixes.size() < 4) throw ArgumentError("selection set needs at least 4 distinct sequences");

    ToySelectionSet out;
    out.samples.tag = DatasetTag::toy;
    out.samples.provenance = base.provenance;
    out.reasoning.tag = DatasetTag::d_code;
    out.reasoning.provenance = base.provenance;
    Rng rng = Rng::derive(seed, 0x5e1);
    for (const auto& s : base.records) {
        std::vector<std::string> options{s.ground_truth_fix};
        while (options.size() < 4) {
            const auto& cand = fixes[rng.below(fixes.size())];
            bool dup = false;
            for (const auto& o : options) dup = dup || o == cand;
            if (!dup) options.push_back(cand);
        }
        rng.shuffle(std::span<std::string>(options));
        char letter = 'A';
        std::string context;
        for (std::size_t k = 0; k < 4; ++k) {
            if (options[k] == s.ground_truth_fix) letter = static_cast<char>('A' + k);
            context += (k ? " " : "") + std::string(1, static_cast<char>('A' + k)) + " " + options[k];
        }
        VulnSample item = s;
        item.context = context;
        out.samples.records.push_back(item);

        ReasoningSample rs;
        rs.sample_id = item.id;
        rs.think = std::string(1, letter);
        rs.answer = item.ground_truth_fix;
        rs.source_model = "toy";
        rs.filter_status = FilterStatus::kept;
        out.reasoning.records.push_back(std::move(rs));
    }
    return out;
}

}  // namespace currl
