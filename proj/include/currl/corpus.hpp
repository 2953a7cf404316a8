#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace currl {

enum class Split { train, valid, test };

const char* to_string(Split s) noexcept;
Split parse_split(const std::string& s);

// One repair task: vulnerable code (the question), optional context, and the
// reference fix.
struct VulnSample {
    std::string id;
    std::string cwe_id;
    std::string description;
    std::string vulnerable_code;
    std::string context;
    std::string ground_truth_fix;
    Split split = Split::train;

    bool operator==(const VulnSample&) const = default;
};

enum class FilterStatus {
    unfiltered,
    kept,
    rejected_model,
    rejected_rule_1,
    rejected_rule_2,
    rejected_rule_3,
};

const char* to_string(FilterStatus s) noexcept;
FilterStatus parse_filter_status(const std::string& s);

// A generated reasoning record. `raw` is the full generator reply; it is
// serialized only when it differs from the canonical tag rendering.
struct ReasoningSample {
    std::string sample_id;
    std::string think;
    std::string answer;
    std::string source_model;
    FilterStatus filter_status = FilterStatus::unfiltered;
    std::string raw;

    bool operator==(const ReasoningSample&) const = default;
};

// "<think>\n{think}\n</think>\n<answer>\n{answer}\n</answer>"
std::string render_tagged(const std::string& think, const std::string& answer);

// Moves an unfiltered record to a terminal status; any other transition throws.
void settle(ReasoningSample& rs, FilterStatus terminal);

enum class DatasetTag { d_vul, d_code, d_mixed, toy, external };

const char* to_string(DatasetTag t) noexcept;

template <typename Record>
struct Dataset {
    DatasetTag tag = DatasetTag::external;
    std::vector<Record> records;
    std::string provenance;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
};

using VulnDataset = Dataset<VulnSample>;
using ReasoningDataset = Dataset<ReasoningSample>;

const std::string& record_id(const VulnSample& s);
const std::string& record_id(const ReasoningSample& s);

nlohmann::ordered_json to_json(const VulnSample& s);
nlohmann::ordered_json to_json(const ReasoningSample& s);
VulnSample vuln_from_json(const nlohmann::json& j);
ReasoningSample reasoning_from_json(const nlohmann::json& j);

// JSONL I/O. Loading rejects malformed lines (ParseError with the 1-based line
// number) and duplicate ids (IntegrityError citing the second occurrence).
template <typename Record>
Dataset<Record> load_dataset(const std::string& path, DatasetTag tag = DatasetTag::external);

template <typename Record>
Dataset<Record> parse_dataset(const std::string& jsonl, DatasetTag tag = DatasetTag::external);

template <typename Record>
std::string serialize_dataset(const Dataset<Record>& ds);

template <typename Record>
void save_dataset(const Dataset<Record>& ds, const std::string& path);

// Union of two datasets with disjoint ids, shuffled by `seed`. Tagged d_mixed.
template <typename Record>
Dataset<Record> mix_datasets(const Dataset<Record>& d_vul, const Dataset<Record>& d_code,
                             std::uint64_t seed);

std::map<std::string, VulnSample> index_by_id(const VulnDataset& ds);

// Synthetic repair corpus. Fixes are chains over a seeded successor cycle on
// tokens [0, vocab_size - 1), terminated by the token vocab_size - 1; the
// vulnerable copy has exactly one token replaced.
VulnDataset generate_toy_corpus(std::uint64_t seed, std::size_t n, std::size_t vocab_size,
                                std::size_t seq_len);

// Same, with an explicit successor map over [0, vocab_size - 1).
VulnDataset generate_toy_corpus(std::uint64_t seed, std::size_t n, std::size_t vocab_size,
                                std::size_t seq_len, const std::vector<int>& successor,
                                const std::string& id_prefix = "toy");

// Successor map used by generate_toy_corpus for a given seed and vocabulary.
std::vector<int> toy_successor(std::uint64_t seed, std::size_t vocab_size);

// A related cycle: `swaps` random position swaps applied to the cycle order of
// `successor`, so most transitions survive and a few change.
std::vector<int> perturb_successor(const std::vector<int>& successor, std::size_t swaps,
                                   std::uint64_t seed);

// Toy stand-in for the algorithmic reasoning set: selection items whose
// context lists four lettered candidate sequences. The reasoning names the
// letter and the answer is the correct sequence. Tagged d_code.
struct ToySelectionSet {
    VulnDataset samples;
    ReasoningDataset reasoning;
};

ToySelectionSet generate_toy_selection_set(std::uint64_t seed, std::size_t n,
                                           std::size_t vocab_size, std::size_t seq_len,
                                           const std::vector<int>& successor);

}  // namespace currl
