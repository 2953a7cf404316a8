#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace currl {

// One row per update step. mcq_accuracy is blank outside the easy stage.
struct LogRow {
    std::size_t step = 0;
    std::string stage;
    double mean_shaped_reward = 0.0;
    double mean_terminal_reward = 0.0;
    double mean_response_length = 0.0;
    double mean_kl = 0.0;
    double format_valid_rate = 0.0;
    std::optional<double> mcq_accuracy;
    double objective = 0.0;

    bool operator==(const LogRow&) const = default;
};

class TrainingLog {
public:
    static const std::vector<std::string>& columns();

    // Rejects a step that does not follow the previous one and any
    // non-finite value.
    void append(LogRow row);

    // Appends all rows of `other` in order.
    void extend(const TrainingLog& other);

    const std::vector<LogRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }

    std::string to_csv() const;
    static TrainingLog from_csv(const std::string& text);
    void save(const std::string& path) const;

private:
    std::vector<LogRow> rows_;
};

// Fixed-precision rendering shared by the CSV and report writers.
std::string format_real(double v);

// Mean of `field` over rows [first, first + count).
template <typename Field>
double window_mean(const TrainingLog& log, std::size_t first, std::size_t count, Field field) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = first; i < first + count && i < log.size(); ++i, ++n)
        sum += field(log.rows()[i]);
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace currl
