#include "currl/training_log.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "currl/error.hpp"
#include "currl/text.hpp"

namespace currl {

const std::vector<std::string>& TrainingLog::columns() {
    static const std::vector<std::string> cols{
        "step",          "stage",   "mean_shaped_reward", "mean_terminal_reward",
        "mean_response_length", "mean_kl", "format_valid_rate", "mcq_accuracy",
        "objective"};
    return cols;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void TrainingLog::append(LogRow row) {
    if (!rows_.empty() && row.step <= rows_.back().step)
        throw StateError("log step " + std::to_string(row.step) + " does not follow step " +
                         std::to_string(rows_.back().step));
    const double values[] = {row.mean_shaped_reward, row.mean_terminal_reward,
                             row.mean_response_length, row.mean_kl, row.format_valid_rate,
                             row.mcq_accuracy.value_or(0.0), row.objective};
    for (double v : values)
        if (!std::isfinite(v))
            throw NumericError("non-finite value in log row for step " + std::to_string(row.step));
    rows_.push_back(std::move(row));
}

void TrainingLog::extend(const TrainingLog& other) {
    for (const auto& r : other.rows_) append(r);
}

std::string TrainingLog::to_csv() const {
    std::string out = join(columns(), ",") + "\n";
    for (const auto& r : rows_) {
        out += std::to_string(r.step) + "," + r.stage + "," + format_real(r.mean_shaped_reward) +
               "," + format_real(r.mean_terminal_reward) + "," +
               format_real(r.mean_response_length) + "," + format_real(r.mean_kl) + "," +
               format_real(r.format_valid_rate) + "," +
               (r.mcq_accuracy ? format_real(*r.mcq_accuracy) : std::string()) + "," +
               format_real(r.objective) + "\n";
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_real(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "not a number: \"" + s + "\"");
    }
}

}  // namespace

TrainingLog TrainingLog::from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != columns())
        throw ParseError(1, "unexpected training log header");
    TrainingLog log;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != columns().size())
            throw ParseError(lineno, "expected " + std::to_string(columns().size()) + " cells");
        LogRow r;
        r.step = static_cast<std::size_t>(parse_real(c[0], lineno));
        r.stage = c[1];
        r.mean_shaped_reward = parse_real(c[2], lineno);
        r.mean_terminal_reward = parse_real(c[3], lineno);
        r.mean_response_length = parse_real(c[4], lineno);
        r.mean_kl = parse_real(c[5], lineno);
        r.format_valid_rate = parse_real(c[6], lineno);
        if (!c[7].empty()) r.mcq_accuracy = parse_real(c[7], lineno);
        r.objective = parse_real(c[8], lineno);
        log.append(std::move(r));
    }
    return log;
}

void TrainingLog::save(const std::string& path) const { write_file(path, to_csv()); }

}  // namespace currl
