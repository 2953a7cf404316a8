#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "currl/policy.hpp"
#include "currl/rng.hpp"
#include "currl/vocab.hpp"

namespace testing {

inline currl::PolicyParams random_policy(const currl::Vocab& vocab, std::size_t order,
                                         currl::Rng& rng, double scale = 0.5) {
    auto p = currl::make_policy(vocab, order);
    for (auto& w : p.theta) w = scale * (2.0 * rng.uniform() - 1.0);
    return p;
}

inline std::vector<currl::Token> random_tokens(std::size_t n, std::size_t vocab, currl::Rng& rng) {
    std::vector<currl::Token> out(n);
    for (auto& t : out) t = static_cast<currl::Token>(rng.below(vocab));
    return out;
}

// Central differences of f around theta, one coordinate at a time.
inline std::vector<double> numeric_gradient(const std::function<double(const currl::PolicyParams&)>& f,
                                            currl::PolicyParams p, double h = 1e-6) {
    std::vector<double> g(p.theta.size());
    for (std::size_t i = 0; i < p.theta.size(); ++i) {
        const double w = p.theta[i];
        p.theta[i] = w + h;
        const double up = f(p);
        p.theta[i] = w - h;
        const double down = f(p);
        p.theta[i] = w;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

// max_i |a_i - b_i| / max(|a|_inf, |b|_inf); 0 when both vanish.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    }
    return scale == 0.0 ? 0.0 : diff / scale;
}

// LCS by exhaustive subsequence search; only for short inputs.
template <typename T>
std::size_t brute_lcs(const std::vector<T>& a, const std::vector<T>& b) {
    std::size_t best = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << a.size()); ++mask) {
        std::vector<T> sub;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask >> i & 1) sub.push_back(a[i]);
        std::size_t j = 0;
        for (std::size_t i = 0; i < b.size() && j < sub.size(); ++i)
            if (b[i] == sub[j]) ++j;
        if (j == sub.size()) best = std::max(best, sub.size());
    }
    return best;
}

}  // namespace testing
