#include "currl/vocab.hpp"

#include <charconv>

#include "currl/error.hpp"
#include "currl/text.hpp"

namespace currl {

namespace {

constexpr const char* kTags[] = {"<think>", "</think>", "<answer>", "</answer>"};

}  // namespace

Vocab::Vocab(std::size_t content_size) : content_size_(content_size) {
    if (content_size < 2) throw ArgumentError("vocabulary needs at least two content tokens");
}

Token Vocab::letter(char c) const {
    if (c < 'A' || c > 'D') throw ArgumentError(std::string("not an option letter: ") + c);
    return static_cast<Token>(content_size_) + (c - 'A');
}

bool Vocab::is_letter(Token t) const noexcept {
    return t >= static_cast<Token>(content_size_) && t < static_cast<Token>(content_size_) + 4;
}

std::optional<char> Vocab::letter_of(Token t) const noexcept {
    if (!is_letter(t)) return std::nullopt;
    return static_cast<char>('A' + (t - static_cast<Token>(content_size_)));
}

std::optional<Token> Vocab::find(std::string_view word) const {
    for (int i = 0; i < 4; ++i)
        if (word == kTags[i]) return think_open() + i;
    if (word.size() == 1 && word[0] >= 'A' && word[0] <= 'D') return letter(word[0]);
    if (word.empty() || word.size() > 6) return std::nullopt;
    if (word.size() > 1 && word[0] == '0') return std::nullopt;
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
    if (ec != std::errc{} || ptr != word.data() + word.size()) return std::nullopt;
    if (value >= content_size_) return std::nullopt;
    return static_cast<Token>(value);
}

std::string Vocab::word(Token t) const {
    if (is_content(t)) return std::to_string(t);
    if (auto c = letter_of(t)) return std::string(1, *c);
    if (t == bos()) return "<s>";
    if (t == eos()) return "</s>";
    if (t >= think_open() && t <= answer_close()) return kTags[t - think_open()];
    throw ArgumentError("token id out of range: " + std::to_string(t));
}

std::vector<Token> Vocab::tokenize(std::string_view text) const {
    std::string spaced;
    spaced.reserve(text.size() + 16);
    std::size_t i = 0;
    while (i < text.size()) {
        bool matched = false;
        for (const char* tag : kTags) {
            std::string_view t(tag);
            if (text.substr(i, t.size()) == t) {
                spaced += ' ';
                spaced += t;
                spaced += ' ';
                i += t.size();
                matched = true;
                break;
            }
        }
        if (!matched) spaced += text[i++];
    }
    std::vector<Token> out;
    for (const auto& w : normalize_tokens(spaced))
        if (auto id = find(w)) out.push_back(*id);
    return out;
}

std::string Vocab::render(const std::vector<Token>& tokens) const {
    std::string out;
    for (Token t : tokens) {
        if (t == bos() || t == eos()) continue;
        if (!out.empty()) out += ' ';
        out += word(t);
    }
    return out;
}

}  // namespace currl
