#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace currl {

using Token = int;

// Token space of the toy policy: `content_size` code tokens rendered as
// decimal integers, the option letters A-D, then BOS, EOS and the four tag
// markers.
class Vocab {
public:
    explicit Vocab(std::size_t content_size = 16);

    std::size_t size() const noexcept { return content_size_ + 10; }
    std::size_t content_size() const noexcept { return content_size_; }

    Token letter(char c) const;  // 'A'..'D'
    Token bos() const noexcept { return static_cast<Token>(content_size_ + 4); }
    Token eos() const noexcept { return bos() + 1; }
    Token think_open() const noexcept { return bos() + 2; }
    Token think_close() const noexcept { return bos() + 3; }
    Token answer_open() const noexcept { return bos() + 4; }
    Token answer_close() const noexcept { return bos() + 5; }

    bool is_content(Token t) const noexcept { return t >= 0 && t < static_cast<Token>(content_size_); }
    bool is_letter(Token t) const noexcept;
    std::optional<char> letter_of(Token t) const noexcept;

    std::optional<Token> find(std::string_view word) const;
    std::string word(Token t) const;

    // Whitespace tokenization after isolating tag markers; words outside the
    // vocabulary are dropped.
    std::vector<Token> tokenize(std::string_view text) const;

    // Space-joined words; BOS and EOS are not rendered.
    std::string render(const std::vector<Token>& tokens) const;

private:
    std::size_t content_size_;
};

}  // namespace currl
