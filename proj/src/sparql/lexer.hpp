#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace kbqa::sparql {

/// One lexical token with its byte offset in the input.
struct Token {
    enum class Kind {
        LBrace,
        RBrace,
        LParen,
        RParen,
        Dot,
        Slash,
        Caret,
        NotEq,
        Star,
        Variable,      // text without the leading '?'
        PrefixedName,  // prefix and local part
        Word,          // bare keyword or placeholder
        Integer,
        End,
    };

    Kind kind = Kind::End;
    std::string text;
    std::string prefix;
    std::size_t offset = 0;
};

/// Hand-written scanner for the restricted query grammar. Prefixed-name
/// locals may contain dots (ns:film.actor.film, ns:m.05zppz); a dot that
/// would end the local is backed off and emitted as a separator, so
/// "wd:Q1. ?x0" and "wd:Q1 . ?x0" tokenize identically.
class Lexer {
  public:
    explicit Lexer(std::string_view input);

    const Token& peek();
    Token next();

  private:
    Token lex();

    std::string_view input_;
    std::size_t pos_ = 0;
    std::optional<Token> lookahead_;
};

}  // namespace kbqa::sparql
