#include "lexer.hpp"

#include <cctype>

#include "kbqa/sparql/parser.hpp"

namespace kbqa::sparql {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_local_char(char c) { return is_word_char(c) || c == '.'; }

}  // namespace

Lexer::Lexer(std::string_view input) : input_(input) {}

const Token& Lexer::peek() {
    if (!lookahead_) lookahead_ = lex();
    return *lookahead_;
}

Token Lexer::next() {
    if (lookahead_) {
        Token t = *lookahead_;
        lookahead_.reset();
        return t;
    }
    return lex();
}

Token Lexer::lex() {
    while (pos_ < input_.size() && std::isspace(static_cast<unsigned char>(input_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= input_.size()) return {Token::Kind::End, "", "", start};

    const char c = input_[pos_];
    switch (c) {
        case '{': ++pos_; return {Token::Kind::LBrace, "{", "", start};
        case '}': ++pos_; return {Token::Kind::RBrace, "}", "", start};
        case '(': ++pos_; return {Token::Kind::LParen, "(", "", start};
        case ')': ++pos_; return {Token::Kind::RParen, ")", "", start};
        case '.': ++pos_; return {Token::Kind::Dot, ".", "", start};
        case '/': ++pos_; return {Token::Kind::Slash, "/", "", start};
        case '^': ++pos_; return {Token::Kind::Caret, "^", "", start};
        case '*': ++pos_; return {Token::Kind::Star, "*", "", start};
        case '!':
            if (pos_ + 1 < input_.size() && input_[pos_ + 1] == '=') {
                pos_ += 2;
                return {Token::Kind::NotEq, "!=", "", start};
            }
            throw ParseError(ParseError::Kind::Syntax, start, "expected '!='");
        case '?': {
            ++pos_;
            std::size_t name_start = pos_;
            while (pos_ < input_.size() && is_word_char(input_[pos_])) ++pos_;
            if (pos_ == name_start)
                throw ParseError(ParseError::Kind::Syntax, start, "'?' without a variable name");
            return {Token::Kind::Variable,
                    std::string(input_.substr(name_start, pos_ - name_start)), "", start};
        }
        default: break;
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t num_start = pos_;
        while (pos_ < input_.size() && std::isdigit(static_cast<unsigned char>(input_[pos_])))
            ++pos_;
        return {Token::Kind::Integer, std::string(input_.substr(num_start, pos_ - num_start)),
                "", start};
    }

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t word_start = pos_;
        while (pos_ < input_.size() && is_word_char(input_[pos_])) ++pos_;
        std::string word(input_.substr(word_start, pos_ - word_start));
        if (pos_ < input_.size() && input_[pos_] == ':') {
            ++pos_;
            std::size_t local_start = pos_;
            while (pos_ < input_.size() && is_local_char(input_[pos_])) ++pos_;
            std::string local(input_.substr(local_start, pos_ - local_start));
            // A local never ends with '.'; trailing dots are separators.
            while (!local.empty() && local.back() == '.') {
                local.pop_back();
                --pos_;
            }
            if (local.empty())
                throw ParseError(ParseError::Kind::Syntax, start,
                                 "prefixed name '" + word + ":' without a local part");
            Token t{Token::Kind::PrefixedName, local, word, start};
            return t;
        }
        return {Token::Kind::Word, word, "", start};
    }

    throw ParseError(ParseError::Kind::Syntax, start,
                     std::string("unexpected character '") + c + "'");
}

}  // namespace kbqa::sparql
