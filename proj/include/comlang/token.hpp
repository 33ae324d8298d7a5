#pragma once

#include <cstdint>
#include <string>

#include "comlang/diag.hpp"

namespace comlang::syntax {

enum class TokenKind {
    Keyword,
    Identifier,
    GuidLiteral,
    IntLiteral,
    RealLiteral,
    StringLiteral,
    Punctuation,
    Eof,  // sentinel appended by the parser, never produced by tokenize()
};

struct Token {
    TokenKind kind = TokenKind::Eof;
    std::string text;     // exact source slice
    SourceSpan span;
    // Decoded payloads; only the field matching `kind` is meaningful.
    std::int64_t int_value = 0;
    double real_value = 0.0;
    std::string string_value;  // decoded string literal / normalized GUID

    bool is_keyword(const char* kw) const {
        return kind == TokenKind::Keyword && text == kw;
    }
    bool is_punct(const char* p) const {
        return kind == TokenKind::Punctuation && text == p;
    }
};

const char* token_kind_name(TokenKind kind);

}  // namespace comlang::syntax
