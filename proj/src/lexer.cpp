#include "comlang/lexer.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "comlang/guid.hpp"

namespace comlang::syntax {

namespace {

const std::array<const char*, 21> kKeywords = {
    "interface_sig", "component_sig", "component", "interface", "import", "export",
    "with_iid", "with_clsid", "clsid", "ifc_case", "of", "else", "instanceOf",
    "val", "fun", "let", "in", "end", "if", "then", "type",
};

// `fn` introduces lambda expressions; it is reserved alongside the keywords
// above so `fn x => e` cannot be read as an application of a variable `fn`.
const char* kLambdaKeyword = "fn";

// Longest-match punctuation, longest first.
const std::array<const char*, 26> kPunct = {
    "||", "=>", "->", "::", "<=", ">=", "<>",
    "(", ")", "{", "}", "[", "]", ",", ";", ":", ".", "|",
    "=", "*", "+", "-", "/", "^", "<", ">",
};

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

class Lexer {
public:
    Lexer(const std::string& source, const std::string& filename)
        : src_(source), file_(filename) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        for (;;) {
            skip_trivia();
            if (eof()) break;
            if (!tokens.empty() && wants_guid(tokens.back())) {
                tokens.push_back(lex_guid());
                continue;
            }
            tokens.push_back(next_token());
        }
        Token end;
        end.kind = TokenKind::Eof;
        end.span = here();
        tokens.push_back(std::move(end));
        return tokens;
    }

private:
    static bool wants_guid(const Token& prev) {
        return prev.is_keyword("with_iid") || prev.is_keyword("with_clsid") ||
               prev.is_keyword("clsid");
    }

    bool eof() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    SourceSpan here(int length = 0) const { return SourceSpan{file_, line_, col_, length}; }

    [[noreturn]] void fail(const SourceSpan& span, const std::string& message) const {
        throw CompileError(errcode::lex, span, message);
    }

    void skip_trivia() {
        for (;;) {
            while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) advance();
            if (peek() == '(' && peek(1) == '*') {
                SourceSpan open = here(2);
                advance();
                advance();
                int depth = 1;
                while (depth > 0) {
                    if (eof()) fail(open, "unterminated comment");
                    if (peek() == '(' && peek(1) == '*') {
                        advance();
                        advance();
                        ++depth;
                    } else if (peek() == '*' && peek(1) == ')') {
                        advance();
                        advance();
                        --depth;
                    } else {
                        advance();
                    }
                }
                continue;
            }
            break;
        }
    }

    Token make(TokenKind kind, const SourceSpan& start, std::size_t begin) {
        Token t;
        t.kind = kind;
        t.text = src_.substr(begin, pos_ - begin);
        t.span = start;
        t.span.length = static_cast<int>(pos_ - begin);
        return t;
    }

    Token lex_guid() {
        SourceSpan start = here();
        std::size_t begin = pos_;
        while (!eof() && (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '-')) {
            advance();
        }
        std::string text = src_.substr(begin, pos_ - begin);
        auto guid = Guid::parse(text);
        if (!guid) {
            start.length = static_cast<int>(text.size());
            fail(start, "malformed GUID '" + text + "' (expected 8-4-4-4-12 hex form)");
        }
        Token t = make(TokenKind::GuidLiteral, start, begin);
        t.string_value = guid->str();
        return t;
    }

    Token next_token() {
        SourceSpan start = here();
        std::size_t begin = pos_;
        char c = peek();

        if (is_ident_start(c)) {
            while (!eof() && is_ident_char(peek())) advance();
            Token t = make(TokenKind::Identifier, start, begin);
            if (t.text == "_") {
                t.kind = TokenKind::Punctuation;
                return t;
            }
            for (const char* kw : kKeywords) {
                if (t.text == kw) {
                    t.kind = TokenKind::Keyword;
                    return t;
                }
            }
            if (t.text == kLambdaKeyword) t.kind = TokenKind::Keyword;
            return t;
        }

        if (is_digit(c)) return lex_number(start, begin);
        if (c == '"') return lex_string(start, begin);

        for (const char* p : kPunct) {
            std::size_t len = std::char_traits<char>::length(p);
            if (src_.compare(pos_, len, p) == 0) {
                for (std::size_t i = 0; i < len; ++i) advance();
                return make(TokenKind::Punctuation, start, begin);
            }
        }
        start.length = 1;
        fail(start, std::string("unexpected character '") + c + "'");
    }

    Token lex_number(SourceSpan start, std::size_t begin) {
        while (!eof() && is_digit(peek())) advance();
        bool real = false;
        if (peek() == '.' && is_digit(peek(1))) {
            real = true;
            advance();
            while (!eof() && is_digit(peek())) advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            char sign = peek(1);
            std::size_t digit_at = (sign == '+' || sign == '-') ? 2 : 1;
            if (is_digit(peek(digit_at))) {
                real = true;
                advance();
                if (sign == '+' || sign == '-') advance();
                while (!eof() && is_digit(peek())) advance();
            }
        }
        if (!eof() && is_ident_char(peek())) {
            start.length = static_cast<int>(pos_ - begin + 1);
            fail(start, "malformed number literal");
        }
        Token t = make(real ? TokenKind::RealLiteral : TokenKind::IntLiteral, start, begin);
        if (real) {
            t.real_value = std::strtod(t.text.c_str(), nullptr);
        } else {
            auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(),
                                             t.int_value);
            if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
                fail(t.span, "integer literal out of range");
            }
        }
        return t;
    }

    Token lex_string(SourceSpan start, std::size_t begin) {
        advance();  // opening quote
        std::string value;
        for (;;) {
            if (eof() || peek() == '\n') fail(start, "unterminated string literal");
            char c = peek();
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                char e = peek();
                switch (e) {
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    case '\\': value.push_back('\\'); break;
                    case '"': value.push_back('"'); break;
                    default: {
                        SourceSpan at = here();
                        at.length = 1;
                        fail(at, std::string("unknown escape '\\") + e + "'");
                    }
                }
                advance();
                continue;
            }
            value.push_back(c);
            advance();
        }
        Token t = make(TokenKind::StringLiteral, start, begin);
        t.string_value = std::move(value);
        return t;
    }

    const std::string& src_;
    std::string file_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(const std::string& source, const std::string& filename) {
    return Lexer(source, filename).run();
}

const char* token_kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Identifier: return "identifier";
        case TokenKind::GuidLiteral: return "guid-literal";
        case TokenKind::IntLiteral: return "int-literal";
        case TokenKind::RealLiteral: return "real-literal";
        case TokenKind::StringLiteral: return "string-literal";
        case TokenKind::Punctuation: return "punctuation";
        case TokenKind::Eof: return "end of input";
    }
    return "token";
}

}  // namespace comlang::syntax
