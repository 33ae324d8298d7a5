#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace comlang {

// Character range in a source file. Lines and columns are 1-based.
struct SourceSpan {
    std::string file;
    int line = 1;
    int column = 1;
    int length = 0;
};

std::string render_span(const SourceSpan& span);

// Error raised before a program runs: lexing, parsing, signature
// elaboration, typechecking, exportability. Rendered as
//   file:line:col: error[CODE]: message
class CompileError : public std::runtime_error {
public:
    CompileError(std::string code, SourceSpan span, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)), span_(std::move(span)) {}

    const std::string& code() const { return code_; }
    const SourceSpan& span() const { return span_; }
    std::string render() const;

private:
    std::string code_;
    SourceSpan span_;
};

// Fault raised while a program (or the component kernel) is running.
class RuntimeFault : public std::runtime_error {
public:
    RuntimeFault(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    RuntimeFault(std::string code, SourceSpan span, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)), span_(std::move(span)) {}

    const std::string& code() const { return code_; }
    const std::optional<SourceSpan>& span() const { return span_; }
    std::string render() const;

private:
    std::string code_;
    std::optional<SourceSpan> span_;
};

namespace errcode {
// Compile-time codes.
inline constexpr const char* lex = "lex";
inline constexpr const char* parse = "parse";
inline constexpr const char* unbound_signature = "unbound-signature";
inline constexpr const char* duplicate_signature = "duplicate-signature";
inline constexpr const char* type_mismatch = "type";
inline constexpr const char* unbound_variable = "unbound-variable";
inline constexpr const char* no_such_interface = "no-such-interface";
inline constexpr const char* no_such_member = "no-such-member";
inline constexpr const char* not_exportable = "not-exportable";
inline constexpr const char* not_expressible = "not-expressible";
// Run-time codes.
inline constexpr const char* runtime = "runtime";
inline constexpr const char* instantiation = "instantiation";
inline constexpr const char* negotiation = "negotiation";
inline constexpr const char* unknown_clsid = "unknown-clsid";
inline constexpr const char* signature_mismatch = "signature-mismatch";
inline constexpr const char* marshal = "marshal";
inline constexpr const char* clsid_collision = "clsid-collision";
inline constexpr const char* manifest = "manifest";
inline constexpr const char* kernel = "kernel";
inline constexpr const char* over_release = "over-release";
inline constexpr const char* unknown_character = "unknown-character";
}  // namespace errcode

}  // namespace comlang
