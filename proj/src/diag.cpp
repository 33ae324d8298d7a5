#include "comlang/diag.hpp"

namespace comlang {

std::string render_span(const SourceSpan& span) {
    return span.file + ":" + std::to_string(span.line) + ":" + std::to_string(span.column);
}

std::string CompileError::render() const {
    return render_span(span_) + ": error[" + code_ + "]: " + what();
}

std::string RuntimeFault::render() const {
    std::string head = span_ ? render_span(*span_) + ": " : std::string();
    return head + "error[" + code_ + "]: " + what();
}

}  // namespace comlang
