#pragma once

#include <string>
#include <vector>

#include "comlang/token.hpp"

namespace comlang::syntax {

// Splits UTF-8 source text into tokens. Comments `(* ... *)` nest and are
// elided along with whitespace. After `with_iid`, `with_clsid` or `clsid`
// the next token must be a GUID literal; a malformed one is a lex error.
// Throws CompileError[lex] on the first violation.
std::vector<Token> tokenize(const std::string& source, const std::string& filename);

}  // namespace comlang::syntax
