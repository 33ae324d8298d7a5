#pragma once

#include <memory>
#include <string>
#include <vector>

#include "comlang/ast.hpp"
#include "comlang/token.hpp"

namespace comlang::syntax {

// Parses a full program. Because `Comp (...)` is only an instantiation when
// `Comp` names a component, the parser tracks component and import names as
// declarations are read (declarations may only reference earlier ones).
// Throws CompileError[parse] at the first violation.
std::shared_ptr<ast::SurfaceProgram> parse_program(std::vector<Token> tokens,
                                                   const std::string& filename);

// Convenience: tokenize + parse.
std::shared_ptr<ast::SurfaceProgram> parse_source(const std::string& source,
                                                  const std::string& filename);

}  // namespace comlang::syntax
