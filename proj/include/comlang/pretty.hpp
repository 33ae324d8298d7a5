#pragma once

#include <string>

#include "comlang/ast.hpp"

namespace comlang::syntax {

// Deterministic source rendering. For every well-formed program P,
// parse(pretty_print(P)) is structurally equal to P (spans aside).
std::string pretty_print(const ast::SurfaceProgram& program);
std::string pretty_print(const ast::Expr& expr);
std::string pretty_print(const ast::TypeExpr& type);

}  // namespace comlang::syntax
