#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "comlang/ast.hpp"
#include "comlang/sigs.hpp"

namespace comlang::sema {

struct ElaborationResult {
    std::shared_ptr<SigEnv> env;
    std::vector<CompileError> errors;
};

// Walks the declarations in order and produces the signature environment.
// Duplicate signature names and references to signatures that have not been
// declared yet are reported; later declarations may reference earlier ones.
ElaborationResult elaborate_sigs(const ast::SurfaceProgram& program);

struct ComponentInfo {
    const ast::DComponent* decl = nullptr;      // null for imported components
    const ast::DImport* import_decl = nullptr;  // null for native components
    std::vector<std::pair<std::string, Type>> params;
    std::string sig;  // ascribed component signature name
};

struct TypedProgram {
    std::shared_ptr<ast::SurfaceProgram> program;
    SigEnvPtr sigs;
    std::map<std::string, ComponentInfo> components;
    std::vector<const ast::DExport*> exports;
    // Inferred type of every expression node, filled during typechecking.
    std::unordered_map<const ast::Expr*, Type> expr_types;
};

// Typechecks the program against an elaborated signature environment.
// Throws CompileError at the first violation.
TypedProgram typecheck(std::shared_ptr<ast::SurfaceProgram> program,
                       std::shared_ptr<const SigEnv> sigs);

// parse result -> elaborate + typecheck; throws CompileError (the first
// elaboration error wins if elaboration fails).
TypedProgram check_program(std::shared_ptr<ast::SurfaceProgram> program);

// ------------------------------------------------------- IDL expressibility

// A type can cross the component boundary if it is a scalar (int, bool,
// real, string), a record/datatype/list of expressible types, or an
// interface/component type (marshaled as an interface pointer). Arrows,
// tuples, unit and abstract types cannot.
bool idl_expressible_type(const Type& type);

struct ExpressibilityReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// An interface signature is expressible if every type member has an
// expressible representation and every value member is a scalar or an arrow
// whose argument and result are unit, expressible, or tuples of expressible
// types.
ExpressibilityReport idl_expressible_interface(const InterfaceSig& sig);

// Export requirements for `component` under ascription `sig`: the component
// takes no parameters, and every interface of `sig` carries an IID and is
// IDL-expressible. Whether the component actually matches `sig` is checked
// separately during typechecking.
ExpressibilityReport check_exportable(const TypedProgram& program, const std::string& component,
                                      const std::string& sig_name);

}  // namespace comlang::sema
