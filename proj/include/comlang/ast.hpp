#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "comlang/diag.hpp"
#include "comlang/guid.hpp"

namespace comlang::ast {

struct Expr;
struct Decl;
struct Pattern;
struct TypeExpr;
using ExprPtr = std::shared_ptr<Expr>;
using DeclPtr = std::shared_ptr<Decl>;
using PatternPtr = std::shared_ptr<Pattern>;
using TypeExprPtr = std::shared_ptr<TypeExpr>;

// ---------------------------------------------------------------- types ----

// Base type name (int/real/bool/string/unit) or a reference to a `type`
// member of the enclosing interface signature.
struct TyName { std::string name; };
struct TyIfc { std::string sig; };    // ||SIG||
struct TyComp { std::string sig; };   // |SIG|
struct TyTuple { std::vector<TypeExprPtr> elems; };
struct TyArrow { TypeExprPtr from, to; };
struct TyList { TypeExprPtr elem; };
struct TyRecord { std::vector<std::pair<std::string, TypeExprPtr>> fields; };

struct TypeExpr {
    SourceSpan span;
    std::variant<TyName, TyIfc, TyComp, TyTuple, TyArrow, TyList, TyRecord> node;
};

// ------------------------------------------------------------- patterns ----

struct PWild {};
struct PUnit {};
struct PVar {
    std::string name;
    TypeExprPtr annot;  // optional
};
struct PTuple { std::vector<PatternPtr> elems; };
// Literal pattern in a fun clause: int, bool or string.
struct PLit { std::variant<std::int64_t, bool, std::string> value; };

struct Pattern {
    SourceSpan span;
    std::variant<PWild, PUnit, PVar, PTuple, PLit> node;
};

// ---------------------------------------------------------- expressions ----

struct EInt { std::int64_t value = 0; };
struct EReal { double value = 0.0; };
struct EBool { bool value = false; };
struct EString { std::string value; };
struct EUnit {};
struct EVar { std::string name; };
struct ETuple { std::vector<ExprPtr> elems; };
struct ERecord { std::vector<std::pair<std::string, ExprPtr>> fields; };
struct EList { std::vector<ExprPtr> elems; };
struct ELambda {
    PatternPtr param;
    ExprPtr body;
};
struct EApp { ExprPtr fn, arg; };
struct EBinary {
    std::string op;
    ExprPtr lhs, rhs;
};
struct ELet {
    std::vector<DeclPtr> decls;  // val/fun only
    ExprPtr body;
};
struct EIf { ExprPtr cond, then_branch, else_branch; };
struct ESeq { std::vector<ExprPtr> items; };  // e1; e2; ...; at least two

struct PathSegment {
    std::string label;
    SourceSpan span;
};
struct EDot {
    ExprPtr base;
    std::vector<PathSegment> path;  // nonempty
};

struct EInstantiate {
    std::string component;
    SourceSpan component_span;
    std::vector<std::pair<std::string, ExprPtr>> args;  // val NAME = expr, in order
};

struct IfcArm {
    std::string sig;
    SourceSpan sig_span;
    ExprPtr body;
};
struct EIfcCase {
    ExprPtr scrutinee;
    std::vector<IfcArm> arms;  // at least one
    ExprPtr else_body;         // mandatory
};

struct EInstanceOf { ExprPtr arg; };

struct Expr {
    SourceSpan span;
    std::variant<EInt, EReal, EBool, EString, EUnit, EVar, ETuple, ERecord, EList, ELambda,
                 EApp, EBinary, ELet, EIf, ESeq, EDot, EInstantiate, EIfcCase, EInstanceOf>
        node;
};

// ---------------------------------------------------------- declarations ----

struct SigValMember {
    std::string name;
    TypeExprPtr type;
    SourceSpan span;
};
struct SigTypeMember {
    std::string name;
    TypeExprPtr manifest;  // null => abstract
    SourceSpan span;
};
using SigMember = std::variant<SigValMember, SigTypeMember>;

struct DInterfaceSig {
    std::string name;
    std::vector<SigMember> members;
    std::optional<Guid> iid;
};

struct CompSigInterface {
    std::string label;
    std::string sig;
    SourceSpan span;
};
struct DComponentSig {
    std::string name;
    std::vector<CompSigInterface> interfaces;
};

struct ComponentParam {
    std::string name;
    TypeExprPtr type;
    SourceSpan span;
};
// `type N = rep` inside an interface implementation block.
struct ImplTypeBind {
    std::string name;
    TypeExprPtr rep;
    SourceSpan span;
};
struct InterfaceImpl {
    std::string label;
    SourceSpan span;
    std::vector<ImplTypeBind> types;
    std::vector<DeclPtr> members;  // val/fun, in declaration order
};
struct DComponent {
    std::string name;
    std::vector<ComponentParam> params;
    std::string sig;
    SourceSpan sig_span;
    std::vector<DeclPtr> locals;  // val/fun shared by the interface blocks
    std::vector<InterfaceImpl> impls;
};

struct DImport {
    std::string name;
    std::string sig;
    SourceSpan sig_span;
    Guid clsid;
};

struct DExport {
    std::string component;
    SourceSpan component_span;
    std::string sig;
    SourceSpan sig_span;
    Guid clsid;
};

struct DVal {
    PatternPtr pattern;
    ExprPtr expr;
};

struct FunClause {
    std::vector<PatternPtr> params;  // curried parameter groups, nonempty
    ExprPtr body;
};
struct DFun {
    std::string name;
    TypeExprPtr result_annot;  // optional, on the first clause
    std::vector<FunClause> clauses;  // nonempty, all the same arity
};

struct Decl {
    SourceSpan span;
    std::variant<DInterfaceSig, DComponentSig, DComponent, DImport, DExport, DVal, DFun> node;
};

struct SurfaceProgram {
    std::string filename;
    std::vector<DeclPtr> decls;
};

// Structural equality ignoring spans; used by the print/reparse round-trip law.
bool equal(const SurfaceProgram& a, const SurfaceProgram& b);
bool equal(const Decl& a, const Decl& b);
bool equal(const Expr& a, const Expr& b);
bool equal(const Pattern& a, const Pattern& b);
bool equal(const TypeExpr& a, const TypeExpr& b);

template <class T, class Node>
bool is(const Node& n) {
    return std::holds_alternative<T>(n.node);
}
template <class T, class Node>
const T& as(const Node& n) {
    return std::get<T>(n.node);
}
template <class T, class Node>
const T* get_if(const Node& n) {
    return std::get_if<T>(&n.node);
}
template <class T, class Node>
T* get_if(Node& n) {
    return std::get_if<T>(&n.node);
}

}  // namespace comlang::ast
