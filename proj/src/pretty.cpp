#include "comlang/pretty.hpp"

#include <charconv>
#include <sstream>

namespace comlang::syntax {

using namespace ast;

namespace {

std::string escape_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string text(buf, ptr);
    // Keep the literal recognizable as a real: `1` would reparse as an int.
    if (text.find('.') == std::string::npos && text.find('e') == std::string::npos &&
        text.find("inf") == std::string::npos && text.find("nan") == std::string::npos) {
        text += ".0";
    }
    return text;
}

// Type precedence: arrow < tuple < postfix list < atom.
enum TypeLevel { kTyArrow = 0, kTyTuple = 1, kTyPostfix = 2, kTyAtom = 3 };

int type_level(const TypeExpr& t) {
    if (is<TyArrow>(t)) return kTyArrow;
    if (is<TyTuple>(t)) return kTyTuple;
    if (is<TyList>(t)) return kTyPostfix;
    return kTyAtom;
}

void print_type(std::string& out, const TypeExpr& t, int required);

void print_type_at(std::string& out, const TypeExpr& t, int required) {
    if (type_level(t) < required) {
        out.push_back('(');
        print_type(out, t, kTyArrow);
        out.push_back(')');
    } else {
        print_type(out, t, kTyArrow);
    }
}

void print_type(std::string& out, const TypeExpr& t, int) {
    if (is<TyName>(t)) {
        out += as<TyName>(t).name;
    } else if (is<TyIfc>(t)) {
        out += "||" + as<TyIfc>(t).sig + "||";
    } else if (is<TyComp>(t)) {
        out += "|" + as<TyComp>(t).sig + "|";
    } else if (is<TyTuple>(t)) {
        const auto& elems = as<TyTuple>(t).elems;
        for (std::size_t i = 0; i < elems.size(); ++i) {
            if (i) out += " * ";
            print_type_at(out, *elems[i], kTyPostfix);
        }
    } else if (is<TyArrow>(t)) {
        print_type_at(out, *as<TyArrow>(t).from, kTyTuple);
        out += " -> ";
        print_type_at(out, *as<TyArrow>(t).to, kTyArrow);
    } else if (is<TyList>(t)) {
        print_type_at(out, *as<TyList>(t).elem, kTyAtom);
        out += " list";
    } else {
        out.push_back('{');
        const auto& fields = as<TyRecord>(t).fields;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ", ";
            out += fields[i].first + ": ";
            print_type_at(out, *fields[i].second, kTyArrow);
        }
        out.push_back('}');
    }
}

void print_pattern(std::string& out, const Pattern& p) {
    if (is<PWild>(p)) {
        out.push_back('_');
    } else if (is<PUnit>(p)) {
        out += "()";
    } else if (is<PVar>(p)) {
        const auto& var = as<PVar>(p);
        if (var.annot) {
            out += "(" + var.name + " : ";
            print_type_at(out, *var.annot, kTyArrow);
            out.push_back(')');
        } else {
            out += var.name;
        }
    } else if (is<PTuple>(p)) {
        out.push_back('(');
        const auto& elems = as<PTuple>(p).elems;
        for (std::size_t i = 0; i < elems.size(); ++i) {
            if (i) out += ", ";
            print_pattern(out, *elems[i]);
        }
        out.push_back(')');
    } else {
        const auto& v = as<PLit>(p).value;
        if (std::holds_alternative<std::int64_t>(v)) {
            out += std::to_string(std::get<std::int64_t>(v));
        } else if (std::holds_alternative<bool>(v)) {
            out += std::get<bool>(v) ? "true" : "false";
        } else {
            out += escape_string(std::get<std::string>(v));
        }
    }
}

// Expression precedence, mirroring the parser's ladder.
enum ExprLevel {
    kOpen = 0,     // let / if / fn / ifc_case
    kCompare = 1,
    kCons = 2,
    kAdd = 3,
    kMul = 4,
    kApp = 5,
    kPostfix = 6,
    kAtom = 7,
};

int expr_level(const Expr& e) {
    if (is<ELet>(e) || is<EIf>(e) || is<ELambda>(e) || is<EIfcCase>(e)) return kOpen;
    if (is<EBinary>(e)) {
        const std::string& op = as<EBinary>(e).op;
        if (op == "*" || op == "/") return kMul;
        if (op == "+" || op == "-" || op == "^") return kAdd;
        if (op == "::") return kCons;
        return kCompare;
    }
    if (is<EApp>(e) || is<EInstanceOf>(e)) return kApp;
    if (is<EDot>(e)) return kPostfix;
    return kAtom;  // literals, vars, tuples, records, lists, seq, instantiate
}

void print_expr(std::string& out, const Expr& e);
void print_decl_inline(std::string& out, const Decl& d);

void print_expr_at(std::string& out, const Expr& e, int required) {
    if (expr_level(e) < required) {
        out.push_back('(');
        print_expr(out, e);
        out.push_back(')');
    } else {
        print_expr(out, e);
    }
}

void print_expr(std::string& out, const Expr& e) {
    if (is<EInt>(e)) {
        out += std::to_string(as<EInt>(e).value);
    } else if (is<EReal>(e)) {
        out += format_real(as<EReal>(e).value);
    } else if (is<EBool>(e)) {
        out += as<EBool>(e).value ? "true" : "false";
    } else if (is<EString>(e)) {
        out += escape_string(as<EString>(e).value);
    } else if (is<EUnit>(e)) {
        out += "()";
    } else if (is<EVar>(e)) {
        out += as<EVar>(e).name;
    } else if (is<ETuple>(e)) {
        out.push_back('(');
        const auto& elems = as<ETuple>(e).elems;
        for (std::size_t i = 0; i < elems.size(); ++i) {
            if (i) out += ", ";
            print_expr(out, *elems[i]);
        }
        out.push_back(')');
    } else if (is<ERecord>(e)) {
        out.push_back('{');
        const auto& fields = as<ERecord>(e).fields;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ", ";
            out += fields[i].first + " = ";
            print_expr(out, *fields[i].second);
        }
        out.push_back('}');
    } else if (is<EList>(e)) {
        out.push_back('[');
        const auto& elems = as<EList>(e).elems;
        for (std::size_t i = 0; i < elems.size(); ++i) {
            if (i) out += ", ";
            print_expr(out, *elems[i]);
        }
        out.push_back(']');
    } else if (is<ELambda>(e)) {
        out += "fn ";
        print_pattern(out, *as<ELambda>(e).param);
        out += " => ";
        print_expr(out, *as<ELambda>(e).body);
    } else if (is<EApp>(e)) {
        print_expr_at(out, *as<EApp>(e).fn, kApp);
        out.push_back(' ');
        print_expr_at(out, *as<EApp>(e).arg, kPostfix);
    } else if (is<EBinary>(e)) {
        const auto& bin = as<EBinary>(e);
        int level = expr_level(e);
        int lhs_level = level == kCons ? kAdd : level;
        int rhs_level = level == kCons ? kCons : level + 1;
        if (level == kCompare) {
            lhs_level = kCons;
            rhs_level = kCons;
        }
        print_expr_at(out, *bin.lhs, lhs_level);
        out += " " + bin.op + " ";
        print_expr_at(out, *bin.rhs, rhs_level);
    } else if (is<ELet>(e)) {
        out += "let ";
        for (const auto& d : as<ELet>(e).decls) {
            print_decl_inline(out, *d);
            out.push_back(' ');
        }
        out += "in ";
        print_expr(out, *as<ELet>(e).body);
        out += " end";
    } else if (is<EIf>(e)) {
        const auto& node = as<EIf>(e);
        out += "if ";
        print_expr(out, *node.cond);
        out += " then ";
        print_expr(out, *node.then_branch);
        out += " else ";
        print_expr(out, *node.else_branch);
    } else if (is<ESeq>(e)) {
        out.push_back('(');
        const auto& items = as<ESeq>(e).items;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out += "; ";
            print_expr(out, *items[i]);
        }
        out.push_back(')');
    } else if (is<EDot>(e)) {
        print_expr_at(out, *as<EDot>(e).base, kAtom);
        for (const auto& seg : as<EDot>(e).path) {
            out.push_back('.');
            out += seg.label;
        }
    } else if (is<EInstantiate>(e)) {
        const auto& inst = as<EInstantiate>(e);
        out += inst.component + " (";
        for (std::size_t i = 0; i < inst.args.size(); ++i) {
            if (i) out.push_back(' ');
            out += "val " + inst.args[i].first + " = ";
            print_expr(out, *inst.args[i].second);
        }
        out.push_back(')');
    } else if (is<EIfcCase>(e)) {
        const auto& node = as<EIfcCase>(e);
        out += "ifc_case ";
        print_expr(out, *node.scrutinee);
        out += " of ";
        for (std::size_t i = 0; i < node.arms.size(); ++i) {
            if (i) out += " | ";
            out += node.arms[i].sig + " => ";
            // A nested open form would swallow the following `|`/`else`.
            print_expr_at(out, *node.arms[i].body, kCompare);
        }
        out += " else => ";
        print_expr_at(out, *node.else_body, kCompare);
    } else {
        out += "instanceOf ";
        print_expr_at(out, *as<EInstanceOf>(e).arg, kPostfix);
    }
}

void print_fun(std::string& out, const DFun& fun, const std::string& clause_sep) {
    for (std::size_t c = 0; c < fun.clauses.size(); ++c) {
        out += c == 0 ? "fun " : clause_sep + "| ";
        out += fun.name;
        for (const auto& p : fun.clauses[c].params) {
            out.push_back(' ');
            print_pattern(out, *p);
        }
        if (c == 0 && fun.result_annot) {
            out += " : ";
            print_type_at(out, *fun.result_annot, kTyArrow);
        }
        out += " = ";
        print_expr(out, *fun.clauses[c].body);
    }
}

void print_decl_inline(std::string& out, const Decl& d) {
    if (is<DVal>(d)) {
        out += "val ";
        print_pattern(out, *as<DVal>(d).pattern);
        out += " = ";
        print_expr(out, *as<DVal>(d).expr);
    } else {
        print_fun(out, as<DFun>(d), " ");
    }
}

void print_decl(std::string& out, const Decl& d, const std::string& indent) {
    if (is<DInterfaceSig>(d)) {
        const auto& sig = as<DInterfaceSig>(d);
        out += indent + "interface_sig " + sig.name + " = {\n";
        for (const auto& m : sig.members) {
            if (std::holds_alternative<SigValMember>(m)) {
                const auto& v = std::get<SigValMember>(m);
                out += indent + "  val " + v.name + " : ";
                print_type_at(out, *v.type, kTyArrow);
                out.push_back('\n');
            } else {
                const auto& t = std::get<SigTypeMember>(m);
                out += indent + "  type " + t.name;
                if (t.manifest) {
                    out += " = ";
                    print_type_at(out, *t.manifest, kTyArrow);
                }
                out.push_back('\n');
            }
        }
        out += indent + "}";
        if (sig.iid) out += " with_iid " + sig.iid->str();
        out.push_back('\n');
    } else if (is<DComponentSig>(d)) {
        const auto& sig = as<DComponentSig>(d);
        out += indent + "component_sig " + sig.name + " = {\n";
        for (const auto& ifc : sig.interfaces) {
            out += indent + "  interface " + ifc.label + " : " + ifc.sig + "\n";
        }
        out += indent + "}\n";
    } else if (is<DComponent>(d)) {
        const auto& comp = as<DComponent>(d);
        out += indent + "component " + comp.name + " (";
        for (std::size_t i = 0; i < comp.params.size(); ++i) {
            if (i) out.push_back(' ');
            out += "val " + comp.params[i].name + " : ";
            print_type_at(out, *comp.params[i].type, kTyArrow);
        }
        out += ") : " + comp.sig + " = {\n";
        for (const auto& local : comp.locals) {
            out += indent + "  ";
            print_decl_inline(out, *local);
            out.push_back('\n');
        }
        for (const auto& impl : comp.impls) {
            out += indent + "  interface " + impl.label + " = {\n";
            for (const auto& bind : impl.types) {
                out += indent + "    type " + bind.name + " = ";
                print_type_at(out, *bind.rep, kTyArrow);
                out.push_back('\n');
            }
            for (const auto& m : impl.members) {
                out += indent + "    ";
                print_decl_inline(out, *m);
                out.push_back('\n');
            }
            out += indent + "  }\n";
        }
        out += indent + "}\n";
    } else if (is<DImport>(d)) {
        const auto& imp = as<DImport>(d);
        out += indent + "import " + imp.name + " : " + imp.sig + " = clsid " + imp.clsid.str() +
               "\n";
    } else if (is<DExport>(d)) {
        const auto& exp = as<DExport>(d);
        out += indent + "export " + exp.component + " : " + exp.sig + " with_clsid " +
               exp.clsid.str() + "\n";
    } else if (is<DVal>(d)) {
        out += indent;
        print_decl_inline(out, d);
        out.push_back('\n');
    } else {
        out += indent;
        print_fun(out, as<DFun>(d), "\n" + indent + "");
        out.push_back('\n');
    }
}

}  // namespace

std::string pretty_print(const ast::SurfaceProgram& program) {
    std::string out;
    for (const auto& d : program.decls) print_decl(out, *d, "");
    return out;
}

std::string pretty_print(const ast::Expr& expr) {
    std::string out;
    print_expr(out, expr);
    return out;
}

std::string pretty_print(const ast::TypeExpr& type) {
    std::string out;
    print_type_at(out, type, kTyArrow);
    return out;
}

}  // namespace comlang::syntax
