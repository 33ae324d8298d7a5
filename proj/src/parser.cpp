#include "comlang/parser.hpp"

#include <set>
#include <sstream>

#include "comlang/lexer.hpp"

namespace comlang::syntax {

using namespace ast;

namespace {

class Parser {
public:
    Parser(std::vector<Token> tokens, std::string filename)
        : tokens_(std::move(tokens)), filename_(std::move(filename)) {
        if (tokens_.empty() || tokens_.back().kind != TokenKind::Eof) {
            Token eof;
            eof.kind = TokenKind::Eof;
            eof.span = tokens_.empty() ? SourceSpan{filename_, 1, 1, 0} : tokens_.back().span;
            eof.span.column += eof.span.length;
            eof.span.length = 0;
            tokens_.push_back(eof);
        }
    }

    std::shared_ptr<SurfaceProgram> run() {
        auto program = std::make_shared<SurfaceProgram>();
        program->filename = filename_;
        while (!at(TokenKind::Eof)) {
            program->decls.push_back(parse_decl());
        }
        return program;
    }

private:
    // ------------------------------------------------------------ cursor --

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    const Token& advance() {
        const Token& t = peek();
        if (pos_ < tokens_.size()) ++pos_;
        return t;
    }
    bool at(TokenKind kind) const { return peek().kind == kind; }
    bool at_keyword(const char* kw) const { return peek().is_keyword(kw); }
    bool at_punct(const char* p) const { return peek().is_punct(p); }

    bool eat_keyword(const char* kw) {
        if (!at_keyword(kw)) return false;
        advance();
        return true;
    }
    bool eat_punct(const char* p) {
        if (!at_punct(p)) return false;
        advance();
        return true;
    }

    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = peek();
        std::ostringstream msg;
        msg << "expected " << expected << ", found ";
        if (t.kind == TokenKind::Eof) {
            msg << "end of input";
        } else {
            msg << token_kind_name(t.kind) << " '" << t.text << "'";
        }
        throw CompileError(errcode::parse, t.span, msg.str());
    }

    Token expect_keyword(const char* kw) {
        if (!at_keyword(kw)) fail(std::string("'") + kw + "'");
        return advance();
    }
    Token expect_punct(const char* p) {
        if (!at_punct(p)) fail(std::string("'") + p + "'");
        return advance();
    }
    Token expect_ident() {
        if (!at(TokenKind::Identifier)) fail("identifier");
        return advance();
    }
    Guid expect_guid() {
        if (!at(TokenKind::GuidLiteral)) fail("GUID literal");
        return *Guid::parse(advance().string_value);
    }

    template <class Node, class... Args>
    ExprPtr mk_expr(SourceSpan span, Args&&... args) {
        auto e = std::make_shared<Expr>();
        e->span = std::move(span);
        e->node = Node{std::forward<Args>(args)...};
        return e;
    }

    // ------------------------------------------------------ declarations --

    bool at_decl_start() const {
        return at_keyword("interface_sig") || at_keyword("component_sig") ||
               at_keyword("component") || at_keyword("import") || at_keyword("export") ||
               at_keyword("val") || at_keyword("fun");
    }

    DeclPtr parse_decl() {
        SourceSpan span = peek().span;
        auto decl = std::make_shared<Decl>();
        decl->span = span;
        if (at_keyword("interface_sig")) {
            decl->node = parse_interface_sig();
        } else if (at_keyword("component_sig")) {
            decl->node = parse_component_sig();
        } else if (at_keyword("component")) {
            decl->node = parse_component();
        } else if (at_keyword("import")) {
            decl->node = parse_import();
        } else if (at_keyword("export")) {
            decl->node = parse_export();
        } else if (at_keyword("val")) {
            decl->node = parse_val();
        } else if (at_keyword("fun")) {
            decl->node = parse_fun();
        } else {
            fail("a declaration");
        }
        return decl;
    }

    DInterfaceSig parse_interface_sig() {
        expect_keyword("interface_sig");
        DInterfaceSig sig;
        sig.name = expect_ident().text;
        expect_punct("=");
        expect_punct("{");
        while (!eat_punct("}")) {
            if (at_keyword("val")) {
                Token kw = advance();
                SigValMember m;
                m.span = kw.span;
                m.name = expect_ident().text;
                expect_punct(":");
                m.type = parse_type();
                sig.members.push_back(std::move(m));
            } else if (at_keyword("type")) {
                Token kw = advance();
                SigTypeMember m;
                m.span = kw.span;
                m.name = expect_ident().text;
                if (eat_punct("=")) m.manifest = parse_type();
                sig.members.push_back(std::move(m));
            } else {
                fail("'val', 'type' or '}'");
            }
        }
        if (eat_keyword("with_iid")) sig.iid = expect_guid();
        return sig;
    }

    DComponentSig parse_component_sig() {
        expect_keyword("component_sig");
        DComponentSig sig;
        sig.name = expect_ident().text;
        expect_punct("=");
        expect_punct("{");
        while (!eat_punct("}")) {
            Token kw = expect_keyword("interface");
            CompSigInterface ifc;
            ifc.span = kw.span;
            ifc.label = expect_ident().text;
            expect_punct(":");
            ifc.sig = expect_ident().text;
            sig.interfaces.push_back(std::move(ifc));
        }
        return sig;
    }

    DComponent parse_component() {
        expect_keyword("component");
        DComponent comp;
        comp.name = expect_ident().text;
        expect_punct("(");
        while (!eat_punct(")")) {
            expect_keyword("val");
            ComponentParam p;
            p.span = peek().span;
            p.name = expect_ident().text;
            expect_punct(":");
            p.type = parse_type();
            comp.params.push_back(std::move(p));
        }
        expect_punct(":");
        comp.sig_span = peek().span;
        comp.sig = expect_ident().text;
        expect_punct("=");
        expect_punct("{");
        // Local val/fun declarations are shared by the interface blocks.
        while (at_keyword("val") || at_keyword("fun")) {
            comp.locals.push_back(parse_decl());
        }
        while (!eat_punct("}")) {
            Token kw = expect_keyword("interface");
            InterfaceImpl impl;
            impl.span = kw.span;
            impl.label = expect_ident().text;
            expect_punct("=");
            expect_punct("{");
            while (!eat_punct("}")) {
                if (at_keyword("type")) {
                    Token tkw = advance();
                    ImplTypeBind bind;
                    bind.span = tkw.span;
                    bind.name = expect_ident().text;
                    expect_punct("=");
                    bind.rep = parse_type();
                    impl.types.push_back(std::move(bind));
                } else if (at_keyword("val") || at_keyword("fun")) {
                    impl.members.push_back(parse_decl());
                } else {
                    fail("'val', 'fun', 'type' or '}'");
                }
            }
            comp.impls.push_back(std::move(impl));
        }
        component_names_.insert(comp.name);
        return comp;
    }

    DImport parse_import() {
        expect_keyword("import");
        DImport imp;
        imp.name = expect_ident().text;
        if (eat_punct("(")) expect_punct(")");
        expect_punct(":");
        imp.sig_span = peek().span;
        imp.sig = expect_ident().text;
        expect_punct("=");
        expect_keyword("clsid");
        imp.clsid = expect_guid();
        component_names_.insert(imp.name);
        return imp;
    }

    DExport parse_export() {
        expect_keyword("export");
        DExport exp;
        exp.component_span = peek().span;
        exp.component = expect_ident().text;
        expect_punct(":");
        exp.sig_span = peek().span;
        exp.sig = expect_ident().text;
        expect_keyword("with_clsid");
        exp.clsid = expect_guid();
        return exp;
    }

    DVal parse_val() {
        expect_keyword("val");
        DVal val;
        val.pattern = parse_pattern(/*allow_annot=*/true);
        expect_punct("=");
        val.expr = parse_expr();
        return val;
    }

    DFun parse_fun() {
        expect_keyword("fun");
        DFun fun;
        fun.name = expect_ident().text;
        for (;;) {
            FunClause clause;
            while (!at_punct("=") && !at_punct(":")) {
                clause.params.push_back(parse_atomic_pattern());
            }
            if (clause.params.empty()) fail("a parameter pattern");
            if (fun.clauses.empty() && eat_punct(":")) {
                fun.result_annot = parse_type();
            }
            expect_punct("=");
            clause.body = parse_expr();
            std::size_t arity = fun.clauses.empty() ? clause.params.size()
                                                    : fun.clauses.front().params.size();
            if (clause.params.size() != arity) {
                throw CompileError(errcode::parse, clause.body->span,
                                   "clauses of 'fun " + fun.name +
                                       "' have differing numbers of parameters");
            }
            fun.clauses.push_back(std::move(clause));
            if (!at_punct("|")) break;
            advance();
            Token name = expect_ident();
            if (name.text != fun.name) {
                throw CompileError(errcode::parse, name.span,
                                   "clause name '" + name.text + "' does not match 'fun " +
                                       fun.name + "'");
            }
        }
        return fun;
    }

    // ----------------------------------------------------------- patterns --

    PatternPtr parse_pattern(bool allow_annot) {
        PatternPtr pat = parse_atomic_pattern();
        if (allow_annot && at_punct(":")) {
            if (auto* var = std::get_if<PVar>(&pat->node); var && !var->annot) {
                advance();
                var->annot = parse_type();
            }
        }
        return pat;
    }

    PatternPtr parse_atomic_pattern() {
        auto pat = std::make_shared<Pattern>();
        pat->span = peek().span;
        if (eat_punct("_")) {
            pat->node = PWild{};
            return pat;
        }
        if (at(TokenKind::Identifier)) {
            Token t = advance();
            if (t.text == "true" || t.text == "false") {
                pat->node = PLit{t.text == "true"};
            } else {
                pat->node = PVar{t.text, nullptr};
            }
            return pat;
        }
        if (at(TokenKind::IntLiteral)) {
            pat->node = PLit{advance().int_value};
            return pat;
        }
        if (at(TokenKind::StringLiteral)) {
            pat->node = PLit{advance().string_value};
            return pat;
        }
        if (at_punct("(")) {
            advance();
            if (eat_punct(")")) {
                pat->node = PUnit{};
                return pat;
            }
            std::vector<PatternPtr> elems;
            elems.push_back(parse_pattern(/*allow_annot=*/true));
            while (eat_punct(",")) elems.push_back(parse_pattern(/*allow_annot=*/true));
            expect_punct(")");
            if (elems.size() == 1) return elems.front();
            pat->node = PTuple{std::move(elems)};
            return pat;
        }
        fail("a pattern");
    }

    // -------------------------------------------------------------- types --

    TypeExprPtr parse_type() {
        TypeExprPtr lhs = parse_type_tuple();
        if (eat_punct("->")) {
            auto arrow = std::make_shared<TypeExpr>();
            arrow->span = lhs->span;
            arrow->node = TyArrow{lhs, parse_type()};
            return arrow;
        }
        return lhs;
    }

    TypeExprPtr parse_type_tuple() {
        TypeExprPtr first = parse_type_postfix();
        if (!at_punct("*")) return first;
        std::vector<TypeExprPtr> elems{first};
        while (eat_punct("*")) elems.push_back(parse_type_postfix());
        auto tuple = std::make_shared<TypeExpr>();
        tuple->span = first->span;
        tuple->node = TyTuple{std::move(elems)};
        return tuple;
    }

    TypeExprPtr parse_type_postfix() {
        TypeExprPtr ty = parse_type_atom();
        while (at(TokenKind::Identifier) && peek().text == "list") {
            Token t = advance();
            auto list = std::make_shared<TypeExpr>();
            list->span = ty->span;
            list->span.length = t.span.column + t.span.length - ty->span.column;
            list->node = TyList{ty};
            ty = list;
        }
        return ty;
    }

    TypeExprPtr parse_type_atom() {
        auto ty = std::make_shared<TypeExpr>();
        ty->span = peek().span;
        if (at(TokenKind::Identifier)) {
            ty->node = TyName{advance().text};
            return ty;
        }
        if (eat_punct("||")) {
            ty->node = TyIfc{expect_ident().text};
            expect_punct("||");
            return ty;
        }
        if (eat_punct("|")) {
            ty->node = TyComp{expect_ident().text};
            expect_punct("|");
            return ty;
        }
        if (at_punct("{")) {
            advance();
            TyRecord rec;
            do {
                std::string label = expect_ident().text;
                expect_punct(":");
                rec.fields.emplace_back(std::move(label), parse_type());
            } while (eat_punct(","));
            expect_punct("}");
            ty->node = std::move(rec);
            return ty;
        }
        if (at_punct("(")) {
            advance();
            if (eat_punct(")")) {
                ty->node = TyName{"unit"};
                return ty;
            }
            TypeExprPtr first = parse_type();
            if (at_punct(",")) {
                // `(t1, t2, ...)` is an alternative spelling of a tuple type.
                std::vector<TypeExprPtr> elems{first};
                while (eat_punct(",")) elems.push_back(parse_type());
                expect_punct(")");
                ty->node = TyTuple{std::move(elems)};
                return ty;
            }
            expect_punct(")");
            return first;
        }
        fail("a type");
    }

    // -------------------------------------------------------- expressions --

    bool at_expr_terminator() const {
        if (at(TokenKind::Eof)) return true;
        const Token& t = peek();
        if (t.kind == TokenKind::Keyword) {
            return t.text == "in" || t.text == "end" || t.text == "then" || t.text == "else" ||
                   t.text == "of" || at_decl_start();
        }
        return t.is_punct(")") || t.is_punct("}") || t.is_punct("]") || t.is_punct(",") ||
               t.is_punct(";") || t.is_punct("|");
    }

    ExprPtr parse_expr() {
        if (at_keyword("let")) return parse_let();
        if (at_keyword("if")) return parse_if();
        if (at_keyword("fn")) return parse_lambda();
        if (at_keyword("ifc_case")) return parse_ifc_case();
        return parse_compare();
    }

    ExprPtr parse_let() {
        Token kw = expect_keyword("let");
        ELet let;
        while (at_keyword("val") || at_keyword("fun")) {
            let.decls.push_back(parse_decl());
        }
        if (let.decls.empty()) fail("'val' or 'fun'");
        expect_keyword("in");
        let.body = parse_seq_body();
        expect_keyword("end");
        return mk_expr<ELet>(kw.span, std::move(let.decls), std::move(let.body));
    }

    // Expression body that may be a `;` sequence (let bodies, parentheses).
    ExprPtr parse_seq_body() {
        ExprPtr first = parse_expr();
        if (!at_punct(";")) return first;
        std::vector<ExprPtr> items{first};
        while (eat_punct(";")) items.push_back(parse_expr());
        return mk_expr<ESeq>(first->span, std::move(items));
    }

    ExprPtr parse_if() {
        Token kw = expect_keyword("if");
        ExprPtr cond = parse_expr();
        expect_keyword("then");
        ExprPtr then_branch = parse_expr();
        expect_keyword("else");
        ExprPtr else_branch = parse_expr();
        return mk_expr<EIf>(kw.span, std::move(cond), std::move(then_branch),
                            std::move(else_branch));
    }

    ExprPtr parse_lambda() {
        Token kw = expect_keyword("fn");
        PatternPtr param = parse_pattern(/*allow_annot=*/true);
        expect_punct("=>");
        ExprPtr body = parse_expr();
        return mk_expr<ELambda>(kw.span, std::move(param), std::move(body));
    }

    ExprPtr parse_ifc_case() {
        Token kw = expect_keyword("ifc_case");
        EIfcCase node;
        node.scrutinee = parse_expr();
        expect_keyword("of");
        for (;;) {
            IfcArm arm;
            arm.sig_span = peek().span;
            arm.sig = expect_ident().text;
            expect_punct("=>");
            arm.body = parse_expr();
            node.arms.push_back(std::move(arm));
            if (!eat_punct("|")) break;
        }
        expect_keyword("else");
        expect_punct("=>");
        node.else_body = parse_expr();
        return mk_expr<EIfcCase>(kw.span, std::move(node.scrutinee), std::move(node.arms),
                                 std::move(node.else_body));
    }

    ExprPtr parse_compare() {
        ExprPtr lhs = parse_cons();
        if (at_punct("=") || at_punct("<>") || at_punct("<") || at_punct("<=") || at_punct(">") ||
            at_punct(">=")) {
            Token op = advance();
            ExprPtr rhs = parse_cons();
            return mk_expr<EBinary>(op.span, op.text, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_cons() {
        ExprPtr head = parse_additive();
        if (at_punct("::")) {
            Token op = advance();
            ExprPtr tail = parse_cons();  // right-associative
            return mk_expr<EBinary>(op.span, op.text, std::move(head), std::move(tail));
        }
        return head;
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        while (at_punct("+") || at_punct("-") || at_punct("^")) {
            Token op = advance();
            ExprPtr rhs = parse_multiplicative();
            lhs = mk_expr<EBinary>(op.span, op.text, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_application();
        while (at_punct("*") || at_punct("/")) {
            Token op = advance();
            ExprPtr rhs = parse_application();
            lhs = mk_expr<EBinary>(op.span, op.text, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    bool at_atom_start() const {
        if (at(TokenKind::IntLiteral) || at(TokenKind::RealLiteral) ||
            at(TokenKind::StringLiteral) || at(TokenKind::Identifier)) {
            return true;
        }
        if (at_keyword("instanceOf")) return true;
        return at_punct("(") || at_punct("{") || at_punct("[");
    }

    ExprPtr parse_application() {
        ExprPtr fn = parse_postfix();
        while (!at_expr_terminator() && at_atom_start()) {
            ExprPtr arg = parse_postfix();
            SourceSpan span = fn->span;
            fn = mk_expr<EApp>(std::move(span), std::move(fn), std::move(arg));
        }
        return fn;
    }

    ExprPtr parse_postfix() {
        ExprPtr base = parse_atom();
        if (!at_punct(".")) return base;
        EDot dot;
        dot.base = base;
        while (eat_punct(".")) {
            PathSegment seg;
            seg.span = peek().span;
            seg.label = expect_ident().text;
            dot.path.push_back(std::move(seg));
        }
        SourceSpan span = base->span;
        return mk_expr<EDot>(std::move(span), std::move(dot.base), std::move(dot.path));
    }

    ExprPtr parse_atom() {
        SourceSpan span = peek().span;
        if (at(TokenKind::IntLiteral)) return mk_expr<EInt>(span, advance().int_value);
        if (at(TokenKind::RealLiteral)) return mk_expr<EReal>(span, advance().real_value);
        if (at(TokenKind::StringLiteral)) return mk_expr<EString>(span, advance().string_value);
        if (at_keyword("instanceOf")) {
            advance();
            return mk_expr<EInstanceOf>(span, parse_postfix());
        }
        if (at(TokenKind::Identifier)) {
            Token name = advance();
            if (name.text == "true") return mk_expr<EBool>(span, true);
            if (name.text == "false") return mk_expr<EBool>(span, false);
            if (at_punct("(") && component_names_.count(name.text)) {
                return parse_instantiate(name);
            }
            return mk_expr<EVar>(span, name.text);
        }
        if (at_punct("(")) {
            advance();
            if (eat_punct(")")) return mk_expr<EUnit>(span);
            ExprPtr first = parse_expr();
            if (at_punct(",")) {
                std::vector<ExprPtr> elems{first};
                while (eat_punct(",")) elems.push_back(parse_expr());
                expect_punct(")");
                return mk_expr<ETuple>(span, std::move(elems));
            }
            if (at_punct(";")) {
                std::vector<ExprPtr> items{first};
                while (eat_punct(";")) items.push_back(parse_expr());
                expect_punct(")");
                return mk_expr<ESeq>(span, std::move(items));
            }
            expect_punct(")");
            return first;
        }
        if (at_punct("[")) {
            advance();
            EList list;
            if (!eat_punct("]")) {
                list.elems.push_back(parse_expr());
                while (eat_punct(",")) list.elems.push_back(parse_expr());
                expect_punct("]");
            }
            return mk_expr<EList>(span, std::move(list.elems));
        }
        if (at_punct("{")) {
            advance();
            ERecord rec;
            do {
                std::string label = expect_ident().text;
                expect_punct("=");
                rec.fields.emplace_back(std::move(label), parse_expr());
            } while (eat_punct(","));
            expect_punct("}");
            return mk_expr<ERecord>(span, std::move(rec.fields));
        }
        fail("an expression");
    }

    ExprPtr parse_instantiate(const Token& name) {
        EInstantiate inst;
        inst.component = name.text;
        inst.component_span = name.span;
        expect_punct("(");
        while (!eat_punct(")")) {
            expect_keyword("val");
            std::string arg_name = expect_ident().text;
            expect_punct("=");
            inst.args.emplace_back(std::move(arg_name), parse_expr());
        }
        SourceSpan span = name.span;
        return mk_expr<EInstantiate>(std::move(span), std::move(inst.component),
                                     std::move(inst.component_span), std::move(inst.args));
    }

    std::vector<Token> tokens_;
    std::string filename_;
    std::size_t pos_ = 0;
    std::set<std::string> component_names_;
};

}  // namespace

std::shared_ptr<SurfaceProgram> parse_program(std::vector<Token> tokens,
                                              const std::string& filename) {
    return Parser(std::move(tokens), filename).run();
}

std::shared_ptr<SurfaceProgram> parse_source(const std::string& source,
                                             const std::string& filename) {
    return parse_program(tokenize(source, filename), filename);
}

}  // namespace comlang::syntax
