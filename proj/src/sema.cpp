#include "comlang/sema.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace comlang::sema {

using ast::get_if;

namespace {

// ------------------------------------------------------- type resolution

using LocalTypes = std::map<std::string, Type>;

std::optional<Type> base_type(const std::string& name) {
    if (name == "int") return t_int();
    if (name == "real") return t_real();
    if (name == "bool") return t_bool();
    if (name == "string") return t_string();
    if (name == "unit") return t_unit();
    return std::nullopt;
}

Type resolve_type(const ast::TypeExpr& ty, const SigEnv& env, const LocalTypes& locals) {
    if (auto* n = get_if<ast::TyName>(ty)) {
        if (auto bt = base_type(n->name)) return *bt;
        auto it = locals.find(n->name);
        if (it != locals.end()) return it->second;
        throw CompileError(errcode::type_mismatch, ty.span, "unknown type name '" + n->name + "'");
    }
    if (auto* i = get_if<ast::TyIfc>(ty)) {
        if (!env.find_interface(i->sig))
            throw CompileError(errcode::unbound_signature, ty.span,
                               "unbound interface signature '" + i->sig + "'");
        return t_ifc(i->sig);
    }
    if (auto* c = get_if<ast::TyComp>(ty)) {
        if (!env.find_component(c->sig))
            throw CompileError(errcode::unbound_signature, ty.span,
                               "unbound component signature '" + c->sig + "'");
        return t_comp(c->sig);
    }
    if (auto* t = get_if<ast::TyTuple>(ty)) {
        std::vector<Type> elems;
        for (auto& e : t->elems) elems.push_back(resolve_type(*e, env, locals));
        return t_tuple(std::move(elems));
    }
    if (auto* a = get_if<ast::TyArrow>(ty)) {
        Type from = resolve_type(*a->from, env, locals);
        Type to = resolve_type(*a->to, env, locals);
        return t_arrow(std::move(from), std::move(to));
    }
    if (auto* l = get_if<ast::TyList>(ty)) return t_list(resolve_type(*l->elem, env, locals));
    if (auto* r = get_if<ast::TyRecord>(ty)) {
        std::map<std::string, Type> fields;
        for (auto& [name, fty] : r->fields) {
            if (fields.count(name))
                throw CompileError(errcode::type_mismatch, ty.span,
                                   "duplicate record field '" + name + "'");
            fields.emplace(name, resolve_type(*fty, env, locals));
        }
        return t_record(std::move(fields));
    }
    throw CompileError(errcode::type_mismatch, ty.span, "unsupported type expression");
}

// ------------------------------------------------------- equality universe

bool admits_equality(const Type& t) {
    if (is<TInt>(t) || is<TBool>(t) || is<TString>(t) || is<TUnit>(t) || is<TComp>(t) ||
        is<TDynInst>(t))
        return true;
    if (is<TTuple>(t)) {
        for (auto& e : as<TTuple>(t).elems)
            if (!admits_equality(e)) return false;
        return true;
    }
    if (is<TRecord>(t)) {
        for (auto& [name, f] : as<TRecord>(t).fields) {
            (void)name;
            if (!admits_equality(f)) return false;
        }
        return true;
    }
    if (is<TList>(t)) return admits_equality(as<TList>(t).elem);
    return false;
}

}  // namespace

// ------------------------------------------------------- elaboration

ElaborationResult elaborate_sigs(const ast::SurfaceProgram& program) {
    ElaborationResult result;
    result.env = std::make_shared<SigEnv>();
    SigEnv& env = *result.env;

    for (auto& decl : program.decls) {
        try {
            if (auto* d = get_if<ast::DInterfaceSig>(*decl)) {
                if (env.contains(d->name))
                    throw CompileError(errcode::duplicate_signature, decl->span,
                                       "signature '" + d->name + "' is already declared");
                InterfaceSig sig;
                sig.name = d->name;
                sig.iid = d->iid;
                LocalTypes locals;
                // Type members first: later members may refer to earlier ones.
                for (auto& m : d->members) {
                    if (auto* tm = std::get_if<ast::SigTypeMember>(&m)) {
                        if (locals.count(tm->name))
                            throw CompileError(errcode::duplicate_signature, tm->span,
                                               "type member '" + tm->name + "' declared twice in '" +
                                                   d->name + "'");
                        InterfaceSig::TypeMember member;
                        member.name = tm->name;
                        if (tm->manifest) {
                            member.manifest = resolve_type(*tm->manifest, env, locals);
                            member.view = *member.manifest;
                        } else {
                            member.view = t_abstract(d->name, tm->name, fresh_stamp());
                        }
                        locals.emplace(tm->name, member.view);
                        sig.types.push_back(std::move(member));
                    }
                }
                std::set<std::string> seen;
                for (auto& m : d->members) {
                    if (auto* vm = std::get_if<ast::SigValMember>(&m)) {
                        if (!seen.insert(vm->name).second)
                            throw CompileError(errcode::duplicate_signature, vm->span,
                                               "value member '" + vm->name + "' declared twice in '" +
                                                   d->name + "'");
                        sig.values.emplace_back(vm->name, resolve_type(*vm->type, env, locals));
                    }
                }
                env.interfaces.emplace(d->name, std::move(sig));
            } else if (auto* c = get_if<ast::DComponentSig>(*decl)) {
                if (env.contains(c->name))
                    throw CompileError(errcode::duplicate_signature, decl->span,
                                       "signature '" + c->name + "' is already declared");
                ComponentSig sig;
                sig.name = c->name;
                std::set<std::string> labels;
                std::set<std::string> ifc_sigs;
                for (auto& ifc : c->interfaces) {
                    if (!labels.insert(ifc.label).second)
                        throw CompileError(errcode::duplicate_signature, ifc.span,
                                           "interface label '" + ifc.label + "' declared twice in '" +
                                               c->name + "'");
                    if (!ifc_sigs.insert(ifc.sig).second)
                        throw CompileError(errcode::duplicate_signature, ifc.span,
                                           "interface signature '" + ifc.sig +
                                               "' listed twice in '" + c->name + "'");
                    if (!env.find_interface(ifc.sig))
                        throw CompileError(errcode::unbound_signature, ifc.span,
                                           "unbound interface signature '" + ifc.sig + "'");
                    sig.interfaces.emplace_back(ifc.label, ifc.sig);
                }
                env.components.emplace(c->name, std::move(sig));
            }
        } catch (const CompileError& err) {
            result.errors.push_back(err);
        }
    }
    return result;
}

// ------------------------------------------------------- IDL expressibility

namespace {

bool expressible_type(const Type& t, std::set<std::string>& visiting) {
    if (is<TInt>(t) || is<TBool>(t) || is<TReal>(t) || is<TString>(t) || is<TIfc>(t) ||
        is<TComp>(t))
        return true;
    if (is<TRecord>(t)) {
        for (auto& [name, f] : as<TRecord>(t).fields) {
            (void)name;
            if (!expressible_type(f, visiting)) return false;
        }
        return true;
    }
    if (is<TList>(t)) return expressible_type(as<TList>(t).elem, visiting);
    if (is<TData>(t)) {
        auto& d = as<TData>(t);
        if (visiting.count(d.name)) return true;  // recursive occurrence is fine
        visiting.insert(d.name);
        bool ok = true;
        for (auto& [ctor, arg] : d.ctors) {
            (void)ctor;
            if (arg && !expressible_type(arg, visiting)) ok = false;
        }
        visiting.erase(d.name);
        return ok;
    }
    return false;  // arrow, tuple, unit, abstract, dynamic instance
}

bool expressible_side(const Type& t) {
    // One side of a method arrow: unit, expressible, or a tuple of expressible.
    if (is<TUnit>(t)) return true;
    if (idl_expressible_type(t)) return true;
    if (is<TTuple>(t)) {
        for (auto& e : as<TTuple>(t).elems)
            if (!idl_expressible_type(e)) return false;
        return true;
    }
    return false;
}

bool expressible_member(const Type& t) {
    if (is<TInt>(t) || is<TBool>(t) || is<TReal>(t) || is<TString>(t)) return true;
    if (is<TArrow>(t)) {
        auto& a = as<TArrow>(t);
        return expressible_side(a.from) && expressible_side(a.to);
    }
    return false;
}

}  // namespace

bool idl_expressible_type(const Type& type) {
    std::set<std::string> visiting;
    return expressible_type(type, visiting);
}

ExpressibilityReport idl_expressible_interface(const InterfaceSig& sig) {
    ExpressibilityReport report;
    for (auto& tm : sig.types) {
        if (!tm.manifest) {
            report.ok = false;
            report.violations.push_back("type member '" + tm.name +
                                        "' is abstract and has no wire representation");
        }
    }
    for (auto& [name, ty] : sig.values) {
        if (!expressible_member(ty)) {
            report.ok = false;
            report.violations.push_back("member '" + name + "' has type " + show_type(ty) +
                                        " which cannot cross the component boundary");
        }
    }
    return report;
}

ExpressibilityReport check_exportable(const TypedProgram& program, const std::string& component,
                                      const std::string& sig_name) {
    ExpressibilityReport report;
    auto it = program.components.find(component);
    if (it == program.components.end()) {
        report.ok = false;
        report.violations.push_back("unknown component '" + component + "'");
        return report;
    }
    if (!it->second.params.empty()) {
        report.ok = false;
        report.violations.push_back("component '" + component + "' takes " +
                                    std::to_string(it->second.params.size()) +
                                    " parameter(s); only nullary components can be exported");
    }
    const ComponentSig* sig = program.sigs->find_component(sig_name);
    if (!sig) {
        report.ok = false;
        report.violations.push_back("unknown component signature '" + sig_name + "'");
        return report;
    }
    for (auto& [label, ifc_name] : sig->interfaces) {
        const InterfaceSig* ifc = program.sigs->find_interface(ifc_name);
        if (!ifc) {
            report.ok = false;
            report.violations.push_back("unbound interface signature '" + ifc_name + "'");
            continue;
        }
        if (!ifc->iid) {
            report.ok = false;
            report.violations.push_back("interface '" + ifc_name + "' (label " + label +
                                        ") has no IID; add with_iid");
        }
        auto inner = idl_expressible_interface(*ifc);
        for (auto& v : inner.violations) {
            report.ok = false;
            report.violations.push_back("interface '" + ifc_name + "': " + v);
        }
    }
    return report;
}

// ------------------------------------------------------- typechecker

namespace {

struct Binding {
    Type type;
    enum class Special { None, Hd, Tl, Null } special = Special::None;
};

class Typechecker {
public:
    Typechecker(std::shared_ptr<ast::SurfaceProgram> program, SigEnvPtr sigs)
        : program_(std::move(program)), sigs_(std::move(sigs)) {
        result_.program = program_;
        result_.sigs = sigs_;
        push_scope();
        bind("print", {t_arrow(t_string(), t_unit()), Binding::Special::None});
        bind("sleep", {t_arrow(t_int(), t_unit()), Binding::Special::None});
        bind("intToString", {t_arrow(t_int(), t_string()), Binding::Special::None});
        bind("hd", {t_unit(), Binding::Special::Hd});
        bind("tl", {t_unit(), Binding::Special::Tl});
        bind("null", {t_unit(), Binding::Special::Null});
    }

    TypedProgram run() {
        for (auto& decl : program_->decls) check_top_decl(*decl);
        return std::move(result_);
    }

private:
    std::shared_ptr<ast::SurfaceProgram> program_;
    SigEnvPtr sigs_;
    TypedProgram result_;
    std::vector<std::map<std::string, Binding>> scopes_;
    // Synthetic component signatures introduced by ifc_case arm narrowing.
    std::map<std::string, ComponentSig> case_sigs_;
    LocalTypes local_types_;   // `type N = rep` bindings inside an impl block
    std::string current_fun_;  // for the recursion hint

    // ---- scopes

    void push_scope() { scopes_.emplace_back(); }
    void pop_scope() { scopes_.pop_back(); }

    struct ScopeGuard {
        Typechecker& tc;
        explicit ScopeGuard(Typechecker& t) : tc(t) { tc.push_scope(); }
        ~ScopeGuard() { tc.pop_scope(); }
    };

    void bind(const std::string& name, Binding b) {
        scopes_.back().insert_or_assign(name, std::move(b));
    }

    const Binding* lookup(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto found = it->find(name);
            if (found != it->end()) return &found->second;
        }
        return nullptr;
    }

    // ---- helpers

    Type resolve(const ast::TypeExpr& ty) { return resolve_type(ty, *sigs_, local_types_); }

    [[noreturn]] void fail(const SourceSpan& span, const std::string& msg) const {
        throw CompileError(errcode::type_mismatch, span, msg);
    }

    Type record(const ast::Expr& e, Type t) {
        result_.expr_types[&e] = t;
        return t;
    }

    const ComponentSig* find_comp_sig(const std::string& name) const {
        auto it = case_sigs_.find(name);
        if (it != case_sigs_.end()) return &it->second;
        return sigs_->find_component(name);
    }

    bool width_compatible(const Type& expected, const Type& actual) const {
        if (type_equal(expected, actual)) return true;
        if (is<TIfc>(expected) && is<TIfc>(actual)) {
            const InterfaceSig* want = sigs_->find_interface(as<TIfc>(expected).sig);
            const InterfaceSig* have = sigs_->find_interface(as<TIfc>(actual).sig);
            if (want && have) return match_interface(*have, *want).ok;
        }
        if (is<TComp>(expected) && is<TComp>(actual)) {
            const ComponentSig* want = find_comp_sig(as<TComp>(expected).sig);
            const ComponentSig* have = find_comp_sig(as<TComp>(actual).sig);
            if (want && have) return match_component(*have, *sigs_, *want, *sigs_).ok;
        }
        return false;
    }

    // ---- declarations

    void check_top_decl(ast::Decl& decl) {
        if (ast::is<ast::DInterfaceSig>(decl) || ast::is<ast::DComponentSig>(decl))
            return;  // handled during elaboration
        if (auto* v = get_if<ast::DVal>(decl)) {
            check_val(*v);
        } else if (auto* f = get_if<ast::DFun>(decl)) {
            check_fun(*f, std::nullopt, decl.span);
        } else if (auto* c = get_if<ast::DComponent>(decl)) {
            check_component(*c, decl.span);
        } else if (auto* i = get_if<ast::DImport>(decl)) {
            check_import(*i, decl.span);
        } else if (auto* e = get_if<ast::DExport>(decl)) {
            check_export(*e, decl.span);
        }
    }

    void check_val(ast::DVal& v) {
        if (auto* pv = get_if<ast::PVar>(*v.pattern); pv && pv->annot) {
            Type want = resolve(*pv->annot);
            check(*v.expr, want);
            bind(pv->name, {want, Binding::Special::None});
            return;
        }
        Type got = synth(*v.expr);
        bind_pattern(*v.pattern, got);
    }

    void bind_pattern(const ast::Pattern& p, const Type& t) {
        if (ast::is<ast::PWild>(p)) return;
        if (ast::is<ast::PUnit>(p)) {
            if (!is<TUnit>(t))
                fail(p.span, "pattern expects unit but the value has type " + show_type(t));
            return;
        }
        if (auto* v = get_if<ast::PVar>(p)) {
            if (v->annot) {
                Type want = resolve(*v->annot);
                if (!type_equal(want, t))
                    fail(p.span, "annotation " + show_type(want) +
                                     " does not match inferred type " + show_type(t));
            }
            bind(v->name, {t, Binding::Special::None});
            return;
        }
        if (auto* tup = get_if<ast::PTuple>(p)) {
            if (!is<TTuple>(t))
                fail(p.span, "tuple pattern against non-tuple type " + show_type(t));
            auto& elems = as<TTuple>(t).elems;
            if (elems.size() != tup->elems.size())
                fail(p.span, "tuple pattern has " + std::to_string(tup->elems.size()) +
                                 " components but the value has " + std::to_string(elems.size()));
            for (size_t i = 0; i < elems.size(); ++i) bind_pattern(*tup->elems[i], elems[i]);
            return;
        }
        if (auto* lit = get_if<ast::PLit>(p)) {
            Type want = std::holds_alternative<std::int64_t>(lit->value) ? t_int()
                        : std::holds_alternative<bool>(lit->value)       ? t_bool()
                                                                         : t_string();
            if (!type_equal(want, t))
                fail(p.span, "literal pattern of type " + show_type(want) +
                                 " against a value of type " + show_type(t));
            return;
        }
        fail(p.span, "unsupported pattern");
    }

    std::optional<Type> determined(const ast::Pattern& p) {
        if (ast::is<ast::PUnit>(p)) return t_unit();
        if (auto* v = get_if<ast::PVar>(p)) {
            if (v->annot) return resolve(*v->annot);
            return std::nullopt;
        }
        if (auto* lit = get_if<ast::PLit>(p)) {
            if (std::holds_alternative<std::int64_t>(lit->value)) return t_int();
            if (std::holds_alternative<bool>(lit->value)) return t_bool();
            return t_string();
        }
        if (auto* tup = get_if<ast::PTuple>(p)) {
            std::vector<Type> elems;
            for (auto& e : tup->elems) {
                auto t = determined(*e);
                if (!t) return std::nullopt;
                elems.push_back(*t);
            }
            return t_tuple(std::move(elems));
        }
        return std::nullopt;
    }

    Type check_fun(ast::DFun& f, std::optional<Type> expected, const SourceSpan& span) {
        size_t arity = f.clauses.front().params.size();
        std::vector<Type> param_types;
        std::optional<Type> result_type;

        if (expected) {
            Type t = *expected;
            for (size_t i = 0; i < arity; ++i) {
                if (!is<TArrow>(t))
                    fail(span, "function '" + f.name + "' has " + std::to_string(arity) +
                                   " parameter(s) but its declared type " + show_type(*expected) +
                                   " has fewer arrows");
                param_types.push_back(as<TArrow>(t).from);
                t = as<TArrow>(t).to;
            }
            result_type = t;
            if (f.result_annot) {
                Type annot = resolve(*f.result_annot);
                if (!type_equal(annot, *result_type))
                    fail(span, "result annotation " + show_type(annot) + " does not match " +
                                   show_type(*result_type) + " required here");
            }
        } else {
            for (size_t i = 0; i < arity; ++i) {
                std::optional<Type> t;
                for (auto& clause : f.clauses) {
                    t = determined(*clause.params[i]);
                    if (t) break;
                }
                if (!t)
                    fail(span, "cannot infer the type of parameter " + std::to_string(i + 1) +
                                   " of '" + f.name + "'; add an annotation");
                param_types.push_back(*t);
            }
            if (f.result_annot) result_type = resolve(*f.result_annot);
        }

        auto arrow_of = [&](const Type& result) {
            Type t = result;
            for (auto it = param_types.rbegin(); it != param_types.rend(); ++it)
                t = t_arrow(*it, t);
            return t;
        };

        std::string saved_fun = current_fun_;
        current_fun_ = result_type ? std::string() : f.name;
        if (result_type) bind(f.name, {arrow_of(*result_type), Binding::Special::None});

        for (auto& clause : f.clauses) {
            ScopeGuard guard(*this);
            for (size_t i = 0; i < arity; ++i) bind_pattern(*clause.params[i], param_types[i]);
            if (result_type) {
                check(*clause.body, *result_type);
            } else {
                result_type = synth(*clause.body);
                current_fun_ = saved_fun;
                bind_outside_clause(f.name, arrow_of(*result_type));
            }
        }
        current_fun_ = saved_fun;

        Type full = arrow_of(*result_type);
        bind(f.name, {full, Binding::Special::None});
        return full;
    }

    // Binds into the scope enclosing the current clause scope.
    void bind_outside_clause(const std::string& name, Type t) {
        auto& target = scopes_.size() >= 2 ? scopes_[scopes_.size() - 2] : scopes_.back();
        target.insert_or_assign(name, Binding{std::move(t), Binding::Special::None});
    }

    void check_component(ast::DComponent& c, const SourceSpan& span) {
        if (result_.components.count(c.name) || lookup(c.name))
            fail(span, "'" + c.name + "' is already bound");
        const ComponentSig* sig = sigs_->find_component(c.sig);
        if (!sig)
            throw CompileError(errcode::unbound_signature, c.sig_span,
                               "unbound component signature '" + c.sig + "'");

        ComponentInfo info;
        info.decl = &c;
        info.sig = c.sig;
        for (auto& param : c.params) info.params.emplace_back(param.name, resolve(*param.type));
        result_.components.emplace(c.name, info);

        ScopeGuard guard(*this);
        for (size_t i = 0; i < c.params.size(); ++i)
            bind(c.params[i].name, {info.params[i].second, Binding::Special::None});

        for (auto& local : c.locals) {
            if (auto* v = get_if<ast::DVal>(*local))
                check_val(*v);
            else if (auto* f = get_if<ast::DFun>(*local))
                check_fun(*f, std::nullopt, local->span);
        }

        std::set<std::string> covered;
        for (auto& impl : c.impls) {
            const std::string* ifc_name = sig->find_label(impl.label);
            if (!ifc_name)
                throw CompileError(errcode::no_such_interface, impl.span,
                                   "signature '" + c.sig + "' declares no interface labeled '" +
                                       impl.label + "'");
            if (!covered.insert(impl.label).second)
                fail(impl.span, "interface '" + impl.label + "' implemented twice");
            check_impl(impl, *sigs_->find_interface(*ifc_name));
        }
        for (auto& [label, ifc_name] : sig->interfaces) {
            (void)ifc_name;
            if (!covered.count(label))
                throw CompileError(errcode::no_such_interface, span,
                                   "component '" + c.name + "' does not implement interface '" +
                                       label + "' required by '" + c.sig + "'");
        }
    }

    void check_impl(ast::InterfaceImpl& impl, const InterfaceSig& sig) {
        ScopeGuard guard(*this);
        LocalTypes saved = local_types_;

        std::map<std::string, Type> reps;
        for (auto& bindty : impl.types) {
            Type rep = resolve(*bindty.rep);
            if (reps.count(bindty.name))
                fail(bindty.span,
                     "type '" + bindty.name + "' bound twice in interface '" + impl.label + "'");
            reps.emplace(bindty.name, rep);
            local_types_.insert_or_assign(bindty.name, rep);
        }
        for (auto& tm : sig.types) {
            auto it = reps.find(tm.name);
            if (tm.manifest) {
                if (it != reps.end() && !type_equal(it->second, *tm.manifest))
                    fail(impl.span, "type '" + tm.name + "' must equal " +
                                        show_type(*tm.manifest) + " in signature '" + sig.name +
                                        "'");
                if (it == reps.end()) local_types_.insert_or_assign(tm.name, *tm.manifest);
            } else if (it == reps.end()) {
                fail(impl.span, "interface '" + impl.label + "' does not define type '" + tm.name +
                                    "' required by signature '" + sig.name + "'");
            }
        }
        for (auto& [name, rep] : reps) {
            (void)rep;
            if (!sig.find_type(name))
                fail(impl.span,
                     "signature '" + sig.name + "' declares no type member '" + name + "'");
        }

        std::map<std::string, Type> subst;
        for (auto& tm : sig.types)
            if (!tm.manifest) subst.emplace(tm.name, reps.at(tm.name));

        std::set<std::string> provided;
        for (auto& member : impl.members) {
            if (auto* v = get_if<ast::DVal>(*member)) {
                auto* pv = get_if<ast::PVar>(*v->pattern);
                if (!pv) fail(member->span, "interface members must bind a plain name");
                const Type* want = sig.find_value(pv->name);
                if (want) {
                    Type expected = substitute_abstract(*want, sig.name, subst);
                    if (pv->annot) {
                        Type annot = resolve(*pv->annot);
                        if (!type_equal(annot, expected))
                            fail(member->span, "annotation " + show_type(annot) +
                                                   " does not match " + show_type(expected) +
                                                   " required by signature '" + sig.name + "'");
                    }
                    check(*v->expr, expected);
                    bind(pv->name, {expected, Binding::Special::None});
                    provided.insert(pv->name);
                } else {
                    check_val(*v);
                }
            } else if (auto* f = get_if<ast::DFun>(*member)) {
                const Type* want = sig.find_value(f->name);
                if (want) {
                    Type expected = substitute_abstract(*want, sig.name, subst);
                    check_fun(*f, expected, member->span);
                    provided.insert(f->name);
                } else {
                    check_fun(*f, std::nullopt, member->span);
                }
            }
        }
        for (auto& [name, ty] : sig.values) {
            (void)ty;
            if (!provided.count(name))
                fail(impl.span, "interface '" + impl.label + "' does not provide member '" + name +
                                    "' required by signature '" + sig.name + "'");
        }

        local_types_ = std::move(saved);
    }

    void check_import(ast::DImport& i, const SourceSpan& span) {
        if (result_.components.count(i.name) || lookup(i.name))
            fail(span, "'" + i.name + "' is already bound");
        const ComponentSig* sig = sigs_->find_component(i.sig);
        if (!sig)
            throw CompileError(errcode::unbound_signature, i.sig_span,
                               "unbound component signature '" + i.sig + "'");
        for (auto& [label, ifc_name] : sig->interfaces) {
            const InterfaceSig* ifc = sigs_->find_interface(ifc_name);
            if (!ifc || !ifc->iid)
                fail(i.sig_span, "interface '" + ifc_name + "' (label " + label +
                                     ") of imported signature '" + i.sig +
                                     "' has no IID; add with_iid");
        }
        ComponentInfo info;
        info.import_decl = &i;
        info.sig = i.sig;
        result_.components.emplace(i.name, info);
    }

    void check_export(ast::DExport& e, const SourceSpan& span) {
        auto it = result_.components.find(e.component);
        if (it == result_.components.end())
            fail(e.component_span, "unknown component '" + e.component + "'");
        if (it->second.import_decl)
            fail(e.component_span, "'" + e.component +
                                       "' is imported; only components defined here can be "
                                       "exported");
        const ComponentSig* want = sigs_->find_component(e.sig);
        if (!want)
            throw CompileError(errcode::unbound_signature, e.sig_span,
                               "unbound component signature '" + e.sig + "'");
        const ComponentSig* have = sigs_->find_component(it->second.sig);
        auto match = match_component(*have, *sigs_, *want, *sigs_);
        if (!match.ok)
            throw CompileError(errcode::signature_mismatch, span,
                               "component '" + e.component + "' does not match signature '" +
                                   e.sig + "': " + match.describe());
        auto report = check_exportable(result_, e.component, e.sig);
        if (!report.ok) {
            std::ostringstream msg;
            msg << "component '" << e.component << "' cannot be exported";
            for (auto& v : report.violations) msg << "; " << v;
            throw CompileError(errcode::not_exportable, span, msg.str());
        }
        result_.exports.push_back(&e);
    }

    // ---- expressions

    void check(ast::Expr& e, const Type& expected) {
        if (auto* lam = get_if<ast::ELambda>(e); lam && is<TArrow>(expected)) {
            ScopeGuard guard(*this);
            bind_pattern(*lam->param, as<TArrow>(expected).from);
            check(*lam->body, as<TArrow>(expected).to);
            record(e, expected);
            return;
        }
        if (auto* list = get_if<ast::EList>(e); list && is<TList>(expected)) {
            for (auto& elem : list->elems) check(*elem, as<TList>(expected).elem);
            record(e, expected);
            return;
        }
        if (auto* tup = get_if<ast::ETuple>(e); tup && is<TTuple>(expected)) {
            auto& want = as<TTuple>(expected).elems;
            if (want.size() == tup->elems.size()) {
                for (size_t i = 0; i < want.size(); ++i) check(*tup->elems[i], want[i]);
                record(e, expected);
                return;
            }
        }
        if (auto* rec = get_if<ast::ERecord>(e); rec && is<TRecord>(expected)) {
            auto& want = as<TRecord>(expected).fields;
            bool labels_match = want.size() == rec->fields.size();
            if (labels_match) {
                for (auto& [name, init] : rec->fields) {
                    (void)init;
                    if (!want.count(name)) {
                        labels_match = false;
                        break;
                    }
                }
            }
            if (labels_match) {
                for (auto& [name, init] : rec->fields) check(*init, want.at(name));
                record(e, expected);
                return;
            }
        }
        if (auto* iff = get_if<ast::EIf>(e)) {
            check(*iff->cond, t_bool());
            check(*iff->then_branch, expected);
            check(*iff->else_branch, expected);
            record(e, expected);
            return;
        }
        if (auto* let = get_if<ast::ELet>(e)) {
            ScopeGuard guard(*this);
            for (auto& d : let->decls) {
                if (auto* v = get_if<ast::DVal>(*d))
                    check_val(*v);
                else if (auto* f = get_if<ast::DFun>(*d))
                    check_fun(*f, std::nullopt, d->span);
            }
            check(*let->body, expected);
            record(e, expected);
            return;
        }
        if (auto* seq = get_if<ast::ESeq>(e)) {
            for (size_t i = 0; i + 1 < seq->items.size(); ++i) synth(*seq->items[i]);
            check(*seq->items.back(), expected);
            record(e, expected);
            return;
        }
        Type actual = synth(e);
        if (!width_compatible(expected, actual))
            fail(e.span, "expected " + show_type(expected) + " but found " + show_type(actual));
        record(e, expected);
    }

    Type synth(ast::Expr& e) {
        if (ast::is<ast::EInt>(e)) return record(e, t_int());
        if (ast::is<ast::EReal>(e)) return record(e, t_real());
        if (ast::is<ast::EBool>(e)) return record(e, t_bool());
        if (ast::is<ast::EString>(e)) return record(e, t_string());
        if (ast::is<ast::EUnit>(e)) return record(e, t_unit());

        if (auto* v = get_if<ast::EVar>(e)) {
            const Binding* b = lookup(v->name);
            if (!b) {
                if (v->name == current_fun_)
                    fail(e.span, "recursive function '" + v->name +
                                     "' needs a result annotation before it can call itself");
                throw CompileError(errcode::unbound_variable, e.span,
                                   "unbound variable '" + v->name + "'");
            }
            if (b->special != Binding::Special::None)
                fail(e.span, "'" + v->name + "' must be applied to a list");
            return record(e, b->type);
        }

        if (auto* tup = get_if<ast::ETuple>(e)) {
            std::vector<Type> elems;
            for (auto& elem : tup->elems) elems.push_back(synth(*elem));
            return record(e, t_tuple(std::move(elems)));
        }

        if (auto* rec = get_if<ast::ERecord>(e)) {
            std::map<std::string, Type> fields;
            for (auto& [name, init] : rec->fields) {
                if (fields.count(name)) fail(e.span, "duplicate record field '" + name + "'");
                fields.emplace(name, synth(*init));
            }
            return record(e, t_record(std::move(fields)));
        }

        if (auto* list = get_if<ast::EList>(e)) {
            if (list->elems.empty())
                fail(e.span, "cannot infer the element type of an empty list; add an annotation");
            Type elem = synth(*list->elems.front());
            for (size_t i = 1; i < list->elems.size(); ++i) check(*list->elems[i], elem);
            return record(e, t_list(elem));
        }

        if (auto* lam = get_if<ast::ELambda>(e)) {
            auto param = determined(*lam->param);
            if (!param)
                fail(e.span, "cannot infer the parameter type of this function; add an annotation");
            ScopeGuard guard(*this);
            bind_pattern(*lam->param, *param);
            Type body = synth(*lam->body);
            return record(e, t_arrow(*param, body));
        }

        if (auto* app = get_if<ast::EApp>(e)) return record(e, synth_app(*app, e.span));
        if (auto* bin = get_if<ast::EBinary>(e)) return record(e, synth_binary(*bin, e.span));

        if (auto* let = get_if<ast::ELet>(e)) {
            ScopeGuard guard(*this);
            for (auto& d : let->decls) {
                if (auto* v = get_if<ast::DVal>(*d))
                    check_val(*v);
                else if (auto* f = get_if<ast::DFun>(*d))
                    check_fun(*f, std::nullopt, d->span);
            }
            return record(e, synth(*let->body));
        }

        if (auto* iff = get_if<ast::EIf>(e)) {
            check(*iff->cond, t_bool());
            Type then_t = synth(*iff->then_branch);
            check(*iff->else_branch, then_t);
            return record(e, then_t);
        }

        if (auto* seq = get_if<ast::ESeq>(e)) {
            Type last = t_unit();
            for (auto& item : seq->items) last = synth(*item);
            return record(e, last);
        }

        if (auto* dot = get_if<ast::EDot>(e)) return record(e, synth_dot(*dot));
        if (auto* inst = get_if<ast::EInstantiate>(e))
            return record(e, synth_instantiate(*inst, e.span));
        if (auto* c = get_if<ast::EIfcCase>(e)) return record(e, synth_ifc_case(*c, e.span));

        if (auto* io = get_if<ast::EInstanceOf>(e)) {
            Type arg = synth(*io->arg);
            if (!is<TIfc>(arg))
                fail(e.span, "instanceOf expects an interface value, found " + show_type(arg));
            return record(e, t_dyn_inst());
        }

        fail(e.span, "unsupported expression");
    }

    Type synth_app(ast::EApp& app, const SourceSpan& span) {
        if (auto* v = get_if<ast::EVar>(*app.fn)) {
            const Binding* b = lookup(v->name);
            if (b && b->special != Binding::Special::None) {
                Type arg = synth(*app.arg);
                if (!is<TList>(arg))
                    fail(span, "'" + v->name + "' expects a list, found " + show_type(arg));
                Type out;
                switch (b->special) {
                    case Binding::Special::Hd: out = as<TList>(arg).elem; break;
                    case Binding::Special::Tl: out = arg; break;
                    default: out = t_bool(); break;
                }
                record(*app.fn, t_arrow(arg, out));
                return out;
            }
        }
        Type fn = synth(*app.fn);
        if (!is<TArrow>(fn)) fail(span, "cannot apply a value of type " + show_type(fn));
        check(*app.arg, as<TArrow>(fn).from);
        return as<TArrow>(fn).to;
    }

    Type synth_binary(ast::EBinary& bin, const SourceSpan& span) {
        const std::string& op = bin.op;
        if (op == "::") {
            Type tail = synth(*bin.rhs);
            if (!is<TList>(tail))
                fail(span, ":: expects a list on the right, found " + show_type(tail));
            check(*bin.lhs, as<TList>(tail).elem);
            return tail;
        }
        Type lhs = synth(*bin.lhs);
        if (op == "+" || op == "-" || op == "*") {
            if (!is<TInt>(lhs) && !is<TReal>(lhs))
                fail(span, "'" + op + "' expects int or real operands, found " + show_type(lhs));
            check(*bin.rhs, lhs);
            return lhs;
        }
        if (op == "/") {
            if (!is<TReal>(lhs))
                fail(span, "'/' expects real operands, found " + show_type(lhs));
            check(*bin.rhs, lhs);
            return lhs;
        }
        if (op == "^") {
            if (!is<TString>(lhs))
                fail(span, "'^' expects string operands, found " + show_type(lhs));
            check(*bin.rhs, lhs);
            return lhs;
        }
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
            if (!is<TInt>(lhs) && !is<TReal>(lhs) && !is<TString>(lhs))
                fail(span, "'" + op + "' expects int, real or string operands, found " +
                               show_type(lhs));
            check(*bin.rhs, lhs);
            return t_bool();
        }
        if (op == "=" || op == "<>") {
            if (!admits_equality(lhs))
                fail(span,
                     "values of type " + show_type(lhs) + " cannot be compared for equality");
            check(*bin.rhs, lhs);
            return t_bool();
        }
        fail(span, "unknown operator '" + op + "'");
    }

    Type synth_dot(ast::EDot& dot) {
        Type t = synth(*dot.base);
        for (auto& seg : dot.path) {
            if (is<TComp>(t)) {
                const ComponentSig* sig = find_comp_sig(as<TComp>(t).sig);
                if (!sig)
                    throw CompileError(errcode::unbound_signature, seg.span,
                                       "unbound component signature '" + as<TComp>(t).sig + "'");
                const std::string* ifc = sig->find_label(seg.label);
                if (!ifc)
                    throw CompileError(errcode::no_such_interface, seg.span,
                                       "signature '" + sig->name + "' has no interface '" +
                                           seg.label + "'");
                t = t_ifc(*ifc);
            } else if (is<TIfc>(t)) {
                const InterfaceSig* sig = sigs_->find_interface(as<TIfc>(t).sig);
                if (!sig)
                    throw CompileError(errcode::unbound_signature, seg.span,
                                       "unbound interface signature '" + as<TIfc>(t).sig + "'");
                const Type* member = sig->find_value(seg.label);
                if (!member) {
                    std::string msg =
                        "interface '" + sig->name + "' has no member '" + seg.label + "'";
                    if (sig->find_type(seg.label)) msg += " (it is a type member)";
                    throw CompileError(errcode::no_such_member, seg.span, msg);
                }
                t = *member;
            } else if (is<TRecord>(t)) {
                auto& fields = as<TRecord>(t).fields;
                auto it = fields.find(seg.label);
                if (it == fields.end())
                    throw CompileError(errcode::no_such_member, seg.span,
                                       "record has no field '" + seg.label + "'");
                t = it->second;
            } else {
                fail(seg.span, "cannot select '" + seg.label + "' from a value of type " +
                                   show_type(t));
            }
        }
        return t;
    }

    Type synth_instantiate(ast::EInstantiate& inst, const SourceSpan& span) {
        auto it = result_.components.find(inst.component);
        if (it == result_.components.end())
            fail(inst.component_span, "unknown component '" + inst.component + "'");
        const ComponentInfo& info = it->second;
        if (info.import_decl) {
            if (!inst.args.empty())
                fail(span, "imported component '" + inst.component + "' takes no arguments");
            return t_comp(info.sig);
        }
        if (inst.args.size() != info.params.size())
            fail(span, "component '" + inst.component + "' expects " +
                           std::to_string(info.params.size()) + " argument(s), got " +
                           std::to_string(inst.args.size()));
        std::set<std::string> seen;
        for (auto& [name, expr] : inst.args) {
            if (!seen.insert(name).second)
                fail(expr->span, "argument '" + name + "' given twice");
            const Type* want = nullptr;
            for (auto& [pname, pty] : info.params)
                if (pname == name) want = &pty;
            if (!want)
                fail(expr->span,
                     "component '" + inst.component + "' has no parameter '" + name + "'");
            check(*expr, *want);
        }
        return t_comp(info.sig);
    }

    Type synth_ifc_case(ast::EIfcCase& c, const SourceSpan& span) {
        Type scrutinee = synth(*c.scrutinee);
        if (!is<TComp>(scrutinee) && !is<TDynInst>(scrutinee))
            fail(span, "ifc_case expects a component or dynamic instance, found " +
                           show_type(scrutinee));

        const ast::EVar* var = get_if<ast::EVar>(*c.scrutinee);
        std::optional<Type> result;
        for (auto& arm : c.arms) {
            if (!sigs_->find_interface(arm.sig))
                throw CompileError(errcode::unbound_signature, arm.sig_span,
                                   "unbound interface signature '" + arm.sig + "'");
            ScopeGuard guard(*this);
            if (var) {
                // Inside the arm the scrutinee is known to support the probed
                // interface: narrow it to a one-interface component type.
                std::string synthetic = "$case:" + arm.sig;
                if (!case_sigs_.count(synthetic)) {
                    ComponentSig narrow;
                    narrow.name = synthetic;
                    narrow.interfaces.emplace_back(arm.sig, arm.sig);
                    case_sigs_.emplace(synthetic, std::move(narrow));
                }
                bind(var->name, {t_comp(synthetic), Binding::Special::None});
            }
            if (result) {
                check(*arm.body, *result);
            } else {
                result = synth(*arm.body);
            }
        }
        if (result) {
            check(*c.else_body, *result);
        } else {
            result = synth(*c.else_body);
        }
        return *result;
    }
};

}  // namespace

TypedProgram typecheck(std::shared_ptr<ast::SurfaceProgram> program,
                       std::shared_ptr<const SigEnv> sigs) {
    Typechecker tc(std::move(program), std::move(sigs));
    return tc.run();
}

TypedProgram check_program(std::shared_ptr<ast::SurfaceProgram> program) {
    auto elab = elaborate_sigs(*program);
    if (!elab.errors.empty()) throw elab.errors.front();
    return typecheck(std::move(program), std::move(elab.env));
}

}  // namespace comlang::sema
