#include "comlang/ast.hpp"

namespace comlang::ast {

namespace {

template <class T>
bool seq_equal(const std::vector<std::shared_ptr<T>>& a, const std::vector<std::shared_ptr<T>>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!equal(*a[i], *b[i])) return false;
    }
    return true;
}

bool opt_equal(const TypeExprPtr& a, const TypeExprPtr& b) {
    if (!a || !b) return !a && !b;
    return equal(*a, *b);
}

}  // namespace

bool equal(const TypeExpr& a, const TypeExpr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (is<TyName>(a)) return as<TyName>(a).name == as<TyName>(b).name;
    if (is<TyIfc>(a)) return as<TyIfc>(a).sig == as<TyIfc>(b).sig;
    if (is<TyComp>(a)) return as<TyComp>(a).sig == as<TyComp>(b).sig;
    if (is<TyTuple>(a)) return seq_equal(as<TyTuple>(a).elems, as<TyTuple>(b).elems);
    if (is<TyArrow>(a)) {
        return equal(*as<TyArrow>(a).from, *as<TyArrow>(b).from) &&
               equal(*as<TyArrow>(a).to, *as<TyArrow>(b).to);
    }
    if (is<TyList>(a)) return equal(*as<TyList>(a).elem, *as<TyList>(b).elem);
    const auto& fa = as<TyRecord>(a).fields;
    const auto& fb = as<TyRecord>(b).fields;
    if (fa.size() != fb.size()) return false;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        if (fa[i].first != fb[i].first || !equal(*fa[i].second, *fb[i].second)) return false;
    }
    return true;
}

bool equal(const Pattern& a, const Pattern& b) {
    if (a.node.index() != b.node.index()) return false;
    if (is<PVar>(a)) {
        return as<PVar>(a).name == as<PVar>(b).name &&
               opt_equal(as<PVar>(a).annot, as<PVar>(b).annot);
    }
    if (is<PTuple>(a)) return seq_equal(as<PTuple>(a).elems, as<PTuple>(b).elems);
    if (is<PLit>(a)) return as<PLit>(a).value == as<PLit>(b).value;
    return true;  // PWild / PUnit
}

bool equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (is<EInt>(a)) return as<EInt>(a).value == as<EInt>(b).value;
    if (is<EReal>(a)) return as<EReal>(a).value == as<EReal>(b).value;
    if (is<EBool>(a)) return as<EBool>(a).value == as<EBool>(b).value;
    if (is<EString>(a)) return as<EString>(a).value == as<EString>(b).value;
    if (is<EUnit>(a)) return true;
    if (is<EVar>(a)) return as<EVar>(a).name == as<EVar>(b).name;
    if (is<ETuple>(a)) return seq_equal(as<ETuple>(a).elems, as<ETuple>(b).elems);
    if (is<ERecord>(a)) {
        const auto& fa = as<ERecord>(a).fields;
        const auto& fb = as<ERecord>(b).fields;
        if (fa.size() != fb.size()) return false;
        for (std::size_t i = 0; i < fa.size(); ++i) {
            if (fa[i].first != fb[i].first || !equal(*fa[i].second, *fb[i].second)) return false;
        }
        return true;
    }
    if (is<EList>(a)) return seq_equal(as<EList>(a).elems, as<EList>(b).elems);
    if (is<ELambda>(a)) {
        return equal(*as<ELambda>(a).param, *as<ELambda>(b).param) &&
               equal(*as<ELambda>(a).body, *as<ELambda>(b).body);
    }
    if (is<EApp>(a)) {
        return equal(*as<EApp>(a).fn, *as<EApp>(b).fn) && equal(*as<EApp>(a).arg, *as<EApp>(b).arg);
    }
    if (is<EBinary>(a)) {
        return as<EBinary>(a).op == as<EBinary>(b).op &&
               equal(*as<EBinary>(a).lhs, *as<EBinary>(b).lhs) &&
               equal(*as<EBinary>(a).rhs, *as<EBinary>(b).rhs);
    }
    if (is<ELet>(a)) {
        return seq_equal(as<ELet>(a).decls, as<ELet>(b).decls) &&
               equal(*as<ELet>(a).body, *as<ELet>(b).body);
    }
    if (is<EIf>(a)) {
        return equal(*as<EIf>(a).cond, *as<EIf>(b).cond) &&
               equal(*as<EIf>(a).then_branch, *as<EIf>(b).then_branch) &&
               equal(*as<EIf>(a).else_branch, *as<EIf>(b).else_branch);
    }
    if (is<ESeq>(a)) return seq_equal(as<ESeq>(a).items, as<ESeq>(b).items);
    if (is<EDot>(a)) {
        const auto& da = as<EDot>(a);
        const auto& db = as<EDot>(b);
        if (!equal(*da.base, *db.base) || da.path.size() != db.path.size()) return false;
        for (std::size_t i = 0; i < da.path.size(); ++i) {
            if (da.path[i].label != db.path[i].label) return false;
        }
        return true;
    }
    if (is<EInstantiate>(a)) {
        const auto& ia = as<EInstantiate>(a);
        const auto& ib = as<EInstantiate>(b);
        if (ia.component != ib.component || ia.args.size() != ib.args.size()) return false;
        for (std::size_t i = 0; i < ia.args.size(); ++i) {
            if (ia.args[i].first != ib.args[i].first ||
                !equal(*ia.args[i].second, *ib.args[i].second)) {
                return false;
            }
        }
        return true;
    }
    if (is<EIfcCase>(a)) {
        const auto& ca = as<EIfcCase>(a);
        const auto& cb = as<EIfcCase>(b);
        if (!equal(*ca.scrutinee, *cb.scrutinee) || ca.arms.size() != cb.arms.size()) return false;
        for (std::size_t i = 0; i < ca.arms.size(); ++i) {
            if (ca.arms[i].sig != cb.arms[i].sig || !equal(*ca.arms[i].body, *cb.arms[i].body)) {
                return false;
            }
        }
        return equal(*ca.else_body, *cb.else_body);
    }
    return equal(*as<EInstanceOf>(a).arg, *as<EInstanceOf>(b).arg);
}

namespace {

bool impl_equal(const InterfaceImpl& a, const InterfaceImpl& b) {
    if (a.label != b.label || a.types.size() != b.types.size()) return false;
    for (std::size_t i = 0; i < a.types.size(); ++i) {
        if (a.types[i].name != b.types[i].name || !equal(*a.types[i].rep, *b.types[i].rep)) {
            return false;
        }
    }
    return seq_equal(a.members, b.members);
}

}  // namespace

bool equal(const Decl& a, const Decl& b) {
    if (a.node.index() != b.node.index()) return false;
    if (is<DInterfaceSig>(a)) {
        const auto& da = as<DInterfaceSig>(a);
        const auto& db = as<DInterfaceSig>(b);
        if (da.name != db.name || da.iid != db.iid || da.members.size() != db.members.size()) {
            return false;
        }
        for (std::size_t i = 0; i < da.members.size(); ++i) {
            const auto& ma = da.members[i];
            const auto& mb = db.members[i];
            if (ma.index() != mb.index()) return false;
            if (std::holds_alternative<SigValMember>(ma)) {
                const auto& va = std::get<SigValMember>(ma);
                const auto& vb = std::get<SigValMember>(mb);
                if (va.name != vb.name || !equal(*va.type, *vb.type)) return false;
            } else {
                const auto& ta = std::get<SigTypeMember>(ma);
                const auto& tb = std::get<SigTypeMember>(mb);
                if (ta.name != tb.name || !opt_equal(ta.manifest, tb.manifest)) return false;
            }
        }
        return true;
    }
    if (is<DComponentSig>(a)) {
        const auto& da = as<DComponentSig>(a);
        const auto& db = as<DComponentSig>(b);
        if (da.name != db.name || da.interfaces.size() != db.interfaces.size()) return false;
        for (std::size_t i = 0; i < da.interfaces.size(); ++i) {
            if (da.interfaces[i].label != db.interfaces[i].label ||
                da.interfaces[i].sig != db.interfaces[i].sig) {
                return false;
            }
        }
        return true;
    }
    if (is<DComponent>(a)) {
        const auto& da = as<DComponent>(a);
        const auto& db = as<DComponent>(b);
        if (da.name != db.name || da.sig != db.sig || da.params.size() != db.params.size() ||
            da.impls.size() != db.impls.size()) {
            return false;
        }
        for (std::size_t i = 0; i < da.params.size(); ++i) {
            if (da.params[i].name != db.params[i].name ||
                !equal(*da.params[i].type, *db.params[i].type)) {
                return false;
            }
        }
        if (!seq_equal(da.locals, db.locals)) return false;
        for (std::size_t i = 0; i < da.impls.size(); ++i) {
            if (!impl_equal(da.impls[i], db.impls[i])) return false;
        }
        return true;
    }
    if (is<DImport>(a)) {
        const auto& da = as<DImport>(a);
        const auto& db = as<DImport>(b);
        return da.name == db.name && da.sig == db.sig && da.clsid == db.clsid;
    }
    if (is<DExport>(a)) {
        const auto& da = as<DExport>(a);
        const auto& db = as<DExport>(b);
        return da.component == db.component && da.sig == db.sig && da.clsid == db.clsid;
    }
    if (is<DVal>(a)) {
        return equal(*as<DVal>(a).pattern, *as<DVal>(b).pattern) &&
               equal(*as<DVal>(a).expr, *as<DVal>(b).expr);
    }
    const auto& fa = as<DFun>(a);
    const auto& fb = as<DFun>(b);
    if (fa.name != fb.name || !opt_equal(fa.result_annot, fb.result_annot) ||
        fa.clauses.size() != fb.clauses.size()) {
        return false;
    }
    for (std::size_t i = 0; i < fa.clauses.size(); ++i) {
        if (!seq_equal(fa.clauses[i].params, fb.clauses[i].params) ||
            !equal(*fa.clauses[i].body, *fb.clauses[i].body)) {
            return false;
        }
    }
    return true;
}

bool equal(const SurfaceProgram& a, const SurfaceProgram& b) {
    return seq_equal(a.decls, b.decls);
}

}  // namespace comlang::ast
