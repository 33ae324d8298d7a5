#include "comlang/eval.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "comlang/parser.hpp"

namespace comlang::eval {

// RAII over one evaluation scope: a normal exit transfers escaping handles to
// the enclosing scope (or parks them for a barrier); stack unwinding releases
// everything the scope still holds.
class ScopeGuard {
public:
    ScopeGuard(Evaluator& ev, bool barrier, std::uint32_t ctx) : ev_(ev) {
        ev_.push_scope(barrier, ctx);
    }
    ScopeGuard(const ScopeGuard&) = delete;
    ScopeGuard& operator=(const ScopeGuard&) = delete;
    ~ScopeGuard() {
        if (!done_) ev_.abort_scope();
    }
    rt::Value exit(rt::Value result) {
        done_ = true;
        ev_.exit_scope(result);
        return result;
    }

private:
    Evaluator& ev_;
    bool done_ = false;
};

Evaluator::Evaluator(Options opts) : opts_(std::move(opts)) {
    if (opts_.trace_rc) runtime_.set_trace(opts_.trace_rc);
}

Evaluator::~Evaluator() {
    try {
        shutdown();
    } catch (...) {
        // Destruction must not throw; shutdown() can be called explicitly to
        // observe release faults.
    }
}

void Evaluator::out(const std::string& s) {
    trace_ += s;
    if (opts_.on_output) opts_.on_output(s);
}

// ------------------------------------------------------------------ scopes

void Evaluator::register_unit(const rt::Handle& h) {
    if (scopes_.empty())
        throw RuntimeFault(errcode::kernel, "handle acquired outside any evaluation scope");
    scopes_.back().units.push_back(h);
}

void Evaluator::push_scope(bool barrier, std::uint32_t ctx) {
    Scope s;
    s.barrier = barrier;
    s.ctx = ctx;
    scopes_.push_back(std::move(s));
    if (parked_.size() <= ctx) parked_.resize(ctx + 1);
}

void Evaluator::exit_scope(const rt::Value& result) {
    Scope s = std::move(scopes_.back());
    scopes_.pop_back();
    if (s.barrier) {
        auto& parked = parked_[s.ctx];
        parked.insert(parked.end(), s.units.begin(), s.units.end());
        return;
    }
    std::set<HandleKey> reach = reachable(result);
    std::vector<rt::Handle> doomed;
    for (auto& h : s.units) {
        if (reach.count({h.instance, h.sig})) {
            if (!scopes_.empty()) {
                scopes_.back().units.push_back(h);
            } else {
                if (parked_.empty()) parked_.resize(1);
                parked_[0].push_back(h);
            }
        } else {
            doomed.push_back(h);
        }
    }
    for (auto it = doomed.rbegin(); it != doomed.rend(); ++it) runtime_.release(*it);
}

void Evaluator::abort_scope() noexcept {
    if (scopes_.empty()) return;
    Scope s = std::move(scopes_.back());
    scopes_.pop_back();
    for (auto it = s.units.rbegin(); it != s.units.rend(); ++it) {
        try {
            runtime_.release(*it);
        } catch (...) {
        }
    }
}

void Evaluator::reach_value(const rt::Value& v, std::set<HandleKey>& found,
                            std::set<const rt::Frame*>& seen) const {
    if (auto* x = rt::get_if<rt::IfcV>(v)) {
        found.insert({x->handle.instance, x->handle.sig});
    } else if (auto* x = rt::get_if<rt::InstV>(v)) {
        for (auto& sig : runtime_.instance_interfaces(x->instance))
            found.insert({x->instance, sig});
    } else if (auto* x = rt::get_if<rt::TupleV>(v)) {
        for (auto& e : x->elems) reach_value(e, found, seen);
    } else if (auto* x = rt::get_if<rt::RecordV>(v)) {
        for (auto& [name, f] : x->fields) {
            (void)name;
            reach_value(f, found, seen);
        }
    } else if (auto* x = rt::get_if<rt::ListV>(v)) {
        for (auto& e : x->elems) reach_value(e, found, seen);
    } else if (auto* x = rt::get_if<rt::ClosureV>(v)) {
        for (auto& a : x->applied) reach_value(a, found, seen);
        for (const rt::Frame* f = x->env.get(); f; f = f->parent.get()) {
            if (!seen.insert(f).second) break;  // shared tail already walked
            reach_value(f->value, found, seen);
        }
    } else if (auto* x = rt::get_if<rt::ConV>(v)) {
        if (x->arg) reach_value(*x->arg, found, seen);
    }
}

std::set<Evaluator::HandleKey> Evaluator::reachable(const rt::Value& v) const {
    std::set<HandleKey> found;
    std::set<const rt::Frame*> seen;
    reach_value(v, found, seen);
    return found;
}

// -------------------------------------------------------------- primitives

rt::Env Evaluator::prim_env() const {
    Evaluator* self = const_cast<Evaluator*>(this);
    auto prim = [](std::string name, std::function<rt::Value(const rt::Value&)> fn) {
        return rt::Value{rt::PrimV{
            std::move(name),
            std::make_shared<std::function<rt::Value(const rt::Value&)>>(std::move(fn))}};
    };
    rt::Env env;
    env = rt::env_bind(env, "print", prim("print", [self](const rt::Value& v) {
                           self->out(rt::as<rt::StringV>(v).v);
                           return rt::Value{rt::UnitV{}};
                       }));
    env = rt::env_bind(env, "sleep", prim("sleep", [self](const rt::Value& v) {
                           self->out("sleep " + std::to_string(rt::as<rt::IntV>(v).v) + "\n");
                           return rt::Value{rt::UnitV{}};
                       }));
    env = rt::env_bind(env, "intToString", prim("intToString", [](const rt::Value& v) {
                           return rt::Value{rt::StringV{std::to_string(rt::as<rt::IntV>(v).v)}};
                       }));
    env = rt::env_bind(env, "hd", prim("hd", [](const rt::Value& v) {
                           auto& xs = rt::as<rt::ListV>(v);
                           if (xs.elems.empty())
                               throw RuntimeFault(errcode::runtime,
                                                  "hd applied to the empty list");
                           return xs.elems.front();
                       }));
    env = rt::env_bind(env, "tl", prim("tl", [](const rt::Value& v) {
                           auto& xs = rt::as<rt::ListV>(v);
                           if (xs.elems.empty())
                               throw RuntimeFault(errcode::runtime,
                                                  "tl applied to the empty list");
                           rt::ListV rest;
                           rest.elems.assign(xs.elems.begin() + 1, xs.elems.end());
                           return rt::Value{std::move(rest)};
                       }));
    env = rt::env_bind(env, "null", prim("null", [](const rt::Value& v) {
                           return rt::Value{rt::BoolV{rt::as<rt::ListV>(v).elems.empty()}};
                       }));
    return env;
}

// ------------------------------------------------------------------ loading

std::uint32_t Evaluator::load_program(sema::TypedProgram prog, bool as_import) {
    auto ctx = static_cast<std::uint32_t>(ctxs_.size());
    Ctx c;
    c.prog = std::move(prog);
    c.top = prim_env();
    c.is_import = as_import;
    ctxs_.push_back(std::move(c));
    if (parked_.size() <= ctx) parked_.resize(ctx + 1);

    ScopeGuard guard(*this, true, ctx);
    // Copy the decl list: nested imports may grow ctxs_ while we iterate.
    std::vector<ast::DeclPtr> decls = ctxs_[ctx].prog.program->decls;
    for (auto& decl : decls) eval_top_decl(decl, ctx);
    guard.exit(rt::Value{rt::UnitV{}});
    return ctx;
}

void Evaluator::eval_top_decl(const ast::DeclPtr& decl, std::uint32_t ctx) {
    if (auto* dv = ast::get_if<ast::DVal>(*decl)) {
        rt::Value v = eval(dv->expr, ctxs_[ctx].top, ctx);
        rt::Env top = ctxs_[ctx].top;
        bind_or_fault(*dv->pattern, v, top, decl->span);
        ctxs_[ctx].top = top;
    } else if (auto* df = ast::get_if<ast::DFun>(*decl)) {
        rt::ClosureV clo;
        clo.fun = decl;
        clo.env = ctxs_[ctx].top;
        clo.ctx = ctx;
        ctxs_[ctx].top = rt::env_bind(ctxs_[ctx].top, df->name, rt::Value{std::move(clo)});
    } else if (auto* dc = ast::get_if<ast::DComponent>(*decl)) {
        CompClass cls;
        cls.decl = dc;
        cls.env_at_decl = ctxs_[ctx].top;
        cls.ctx = ctx;
        ctxs_[ctx].classes[dc->name] = std::move(cls);
    } else if (auto* di = ast::get_if<ast::DImport>(*decl)) {
        CompClass cls;
        cls.import_decl = di;
        cls.env_at_decl = ctxs_[ctx].top;
        cls.ctx = ctx;
        ctxs_[ctx].classes[di->name] = std::move(cls);
    } else if (auto* de = ast::get_if<ast::DExport>(*decl)) {
        if (!ctxs_[ctx].is_import) do_export(*de, ctx, decl->span);
    }
    // Signature declarations were consumed during elaboration.
}

void Evaluator::shutdown() {
    if (shut_) return;
    shut_ = true;
    while (!scopes_.empty()) abort_scope();
    // Newest context first; within a context, reverse acquisition order.
    for (auto ctx = parked_.rbegin(); ctx != parked_.rend(); ++ctx)
        for (auto u = ctx->rbegin(); u != ctx->rend(); ++u) runtime_.release(*u);
    parked_.clear();
}

const rt::Value* Evaluator::top_binding(std::uint32_t ctx, const std::string& name) const {
    if (ctx >= ctxs_.size()) return nullptr;
    return rt::env_lookup(ctxs_[ctx].top, name);
}

rt::Value Evaluator::eval_in(std::uint32_t ctx, const ast::ExprPtr& e) {
    if (ctx >= ctxs_.size())
        throw RuntimeFault(errcode::kernel, "evaluation against an unknown context");
    ScopeGuard guard(*this, true, ctx);
    rt::Value v = eval(e, ctxs_[ctx].top, ctx);
    guard.exit(v);
    return v;
}

// --------------------------------------------------------------- expression

rt::Value Evaluator::eval(const ast::ExprPtr& e, const rt::Env& env, std::uint32_t ctx) {
    const ast::Expr& ex = *e;
    if (auto* n = ast::get_if<ast::EInt>(ex)) return rt::Value{rt::IntV{n->value}};
    if (auto* n = ast::get_if<ast::EReal>(ex)) return rt::Value{rt::RealV{n->value}};
    if (auto* n = ast::get_if<ast::EBool>(ex)) return rt::Value{rt::BoolV{n->value}};
    if (auto* n = ast::get_if<ast::EString>(ex)) return rt::Value{rt::StringV{n->value}};
    if (ast::is<ast::EUnit>(ex)) return rt::Value{rt::UnitV{}};
    if (ast::is<ast::EVar>(ex)) return eval_var(ex, env);
    if (auto* n = ast::get_if<ast::ETuple>(ex)) {
        rt::TupleV t;
        for (auto& elem : n->elems) {
            rt::Value v = eval(elem, env, ctx);
            pin_stored(v);
            t.elems.push_back(std::move(v));
        }
        return rt::Value{std::move(t)};
    }
    if (auto* n = ast::get_if<ast::ERecord>(ex)) {
        rt::RecordV r;
        for (auto& [label, expr] : n->fields) {
            rt::Value v = eval(expr, env, ctx);
            pin_stored(v);
            r.fields.emplace_back(label, std::move(v));
        }
        std::stable_sort(r.fields.begin(), r.fields.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        return rt::Value{std::move(r)};
    }
    if (auto* n = ast::get_if<ast::EList>(ex)) {
        rt::ListV l;
        for (auto& elem : n->elems) {
            rt::Value v = eval(elem, env, ctx);
            pin_stored(v);
            l.elems.push_back(std::move(v));
        }
        return rt::Value{std::move(l)};
    }
    if (ast::is<ast::ELambda>(ex)) {
        rt::ClosureV clo;
        clo.lambda = e;
        clo.env = env;
        clo.ctx = ctx;
        return rt::Value{std::move(clo)};
    }
    if (auto* n = ast::get_if<ast::EApp>(ex)) {
        rt::Value f = eval(n->fn, env, ctx);
        rt::Value a = eval(n->arg, env, ctx);
        return apply(f, a);
    }
    if (auto* n = ast::get_if<ast::EBinary>(ex)) return eval_binary(*n, ex, env, ctx);
    if (auto* n = ast::get_if<ast::ELet>(ex)) {
        ScopeGuard guard(*this, false, ctx);
        rt::Env inner = env;
        for (auto& d : n->decls) {
            if (auto* dv = ast::get_if<ast::DVal>(*d)) {
                rt::Value v = eval(dv->expr, inner, ctx);
                bind_or_fault(*dv->pattern, v, inner, d->span);
            } else if (auto* df = ast::get_if<ast::DFun>(*d)) {
                rt::ClosureV clo;
                clo.fun = d;
                clo.env = inner;
                clo.ctx = ctx;
                inner = rt::env_bind(inner, df->name, rt::Value{std::move(clo)});
            }
        }
        return guard.exit(eval(n->body, inner, ctx));
    }
    if (auto* n = ast::get_if<ast::EIf>(ex)) {
        rt::Value c = eval(n->cond, env, ctx);
        return eval(rt::as<rt::BoolV>(c).v ? n->then_branch : n->else_branch, env, ctx);
    }
    if (auto* n = ast::get_if<ast::ESeq>(ex)) {
        rt::Value last;
        for (auto& item : n->items) last = eval(item, env, ctx);
        return last;
    }
    if (auto* n = ast::get_if<ast::EDot>(ex)) return eval_dot(*n, ex, env, ctx);
    if (auto* n = ast::get_if<ast::EInstantiate>(ex)) return eval_instantiate(*n, ex, env, ctx);
    if (auto* n = ast::get_if<ast::EIfcCase>(ex)) return eval_ifc_case(*n, env, ctx);
    if (auto* n = ast::get_if<ast::EInstanceOf>(ex)) {
        rt::Value v = eval(n->arg, env, ctx);
        auto& ifc = rt::as<rt::IfcV>(v);
        return runtime_.instance_value(ifc.handle.instance);
    }
    throw RuntimeFault(errcode::kernel, ex.span, "unhandled expression form");
}

rt::Value Evaluator::eval_var(const ast::Expr& e, const rt::Env& env) {
    auto& name = ast::as<ast::EVar>(e).name;
    const rt::Value* v = rt::env_lookup(env, name);
    if (!v) throw RuntimeFault(errcode::kernel, e.span, "unbound variable '" + name + "'");
    return *v;
}

void Evaluator::pin_stored(const rt::Value& v) {
    if (auto* x = rt::get_if<rt::IfcV>(v)) {
        runtime_.addref(x->handle);
        register_unit(x->handle);
    } else if (auto* x = rt::get_if<rt::InstV>(v)) {
        for (auto& sig : runtime_.instance_interfaces(x->instance)) {
            rt::Handle h{x->session, x->instance, sig};
            runtime_.addref(h);
            register_unit(h);
        }
    }
}

rt::Value Evaluator::eval_binary(const ast::EBinary& b, const ast::Expr& e, const rt::Env& env,
                                 std::uint32_t ctx) {
    const std::string& op = b.op;
    if (op == "::") {
        rt::Value head = eval(b.lhs, env, ctx);
        rt::Value tail = eval(b.rhs, env, ctx);
        pin_stored(head);
        rt::ListV out;
        out.elems.push_back(std::move(head));
        auto& t = rt::as<rt::ListV>(tail);
        out.elems.insert(out.elems.end(), t.elems.begin(), t.elems.end());
        return rt::Value{std::move(out)};
    }
    rt::Value lhs = eval(b.lhs, env, ctx);
    rt::Value rhs = eval(b.rhs, env, ctx);
    auto ints = [&]() { return rt::is<rt::IntV>(lhs); };
    if (op == "+" || op == "-" || op == "*") {
        if (ints()) {
            auto x = static_cast<std::uint64_t>(rt::as<rt::IntV>(lhs).v);
            auto y = static_cast<std::uint64_t>(rt::as<rt::IntV>(rhs).v);
            std::uint64_t r = op == "+" ? x + y : op == "-" ? x - y : x * y;
            return rt::Value{rt::IntV{static_cast<std::int64_t>(r)}};
        }
        double x = rt::as<rt::RealV>(lhs).v, y = rt::as<rt::RealV>(rhs).v;
        return rt::Value{rt::RealV{op == "+" ? x + y : op == "-" ? x - y : x * y}};
    }
    if (op == "/")
        return rt::Value{rt::RealV{rt::as<rt::RealV>(lhs).v / rt::as<rt::RealV>(rhs).v}};
    if (op == "^")
        return rt::Value{rt::StringV{rt::as<rt::StringV>(lhs).v + rt::as<rt::StringV>(rhs).v}};
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
        auto cmp = [&](auto x, auto y) {
            return op == "<" ? x < y : op == "<=" ? x <= y : op == ">" ? x > y : x >= y;
        };
        if (ints())
            return rt::Value{rt::BoolV{cmp(rt::as<rt::IntV>(lhs).v, rt::as<rt::IntV>(rhs).v)}};
        if (rt::is<rt::RealV>(lhs))
            return rt::Value{rt::BoolV{cmp(rt::as<rt::RealV>(lhs).v, rt::as<rt::RealV>(rhs).v)}};
        return rt::Value{
            rt::BoolV{cmp(rt::as<rt::StringV>(lhs).v, rt::as<rt::StringV>(rhs).v)}};
    }
    if (op == "=") return rt::Value{rt::BoolV{rt::value_equal(lhs, rhs)}};
    if (op == "<>") return rt::Value{rt::BoolV{!rt::value_equal(lhs, rhs)}};
    throw RuntimeFault(errcode::kernel, e.span, "unknown operator '" + op + "'");
}

// -------------------------------------------------------------- application

rt::Value Evaluator::apply(const rt::Value& f, const rt::Value& arg) {
    std::optional<ScopeGuard> root;
    if (scopes_.empty()) {
        std::uint32_t ctx = 0;
        if (auto* c = rt::get_if<rt::ClosureV>(f)) ctx = c->ctx;
        root.emplace(*this, true, ctx);
    }
    rt::Value result;
    if (auto* p = rt::get_if<rt::PrimV>(f)) {
        result = (*p->fn)(arg);
    } else if (auto* c = rt::get_if<rt::ClosureV>(f)) {
        result = apply_closure(*c, arg);
    } else {
        throw RuntimeFault(errcode::kernel, "application of a non-function value");
    }
    if (root) root->exit(result);
    return result;
}

rt::Value Evaluator::apply_closure(const rt::ClosureV& c, const rt::Value& arg) {
    if (c.lambda) {
        auto& lam = ast::as<ast::ELambda>(*c.lambda);
        ScopeGuard guard(*this, false, c.ctx);
        rt::Env inner = c.env;
        bind_or_fault(*lam.param, arg, inner, c.lambda->span);
        return guard.exit(eval(lam.body, inner, c.ctx));
    }
    auto& f = ast::as<ast::DFun>(*c.fun);
    size_t arity = f.clauses.front().params.size();
    std::vector<rt::Value> args = c.applied;
    args.push_back(arg);
    if (args.size() < arity) {
        rt::ClosureV partial = c;
        partial.applied = std::move(args);
        return rt::Value{std::move(partial)};
    }
    ScopeGuard guard(*this, false, c.ctx);
    rt::ClosureV self = c;
    self.applied.clear();
    rt::Env base = rt::env_bind(c.env, f.name, rt::Value{std::move(self)});
    for (auto& clause : f.clauses) {
        rt::Env inner = base;
        bool matched = true;
        for (size_t i = 0; i < arity && matched; ++i)
            matched = try_bind(*clause.params[i], args[i], inner);
        if (!matched) continue;
        return guard.exit(eval(clause.body, inner, c.ctx));
    }
    throw RuntimeFault(errcode::runtime, c.fun->span,
                       "no clause of '" + f.name + "' matches the arguments");
}

// ----------------------------------------------------------------- patterns

bool Evaluator::try_bind(const ast::Pattern& p, const rt::Value& v, rt::Env& env) const {
    if (ast::is<ast::PWild>(p) || ast::is<ast::PUnit>(p)) return true;
    if (auto* pv = ast::get_if<ast::PVar>(p)) {
        env = rt::env_bind(env, pv->name, v);
        return true;
    }
    if (auto* pt = ast::get_if<ast::PTuple>(p)) {
        auto& tv = rt::as<rt::TupleV>(v);
        if (tv.elems.size() != pt->elems.size()) return false;
        rt::Env inner = env;
        for (size_t i = 0; i < tv.elems.size(); ++i)
            if (!try_bind(*pt->elems[i], tv.elems[i], inner)) return false;
        env = inner;
        return true;
    }
    auto& lit = ast::as<ast::PLit>(p).value;
    if (auto* i = std::get_if<std::int64_t>(&lit))
        return rt::is<rt::IntV>(v) && rt::as<rt::IntV>(v).v == *i;
    if (auto* b = std::get_if<bool>(&lit))
        return rt::is<rt::BoolV>(v) && rt::as<rt::BoolV>(v).v == *b;
    return rt::is<rt::StringV>(v) && rt::as<rt::StringV>(v).v == std::get<std::string>(lit);
}

void Evaluator::bind_or_fault(const ast::Pattern& p, const rt::Value& v, rt::Env& env,
                              const SourceSpan& span) const {
    if (!try_bind(p, v, env))
        throw RuntimeFault(errcode::runtime, span,
                           "binding pattern does not match " + rt::show_value(v));
}

// ---------------------------------------------------------------- dot paths

rt::Value Evaluator::query_interface_value(std::uint64_t token, const sema::InterfaceSig& target,
                                           bool register_in_scope) {
    auto r = runtime_.try_query(token, target);
    if (!r)
        throw RuntimeFault(errcode::negotiation,
                           "instance does not support interface " + target.name);
    if (register_in_scope) register_unit(rt::as<rt::IfcV>(*r).handle);
    return *r;
}

rt::Value Evaluator::instance_segment(const rt::InstV& inst, const ast::PathSegment& seg,
                                      std::uint32_t ctx) {
    const sema::SigEnv& env = *ctxs_[ctx].prog.sigs;
    if (const sema::ComponentSig* csig = env.find_component(inst.comp_sig)) {
        if (const std::string* sig_name = csig->find_label(seg.label)) {
            const sema::InterfaceSig* isig = env.find_interface(*sig_name);
            if (isig) return query_interface_value(inst.instance, *isig, true);
        }
    }
    // Labels of the instance's birth signature (instances flowing across
    // contexts carry a signature name the current program may not declare).
    if (const std::string* sig_name = runtime_.label_interface(inst.instance, seg.label)) {
        if (const sema::InterfaceSig* isig = env.find_interface(*sig_name))
            return query_interface_value(inst.instance, *isig, true);
        sema::InterfaceSig bare;
        bare.name = *sig_name;
        return query_interface_value(inst.instance, bare, true);
    }
    // ifc_case narrowing exposes the probed interface under its own name.
    if (const sema::InterfaceSig* isig = env.find_interface(seg.label))
        return query_interface_value(inst.instance, *isig, true);
    throw RuntimeFault(errcode::kernel, seg.span,
                       "instance of |" + inst.comp_sig + "| has no interface labeled '" +
                           seg.label + "'");
}

rt::Value Evaluator::member_through(const rt::Handle& h, const std::string& name) {
    rt::Value member = runtime_.get_member(h, name);
    if (runtime_.instance_marshal_boundary(h.instance))
        return wrap_boundary_member(member, name);
    return member;
}

rt::Value Evaluator::wrap_boundary_member(const rt::Value& member, const std::string& name) {
    if (rt::is<rt::ClosureV>(member) || rt::is<rt::PrimV>(member)) {
        rt::Value inner = member;
        Evaluator* self = this;
        auto fn = [self, inner](const rt::Value& arg) {
            rt::Value in = interop::marshal_copy(arg);
            rt::Value out = self->apply(inner, in);
            return interop::marshal_copy(out);
        };
        return rt::Value{rt::PrimV{
            name, std::make_shared<std::function<rt::Value(const rt::Value&)>>(std::move(fn))}};
    }
    return interop::marshal_copy(member);
}

rt::Value Evaluator::eval_dot(const ast::EDot& d, const ast::Expr& e, const rt::Env& env,
                              std::uint32_t ctx) {
    (void)e;
    rt::Value cur = eval(d.base, env, ctx);
    for (auto& seg : d.path) {
        if (auto* inst = rt::get_if<rt::InstV>(cur)) {
            cur = instance_segment(*inst, seg, ctx);
        } else if (auto* ifc = rt::get_if<rt::IfcV>(cur)) {
            cur = member_through(ifc->handle, seg.label);
        } else if (auto* rec = rt::get_if<rt::RecordV>(cur)) {
            const rt::Value* field = nullptr;
            for (auto& [label, value] : rec->fields)
                if (label == seg.label) field = &value;
            if (!field)
                throw RuntimeFault(errcode::kernel, seg.span,
                                   "record has no field '" + seg.label + "'");
            rt::Value next = *field;
            cur = std::move(next);
        } else {
            throw RuntimeFault(errcode::kernel, seg.span,
                               "dot access into " + rt::show_value(cur));
        }
    }
    return cur;
}

// ------------------------------------------------------------ instantiation

rt::Value Evaluator::eval_instantiate(const ast::EInstantiate& inst, const ast::Expr& e,
                                      const rt::Env& env, std::uint32_t ctx) {
    auto it = ctxs_[ctx].classes.find(inst.component);
    if (it == ctxs_[ctx].classes.end())
        throw RuntimeFault(errcode::kernel, e.span,
                           "unknown component '" + inst.component + "'");
    if (it->second.import_decl) {
        const CompClass cls = it->second;
        return make_imported_instance(cls, *cls.import_decl, e.span);
    }
    std::vector<std::pair<std::string, rt::Value>> args;
    for (auto& [name, expr] : inst.args) args.emplace_back(name, eval(expr, env, ctx));
    const CompClass cls = it->second;  // copy: nested loads may grow ctxs_
    return make_internal_instance(cls, *cls.decl, std::move(args), e.span, nullptr, false);
}

rt::Value Evaluator::make_internal_instance(const CompClass& cls, const ast::DComponent& decl,
                                            std::vector<std::pair<std::string, rt::Value>> args,
                                            const SourceSpan& span, const std::string* view_sig,
                                            bool boundary) {
    const sema::SigEnv& sigenv = *ctxs_[cls.ctx].prog.sigs;
    rt::Env body_env = cls.env_at_decl;
    for (auto& param : decl.params) {
        const rt::Value* given = nullptr;
        for (auto& [name, value] : args)
            if (name == param.name) given = &value;
        if (!given)
            throw RuntimeFault(errcode::instantiation, span,
                               "component argument '" + param.name + "' missing");
        body_env = rt::env_bind(body_env, param.name, *given);
    }
    for (auto& local : decl.locals) {
        if (auto* dv = ast::get_if<ast::DVal>(*local)) {
            rt::Value v = eval(dv->expr, body_env, cls.ctx);
            bind_or_fault(*dv->pattern, v, body_env, local->span);
        } else if (auto* df = ast::get_if<ast::DFun>(*local)) {
            rt::ClosureV clo;
            clo.fun = local;
            clo.env = body_env;
            clo.ctx = cls.ctx;
            body_env = rt::env_bind(body_env, df->name, rt::Value{std::move(clo)});
        }
    }
    std::map<std::string, std::map<std::string, rt::Value>> members_by_label;
    for (auto& impl : decl.impls) {
        auto& table = members_by_label[impl.label];
        for (auto& member : impl.members) {
            if (auto* dv = ast::get_if<ast::DVal>(*member)) {
                rt::Value v = eval(dv->expr, body_env, cls.ctx);
                bind_or_fault(*dv->pattern, v, body_env, member->span);
                collect_bindings(*dv->pattern, v, table);
            } else if (auto* df = ast::get_if<ast::DFun>(*member)) {
                rt::ClosureV clo;
                clo.fun = member;
                clo.env = body_env;
                clo.ctx = cls.ctx;
                rt::Value v{std::move(clo)};
                body_env = rt::env_bind(body_env, df->name, v);
                table[df->name] = v;
            }
        }
    }

    const std::string& sig_name = view_sig ? *view_sig : decl.sig;
    const sema::ComponentSig* csig = sigenv.find_component(sig_name);
    if (!csig)
        throw RuntimeFault(errcode::instantiation, span,
                           "unbound component signature '" + sig_name + "'");
    comrt::InstanceSpec spec;
    spec.comp_sig = sig_name;
    spec.iid_resolving = boundary;
    spec.marshal_boundary = boundary;
    for (auto& [label, ifc_sig] : csig->interfaces) {
        auto found = members_by_label.find(label);
        if (found == members_by_label.end())
            throw RuntimeFault(errcode::instantiation, span,
                               "component '" + decl.name + "' provides no interface labeled '" +
                                   label + "'");
        comrt::InterfaceSpec is;
        is.label = label;
        is.sig = *sigenv.find_interface(ifc_sig);
        is.members = found->second;
        spec.interfaces.push_back(std::move(is));
    }
    std::set<HandleKey> held;
    std::set<const rt::Frame*> seen;
    for (auto& is : spec.interfaces)
        for (auto& [name, value] : is.members) {
            (void)name;
            reach_value(value, held, seen);
        }
    for (auto& [token, sig] : held)
        spec.hold.push_back(rt::Handle{runtime_.session(), token, sig});

    rt::Value v = runtime_.create_instance(std::move(spec));
    auto& iv = rt::as<rt::InstV>(v);
    for (auto& sig : runtime_.instance_interfaces(iv.instance))
        register_unit(rt::Handle{runtime_.session(), iv.instance, sig});
    return v;
}

void Evaluator::collect_bindings(const ast::Pattern& p, const rt::Value& v,
                                 std::map<std::string, rt::Value>& table) const {
    if (auto* pv = ast::get_if<ast::PVar>(p)) {
        table[pv->name] = v;
    } else if (auto* pt = ast::get_if<ast::PTuple>(p)) {
        auto& tv = rt::as<rt::TupleV>(v);
        for (size_t i = 0; i < pt->elems.size() && i < tv.elems.size(); ++i)
            collect_bindings(*pt->elems[i], tv.elems[i], table);
    }
}

// ----------------------------------------------------------------- imports

const interop::Manifest& Evaluator::manifest(const SourceSpan& span) {
    if (!manifest_) {
        if (opts_.registry_path.empty())
            throw RuntimeFault(errcode::manifest, span,
                               "no registry configured (--registry or COMLANG_REGISTRY)");
        try {
            manifest_ = interop::load_manifest(opts_.registry_path);
        } catch (const RuntimeFault& f) {
            throw RuntimeFault(f.code(), span, f.what());
        }
    }
    return *manifest_;
}

rt::Value Evaluator::make_imported_instance(const CompClass& cls, const ast::DImport& imp,
                                            const SourceSpan& span) {
    const interop::Manifest& man = manifest(span);
    const interop::ManifestEntry* entry = man.find(imp.clsid);
    if (!entry)
        throw RuntimeFault(errcode::unknown_clsid, span,
                           "no registry entry for clsid " + imp.clsid.str());
    const interop::ManifestEntry entry_copy = *entry;  // manifest_ may reload below
    const sema::SigEnv& want_env = *ctxs_[cls.ctx].prog.sigs;
    const sema::ComponentSig* want = want_env.find_component(imp.sig);
    if (!want)
        throw RuntimeFault(errcode::kernel, span,
                           "unbound component signature '" + imp.sig + "'");

    rt::Value created;
    sema::SigEnvPtr have_env;
    if (entry_copy.kind == "builtin-stub") {
        if (!interop::is_builtin_stub(entry_copy.stub))
            throw RuntimeFault(errcode::manifest, span,
                               "unknown builtin stub '" + entry_copy.stub + "'");
        interop::StubHost host;
        host.runtime = &runtime_;
        host.trace = [this](const std::string& s) { out(s); };
        created = interop::instantiate_stub(entry_copy.stub, host);
        have_env = interop::agent_stub_env();
    } else if (entry_copy.kind == "source-backed") {
        for (auto& [label, isig_name] : want->interfaces) {
            (void)label;
            const sema::InterfaceSig* isig = want_env.find_interface(isig_name);
            auto report = sema::idl_expressible_interface(*isig);
            if (!report.ok)
                throw RuntimeFault(errcode::marshal, span,
                                   "interface " + isig_name +
                                       " cannot cross the component boundary: " +
                                       report.violations.front());
        }
        std::uint32_t ectx = load_import_source(entry_copy, span);
        auto cit = ctxs_[ectx].classes.find(entry_copy.component);
        if (cit == ctxs_[ectx].classes.end() || !cit->second.decl)
            throw RuntimeFault(errcode::manifest, span,
                               "registered component '" + entry_copy.component +
                                   "' not found in " + entry_copy.source);
        const CompClass ecls = cit->second;
        created = make_internal_instance(ecls, *ecls.decl, {}, span, &entry_copy.sig, true);
        have_env = ctxs_[ectx].prog.sigs;
    } else {
        throw RuntimeFault(errcode::manifest, span,
                           "unknown registry entry kind '" + entry_copy.kind + "'");
    }

    auto& iv = rt::as<rt::InstV>(created);
    if (entry_copy.kind == "builtin-stub") {
        for (auto& sig : runtime_.instance_interfaces(iv.instance))
            register_unit(rt::Handle{runtime_.session(), iv.instance, sig});
    }
    negotiate(iv.instance, *want, want_env, entry_copy, *have_env, span);
    return rt::Value{rt::InstV{runtime_.session(), iv.instance, imp.sig}};
}

void Evaluator::negotiate(std::uint64_t token, const sema::ComponentSig& want,
                          const sema::SigEnv& want_env, const interop::ManifestEntry& entry,
                          const sema::SigEnv& have_env, const SourceSpan& span) {
    for (auto& [label, isig_name] : want.interfaces) {
        (void)label;
        const sema::InterfaceSig* isig = want_env.find_interface(isig_name);
        if (!isig || !isig->iid)
            throw RuntimeFault(errcode::negotiation, span,
                               "interface " + isig_name + " carries no IID");
        bool in_table = false;
        for (auto& mi : entry.interfaces)
            if (mi.iid == *isig->iid) in_table = true;
        if (!in_table)
            throw RuntimeFault(errcode::negotiation, span,
                               "negotiation failed for clsid " + entry.clsid.str() +
                                   ": interface " + isig_name + " (iid " + isig->iid->str() +
                                   ") is not in the registered signature");
        auto probe = runtime_.try_query(token, *isig);
        if (!probe)
            throw RuntimeFault(errcode::negotiation, span,
                               "negotiation failed: component does not provide interface " +
                                   isig_name + " (iid " + isig->iid->str() + ")");
        runtime_.release(rt::as<rt::IfcV>(*probe).handle);
        const sema::InterfaceSig* have = nullptr;
        for (auto& [name, sig] : have_env.interfaces) {
            (void)name;
            if (sig.iid && *sig.iid == *isig->iid) have = &sig;
        }
        if (!have)
            throw RuntimeFault(errcode::negotiation, span,
                               "negotiation failed: registry entry is stale for iid " +
                                   isig->iid->str());
        auto report = sema::match_interface(*have, *isig);
        if (!report.ok)
            throw RuntimeFault(errcode::negotiation, span,
                               "negotiation failed: provider interface " + have->name +
                                   " does not match " + isig_name + ": " + report.describe());
    }
}

std::uint32_t Evaluator::load_import_source(const interop::ManifestEntry& entry,
                                            const SourceSpan& span) {
    const std::string key = entry.clsid.str();
    if (auto it = import_ctx_cache_.find(key); it != import_ctx_cache_.end()) return it->second;
    if (imports_in_progress_.count(key))
        throw RuntimeFault(errcode::negotiation, span, "import cycle through clsid " + key);
    imports_in_progress_.insert(key);
    std::uint32_t ctx = 0;
    try {
        std::ifstream in(entry.source, std::ios::binary);
        if (!in)
            throw RuntimeFault(errcode::manifest, span,
                               "cannot read registered source " + entry.source);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        sema::TypedProgram typed;
        try {
            auto program = syntax::parse_source(text, entry.source);
            typed = sema::check_program(program);
        } catch (const CompileError& err) {
            throw RuntimeFault(errcode::manifest, span,
                               "registered source " + entry.source +
                                   " no longer compiles: " + err.render());
        }
        auto cit = typed.components.find(entry.component);
        if (cit == typed.components.end() || !cit->second.decl)
            throw RuntimeFault(errcode::manifest, span,
                               "registered component '" + entry.component + "' not found in " +
                                   entry.source);
        if (!cit->second.params.empty())
            throw RuntimeFault(errcode::manifest, span,
                               "registered component '" + entry.component +
                                   "' is no longer nullary");
        const sema::ComponentSig* have_sig = typed.sigs->find_component(cit->second.sig);
        const sema::ComponentSig* want_sig = typed.sigs->find_component(entry.sig);
        if (!have_sig || !want_sig ||
            !sema::match_component(*have_sig, *typed.sigs, *want_sig, *typed.sigs).ok)
            throw RuntimeFault(errcode::manifest, span,
                               "registered component '" + entry.component +
                                   "' no longer matches signature '" + entry.sig + "'");
        auto exportable = sema::check_exportable(typed, entry.component, entry.sig);
        if (!exportable.ok)
            throw RuntimeFault(errcode::manifest, span,
                               "registered component '" + entry.component +
                                   "' is no longer exportable: " + exportable.violations.front());
        ctx = load_program(std::move(typed), true);
    } catch (...) {
        imports_in_progress_.erase(key);
        throw;
    }
    imports_in_progress_.erase(key);
    import_ctx_cache_[key] = ctx;
    return ctx;
}

void Evaluator::do_export(const ast::DExport& e, std::uint32_t ctx, const SourceSpan& span) {
    if (opts_.registry_path.empty())
        throw RuntimeFault(errcode::manifest, span,
                           "no registry configured (--registry or COMLANG_REGISTRY)");
    const Ctx& c = ctxs_[ctx];
    interop::ManifestEntry entry;
    entry.clsid = e.clsid;
    entry.kind = "source-backed";
    std::error_code ec;
    auto resolved = std::filesystem::weakly_canonical(c.prog.program->filename, ec);
    entry.source = ec ? c.prog.program->filename : resolved.string();
    entry.component = e.component;
    entry.sig = e.sig;
    const sema::SigEnv& env = *c.prog.sigs;
    const sema::ComponentSig* csig = env.find_component(e.sig);
    for (auto& [label, sig_name] : csig->interfaces) {
        (void)label;
        const sema::InterfaceSig* isig = env.find_interface(sig_name);
        entry.interfaces.push_back({sig_name, *isig->iid});
    }
    interop::Manifest m = interop::load_manifest_or_empty(opts_.registry_path);
    try {
        interop::add_entry(m, std::move(entry), opts_.force_export);
    } catch (const RuntimeFault& f) {
        throw RuntimeFault(f.code(), span, f.what());
    }
    interop::save_manifest(m, opts_.registry_path);
    manifest_ = std::move(m);
}

// ----------------------------------------------------------------- ifc_case

rt::Value Evaluator::eval_ifc_case(const ast::EIfcCase& c, const rt::Env& env,
                                   std::uint32_t ctx) {
    rt::Value scrut = eval(c.scrutinee, env, ctx);
    auto* inst = rt::get_if<rt::InstV>(scrut);
    if (!inst)
        throw RuntimeFault(errcode::kernel, c.scrutinee->span,
                           "ifc_case scrutinee is not a component instance");
    const sema::SigEnv& sigenv = *ctxs_[ctx].prog.sigs;
    const ast::EVar* var = ast::get_if<ast::EVar>(*c.scrutinee);
    for (auto& arm : c.arms) {
        const sema::InterfaceSig* target = sigenv.find_interface(arm.sig);
        if (!target)
            throw RuntimeFault(errcode::kernel, arm.sig_span,
                               "unbound interface signature '" + arm.sig + "'");
        auto probe = runtime_.try_query(inst->instance, *target);
        if (!probe) continue;
        ScopeGuard guard(*this, false, ctx);
        register_unit(rt::as<rt::IfcV>(*probe).handle);
        rt::Env arm_env = env;
        if (var) arm_env = rt::env_bind(arm_env, var->name, scrut);
        return guard.exit(eval(arm.body, arm_env, ctx));
    }
    return eval(c.else_body, env, ctx);
}

// ------------------------------------------------------------------ drivers

RunResult run_program(sema::TypedProgram prog, Options opts) {
    RunResult result;
    Evaluator ev(std::move(opts));
    try {
        ev.load_program(std::move(prog), false);
        ev.shutdown();
    } catch (const RuntimeFault& fault) {
        result.fault = fault;
        try {
            ev.shutdown();
        } catch (...) {
        }
    }
    result.trace = ev.trace();
    result.leaks = ev.leak_report();
    return result;
}

RunResult run_source(const std::string& source, const std::string& filename, Options opts) {
    auto program = syntax::parse_source(source, filename);
    return run_program(sema::check_program(program), std::move(opts));
}

}  // namespace comlang::eval
