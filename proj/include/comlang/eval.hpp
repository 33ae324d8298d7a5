#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "comlang/ast.hpp"
#include "comlang/comrt.hpp"
#include "comlang/diag.hpp"
#include "comlang/interop.hpp"
#include "comlang/sema.hpp"
#include "comlang/value.hpp"

namespace comlang::eval {

struct Options {
    std::string registry_path;  // empty: programs with imports/exports fault
    bool force_export = false;  // allow `export` to replace a registered CLSID
    std::function<void(const std::string&)> on_output;  // streamed program trace
    std::function<void(const std::string&)> trace_rc;   // kernel refcount events
};

struct RunResult {
    std::optional<RuntimeFault> fault;
    std::string trace;
    std::vector<std::string> leaks;
};

// Tree-walking evaluator bound to one kernel session. Handles follow a
// scope discipline: every addref the evaluator causes is registered as a
// pending release in the innermost scope; leaving a scope releases the
// pending handles that are not reachable from the scope's result value
// (reachable ones transfer to the enclosing scope). Each loaded program's
// top-level scope stays open until shutdown.
class Evaluator {
public:
    explicit Evaluator(Options opts = {});
    ~Evaluator();
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    comrt::Runtime& runtime() { return runtime_; }
    const std::string& trace() const { return trace_; }

    // Evaluates the program's top-level declarations in a fresh context and
    // returns its index. Context 0 is the main program; imported component
    // servers load as further contexts. `as_import` suppresses export
    // declarations (they were already validated when the server registered).
    std::uint32_t load_program(sema::TypedProgram prog, bool as_import);

    // Releases every open top-level scope. Called implicitly on destruction.
    void shutdown();

    std::vector<std::string> leak_report() const { return runtime_.leak_report(); }

    // Applies a function value; pushes/exits an evaluation scope around the
    // call. Exposed for the marshal boundary and for tests.
    rt::Value apply(const rt::Value& f, const rt::Value& arg);

    // Evaluates an expression against a loaded context's top-level
    // environment. Handles in the result stay live until shutdown.
    rt::Value eval_in(std::uint32_t ctx, const ast::ExprPtr& e);

    const rt::Value* top_binding(std::uint32_t ctx, const std::string& name) const;

private:
    struct CompClass {
        const ast::DComponent* decl = nullptr;    // internal component
        const ast::DImport* import_decl = nullptr;  // registry-backed import
        rt::Env env_at_decl;
        std::uint32_t ctx = 0;
    };
    struct Ctx {
        sema::TypedProgram prog;
        rt::Env top;
        std::map<std::string, CompClass> classes;
        bool is_import = false;
    };
    struct Scope {
        std::vector<rt::Handle> units;
        bool barrier = false;       // a context's top-level scope
        std::uint32_t ctx = 0;      // parking target for barriers
    };
    using HandleKey = std::pair<std::uint64_t, std::string>;
    friend class ScopeGuard;

    void out(const std::string& s);
    void register_unit(const rt::Handle& h);
    void push_scope(bool barrier, std::uint32_t ctx);
    void exit_scope(const rt::Value& result);
    void abort_scope() noexcept;
    void reach_value(const rt::Value& v, std::set<HandleKey>& out,
                     std::set<const rt::Frame*>& seen) const;
    std::set<HandleKey> reachable(const rt::Value& v) const;

    rt::Value eval(const ast::ExprPtr& e, const rt::Env& env, std::uint32_t ctx);
    rt::Value eval_var(const ast::Expr& e, const rt::Env& env);
    void pin_stored(const rt::Value& v);
    rt::Value eval_binary(const ast::EBinary& b, const ast::Expr& e, const rt::Env& env,
                          std::uint32_t ctx);
    rt::Value eval_dot(const ast::EDot& d, const ast::Expr& e, const rt::Env& env,
                       std::uint32_t ctx);
    rt::Value instance_segment(const rt::InstV& inst, const ast::PathSegment& seg,
                               std::uint32_t ctx);
    rt::Value eval_instantiate(const ast::EInstantiate& inst, const ast::Expr& e,
                               const rt::Env& env, std::uint32_t ctx);
    rt::Value eval_ifc_case(const ast::EIfcCase& c, const rt::Env& env, std::uint32_t ctx);
    rt::Value apply_closure(const rt::ClosureV& f, const rt::Value& arg);
    rt::Value query_interface_value(std::uint64_t token, const sema::InterfaceSig& target,
                                    bool register_in_scope);
    rt::Value wrap_boundary_member(const rt::Value& member, const std::string& name);
    rt::Value member_through(const rt::Handle& h, const std::string& name);

    bool try_bind(const ast::Pattern& p, const rt::Value& v, rt::Env& env) const;
    void bind_or_fault(const ast::Pattern& p, const rt::Value& v, rt::Env& env,
                       const SourceSpan& span) const;

    void eval_top_decl(const ast::DeclPtr& decl, std::uint32_t ctx);
    // view_sig: instantiate under this (thinned) signature instead of the
    // component's own; boundary marks the instance as IID-resolving and
    // marshaled (source-backed imports).
    rt::Value make_internal_instance(const CompClass& cls, const ast::DComponent& decl,
                                     std::vector<std::pair<std::string, rt::Value>> args,
                                     const SourceSpan& span, const std::string* view_sig,
                                     bool boundary);
    void collect_bindings(const ast::Pattern& p, const rt::Value& v,
                          std::map<std::string, rt::Value>& table) const;
    rt::Value make_imported_instance(const CompClass& cls, const ast::DImport& decl,
                                     const SourceSpan& span);
    std::uint32_t load_import_source(const interop::ManifestEntry& entry, const SourceSpan& span);
    void negotiate(std::uint64_t token, const sema::ComponentSig& want,
                   const sema::SigEnv& want_env, const interop::ManifestEntry& entry,
                   const sema::SigEnv& have_env, const SourceSpan& span);
    void do_export(const ast::DExport& e, std::uint32_t ctx, const SourceSpan& span);
    const interop::Manifest& manifest(const SourceSpan& span);

    rt::Env prim_env() const;

    Options opts_;
    comrt::Runtime runtime_;
    std::string trace_;
    std::vector<Ctx> ctxs_;
    std::vector<std::vector<rt::Handle>> parked_;  // per ctx, released at shutdown
    std::vector<Scope> scopes_;
    std::optional<interop::Manifest> manifest_;
    std::map<std::string, std::uint32_t> import_ctx_cache_;  // clsid text -> ctx
    std::set<std::string> imports_in_progress_;              // cycle detection
    bool shut_ = false;
};

// Convenience drivers: typecheck is the caller's job for run_program; its
// counterpart run_source parses and typechecks first (CompileError
// propagates to the caller).
RunResult run_program(sema::TypedProgram prog, Options opts = {});
RunResult run_source(const std::string& source, const std::string& filename, Options opts = {});

}  // namespace comlang::eval
