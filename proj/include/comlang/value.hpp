#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "comlang/ast.hpp"

namespace comlang::rt {

// Reference to one (instance, interface-signature) ledger entry of the
// component kernel, tagged with the owning session.
struct Handle {
    std::uint64_t session = 0;
    std::uint64_t instance = 0;
    std::string sig;

    bool operator==(const Handle& o) const {
        return session == o.session && instance == o.instance && sig == o.sig;
    }
    bool operator<(const Handle& o) const {
        if (instance != o.instance) return instance < o.instance;
        if (sig != o.sig) return sig < o.sig;
        return session < o.session;
    }
};

struct Value;

struct IntV { std::int64_t v = 0; };
struct RealV { double v = 0.0; };
struct BoolV { bool v = false; };
struct StringV { std::string v; };
struct UnitV {};
struct TupleV { std::vector<Value> elems; };
struct RecordV { std::vector<std::pair<std::string, Value>> fields; };  // sorted by label
struct ListV { std::vector<Value> elems; };

// Persistent environment: one binding per frame, chained. Immutable after
// construction, so closures can share frames freely.
struct Frame;
using Env = std::shared_ptr<const Frame>;

// Either a lambda or a (possibly partially applied) multi-clause function
// declaration. `ctx` selects which loaded program's component table the body
// is evaluated against.
struct ClosureV {
    std::shared_ptr<ast::Expr> lambda;  // Expr holding ELambda, or null
    std::shared_ptr<ast::Decl> fun;     // Decl holding DFun, or null
    std::vector<Value> applied;         // curried arguments received so far
    Env env;
    std::uint32_t ctx = 0;
};

// Host function: primitives, stub methods, marshal wrappers.
struct PrimV {
    std::string name;
    std::shared_ptr<std::function<Value(const Value&)>> fn;
};

struct IfcV { Handle handle; };

struct InstV {
    std::uint64_t session = 0;
    std::uint64_t instance = 0;
    std::string comp_sig;  // the signature this value is viewed through
};

// Applied datatype constructor. No surface syntax constructs these yet; the
// type layer admits datatypes, so the value universe carries them too.
struct ConV {
    std::string ctor;
    std::shared_ptr<Value> arg;  // null for nullary constructors
};

struct Value {
    std::variant<IntV, RealV, BoolV, StringV, UnitV, TupleV, RecordV, ListV, ClosureV, PrimV,
                 IfcV, InstV, ConV>
        node;
};

struct Frame {
    std::string name;
    Value value;
    Env parent;
};

template <class T>
bool is(const Value& v) {
    return std::holds_alternative<T>(v.node);
}
template <class T>
const T& as(const Value& v) {
    return std::get<T>(v.node);
}
template <class T>
const T* get_if(const Value& v) {
    return std::get_if<T>(&v.node);
}

Env env_bind(Env parent, std::string name, Value value);
const Value* env_lookup(const Env& env, const std::string& name);

// Structural equality on the equality-admitting universe; instances compare
// by identity token. Closures and interface handles are never equal.
bool value_equal(const Value& a, const Value& b);

// Diagnostic rendering (used in error messages and test failure output).
std::string show_value(const Value& v);

}  // namespace comlang::rt
