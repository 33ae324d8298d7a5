#include "comlang/value.hpp"

#include <charconv>
#include <sstream>

namespace comlang::rt {

Env env_bind(Env parent, std::string name, Value value) {
    auto frame = std::make_shared<Frame>();
    frame->name = std::move(name);
    frame->value = std::move(value);
    frame->parent = std::move(parent);
    return frame;
}

const Value* env_lookup(const Env& env, const std::string& name) {
    for (const Frame* f = env.get(); f; f = f->parent.get()) {
        if (f->name == name) return &f->value;
    }
    return nullptr;
}

bool value_equal(const Value& a, const Value& b) {
    if (a.node.index() != b.node.index()) return false;
    if (auto* x = get_if<IntV>(a)) return x->v == as<IntV>(b).v;
    if (auto* x = get_if<RealV>(a)) return x->v == as<RealV>(b).v;
    if (auto* x = get_if<BoolV>(a)) return x->v == as<BoolV>(b).v;
    if (auto* x = get_if<StringV>(a)) return x->v == as<StringV>(b).v;
    if (is<UnitV>(a)) return true;
    if (auto* x = get_if<TupleV>(a)) {
        auto& y = as<TupleV>(b);
        if (x->elems.size() != y.elems.size()) return false;
        for (size_t i = 0; i < x->elems.size(); ++i)
            if (!value_equal(x->elems[i], y.elems[i])) return false;
        return true;
    }
    if (auto* x = get_if<RecordV>(a)) {
        auto& y = as<RecordV>(b);
        if (x->fields.size() != y.fields.size()) return false;
        for (size_t i = 0; i < x->fields.size(); ++i) {
            if (x->fields[i].first != y.fields[i].first) return false;
            if (!value_equal(x->fields[i].second, y.fields[i].second)) return false;
        }
        return true;
    }
    if (auto* x = get_if<ListV>(a)) {
        auto& y = as<ListV>(b);
        if (x->elems.size() != y.elems.size()) return false;
        for (size_t i = 0; i < x->elems.size(); ++i)
            if (!value_equal(x->elems[i], y.elems[i])) return false;
        return true;
    }
    if (auto* x = get_if<InstV>(a)) {
        auto& y = as<InstV>(b);
        return x->session == y.session && x->instance == y.instance;
    }
    if (auto* x = get_if<ConV>(a)) {
        auto& y = as<ConV>(b);
        if (x->ctor != y.ctor) return false;
        if (!x->arg || !y.arg) return !x->arg && !y.arg;
        return value_equal(*x->arg, *y.arg);
    }
    return false;  // closures, prims, interface handles
}

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            default: out += c;
        }
    }
    return out;
}

std::string format_real(double d) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    (void)ec;
    std::string s(buf, end);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

}  // namespace

std::string show_value(const Value& v) {
    if (auto* x = get_if<IntV>(v)) return std::to_string(x->v);
    if (auto* x = get_if<RealV>(v)) return format_real(x->v);
    if (auto* x = get_if<BoolV>(v)) return x->v ? "true" : "false";
    if (auto* x = get_if<StringV>(v)) return "\"" + escape(x->v) + "\"";
    if (is<UnitV>(v)) return "()";
    if (auto* x = get_if<TupleV>(v)) {
        std::ostringstream out;
        out << "(";
        for (size_t i = 0; i < x->elems.size(); ++i) {
            if (i) out << ", ";
            out << show_value(x->elems[i]);
        }
        out << ")";
        return out.str();
    }
    if (auto* x = get_if<RecordV>(v)) {
        std::ostringstream out;
        out << "{";
        for (size_t i = 0; i < x->fields.size(); ++i) {
            if (i) out << ", ";
            out << x->fields[i].first << " = " << show_value(x->fields[i].second);
        }
        out << "}";
        return out.str();
    }
    if (auto* x = get_if<ListV>(v)) {
        std::ostringstream out;
        out << "[";
        for (size_t i = 0; i < x->elems.size(); ++i) {
            if (i) out << ", ";
            out << show_value(x->elems[i]);
        }
        out << "]";
        return out.str();
    }
    if (is<ClosureV>(v)) return "<fn>";
    if (auto* x = get_if<PrimV>(v)) return "<prim " + x->name + ">";
    if (auto* x = get_if<IfcV>(v))
        return "<ifc " + x->handle.sig + "@" + std::to_string(x->handle.instance) + ">";
    if (auto* x = get_if<InstV>(v))
        return "<inst |" + x->comp_sig + "|@" + std::to_string(x->instance) + ">";
    if (auto* x = get_if<ConV>(v))
        return x->arg ? x->ctor + " " + show_value(*x->arg) : x->ctor;
    return "<?>";
}

}  // namespace comlang::rt
