#include "comlang/types.hpp"

#include <atomic>

namespace comlang::sema {

namespace {

Type make(TypeNode node) {
    return std::make_shared<const TypeNode>(std::move(node));
}

std::atomic<std::uint64_t> g_next_stamp{1};

}  // namespace

std::uint64_t fresh_stamp() { return g_next_stamp.fetch_add(1); }

Type t_int() { static Type t = make({TInt{}}); return t; }
Type t_real() { static Type t = make({TReal{}}); return t; }
Type t_bool() { static Type t = make({TBool{}}); return t; }
Type t_string() { static Type t = make({TString{}}); return t; }
Type t_unit() { static Type t = make({TUnit{}}); return t; }
Type t_dyn_inst() { static Type t = make({TDynInst{}}); return t; }

Type t_tuple(std::vector<Type> elems) { return make({TTuple{std::move(elems)}}); }
Type t_record(std::map<std::string, Type> fields) { return make({TRecord{std::move(fields)}}); }
Type t_list(Type elem) { return make({TList{std::move(elem)}}); }
Type t_arrow(Type from, Type to) { return make({TArrow{std::move(from), std::move(to)}}); }
Type t_data(std::string name, std::vector<std::pair<std::string, Type>> ctors) {
    return make({TData{std::move(name), std::move(ctors)}});
}
Type t_abstract(std::string owner_sig, std::string member, std::uint64_t stamp) {
    return make({TAbstract{std::move(owner_sig), std::move(member), stamp}});
}
Type t_ifc(std::string sig) { return make({TIfc{std::move(sig)}}); }
Type t_comp(std::string sig) { return make({TComp{std::move(sig)}}); }

bool type_equal(const Type& a, const Type& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->v.index() != b->v.index()) return false;
    if (is<TTuple>(a)) {
        const auto& ea = as<TTuple>(a).elems;
        const auto& eb = as<TTuple>(b).elems;
        if (ea.size() != eb.size()) return false;
        for (std::size_t i = 0; i < ea.size(); ++i) {
            if (!type_equal(ea[i], eb[i])) return false;
        }
        return true;
    }
    if (is<TRecord>(a)) {
        const auto& fa = as<TRecord>(a).fields;
        const auto& fb = as<TRecord>(b).fields;
        if (fa.size() != fb.size()) return false;
        auto ita = fa.begin();
        auto itb = fb.begin();
        for (; ita != fa.end(); ++ita, ++itb) {
            if (ita->first != itb->first || !type_equal(ita->second, itb->second)) return false;
        }
        return true;
    }
    if (is<TList>(a)) return type_equal(as<TList>(a).elem, as<TList>(b).elem);
    if (is<TArrow>(a)) {
        return type_equal(as<TArrow>(a).from, as<TArrow>(b).from) &&
               type_equal(as<TArrow>(a).to, as<TArrow>(b).to);
    }
    if (is<TData>(a)) return as<TData>(a).name == as<TData>(b).name;
    if (is<TAbstract>(a)) return as<TAbstract>(a).stamp == as<TAbstract>(b).stamp;
    if (is<TIfc>(a)) return as<TIfc>(a).sig == as<TIfc>(b).sig;
    if (is<TComp>(a)) return as<TComp>(a).sig == as<TComp>(b).sig;
    return true;  // nullary alternatives
}

std::string show_type(const Type& t) {
    if (!t) return "?";
    if (is<TInt>(t)) return "int";
    if (is<TReal>(t)) return "real";
    if (is<TBool>(t)) return "bool";
    if (is<TString>(t)) return "string";
    if (is<TUnit>(t)) return "unit";
    if (is<TDynInst>(t)) return "inst";
    if (is<TTuple>(t)) {
        std::string out;
        const auto& elems = as<TTuple>(t).elems;
        for (std::size_t i = 0; i < elems.size(); ++i) {
            if (i) out += " * ";
            const Type& e = elems[i];
            bool wrap = is<TTuple>(e) || is<TArrow>(e);
            out += wrap ? "(" + show_type(e) + ")" : show_type(e);
        }
        return out;
    }
    if (is<TRecord>(t)) {
        std::string out = "{";
        bool first = true;
        for (const auto& [label, ft] : as<TRecord>(t).fields) {
            if (!first) out += ", ";
            first = false;
            out += label + ": " + show_type(ft);
        }
        return out + "}";
    }
    if (is<TList>(t)) {
        const Type& e = as<TList>(t).elem;
        bool wrap = is<TTuple>(e) || is<TArrow>(e);
        return (wrap ? "(" + show_type(e) + ")" : show_type(e)) + " list";
    }
    if (is<TArrow>(t)) {
        const auto& arrow = as<TArrow>(t);
        bool wrap = is<TArrow>(arrow.from);
        std::string lhs = wrap ? "(" + show_type(arrow.from) + ")" : show_type(arrow.from);
        return lhs + " -> " + show_type(arrow.to);
    }
    if (is<TData>(t)) return as<TData>(t).name;
    if (is<TAbstract>(t)) return as<TAbstract>(t).owner_sig + "." + as<TAbstract>(t).member;
    if (is<TIfc>(t)) return "||" + as<TIfc>(t).sig + "||";
    return "|" + as<TComp>(t).sig + "|";
}

Type substitute_abstract(const Type& t, const std::string& owner_sig,
                         const std::map<std::string, Type>& mapping) {
    if (!t) return t;
    if (is<TAbstract>(t)) {
        const auto& abs = as<TAbstract>(t);
        if (abs.owner_sig == owner_sig) {
            auto it = mapping.find(abs.member);
            if (it != mapping.end()) return it->second;
        }
        return t;
    }
    if (is<TTuple>(t)) {
        std::vector<Type> elems;
        for (const Type& e : as<TTuple>(t).elems) {
            elems.push_back(substitute_abstract(e, owner_sig, mapping));
        }
        return t_tuple(std::move(elems));
    }
    if (is<TRecord>(t)) {
        std::map<std::string, Type> fields;
        for (const auto& [label, ft] : as<TRecord>(t).fields) {
            fields.emplace(label, substitute_abstract(ft, owner_sig, mapping));
        }
        return t_record(std::move(fields));
    }
    if (is<TList>(t)) return t_list(substitute_abstract(as<TList>(t).elem, owner_sig, mapping));
    if (is<TArrow>(t)) {
        return t_arrow(substitute_abstract(as<TArrow>(t).from, owner_sig, mapping),
                       substitute_abstract(as<TArrow>(t).to, owner_sig, mapping));
    }
    if (is<TData>(t)) {
        std::vector<std::pair<std::string, Type>> ctors;
        for (const auto& [name, ct] : as<TData>(t).ctors) {
            ctors.emplace_back(name, substitute_abstract(ct, owner_sig, mapping));
        }
        return t_data(as<TData>(t).name, std::move(ctors));
    }
    return t;
}

}  // namespace comlang::sema
