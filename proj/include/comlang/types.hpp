#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace comlang::sema {

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

struct TInt {};
struct TReal {};
struct TBool {};
struct TString {};
struct TUnit {};
struct TTuple { std::vector<Type> elems; };
struct TRecord { std::map<std::string, Type> fields; };  // canonical label order
struct TList { Type elem; };
struct TArrow { Type from, to; };
// Nominal algebraic datatype; equality is by name.
struct TData {
    std::string name;
    std::vector<std::pair<std::string, Type>> ctors;
};
// Abstract type member of an interface signature. Stamps are unique per
// process, so abstract types from different elaborations never collide.
struct TAbstract {
    std::string owner_sig;
    std::string member;
    std::uint64_t stamp = 0;
};
struct TIfc { std::string sig; };   // ||SIG||
struct TComp { std::string sig; };  // |SIG|
// Dynamic instance type produced by instanceOf; only ifc_case scrutiny and
// identity comparison apply to it.
struct TDynInst {};

struct TypeNode {
    std::variant<TInt, TReal, TBool, TString, TUnit, TTuple, TRecord, TList, TArrow, TData,
                 TAbstract, TIfc, TComp, TDynInst>
        v;
};

template <class T>
bool is(const Type& t) {
    return t && std::holds_alternative<T>(t->v);
}
template <class T>
const T& as(const Type& t) {
    return std::get<T>(t->v);
}

Type t_int();
Type t_real();
Type t_bool();
Type t_string();
Type t_unit();
Type t_dyn_inst();
Type t_tuple(std::vector<Type> elems);
Type t_record(std::map<std::string, Type> fields);
Type t_list(Type elem);
Type t_arrow(Type from, Type to);
Type t_data(std::string name, std::vector<std::pair<std::string, Type>> ctors);
Type t_abstract(std::string owner_sig, std::string member, std::uint64_t stamp);
Type t_ifc(std::string sig);
Type t_comp(std::string sig);

std::uint64_t fresh_stamp();

// Structural equality; TData by name, TAbstract by stamp, TIfc/TComp by name.
bool type_equal(const Type& a, const Type& b);

std::string show_type(const Type& t);

// Substitutes abstract members of `owner_sig` by `mapping[member]` wherever
// they occur; other nodes are rebuilt structurally.
Type substitute_abstract(const Type& t, const std::string& owner_sig,
                         const std::map<std::string, Type>& mapping);

}  // namespace comlang::sema
