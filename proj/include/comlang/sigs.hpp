#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "comlang/guid.hpp"
#include "comlang/types.hpp"

namespace comlang::sema {

// Elaborated interface signature. Value member types are fully resolved:
// references to manifest type members are replaced by their representations,
// references to abstract members by stamped TAbstract nodes.
struct InterfaceSig {
    struct TypeMember {
        std::string name;
        std::optional<Type> manifest;  // nullopt => abstract
        Type view;                     // manifest rep, or the stamped abstract type
    };

    std::string name;
    std::vector<TypeMember> types;
    std::vector<std::pair<std::string, Type>> values;  // declaration order
    std::optional<Guid> iid;

    const TypeMember* find_type(const std::string& member) const;
    const Type* find_value(const std::string& member) const;
};

struct ComponentSig {
    std::string name;
    std::vector<std::pair<std::string, std::string>> interfaces;  // label -> sig name

    const std::string* find_label(const std::string& label) const;
};

// Signature environment: interface and component signatures share one
// namespace so that |S| and ||S|| cannot silently shadow each other.
struct SigEnv {
    std::map<std::string, InterfaceSig> interfaces;
    std::map<std::string, ComponentSig> components;

    bool contains(const std::string& name) const {
        return interfaces.count(name) || components.count(name);
    }
    const InterfaceSig* find_interface(const std::string& name) const {
        auto it = interfaces.find(name);
        return it == interfaces.end() ? nullptr : &it->second;
    }
    const ComponentSig* find_component(const std::string& name) const {
        auto it = components.find(name);
        return it == components.end() ? nullptr : &it->second;
    }
};

using SigEnvPtr = std::shared_ptr<const SigEnv>;

struct MatchFailure {
    enum class Reason { Missing, TypeMismatch, KindMismatch };
    std::string member_path;
    Reason reason;
    std::string detail;
};

struct MatchReport {
    bool ok = true;
    std::vector<MatchFailure> failures;
    std::string describe() const;
};

// Opaque signature matching: every member of `target` must appear in
// `candidate` with an equal type once the target's abstract members are
// identified with the candidate's interpretation of the same names. The
// candidate may declare extra members (width subtyping); a target may not
// reveal a representation the candidate keeps hidden.
MatchReport match_interface(const InterfaceSig& candidate, const InterfaceSig& target);

// Label-wise interface matching for component signatures. Candidate and
// target may come from different elaborations (import negotiation), hence
// the two environments.
MatchReport match_component(const ComponentSig& candidate, const SigEnv& candidate_env,
                            const ComponentSig& target, const SigEnv& target_env);

}  // namespace comlang::sema
