#include "comlang/sigs.hpp"

namespace comlang::sema {

const InterfaceSig::TypeMember* InterfaceSig::find_type(const std::string& member) const {
    for (const auto& t : types) {
        if (t.name == member) return &t;
    }
    return nullptr;
}

const Type* InterfaceSig::find_value(const std::string& member) const {
    for (const auto& [name, type] : values) {
        if (name == member) return &type;
    }
    return nullptr;
}

const std::string* ComponentSig::find_label(const std::string& label) const {
    for (const auto& [l, sig] : interfaces) {
        if (l == label) return &sig;
    }
    return nullptr;
}

std::string MatchReport::describe() const {
    std::string out;
    for (const auto& f : failures) {
        if (!out.empty()) out += "; ";
        switch (f.reason) {
            case MatchFailure::Reason::Missing: out += "missing " + f.member_path; break;
            case MatchFailure::Reason::TypeMismatch:
                out += "type mismatch at " + f.member_path;
                break;
            case MatchFailure::Reason::KindMismatch:
                out += "kind mismatch at " + f.member_path;
                break;
        }
        if (!f.detail.empty()) out += " (" + f.detail + ")";
    }
    return out;
}

MatchReport match_interface(const InterfaceSig& candidate, const InterfaceSig& target) {
    MatchReport report;
    auto fail = [&](const std::string& path, MatchFailure::Reason reason, std::string detail) {
        report.ok = false;
        report.failures.push_back({path, reason, std::move(detail)});
    };

    // Identify the target's own abstract members with the candidate's
    // interpretation of the same names (its manifest representation, or its
    // own stamped abstract type).
    std::map<std::string, Type> identify;
    for (const auto& tm : target.types) {
        const auto* cm = candidate.find_type(tm.name);
        if (!cm) {
            if (candidate.find_value(tm.name)) {
                fail("type " + tm.name, MatchFailure::Reason::KindMismatch,
                     "candidate declares a value member of that name");
            } else {
                fail("type " + tm.name, MatchFailure::Reason::Missing, "");
            }
            continue;
        }
        if (tm.manifest) {
            // A manifest target member demands the same representation.
            if (!cm->manifest) {
                fail("type " + tm.name, MatchFailure::Reason::TypeMismatch,
                     "candidate keeps the representation abstract");
            } else if (!type_equal(*tm.manifest, *cm->manifest)) {
                fail("type " + tm.name, MatchFailure::Reason::TypeMismatch,
                     "expected " + show_type(*tm.manifest) + ", candidate has " +
                         show_type(*cm->manifest));
            }
        } else {
            identify.emplace(tm.name, cm->view);
        }
    }

    for (const auto& [name, target_type] : target.values) {
        const Type* cand_type = candidate.find_value(name);
        if (!cand_type) {
            if (candidate.find_type(name)) {
                fail("val " + name, MatchFailure::Reason::KindMismatch,
                     "candidate declares a type member of that name");
            } else {
                fail("val " + name, MatchFailure::Reason::Missing, "");
            }
            continue;
        }
        Type wanted = substitute_abstract(target_type, target.name, identify);
        if (!type_equal(wanted, *cand_type)) {
            fail("val " + name, MatchFailure::Reason::TypeMismatch,
                 "expected " + show_type(wanted) + ", candidate has " + show_type(*cand_type));
        }
    }
    return report;
}

MatchReport match_component(const ComponentSig& candidate, const SigEnv& candidate_env,
                            const ComponentSig& target, const SigEnv& target_env) {
    MatchReport report;
    for (const auto& [label, target_sig_name] : target.interfaces) {
        const std::string* cand_sig_name = candidate.find_label(label);
        if (!cand_sig_name) {
            report.ok = false;
            report.failures.push_back(
                {"interface " + label, MatchFailure::Reason::Missing, ""});
            continue;
        }
        const InterfaceSig* cand_sig = candidate_env.find_interface(*cand_sig_name);
        const InterfaceSig* target_sig = target_env.find_interface(target_sig_name);
        if (!cand_sig || !target_sig) {
            report.ok = false;
            report.failures.push_back({"interface " + label, MatchFailure::Reason::Missing,
                                       "unresolved interface signature"});
            continue;
        }
        MatchReport inner = match_interface(*cand_sig, *target_sig);
        if (!inner.ok) {
            report.ok = false;
            for (auto& f : inner.failures) {
                f.member_path = "interface " + label + " / " + f.member_path;
                report.failures.push_back(std::move(f));
            }
        }
    }
    return report;
}

}  // namespace comlang::sema
