#include "comlang/comrt.hpp"

#include <algorithm>

#include "comlang/diag.hpp"
#include "comlang/types.hpp"

namespace comlang::comrt {

static int flattened_arity(const sema::Type& member_type) {
    if (!sema::is<sema::TArrow>(member_type)) return 0;
    const auto& arrow = sema::as<sema::TArrow>(member_type);
    if (sema::is<sema::TUnit>(arrow.from)) return 0;
    if (sema::is<sema::TTuple>(arrow.from))
        return static_cast<int>(sema::as<sema::TTuple>(arrow.from).elems.size());
    return 1;
}

VtableLayout compute_vtable_layout(const sema::InterfaceSig& sig) {
    VtableLayout layout;
    layout.sig_name = sig.name;
    layout.iid = sig.iid;
    layout.slots.push_back({0, "QueryInterface", 1});
    layout.slots.push_back({1, "AddRef", 0});
    layout.slots.push_back({2, "Release", 0});
    int index = 3;
    for (const auto& [name, type] : sig.values)
        layout.slots.push_back({index++, name, flattened_arity(type)});
    return layout;
}

namespace {
std::uint64_t next_session() {
    static std::uint64_t counter = 0;
    return ++counter;
}
}  // namespace

Runtime::Runtime() : session_(next_session()) {}

void Runtime::log(RefcountEvent::Kind kind, std::uint64_t instance, const std::string& sig,
                  const Ledger* ledger) {
    RefcountEvent ev;
    ev.kind = kind;
    ev.timestamp = next_stamp_++;
    ev.instance = instance;
    ev.sig = sig;
    if (ledger) {
        ev.addrefs = ledger->addrefs;
        ev.releases = ledger->releases;
    }
    events_.push_back(ev);
    if (trace_) {
        std::string line = "rc ";
        switch (kind) {
            case RefcountEvent::Kind::Create: line += "create"; break;
            case RefcountEvent::Kind::AddRef: line += "addref"; break;
            case RefcountEvent::Kind::Release: line += "release"; break;
            case RefcountEvent::Kind::Reclaim: line += "reclaim"; break;
        }
        line += " instance=" + std::to_string(instance);
        if (!sig.empty()) line += " ifc=" + sig;
        if (ledger)
            line += " addrefs=" + std::to_string(ledger->addrefs) +
                    " releases=" + std::to_string(ledger->releases);
        line += "\n";
        trace_(line);
    }
}

rt::Value Runtime::create_instance(InstanceSpec spec) {
    Instance inst;
    inst.token = next_token_++;
    inst.comp_sig = std::move(spec.comp_sig);
    inst.iid_resolving = spec.iid_resolving;
    inst.marshal_boundary = spec.marshal_boundary;
    inst.payload = std::move(spec.payload);
    for (auto& ifc : spec.interfaces) {
        if (inst.interfaces.count(ifc.sig.name))
            throw RuntimeFault(errcode::instantiation,
                               "instance provides interface " + ifc.sig.name + " twice");
        inst.labels.emplace_back(ifc.label, ifc.sig.name);
        inst.order.push_back(ifc.sig.name);
        IfcState state;
        state.sig = std::move(ifc.sig);
        state.members = std::move(ifc.members);
        inst.interfaces.emplace(state.sig.name, std::move(state));
    }
    std::uint64_t token = inst.token;
    auto [it, inserted] = instances_.emplace(token, std::move(inst));
    (void)inserted;
    log(RefcountEvent::Kind::Create, token, "", nullptr);
    // Creation counts as the first addref of every interface ledger.
    for (const auto& sig_name : it->second.order) {
        Ledger& ledger = it->second.interfaces.at(sig_name).ledger;
        ledger.addrefs = 1;
        log(RefcountEvent::Kind::AddRef, token, sig_name, &ledger);
    }
    // Pin everything the instance's members captured.
    for (const auto& h : spec.hold) {
        addref(h);
        it->second.hold.push_back(h);
    }
    return rt::Value{rt::InstV{session_, token, it->second.comp_sig}};
}

Runtime::Instance& Runtime::live_instance(std::uint64_t token, const char* what) {
    auto it = instances_.find(token);
    if (it == instances_.end())
        throw RuntimeFault(errcode::kernel, std::string(what) + " on unknown instance " +
                                                std::to_string(token));
    if (it->second.reclaimed)
        throw RuntimeFault(errcode::kernel, std::string(what) + " on reclaimed instance " +
                                                std::to_string(token));
    return it->second;
}

const Runtime::Instance& Runtime::known_instance(std::uint64_t token) const {
    auto it = instances_.find(token);
    if (it == instances_.end())
        throw RuntimeFault(errcode::kernel, "unknown instance " + std::to_string(token));
    return it->second;
}

void Runtime::check_session(const rt::Handle& h) const {
    if (h.session != session_)
        throw RuntimeFault(errcode::kernel, "handle for interface " + h.sig +
                                                " belongs to a different runtime session");
}

std::optional<rt::Value> Runtime::try_query(std::uint64_t instance,
                                            const sema::InterfaceSig& target) {
    Instance& inst = live_instance(instance, "QueryInterface");
    const std::string* resolved = nullptr;
    if (inst.iid_resolving) {
        if (target.iid) {
            for (const auto& sig_name : inst.order) {
                const auto& have = inst.interfaces.at(sig_name).sig;
                if (have.iid && *have.iid == *target.iid) {
                    resolved = &sig_name;
                    break;
                }
            }
        }
    } else {
        if (inst.interfaces.count(target.name)) {
            resolved = &inst.interfaces.at(target.name).sig.name;
        } else {
            for (const auto& sig_name : inst.order) {
                const auto& have = inst.interfaces.at(sig_name).sig;
                if (sema::match_interface(have, target).ok) {
                    resolved = &sig_name;
                    break;
                }
            }
        }
    }
    if (!resolved) return std::nullopt;
    Ledger& ledger = inst.interfaces.at(*resolved).ledger;
    ledger.addrefs++;
    log(RefcountEvent::Kind::AddRef, instance, *resolved, &ledger);
    return rt::Value{rt::IfcV{rt::Handle{session_, instance, *resolved}}};
}

const std::string* Runtime::label_interface(std::uint64_t instance,
                                            const std::string& label) const {
    const Instance& inst = known_instance(instance);
    for (const auto& [lbl, sig_name] : inst.labels)
        if (lbl == label) return &sig_name;
    return nullptr;
}

const std::string& Runtime::instance_comp_sig(std::uint64_t instance) const {
    return known_instance(instance).comp_sig;
}

bool Runtime::instance_iid_resolving(std::uint64_t instance) const {
    return known_instance(instance).iid_resolving;
}

bool Runtime::instance_marshal_boundary(std::uint64_t instance) const {
    return known_instance(instance).marshal_boundary;
}

std::vector<std::string> Runtime::instance_interfaces(std::uint64_t instance) const {
    return known_instance(instance).order;
}

rt::Value Runtime::instance_value(std::uint64_t instance) const {
    const Instance& inst = known_instance(instance);
    return rt::Value{rt::InstV{session_, inst.token, inst.comp_sig}};
}

rt::Value Runtime::get_member(const rt::Handle& h, const std::string& name) const {
    check_session(h);
    auto it = instances_.find(h.instance);
    if (it == instances_.end() || it->second.reclaimed)
        throw RuntimeFault(errcode::kernel,
                           "member access through a handle to a reclaimed instance");
    auto ifc = it->second.interfaces.find(h.sig);
    if (ifc == it->second.interfaces.end())
        throw RuntimeFault(errcode::kernel, "instance has no interface " + h.sig);
    auto member = ifc->second.members.find(name);
    if (member == ifc->second.members.end())
        throw RuntimeFault(errcode::kernel,
                           "interface " + h.sig + " has no member " + name);
    return member->second;
}

void Runtime::addref(const rt::Handle& h) {
    check_session(h);
    Instance& inst = live_instance(h.instance, "AddRef");
    auto it = inst.interfaces.find(h.sig);
    if (it == inst.interfaces.end())
        throw RuntimeFault(errcode::kernel, "AddRef on unknown interface " + h.sig);
    it->second.ledger.addrefs++;
    log(RefcountEvent::Kind::AddRef, h.instance, h.sig, &it->second.ledger);
}

void Runtime::release(const rt::Handle& h) {
    check_session(h);
    Instance& inst = live_instance(h.instance, "Release");
    auto it = inst.interfaces.find(h.sig);
    if (it == inst.interfaces.end())
        throw RuntimeFault(errcode::kernel, "Release on unknown interface " + h.sig);
    Ledger& ledger = it->second.ledger;
    if (ledger.releases >= ledger.addrefs)
        throw RuntimeFault(errcode::over_release,
                           "Release on balanced ledger instance=" + std::to_string(h.instance) +
                               " ifc=" + h.sig);
    ledger.releases++;
    log(RefcountEvent::Kind::Release, h.instance, h.sig, &ledger);
    maybe_reclaim(inst);
}

void Runtime::maybe_reclaim(Instance& inst) {
    if (inst.reclaimed || inst.interfaces.empty()) return;
    for (const auto& [name, state] : inst.interfaces)
        if (state.ledger.addrefs != state.ledger.releases) return;
    inst.reclaimed = true;
    for (auto& [name, state] : inst.interfaces) state.members.clear();
    inst.payload.reset();
    std::vector<rt::Handle> held = std::move(inst.hold);
    inst.hold.clear();
    log(RefcountEvent::Kind::Reclaim, inst.token, "", nullptr);
    for (const auto& h : held) release(h);
}

bool Runtime::is_reclaimed(std::uint64_t instance) const {
    return known_instance(instance).reclaimed;
}

bool Runtime::is_live(std::uint64_t instance) const {
    auto it = instances_.find(instance);
    return it != instances_.end() && !it->second.reclaimed;
}

std::uint64_t Runtime::addref_count(std::uint64_t instance, const std::string& sig) const {
    const Instance& inst = known_instance(instance);
    auto it = inst.interfaces.find(sig);
    return it == inst.interfaces.end() ? 0 : it->second.ledger.addrefs;
}

std::uint64_t Runtime::release_count(std::uint64_t instance, const std::string& sig) const {
    const Instance& inst = known_instance(instance);
    auto it = inst.interfaces.find(sig);
    return it == inst.interfaces.end() ? 0 : it->second.ledger.releases;
}

std::vector<std::string> Runtime::leak_report() const {
    std::vector<std::string> lines;
    for (const auto& [token, inst] : instances_) {
        if (inst.reclaimed) continue;
        for (const auto& [sig_name, state] : inst.interfaces) {
            if (state.ledger.addrefs == state.ledger.releases) continue;
            lines.push_back("LEAK instance=" + std::to_string(token) + " ifc=" + sig_name +
                            " addrefs=" + std::to_string(state.ledger.addrefs) +
                            " releases=" + std::to_string(state.ledger.releases));
        }
    }
    return lines;
}

}  // namespace comlang::comrt
