#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "comlang/sigs.hpp"
#include "comlang/value.hpp"

namespace comlang::comrt {

// Ordered method-slot descriptor of an interface. The first three slots are
// reserved for QueryInterface, AddRef and Release; signature members follow
// in declaration order. Flattened arity counts the tuple components of a
// method's argument (unit = 0, non-arrow members = 0).
struct VtableSlot {
    int index = 0;
    std::string name;
    int arity = 0;
};

struct VtableLayout {
    std::string sig_name;
    std::optional<Guid> iid;
    std::vector<VtableSlot> slots;
};

VtableLayout compute_vtable_layout(const sema::InterfaceSig& sig);

// One interface provided by an instance under construction.
struct InterfaceSpec {
    std::string label;
    sema::InterfaceSig sig;
    std::map<std::string, rt::Value> members;
};

struct InstanceSpec {
    std::string comp_sig;
    std::vector<InterfaceSpec> interfaces;  // declaration order
    // Imported/stub instances resolve queries by IID; internal instances by
    // signature name, then structurally.
    bool iid_resolving = false;
    // Source-backed imports pass only marshaled values; member access through
    // such an instance is wrapped by the evaluator.
    bool marshal_boundary = false;
    // Handles the instance addrefs for its own lifetime (captured
    // environment); released when the instance is reclaimed.
    std::vector<rt::Handle> hold;
    std::shared_ptr<void> payload;  // opaque per-instance state (stubs)
};

struct RefcountEvent {
    enum class Kind { Create, AddRef, Release, Reclaim };
    Kind kind;
    std::uint64_t timestamp = 0;
    std::uint64_t instance = 0;
    std::string sig;  // empty for Create/Reclaim
    std::uint64_t addrefs = 0, releases = 0;
};

// The simulated component kernel. Single-threaded; one session per runtime.
class Runtime {
public:
    Runtime();

    std::uint64_t session() const { return session_; }

    // Constructs an instance with a fresh identity token. Every interface is
    // constructed eagerly and its ledger starts at one addref.
    rt::Value create_instance(InstanceSpec spec);

    // QueryInterface. Success addrefs the resolved ledger and returns a
    // handle; failure is a negotiation outcome, not a fault.
    std::optional<rt::Value> try_query(std::uint64_t instance, const sema::InterfaceSig& target);

    // Label -> interface sig name of the instance's ascribed signature.
    const std::string* label_interface(std::uint64_t instance, const std::string& label) const;
    const std::string& instance_comp_sig(std::uint64_t instance) const;
    bool instance_iid_resolving(std::uint64_t instance) const;
    bool instance_marshal_boundary(std::uint64_t instance) const;
    std::vector<std::string> instance_interfaces(std::uint64_t instance) const;

    rt::Value instance_value(std::uint64_t instance) const;  // InstV, no addref

    // Member dispatch for a held interface handle.
    rt::Value get_member(const rt::Handle& h, const std::string& name) const;

    void addref(const rt::Handle& h);
    void release(const rt::Handle& h);

    bool same_instance(const rt::Handle& a, const rt::Handle& b) const {
        return a.instance == b.instance;
    }
    bool is_reclaimed(std::uint64_t instance) const;
    bool is_live(std::uint64_t instance) const;

    std::uint64_t addref_count(std::uint64_t instance, const std::string& sig) const;
    std::uint64_t release_count(std::uint64_t instance, const std::string& sig) const;

    // One line per unbalanced (instance, interface) pair:
    //   LEAK instance=<token> ifc=<sig> addrefs=<n> releases=<m>
    // sorted by token then sig.
    std::vector<std::string> leak_report() const;

    const std::vector<RefcountEvent>& events() const { return events_; }
    void set_trace(std::function<void(const std::string&)> sink) { trace_ = std::move(sink); }

private:
    struct Ledger {
        std::uint64_t addrefs = 0, releases = 0;
    };
    struct IfcState {
        sema::InterfaceSig sig;
        std::map<std::string, rt::Value> members;
        Ledger ledger;
    };
    struct Instance {
        std::uint64_t token = 0;
        std::string comp_sig;
        std::vector<std::pair<std::string, std::string>> labels;  // label -> sig name
        std::vector<std::string> order;                           // sig names, declared order
        std::map<std::string, IfcState> interfaces;               // keyed by sig name
        bool iid_resolving = false;
        bool marshal_boundary = false;
        bool reclaimed = false;
        std::vector<rt::Handle> hold;
        std::shared_ptr<void> payload;
    };

    Instance& live_instance(std::uint64_t token, const char* what);
    const Instance& known_instance(std::uint64_t token) const;
    void check_session(const rt::Handle& h) const;
    void log(RefcountEvent::Kind kind, std::uint64_t instance, const std::string& sig,
             const Ledger* ledger);
    void maybe_reclaim(Instance& inst);

    std::uint64_t session_ = 0;
    std::uint64_t next_token_ = 1;
    std::uint64_t next_stamp_ = 1;
    std::map<std::uint64_t, Instance> instances_;
    std::vector<RefcountEvent> events_;
    std::function<void(const std::string&)> trace_;
};

}  // namespace comlang::comrt
