#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "comlang/comrt.hpp"
#include "comlang/guid.hpp"
#include "comlang/sigs.hpp"
#include "comlang/value.hpp"

namespace comlang::interop {

// ----------------------------------------------------------------- registry

struct ManifestInterface {
    std::string sig;
    Guid iid;
    bool operator==(const ManifestInterface&) const = default;
};

struct ManifestEntry {
    Guid clsid;
    std::string kind;       // "source-backed" | "builtin-stub"
    std::string source;     // source-backed: path of the exporting program
    std::string stub;       // builtin-stub: stub id
    std::string component;  // exported component name (source-backed)
    std::string sig;        // component signature the export was ascribed
    std::vector<ManifestInterface> interfaces;
    bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
    int version = 1;
    std::vector<ManifestEntry> entries;

    const ManifestEntry* find(const Guid& clsid) const;
    bool operator==(const Manifest&) const = default;
};

// Parse/serialize the manifest JSON. load_manifest faults on a missing or
// malformed file; load_manifest_or_empty treats a missing file as empty.
Manifest load_manifest(const std::string& path);
Manifest load_manifest_or_empty(const std::string& path);
Manifest parse_manifest(const std::string& text, const std::string& origin);
std::string manifest_text(const Manifest& m);
// Atomic replace (write temp + rename) under an exclusive lock.
void save_manifest(const Manifest& m, const std::string& path);

// Insert or (with force) replace the entry for its CLSID. Re-registering an
// identical entry is a no-op; a differing entry without force is a
// clsid-collision fault.
void add_entry(Manifest& m, ManifestEntry entry, bool force);
bool remove_entry(Manifest& m, const Guid& clsid);

// --------------------------------------------------------------- marshaling

// Deep copy across the component boundary. Only the IDL-expressible value
// universe crosses; closures anywhere inside the value are a marshal fault.
// Interface and instance handles pass through unchanged (one shared kernel
// session stands in for the proxying a real multi-process setup would need).
rt::Value marshal_copy(const rt::Value& v);

// ------------------------------------------------------------- IDL emission

std::string emit_idl_interface(const sema::InterfaceSig& sig);
std::string emit_idl(const sema::ComponentSig& sig, const sema::SigEnv& env);

// -------------------------------------------------------------- agent stub

inline constexpr const char* agent_stub_id = "ms-agent";
inline constexpr const char* agent_stub_clsid = "A7B93C92-7B81-11D0-AC5F-00C04FD97575";

bool is_builtin_stub(const std::string& id);

// Canonical registry entry for the stub agent server.
ManifestEntry agent_stub_entry();

// Signature environment the stub's interfaces are elaborated in.
sema::SigEnvPtr agent_stub_env();

struct StubHost {
    comrt::Runtime* runtime = nullptr;
    std::function<void(const std::string&)> trace;
};

// Creates a stub server instance in the host runtime and returns its InstV.
// The caller owns the creation addrefs reported by the kernel.
rt::Value instantiate_stub(const std::string& stub_id, const StubHost& host);

}  // namespace comlang::interop
