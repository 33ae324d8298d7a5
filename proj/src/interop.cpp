#include "comlang/interop.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "comlang/diag.hpp"
#include "comlang/types.hpp"

namespace comlang::interop {

using nlohmann::json;

const ManifestEntry* Manifest::find(const Guid& clsid) const {
    for (auto& e : entries)
        if (e.clsid == clsid) return &e;
    return nullptr;
}

// ----------------------------------------------------------------- registry

namespace {

[[noreturn]] void bad_manifest(const std::string& origin, const std::string& why) {
    throw RuntimeFault(errcode::manifest, origin + ": " + why);
}

Guid guid_field(const json& j, const char* field, const std::string& origin) {
    if (!j.contains(field) || !j[field].is_string())
        bad_manifest(origin, std::string("entry is missing \"") + field + "\"");
    auto g = Guid::parse(j[field].get<std::string>());
    if (!g)
        bad_manifest(origin, std::string("\"") + field +
                                 "\" is not a GUID: " + j[field].get<std::string>());
    return *g;
}

std::string string_field(const json& j, const char* field) {
    if (j.contains(field) && j[field].is_string()) return j[field].get<std::string>();
    return {};
}

}  // namespace

Manifest parse_manifest(const std::string& text, const std::string& origin) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) bad_manifest(origin, "not valid JSON");
    if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer())
        bad_manifest(origin, "expected an object with \"version\" and \"entries\"");
    Manifest m;
    m.version = j["version"].get<int>();
    if (m.version != 1)
        bad_manifest(origin, "unsupported registry version " + std::to_string(m.version));
    if (!j.contains("entries") || !j["entries"].is_array())
        bad_manifest(origin, "\"entries\" must be an array");
    for (auto& je : j["entries"]) {
        if (!je.is_object()) bad_manifest(origin, "entries must be objects");
        ManifestEntry e;
        e.clsid = guid_field(je, "clsid", origin);
        e.kind = string_field(je, "kind");
        e.source = string_field(je, "source");
        e.stub = string_field(je, "stub");
        e.component = string_field(je, "component");
        e.sig = string_field(je, "sig");
        if (e.kind == "source-backed") {
            if (e.source.empty() || e.component.empty() || e.sig.empty())
                bad_manifest(origin, "source-backed entry for " + e.clsid.str() +
                                         " needs \"source\", \"component\" and \"sig\"");
        } else if (e.kind == "builtin-stub") {
            if (e.stub.empty())
                bad_manifest(origin,
                             "builtin-stub entry for " + e.clsid.str() + " needs \"stub\"");
        } else {
            bad_manifest(origin, "unknown entry kind \"" + e.kind + "\"");
        }
        if (je.contains("interfaces")) {
            if (!je["interfaces"].is_array())
                bad_manifest(origin, "\"interfaces\" must be an array");
            for (auto& ji : je["interfaces"]) {
                ManifestInterface mi;
                mi.sig = string_field(ji, "sig");
                if (mi.sig.empty())
                    bad_manifest(origin, "interface entries need a \"sig\" name");
                mi.iid = guid_field(ji, "iid", origin);
                e.interfaces.push_back(std::move(mi));
            }
        }
        if (m.find(e.clsid))
            bad_manifest(origin, "clsid " + e.clsid.str() + " appears twice");
        m.entries.push_back(std::move(e));
    }
    return m;
}

std::string manifest_text(const Manifest& m) {
    json j;
    j["version"] = m.version;
    j["entries"] = json::array();
    for (auto& e : m.entries) {
        json je;
        je["clsid"] = e.clsid.str();
        je["kind"] = e.kind;
        je["sig"] = e.sig;
        if (e.kind == "builtin-stub") {
            je["stub"] = e.stub;
        } else {
            je["source"] = e.source;
            je["component"] = e.component;
        }
        je["interfaces"] = json::array();
        for (auto& mi : e.interfaces)
            je["interfaces"].push_back(json{{"sig", mi.sig}, {"iid", mi.iid.str()}});
        j["entries"].push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFault(errcode::manifest, "cannot read registry " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text, path);
}

Manifest load_manifest_or_empty(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return {};
    return load_manifest(path);
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::string text = manifest_text(m);
    struct LockFile {
        int fd = -1;
        ~LockFile() {
            if (fd >= 0) {
                ::flock(fd, LOCK_UN);
                ::close(fd);
            }
        }
    } lock;
    lock.fd = ::open((path + ".lock").c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (lock.fd < 0 || ::flock(lock.fd, LOCK_EX) != 0)
        throw RuntimeFault(errcode::manifest, "cannot lock registry " + path);
    std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text << std::flush;
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw RuntimeFault(errcode::manifest, "cannot write registry " + path);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ec2;
        std::filesystem::remove(tmp, ec2);
        throw RuntimeFault(errcode::manifest,
                           "cannot replace registry " + path + ": " + ec.message());
    }
}

void add_entry(Manifest& m, ManifestEntry entry, bool force) {
    for (auto& e : m.entries) {
        if (e.clsid == entry.clsid) {
            if (e == entry) return;
            if (!force)
                throw RuntimeFault(errcode::clsid_collision,
                                   "clsid " + entry.clsid.str() +
                                       " is already registered with a different entry");
            e = std::move(entry);
            return;
        }
    }
    m.entries.push_back(std::move(entry));
}

bool remove_entry(Manifest& m, const Guid& clsid) {
    auto it = std::remove_if(m.entries.begin(), m.entries.end(),
                             [&](const ManifestEntry& e) { return e.clsid == clsid; });
    bool removed = it != m.entries.end();
    m.entries.erase(it, m.entries.end());
    return removed;
}

// --------------------------------------------------------------- marshaling

rt::Value marshal_copy(const rt::Value& v) {
    if (rt::is<rt::IntV>(v) || rt::is<rt::RealV>(v) || rt::is<rt::BoolV>(v) ||
        rt::is<rt::StringV>(v) || rt::is<rt::UnitV>(v) || rt::is<rt::IfcV>(v) ||
        rt::is<rt::InstV>(v))
        return v;
    if (auto* t = rt::get_if<rt::TupleV>(v)) {
        rt::TupleV out;
        for (auto& e : t->elems) out.elems.push_back(marshal_copy(e));
        return rt::Value{std::move(out)};
    }
    if (auto* r = rt::get_if<rt::RecordV>(v)) {
        rt::RecordV out;
        for (auto& [name, f] : r->fields) out.fields.emplace_back(name, marshal_copy(f));
        return rt::Value{std::move(out)};
    }
    if (auto* l = rt::get_if<rt::ListV>(v)) {
        rt::ListV out;
        for (auto& e : l->elems) out.elems.push_back(marshal_copy(e));
        return rt::Value{std::move(out)};
    }
    if (auto* c = rt::get_if<rt::ConV>(v)) {
        rt::ConV out;
        out.ctor = c->ctor;
        if (c->arg) out.arg = std::make_shared<rt::Value>(marshal_copy(*c->arg));
        return rt::Value{std::move(out)};
    }
    throw RuntimeFault(errcode::marshal, "function value cannot cross the component boundary");
}

// ------------------------------------------------------------- IDL emission

namespace {

std::string idl_type(const sema::Type& t) {
    using namespace sema;
    if (is<TInt>(t)) return "long";
    if (is<TReal>(t)) return "double";
    if (is<TBool>(t)) return "boolean";
    if (is<TString>(t)) return "BSTR";
    if (is<TIfc>(t)) return as<TIfc>(t).sig + "*";
    if (is<TComp>(t)) return as<TComp>(t).sig + "*";
    if (is<TList>(t)) return "SAFEARRAY(" + idl_type(as<TList>(t).elem) + ")";
    if (is<TData>(t)) return "VARIANT";
    if (is<TRecord>(t)) {
        std::string out = "struct { ";
        for (auto& [name, f] : as<TRecord>(t).fields) out += idl_type(f) + " " + name + "; ";
        out += "}";
        return out;
    }
    throw CompileError(errcode::not_expressible, {},
                       "type " + show_type(t) + " has no wire representation");
}

std::vector<sema::Type> arg_components(const sema::Type& t) {
    using namespace sema;
    if (is<TUnit>(t)) return {};
    if (is<TTuple>(t)) return as<TTuple>(t).elems;
    return {t};
}

}  // namespace

std::string emit_idl_interface(const sema::InterfaceSig& sig) {
    std::string out;
    if (sig.iid) out += "[uuid(" + sig.iid->str() + ")]\n";
    out += "interface " + sig.name + " {\n";
    for (auto& [name, ty] : sig.values) {
        std::vector<std::string> params;
        std::string ret;
        if (sema::is<sema::TArrow>(ty)) {
            auto& arrow = sema::as<sema::TArrow>(ty);
            auto ins = arg_components(arrow.from);
            for (size_t i = 0; i < ins.size(); ++i)
                params.push_back("[in] " + idl_type(ins[i]) + " a" + std::to_string(i));
            if (sema::is<sema::TUnit>(arrow.to)) {
                ret = "void";
            } else if (sema::is<sema::TTuple>(arrow.to)) {
                ret = "void";
                auto& elems = sema::as<sema::TTuple>(arrow.to).elems;
                for (size_t i = 0; i < elems.size(); ++i)
                    params.push_back("[out] " + idl_type(elems[i]) + "* r" + std::to_string(i));
            } else {
                ret = idl_type(arrow.to);
            }
        } else {
            ret = idl_type(ty);
        }
        out += "  " + ret + " " + name + "(";
        for (size_t i = 0; i < params.size(); ++i) {
            if (i) out += ", ";
            out += params[i];
        }
        out += ");\n";
    }
    out += "}\n";
    return out;
}

std::string emit_idl(const sema::ComponentSig& sig, const sema::SigEnv& env) {
    std::string out;
    bool first = true;
    for (auto& [label, name] : sig.interfaces) {
        (void)label;
        const sema::InterfaceSig* ifc = env.find_interface(name);
        if (!ifc)
            throw CompileError(errcode::unbound_signature, {},
                               "unbound interface signature '" + name + "'");
        if (!first) out += "\n";
        first = false;
        out += emit_idl_interface(*ifc);
    }
    return out;
}

bool is_builtin_stub(const std::string& id) { return id == agent_stub_id; }

}  // namespace comlang::interop
