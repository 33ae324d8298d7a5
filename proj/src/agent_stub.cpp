#include <map>
#include <memory>

#include "comlang/diag.hpp"
#include "comlang/interop.hpp"
#include "comlang/parser.hpp"
#include "comlang/sema.hpp"

// A scripted stand-in for an external agent automation server. It answers
// the same negotiation protocol as a real registered component but its
// methods only append trace lines and bump request counters, so tests can
// pin its observable behavior exactly.

namespace comlang::interop {

namespace {

constexpr const char* agent_iid = "A7B93C91-7B81-11D0-AC5F-00C04FD97575";

constexpr const char* stub_sig_source = R"(
interface_sig I_AGENT_CHARACTER = {
  val setPosition : int * int -> ()
  val getPosition : () -> int * int
  val play : string -> int
  val stop : int -> ()
  val show : bool -> int
  val speak : string * string -> int
} with_iid A7B93C8F-7B81-11D0-AC5F-00C04FD97575

component_sig AGENT_CHARACTER = {
  interface IAgentCharacter : I_AGENT_CHARACTER
}

component_sig AGENT_NOTIFY_SINK = {
}

interface_sig I_AGENT = {
  type sinkID = int
  val load : string -> int * int
  val unload : int -> ()
  val register : |AGENT_NOTIFY_SINK| -> sinkID
  val unregister : sinkID -> ()
  val getCharacter : int -> |AGENT_CHARACTER|
} with_iid A7B93C91-7B81-11D0-AC5F-00C04FD97575

component_sig AGENT_SERVER = {
  interface IAgent : I_AGENT
}
)";

struct CharRec {
    std::uint64_t token = 0;
    bool loaded = false;
    std::int64_t x = 0;
    std::int64_t y = 0;
};

struct AgentState {
    comrt::Runtime* runtime = nullptr;
    std::function<void(const std::string&)> trace;
    std::int64_t next_char = 1;
    std::int64_t next_req = 1;
    std::int64_t next_sink = 1;
    std::map<std::int64_t, CharRec> chars;

    void say(const std::string& line) {
        if (trace) trace(line);
    }
    CharRec& character(std::int64_t id) {
        auto it = chars.find(id);
        if (it == chars.end() || !it->second.loaded)
            throw RuntimeFault(errcode::unknown_character,
                               "no loaded character with id " + std::to_string(id));
        return it->second;
    }
};

rt::Value prim(std::string name, std::function<rt::Value(const rt::Value&)> fn) {
    return rt::Value{rt::PrimV{
        std::move(name),
        std::make_shared<std::function<rt::Value(const rt::Value&)>>(std::move(fn))}};
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

rt::Value make_character(const std::shared_ptr<AgentState>& state, std::int64_t id) {
    std::map<std::string, rt::Value> members;
    members["setPosition"] = prim("setPosition", [state, id](const rt::Value& v) {
        auto& args = rt::as<rt::TupleV>(v).elems;
        CharRec& rec = state->character(id);
        rec.x = rt::as<rt::IntV>(args[0]).v;
        rec.y = rt::as<rt::IntV>(args[1]).v;
        state->say("AGENT setPosition " + std::to_string(rec.x) + "," + std::to_string(rec.y) +
                   "\n");
        return rt::Value{rt::UnitV{}};
    });
    members["getPosition"] = prim("getPosition", [state, id](const rt::Value&) {
        CharRec& rec = state->character(id);
        rt::TupleV pos;
        pos.elems.push_back(rt::Value{rt::IntV{rec.x}});
        pos.elems.push_back(rt::Value{rt::IntV{rec.y}});
        return rt::Value{std::move(pos)};
    });
    members["play"] = prim("play", [state, id](const rt::Value& v) {
        state->character(id);
        state->say("AGENT play " + quoted(rt::as<rt::StringV>(v).v) + "\n");
        return rt::Value{rt::IntV{state->next_req++}};
    });
    members["stop"] = prim("stop", [state, id](const rt::Value& v) {
        state->character(id);
        state->say("AGENT stop " + std::to_string(rt::as<rt::IntV>(v).v) + "\n");
        return rt::Value{rt::UnitV{}};
    });
    members["show"] = prim("show", [state, id](const rt::Value& v) {
        state->character(id);
        state->say(std::string("AGENT show ") + (rt::as<rt::BoolV>(v).v ? "true" : "false") +
                   "\n");
        return rt::Value{rt::IntV{state->next_req++}};
    });
    members["speak"] = prim("speak", [state, id](const rt::Value& v) {
        auto& args = rt::as<rt::TupleV>(v).elems;
        state->character(id);
        state->say("AGENT speak " + quoted(rt::as<rt::StringV>(args[0]).v) + "\n");
        return rt::Value{rt::IntV{state->next_req++}};
    });

    comrt::InstanceSpec spec;
    spec.comp_sig = "AGENT_CHARACTER";
    spec.iid_resolving = true;
    spec.marshal_boundary = true;
    comrt::InterfaceSpec ifc;
    ifc.label = "IAgentCharacter";
    ifc.sig = *agent_stub_env()->find_interface("I_AGENT_CHARACTER");
    ifc.members = std::move(members);
    spec.interfaces.push_back(std::move(ifc));
    return state->runtime->create_instance(std::move(spec));
}

}  // namespace

sema::SigEnvPtr agent_stub_env() {
    static sema::SigEnvPtr env = [] {
        auto program = syntax::parse_source(stub_sig_source, "<ms-agent>");
        auto result = sema::elaborate_sigs(*program);
        if (!result.errors.empty())
            throw RuntimeFault(errcode::kernel,
                               "agent stub signatures failed to elaborate: " +
                                   result.errors.front().render());
        return sema::SigEnvPtr(result.env);
    }();
    return env;
}

ManifestEntry agent_stub_entry() {
    ManifestEntry e;
    e.clsid = *Guid::parse(agent_stub_clsid);
    e.kind = "builtin-stub";
    e.stub = agent_stub_id;
    e.sig = "AGENT_SERVER";
    e.interfaces.push_back({"I_AGENT", *Guid::parse(agent_iid)});
    return e;
}

rt::Value instantiate_stub(const std::string& stub_id, const StubHost& host) {
    if (!is_builtin_stub(stub_id))
        throw RuntimeFault(errcode::manifest, "unknown builtin stub '" + stub_id + "'");
    auto state = std::make_shared<AgentState>();
    state->runtime = host.runtime;
    state->trace = host.trace;

    std::map<std::string, rt::Value> members;
    members["load"] = prim("load", [state](const rt::Value& v) {
        const std::string& name = rt::as<rt::StringV>(v).v;
        state->say("AGENT load " + quoted(name) + "\n");
        std::int64_t id = state->next_char++;
        rt::Value inst = make_character(state, id);
        CharRec rec;
        rec.token = rt::as<rt::InstV>(inst).instance;
        rec.loaded = true;
        state->chars[id] = rec;
        rt::TupleV out;
        out.elems.push_back(rt::Value{rt::IntV{id}});
        out.elems.push_back(rt::Value{rt::IntV{state->next_req++}});
        return rt::Value{std::move(out)};
    });
    members["unload"] = prim("unload", [state](const rt::Value& v) {
        std::int64_t id = rt::as<rt::IntV>(v).v;
        CharRec& rec = state->character(id);
        state->say("AGENT unload " + std::to_string(id) + "\n");
        rec.loaded = false;
        // Drop the creation reference taken when load built the character;
        // a client that never unloads leaves it on the leak report.
        state->runtime->release(
            rt::Handle{state->runtime->session(), rec.token, "I_AGENT_CHARACTER"});
        return rt::Value{rt::UnitV{}};
    });
    members["register"] = prim("register", [state](const rt::Value&) {
        return rt::Value{rt::IntV{state->next_sink++}};
    });
    members["unregister"] = prim("unregister", [](const rt::Value&) {
        return rt::Value{rt::UnitV{}};
    });
    members["getCharacter"] = prim("getCharacter", [state](const rt::Value& v) {
        std::int64_t id = rt::as<rt::IntV>(v).v;
        CharRec& rec = state->character(id);
        return state->runtime->instance_value(rec.token);
    });

    comrt::InstanceSpec spec;
    spec.comp_sig = "AGENT_SERVER";
    spec.iid_resolving = true;
    spec.marshal_boundary = true;
    spec.payload = state;
    comrt::InterfaceSpec ifc;
    ifc.label = "IAgent";
    ifc.sig = *agent_stub_env()->find_interface("I_AGENT");
    ifc.members = std::move(members);
    spec.interfaces.push_back(std::move(ifc));
    return host.runtime->create_instance(std::move(spec));
}

}  // namespace comlang::interop
