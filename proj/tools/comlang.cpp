#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "comlang/eval.hpp"
#include "comlang/interop.hpp"
#include "comlang/parser.hpp"
#include "comlang/sema.hpp"

namespace {

using namespace comlang;

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

std::string resolve_registry(const std::string& flag) {
    return flag.empty() ? "registry.json" : flag;
}

int cmd_check(const std::string& file) {
    auto text = read_file(file);
    if (!text) {
        std::cerr << "cannot read " << file << "\n";
        return 2;
    }
    try {
        sema::check_program(syntax::parse_source(*text, file));
    } catch (const CompileError& e) {
        std::cerr << e.render() << "\n";
        return 1;
    }
    return 0;
}

int cmd_run(const std::string& file, const std::string& registry, bool force, bool trace_rc) {
    auto text = read_file(file);
    if (!text) {
        std::cerr << "cannot read " << file << "\n";
        return 2;
    }
    sema::TypedProgram typed;
    try {
        typed = sema::check_program(syntax::parse_source(*text, file));
    } catch (const CompileError& e) {
        std::cerr << e.render() << "\n";
        return 1;
    }
    eval::Options opts;
    opts.registry_path = resolve_registry(registry);
    opts.force_export = force;
    opts.on_output = [](const std::string& s) { std::cout << s << std::flush; };
    if (trace_rc) opts.trace_rc = [](const std::string& s) { std::cerr << s; };
    eval::RunResult result = eval::run_program(std::move(typed), std::move(opts));
    for (auto& line : result.leaks) std::cerr << line << "\n";
    if (result.fault) {
        std::cerr << result.fault->render() << "\n";
        return 3;
    }
    if (!result.leaks.empty()) return 4;
    return 0;
}

int cmd_emit_idl(const std::string& file, const std::string& sig) {
    auto text = read_file(file);
    if (!text) {
        std::cerr << "cannot read " << file << "\n";
        return 2;
    }
    try {
        auto program = syntax::parse_source(*text, file);
        auto elaborated = sema::elaborate_sigs(*program);
        if (!elaborated.errors.empty()) {
            std::cerr << elaborated.errors.front().render() << "\n";
            return 1;
        }
        const sema::SigEnv& env = *elaborated.env;
        if (const sema::ComponentSig* comp = env.find_component(sig)) {
            std::cout << interop::emit_idl(*comp, env);
            return 0;
        }
        if (const sema::InterfaceSig* ifc = env.find_interface(sig)) {
            std::cout << interop::emit_idl_interface(*ifc);
            return 0;
        }
        std::cerr << file << ": no signature named '" << sig << "'\n";
        return 1;
    } catch (const CompileError& e) {
        std::cerr << e.render() << "\n";
        return 1;
    }
}

int cmd_export(const std::string& file, const std::string& registry, bool force) {
    auto text = read_file(file);
    if (!text) {
        std::cerr << "cannot read " << file << "\n";
        return 2;
    }
    sema::TypedProgram typed;
    try {
        typed = sema::check_program(syntax::parse_source(*text, file));
    } catch (const CompileError& e) {
        std::cerr << e.render() << "\n";
        return 1;
    }
    if (typed.exports.empty()) {
        std::cerr << file << ": no export declarations\n";
        return 1;
    }
    std::string path = resolve_registry(registry);
    try {
        interop::Manifest manifest = interop::load_manifest_or_empty(path);
        for (const ast::DExport* exp : typed.exports) {
            interop::ManifestEntry entry;
            entry.clsid = exp->clsid;
            entry.kind = "source-backed";
            std::error_code ec;
            auto resolved = std::filesystem::weakly_canonical(file, ec);
            entry.source = ec ? file : resolved.string();
            entry.component = exp->component;
            entry.sig = exp->sig;
            const sema::ComponentSig* csig = typed.sigs->find_component(exp->sig);
            for (auto& [label, sig_name] : csig->interfaces) {
                (void)label;
                const sema::InterfaceSig* isig = typed.sigs->find_interface(sig_name);
                entry.interfaces.push_back({sig_name, *isig->iid});
            }
            interop::add_entry(manifest, std::move(entry), force);
            std::cerr << "registered " << exp->clsid.str() << " -> " << exp->component << " : "
                      << exp->sig << "\n";
        }
        interop::save_manifest(manifest, path);
    } catch (const RuntimeFault& f) {
        std::cerr << f.render() << "\n";
        return f.code() == errcode::manifest ? 2 : 1;
    }
    return 0;
}

int cmd_registry_list(const std::string& registry) {
    try {
        interop::Manifest m = interop::load_manifest_or_empty(resolve_registry(registry));
        for (auto& e : m.entries)
            std::cout << e.clsid.str() << "  " << e.kind << "  " << e.sig << "\n";
    } catch (const RuntimeFault& f) {
        std::cerr << f.render() << "\n";
        return 2;
    }
    return 0;
}

int cmd_registry_remove(const std::string& clsid_text, const std::string& registry) {
    auto clsid = Guid::parse(clsid_text);
    if (!clsid) {
        std::cerr << "not a CLSID: " << clsid_text << "\n";
        return 1;
    }
    std::string path = resolve_registry(registry);
    try {
        interop::Manifest m = interop::load_manifest_or_empty(path);
        if (!interop::remove_entry(m, *clsid)) {
            std::cerr << "no registry entry for " << clsid->str() << "\n";
            return 1;
        }
        interop::save_manifest(m, path);
    } catch (const RuntimeFault& f) {
        std::cerr << f.render() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interpreter and component registry for .cml programs"};
    app.require_subcommand(1);
    int exit_code = 0;

    std::string check_file;
    auto* check = app.add_subcommand("check", "parse and typecheck a program");
    check->add_option("file", check_file, "program file")->required();
    check->callback([&] { exit_code = cmd_check(check_file); });

    std::string run_file, run_registry;
    bool run_force = false, run_trace_rc = false;
    auto* run = app.add_subcommand("run", "typecheck and run a program");
    run->add_option("file", run_file, "program file")->required();
    run->add_option("--registry", run_registry, "component registry file")
        ->envname("COMLANG_REGISTRY");
    run->add_flag("--force", run_force, "let export declarations replace registered CLSIDs");
    run->add_flag("--trace-rc", run_trace_rc, "print kernel refcount events to stderr");
    run->callback([&] { exit_code = cmd_run(run_file, run_registry, run_force, run_trace_rc); });

    std::string idl_file, idl_sig;
    auto* idl = app.add_subcommand("emit-idl", "print the IDL for a signature");
    idl->add_option("file", idl_file, "program file")->required();
    idl->add_option("--sig", idl_sig, "component or interface signature name")->required();
    idl->callback([&] { exit_code = cmd_emit_idl(idl_file, idl_sig); });

    std::string export_file, export_registry;
    bool export_force = false;
    auto* exp = app.add_subcommand("export", "register a program's export declarations");
    exp->add_option("file", export_file, "program file")->required();
    exp->add_option("--registry", export_registry, "component registry file")
        ->envname("COMLANG_REGISTRY");
    exp->add_flag("--force", export_force, "replace a differing registered entry");
    exp->callback([&] { exit_code = cmd_export(export_file, export_registry, export_force); });

    std::string list_registry;
    auto* list = app.add_subcommand("registry-list", "list registered components");
    list->add_option("--registry", list_registry, "component registry file")
        ->envname("COMLANG_REGISTRY");
    list->callback([&] { exit_code = cmd_registry_list(list_registry); });

    std::string remove_clsid, remove_registry;
    auto* remove = app.add_subcommand("registry-remove", "remove a registered component");
    remove->add_option("clsid", remove_clsid, "CLSID to remove")->required();
    remove->add_option("--registry", remove_registry, "component registry file")
        ->envname("COMLANG_REGISTRY");
    remove->callback([&] { exit_code = cmd_registry_remove(remove_clsid, remove_registry); });

    std::uint64_t seed = 0;
    auto* gn = app.add_subcommand("guid-new", "print a fresh GUID");
    auto* seed_opt = gn->add_option("--seed", seed, "derive the GUID from a seed");
    gn->callback([&] {
        comlang::Guid g = *seed_opt ? comlang::Guid::from_seed(seed) : comlang::Guid::random();
        std::cout << g.str() << "\n";
    });

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
