#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <functional>
#include <set>

#include "comlang/parser.hpp"
#include "comlang/sema.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace comlang;
using testutil::fixture;
using testutil::read_file;

static sema::TypedProgram check(const std::string& src) {
    return sema::check_program(syntax::parse_source(src, "test.cml"));
}

static CompileError check_fails(const std::string& src) {
    try {
        check(src);
    } catch (const CompileError& e) {
        return e;
    }
    throw std::runtime_error("program was expected to be rejected:\n" + src);
}

static std::shared_ptr<sema::SigEnv> elaborate(const std::string& src) {
    auto result = sema::elaborate_sigs(*syntax::parse_source(src, "test.cml"));
    REQUIRE(result.errors.empty());
    return result.env;
}

TEST_CASE("elaboration: fig2 signatures") {
    auto prog = syntax::parse_source(read_file(fixture("fig2.cml")), "fig2.cml");
    auto result = sema::elaborate_sigs(*prog);
    REQUIRE(result.errors.empty());
    auto& env = *result.env;

    auto* x = env.find_interface("X_SIG");
    REQUIRE(x != nullptr);
    CHECK(x->types.empty());
    REQUIRE(x->values.size() == 1);
    CHECK(x->values[0].first == "fooX");
    REQUIRE(sema::is<sema::TArrow>(x->values[0].second));
    CHECK_FALSE(x->iid.has_value());

    auto* foo = env.find_component("FOO_SIG");
    REQUIRE(foo != nullptr);
    REQUIRE(foo->interfaces.size() == 2);
    CHECK(foo->interfaces[0] == std::make_pair(std::string("X"), std::string("X_SIG")));
    CHECK(foo->interfaces[1] == std::make_pair(std::string("Y"), std::string("Y_SIG")));
}

TEST_CASE("elaboration: empty program, duplicate and unbound signatures") {
    auto empty = sema::elaborate_sigs(*syntax::parse_source("", "t"));
    CHECK(empty.errors.empty());
    CHECK(empty.env->interfaces.empty());
    CHECK(empty.env->components.empty());

    auto dup = sema::elaborate_sigs(*syntax::parse_source(
        "interface_sig S = { val a : int }\ninterface_sig S = { val b : int }\n", "t"));
    REQUIRE(dup.errors.size() == 1);
    CHECK(std::string(dup.errors[0].code()) == errcode::duplicate_signature);

    auto unbound = sema::elaborate_sigs(
        *syntax::parse_source("component_sig C = { interface Z : Z_SIG }\n", "t"));
    REQUIRE(unbound.errors.size() == 1);
    CHECK(std::string(unbound.errors[0].code()) == errcode::unbound_signature);

    // Interface and component signatures share a namespace.
    auto cross = sema::elaborate_sigs(*syntax::parse_source(
        "interface_sig S = { val a : int }\ncomponent_sig S = { interface A : S }\n", "t"));
    REQUIRE(cross.errors.size() == 1);
    CHECK(std::string(cross.errors[0].code()) == errcode::duplicate_signature);
}

TEST_CASE("elaboration: manifest type members are substituted into value types") {
    auto env = elaborate("interface_sig S = { type t = int val get : () -> t }\n");
    auto* s = env->find_interface("S");
    REQUIRE(s != nullptr);
    REQUIRE(s->types.size() == 1);
    REQUIRE(s->types[0].manifest.has_value());
    CHECK(sema::is<sema::TInt>(*s->types[0].manifest));
    auto& get = s->values[0].second;
    CHECK(sema::is<sema::TInt>(sema::as<sema::TArrow>(get).to));
}

TEST_CASE("elaboration: abstract type members get distinct stamps per elaboration") {
    const char* src = "interface_sig S = { type t val get : () -> t }\n";
    auto a = elaborate(src);
    auto b = elaborate(src);
    auto& ta = sema::as<sema::TArrow>(a->find_interface("S")->values[0].second).to;
    auto& tb = sema::as<sema::TArrow>(b->find_interface("S")->values[0].second).to;
    REQUIRE(sema::is<sema::TAbstract>(ta));
    REQUIRE(sema::is<sema::TAbstract>(tb));
    CHECK(sema::as<sema::TAbstract>(ta).stamp != sema::as<sema::TAbstract>(tb).stamp);
    CHECK(sema::type_equal(ta, ta));
    CHECK_FALSE(sema::type_equal(ta, tb));
}

// ---------------------------------------------------------------- matching

static const char* k_match_env =
    "interface_sig X_SIG = { val fooX : () -> () }\n"
    "interface_sig Y_SIG = { val fooY : () -> () }\n"
    "interface_sig XY_SIG = { val fooX : () -> () val fooY : () -> () }\n"
    "component_sig FOO_SIG = { interface X : X_SIG interface Y : Y_SIG }\n"
    "component_sig X_ONLY = { interface X : X_SIG }\n";

TEST_CASE("matching: width subtyping on interfaces") {
    auto env = elaborate(k_match_env);
    auto& x = *env->find_interface("X_SIG");
    auto& y = *env->find_interface("Y_SIG");
    auto& xy = *env->find_interface("XY_SIG");

    CHECK(sema::match_interface(x, x).ok);
    CHECK(sema::match_interface(xy, x).ok);   // extra members are fine
    CHECK_FALSE(sema::match_interface(x, xy).ok);  // missing fooY
    auto bad = sema::match_interface(x, y);
    CHECK_FALSE(bad.ok);
    CHECK(bad.describe().find("fooY") != std::string::npos);
}

TEST_CASE("matching: member types must agree exactly") {
    auto env = elaborate(
        "interface_sig A = { val f : int -> int }\n"
        "interface_sig B = { val f : int -> bool }\n");
    CHECK_FALSE(sema::match_interface(*env->find_interface("A"), *env->find_interface("B")).ok);
}

TEST_CASE("matching: abstract target admits any candidate representation") {
    auto env = elaborate(
        "interface_sig OPAQUE = { type t val zero : t val next : t -> t }\n"
        "interface_sig AS_INT = { type t = int val zero : t val next : t -> t }\n"
        "interface_sig AS_STR = { type t = string val zero : t val next : t -> t }\n"
        "interface_sig WRONG = { type t = int val zero : t val next : t -> bool }\n");
    CHECK(sema::match_interface(*env->find_interface("AS_INT"), *env->find_interface("OPAQUE")).ok);
    CHECK(sema::match_interface(*env->find_interface("AS_STR"), *env->find_interface("OPAQUE")).ok);
    // A manifest target does not match a differing manifest candidate...
    CHECK_FALSE(
        sema::match_interface(*env->find_interface("AS_STR"), *env->find_interface("AS_INT")).ok);
    // ...and structure under the identification still has to line up.
    CHECK_FALSE(
        sema::match_interface(*env->find_interface("WRONG"), *env->find_interface("OPAQUE")).ok);
    // An abstract candidate cannot satisfy a manifest target: that would
    // reveal a representation the candidate keeps hidden.
    CHECK_FALSE(
        sema::match_interface(*env->find_interface("OPAQUE"), *env->find_interface("AS_INT")).ok);
}

TEST_CASE("matching: component thinning") {
    auto env = elaborate(k_match_env);
    auto& foo = *env->find_component("FOO_SIG");
    auto& x_only = *env->find_component("X_ONLY");
    CHECK(sema::match_component(foo, *env, foo, *env).ok);
    CHECK(sema::match_component(foo, *env, x_only, *env).ok);
    auto widen = sema::match_component(x_only, *env, foo, *env);
    CHECK_FALSE(widen.ok);
    CHECK(widen.describe().find("Y") != std::string::npos);
}

TEST_CASE("matching: randomized reflexivity, thinning and transitivity") {
    std::mt19937_64 rng(7);
    const char* member_names[] = {"a", "b", "c", "d"};
    const char* member_types[] = {"int", "bool", "string", "int -> int", "() -> int * int"};

    auto gen_sig = [&](const std::string& name) {
        std::string src = "interface_sig " + name + " = {";
        bool any = false;
        for (int m = 0; m < 4; ++m)
            if (rng() % 2) {
                src += std::string(" val ") + member_names[m] + " : " + member_types[rng() % 5];
                any = true;
            }
        if (!any) src += std::string(" val ") + member_names[rng() % 4] + " : int";
        return src + " }\n";
    };

    for (int round = 0; round < 300; ++round) {
        auto env = elaborate(gen_sig("P") + gen_sig("Q") + gen_sig("R"));
        auto& p = *env->find_interface("P");
        auto& q = *env->find_interface("Q");
        auto& r = *env->find_interface("R");

        CHECK(sema::match_interface(p, p).ok);  // reflexive

        // Dropping members from a matching target preserves the match.
        if (sema::match_interface(p, q).ok && q.values.size() > 1) {
            sema::InterfaceSig thinner = q;
            thinner.values.erase(thinner.values.begin() + static_cast<long>(rng() % thinner.values.size()));
            CHECK(sema::match_interface(p, thinner).ok);
        }

        if (sema::match_interface(p, q).ok && sema::match_interface(q, r).ok)
            CHECK(sema::match_interface(p, r).ok);  // transitive
    }
}

// ------------------------------------------------------------- typechecking

TEST_CASE("typecheck: fig2 dot access types") {
    std::string src = read_file(fixture("fig2.cml")) +
                      "val Foo = FooComp ()\n"
                      "val FooX = Foo.X\n"
                      "val r = Foo.X.fooX ()\n";
    auto typed = check(src);

    auto& foo_x = ast::as<ast::DVal>(*typed.program->decls[5]);
    auto t = typed.expr_types.at(foo_x.expr.get());
    REQUIRE(sema::is<sema::TIfc>(t));
    CHECK(sema::as<sema::TIfc>(t).sig == "X_SIG");

    auto& r = ast::as<ast::DVal>(*typed.program->decls[6]);
    CHECK(sema::is<sema::TUnit>(typed.expr_types.at(r.expr.get())));

    auto& foo = ast::as<ast::DVal>(*typed.program->decls[4]);
    auto tf = typed.expr_types.at(foo.expr.get());
    REQUIRE(sema::is<sema::TComp>(tf));
    CHECK(sema::as<sema::TComp>(tf).sig == "FOO_SIG");
}

TEST_CASE("typecheck: component info is recorded") {
    auto typed = check(read_file(fixture("fig2.cml")));
    auto it = typed.components.find("FooComp");
    REQUIRE(it != typed.components.end());
    CHECK(it->second.decl != nullptr);
    CHECK(it->second.import_decl == nullptr);
    CHECK(it->second.params.empty());
    CHECK(it->second.sig == "FOO_SIG");
}

TEST_CASE("typecheck: interface polymorphism through structural matching") {
    std::string src =
        "interface_sig NARROW = { val fooX : () -> () }\n"
        "interface_sig X_SIG = { val fooX : () -> () val extra : int }\n"
        "component_sig FOO_SIG = { interface X : X_SIG }\n"
        "component FooComp () : FOO_SIG = {\n"
        "  interface X = { fun fooX () = () val extra = 3 }\n"
        "}\n"
        "fun use (h : ||NARROW||) = h.fooX ()\n"
        "val Foo = FooComp ()\n"
        "val r = use (Foo.X)\n";
    CHECK_NOTHROW(check(src));

    // The reverse direction must fail: NARROW lacks `extra`.
    std::string bad = src +
                      "fun wide (h : ||X_SIG||) = h.extra\n"
                      "fun narrow (h : ||NARROW||) = wide h\n";
    auto err = check_fails(bad);
    CHECK(std::string(err.code()) == errcode::type_mismatch);
}

TEST_CASE("typecheck: component values coerce by thinning") {
    std::string src =
        "interface_sig X_SIG = { val fooX : () -> () }\n"
        "interface_sig Y_SIG = { val fooY : () -> () }\n"
        "component_sig FOO_SIG = { interface X : X_SIG interface Y : Y_SIG }\n"
        "component_sig X_ONLY = { interface X : X_SIG }\n"
        "component FooComp () : FOO_SIG = {\n"
        "  interface X = { fun fooX () = () }\n"
        "  interface Y = { fun fooY () = () }\n"
        "}\n"
        "fun use (c : |X_ONLY|) = c.X.fooX ()\n"
        "val r = use (FooComp ())\n";
    CHECK_NOTHROW(check(src));

    // Thinning hides the interface: X_ONLY has no label Y.
    auto err = check_fails(src + "fun touch (c : |X_ONLY|) = c.Y.fooY ()\n");
    CHECK(std::string(err.code()) == errcode::no_such_interface);
}

static const char* k_peano =
    "interface_sig NAT_SIG = {\n"
    "  type nat\n"
    "  val zero : nat\n"
    "  val succ : nat -> nat\n"
    "  val isZero : nat -> bool\n"
    "  val toInt : nat -> int\n"
    "}\n"
    "component_sig PEANO_SIG = { interface N : NAT_SIG }\n"
    "component Peano () : PEANO_SIG = {\n"
    "  interface N = {\n"
    "    type nat = int\n"
    "    val zero = 0\n"
    "    fun succ n = n + 1\n"
    "    fun isZero n = n = 0\n"
    "    fun toInt n = n\n"
    "  }\n"
    "}\n"
    "val P = Peano ()\n";

TEST_CASE("typecheck: opaque ascription hides the representation") {
    // Working with the abstract type through its own operations is fine.
    CHECK_NOTHROW(check(std::string(k_peano) +
                        "val two = P.N.succ (P.N.succ (P.N.zero))\n"
                        "val n = P.N.toInt two\n"));

    struct Negative {
        const char* label;
        const char* extra;
        const char* expect_code;
    };
    const Negative negatives[] = {
        {"arithmetic on the abstract type", "val x = P.N.zero + 1\n", errcode::type_mismatch},
        {"int literal where nat expected", "val x = P.N.succ 3\n", errcode::type_mismatch},
        {"equality at the abstract type", "val b = P.N.zero = P.N.zero\n", errcode::type_mismatch},
        {"annotating nat as int", "val x : int = P.N.zero\n", errcode::type_mismatch},
        {"using nat as a list length", "val l = [P.N.zero, 1]\n", errcode::type_mismatch},
        {"passing nat to a string function", "val s = P.N.zero ^ \"!\"\n",
         errcode::type_mismatch},
    };
    for (auto& neg : negatives) {
        CAPTURE(neg.label);
        auto err = check_fails(std::string(k_peano) + neg.extra);
        CHECK(std::string(err.code()) == neg.expect_code);
    }
}

TEST_CASE("typecheck: abstract types from different signatures never mix") {
    std::string two = std::string(k_peano) +
                      "interface_sig ONAT_SIG = {\n"
                      "  type nat\n"
                      "  val zero : nat\n"
                      "  val succ : nat -> nat\n"
                      "}\n"
                      "component_sig OPEANO_SIG = { interface N : ONAT_SIG }\n"
                      "component OPeano () : OPEANO_SIG = {\n"
                      "  interface N = { type nat = int val zero = 0 fun succ n = n + 1 }\n"
                      "}\n"
                      "val Q = OPeano ()\n";
    auto err = check_fails(two + "val x = Q.N.succ (P.N.zero)\n");
    CHECK(std::string(err.code()) == errcode::type_mismatch);
}

TEST_CASE("typecheck: manifest twin of the opaque signature reveals everything") {
    std::string manifest =
        "interface_sig NAT_SIG = {\n"
        "  type nat = int\n"
        "  val zero : nat\n"
        "  val succ : nat -> nat\n"
        "}\n"
        "component_sig PEANO_SIG = { interface N : NAT_SIG }\n"
        "component Peano () : PEANO_SIG = {\n"
        "  interface N = { type nat = int val zero = 0 fun succ n = n + 1 }\n"
        "}\n"
        "val P = Peano ()\n";
    CHECK_NOTHROW(check(manifest + "val x = P.N.zero + 1\n"));
    CHECK_NOTHROW(check(manifest + "val x = P.N.succ 3\n"));
    CHECK_NOTHROW(check(manifest + "val x : int = P.N.zero\n"));
}

TEST_CASE("typecheck: ifc_case narrows the scrutinee binding") {
    std::string src =
        "interface_sig A = { val n : int }\n"
        "interface_sig B = { val s : string }\n"
        "component_sig CA = { interface A : A }\n"
        "component Ca () : CA = { interface A = { val n = 1 } }\n"
        "val inst = instanceOf ((Ca ()).A)\n"
        "val r = ifc_case inst of A => inst.A.n | B => 0 else => 0\n";
    CHECK_NOTHROW(check(src));

    // Outside the arm the dynamic instance exposes nothing.
    auto err = check_fails(
        "interface_sig A = { val n : int }\n"
        "component_sig CA = { interface A : A }\n"
        "component Ca () : CA = { interface A = { val n = 1 } }\n"
        "val inst = instanceOf ((Ca ()).A)\n"
        "val r = inst.A.n\n");
    CHECK(std::string(err.code()) == errcode::type_mismatch);

    // instanceOf applies to interface values only.
    auto err2 = check_fails("val x = instanceOf 3\n");
    CHECK(std::string(err2.code()) == errcode::type_mismatch);
}

TEST_CASE("typecheck: imports require IIDs on every interface") {
    std::string no_iid =
        "interface_sig X_SIG = { val fooX : () -> () }\n"
        "component_sig FOO_SIG = { interface X : X_SIG }\n"
        "import Foo : FOO_SIG = clsid BBBB0001-0000-4000-8000-00C04FD97575\n";
    auto err = check_fails(no_iid);
    CHECK(std::string(err.code()) == errcode::type_mismatch);
    CHECK(err.render().find("IID") != std::string::npos);

    std::string with_iid =
        "interface_sig X_SIG = { val fooX : () -> () } with_iid "
        "AAAA0001-0000-4000-8000-00C04FD97575\n"
        "component_sig FOO_SIG = { interface X : X_SIG }\n"
        "import Foo : FOO_SIG = clsid BBBB0001-0000-4000-8000-00C04FD97575\n";
    CHECK_NOTHROW(check(with_iid));
}

TEST_CASE("typecheck: export requires a matching nullary component") {
    std::string base =
        "interface_sig X_SIG = { val fooX : () -> () } with_iid "
        "AAAA0001-0000-4000-8000-00C04FD97575\n"
        "component_sig FOO_SIG = { interface X : X_SIG }\n";
    std::string comp =
        "component FooComp () : FOO_SIG = { interface X = { fun fooX () = () } }\n";
    CHECK_NOTHROW(check(base + comp +
                        "export FooComp : FOO_SIG with_clsid "
                        "BBBB0001-0000-4000-8000-00C04FD97575\n"));

    auto err = check_fails(base +
                           "component FooComp (val n : int) : FOO_SIG = { interface X = { fun "
                           "fooX () = () } }\n"
                           "export FooComp : FOO_SIG with_clsid "
                           "BBBB0001-0000-4000-8000-00C04FD97575\n");
    CHECK(std::string(err.code()) == errcode::not_exportable);
}

// --------------------------------------------------------- expressibility

TEST_CASE("expressibility: spot checks") {
    CHECK(sema::idl_expressible_type(sema::t_int()));
    CHECK(sema::idl_expressible_type(sema::t_string()));
    CHECK(sema::idl_expressible_type(sema::t_ifc("S")));
    CHECK(sema::idl_expressible_type(sema::t_comp("S")));
    CHECK(sema::idl_expressible_type(
        sema::t_list(sema::t_record({{"a", sema::t_int()}, {"b", sema::t_string()}}))));

    CHECK_FALSE(sema::idl_expressible_type(sema::t_unit()));
    CHECK_FALSE(sema::idl_expressible_type(sema::t_tuple({sema::t_int(), sema::t_int()})));
    CHECK_FALSE(sema::idl_expressible_type(sema::t_arrow(sema::t_int(), sema::t_int())));
    CHECK_FALSE(sema::idl_expressible_type(sema::t_abstract("S", "t", sema::fresh_stamp())));
    CHECK_FALSE(sema::idl_expressible_type(sema::t_list(sema::t_unit())));
    CHECK_FALSE(
        sema::idl_expressible_type(sema::t_record({{"a", sema::t_arrow(sema::t_int(), sema::t_int())}})));
}

TEST_CASE("expressibility: interface rule admits tuples in method positions") {
    auto env = elaborate(
        "interface_sig OK2 = { val x : int }\n"
        "component_sig OKC = { interface A : OK2 }\n"
        "interface_sig OK = {\n"
        "  val scalar : int\n"
        "  val pair : int * string -> bool\n"
        "  val multi : () -> int * int\n"
        "  val handles : ||OK2|| -> |OKC|\n"
        "}\n"
        "interface_sig BAD_HOF = { val f : (int -> int) -> int }\n"
        "interface_sig BAD_ABSTRACT = { type t val get : () -> t }\n"
        "interface_sig BAD_NESTED_TUPLE = { val f : (int * int) * int -> int }\n");
    CHECK(sema::idl_expressible_interface(*env->find_interface("OK")).ok);
    CHECK(sema::idl_expressible_interface(*env->find_interface("OK2")).ok);

    auto hof = sema::idl_expressible_interface(*env->find_interface("BAD_HOF"));
    CHECK_FALSE(hof.ok);
    REQUIRE_FALSE(hof.violations.empty());
    CHECK(hof.violations[0].find("f") != std::string::npos);

    CHECK_FALSE(sema::idl_expressible_interface(*env->find_interface("BAD_ABSTRACT")).ok);
    CHECK_FALSE(sema::idl_expressible_interface(*env->find_interface("BAD_NESTED_TUPLE")).ok);
}

TEST_CASE("expressibility: check_exportable") {
    std::string base =
        "interface_sig X_SIG = { val fooX : () -> () } with_iid "
        "AAAA0001-0000-4000-8000-00C04FD97575\n"
        "interface_sig NO_IID = { val f : () -> () }\n"
        "component_sig GOOD = { interface X : X_SIG }\n"
        "component_sig MISSING_IID = { interface X : NO_IID }\n"
        "component C () : GOOD = { interface X = { fun fooX () = () } }\n"
        "component D () : MISSING_IID = { interface X = { fun fooX () = () fun f () = () } }\n"
        "component P (val n : int) : GOOD = { interface X = { fun fooX () = () } }\n";
    auto typed = check(base);
    CHECK(sema::check_exportable(typed, "C", "GOOD").ok);

    auto no_iid = sema::check_exportable(typed, "D", "MISSING_IID");
    CHECK_FALSE(no_iid.ok);
    CHECK(no_iid.violations[0].find("IID") != std::string::npos);

    auto param = sema::check_exportable(typed, "P", "GOOD");
    CHECK_FALSE(param.ok);
    CHECK(param.violations[0].find("nullary") != std::string::npos);

    CHECK_FALSE(sema::check_exportable(typed, "Nsuch", "GOOD").ok);
}

// Brute-force oracle: enumerate every type term up to depth 3 over a small
// alphabet and evaluate the expressibility definition by direct structural
// recursion, independently of the implementation.

namespace {

bool oracle(const sema::Type& t, std::set<std::string> datas_seen = {}) {
    using namespace sema;
    if (is<TInt>(t) || is<TBool>(t) || is<TReal>(t) || is<TString>(t)) return true;
    if (is<TIfc>(t) || is<TComp>(t)) return true;
    if (is<TRecord>(t)) {
        for (auto& [k, f] : as<TRecord>(t).fields) {
            (void)k;
            if (!oracle(f, datas_seen)) return false;
        }
        return true;
    }
    if (is<TList>(t)) return oracle(as<TList>(t).elem, datas_seen);
    if (is<TData>(t)) {
        // Datatypes are nominal, so a nested occurrence of an already-visited
        // name is a recursive reference, which terminates the recursion.
        if (datas_seen.count(as<TData>(t).name)) return true;
        datas_seen.insert(as<TData>(t).name);
        for (auto& [c, arg] : as<TData>(t).ctors) {
            (void)c;
            if (arg && !oracle(arg, datas_seen)) return false;
        }
        return true;
    }
    return false;  // arrow, tuple, unit, abstract, dynamic instance
}

// Atoms sit at depth 1; each level wraps every combination of the smaller
// terms in every constructor, so levels == 2 yields all terms up to depth 3.
std::vector<sema::Type> enumerate_types(int levels) {
    using namespace sema;
    std::vector<Type> atoms = {t_int(),      t_string(),  t_unit(),
                               t_ifc("I"),   t_comp("C"), t_abstract("S", "t", fresh_stamp()),
                               t_dyn_inst()};
    if (levels == 0) return atoms;
    auto smaller = enumerate_types(levels - 1);
    std::vector<Type> out = smaller;
    for (auto& a : smaller) {
        out.push_back(t_list(a));
        out.push_back(t_record({{"a", a}}));
        out.push_back(t_data("D", {{"K", a}}));
        out.push_back(t_data("E", {{"K", a}, {"None", nullptr}}));
        for (auto& b : smaller) {
            out.push_back(t_tuple({a, b}));
            out.push_back(t_arrow(a, b));
            out.push_back(t_record({{"a", a}, {"b", b}}));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("expressibility: agrees with the brute-force oracle on >= 10000 terms") {
    auto terms = enumerate_types(2);
    CHECK(terms.size() >= 10000);
    size_t disagreements = 0;
    for (auto& t : terms)
        if (sema::idl_expressible_type(t) != oracle(t)) {
            ++disagreements;
            if (disagreements <= 5) FAIL_CHECK("disagreement on " << sema::show_type(t));
        }
    CHECK(disagreements == 0);
}

TEST_CASE("typecheck: general negatives") {
    struct Case {
        const char* src;
        const char* code;
    };
    const Case cases[] = {
        {"val x = 1 + true\n", errcode::type_mismatch},
        {"val x = y\n", errcode::unbound_variable},
        {"val x = if 1 then 2 else 3\n", errcode::type_mismatch},
        {"val x = if true then 2 else \"s\"\n", errcode::type_mismatch},
        {"val f = fn x => x x\n", errcode::type_mismatch},
        {"val x = hd 3\n", errcode::type_mismatch},
        {"val x = (1, 2).bogus\n", errcode::type_mismatch},
        {"val x = { a = 1 }.b\n", errcode::no_such_member},
        {"fun f (x : int) = x + 1 val y = f true\n", errcode::type_mismatch},
        {"fun f x = x + 1\n", errcode::type_mismatch},  // parameter type undetermined
        {"val x = [1, true]\n", errcode::type_mismatch},
        {"val x = 1.0 = 1.0\n", errcode::type_mismatch},  // reals admit no equality
        {"val x = (fn y => y) = (fn y => y)\n", errcode::type_mismatch},
    };
    for (auto& c : cases) {
        CAPTURE(c.src);
        auto err = check_fails(c.src);
        CHECK(std::string(err.code()) == c.code);
    }
}

TEST_CASE("typecheck: recursion and clause funs") {
    // Recursion needs the result annotation so the name is bound in the body.
    CHECK_NOTHROW(check("fun fact (n : int) : int = if n = 0 then 1 else n * fact (n - 1)\n"
                        "val x = fact 5\n"));
    CHECK_NOTHROW(
        check("fun len (l : int list) : int = if null l then 0 else 1 + len (tl l)\n"));
    // Literal patterns determine the parameter type; after the first clause
    // fixes the result, later clauses may recurse.
    CHECK_NOTHROW(check("fun fib 0 = 0 | fib 1 = 1 | fib n = fib (n - 1) + fib (n - 2)\n"));
    auto err = check_fails("fun f (n : int) = if n = 0 then 1 else f (n - 1)\n");
    CHECK(std::string(err.code()) == errcode::type_mismatch);
    CHECK(err.render().find("result annotation") != std::string::npos);
}
