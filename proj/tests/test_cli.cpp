// Drives the installed binary end to end: file formats, exit codes and
// byte-level determinism. The binary path arrives as argv[1] via ctest.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gpacforge/io.hpp"
#include "gpacforge/tm.hpp"

namespace {
std::string g_bin;

int run(const std::string& args) {
    std::string cmd = g_bin + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

using namespace gpacforge;

TEST_CASE("compile-tm emits a parsable description with the documented dimension") {
    save_json_file("succ.json", tm::machine_to_json(tm::binary_successor()));
    REQUIRE(run("compile-tm succ.json --emit compiled.json") == 0);
    Json j = load_json_file("compiled.json");
    CHECK(j["kind"] == "tm-iteration");
    CHECK(j["dimension"].get<int>() == 13);
    tm::Machine round = tm::machine_from_json(j["machine"]);
    CHECK(round.states == 5);
    // the exported clock gate is itself a valid PIVP
    Pivp clock = pivp_from_json(j["clock_export"]);
    CHECK(clock.dim >= 3);
}

TEST_CASE("malformed delta row fails with a usage exit code") {
    Json j = tm::machine_to_json(tm::binary_successor());
    j["delta"].erase(3);
    save_json_file("broken.json", j);
    CHECK(run("compile-tm broken.json --emit x.json") == 1);
}

TEST_CASE("simulate: final row near e, deterministic bytes, blowup exit code") {
    // y' = y from 1
    Pivp p;
    p.dim = 1;
    p.rhs = {MultiPoly::variable(1, 1)};
    p.init_point = Pivp::PointInit{{Rational(1)}};
    save_json_file("exp.json", pivp_to_json(p));
    REQUIRE(run("simulate exp.json --t 1 --local-tol -70 --out run1") == 0);
    REQUIRE(run("simulate exp.json --t 1 --local-tol -70 --out run2") == 0);
    CHECK(slurp("run1.csv") == slurp("run2.csv"));
    std::string csv = slurp("run1.csv");
    CHECK(csv.rfind("t,y1,len,pslen", 0) == 0);
    auto last = csv.find_last_of('\n', csv.size() - 2);
    std::string final_row = csv.substr(last + 1);
    CHECK(final_row.find("2.71828182845904523") != std::string::npos);
    Json sidecar = load_json_file("run1.json");
    CHECK(sidecar["stop_reason"] == "TimeReached");

    // length-budget stop lands just past the target on the unit-speed line
    Pivp u;
    u.dim = 1;
    u.rhs = {MultiPoly::constant(1, Rational(1))};
    u.init_point = Pivp::PointInit{{Rational(0)}};
    save_json_file("unit.json", pivp_to_json(u));
    REQUIRE(run("simulate unit.json --length 5 --out run3") == 0);
    Json side3 = load_json_file("run3.json");
    CHECK(side3["stop_reason"] == "LengthBudgetHit");

    // tan-style blowup: exit code 2
    Pivp b;
    b.dim = 1;
    MultiPoly q(1);
    q.add_term({0}, Rational(1));
    q.add_term({2}, Rational(1));
    b.rhs = {q};
    b.init_point = Pivp::PointInit{{Rational(0)}};
    save_json_file("blow.json", pivp_to_json(b));
    CHECK(run("simulate blow.json --t 2 --out run4") == 2);
}

TEST_CASE("machine JSON round-trips byte-for-byte through the library") {
    Json a = tm::machine_to_json(tm::parity_checker());
    Json b = tm::machine_to_json(tm::machine_from_json(a));
    CHECK(a == b);
}

int main(int argc, char** argv) {
    if (argc > 1) g_bin = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
