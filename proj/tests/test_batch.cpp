#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gpacforge/batch.hpp"
#include "gpacforge/solver.hpp"

using namespace gpacforge;

TEST_CASE("parallel batch is bit-identical to the serial reference") {
    Pivp s;
    s.dim = 2;
    s.rhs = {MultiPoly::variable(2, 2), -MultiPoly::variable(2, 1)};
    s.init_point = Pivp::PointInit{{Rational(0), Rational(1)}};
    IntegrationConfig cfg;
    cfg.local_tol_log2 = -50;
    auto run = [&](int i) {
        std::vector<Rational> y0{Rational(i, 9), Rational(1)};
        Trajectory tr = integrate(s, y0, Rational(12), cfg);
        return tr.back().y[0].str() + "|" + tr.back().y[1].str() + "|" + tr.back().len.str();
    };
    std::vector<int> inputs;
    for (int i = 0; i < 24; ++i) inputs.push_back(i);
    auto serial = batch::map(inputs, false, run);
    auto parallel = batch::map(inputs, true, run);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("indexed runner covers every slot exactly once") {
    std::vector<int> hits(257, 0);
    batch::run_indexed(hits.size(), true, [&](size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
}
