#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "nlslab/spectrum.hpp"

using namespace nls;

TEST_SUITE("spectrum") {

TEST_CASE("cubic soliton has no internal modes") {
    Grid g(1, 512, 30.0);
    auto cubic = Nonlinearity::cubic();
    auto gs = ground_state_entry(cubic, 1.0, g);
    auto H = LinearizedOperator::assemble(gs, cubic, g);
    auto s = discrete_spectrum(H);
    CHECK(s.m() == 0);
    CHECK(dense_spectrum(H).m() == 0);
    HypothesisOptions opt;
    opt.scan_embedded = false;
    auto rep = check_hypotheses(s, H, opt);
    CHECK(std::isinf(rep.h7.witness));
    CHECK(std::isinf(rep.h8.witness));
    CHECK(rep.h7.holds);
    CHECK(rep.h8.holds);
    CHECK(rep.h4.holds);
    auto j = nlohmann::json::parse(report_json(rep));
    CHECK(j["H7"]["witness"] == "inf");
}

TEST_CASE("focusing cubic-quintic soliton has one internal mode") {
    auto beta = Nonlinearity::polynomial({-1.0, -3.0});
    Grid g(1, 512, 30.0);
    auto gs = ground_state_entry(beta, 1.0, g);
    auto H = LinearizedOperator::assemble(gs, beta, g);
    auto s = discrete_spectrum(H);
    auto d = dense_spectrum(H);
    REQUIRE(s.m() == 1);
    REQUIRE(d.m() == 1);
    // dense brute-force eigensolve at n = 512
    CHECK(std::abs(d.modes[0].lambda - 0.7996769368) <= 1e-8);
    CHECK(std::abs(s.modes[0].lambda - d.modes[0].lambda) <= 1e-8);
    CHECK(s.N[0] == 1);
    CHECK(s.modes[0].lambda > 0.0);
    CHECK(s.modes[0].lambda < 1.0);
    CHECK(s.imag_parts[0] <= 1e-8);
    CHECK(s.modes[0].xi.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(mirror_residual(H, s.modes[0]) <= 1e-6);
    RMat B = biorthogonality(H, s);
    CHECK(std::abs(B(0, 0) - 1.0) <= 1e-6);

    // refinement robustness
    Grid g2(1, 1024, 30.0);
    auto gs2 = ground_state_entry(beta, 1.0, g2);
    auto H2 = LinearizedOperator::assemble(gs2, beta, g2);
    auto s2 = discrete_spectrum(H2);
    REQUIRE(s2.m() == 1);
    CHECK(std::abs(s2.modes[0].lambda - s.modes[0].lambda) <= 1e-4);

    HypothesisOptions opt;
    opt.embedded_shifts = 4;
    auto rep = check_hypotheses(s, H, opt, &H2, &s2);
    CHECK(rep.max_order == 5);
    CHECK(rep.h6.holds);
    CHECK(rep.h7.holds);
    CHECK(rep.h8.holds);
    CHECK(rep.h8.witness == doctest::Approx(s.modes[0].lambda));
    CHECK(rep.h9.holds);
    CHECK(rep.grid_drift <= 1e-4);
}

TEST_CASE("resonance arithmetic") {
    CHECK(threshold_order(0.4, 1.0) == 2);
    CHECK(threshold_order(0.8, 1.0) == 1);
    CHECK(threshold_order(0.5, 1.0) == 0);
    Grid g(1, 64, 10.0);
    auto H = LinearizedOperator::free(g, 1.0);
    DiscreteSpectrum s;
    s.omega = 1.0;
    s.modes.push_back({0.4, CVec::Zero(128)});
    s.N.push_back(threshold_order(0.4, 1.0));
    HypothesisOptions opt;
    opt.scan_embedded = false;
    auto rep = check_hypotheses(s, H, opt);
    CHECK(rep.max_order == 7);
    CHECK(rep.h8.witness == doctest::Approx(0.4));
    // 2*0.4 and 3*0.4 straddle 1
    CHECK(rep.h7.witness == doctest::Approx(0.2));
    CHECK(rep.h6.witness == doctest::Approx(0.2));
    s.modes[0].lambda = 0.25;
    s.N[0] = threshold_order(0.25, 1.0);
    auto bad = check_hypotheses(s, H, opt);
    CHECK_FALSE(bad.h6.holds);
    CHECK_FALSE(bad.h7.holds);
}

}
