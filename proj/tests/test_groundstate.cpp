#include <chrono>
#include <cmath>

#include "doctest.h"
#include "nlslab/groundstate.hpp"

using namespace nls;

TEST_SUITE("groundstate") {

TEST_CASE("cubic ground state is the sech profile") {
    Grid g(1, 2048, 40.0);
    auto cubic = Nonlinearity::cubic();
    RVec phi = solve_ground_state(cubic, 1.0, g, 1e-12);
    double err = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j)
        err = std::max(err, std::abs(phi[static_cast<long>(j)] - std::sqrt(2.0) / std::cosh(g.xs()[j])));
    CHECK(err <= 1e-8);
    CHECK(stationary_residual(cubic, 1.0, g, phi) <= 1e-12);
    // quadratic convergence from a perturbed start: log r_{k+1} / log r_k ~ 2
    RVec start = 1.05 * phi;
    NewtonStats st;
    solve_ground_state(cubic, 1.0, g, 1e-12, &start, &st);
    auto& r = st.residuals;
    REQUIRE(r.size() >= 3);
    std::size_t k = 1;
    while (k + 1 < r.size() && r[k + 1] > 1e-10) ++k;
    CHECK(std::log(r[k]) / std::log(r[k - 1]) > 1.6);

    RVec phi4 = solve_ground_state(cubic, 4.0, g, 1e-12);
    double err4 = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j)
        err4 = std::max(err4, std::abs(phi4[static_cast<long>(j)] - 2.0 * std::sqrt(2.0) / std::cosh(2.0 * g.xs()[j])));
    CHECK(err4 <= 1e-8);
    CHECK_THROWS_AS(solve_ground_state(cubic, 0.0, g), BranchNotFound);
    CHECK_THROWS_AS(solve_ground_state(Nonlinearity::polynomial({1.0}), 1.0, g), BranchNotFound);
}

TEST_CASE("cubic family: q, e, d and the d' = q identity") {
    Grid g(1, 2048, 40.0);
    auto fam = family_scan(Nonlinearity::cubic(), 0.5, 2.0, 7, g, 1e-11, false);
    for (const auto& s : fam.samples) {
        CHECK(std::abs(s.q - 4.0 * std::sqrt(s.omega)) <= 1e-6);
        CHECK(std::abs(s.dd - s.q) <= 1e-4 * s.q);
        // scaling law phi_w(x) = sqrt(w) phi_1(sqrt(w) x)
        double err = 0.0;
        for (std::size_t j = 0; j < g.n(); ++j) {
            double x = g.xs()[j], w = s.omega;
            err = std::max(err, std::abs(s.phi[static_cast<long>(j)] - std::sqrt(w) * std::sqrt(2.0) / std::cosh(std::sqrt(w) * x)));
        }
        CHECK(err <= 1e-8);
    }
    CHECK(fam.h4);
    auto one = ground_state_entry(Nonlinearity::cubic(), 1.0, g);
    CHECK(std::abs(one.dq - 2.0) <= 1e-4);
    // d_omega phi = sech(x) (1 - x tanh x) / sqrt 2 at omega = 1
    double derr = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) {
        double x = g.xs()[j];
        derr = std::max(derr, std::abs(one.dphi[static_cast<long>(j)] - (1.0 - x * std::tanh(x)) / (std::sqrt(2.0) * std::cosh(x))));
    }
    CHECK(derr <= 1e-9);
    CHECK(std::abs(one.e + 4.0 / 3.0) <= 1e-6);
    CHECK(std::abs(one.d - 8.0 / 3.0) <= 1e-6);
    CHECK(fam.interpolate_q(1.0) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("L+ and L- spectra, cubic d=1") {
    Grid g(1, 1024, 30.0);
    auto gs = ground_state_entry(Nonlinearity::cubic(), 1.0, g, 1e-11, 0.0);
    auto rep = check_lplus(gs, Nonlinearity::cubic(), g);
    CHECK(rep.n_negative == 1);
    CHECK(std::abs(rep.lowest + 3.0) <= 1e-4);
    CHECK(rep.kernel_dim_even == 0);
    CHECK(std::abs(rep.lminus_lowest) <= 1e-8);
    CHECK(rep.lminus_phi_residual <= 1e-8);
    CHECK(std::abs(rep.odd_lowest) <= 1e-7);
    CHECK(rep.odd_dphi_residual <= 1e-8);
}

TEST_CASE("radial cubic in three dimensions violates the slope condition") {
    Grid g(3, 1024, 40.0);
    auto cubic = Nonlinearity::cubic();
    auto fam = family_scan(cubic, 0.8, 1.2, 3, g, 1e-11, true);
    // q(w) ~ w^{-1/2} for the 3D cubic: q' < 0
    CHECK_FALSE(fam.h4);
    CHECK(fam.samples[1].dq < 0.0);
    CHECK(fam.samples[1].dq == doctest::Approx(-0.5 * fam.samples[1].q).epsilon(1e-3));
    CHECK(fam.lplus_negative_count[1] == 1);
}

}  // TEST_SUITE
