#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "nlslab/groundstate.hpp"
#include "nlslab/modulation.hpp"
#include "nlslab/simulate.hpp"

using namespace nls;

namespace {

const Nonlinearity kCubic = Nonlinearity::polynomial({-1.0});

SimConfig soliton_run(const Grid& g, double T, double dt, double v = 0.0, double D = 0.0) {
    SimConfig c;
    c.grid = g;
    c.beta = kCubic;
    c.dt = dt;
    c.T_final = T;
    c.ic.omega = 1.0;
    c.ic.v = v;
    c.ic.D = D;
    c.sample_every = 1.0;
    c.snapshot_stride = 1000000;
    return c;
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("free plane wave is advanced exactly") {
    Grid g(1, 256, 10.0);
    const double k = 2.0 * kPi * 7.0 / 20.0, t = 3.7;
    CVec u(256);
    for (long j = 0; j < 256; ++j) u[j] = std::exp(kI * k * g.x(j));
    CVec w = u;
    for (int s = 0; s < 37; ++s) w = step(g, w, 0.1, Nonlinearity::zero());
    double err = 0.0;
    for (long j = 0; j < 256; ++j) err = std::max(err, std::abs(w[j] - u[j] * std::exp(-kI * k * k * t)));
    CHECK(err <= 1e-12);
}

TEST_CASE("standing soliton keeps its profile") {
    Grid g(1, 1024, 20.0);
    auto c = soliton_run(g, 50.0, 1e-3);
    c.snapshot_stride = 10;
    auto tr = run(c);
    REQUIRE_FALSE(tr.aborted);
    RVec phi = ground_state_entry(kCubic, 1.0, g).phi;
    double err = 0.0;
    for (const auto& s : tr.snapshots) err = std::max(err, (s.u.cwiseAbs() - phi).cwiseAbs().maxCoeff());
    CHECK(err <= 1e-6);
    // Q and Pi are invariants of both substeps
    const auto& c0 = tr.conserved.front();
    for (const auto& ci : tr.conserved) {
        CHECK(std::abs(ci.Q - c0.Q) <= 1e-10 * c0.Q);
        CHECK(std::abs(ci.Pi[0] - c0.Pi[0]) <= 1e-10);
    }
}

TEST_CASE("boosted soliton travels at v") {
    Grid g(1, 2048, 40.0);
    const double v = 0.6, D0 = -15.0;
    auto c = soliton_run(g, 50.0, 1e-3, v, D0);
    c.sample_every = 5.0;
    c.snapshot_stride = 1;
    auto tr = run(c);
    SolitonManifold M(kCubic, g, 0);
    ModulationParams p{1.0, 0.0, D0, v};
    double worst = 0.0, t_prev = 0.0;
    for (const auto& s : tr.snapshots) {
        // predicted frame: D' = v, theta' = omega + v^2/4
        p.D += v * (s.time - t_prev);
        p.theta += (p.omega + 0.25 * v * v) * (s.time - t_prev);
        t_prev = s.time;
        auto st = fit_modulation(s, p, M);
        p = st.p;
        worst = std::max(worst, std::abs(st.p.D - (D0 + v * s.time)));
    }
    CHECK(worst <= 2.0 * g.h());
}

TEST_CASE("zero data and abort on overflow") {
    Grid g(1, 128, 10.0);
    SimConfig c;
    c.grid = g;
    c.beta = kCubic;
    c.ic.soliton = false;
    c.T_final = 1.0;
    c.dt = 1e-2;
    auto tr = run(c);
    for (const auto& s : tr.snapshots) CHECK(s.u.norm() == 0.0);
    for (const auto& q : tr.conserved) CHECK(q.Q == 0.0);
    for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);

    c.ic.packets.push_back({cplx(1e160), 0.0, 1.0, 0.0});
    auto bad = run(c);
    CHECK(bad.aborted);
    REQUIRE_FALSE(bad.snapshots.empty());
    CHECK(bad.snapshots.back().u.allFinite());
}

TEST_CASE("conservation and second-order energy drift") {
    Grid g(1, 1024, 20.0);
    auto drift = [&](double dt, double T) {
        auto c = soliton_run(g, T, dt, 0.3);
        c.ic.packets.push_back({cplx(0.05), 0.0, 1.5, 0.5});
        auto tr = run(c);
        const auto& c0 = tr.conserved.front();
        double dQ = 0.0, dP = 0.0, dE = 0.0;
        for (const auto& ci : tr.conserved) {
            dQ = std::max(dQ, std::abs(ci.Q - c0.Q) / c0.Q);
            dP = std::max(dP, std::abs(ci.Pi[0] - c0.Pi[0]));
            dE = std::max(dE, std::abs(ci.E - c0.E) / std::abs(c0.E));
        }
        return std::array<double, 3>{dQ, dP, dE};
    };
    auto a = drift(1e-3, 100.0);  // 1e5 steps
    CHECK(a[0] <= 1e-10);
    CHECK(a[1] <= 1e-10);
    CHECK(a[2] <= 1e-6);
    auto b = drift(2e-3, 100.0);
    CHECK(b[2] / a[2] >= 3.5);
}

TEST_CASE("time reversal") {
    Grid g(1, 512, 20.0);
    SimConfig c = soliton_run(g, 0.0, 1e-3, 0.4);
    c.ic.packets.push_back({cplx(0.2, 0.1), 3.0, 1.0, -1.0});
    CVec u0 = initial_field(c).u;
    CVec u = u0;
    SplitStep fwd(g, kCubic, 1e-2), bwd(g, kCubic, -1e-2);
    for (int s = 0; s < 1000; ++s) fwd.step(u);
    for (int s = 0; s < 1000; ++s) bwd.step(u);
    CHECK((u - u0).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Strang splitting is second order") {
    Grid g(1, 512, 20.0);
    auto final_field = [&](double dt) {
        auto c = soliton_run(g, 2.0, dt, 0.5);
        c.ic.packets.push_back({cplx(0.3), 2.0, 1.0, 1.0});
        return run(c).snapshots.back().u;
    };
    CVec a = final_field(0.02), b = final_field(0.01), d = final_field(0.005);
    double ratio = l2_norm(g, a - b) / l2_norm(g, b - d);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("sponge absorbs only after the packet arrives") {
    Grid g(1, 2048, 80.0);
    SimConfig c;
    c.grid = g;
    c.beta = Nonlinearity::zero();
    c.ic.soliton = false;
    const double k0 = 3.0, w = 4.0;
    c.ic.packets.push_back({cplx(1.0), 0.0, w, k0});
    c.sponge = true;
    c.sponge_strength = 20.0;
    c.sponge_width = 0.25;
    c.T_final = 20.0;
    c.dt = 1e-2;
    c.sample_every = 0.05;
    c.snapshot_stride = 1000000;
    auto tr = run(c);
    const double Q0 = tr.conserved.front().Q;
    // mass fraction 1e-6 lies beyond y = 3.36 w from the packet center
    const double x0 = 0.75 * g.half_length(), vg = 2.0 * k0;
    const double predicted = (x0 - 3.36 * w) / vg;
    double arrival = -1.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        if (tr.conserved[i].Q < (1.0 - 1e-6) * Q0) {
            arrival = tr.times[i];
            break;
        }
    REQUIRE(arrival > 0.0);
    CHECK(std::abs(arrival - predicted) <= 0.1 * predicted);
    CHECK(tr.conserved.back().Q < 0.01 * Q0);
}

TEST_CASE("trajectory files round trip") {
    Grid g(1, 128, 10.0);
    auto c = soliton_run(g, 1.0, 1e-2);
    c.sample_every = 0.25;
    c.snapshot_stride = 2;
    auto tr = run(c);
    auto dir = std::filesystem::temp_directory_path() / "nlslab_traj_test";
    std::filesystem::remove_all(dir);
    write_trajectory(tr, dir.string());
    auto back = read_trajectory(dir.string());
    REQUIRE(back.snapshots.size() == tr.snapshots.size());
    CHECK(back.times == tr.times);
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) CHECK(back.snapshots[i].u == tr.snapshots[i].u);
    std::filesystem::remove_all(dir);
}

}
