#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nlslab/config.hpp"
#include "nlslab/diagnostics.hpp"
#include "nlslab/fgr.hpp"

using namespace nls;

namespace {

const Nonlinearity kQuintic = Nonlinearity::polynomial({-1.0, -3.0});
const Nonlinearity kCubic = Nonlinearity::polynomial({-1.0});

SimConfig soliton(const Grid& g, const Nonlinearity& b, double T, double dt, double every) {
    SimConfig c;
    c.grid = g;
    c.beta = b;
    c.ic.omega = 1.0;
    c.T_final = T;
    c.dt = dt;
    c.sample_every = every;
    return c;
}

struct Shell {
    int code;
    std::string out;
};

Shell shell(const std::string& cmd) {
    Shell r{0, {}};
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t k;
    while ((k = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("tracking an exact soliton") {
    Grid g(1, 1024, 30.0);
    {
        auto tr = run(soliton(g, kCubic, 10.0, 1e-3, 0.5));
        SolitonManifold M(kCubic, g);
        auto s = track_modulation(tr, M, {1.0, 0.0, 0.0, 0.0});
        REQUIRE_FALSE(s.breakdown);
        for (const auto& p : s.p) CHECK(std::abs(p.omega - 1.0) <= 1e-8);
        auto laws = modulation_laws(s, 0.0);
        CHECK(laws.tail_Ddot <= 1e-8);
        CHECK(laws.tail_theta <= 1e-6);
    }
    {
        // the split-step soliton differs from phi by O(dt^2); at dt = 2.5e-5
        // the mode it excites is below 1e-8
        auto tr = run(soliton(g, kQuintic, 2.0, 2.5e-5, 0.25));
        SolitonManifold M(kQuintic, g);
        auto s = track_modulation(tr, M, {1.0, 0.0, 0.0, 0.0});
        REQUIRE_FALSE(s.breakdown);
        REQUIRE(s.lambdas.size() == 1);
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            CHECK(std::abs(s.z[i][0]) <= 1e-8);
            CHECK(std::abs(s.p[i].omega - 1.0) <= 1e-8);
        }
    }
}

TEST_CASE("modulation laws along a perturbed boosted soliton") {
    Grid g(1, 1024, 40.0);
    auto c = soliton(g, kCubic, 60.0, 2e-3, 0.5);
    c.ic.v = 0.4;
    c.ic.packets.push_back({cplx(0.05), 0.0, 1.0, 1.5});
    c.sponge = true;
    c.sponge_strength = 5.0;
    auto tr = run(c);
    SolitonManifold M(kCubic, g);
    auto s = track_modulation(tr, M, {1.0, 0.0, 0.0, 0.4});
    REQUIRE_FALSE(s.breakdown);
    auto laws = modulation_laws(s, 0.0);
    // max |Ddot - v| over successive thirds decreases
    double third[3] = {0, 0, 0};
    for (std::size_t i = 0; i < laws.t.size(); ++i) {
        int k = std::min(2, static_cast<int>(3.0 * laws.t[i] / 60.0));
        third[k] = std::max(third[k], std::abs(laws.Ddot_minus_v[i]));
    }
    CHECK(third[2] < third[0]);
    auto tail = modulation_laws(s, 30.0);
    CHECK(tail.tail_theta <= 1e-3);
}

TEST_CASE("scattering extraction") {
    Grid g(1, 512, 40.0);
    SimConfig c;
    c.grid = g;
    c.beta = Nonlinearity::zero();
    c.ic.soliton = false;
    c.ic.packets.push_back({cplx(0.3), 0.0, 2.0, 0.7});
    c.T_final = 10.0;
    c.dt = 1e-2;
    c.sample_every = 0.25;
    auto tr = run(c);
    auto free = scattering_extract(radiation_series(tr), 5.0);
    for (double r : free.residuals) CHECK(r <= 1e-10);
    CHECK_THROWS_AS(scattering_extract(radiation_series(tr), 9.0), DataError);

    Grid g2(1, 1024, 30.0);
    // the split-step soliton sheds O(dt^2) radiation, so dt is kept small
    auto sol = run(soliton(g2, kCubic, 4.0, 2.5e-5, 0.125));
    SolitonManifold M(kCubic, g2);
    auto s = track_modulation(sol, M, {1.0, 0.0, 0.0, 0.0});
    auto sc = scattering_extract(s, 1.0);
    CHECK(sc.f_plus.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("dispersive norms") {
    Grid g(1, 256, 20.0);
    std::vector<double> t;
    std::vector<CVec> f, zero;
    for (int i = 0; i < 20; ++i) {
        t.push_back(0.5 * i);
        CVec u(256);
        for (long j = 0; j < 256; ++j) u[j] = std::exp(-0.1 * (g.x(j) - i) * (g.x(j) - i)) * std::exp(kI * 0.3 * g.x(j));
        f.push_back(u);
        zero.push_back(CVec::Zero(256));
    }
    auto z = dispersive_norms(t, zero, g);
    REQUIRE(z.entries.size() == 4);
    for (const auto& e : z.entries) CHECK(e.value == 0.0);
    auto a = dispersive_norms(t, f, g);
    std::vector<CVec> f3;
    for (const auto& u : f) f3.push_back(3.0 * u);
    auto b = dispersive_norms(t, f3, g);
    for (std::size_t k = 0; k < a.entries.size(); ++k) {
        CHECK(a.entries[k].value > 0.0);
        CHECK(b.entries[k].value == doctest::Approx(3.0 * a.entries[k].value).epsilon(1e-12));
    }
    // 2/p + 1/q = 1/2
    for (const auto& e : a.entries)
        if (e.name.rfind("L^2_t L^{2", 0) != 0)
            CHECK(2.0 / e.p + 1.0 / e.q == doctest::Approx(0.5));
    t[5] += 0.1;
    CHECK_THROWS_AS(dispersive_norms(t, f, g), DataError);
}

TEST_CASE("decay comparison") {
    std::vector<double> t(100);
    for (int i = 0; i < 100; ++i) t[i] = i;
    auto triv = compare_decay(t, std::vector<cplx>(100, 0.0), 0.8, 1.0, 1, 10.0);
    CHECK(triv.trivial);
    CHECK_FALSE(triv.fitted);

    const double lam = 0.8, Gam = 1.3;
    auto ode = reduced_mode_ode({cplx(0.05, 0.0)}, {lam}, Gam, 1, 1000.0, 0.01, 25);
    std::vector<cplx> z;
    for (const auto& v : ode.zeta) z.push_back(v[0]);
    auto r = compare_decay(ode.t, z, lam, Gam, 1, 100.0);
    REQUIRE(r.fitted);
    CHECK(r.slope == doctest::Approx(Gam / lam).epsilon(0.01));
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(0.01));
    CHECK(r.monotone);
    CHECK_FALSE(r.fgr_failure);

    // growing envelope is flagged
    std::vector<cplx> grow;
    for (double s : ode.t) grow.push_back(0.01 * (1.0 + s / 1000.0) * std::exp(-kI * lam * s));
    auto bad = compare_decay(ode.t, grow, lam, Gam, 1, 100.0);
    CHECK(bad.fgr_failure);
    CHECK_FALSE(bad.monotone);
}

TEST_CASE("Galilei frame consistency") {
    // boost by a grid wavenumber so the periodic problem keeps the symmetry
    Grid g(1, 1024, 30.0);
    const double v0 = 2.0 * 3.0 * kPi / 30.0;
    auto c = soliton(g, kQuintic, 5.0, 1e-3, 0.5);
    c.ic.mode_amplitudes = {cplx(0.005)};
    auto a = run(c);
    c.ic.v = v0;
    auto b = run(c);
    SolitonManifold Ma(kQuintic, g), Mb(kQuintic, g);
    auto sa = track_modulation(a, Ma, {1.0, 0.0, 0.0, 0.0});
    auto sb = track_modulation(b, Mb, {1.0, 0.0, 0.0, v0});
    REQUIRE(sa.t.size() == sb.t.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sa.t.size(); ++i) {
        const auto& p = sa.p[i];
        const auto& q = sb.p[i];
        const double t = sa.t[i];
        worst = std::max({worst, std::abs(q.omega - p.omega), std::abs(q.v - p.v - v0),
                          std::abs(q.D - p.D - v0 * t),
                          std::abs(q.theta - (p.theta + 0.5 * v0 * p.D + 0.25 * v0 * v0 * t)),
                          std::abs(sb.z[i][0] - sa.z[i][0])});
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("config parsing") {
    auto c = parse_config(R"({"grid": {"n": 512, "L": 20}, "nonlinearity": "poly:-1,-3", "omega": 1.5,
                              "initial": {"modes": [[0.01, 0.0]], "v": 0.2},
                              "run": {"T": 3, "dt": 0.002, "sponge": true},
                              "analysis": {"gamma": 0.7}})");
    CHECK(c.grid.n() == 512);
    CHECK(c.sim.ic.omega == 1.5);
    CHECK(c.sim.ic.mode_amplitudes.size() == 1);
    CHECK(c.sim.sponge);
    CHECK(c.analysis.Gamma == 0.7);
    CHECK_FALSE(c.gamma_auto);
    CHECK_THROWS_AS(parse_config(R"({"grid": {"n": 512, "size": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"run": {"dt": "fast"}})"), ConfigError);
}

TEST_CASE("command line") {
    namespace fs = std::filesystem;
    const std::string cli = NLSLAB_CLI_PATH;
    const fs::path dir = fs::temp_directory_path() / "nlslab_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    CHECK(shell(cli + " no-such-command 2>/dev/null").code == 2);
    CHECK(shell(cli + " spectrum -c " + (dir / "missing.json").string() + " 2>/dev/null").code == 2);
    {
        std::ofstream(dir / "bad.json") << R"({"grid": {"n": 100}})";
        auto r = shell(cli + " spectrum -c " + (dir / "bad.json").string());
        CHECK(r.code == 2);
        CHECK(nlohmann::json::parse(r.out)["error"] == "config");
    }
    {
        auto r = shell(cli + " check-hypotheses -o " + (dir / "hyp").string());
        REQUIRE(r.code == 0);
        auto j = nlohmann::json::parse(r.out);
        CHECK(j["H4"]["holds"] == true);
        CHECK(j["modes"].empty());
    }
    {
        // numerical failure: no ground state for the linear equation
        std::ofstream(dir / "lin.json") << R"({"nonlinearity": "zero"})";
        auto r = shell(cli + " groundstate -c " + (dir / "lin.json").string());
        CHECK(r.code == 1);
        CHECK(nlohmann::json::parse(r.out)["error"] == "branch-not-found");
    }
    {
        std::ofstream(dir / "sol.json") << R"({"grid": {"n": 1024, "L": 30}, "nonlinearity": "poly:-1,-3",
            "run": {"T": 2, "dt": 2.5e-5, "sample_every": 0.25}, "analysis": {"tail_fraction": 0.5}})";
        const std::string cfg = (dir / "sol.json").string();
        auto r = shell(cli + " analyze -c " + cfg + " -o " + (dir / "sol").string());
        REQUIRE(r.code == 0);
        auto j = nlohmann::json::parse(r.out);
        CHECK(j["breakdown"] == false);
        CHECK(j["lambda"].size() == 1);
        CHECK(j["z_tail_max"].get<double>() <= 1e-8);
        auto rep = shell(cli + " report -o " + (dir / "sol").string());
        CHECK(rep.code == 0);
        CHECK(fs::exists(dir / "sol" / "omega.svg"));
        CHECK(fs::exists(dir / "sol" / "mode_amplitude.svg"));
        CHECK(fs::exists(dir / "sol" / "report.md"));
        // determinism: a second run from scratch reproduces every byte
        auto again = shell(cli + " analyze -c " + cfg + " -o " + (dir / "sol2").string());
        REQUIRE(again.code == 0);
        CHECK(slurp(dir / "sol" / "stability.json") == slurp(dir / "sol2" / "stability.json"));
        CHECK(slurp(dir / "sol" / "modulation.csv") == slurp(dir / "sol2" / "modulation.csv"));
        CHECK(slurp(dir / "sol" / "trajectory" / "conserved.csv") == slurp(dir / "sol2" / "trajectory" / "conserved.csv"));
    }
    fs::remove_all(dir);
}

}
