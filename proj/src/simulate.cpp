#include "nlslab/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>

#include "nlslab/groundstate.hpp"
#include "nlslab/modulation.hpp"
#include "nlslab/spectrum.hpp"

namespace nls {

SplitStep::SplitStep(const Grid& g, const Nonlinearity& beta, double dt) : g_(g), beta_(beta), dt_(dt) {
    if (g.radial()) throw DataError("time integration is one-dimensional only");
    if (!(std::isfinite(dt) && dt != 0.0)) throw DataError("dt must be finite and nonzero");
    // free flow e^{it Lap}: u^(k) picks up e^{-i k^2 t}
    half_kinetic_.resize(static_cast<long>(g.n()));
    for (std::size_t j = 0; j < g.n(); ++j)
        half_kinetic_[static_cast<long>(j)] = std::exp(-kI * (g.ks()[j] * g.ks()[j] * 0.5 * dt));
}

void SplitStep::set_sponge(const RVec& W) {
    if (W.size() != static_cast<long>(g_.n())) throw DataError("sponge profile does not match the grid");
    damping_ = (-W.array() * std::abs(dt_)).exp().matrix();
    sponge_ = W.maxCoeff() > 0.0;
}

void SplitStep::step(CVec& u) const {
    u = apply_multiplier(u, half_kinetic_);
    for (long j = 0; j < u.size(); ++j) u[j] *= std::exp(-kI * (beta_.beta(std::norm(u[j])) * dt_));
    u = apply_multiplier(u, half_kinetic_);
    if (sponge_) u.array() *= damping_.array();
}

CVec step(const Grid& g, const CVec& u, double dt, const Nonlinearity& beta) {
    require_finite(u, "field");
    CVec w = u;
    SplitStep(g, beta, dt).step(w);
    return w;
}

RVec sponge_profile(const Grid& g, double strength, double width) {
    if (!(width > 0.0 && width < 1.0)) throw DataError("sponge width must lie in (0, 1)");
    const double L = g.half_length(), x0 = (1.0 - width) * L;
    RVec W = RVec::Zero(static_cast<long>(g.n()));
    for (std::size_t j = 0; j < g.n(); ++j) {
        double a = std::abs(g.x(j));
        if (a > x0) W[static_cast<long>(j)] = strength * std::pow((a - x0) / (L - x0), 4);
    }
    return W;
}

SpinorField initial_field(const SimConfig& c, std::vector<Eigenpair>* modes) {
    const Grid& g = c.grid;
    if (g.radial()) throw DataError("time integration is one-dimensional only");
    const long n = static_cast<long>(g.n());
    CVec u = CVec::Zero(n);
    const auto& ic = c.ic;
    if (ic.soliton) {
        auto gs = ground_state_entry(c.beta, ic.omega, g);
        CVec w = gs.phi.cast<cplx>();
        bool seeded = false;
        for (cplx z : ic.mode_amplitudes) seeded = seeded || z != 0.0;
        if (seeded) {
            auto H = LinearizedOperator::assemble(gs, c.beta, g);
            auto spec = discrete_spectrum(H);
            if (spec.modes.size() < ic.mode_amplitudes.size())
                throw DataError("initial condition seeds " + std::to_string(ic.mode_amplitudes.size()) +
                                " modes but the soliton has " + std::to_string(spec.modes.size()));
            std::vector<Eigenpair> used(spec.modes.begin(),
                                        spec.modes.begin() + static_cast<long>(ic.mode_amplitudes.size()));
            w += remainder_field(used, ic.mode_amplitudes, CVec::Zero(2 * n));
            if (modes) *modes = used;
        }
        u = gauge_boost(SpinorField(g, w), ic.v, ic.theta, ic.D).u;
    } else if (!ic.mode_amplitudes.empty()) {
        throw DataError("mode amplitudes need a soliton");
    }
    for (const auto& p : ic.packets) {
        if (!(p.width > 0.0)) throw DataError("packet width must be positive");
        for (long j = 0; j < n; ++j) {
            double y = g.x(static_cast<std::size_t>(j)) - p.center;
            u[j] += p.amplitude * std::exp(kI * p.wavenumber * g.x(static_cast<std::size_t>(j)) -
                                           0.5 * y * y / (p.width * p.width));
        }
    }
    if (ic.noise > 0.0) {
        // random Fourier coefficients on |k| <= 2, Gaussian-tapered
        std::mt19937_64 rng(ic.seed);
        std::normal_distribution<double> N01;
        CVec uh(n);
        for (long j = 0; j < n; ++j) {
            double k = g.ks()[j];
            double re = N01(rng), im = N01(rng);
            uh[j] = std::abs(k) <= 2.0 ? cplx(re, im) * std::exp(-k * k) : cplx(0.0);
        }
        CVec r = ifft(uh);
        double nr = l2_norm(g, r);
        if (nr > 0.0) u += (ic.noise / nr) * r;
    }
    require_finite(u, "initial field");
    return SpinorField(g, u, 0.0);
}

Trajectory run(const SimConfig& c) {
    if (!(c.T_final >= 0.0) || !(c.dt > 0.0)) throw DataError("need T_final >= 0 and dt > 0");
    if (c.snapshot_stride == 0) throw DataError("snapshot stride must be >= 1");
    const long steps = std::max(1L, std::lround(c.T_final / c.dt));
    const double dt = c.T_final > 0.0 ? c.T_final / static_cast<double>(steps) : c.dt;
    const long per_sample = std::max(1L, std::lround(c.sample_every / dt));

    Trajectory tr;
    tr.grid = c.grid;
    SpinorField U = initial_field(c, &tr.seeded_modes);
    SplitStep stepper(c.grid, c.beta, dt);
    if (c.sponge) stepper.set_sponge(sponge_profile(c.grid, c.sponge_strength, c.sponge_width));

    std::size_t sample = 0;
    auto record = [&](const CVec& u, double t, bool force_snapshot) {
        SpinorField F(c.grid, u, t);
        tr.times.push_back(t);
        tr.conserved.push_back(conserved(F, c.beta));
        if (sample % c.snapshot_stride == 0 || force_snapshot) tr.snapshots.push_back(F);
        ++sample;
    };
    record(U.u, 0.0, true);
    if (c.T_final == 0.0) return tr;

    CVec u = U.u, last = U.u;
    double last_t = 0.0;
    for (long s = 1; s <= steps; ++s) {
        stepper.step(u);
        const double t = static_cast<double>(s) * dt;
        if (!u.allFinite()) {
            tr.aborted = true;
            char buf[96];
            std::snprintf(buf, sizeof buf, "non-finite field at t = %.6g (step %ld)", t, s);
            tr.abort_reason = buf;
            if (tr.snapshots.empty() || tr.snapshots.back().time != last_t)
                tr.snapshots.emplace_back(c.grid, last, last_t);
            return tr;
        }
        if (s % per_sample == 0 || s == steps) record(u, t, s == steps);
        last = u;
        last_t = t;
    }
    return tr;
}

void write_conserved_csv(const Trajectory& tr, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os << "t,Q,Pi,E\n" << std::setprecision(17);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const auto& c = tr.conserved[i];
        os << tr.times[i] << ',' << c.Q << ',' << (c.Pi.empty() ? 0.0 : c.Pi[0]) << ',' << c.E << '\n';
    }
}

void write_trajectory(const Trajectory& tr, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_conserved_csv(tr, (fs::path(dir) / "conserved.csv").string());
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.nlsf", i);
        write_snapshot(tr.snapshots[i], (fs::path(dir) / name).string());
    }
}

Trajectory read_trajectory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("no trajectory directory " + dir);
    Trajectory tr;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".nlsf") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no snapshots in " + dir);
    for (const auto& f : files) tr.snapshots.push_back(read_snapshot(f.string()));
    tr.grid = tr.snapshots.front().grid;
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        if (tr.snapshots[i].grid != tr.grid) throw FormatError("snapshots on different grids");
        if (i > 0 && !(tr.snapshots[i].time > tr.snapshots[i - 1].time))
            throw FormatError("snapshot times not increasing");
    }
    std::ifstream is((fs::path(dir) / "conserved.csv").string());
    std::string line;
    if (is && std::getline(is, line)) {
        while (std::getline(is, line)) {
            ConservedTriple c;
            double t, pi;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &c.Q, &pi, &c.E) != 4)
                throw FormatError("bad conserved.csv row: " + line);
            c.Pi = {pi};
            tr.times.push_back(t);
            tr.conserved.push_back(c);
        }
    } else {
        for (const auto& s : tr.snapshots) tr.times.push_back(s.time);
    }
    return tr;
}

}  // namespace nls
