#include "nlslab/modulation.hpp"

#include <cmath>
#include <iomanip>

namespace nls {

SolitonManifold::SolitonManifold(Nonlinearity beta, Grid grid, std::size_t max_modes)
    : beta_(std::move(beta)), grid_(std::move(grid)), max_modes_(max_modes) {}

const GroundState& SolitonManifold::entry(double omega) {
    if (!gs_ || gs_->omega != omega) {
        const RVec* guess = gs_ ? &gs_->phi : nullptr;
        gs_ = ground_state_entry(beta_, omega, grid_, 1e-11, 1e-4, guess);
    }
    return *gs_;
}

const LinearizedOperator& SolitonManifold::op(double omega) {
    if (!op_gs_ || std::abs(op_gs_->omega - omega) > refresh_tol_) {
        op_gs_ = entry(omega);
        H_ = LinearizedOperator::assemble(*op_gs_, beta_, grid_);
        bool tracked = false;
        if (have_modes_) {
            try {
                modes_ = track_modes(H_, modes_).modes;
                tracked = true;
            } catch (const ConvergenceError&) {
            }
        }
        if (!tracked) {
            modes_ = discrete_spectrum(H_, SearchWindow::internal(), max_modes_).modes;
            have_modes_ = true;
        }
    }
    return H_;
}

const std::vector<Eigenpair>& SolitonManifold::modes(double omega) {
    op(omega);
    return modes_;
}

double unwrap_phase(double theta, double reference) {
    return theta - 2.0 * kPi * std::round((theta - reference) / (2.0 * kPi));
}

namespace {

// y(x) = exp(-i (v x / 2 + theta)) u(x + D)
CVec pulled_back(const SpinorField& U, const ModulationParams& p) {
    const Grid& g = U.grid;
    CVec y = g.radial() ? U.u : translate(g, U.u, -p.D);
    for (std::size_t j = 0; j < g.n(); ++j) {
        double x = g.xs()[j];
        double ph = g.radial() ? p.theta : 0.5 * p.v * x + p.theta;
        y[static_cast<long>(j)] *= std::exp(cplx(0.0, -ph));
    }
    return y;
}

struct Tests {
    // test functions of the secular functionals: Re int r phi, Im int r dphi,
    // Re int r x phi, Im int r phi'
    std::vector<CVec> t;
    std::vector<bool> real_part;
};

Tests tests_at(const Grid& g, const GroundState& gs) {
    Tests T;
    CVec p = gs.phi.cast<cplx>(), dp = gs.dphi.cast<cplx>();
    T.t = {p, dp};
    T.real_part = {true, false};
    if (!g.radial()) {
        T.t.push_back((g.xs().cast<cplx>().array() * p.array()).matrix());
        T.t.push_back(deriv(g, p));
        T.real_part.push_back(true);
        T.real_part.push_back(false);
    }
    return T;
}

std::vector<double> eval(const Grid& g, const Tests& T, const CVec& r) {
    std::vector<double> F;
    for (std::size_t k = 0; k < T.t.size(); ++k) {
        cplx v = integrate(g, (r.array() * T.t[k].array()).matrix());
        F.push_back(T.real_part[k] ? v.real() : v.imag());
    }
    return F;
}

double maxabs(const std::vector<double>& F) {
    double m = 0.0;
    for (double f : F) m = std::max(m, std::abs(f));
    return m;
}

}  // namespace

std::vector<double> secular_functionals(SolitonManifold& M, const SpinorField& U, const ModulationParams& p) {
    const GroundState& gs = M.entry(p.omega);
    CVec r = pulled_back(U, p) - gs.phi.cast<cplx>();
    return eval(M.grid(), tests_at(M.grid(), gs), r);
}

ModulationState fit_modulation(const SpinorField& U, const ModulationParams& guess, SolitonManifold& M,
                               const FitOptions& opt) {
    const Grid& g = M.grid();
    if (U.grid != g) throw DataError("field grid does not match the soliton manifold");
    require_finite(U.u, "field");
    ModulationParams p = guess;
    if (g.radial()) p.v = p.D = 0.0;
    const std::size_t ne = g.radial() ? 2 : 4;

    auto residual_at = [&](const ModulationParams& q, CVec* r_out) {
        const GroundState& gs = M.entry(q.omega);
        CVec r = pulled_back(U, q) - gs.phi.cast<cplx>();
        double rel = std::sqrt(integrate(g, r.cwiseAbs2().cast<cplx>()).real() / gs.q);
        if (!std::isfinite(rel) || rel > opt.max_remainder)
            throw ConvergenceError("modulation fit diverged: field too far from the soliton manifold");
        if (r_out) *r_out = r;
        return eval(g, tests_at(g, gs), r);
    };

    ModulationState s;
    CVec r;
    std::vector<double> F;
    try {
        F = residual_at(p, &r);
    } catch (const BranchNotFound&) {
        throw ConvergenceError("modulation fit diverged: no ground state at the guessed omega");
    }
    int it = 0;
    for (; it < opt.max_iter && maxabs(F) > opt.fit_tol; ++it) {
        const GroundState& gs = M.entry(p.omega);
        if (std::abs(gs.dq) <= 1e-10 * std::max(1.0, gs.q)) throw DegenerateBranch("q'(omega) vanishes");
        Tests T = tests_at(g, gs);
        CVec y = r + gs.phi.cast<cplx>();
        CVec dp = gs.dphi.cast<cplx>();
        RMat J(ne, ne);
        // omega: r moves by -d_omega phi, test functions move with phi
        {
            std::vector<double> a = eval(g, T, -dp);
            Tests Tw;
            Tw.t = {dp, CVec::Zero(dp.size())};
            Tw.real_part = T.real_part;
            if (!g.radial()) {
                Tw.t.push_back((g.xs().cast<cplx>().array() * dp.array()).matrix());
                Tw.t.push_back(deriv(g, dp));
            }
            std::vector<double> b = eval(g, Tw, r);
            for (std::size_t k = 0; k < ne; ++k) J(k, 0) = a[k] + b[k];
        }
        {
            std::vector<double> a = eval(g, T, cplx(0, -1) * y);
            for (std::size_t k = 0; k < ne; ++k) J(k, 1) = a[k];
        }
        if (!g.radial()) {
            CVec yD = deriv(g, y) + cplx(0, 0.5 * p.v) * y;
            CVec yv = (cplx(0, -0.5) * g.xs().cast<cplx>().array() * y.array()).matrix();
            std::vector<double> a = eval(g, T, yD), b = eval(g, T, yv);
            for (std::size_t k = 0; k < ne; ++k) {
                J(k, 2) = a[k];
                J(k, 3) = b[k];
            }
        }
        RVec Fv(ne);
        for (std::size_t k = 0; k < ne; ++k) Fv[k] = F[k];
        Eigen::FullPivLU<RMat> lu(J);
        if (!lu.isInvertible()) throw DegenerateBranch("singular modulation Jacobian");
        RVec dpv = -lu.solve(Fv);
        // keep omega steps moderate
        double scale = 1.0;
        if (std::abs(dpv[0]) > 0.2 * p.omega) scale = 0.2 * p.omega / std::abs(dpv[0]);
        double before = maxabs(F);
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            ModulationParams q = p;
            q.omega += scale * dpv[0];
            q.theta += scale * dpv[1];
            if (!g.radial()) {
                q.D += scale * dpv[2];
                q.v += scale * dpv[3];
            }
            try {
                CVec rq;
                auto Fq = residual_at(q, &rq);
                if (maxabs(Fq) < before || half == 29) {
                    p = q;
                    F = Fq;
                    r = rq;
                    accepted = maxabs(Fq) < before;
                    break;
                }
            } catch (const BranchNotFound&) {
            } catch (const ConvergenceError&) {
                if (half == 29) throw;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    if (maxabs(F) > opt.fit_tol)
        throw ConvergenceError("modulation fit did not reach tolerance; residual " + std::to_string(maxabs(F)));

    p.theta = unwrap_phase(p.theta, guess.theta);
    s.p = p;
    s.iterations = it;
    s.secular_residual = maxabs(F);
    // the fit may have ended on a phase-shifted branch: rebuild r on the stored one
    r = pulled_back(U, p) - M.entry(p.omega).phi.cast<cplx>();
    s.R = stack(r, r.conjugate());
    const LinearizedOperator& H = M.op(p.omega);
    auto c = spectral_project(H, M.modes(p.omega), s.R);
    s.z = c.z;
    s.f = c.f;
    CVec f1 = c.f.head(static_cast<long>(g.n()));
    s.Qf = integrate(g, f1.cwiseAbs2().cast<cplx>()).real();
    s.Pif = g.radial() ? 0.0 : integrate(g, (f1.conjugate().array() * deriv(g, f1).array()).matrix()).imag();
    return s;
}

CVec remainder_field(const std::vector<Eigenpair>& modes, const std::vector<cplx>& z, const CVec& f) {
    const long n = f.size() / 2;
    CVec r = f.head(n);
    for (std::size_t j = 0; j < modes.size() && j < z.size(); ++j)
        r += z[j] * modes[j].xi.head(n) + std::conj(z[j]) * modes[j].xi.tail(n);
    return r;
}

ReducedCoordinates reduced_coordinates(double Q, double Pi, const std::vector<cplx>& z, const CVec& f,
                                       SolitonManifold& M, double omega_guess) {
    const Grid& g = M.grid();
    CVec r = remainder_field(M.modes(omega_guess), z, f);
    double QR = integrate(g, r.cwiseAbs2().cast<cplx>()).real();
    double PiR = g.radial() ? 0.0 : integrate(g, (r.conjugate().array() * deriv(g, r).array()).matrix()).imag();
    double target = Q - QR;
    if (!(target > 0.0)) throw DataError("charge outside the branch range");
    double w = omega_guess;
    bool done = false;
    for (int it = 0; it < 40; ++it) {
        GroundState gs;
        try {
            gs = M.entry(w);
        } catch (const BranchNotFound&) {
            throw DataError("charge outside the branch range");
        }
        double F = gs.q - target;
        if (std::abs(F) <= 1e-12 * target) {
            done = true;
            break;
        }
        if (std::abs(gs.dq) <= 1e-10 * gs.q) throw DegenerateBranch("q'(omega) vanishes");
        double step = -F / gs.dq;
        if (std::abs(step) > 0.2 * w) step = std::copysign(0.2 * w, step);
        w += step;
        if (w <= 0.0) throw DataError("charge outside the branch range");
    }
    if (!done) throw ConvergenceError("reduced coordinate Newton failed");
    return {w, 2.0 * (Pi - PiR) / Q};
}

SpinorField reconstruct(const ModulationState& s, SolitonManifold& M) {
    const Grid& g = M.grid();
    const long n = static_cast<long>(g.n());
    CVec w = M.entry(s.p.omega).phi.cast<cplx>() + s.R.head(n);
    return gauge_boost(SpinorField(g, w), s.p.v, s.p.theta, s.p.D);
}

GaugeResiduals gauge_identities(const SpinorField& U, const ModulationState& s, SolitonManifold& M) {
    const Grid& g = M.grid();
    const long n = static_cast<long>(g.n());
    const GroundState& gs = M.entry(s.p.omega);
    SpinorField R(g, s.R.head(n));
    SpinorField W(g, gs.phi.cast<cplx>() + s.R.head(n));
    GaugeResiduals out;
    double QW = charge(W);
    out.charge = std::abs(charge(U) - gs.q - charge(R));
    if (!g.radial()) {
        double PiU = momentum(U)[0], PiW = momentum(W)[0], PiR = momentum(R)[0];
        out.momentum = std::abs(PiU - (PiW + 0.5 * s.p.v * QW));
        out.energy = std::abs(energy(U, M.beta()) -
                              (energy(W, M.beta()) + s.p.v * PiW + 0.25 * s.p.v * s.p.v * QW));
        out.momentum_split = std::abs(PiW - PiR);
    } else {
        out.energy = std::abs(energy(U, M.beta()) - energy(W, M.beta()));
    }
    return out;
}

void write_modulation_header(std::ostream& os, std::size_t m) {
    os << "t,omega,theta,D,v";
    for (std::size_t j = 1; j <= m; ++j) os << ",re_z" << j << ",im_z" << j;
    os << ",f_l2,f_l2w,Q_f,Pi_f\n";
}

void write_modulation_row(std::ostream& os, double t, const ModulationState& s, const Grid& g) {
    os << std::setprecision(12) << t << ',' << s.p.omega << ',' << s.p.theta << ',' << s.p.D << ',' << s.p.v;
    for (const auto& z : s.z) os << ',' << z.real() << ',' << z.imag();
    os << ',' << spinor_norm(g, s.f) << ',' << weighted_norm(g, s.f, 2.0) << ',' << s.Qf << ',' << s.Pif << '\n';
}

}  // namespace nls
