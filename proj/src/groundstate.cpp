#include "nlslab/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>

#include "nlslab/krylov.hpp"
#include "nlslab/parallel.hpp"

namespace nls {

namespace {

CVec cx(const RVec& v) { return v.cast<cplx>(); }

// F(phi) = -Lap phi + omega phi + beta(phi^2) phi
RVec stationary_map(const Nonlinearity& beta, double omega, const Grid& g, const RVec& phi) {
    RVec lap = laplacian(g, cx(phi)).real();
    RVec out(phi.size());
    for (long j = 0; j < phi.size(); ++j) out[j] = -lap[j] + omega * phi[j] + beta.beta(phi[j] * phi[j]) * phi[j];
    return out;
}

double wnorm(const Grid& g, const RVec& v) { return std::sqrt(integrate_real(g, v.array().square().matrix())); }

RVec default_guess(double omega, const Grid& g) {
    RVec phi(g.n());
    for (std::size_t j = 0; j < g.n(); ++j) {
        double x = g.xs()[j];
        phi[static_cast<long>(j)] =
            g.radial() ? 4.0 * std::sqrt(omega) * std::exp(-omega * x * x / 2.0)
                       : std::sqrt(2.0 * omega) / std::cosh(std::sqrt(omega) * x);
    }
    return phi;
}

// Petviashvili iteration; brings a crude guess into the Newton basin.
RVec petviashvili(const Nonlinearity& beta, double omega, const Grid& g, RVec phi, int max_iter, int& steps) {
    const double gamma = 1.5;
    for (steps = 0; steps < max_iter; ++steps) {
        RVec N(phi.size());
        for (long j = 0; j < phi.size(); ++j) N[j] = -beta.beta(phi[j] * phi[j]) * phi[j];
        RVec Mphi = (-laplacian(g, cx(phi)).real() + omega * phi);
        double num = integrate_real(g, (phi.array() * Mphi.array()).matrix());
        double den = integrate_real(g, (phi.array() * N.array()).matrix());
        if (!(den > 0.0) || !std::isfinite(den)) throw BranchNotFound("no focusing response at this frequency");
        double S = num / den;
        RVec next = shifted_laplacian_inverse(g, cx(N), omega).real() * std::pow(S, gamma);
        double change = wnorm(g, next - phi) / std::max(wnorm(g, next), 1e-300);
        phi = next;
        if (wnorm(g, phi) < 1e-8) throw BranchNotFound("iteration collapsed to the zero solution");
        if (change < 1e-2 && std::abs(S - 1.0) < 1e-3) break;
    }
    return phi;
}

// mirror symmetrization in d = 1; radial fields are left alone
CVec even_part(const Grid& g, const CVec& v) {
    if (g.radial()) return v;
    CVec w = v;
    for (std::size_t j = 0; j < g.n(); ++j)
        w[static_cast<long>(j)] = 0.5 * (v[static_cast<long>(j)] + v[static_cast<long>(g.mirror(j))]);
    return w;
}

// L+ x = rhs restricted to even functions
GmresResult solve_lplus_even(const Nonlinearity& beta, double omega, const Grid& grid, const RVec& phi,
                             const CVec& rhs, double tol, const CVec* x0 = nullptr) {
    RVec pot(phi.size());
    for (long j = 0; j < phi.size(); ++j) {
        double s = phi[j] * phi[j];
        pot[j] = omega + beta.beta(s) + 2.0 * beta.dbeta(s) * s;
    }
    LinOp J = [&](const CVec& v) {
        return even_part(grid, -laplacian(grid, v) + (pot.cast<cplx>().array() * v.array()).matrix());
    };
    LinOp precond = [&](const CVec& r) { return even_part(grid, shifted_laplacian_inverse(grid, r, omega)); };
    return gmres(J, even_part(grid, rhs), precond, tol, 80, 4000, x0);
}

}  // namespace

double stationary_residual(const Nonlinearity& beta, double omega, const Grid& grid, const RVec& phi) {
    return wnorm(grid, stationary_map(beta, omega, grid, phi)) / std::max(wnorm(grid, phi), 1e-300);
}

RVec solve_ground_state(const Nonlinearity& beta, double omega, const Grid& grid, double tol, const RVec* guess,
                        NewtonStats* stats) {
    if (!(omega > 0.0)) throw BranchNotFound("no decaying ground state for omega <= 0");
    if (tol < 1e-12) tol = 1e-12;
    if (beta.is_zero()) throw BranchNotFound("linear equation has no ground state");
    NewtonStats local;
    NewtonStats& st = stats ? *stats : local;
    RVec phi;
    if (guess) {
        phi = *guess;
    } else {
        phi = petviashvili(beta, omega, grid, default_guess(omega, grid), 400, st.petviashvili_steps);
    }
    const double norm_floor = 1e-6;
    const int max_newton = 60;
    RVec F = stationary_map(beta, omega, grid, phi);
    double res = wnorm(grid, F) / std::max(wnorm(grid, phi), 1e-300);
    st.residuals.push_back(res);
    // Newton stays in the even sector, where L+ has no kernel
    for (int it = 0; it < max_newton && res > tol; ++it) {
        double inner = std::clamp(0.01 * res, 1e-14, 1e-4);
        auto sol = solve_lplus_even(beta, omega, grid, phi, cx(-F), inner);
        RVec delta = sol.x.real();
        double alpha = 1.0;
        double fnorm = wnorm(grid, F);
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
            RVec trial = phi + alpha * delta;
            RVec Ft = stationary_map(beta, omega, grid, trial);
            if (wnorm(grid, Ft) < (1.0 - 1e-4 * alpha) * fnorm) {
                phi = trial;
                F = Ft;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        double pn = wnorm(grid, phi);
        if (pn < norm_floor) throw BranchNotFound("Newton converged to the zero solution");
        res = wnorm(grid, F) / pn;
        st.residuals.push_back(res);
    }
    if (!(res <= tol)) throw ConvergenceError("ground-state Newton did not converge (residual " + std::to_string(res) + ")");
    // symmetrize: the exact ground state is even
    RVec sym = phi;
    for (std::size_t j = 0; j < grid.n(); ++j)
        sym[static_cast<long>(j)] = 0.5 * (phi[static_cast<long>(j)] + phi[static_cast<long>(grid.mirror(j))]);
    phi = sym;
    long peak_at = 0;
    double peak = phi.maxCoeff(&peak_at);
    if (!(peak > 0.0) || std::abs(grid.xs()[peak_at]) > 2.0 * grid.h() || phi.minCoeff() < -1e-10 * peak)
        throw BranchNotFound("converged to a sign-changing or off-center state (peak " + std::to_string(peak) + " at " + std::to_string(grid.xs()[peak_at]) + ", min " + std::to_string(phi.minCoeff()) + ")");
    return phi;
}

GroundState ground_state_entry(const Nonlinearity& beta, double omega, const Grid& grid, double tol, double rel_step,
                               const RVec* guess) {
    GroundState gs;
    gs.omega = omega;
    gs.phi = solve_ground_state(beta, omega, grid, tol, guess);
    auto qe = [&](const RVec& phi, double& q, double& e) {
        SpinorField U(grid, cx(phi));
        q = charge(U);
        e = energy(U, beta);
    };
    qe(gs.phi, gs.q, gs.e);
    gs.d = gs.e + omega * gs.q;
    if (rel_step > 0.0) {
        double dw = rel_step * omega;
        RVec p = solve_ground_state(beta, omega + dw, grid, tol, &gs.phi);
        RVec m = solve_ground_state(beta, omega - dw, grid, tol, &gs.phi);
        gs.dphi = (p - m) / (2.0 * dw);
        gs.step = dw;
        double qp, ep, qm, em;
        qe(p, qp, ep);
        qe(m, qm, em);
        gs.dq = (qp - qm) / (2.0 * dw);
        // the difference quotient is O(dw^2) accurate; d_omega phi solves
        // L+ d_omega phi = -phi exactly, so polish it there
        CVec start = cx(gs.dphi);
        auto sol = solve_lplus_even(beta, omega, grid, gs.phi, cx(-gs.phi), 1e-12, &start);
        if (sol.rel_residual <= 1e-10) {
            gs.dphi = sol.x.real();
            gs.dq = 2.0 * integrate_real(grid, (gs.phi.array() * gs.dphi.array()).matrix());
        }
        gs.dd = ((ep + (omega + dw) * qp) - (em + (omega - dw) * qm)) / (2.0 * dw);
    }
    return gs;
}

double SolitonFamily::interpolate_q(double omega) const {
    if (samples.empty()) return 0.0;
    if (omega <= samples.front().omega) return samples.front().q;
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (omega <= samples[i].omega) {
            const auto& a = samples[i - 1];
            const auto& b = samples[i];
            double t = (omega - a.omega) / (b.omega - a.omega);
            return (1 - t) * a.q + t * b.q;
        }
    return samples.back().q;
}

SolitonFamily family_scan(const Nonlinearity& beta, double omega_lo, double omega_hi, int n_samples,
                          const Grid& grid, double tol, bool with_lplus) {
    if (!(omega_lo > 0.0) || !(omega_hi > omega_lo) || n_samples < 2)
        throw DataError("family_scan needs 0 < omega_lo < omega_hi and >= 2 samples");
    SolitonFamily fam;
    fam.beta = beta;
    fam.grid = grid;
    fam.samples.resize(static_cast<std::size_t>(n_samples));
    std::vector<double> omegas(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i)
        omegas[static_cast<std::size_t>(i)] = omega_lo + (omega_hi - omega_lo) * i / (n_samples - 1);
    // serial continuation seed pass, then independent refinement per sample
    std::vector<RVec> seeds(omegas.size());
    RVec prev;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        prev = solve_ground_state(beta, omegas[i], grid, 1e-8, prev.size() ? &prev : nullptr);
        seeds[i] = prev;
    }
    parallel_for(omegas.size(), [&](std::size_t i) {
        fam.samples[i] = ground_state_entry(beta, omegas[i], grid, tol, 1e-4, &seeds[i]);
    });
    fam.min_dq = fam.samples.front().dq;
    for (const auto& s : fam.samples) fam.min_dq = std::min(fam.min_dq, s.dq);
    fam.h4 = fam.min_dq > 0.0;
    if (with_lplus) {
        fam.lplus_negative_count.resize(omegas.size());
        parallel_for(omegas.size(), [&](std::size_t i) {
            fam.lplus_negative_count[i] = check_lplus(fam.samples[i], beta, grid).n_negative;
        });
    }
    return fam;
}

namespace {

// Dense matrix of a symmetric grid operator restricted to the even or odd
// sector about x = 0, in an orthonormal sector basis. Each basis vector has
// at most two nonzeros, so the projection is a gather.
RMat sector_matrix(const Grid& g, const std::function<RVec(const RVec&)>& op, bool even) {
    const long n = static_cast<long>(g.n());
    const double r2 = 1.0 / std::sqrt(2.0);
    struct Pt {
        long a, b;
        double wa, wb;
    };
    std::vector<Pt> B;
    for (long j = 0; j < n; ++j) {
        long mj = static_cast<long>(g.mirror(static_cast<std::size_t>(j)));
        if (mj == j) {
            if (even) B.push_back({j, -1, 1.0, 0.0});
        } else if (j < mj) {
            B.push_back({j, mj, r2, even ? r2 : -r2});
        }
    }
    const long dim = static_cast<long>(B.size());
    RMat S(dim, dim);
    for (long j = 0; j < dim; ++j) {
        RVec e = RVec::Zero(n);
        const Pt& pj = B[static_cast<std::size_t>(j)];
        e[pj.a] += pj.wa;
        if (pj.b >= 0) e[pj.b] += pj.wb;
        RVec col = op(e);
        for (long i = 0; i < dim; ++i) {
            const Pt& pi = B[static_cast<std::size_t>(i)];
            S(i, j) = pi.wa * col[pi.a] + (pi.b >= 0 ? pi.wb * col[pi.b] : 0.0);
        }
    }
    return 0.5 * (S + S.transpose());
}

}  // namespace

LplusReport check_lplus(const GroundState& gs, const Nonlinearity& beta, const Grid& grid) {
    LplusReport rep;
    const RVec& phi = gs.phi;
    const long n = phi.size();
    RVec wp(n), wm(n);
    for (long j = 0; j < n; ++j) {
        double s = phi[j] * phi[j];
        wm[j] = gs.omega + beta.beta(s);
        wp[j] = wm[j] + 2.0 * beta.dbeta(s) * s;
    }
    // In the radial case the operator acts on w = x u as -d^2 + omega + W(|x|)
    // on odd functions; its spectrum equals that of the radial operator.
    auto make = [&](const RVec& pot) {
        return [&grid, pot](const RVec& v) -> RVec {
            return (-deriv2(grid, v.cast<cplx>()).real() + (pot.array() * v.array()).matrix()).eval();
        };
    };
    const bool rad = grid.radial();
    RMat Sp = sector_matrix(grid, make(wp), !rad);
    Eigen::SelfAdjointEigenSolver<RMat> es(Sp, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("L+ eigensolve failed");
    RVec ev = es.eigenvalues();
    double radius = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
    rep.kernel_tol = 1e-6 * radius;
    rep.lowest = ev[0];
    for (long i = 0; i < ev.size(); ++i) {
        if (ev[i] < -rep.kernel_tol) ++rep.n_negative;
        if (std::abs(ev[i]) <= rep.kernel_tol) ++rep.kernel_dim_even;
    }
    rep.even_eigenvalues = ev.head(std::min<long>(6, ev.size()));

    RMat Sm = sector_matrix(grid, make(wm), !rad);
    Eigen::SelfAdjointEigenSolver<RMat> esm(Sm, Eigen::EigenvaluesOnly);
    rep.lminus_lowest = esm.eigenvalues()[0];
    auto rel = [&](const RVec& pot, const RVec& f) {
        RVec r = -laplacian(grid, f.cast<cplx>()).real() + (pot.array() * f.array()).matrix();
        return std::sqrt(integrate_real(grid, r.array().square().matrix()) /
                         integrate_real(grid, f.array().square().matrix()));
    };
    rep.lminus_phi_residual = rel(wm, phi);
    if (!rad) {
        RMat So = sector_matrix(grid, make(wp), false);
        Eigen::SelfAdjointEigenSolver<RMat> eso(So, Eigen::EigenvaluesOnly);
        rep.odd_lowest = eso.eigenvalues()[0];
        rep.odd_dphi_residual = rel(wp, deriv(grid, phi.cast<cplx>()).real());
    }
    return rep;
}

void write_family_csv(const SolitonFamily& fam, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path);
    os << "omega,q,e,d,dq,lplus_negative_count\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < fam.samples.size(); ++i) {
        const auto& s = fam.samples[i];
        os << s.omega << ',' << s.q << ',' << s.e << ',' << s.d << ',' << s.dq << ','
           << (i < fam.lplus_negative_count.size() ? fam.lplus_negative_count[i] : -1) << '\n';
    }
}

}  // namespace nls
