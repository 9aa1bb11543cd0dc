#include "nlslab/resolvent.hpp"

#include <cmath>
#include <numeric>

#include <lapacke.h>

#include "nlslab/krylov.hpp"

namespace nls {

CVec resolvent_apply(const LinearizedOperator& H, cplx z, const CVec& rhs, double tol,
                     const std::vector<Eigenpair>* project_modes) {
    if (rhs.size() != 2 * static_cast<long>(H.grid().n())) throw DataError("rhs does not match the operator grid");
    if (rhs.norm() == 0.0) return CVec::Zero(rhs.size());
    LinOp A = [&](const CVec& v) { CVec r = H.apply(v); r -= z * v; return r; };
    LinOp M = [&](const CVec& v) {
        CVec y = H.free_inverse(v, z);
        return project_modes ? apply_pc(H, *project_modes, y) : y;
    };
    auto res = gmres(A, rhs, M, tol, 80, 4000);
    if (!res.converged)
        throw ConvergenceError("resolvent solve stagnated at relative residual " + std::to_string(res.rel_residual));
    return res.x;
}

double default_eps0(const Grid& g, double omega, double Lambda, double factor) {
    double k = std::sqrt(std::max(Lambda - omega, 0.0));
    // level spacing of the discretized continuum times the group velocity 2k
    return factor * (kPi / g.half_length()) * 2.0 * std::max(k, 1e-3);
}

double default_cap_strength(double omega, double Lambda) {
    // calibrated on the free outgoing Green's function: 4 k^2 minimizes the
    // reflection of the quartic layer
    return 4.0 * std::max(Lambda - omega, 0.05);
}

RVec absorbing_profile(const Grid& g, double strength) {
    const double L = g.half_length(), w = L / 8.0;
    RVec W = RVec::Zero(static_cast<long>(g.n()));
    for (std::size_t j = 0; j < g.n(); ++j) {
        double s = (std::abs(g.xs()[j]) - (L - w)) / w;
        if (s > 0.0) W[static_cast<long>(j)] = strength * s * s * s * s;
    }
    return W;
}

LinearizedOperator enlarge(const LinearizedOperator& H) {
    const Grid& g = H.grid();
    return H.embedded(Grid(g.dim(), 2 * g.n(), 2.0 * g.half_length()));
}

CVec embed_centered(const Grid& small, const Grid& big, const CVec& X) {
    const long n = static_cast<long>(small.n()), N = static_cast<long>(big.n()), off = (N - n) / 2;
    CVec out = CVec::Zero(2 * N);
    out.segment(off, n) = X.head(n);
    out.segment(N + off, n) = X.tail(n);
    return out;
}

CVec restrict_centered(const Grid& small, const Grid& big, const CVec& X) {
    const long n = static_cast<long>(small.n()), N = static_cast<long>(big.n()), off = (N - n) / 2;
    CVec out(2 * n);
    out.head(n) = X.segment(off, n);
    out.tail(n) = X.segment(N + off, n);
    return out;
}

namespace {

// Banded finite-difference copy of H - z - i W in interleaved ordering
// (u1_0, u2_0, u1_1, ...), LU-factorized once by LAPACK.
class BandedPreconditioner {
public:
    BandedPreconditioner(const LinearizedOperator& H, cplx z, const RVec& W, int order) : n_(static_cast<long>(H.grid().n())) {
        const Grid& g = H.grid();
        std::vector<double> c;  // centered stencil of d^2/dx^2 times h^2
        if (order <= 2) c = {1.0, -2.0, 1.0};
        else if (order <= 4) c = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
        else c = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
        const int r = static_cast<int>(c.size()) / 2;
        kl_ = ku_ = 2 * r + 1;
        ldab_ = 2 * kl_ + ku_ + 1;
        const long N = 2 * n_;
        ab_.assign(static_cast<std::size_t>(ldab_ * N), cplx(0.0));
        ipiv_.resize(static_cast<std::size_t>(N));
        const double h2 = g.h() * g.h();
        auto set = [&](long i, long j, cplx v) { ab_[static_cast<std::size_t>(j * ldab_ + kl_ + ku_ + i - j)] += v; };
        for (long j = 0; j < n_; ++j) {
            const double xj = g.xs()[j];
            for (int s = -r; s <= r; ++s) {
                long m = j + s;
                if (m < 0 || m >= n_) continue;
                // -Lap: -(x u)''/x in radial form
                double coef = -c[static_cast<std::size_t>(s + r)] / h2;
                if (g.radial()) coef *= g.xs()[m] / xj;
                set(2 * j, 2 * m, coef);
                set(2 * j + 1, 2 * m + 1, -coef);
            }
            const double d = H.omega() + H.diag_potential()[j], a = H.coupling()[j];
            set(2 * j, 2 * j, d - z - cplx(0.0, W[j]));
            set(2 * j, 2 * j + 1, a);
            set(2 * j + 1, 2 * j, -a);
            set(2 * j + 1, 2 * j + 1, -d - z - cplx(0.0, W[j]));
        }
        int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, static_cast<int>(N), static_cast<int>(N), kl_, ku_,
                                  reinterpret_cast<lapack_complex_double*>(ab_.data()), ldab_, ipiv_.data());
        if (info < 0) throw ConvergenceError("banded factorization failed");
    }

    CVec solve(const CVec& v) const {
        CVec b(2 * n_);
        for (long j = 0; j < n_; ++j) {
            b[2 * j] = v[j];
            b[2 * j + 1] = v[n_ + j];
        }
        LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<int>(2 * n_), kl_, ku_, 1,
                       reinterpret_cast<const lapack_complex_double*>(ab_.data()), ldab_, ipiv_.data(),
                       reinterpret_cast<lapack_complex_double*>(b.data()), static_cast<int>(2 * n_));
        CVec out(2 * n_);
        for (long j = 0; j < n_; ++j) {
            out[j] = b[2 * j];
            out[n_ + j] = b[2 * j + 1];
        }
        return out;
    }

private:
    long n_;
    int kl_ = 0, ku_ = 0, ldab_ = 0;
    std::vector<cplx> ab_;
    std::vector<lapack_int> ipiv_;
};

CVec absorbing_solve(const LinearizedOperator& H, cplx z, const RVec& W, const CVec& rhs, const LimitingOptions& opt,
                     int* iterations) {
    const long n = static_cast<long>(H.grid().n());
    BandedPreconditioner P(H, z, W, opt.fd_order);
    LinOp A = [&](const CVec& v) {
        CVec r = H.apply(v);
        r -= z * v;
        for (long j = 0; j < n; ++j) {
            r[j] -= cplx(0.0, W[j]) * v[j];
            r[n + j] -= cplx(0.0, W[j]) * v[n + j];
        }
        return r;
    };
    LinOp M = [&](const CVec& v) { return P.solve(v); };
    auto res = gmres(A, rhs, M, opt.tol, 60, 3000);
    if (iterations) *iterations += res.iterations;
    if (!res.converged && res.rel_residual > 1e3 * opt.tol)
        throw ConvergenceError("absorbing resolvent solve stagnated at " + std::to_string(res.rel_residual));
    return res.x;
}

}  // namespace

LimitingResult limiting_resolvent(const LinearizedOperator& H, double Lambda, const CVec& rhs,
                                  const LimitingOptions& opt) {
    const Grid& g0 = H.grid();
    if (rhs.size() != 2 * static_cast<long>(g0.n())) throw DataError("rhs does not match the operator grid");
    if (!(Lambda > H.omega())) throw DataError("limiting resolvent needs Lambda above the threshold omega");
    LimitingResult out;
    if (rhs.norm() == 0.0) {
        out.x = CVec::Zero(rhs.size());
        out.grid_full = g0;
        out.x_full = out.x;
        out.converged = out.monotone = true;
        return out;
    }
    LinearizedOperator Hc = H;
    CVec b = rhs;
    // a thin layer reflects: grow the domain until L/8 covers enough wavelengths
    const double wavelength = 2.0 * kPi / std::sqrt(Lambda - H.omega());
    int grown = 0;
    while (Hc.grid().half_length() / 8.0 < opt.cap_wavelengths * wavelength) {
        CVec big = embed_centered(Hc.grid(), Grid(Hc.grid().dim(), 2 * Hc.grid().n(), 2.0 * Hc.grid().half_length()), b);
        Hc = enlarge(Hc);
        b = big;
        ++grown;
    }
    for (int attempt = 0;; ++attempt) {
        const Grid& g = Hc.grid();
        double e0 = opt.eps0 > 0.0 ? opt.eps0 * std::pow(0.5, attempt)
                                   : default_eps0(g, Hc.omega(), Lambda, opt.eps0_factor);
        double s = opt.cap_strength > 0.0 ? opt.cap_strength : default_cap_strength(Hc.omega(), Lambda);
        RVec W = absorbing_profile(g, s);
        out.eps = {e0, 2.0 * e0, 4.0 * e0};
        out.ladder.clear();
        out.iterations = 0;
        for (double e : out.eps) out.ladder.push_back(absorbing_solve(Hc, cplx(Lambda, e), W, b, opt, &out.iterations));
        const CVec& x1 = out.ladder[0];
        const CVec& x2 = out.ladder[1];
        const CVec& x4 = out.ladder[2];
        CVec x0 = (8.0 / 3.0) * x1 - 2.0 * x2 + (1.0 / 3.0) * x4;
        out.uncertainty = weighted_norm(g, x0 - (2.0 * x1 - x2), 2.0);
        double scale = weighted_norm(g, x0, 2.0);
        out.relative_uncertainty = scale > 0.0 ? out.uncertainty / scale : 0.0;
        double d1 = weighted_norm(g, x1 - x0, 2.0), d2 = weighted_norm(g, x2 - x0, 2.0),
               d4 = weighted_norm(g, x4 - x0, 2.0);
        out.monotone = d1 <= d2 && d2 <= d4;
        out.converged = out.monotone && out.relative_uncertainty <= opt.ladder_tol;
        out.enlargements = attempt + grown;
        if (out.converged || attempt >= opt.max_enlargements) {
            out.grid_full = g;
            out.x_full = x0;
            if (out.enlargements > 0) {
                for (auto& v : out.ladder) v = restrict_centered(g0, g, v);
                x0 = restrict_centered(g0, g, x0);
            }
            out.x = x0;
            break;
        }
        Hc = enlarge(Hc);
        b = embed_centered(g, Hc.grid(), b);
    }
    if (!out.converged)
        throw ConvergenceError("limiting-absorption ladder did not converge (relative uncertainty " +
                               std::to_string(out.relative_uncertainty) + ")");
    return out;
}

ScalarLimit limiting_pairing(const LimitingResult& r, const Grid& g, const CVec& w) {
    if (r.ladder.size() != 3) return {pair(g, r.x, w), 0.0};
    cplx v1 = pair(g, r.ladder[0], w), v2 = pair(g, r.ladder[1], w), v4 = pair(g, r.ladder[2], w);
    cplx v0 = (8.0 / 3.0) * v1 - 2.0 * v2 + (1.0 / 3.0) * v4;
    return {v0, std::abs(v0 - (2.0 * v1 - v2))};
}

// ---- normal-form bookkeeping ----

bool MonomialKey::operator<(const MonomialKey& o) const {
    if (f_degree != o.f_degree) return f_degree < o.f_degree;
    if (mu != o.mu) return mu < o.mu;
    return nu < o.nu;
}

int MonomialKey::order() const {
    return std::accumulate(mu.begin(), mu.end(), 0) + std::accumulate(nu.begin(), nu.end(), 0);
}

const char* to_string(MonomialClass c) {
    switch (c) {
        case MonomialClass::NormalFormZ0: return "NormalForm-Z0";
        case MonomialClass::NormalFormZ1: return "NormalForm-Z1";
        default: return "Removable";
    }
}

double key_frequency(const MonomialKey& key, const std::vector<double>& lambda) {
    if (key.mu.size() != lambda.size() || key.nu.size() != lambda.size())
        throw DataError("multi-index length does not match the number of modes");
    double s = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) s += lambda[j] * (key.mu[j] - key.nu[j]);
    return s;
}

MonomialClass classify_monomial(const MonomialKey& key, const std::vector<double>& lambda, double omega0) {
    for (int v : key.mu) if (v < 0) throw DataError("negative multi-index entry");
    for (int v : key.nu) if (v < 0) throw DataError("negative multi-index entry");
    if (key.order() < 1 && key.f_degree == 0) throw DataError("monomial of order zero");
    for (double l : lambda) if (!(l > 0.0)) throw DataError("eigenvalues must be positive");
    double s = key_frequency(key, lambda);
    if (key.f_degree == 0) return std::abs(s) <= 1e-12 ? MonomialClass::NormalFormZ0 : MonomialClass::Removable;
    return std::abs(s) > omega0 ? MonomialClass::NormalFormZ1 : MonomialClass::Removable;
}

HomologicalSolution solve_homological(const std::vector<double>& lambda, const std::map<MonomialKey, cplx>& k,
                                      const std::map<MonomialKey, CVec>& K, const LinearizedOperator& H,
                                      const std::vector<Eigenpair>& modes, double edge_margin) {
    HomologicalSolution sol;
    const double w = H.omega();
    for (const auto& [key, kv] : k) {
        if (key.f_degree != 0) throw DataError("scalar coefficient supplied for an f-linear key");
        if (classify_monomial(key, lambda, w) != MonomialClass::Removable)
            throw ContractViolation("normal-form key supplied to the homological solver");
        sol.b[key] = cplx(0.0, 1.0) * kv / key_frequency(key, lambda);
    }
    for (const auto& [key, Kv] : K) {
        if (key.f_degree != 1) throw DataError("field coefficient supplied for a scalar key");
        if (classify_monomial(key, lambda, w) != MonomialClass::Removable)
            throw ContractViolation("normal-form key supplied to the homological solver");
        double z = key_frequency(key, lambda);
        if (std::abs(std::abs(z) - w) < edge_margin * w)
            throw EdgeProximity("lambda.(mu - nu) = " + std::to_string(z) + " is at the continuum edge");
        double kn = Kv.norm();
        if (kn == 0.0) {
            sol.B[key] = CVec::Zero(Kv.size());
            sol.residual[key] = 0.0;
            continue;
        }
        CVec Kc = apply_pc(H, modes, Kv);
        CVec B = resolvent_apply(H, z, cplx(0.0, -1.0) * Kc, 1e-11);
        B = apply_pc(H, modes, B);
        CVec r = H.apply(B) - z * B + cplx(0.0, 1.0) * Kc;
        sol.residual[key] = r.norm() / Kc.norm();
        sol.B[key] = B;
    }
    return sol;
}

}  // namespace nls
