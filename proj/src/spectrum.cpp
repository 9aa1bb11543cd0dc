#include "nlslab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include "json.hpp"
#include "nlslab/krylov.hpp"

namespace nls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double spinor_outer_fraction(const Grid& g, const CVec& X) {
    const long n = static_cast<long>(g.n());
    double total = 0.0, outer = 0.0;
    const double cut = 0.75 * g.half_length();
    for (long j = 0; j < n; ++j) {
        double m = std::norm(X[j]) + std::norm(X[n + j]);
        total += m;
        if (std::abs(g.xs()[j]) > cut) outer += m;
    }
    return total > 0.0 ? outer / total : 0.0;
}

CVec deflate(const LinearizedOperator& H, const CVec& X, bool on) {
    if (!on || H.is_free()) return X;
    return spectral_project(H, {}, X).f;
}

CVec shifted_solve(const LinearizedOperator& H, cplx z, const CVec& b, double tol, int max_iter = 4000) {
    LinOp A = [&](const CVec& v) { CVec r = H.apply(v); r -= z * v; return r; };
    LinOp M = [&](const CVec& v) { return H.free_inverse(v, z); };
    return gmres(A, b, M, tol, 80, max_iter).x;
}

CVec smooth_random(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    const long n = static_cast<long>(g.n());
    const double width = g.half_length() / 4.0;
    CVec v(2 * n);
    for (long j = 0; j < 2 * n; ++j) {
        double x = g.xs()[j % n];
        v[j] = cplx(nd(rng), nd(rng)) * std::exp(-x * x / (width * width));
    }
    return v;
}

// rotate to real, normalize <xi|sigma3 xi> = 1; returns the imaginary remainder
double make_real_and_normalize(const Grid& g, CVec& x) {
    Eigen::Index imax = 0;
    x.cwiseAbs().maxCoeff(&imax);
    x *= std::conj(x[imax]) / std::abs(x[imax]);
    double imag = x.imag().cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff();
    x = x.real().cast<cplx>();
    double s = pair(g, x, sigma3(x)).real();
    x /= std::sqrt(std::abs(s));
    return imag;
}

double rayleigh(const LinearizedOperator& H, const CVec& x, cplx* full = nullptr) {
    const Grid& g = H.grid();
    CVec s3 = sigma3(x);
    cplx den = pair(g, s3, x);
    cplx lam;
    if (std::abs(den) > 1e-12 * x.squaredNorm() * g.h())
        lam = pair(g, s3, H.apply(x)) / den;
    else
        lam = x.dot(H.apply(x)) / x.squaredNorm();
    if (full) *full = lam;
    return lam.real();
}

double eig_residual(const LinearizedOperator& H, const CVec& x, cplx lam) {
    return (H.apply(x) - lam * x).norm() / x.norm();
}

void finalize(const LinearizedOperator& H, std::vector<std::tuple<double, CVec, double, double>>& found,
              DiscreteSpectrum& out, std::size_t max_modes) {
    std::sort(found.begin(), found.end(), [](auto& a, auto& b) { return std::get<0>(a) < std::get<0>(b); });
    for (auto& [lam, x, res, im] : found) {
        if (!out.modes.empty() && std::abs(out.modes.back().lambda - lam) <= 1e-6 * H.omega()) {
            if (res < out.residuals.back()) {
                out.modes.back() = {lam, x};
                out.residuals.back() = res;
                out.imag_parts.back() = im;
            }
            continue;
        }
        if (out.modes.size() >= max_modes) break;
        out.modes.push_back({lam, x});
        out.residuals.push_back(res);
        out.imag_parts.push_back(im);
    }
    for (const auto& m : out.modes) out.N.push_back(threshold_order(m.lambda, H.omega()));
}

}  // namespace

int threshold_order(double lambda, double omega) {
    if (lambda <= 0.0) return 0;
    double r = omega / lambda;
    double f = std::floor(r);
    if (std::abs(r - std::round(r)) <= 1e-12 * r) return 0;
    return static_cast<int>(f);
}

DiscreteSpectrum discrete_spectrum(const LinearizedOperator& H, SearchWindow window, std::size_t max_modes,
                                   const ArnoldiOptions& opt) {
    const Grid& g = H.grid();
    const double w = H.omega();
    const double lo = window.lo * w, hi = window.hi * w;
    DiscreteSpectrum out;
    out.omega = w;
    std::vector<std::tuple<double, CVec, double, double>> found;
    std::vector<double> seen;

    for (int s = 0; s < opt.shifts; ++s) {
        const double sigma = lo + (hi - lo) * (s + 0.5) / opt.shifts;
        const int m = opt.krylov_dim;
        CMat V = CMat::Zero(2 * static_cast<long>(g.n()), m + 1);
        CMat Hm = CMat::Zero(m + 1, m);
        CVec v0 = deflate(H, smooth_random(g, 17u + static_cast<unsigned>(s)), opt.deflate);
        V.col(0) = v0 / v0.norm();
        int k = 0;
        for (; k < m; ++k) {
            CVec wv = deflate(H, shifted_solve(H, sigma, V.col(k), opt.inner_tol), opt.deflate);
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= k; ++i) {
                    cplx c = V.col(i).dot(wv);
                    Hm(i, k) += c;
                    wv -= c * V.col(i);
                }
            double nrm = wv.norm();
            Hm(k + 1, k) = nrm;
            if (nrm < 1e-13) { ++k; break; }
            V.col(k + 1) = wv / nrm;
        }
        Eigen::ComplexEigenSolver<CMat> es(Hm.topLeftCorner(k, k));
        for (int i = 0; i < k; ++i) {
            cplx theta = es.eigenvalues()[i];
            if (std::abs(theta) < 1e-14) continue;
            cplx lam = sigma + 1.0 / theta;
            if (lam.real() <= lo || lam.real() >= hi) continue;
            if (std::abs(lam.imag()) > 1e-3 * w) continue;
            bool dup = false;
            for (double sv : seen) dup = dup || std::abs(sv - lam.real()) <= 1e-4 * w;
            if (dup) continue;
            CVec x = V.leftCols(k) * es.eigenvectors().col(i);
            // continuum Ritz vectors are already visibly spread out
            if (spinor_outer_fraction(g, x) > 1e-3) continue;
            // inverse iteration slightly off the Ritz value
            const double mu = lam.real() - 1e-4 * w;
            for (int it = 0; it < 5; ++it) {
                CVec y = deflate(H, shifted_solve(H, mu, x, 1e-10, 400), opt.deflate);
                x = y / y.norm();
            }
            cplx full;
            rayleigh(H, x, &full);
            if (full.real() <= lo || full.real() >= hi) continue;
            seen.push_back(full.real());
            if (std::abs(full.imag()) > opt.imag_tol * std::max(1.0, w)) continue;
            if (spinor_outer_fraction(g, x) > opt.decay_tol) continue;
            double im = make_real_and_normalize(g, x);
            double lr = rayleigh(H, x);
            double res = eig_residual(H, x, lr);
            if (res > opt.accept_residual * std::max(1.0, w)) continue;
            found.emplace_back(lr, x, res, std::max(im, std::abs(full.imag())));
        }
    }
    finalize(H, found, out, max_modes);
    return out;
}

DiscreteSpectrum track_modes(const LinearizedOperator& H, const std::vector<Eigenpair>& previous,
                             double accept_residual) {
    const double w = H.omega();
    DiscreteSpectrum out;
    out.omega = w;
    std::vector<std::tuple<double, CVec, double, double>> found;
    for (const auto& p : previous) {
        CVec x = p.xi;
        double mu = p.lambda;
        for (int it = 0; it < 6; ++it) {
            CVec y = deflate(H, shifted_solve(H, mu - 1e-4 * w, x, 1e-10, 400), true);
            x = y / y.norm();
            mu = rayleigh(H, x);
        }
        cplx full;
        rayleigh(H, x, &full);
        double im = make_real_and_normalize(H.grid(), x);
        // keep the sign of the previous mode
        if (pair(H.grid(), x, sigma3(p.xi)).real() < 0.0) x = -x;
        double lr = rayleigh(H, x);
        double res = eig_residual(H, x, lr);
        if (res > accept_residual * std::max(1.0, w))
            throw ConvergenceError("mode tracking lost lambda = " + std::to_string(p.lambda) + ", residual " +
                                   std::to_string(res) + " at omega " + std::to_string(w));
        found.emplace_back(lr, x, res, std::max(im, std::abs(full.imag())));
    }
    finalize(H, found, out, previous.size());
    return out;
}

DiscreteSpectrum dense_spectrum(const LinearizedOperator& H, SearchWindow window, double decay_tol) {
    const Grid& g = H.grid();
    const long n = static_cast<long>(g.n());
    if (n > 512) throw DataError("dense oracle is limited to n <= 512");
    RMat M(2 * n, 2 * n);
    for (long j = 0; j < 2 * n; ++j) {
        CVec e = CVec::Zero(2 * n);
        e[j] = 1.0;
        M.col(j) = H.apply(e).real();
    }
    // eigenvalues by LAPACK dgeev (much faster than the Eigen nonsymmetric solver here)
    RMat work = M;
    std::vector<double> wr(2 * n), wi(2 * n);
    int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', static_cast<int>(2 * n), work.data(), static_cast<int>(2 * n),
                             wr.data(), wi.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw ConvergenceError("dgeev failed, info = " + std::to_string(info));
    const double w = H.omega();
    std::vector<std::tuple<double, CVec, double, double>> found;
    for (long i = 0; i < 2 * n; ++i) {
        cplx lam(wr[i], wi[i]);
        if (lam.real() <= window.lo * w || lam.real() >= window.hi * w) continue;
        if (std::abs(lam.imag()) > 1e-8) continue;
        // eigenvector by dense inverse iteration at the computed eigenvalue
        RMat S = M - (lam.real() * (1.0 + 1e-12)) * RMat::Identity(2 * n, 2 * n);
        Eigen::PartialPivLU<RMat> lu(S);
        RVec v = RVec::Ones(2 * n);
        for (int it = 0; it < 3; ++it) {
            v = lu.solve(v);
            v /= v.norm();
        }
        CVec x = v.cast<cplx>();
        if (spinor_outer_fraction(g, x) > decay_tol) continue;
        double im = make_real_and_normalize(g, x);
        double lr = rayleigh(H, x);
        found.emplace_back(lr, x, eig_residual(H, x, lr), im);
    }
    DiscreteSpectrum out;
    out.omega = w;
    finalize(H, found, out, 64);
    return out;
}

RMat biorthogonality(const LinearizedOperator& H, const DiscreteSpectrum& s) {
    const long m = static_cast<long>(s.m());
    RMat B(m, m);
    for (long j = 0; j < m; ++j)
        for (long l = 0; l < m; ++l)
            B(j, l) = pair(H.grid(), sigma3(s.modes[j].xi), s.modes[l].xi.conjugate()).real();
    return B;
}

double mirror_residual(const LinearizedOperator& H, const Eigenpair& e) {
    CVec y = sigma1(e.xi.conjugate());
    return (H.apply(y) + e.lambda * y).norm() / y.norm();
}

std::vector<double> embedded_scan(const LinearizedOperator& H, int shifts, double decay_tol) {
    const Grid& g = H.grid();
    const double w = H.omega();
    const double top = g.kmax() * g.kmax() + w;
    std::vector<double> out;
    const int m = 30;
    for (int s = 0; s < shifts; ++s) {
        // geometric sweep of (omega, kmax^2 + omega)
        double sigma = w + (top - w) * std::pow(1e-3, 1.0 - (s + 0.5) / shifts);
        cplx z(sigma, 0.05 * (sigma - w));
        CMat V = CMat::Zero(2 * static_cast<long>(g.n()), m + 1);
        CMat Hm = CMat::Zero(m + 1, m);
        CVec v0 = deflate(H, smooth_random(g, 101u + static_cast<unsigned>(s)), true);
        V.col(0) = v0 / v0.norm();
        int k = 0;
        for (; k < m; ++k) {
            CVec wv = deflate(H, shifted_solve(H, z, V.col(k), 1e-10), true);
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= k; ++i) {
                    cplx c = V.col(i).dot(wv);
                    Hm(i, k) += c;
                    wv -= c * V.col(i);
                }
            double nrm = wv.norm();
            Hm(k + 1, k) = nrm;
            if (nrm < 1e-13) { ++k; break; }
            V.col(k + 1) = wv / nrm;
        }
        Eigen::ComplexEigenSolver<CMat> es(Hm.topLeftCorner(k, k));
        for (int i = 0; i < k; ++i) {
            cplx theta = es.eigenvalues()[i];
            if (std::abs(theta) < 1e-14) continue;
            cplx lam = z + 1.0 / theta;
            if (lam.real() <= w * 1.0001) continue;
            if (std::abs(lam.imag()) > 1e-8 * std::max(1.0, lam.real())) continue;
            CVec x = V.leftCols(k) * es.eigenvectors().col(i);
            if (eig_residual(H, x, lam) > 1e-6 * std::max(1.0, lam.real())) continue;
            if (spinor_outer_fraction(g, x) > decay_tol) continue;
            out.push_back(lam.real());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool HypothesisReport::all() const {
    return h4.holds && (!h5 || h5->holds) && h6.holds && h7.holds && h8.holds && h9.holds;
}

namespace {

// all mu in Z^m with 0 < |mu|_1 <= K
void enumerate(const std::vector<double>& lam, int K, std::size_t idx, int used, double acc, bool nonzero,
               const std::function<void(double)>& f) {
    if (idx == lam.size()) {
        if (nonzero) f(acc);
        return;
    }
    for (int mu = -(K - used); mu <= K - used; ++mu)
        enumerate(lam, K, idx + 1, used + std::abs(mu), acc + mu * lam[idx], nonzero || mu != 0, f);
}

}  // namespace

HypothesisReport check_hypotheses(const DiscreteSpectrum& spec, const LinearizedOperator& H,
                                  const HypothesisOptions& opt, const LinearizedOperator* second_resolution,
                                  const DiscreteSpectrum* second_spectrum) {
    HypothesisReport r;
    r.omega = spec.omega;
    const double w = spec.omega;
    r.h4 = {H.dq() > 0.0, H.dq(), 0.0, "q'(omega) > 0"};
    std::vector<double> lam;
    for (std::size_t j = 0; j < spec.m(); ++j) {
        lam.push_back(spec.modes[j].lambda);
        r.modes.emplace_back(spec.modes[j].lambda, spec.N[j]);
    }
    double h6w = kInf;
    for (std::size_t j = 0; j < lam.size(); ++j) {
        int N = spec.N[j];
        double gap = N >= 1 ? std::min(w - N * lam[j], (N + 1) * lam[j] - w) : 0.0;
        h6w = std::min(h6w, gap);
    }
    r.h6 = {h6w > opt.resonance_tol, h6w, opt.resonance_tol, "N_j lambda_j < omega < (N_j + 1) lambda_j"};
    // N_1 taken as floor(omega / lambda_1) so that an exact resonance is still enumerated
    const int N1 = lam.empty() ? 0 : static_cast<int>(std::floor(w / lam.front()));
    r.max_order = opt.max_order >= 0 ? opt.max_order : 2 * N1 + 3;
    double m7 = kInf, m8 = kInf;
    if (!lam.empty())
        enumerate(lam, r.max_order, 0, 0, 0.0, false, [&](double s) {
            m7 = std::min(m7, std::abs(s - w));
            m8 = std::min(m8, std::abs(s));
        });
    r.h7 = {m7 > opt.resonance_tol, m7, opt.resonance_tol, "no mu with |mu| <= 2N+3 and mu.lambda = omega"};
    r.h8 = {m8 > opt.resonance_tol, m8, opt.resonance_tol, "mu.lambda = 0 only for mu = 0"};
    r.h9 = {true, 0.0, 1e-6, "no decaying eigenvector above omega"};
    if (opt.scan_embedded) {
        r.embedded_found = embedded_scan(H, opt.embedded_shifts);
        bool both = !r.embedded_found.empty();
        if (second_resolution) {
            auto e2 = embedded_scan(*second_resolution, opt.embedded_shifts);
            // falsified only when the eigenvalue persists at both resolutions
            both = false;
            for (double a : r.embedded_found)
                for (double b : e2) both = both || std::abs(a - b) <= 1e-4 * std::max(1.0, a);
        }
        r.h9.holds = !both;
        r.h9.witness = static_cast<double>(r.embedded_found.size());
    } else {
        r.h9.note = "embedded scan skipped";
    }
    if (second_spectrum) {
        if (second_spectrum->m() != spec.m()) {
            r.grid_drift = kInf;
        } else {
            r.grid_drift = 0.0;
            for (std::size_t j = 0; j < spec.m(); ++j)
                r.grid_drift = std::max(r.grid_drift, std::abs(spec.modes[j].lambda - second_spectrum->modes[j].lambda));
        }
    }
    return r;
}

Analysis analyze(const Nonlinearity& beta, double omega, const Grid& grid, bool refine_check,
                 const HypothesisOptions& opt) {
    Analysis a;
    a.gs = ground_state_entry(beta, omega, grid);
    a.H = LinearizedOperator::assemble(a.gs, beta, grid);
    a.spectrum = discrete_spectrum(a.H);
    if (refine_check) {
        Grid g2(grid.dim(), 2 * grid.n(), grid.half_length());
        auto gs2 = ground_state_entry(beta, omega, g2);
        auto H2 = LinearizedOperator::assemble(gs2, beta, g2);
        auto s2 = discrete_spectrum(H2);
        a.report = check_hypotheses(a.spectrum, a.H, opt, &H2, &s2);
    } else {
        a.report = check_hypotheses(a.spectrum, a.H, opt);
    }
    auto lp = check_lplus(a.gs, beta, grid);
    a.report.h5 = Verdict{lp.n_negative == 1 && lp.kernel_dim_even == 0, static_cast<double>(lp.n_negative),
                          lp.kernel_tol, "L+ has one negative eigenvalue and trivial even kernel"};
    return a;
}

namespace {

nlohmann::json num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

nlohmann::json verdict(const Verdict& v) {
    return {{"holds", v.holds}, {"witness", num(v.witness)}, {"tolerance", v.tolerance}, {"condition", v.note}};
}

}  // namespace

std::string report_json(const HypothesisReport& r, int indent) {
    nlohmann::json j;
    j["omega"] = r.omega;
    j["H4"] = verdict(r.h4);
    if (r.h5) j["H5"] = verdict(*r.h5);
    j["H6"] = verdict(r.h6);
    j["H6"]["modes"] = nlohmann::json::array();
    for (auto& [l, N] : r.modes) j["H6"]["modes"].push_back({{"lambda", l}, {"N", N}});
    j["H7"] = verdict(r.h7);
    j["H7"]["max_order"] = r.max_order;
    j["H8"] = verdict(r.h8);
    j["H9"] = verdict(r.h9);
    j["H9"]["embedded_found"] = r.embedded_found;
    j["grid_drift"] = r.grid_drift < 0 ? nlohmann::json(nullptr) : num(r.grid_drift);
    j["all_hold"] = r.all();
    return j.dump(indent);
}

}  // namespace nls
