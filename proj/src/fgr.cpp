#include "nlslab/fgr.hpp"

#include <cmath>
#include <functional>

#include "json.hpp"

namespace nls {

CVec nonlinear_field(const Nonlinearity& beta, const CVec& U) {
    const long n = U.size() / 2;
    CVec out(2 * n);
    for (long j = 0; j < n; ++j) {
        cplx b = beta.beta(U[j] * U[n + j]);
        out[j] = b * U[j];
        out[n + j] = -b * U[n + j];
    }
    return out;
}

CVec taylor_coefficient(const Nonlinearity& beta, const CVec& Phi, const std::vector<CVec>& X,
                        const std::vector<int>& alpha) {
    if (!beta.is_polynomial())
        throw TaylorAssemblyError("Taylor coefficients need a polynomial nonlinearity, got " + beta.descriptor());
    if (alpha.size() != X.size()) throw DataError("multi-index length does not match the directions");
    const std::size_t m = X.size();
    // F(Phi + sum z X) is a polynomial of total degree <= growth exponent
    const int P = beta.growth_exponent() + 1;
    const double rho = 1.0;
    CVec acc = CVec::Zero(Phi.size());
    std::vector<int> idx(m, 0);
    long total = 1;
    for (std::size_t j = 0; j < m; ++j) total *= P;
    for (long t = 0; t < total; ++t) {
        long r = t;
        CVec U = Phi;
        cplx weight = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            idx[j] = static_cast<int>(r % P);
            r /= P;
            cplx z = rho * std::exp(cplx(0.0, 2.0 * kPi * idx[j] / P));
            U += z * X[j];
            weight *= std::pow(z, -alpha[j]);
        }
        acc += weight * nonlinear_field(beta, U);
    }
    return acc / static_cast<double>(total);
}

namespace {

void multi_indices(std::size_t m, int order, std::vector<int>& cur, std::size_t pos, std::vector<std::vector<int>>& out) {
    if (pos + 1 == m) {
        cur[pos] = order;
        out.push_back(cur);
        return;
    }
    for (int a = order; a >= 0; --a) {
        cur[pos] = a;
        multi_indices(m, order - a, cur, pos + 1, out);
    }
}

}  // namespace

std::vector<Coupling> leading_couplings(const LinearizedOperator& H, const DiscreteSpectrum& spec,
                                        const Nonlinearity& beta, int N) {
    if (spec.m() == 0) throw DataError("no discrete modes: nothing couples to radiation");
    if (N < 0) N = spec.N1();
    if (N < 1) throw DataError("N must be at least 1");
    const std::size_t m = spec.m();
    CVec Phi = H.Phi();
    std::vector<CVec> xi, xi_conj;
    for (const auto& e : spec.modes) {
        xi.push_back(e.xi);
        xi_conj.push_back(sigma1(e.xi.conjugate()));
    }
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur(m, 0);
    multi_indices(m, N + 1, cur, 0, alphas);
    std::vector<Coupling> out;
    for (const auto& a : alphas) {
        double Lam = 0.0;
        for (std::size_t j = 0; j < m; ++j) Lam += a[j] * spec.modes[j].lambda;
        if (!(Lam > H.omega())) continue;
        Coupling c;
        c.alpha = a;
        c.Lambda = Lam;
        c.G = apply_pc(H, spec.modes, taylor_coefficient(beta, Phi, xi, a));
        c.G_conj = apply_pc(H, spec.modes, taylor_coefficient(beta, Phi, xi_conj, a));
        double gn = c.G.norm();
        c.skew_residual = gn > 0.0 ? (c.G + sigma1(c.G_conj.conjugate())).norm() / gn : 0.0;
        out.push_back(std::move(c));
    }
    return out;
}

std::pair<cplx, cplx> far_field_amplitudes(const Grid& g, double omega, double Lambda, const CVec& x) {
    if (g.radial()) throw DataError("far-field amplitudes are implemented for d = 1");
    const double k = std::sqrt(Lambda - omega);
    const double L = g.half_length();
    cplx ap = 0.0, am = 0.0;
    int np = 0, nm = 0;
    for (std::size_t j = 0; j < g.n(); ++j) {
        double xx = g.xs()[j];
        if (xx >= 0.25 * L && xx <= 0.625 * L) {
            ap += x[static_cast<long>(j)] * std::exp(cplx(0.0, -k * xx));
            ++np;
        } else if (xx <= -0.25 * L && xx >= -0.625 * L) {
            am += x[static_cast<long>(j)] * std::exp(cplx(0.0, k * xx));
            ++nm;
        }
    }
    return {np ? ap / static_cast<double>(np) : 0.0, nm ? am / static_cast<double>(nm) : 0.0};
}

FgrCoefficient fgr_coefficient(const std::vector<Coupling>& couplings, const LinearizedOperator& H,
                               const LimitingOptions& opt) {
    FgrCoefficient out;
    const Grid& g = H.grid();
    // group couplings by frequency; unit coefficients zeta^alpha = 1
    std::vector<std::pair<double, CVec>> groups;
    for (const auto& c : couplings) {
        if (c.Lambda - H.omega() < 1e-3 * H.omega())
            throw EdgeProximity("resonant frequency too close to the threshold");
        bool merged = false;
        for (auto& [L, S] : groups)
            if (std::abs(L - c.Lambda) <= 1e-12 * L) {
                S += c.G;
                merged = true;
            }
        if (!merged) groups.emplace_back(c.Lambda, c.G);
    }
    for (const auto& [Lam, S] : groups) {
        out.Lambdas.push_back(Lam);
        if (S.norm() == 0.0) {
            out.amplitudes.emplace_back(0.0, 0.0);
            continue;
        }
        auto R = limiting_resolvent(H, Lam, S, opt);
        auto p = limiting_pairing(R, g, sigma3(S.conjugate()));
        out.Gamma += 2.0 * Lam * p.value.imag();
        out.uncertainty += 2.0 * Lam * p.uncertainty;
        auto A = far_field_amplitudes(R.grid_full, H.omega(), Lam, R.x_full);
        out.amplitudes.push_back(A);
        const double k = std::sqrt(Lam - H.omega());
        out.Gamma_far_field += 2.0 * Lam * k * (std::norm(A.first) + std::norm(A.second));
    }
    return out;
}

Nondegeneracy fgr_nondegeneracy(const std::vector<Coupling>& couplings, const LinearizedOperator& H,
                                const LimitingOptions& opt, double threshold) {
    Nondegeneracy out;
    out.threshold = threshold;
    double gnorm = 0.0;
    for (const auto& c : couplings) gnorm = std::max(gnorm, spinor_norm(H.grid(), c.G));
    if (couplings.empty() || gnorm == 0.0) return out;
    // resonant amplitudes of each coupling on the two-point resonant "sphere" k = +-k_Lambda
    CMat A(2, static_cast<long>(couplings.size()));
    for (std::size_t i = 0; i < couplings.size(); ++i) {
        auto R = limiting_resolvent(H, couplings[i].Lambda, couplings[i].G, opt);
        auto a = far_field_amplitudes(R.grid_full, H.omega(), couplings[i].Lambda, R.x_full);
        A(0, static_cast<long>(i)) = a.first;
        A(1, static_cast<long>(i)) = a.second;
    }
    Eigen::JacobiSVD<CMat> svd(A);
    auto sv = svd.singularValues();
    double smin = couplings.size() > 2 ? 0.0 : sv[sv.size() - 1];
    out.margin = smin / gnorm;
    out.nondegenerate = out.margin > threshold;
    return out;
}

FgrReport fgr_report(const LinearizedOperator& H, const DiscreteSpectrum& spec, const Nonlinearity& beta,
                     const LimitingOptions& opt) {
    FgrReport r;
    r.omega = H.omega();
    r.N = spec.N1();
    for (const auto& e : spec.modes) r.lambda.push_back(e.lambda);
    r.couplings = leading_couplings(H, spec, beta);
    r.coefficient = fgr_coefficient(r.couplings, H, opt);
    r.nondegeneracy = fgr_nondegeneracy(r.couplings, H, opt);
    return r;
}

std::string fgr_json(const FgrReport& r, int indent) {
    nlohmann::json j;
    j["omega"] = r.omega;
    j["N"] = r.N;
    j["lambda"] = r.lambda;
    j["Gamma"] = r.coefficient.Gamma;
    j["Gamma_uncertainty"] = r.coefficient.uncertainty;
    j["Gamma_far_field"] = r.coefficient.Gamma_far_field;
    j["Lambda"] = r.coefficient.Lambdas;
    j["semipositive"] = r.semipositive();
    j["nondegenerate"] = r.nondegeneracy.nondegenerate;
    j["nondegeneracy_margin"] = r.nondegeneracy.margin;
    j["resonant_set"] = nlohmann::json::array();
    for (const auto& c : r.couplings)
        j["resonant_set"].push_back({{"alpha", c.alpha}, {"Lambda", c.Lambda}, {"skew_residual", c.skew_residual}});
    if (!r.lambda.empty() && r.N >= 1) {
        // predicted slope of 1/|z|^2 for a single mode with N = 1, and the general rate
        j["gamma_reduced"] = r.coefficient.Gamma / (2.0 * r.lambda.front());
        if (r.N == 1) j["predicted_inverse_square_slope"] = r.coefficient.Gamma / r.lambda.front();
    }
    return j.dump(indent);
}

ModeTrajectory reduced_mode_ode(const std::vector<cplx>& zeta0, const std::vector<double>& lambda, double Gamma,
                                int N, double T, double dt, int record_every) {
    if (zeta0.size() != lambda.size()) throw DataError("zeta0 and lambda differ in length");
    if (!(T >= 0.0) || !(dt > 0.0)) throw DataError("need T >= 0 and dt > 0");
    double lmax = 0.0;
    for (double l : lambda) lmax = std::max(lmax, std::abs(l));
    // at least 100 steps per period of the fastest mode
    if (lmax > 0.0) dt = std::min(dt, 2.0 * kPi / lmax / 100.0);
    const std::size_t m = lambda.size();
    using State = std::vector<cplx>;
    auto rhs = [&](const State& z) {
        double s = 0.0;
        for (const auto& v : z) s += std::norm(v);
        double damp = std::pow(s, N);
        State d(m);
        for (std::size_t j = 0; j < m; ++j) {
            double gam = lambda[j] != 0.0 ? Gamma / (2.0 * lambda[j]) : 0.0;
            d[j] = cplx(0.0, -lambda[j]) * z[j] - gam * damp * z[j];
        }
        return d;
    };
    ModeTrajectory tr;
    State z = zeta0;
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-12));
    const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;
    tr.t.push_back(0.0);
    tr.zeta.push_back(z);
    for (long s = 1; s <= steps; ++s) {
        State k1 = rhs(z), y(m);
        for (std::size_t j = 0; j < m; ++j) y[j] = z[j] + 0.5 * h * k1[j];
        State k2 = rhs(y);
        for (std::size_t j = 0; j < m; ++j) y[j] = z[j] + 0.5 * h * k2[j];
        State k3 = rhs(y);
        for (std::size_t j = 0; j < m; ++j) y[j] = z[j] + h * k3[j];
        State k4 = rhs(y);
        for (std::size_t j = 0; j < m; ++j) z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        if (s % record_every == 0 || s == steps) {
            tr.t.push_back(s * h);
            tr.zeta.push_back(z);
        }
    }
    return tr;
}

}  // namespace nls
