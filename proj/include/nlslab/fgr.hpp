#pragma once

#include <string>
#include <vector>

#include "nlslab/resolvent.hpp"
#include "nlslab/spectrum.hpp"

namespace nls {

// nonlinear part of the vector field: F(U) = sigma3 beta(u1 u2) U
CVec nonlinear_field(const Nonlinearity& beta, const CVec& U);

// coefficient of z^alpha in F(Phi + sum_j z_j X_j), by Cauchy sampling on the
// polydisc; exact for polynomial beta
CVec taylor_coefficient(const Nonlinearity& beta, const CVec& Phi, const std::vector<CVec>& X,
                        const std::vector<int>& alpha);

struct Coupling {
    std::vector<int> alpha;  // resonant multi-index, |alpha| = N + 1
    double Lambda = 0.0;     // lambda . alpha
    CVec G;                  // G_{alpha 0} = P_c [z^alpha coefficient]
    CVec G_conj;             // G_{0 alpha} = P_c [conj z^alpha coefficient]
    double skew_residual = 0.0;  // |G_{alpha 0} + sigma1 conj G_{0 alpha}| / |G|
};

// all alpha with |alpha| = N + 1 and lambda . alpha > omega
std::vector<Coupling> leading_couplings(const LinearizedOperator& H, const DiscreteSpectrum& spec,
                                        const Nonlinearity& beta, int N = -1);

struct FgrCoefficient {
    double Gamma = 0.0;
    double uncertainty = 0.0;       // Richardson ladder uncertainty
    double Gamma_far_field = 0.0;   // 2 Lambda k (|A+|^2 + |A-|^2)
    std::vector<double> Lambdas;
    std::vector<std::pair<cplx, cplx>> amplitudes;  // (A+, A-) per coupling
};

FgrCoefficient fgr_coefficient(const std::vector<Coupling>& couplings, const LinearizedOperator& H,
                               const LimitingOptions& opt = {});

// far-field amplitudes A+- of the upper component, u1 ~ A+- exp(ik|x|), averaged
// over L/4 <= |x| <= 5L/8 of the (enlarged) solver grid
std::pair<cplx, cplx> far_field_amplitudes(const Grid& g, double omega, double Lambda, const CVec& x);

struct Nondegeneracy {
    bool nondegenerate = false;
    double margin = 0.0;  // smallest singular value of the amplitude matrix, relative to |G|
    double threshold = 1e-6;
};
Nondegeneracy fgr_nondegeneracy(const std::vector<Coupling>& couplings, const LinearizedOperator& H,
                                const LimitingOptions& opt = {}, double threshold = 1e-6);

struct FgrReport {
    double omega = 0.0;
    int N = 0;
    std::vector<double> lambda;
    std::vector<Coupling> couplings;
    FgrCoefficient coefficient;
    Nondegeneracy nondegeneracy;
    bool semipositive() const { return coefficient.Gamma >= -std::max(1e-10, coefficient.uncertainty); }
};
FgrReport fgr_report(const LinearizedOperator& H, const DiscreteSpectrum& spec, const Nonlinearity& beta,
                     const LimitingOptions& opt = {});
std::string fgr_json(const FgrReport& r, int indent = 2);

struct ModeTrajectory {
    std::vector<double> t;
    std::vector<std::vector<cplx>> zeta;
};
// d zeta_j/dt = -i lambda_j zeta_j - gamma_j |zeta|^{2N} zeta_j, gamma_j = Gamma / (2 lambda_j), RK4
ModeTrajectory reduced_mode_ode(const std::vector<cplx>& zeta0, const std::vector<double>& lambda, double Gamma,
                                int N, double T, double dt, int record_every = 1);

}  // namespace nls
