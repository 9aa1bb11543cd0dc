#pragma once

#include <map>
#include <vector>

#include "nlslab/linearize.hpp"

namespace nls {

// (H - z)^{-1} rhs by GMRES preconditioned with the spectrally inverted free
// operator. With project = true every preconditioned vector is pushed back
// into the range of P_c (needed for real z inside the gap).
CVec resolvent_apply(const LinearizedOperator& H, cplx z, const CVec& rhs, double tol = 1e-10,
                     const std::vector<Eigenpair>* project_modes = nullptr);

struct LimitingOptions {
    double eps0 = 0.0;          // 0: derived from the grid, see default_eps0
    double eps0_factor = 0.05;  // eps0 = factor * (pi / L) * 2 k_Lambda
    double cap_strength = 0.0;  // 0: default_cap_strength
    double tol = 1e-10;         // GMRES tolerance per ladder rung
    double ladder_tol = 1e-3;   // relative weighted-norm uncertainty accepted
    int max_enlargements = 2;       // extra doublings when the ladder fails
    double cap_wavelengths = 4.0;   // domain doubled until the layer spans this many wavelengths
    int fd_order = 4;           // order of the banded finite-difference preconditioner
};

struct LimitingResult {
    CVec x;                       // extrapolated (H - Lambda - i0)^{-1} rhs on the caller's grid
    Grid grid_full;               // enlarged grid actually used
    CVec x_full;                  // extrapolated solution on grid_full
    std::vector<double> eps;      // eps0, 2 eps0, 4 eps0
    std::vector<CVec> ladder;     // solutions on the ladder
    double uncertainty = 0.0;     // |x - (2 x_1 - x_2)|_{2,-2}
    double relative_uncertainty = 0.0;
    bool monotone = false;        // ladder distances to the extrapolant decrease with eps
    bool converged = false;
    int enlargements = 0;
    int iterations = 0;
};

// outgoing limiting resolvent (H - Lambda - i0)^{-1} at Lambda > omega, with a
// complex absorbing layer of width L/8 and Richardson extrapolation in eps
LimitingResult limiting_resolvent(const LinearizedOperator& H, double Lambda, const CVec& rhs,
                                  const LimitingOptions& opt = {});
// linear functional <R^+(Lambda) rhs | w> extrapolated from the same ladder, with its uncertainty
struct ScalarLimit {
    cplx value;
    double uncertainty = 0.0;
};
ScalarLimit limiting_pairing(const LimitingResult& r, const Grid& g, const CVec& w);

double default_eps0(const Grid& g, double omega, double Lambda, double factor = 0.05);
double default_cap_strength(double omega, double Lambda);
// quartic ramp over the outer L/8 of each side
RVec absorbing_profile(const Grid& g, double strength);

// domain of twice the length, same spacing, potentials padded by zero
LinearizedOperator enlarge(const LinearizedOperator& H);
CVec embed_centered(const Grid& small, const Grid& big, const CVec& X);
CVec restrict_centered(const Grid& small, const Grid& big, const CVec& X);

// ---- normal-form bookkeeping ----

struct MonomialKey {
    std::vector<int> mu, nu;
    int f_degree = 0;
    bool operator<(const MonomialKey& o) const;
    int order() const;  // |mu| + |nu|
};

enum class MonomialClass { NormalFormZ0, NormalFormZ1, Removable };
const char* to_string(MonomialClass c);

MonomialClass classify_monomial(const MonomialKey& key, const std::vector<double>& lambda, double omega0);
// lambda . (mu - nu)
double key_frequency(const MonomialKey& key, const std::vector<double>& lambda);

struct HomologicalSolution {
    std::map<MonomialKey, cplx> b;
    std::map<MonomialKey, CVec> B;
    std::map<MonomialKey, double> residual;  // |(H - lambda.(mu - nu)) B + i K| / |K|
};

// b = i k / (lambda . (mu - nu)), B = -i R_H(lambda . (mu - nu)) K, leading order
HomologicalSolution solve_homological(const std::vector<double>& lambda, const std::map<MonomialKey, cplx>& k,
                                      const std::map<MonomialKey, CVec>& K, const LinearizedOperator& H,
                                      const std::vector<Eigenpair>& modes, double edge_margin = 1e-3);

}  // namespace nls
