#pragma once

#include <vector>

#include "nlslab/groundstate.hpp"

namespace nls {

// Discrete internal mode: H xi = lambda xi, xi real, <xi|sigma3 xi> = 1.
struct Eigenpair {
    double lambda = 0.0;
    CVec xi;
};

// H = sigma3(-Lap + omega) + V with V derived from the second variation of
// E + omega Q at Phi = (phi, phi):
//   H = [[L + a, a], [-a, -(L + a)]],  L = -Lap + omega + beta(phi^2),
//   a = beta'(phi^2) phi^2.
// Vectors are stacked spinors (X1, X2) of length 2n.
class LinearizedOperator {
public:
    static LinearizedOperator assemble(const GroundState& gs, const Nonlinearity& beta, const Grid& grid);
    // V = 0, used as a test operator
    static LinearizedOperator free(const Grid& grid, double omega);

    CVec apply(const CVec& X) const;
    // (sigma3(-Lap + omega) - z)^{-1} r, applied spectrally
    CVec free_inverse(const CVec& r, cplx z) const;

    const Grid& grid() const { return grid_; }
    double omega() const { return omega_; }
    bool is_free() const { return free_; }
    const RVec& phi() const { return phi_; }
    const RVec& dphi() const { return dphi_; }
    const RVec& diag_potential() const { return d_; }  // beta + beta' phi^2
    const RVec& coupling() const { return a_; }        // beta' phi^2
    double q() const { return q_; }
    double dq() const { return dq_; }

    // same operator on a larger centered grid with equal spacing; the
    // potentials are padded by zero
    LinearizedOperator embedded(const Grid& big) const;

    CVec Phi() const;
    // generalized kernel of H: sigma3 Phi, d_omega Phi, then (d=1) d_x Phi, x sigma3 Phi
    std::vector<CVec> kernel() const;
    // generalized kernel of H^*: Phi, sigma3 d_omega Phi, then (d=1) sigma3 d_x Phi, x Phi
    std::vector<CVec> adjoint_kernel() const;

private:
    Grid grid_;
    double omega_ = 0.0;
    bool free_ = false;
    RVec phi_, dphi_, d_, a_;
    double q_ = 0.0, dq_ = 0.0;
};

struct Components {
    double c_phase = 0.0;   // along sigma3 Phi
    double c_scale = 0.0;   // along d_omega Phi
    double c_shift = 0.0;   // along d_x Phi
    double c_boost = 0.0;   // along x sigma3 Phi
    std::vector<cplx> z;     // along xi_j
    std::vector<cplx> zbar;  // along sigma1 xi_j
    CVec f;                  // continuous part
    // complex coefficients before taking real parts (exact for complex X)
    cplx k_phase, k_scale, k_shift, k_boost;
};

Components spectral_project(const LinearizedOperator& H, const std::vector<Eigenpair>& modes, const CVec& X);
CVec apply_pc(const LinearizedOperator& H, const std::vector<Eigenpair>& modes, const CVec& X);
// X rebuilt from its components
CVec reassemble(const LinearizedOperator& H, const std::vector<Eigenpair>& modes, const Components& c);

}  // namespace nls
