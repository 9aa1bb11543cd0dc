#pragma once

#include <vector>

#include "nlslab/field.hpp"

namespace nls {

struct NewtonStats {
    std::vector<double> residuals;  // relative stationary residual per Newton iterate
    int petviashvili_steps = 0;
};

// Solves -Lap(phi) + omega phi + beta(phi^2) phi = 0 for the positive, even
// ground state (the critical-point equation of E + omega Q).
RVec solve_ground_state(const Nonlinearity& beta, double omega, const Grid& grid, double tol = 1e-11,
                        const RVec* guess = nullptr, NewtonStats* stats = nullptr);

// relative residual |Lap(phi) - omega phi - beta(phi^2) phi| / |phi|
double stationary_residual(const Nonlinearity& beta, double omega, const Grid& grid, const RVec& phi);

struct GroundState {
    double omega = 0.0;
    RVec phi;
    RVec dphi;   // d phi / d omega, centered difference
    double q = 0.0, e = 0.0, d = 0.0;
    double dq = 0.0;       // q'(omega), centered difference of q
    double dd = 0.0;       // d'(omega), centered difference of d
    double step = 0.0;     // omega step used for the differences
    bool has_derivative() const { return dphi.size() == phi.size() && step > 0.0; }
};

struct SolitonFamily {
    Nonlinearity beta;
    Grid grid;
    std::vector<GroundState> samples;
    double min_dq = 0.0;
    bool h4 = false;  // q' > 0 on every sample
    std::vector<int> lplus_negative_count;  // filled by family_scan when requested

    // linear interpolation of q over the sampled omegas (used as a Newton guess)
    double interpolate_q(double omega) const;
};

// Solves at omega and omega (1 +- rel_step) and fills the derivative data.
GroundState ground_state_entry(const Nonlinearity& beta, double omega, const Grid& grid, double tol = 1e-11,
                               double rel_step = 1e-4, const RVec* guess = nullptr);

SolitonFamily family_scan(const Nonlinearity& beta, double omega_lo, double omega_hi, int n_samples,
                          const Grid& grid, double tol = 1e-11, bool with_lplus = true);

struct LplusReport {
    int n_negative = 0;
    int kernel_dim_even = 0;
    double lowest = 0.0;
    double kernel_tol = 0.0;
    RVec even_eigenvalues;  // ascending, first few
    // companion checks
    double lminus_lowest = 0.0;
    double lminus_phi_residual = 0.0;  // |L_- phi| / |phi|
    double odd_lowest = 0.0;           // lowest L_+ eigenvalue in the odd sector (d=1)
    double odd_dphi_residual = 0.0;    // |L_+ phi'| / |phi'|
};

LplusReport check_lplus(const GroundState& gs, const Nonlinearity& beta, const Grid& grid);

void write_family_csv(const SolitonFamily& fam, const std::string& path);

}  // namespace nls
