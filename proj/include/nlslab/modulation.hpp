#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "nlslab/spectrum.hpp"

namespace nls {

// Ground states, operators and modes along the branch, cached at the last
// requested omega. Not thread-safe; one per tracking pass.
class SolitonManifold {
public:
    SolitonManifold(Nonlinearity beta, Grid grid, std::size_t max_modes = 8);

    const Nonlinearity& beta() const { return beta_; }
    const Grid& grid() const { return grid_; }
    // exact entry at omega (re-solved unless omega is the cached one)
    const GroundState& entry(double omega);
    // operator and modes; reused while |omega - cached| <= refresh_tol
    const LinearizedOperator& op(double omega);
    const std::vector<Eigenpair>& modes(double omega);
    void set_refresh_tol(double t) { refresh_tol_ = t; }

private:
    Nonlinearity beta_;
    Grid grid_;
    std::size_t max_modes_;
    double refresh_tol_ = 0.0;
    std::optional<GroundState> gs_;
    std::optional<GroundState> op_gs_;
    LinearizedOperator H_;
    std::vector<Eigenpair> modes_;
    bool have_modes_ = false;
};

struct ModulationParams {
    double omega = 1.0;
    double theta = 0.0;
    double D = 0.0;
    double v = 0.0;
};

struct ModulationState {
    ModulationParams p;
    std::vector<cplx> z;
    CVec R;  // remainder, stacked (r, conj r)
    CVec f;  // continuous part, stacked
    double Qf = 0.0, Pif = 0.0;
    double secular_residual = 0.0;
    int iterations = 0;
};

struct FitOptions {
    double fit_tol = 1e-10;
    int max_iter = 50;
    double max_remainder = 0.5;  // |r| / |phi| beyond which the field is off the manifold
};

// the four secular functionals (two in radial d=3) at the given parameters
std::vector<double> secular_functionals(SolitonManifold& M, const SpinorField& U, const ModulationParams& p);

ModulationState fit_modulation(const SpinorField& U, const ModulationParams& guess, SolitonManifold& M,
                               const FitOptions& opt = {});

// upper component of R(z, f) = sum z xi + conj z sigma1 xi + f
CVec remainder_field(const std::vector<Eigenpair>& modes, const std::vector<cplx>& z, const CVec& f);

struct ReducedCoordinates {
    double omega = 0.0;
    double v = 0.0;
};
// q(omega) + Q(R) = Q, v = 2 (Pi - Pi(R)) / Q
ReducedCoordinates reduced_coordinates(double Q, double Pi, const std::vector<cplx>& z, const CVec& f,
                                       SolitonManifold& M, double omega_guess);

struct GaugeResiduals {
    double charge = 0.0, momentum = 0.0, energy = 0.0;
    double momentum_split = 0.0;  // |Pi(Phi + R) - Pi(R)|
};
GaugeResiduals gauge_identities(const SpinorField& U, const ModulationState& s, SolitonManifold& M);

// rebuilds the field described by a state
SpinorField reconstruct(const ModulationState& s, SolitonManifold& M);

// CSV: t, omega, theta, D, v, Re z_j, Im z_j, |f|_2, |f|_{2,-2}, Q(f), Pi(f)
void write_modulation_header(std::ostream& os, std::size_t m);
void write_modulation_row(std::ostream& os, double t, const ModulationState& s, const Grid& g);

// nearest branch of theta to the reference
double unwrap_phase(double theta, double reference);

}  // namespace nls
