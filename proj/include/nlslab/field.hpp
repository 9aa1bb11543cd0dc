#pragma once

#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/nonlinearity.hpp"

namespace nls {

// State U = (u, conj u). Only u is stored; the lower component is
// reconstructed by conjugation, so the reality constraint holds exactly.
struct SpinorField {
    Grid grid;
    CVec u;
    double time = 0.0;

    SpinorField() = default;
    SpinorField(Grid g, CVec values, double t = 0.0);
    static SpinorField zeros(const Grid& g);

    // stacked (u, conj u), length 2n
    CVec doubled() const;
    // inverse of doubled(); rejects vectors violating the reality constraint
    static SpinorField from_doubled(const Grid& g, const CVec& X, double tol = 1e-13);
};

struct ConservedTriple {
    double Q = 0.0;
    std::vector<double> Pi;
    double E = 0.0;
};

void require_finite(const CVec& u, const char* what);

double charge(const SpinorField& U);
std::vector<double> momentum(const SpinorField& U);  // Pi_a = Im int conj(u) d_a u
double kinetic_energy(const SpinorField& U);
double potential_energy(const SpinorField& U, const Nonlinearity& beta);
double energy(const SpinorField& U, const Nonlinearity& beta);
ConservedTriple conserved(const SpinorField& U, const Nonlinearity& beta);

// exp(i sigma3 (v (x - D)/2 + theta)) tau_D U, d = 1 only (radial fields accept zeros)
SpinorField gauge_boost(const SpinorField& U, double v, double theta, double D);
struct BoostParams {
    double v, theta, D;
};
// parameters whose gauge_boost undoes gauge_boost(., v, theta, D)
BoostParams gauge_boost_inverse(double v, double theta, double D);

double sigma_norm(const SpinorField& U, int ell);

void write_snapshot(const SpinorField& U, const std::string& path);
SpinorField read_snapshot(const std::string& path);

// ---- general (unconstrained) spinor vectors, stacked as (X1, X2) ----
inline Eigen::Ref<const CVec> upper(const CVec& X) { return X.head(X.size() / 2); }
inline Eigen::Ref<const CVec> lower(const CVec& X) { return X.tail(X.size() / 2); }
CVec stack(const CVec& a, const CVec& b);
CVec sigma1(const CVec& X);
CVec sigma3(const CVec& X);
// bilinear pairing <X|Y> = int (X1 Y1 + X2 Y2), no conjugation
cplx pair(const Grid& g, const CVec& X, const CVec& Y);
// L^2 norm of a spinor vector (both components)
double spinor_norm(const Grid& g, const CVec& X);
// weighted norm with <x>^{-S}
double weighted_norm(const Grid& g, const CVec& X, double S);

}  // namespace nls
