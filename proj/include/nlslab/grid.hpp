#pragma once

#include <cstddef>

#include "nlslab/common.hpp"

namespace nls {

// Periodic grid on [-L, L). dim == 3 means the radial reduction of a
// spherically symmetric field, stored as an even function on a line whose
// nodes are shifted by h/2 so that none sits at the origin.
class Grid {
public:
    Grid() = default;
    Grid(int dim, std::size_t n, double half_length);

    int dim() const { return dim_; }
    bool radial() const { return dim_ == 3; }
    std::size_t n() const { return n_; }
    double half_length() const { return L_; }
    double h() const { return h_; }
    double kmax() const { return kPi / h_; }
    // index of the node mirrored through x = 0
    std::size_t mirror(std::size_t j) const { return radial() ? n_ - 1 - j : (n_ - j) % n_; }

    double x(std::size_t j) const { return -L_ + (static_cast<double>(j) + (radial() ? 0.5 : 0.0)) * h_; }
    const RVec& xs() const { return x_; }
    // wavenumbers in FFT order
    const RVec& ks() const { return k_; }
    // quadrature weights: h in d=1, 2*pi*x^2*h in radial d=3
    const RVec& weights() const { return w_; }

    bool operator==(const Grid& o) const { return dim_ == o.dim_ && n_ == o.n_ && L_ == o.L_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int dim_ = 1;
    std::size_t n_ = 0;
    double L_ = 0.0, h_ = 0.0;
    RVec x_, k_, w_;
};

// Spectral helpers. All take and return point values on the grid.
CVec fft(const CVec& u);
CVec ifft(const CVec& uh);
CVec apply_multiplier(const CVec& u, const CVec& m);
CVec apply_multiplier(const CVec& u, const RVec& m);

CVec deriv(const Grid& g, const CVec& u);    // d/dx, Nyquist mode dropped
CVec deriv2(const Grid& g, const CVec& u);   // d^2/dx^2
// Laplacian: u'' in d=1, (x u)''/x in radial d=3.
CVec laplacian(const Grid& g, const CVec& u);
// Solves (-Lap + s) u = r spectrally (exact inverse of laplacian() shifted by s).
CVec shifted_laplacian_inverse(const Grid& g, const CVec& r, cplx s);
// u(x - D) by Fourier phase
CVec translate(const Grid& g, const CVec& u, double D);

// integral of f over R^d with the grid quadrature
cplx integrate(const Grid& g, const CVec& f);
double integrate_real(const Grid& g, const RVec& f);
double l2_norm(const Grid& g, const CVec& u);

// Fraction of sum |u|^2 (plain, unweighted) living in |x| > 3L/4.
double outer_mass_fraction(const Grid& g, const CVec& u);

}  // namespace nls
