#include "nlslab/grid.hpp"

#include <map>
#include <memory>
#include <mutex>

#include <fftw3.h>

namespace nls {

Grid::Grid(int dim, std::size_t n, double half_length) : dim_(dim), n_(n), L_(half_length) {
    if (dim != 1 && dim != 3) throw DataError("grid dim must be 1 or 3");
    if (n < 8 || (n & (n - 1)) != 0) throw DataError("grid n must be a power of two >= 8");
    if (!(half_length > 0.0)) throw DataError("grid half_length must be positive");
    h_ = 2.0 * L_ / static_cast<double>(n_);
    x_.resize(n_);
    k_.resize(n_);
    w_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        x_[j] = x(j);
        long m = (j < n_ / 2) ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n_);
        k_[j] = kPi * static_cast<double>(m) / L_;
        w_[j] = radial() ? 2.0 * kPi * x_[j] * x_[j] * h_ : h_;
    }
}

namespace {

struct Plans {
    fftw_plan fwd, bwd;
};

// FFTW planning is not thread-safe; execution with the new-array API is.
Plans plans_for(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, Plans> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto* a = fftw_alloc_complex(n);
    auto* b = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p{fftw_plan_dft_1d(static_cast<int>(n), a, b, FFTW_FORWARD, flags),
            fftw_plan_dft_1d(static_cast<int>(n), a, b, FFTW_BACKWARD, flags)};
    fftw_free(a);
    fftw_free(b);
    cache.emplace(n, p);
    return p;
}

}  // namespace

CVec fft(const CVec& u) {
    const auto n = static_cast<std::size_t>(u.size());
    CVec in = u, out(n);
    fftw_execute_dft(plans_for(n).fwd, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

CVec ifft(const CVec& uh) {
    const auto n = static_cast<std::size_t>(uh.size());
    CVec in = uh, out(n);
    fftw_execute_dft(plans_for(n).bwd, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    out /= static_cast<double>(n);
    return out;
}

CVec apply_multiplier(const CVec& u, const CVec& m) {
    CVec uh = fft(u);
    uh.array() *= m.array();
    return ifft(uh);
}

CVec apply_multiplier(const CVec& u, const RVec& m) {
    CVec uh = fft(u);
    uh.array() *= m.array().cast<cplx>();
    return ifft(uh);
}

CVec deriv(const Grid& g, const CVec& u) {
    CVec m = (kI * g.ks().cast<cplx>()).eval();
    m[static_cast<long>(g.n() / 2)] = 0.0;
    return apply_multiplier(u, m);
}

CVec deriv2(const Grid& g, const CVec& u) {
    RVec m = -g.ks().array().square();
    return apply_multiplier(u, m);
}

namespace {

// Radial fields are even in x; an odd component would make (x u)''/x singular.
CVec even_part(const Grid& g, const CVec& u) {
    CVec e(u.size());
    for (std::size_t j = 0; j < g.n(); ++j)
        e[static_cast<long>(j)] = 0.5 * (u[static_cast<long>(j)] + u[static_cast<long>(g.mirror(j))]);
    return e;
}

}  // namespace

CVec laplacian(const Grid& g, const CVec& u) {
    if (!g.radial()) return deriv2(g, u);
    // the odd part is dropped, so -Lap acts on it as zero
    CVec w = (g.xs().cast<cplx>().array() * even_part(g, u).array()).matrix();
    CVec w2 = deriv2(g, w);
    return (w2.array() / g.xs().cast<cplx>().array()).matrix();
}

CVec shifted_laplacian_inverse(const Grid& g, const CVec& r, cplx s) {
    CVec m(g.n());
    for (std::size_t j = 0; j < g.n(); ++j) m[static_cast<long>(j)] = 1.0 / (g.ks()[j] * g.ks()[j] + s);
    if (!g.radial()) return apply_multiplier(r, m);
    // (-Lap + s) u = r  <=>  (-d^2 + s)(x u) = x r
    CVec re = even_part(g, r);
    CVec xr = (g.xs().cast<cplx>().array() * re.array()).matrix();
    CVec w = apply_multiplier(xr, m);
    CVec out = (w.array() / g.xs().cast<cplx>().array()).matrix();
    out += (r - re) / s;
    return out;
}

CVec translate(const Grid& g, const CVec& u, double D) {
    if (D == 0.0) return u;
    CVec m(g.n());
    for (std::size_t j = 0; j < g.n(); ++j) m[static_cast<long>(j)] = std::exp(-kI * g.ks()[j] * D);
    return apply_multiplier(u, m);
}

cplx integrate(const Grid& g, const CVec& f) { return (g.weights().cast<cplx>().array() * f.array()).sum(); }

double integrate_real(const Grid& g, const RVec& f) { return (g.weights().array() * f.array()).sum(); }

double l2_norm(const Grid& g, const CVec& u) {
    return std::sqrt((g.weights().array() * u.array().abs2()).sum());
}

double outer_mass_fraction(const Grid& g, const CVec& u) {
    double total = 0.0, outer = 0.0;
    const double cut = 0.75 * g.half_length();
    for (std::size_t j = 0; j < g.n(); ++j) {
        double m = std::norm(u[static_cast<long>(j)]);
        total += m;
        if (std::abs(g.xs()[j]) > cut) outer += m;
    }
    return total > 0.0 ? outer / total : 0.0;
}

}  // namespace nls
