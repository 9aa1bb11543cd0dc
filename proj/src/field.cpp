#include "nlslab/field.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace nls {

SpinorField::SpinorField(Grid g, CVec values, double t) : grid(std::move(g)), u(std::move(values)), time(t) {
    if (static_cast<std::size_t>(u.size()) != grid.n()) throw DataError("field size does not match grid");
}

SpinorField SpinorField::zeros(const Grid& g) { return SpinorField(g, CVec::Zero(static_cast<long>(g.n()))); }

CVec SpinorField::doubled() const { return stack(u, u.conjugate()); }

SpinorField SpinorField::from_doubled(const Grid& g, const CVec& X, double tol) {
    if (static_cast<std::size_t>(X.size()) != 2 * g.n()) throw DataError("spinor size does not match grid");
    CVec a = upper(X), b = lower(X);
    double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    if ((b.conjugate() - a).cwiseAbs().maxCoeff() > tol * scale)
        throw DataError("reality constraint violated");
    return SpinorField(g, a);
}

void require_finite(const CVec& u, const char* what) {
    if (!u.allFinite()) throw DataError(std::string("non-finite values in ") + what);
}

double charge(const SpinorField& U) {
    require_finite(U.u, "field");
    return (U.grid.weights().array() * U.u.array().abs2()).sum();
}

std::vector<double> momentum(const SpinorField& U) {
    require_finite(U.u, "field");
    if (U.grid.radial()) return std::vector<double>(3, 0.0);
    CVec du = deriv(U.grid, U.u);
    CVec prod = (U.u.conjugate().array() * du.array()).matrix();
    return {integrate(U.grid, prod).imag()};
}

double kinetic_energy(const SpinorField& U) {
    require_finite(U.u, "field");
    CVec du = deriv(U.grid, U.u);
    return (U.grid.weights().array() * du.array().abs2()).sum();
}

double potential_energy(const SpinorField& U, const Nonlinearity& beta) {
    require_finite(U.u, "field");
    RVec b(U.u.size());
    for (long j = 0; j < U.u.size(); ++j) b[j] = beta.B(std::norm(U.u[j]));
    return integrate_real(U.grid, b);
}

double energy(const SpinorField& U, const Nonlinearity& beta) {
    return kinetic_energy(U) + potential_energy(U, beta);
}

ConservedTriple conserved(const SpinorField& U, const Nonlinearity& beta) {
    return {charge(U), momentum(U), energy(U, beta)};
}

SpinorField gauge_boost(const SpinorField& U, double v, double theta, double D) {
    require_finite(U.u, "field");
    if (U.grid.radial() && (v != 0.0 || D != 0.0)) throw DataError("boost/translation of a radial field");
    CVec w = translate(U.grid, U.u, D);
    const RVec& x = U.grid.xs();
    for (long j = 0; j < w.size(); ++j) w[j] *= std::exp(kI * (0.5 * v * (x[j] - D) + theta));
    return SpinorField(U.grid, w, U.time);
}

BoostParams gauge_boost_inverse(double v, double theta, double D) { return {-v, -theta + 0.5 * v * D, -D}; }

double sigma_norm(const SpinorField& U, int ell) {
    if (ell < 0) throw DataError("sigma_norm needs ell >= 0");
    require_finite(U.u, "field");
    const Grid& g = U.grid;
    // factor 2: both spinor components carry |u|^2
    double acc = 0.0;
    if (!g.radial()) {
        CVec uh = fft(U.u);
        const double scale = g.h() / static_cast<double>(g.n());
        for (std::size_t j = 0; j < g.n(); ++j)
            acc += std::pow(1.0 + g.ks()[j] * g.ks()[j], ell) * std::norm(uh[static_cast<long>(j)]) * scale;
        for (int a = 1; a <= ell; ++a)
            acc += (g.weights().array() * (g.xs().array().pow(a) * U.u.array().abs()).square()).sum();
        return std::sqrt(2.0 * acc);
    }
    if (ell > 1) throw ContractViolation("radial sigma_norm supports ell <= 1");
    acc = charge(U);
    if (ell == 1) {
        acc += kinetic_energy(U);
        acc += (g.weights().array() * g.xs().array().square() * U.u.array().abs2()).sum();
    }
    return std::sqrt(2.0 * acc);
}

// ---- snapshot I/O ----
namespace {

constexpr std::uint32_t kSnapshotVersion = 1;

template <class T>
void put_le(std::ostream& os, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("truncated snapshot");
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void write_snapshot(const SpinorField& U, const std::string& path) {
    if (U.grid.radial()) throw ContractViolation("snapshots are written for d=1 fields only");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os.write("NLSF", 4);
    put_le<std::uint32_t>(os, kSnapshotVersion);
    put_le<std::uint32_t>(os, 1);
    put_le<std::uint64_t>(os, U.grid.n());
    put_le<double>(os, U.grid.half_length());
    put_le<double>(os, U.time);
    for (long j = 0; j < U.u.size(); ++j) {
        put_le<double>(os, U.u[j].real());
        put_le<double>(os, U.u[j].imag());
    }
    if (!os) throw DataError("write failed for " + path);
}

SpinorField read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path);
    char magic[4];
    if (!is.read(magic, 4)) throw FormatError("truncated snapshot");
    if (std::memcmp(magic, "NLSF", 4) != 0) throw FormatError("bad snapshot magic");
    auto version = get_le<std::uint32_t>(is);
    if (version != kSnapshotVersion) throw UnsupportedVersion("snapshot version " + std::to_string(version));
    auto dim = get_le<std::uint32_t>(is);
    if (dim != 1) throw FormatError("snapshot dim must be 1");
    auto n = get_le<std::uint64_t>(is);
    auto L = get_le<double>(is);
    auto t = get_le<double>(is);
    if (n > (1ull << 26)) throw FormatError("snapshot size out of range");
    Grid g(1, static_cast<std::size_t>(n), L);
    CVec u(static_cast<long>(n));
    for (long j = 0; j < u.size(); ++j) {
        double re = get_le<double>(is);
        double im = get_le<double>(is);
        u[j] = cplx(re, im);
    }
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in snapshot");
    return SpinorField(g, u, t);
}

// ---- spinor vectors ----
CVec stack(const CVec& a, const CVec& b) {
    CVec X(a.size() + b.size());
    X << a, b;
    return X;
}

CVec sigma1(const CVec& X) { return stack(lower(X), upper(X)); }

CVec sigma3(const CVec& X) { return stack(upper(X), -lower(X)); }

cplx pair(const Grid& g, const CVec& X, const CVec& Y) {
    const long n = static_cast<long>(g.n());
    auto w = g.weights().cast<cplx>().array();
    return (w * X.head(n).array() * Y.head(n).array()).sum() + (w * X.tail(n).array() * Y.tail(n).array()).sum();
}

double spinor_norm(const Grid& g, const CVec& X) {
    const long n = static_cast<long>(g.n());
    return std::sqrt((g.weights().array() * (X.head(n).array().abs2() + X.tail(n).array().abs2())).sum());
}

double weighted_norm(const Grid& g, const CVec& X, double S) {
    const long n = static_cast<long>(g.n());
    RVec wt = (1.0 + g.xs().array().square()).pow(-S);
    return std::sqrt(
        (g.weights().array() * wt.array() * (X.head(n).array().abs2() + X.tail(n).array().abs2())).sum());
}

}  // namespace nls
