#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlslab/linearize.hpp"

namespace nls {

struct SearchWindow {
    double lo = 0.0;  // fractions of omega; modes closer than lo*omega to 0 are
    double hi = 1.0;  // treated as the perturbed Jordan block and dropped
    static SearchWindow internal() { return {1e-3, 1.0}; }
};

struct DiscreteSpectrum {
    double omega = 0.0;
    std::vector<Eigenpair> modes;  // lambda ascending
    std::vector<int> N;            // N_j with N_j lambda_j < omega < (N_j + 1) lambda_j
    std::vector<double> residuals; // |H xi - lambda xi| / |xi|
    std::vector<double> imag_parts;
    std::size_t m() const { return modes.size(); }
    int N1() const { return N.empty() ? 0 : N.front(); }
};

struct ArnoldiOptions {
    int krylov_dim = 40;
    int shifts = 4;
    double inner_tol = 1e-12;
    double accept_residual = 1e-6;
    double imag_tol = 1e-8;
    double decay_tol = 1e-6;
    bool deflate = true;
};

// shift-invert Arnoldi sweep of the window; continuum states filtered by decay
DiscreteSpectrum discrete_spectrum(const LinearizedOperator& H, SearchWindow window = SearchWindow::internal(),
                                   std::size_t max_modes = 8, const ArnoldiOptions& opt = {});
// follows known modes to a nearby operator by shifted inverse iteration
DiscreteSpectrum track_modes(const LinearizedOperator& H, const std::vector<Eigenpair>& previous,
                             double accept_residual = 1e-6);
// brute-force dense eigensolve (n <= 512), same filters
DiscreteSpectrum dense_spectrum(const LinearizedOperator& H, SearchWindow window = SearchWindow::internal(),
                                double decay_tol = 1e-6);

// lambda integer bracket of omega, 0 if lambda divides omega exactly
int threshold_order(double lambda, double omega);

// <sigma3 xi_j | conj xi_l>
RMat biorthogonality(const LinearizedOperator& H, const DiscreteSpectrum& s);
// |H sigma1 xi + lambda sigma1 xi| / |xi|
double mirror_residual(const LinearizedOperator& H, const Eigenpair& e);

struct Verdict {
    bool holds = true;
    double witness = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct HypothesisReport {
    double omega = 0.0;
    Verdict h4;  // witness q'(omega)
    std::optional<Verdict> h5;  // witness number of negative L+ eigenvalues
    Verdict h6;  // witness min distance of omega from integer multiples
    std::vector<std::pair<double, int>> modes;  // (lambda_j, N_j)
    int max_order = 0;
    Verdict h7;  // min |mu.lambda - omega|
    Verdict h8;  // min |mu.lambda| over nonzero mu
    Verdict h9;  // decaying eigenvectors found in (omega, kmax^2 + omega)
    std::vector<double> embedded_found;
    double grid_drift = -1.0;  // max |lambda_j(n) - lambda_j(2n)|, -1 if not run
    bool all() const;
};

struct HypothesisOptions {
    int max_order = -1;  // -1 -> 2 N_1 + 3
    double resonance_tol = 1e-6;
    bool scan_embedded = true;
    int embedded_shifts = 6;
};

// second_resolution, when given, is the same soliton on a refined grid
HypothesisReport check_hypotheses(const DiscreteSpectrum& spec, const LinearizedOperator& H,
                                  const HypothesisOptions& opt = {},
                                  const LinearizedOperator* second_resolution = nullptr,
                                  const DiscreteSpectrum* second_spectrum = nullptr);

// embedded-eigenvalue falsification scan; returns decaying eigenvalues above omega
std::vector<double> embedded_scan(const LinearizedOperator& H, int shifts, double decay_tol = 1e-6);

// everything at once: entry, operator, spectrum, L+ index, refinement check
struct Analysis {
    GroundState gs;
    LinearizedOperator H;
    DiscreteSpectrum spectrum;
    HypothesisReport report;
};
Analysis analyze(const Nonlinearity& beta, double omega, const Grid& grid, bool refine_check = true,
                 const HypothesisOptions& opt = {});

std::string report_json(const HypothesisReport& r, int indent = 2);

}  // namespace nls
