#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/modulation.hpp"
#include "nlslab/simulate.hpp"

namespace nls {

struct TrackOptions {
    FitOptions fit;
    double refresh_tol = 1e-3;  // omega change before modes are re-tracked
    bool keep_radiation = true;
};

// Per-frame modulation fit. f holds the upper component of the continuous
// part in the soliton frame.
struct ModulationSeries {
    Grid grid;
    std::vector<double> t;
    std::vector<ModulationParams> p;
    std::vector<std::vector<cplx>> z;
    std::vector<CVec> f;
    std::vector<double> f_l2, f_weighted, Qf, Pif, secular_residual;
    std::vector<double> lambdas;  // at the last frame
    bool breakdown = false;
    std::size_t breakdown_frame = 0;
    std::string breakdown_message;
};

ModulationSeries track_modulation(const Trajectory& tr, SolitonManifold& M, const ModulationParams& guess,
                                  const TrackOptions& opt = {});
// series for a run without a soliton: parameters zero, f = u
ModulationSeries radiation_series(const Trajectory& tr);
void write_series_csv(const ModulationSeries& s, const std::string& path);

struct LawResiduals {
    std::vector<double> t, Ddot_minus_v, thetadot_minus;  // thetadot - omega - v^2/4
    double tail_Ddot = 0.0, tail_theta = 0.0;
};
// central differences; tails are max |.| over t >= tail_from
LawResiduals modulation_laws(const ModulationSeries& s, double tail_from);

struct ScatteringResult {
    CVec f_plus;
    std::vector<double> t, residuals;  // H^1 distance between consecutive w(t)
    double start_residual = 0.0, end_residual = 0.0, ratio = 0.0;
    bool converging = false;
    std::string verdict;
};
// w(t) = e^{-it Lap}[lab-frame radiation] over frames with t >= t_from
ScatteringResult scattering_extract(const ModulationSeries& s, double t_from);

struct NormEntry {
    std::string name;
    double p = 0.0, q = 0.0;  // infinity allowed
    double value = 0.0;
};
struct NormTable {
    std::vector<NormEntry> entries;
    const NormEntry* find(const std::string& name) const;
};
// L^p_t W^{1,q}_x over admissible pairs (2/p + d/q = d/2) and L^2_t L^{2,-S}_x
NormTable dispersive_norms(const std::vector<double>& t, const std::vector<CVec>& f, const Grid& g, double S = 2.0);

struct DecayReport {
    bool trivial = false;
    bool fitted = false;
    double window = 0.0;
    double slope = 0.0, intercept = 0.0, fit_residual = 0.0;
    double predicted_slope = 0.0, ratio = 0.0;
    bool monotone = false;
    bool fgr_failure = false;
    double initial_envelope = 0.0, final_envelope = 0.0, final_over_initial = 0.0;
    std::vector<double> env_t, env;
};
// fits 1/env^2 on t >= tail_from, env = |z| averaged over window_periods * 2 pi / lambda
DecayReport compare_decay(const std::vector<double>& t, const std::vector<cplx>& z, double lambda, double Gamma, int N,
                          double tail_from, double window_periods = 4.0);

struct StabilityReport {
    ModulationSeries series;
    double T = 0.0, tail_from = 0.0;
    double omega_plus = 0.0, omega_tail_variation = 0.0;
    double v_plus = 0.0, v_tail_variation = 0.0;
    double z_tail_max = 0.0;
    LawResiduals laws;
    std::optional<DecayReport> decay;
    std::optional<ScatteringResult> scattering;
    NormTable norms;
    double Gamma = std::numeric_limits<double>::quiet_NaN();
};

struct AnalysisOptions {
    TrackOptions track;
    double tail_fraction = 0.5;  // tail is [(1 - fraction) T, T]
    double transient_fraction = 0.1;  // decay fit starts here
    double window_periods = 4.0;
    // FGR coefficient for the decay comparison; NaN skips it
    double Gamma = std::numeric_limits<double>::quiet_NaN();
    int N = 1;
};

StabilityReport analyze_trajectory(const Trajectory& tr, const Nonlinearity& beta, const ModulationParams& guess,
                                   const AnalysisOptions& opt = {});
std::string stability_json(const StabilityReport& r, int indent = 2);

// minimal line plot; log_y draws log10 of positive values
struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};
void write_svg_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::vector<PlotSeries>& series, bool log_y = false);

}  // namespace nls
