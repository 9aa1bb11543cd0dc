#pragma once

#include <string>
#include <vector>

#include "nlslab/field.hpp"
#include "nlslab/linearize.hpp"

namespace nls {

// Gaussian wave packet a e^{i k0 x} e^{-(x - x0)^2 / (2 w^2)}
struct RadiationPacket {
    cplx amplitude = 0.0;
    double center = 0.0;
    double width = 1.0;
    double wavenumber = 0.0;
};

struct InitialCondition {
    bool soliton = true;
    double omega = 1.0, v = 0.0, theta = 0.0, D = 0.0;
    std::vector<cplx> mode_amplitudes;  // z_j, seeded along xi_j before the boost
    std::vector<RadiationPacket> packets;
    // smooth random perturbation of this L^2 size, drawn from `seed`
    double noise = 0.0;
    unsigned long long seed = 0;
};

struct SimConfig {
    Grid grid;
    Nonlinearity beta = Nonlinearity::zero();
    double dt = 1e-3;
    double T_final = 1.0;
    InitialCondition ic;
    bool sponge = false;
    double sponge_strength = 1.0;
    double sponge_width = 0.25;  // fraction of L covered by the ramp
    double sample_every = 0.1;   // time between conserved-quantity samples
    std::size_t snapshot_stride = 1;  // keep every k-th sample as a snapshot
};

struct Trajectory {
    Grid grid;
    std::vector<double> times;
    std::vector<ConservedTriple> conserved;
    std::vector<SpinorField> snapshots;
    std::vector<Eigenpair> seeded_modes;
    bool aborted = false;
    std::string abort_reason;
};

// One Strang step of i u_t = -u_xx + beta(|u|^2) u.
class SplitStep {
public:
    SplitStep(const Grid& g, const Nonlinearity& beta, double dt);
    void set_sponge(const RVec& W);  // damping e^{-W dt} after each step
    void step(CVec& u) const;
    double dt() const { return dt_; }

private:
    Grid g_;
    Nonlinearity beta_;
    double dt_;
    CVec half_kinetic_;
    RVec damping_;
    bool sponge_ = false;
};

CVec step(const Grid& g, const CVec& u, double dt, const Nonlinearity& beta);

// zero inside, quartic ramp to `strength` over the outer width*L of each side
RVec sponge_profile(const Grid& g, double strength, double width);

SpinorField initial_field(const SimConfig& c, std::vector<Eigenpair>* modes = nullptr);

Trajectory run(const SimConfig& c);

// conserved.csv (t, Q, Pi, E) plus one snapshot file per stored frame
void write_conserved_csv(const Trajectory& tr, const std::string& path);
void write_trajectory(const Trajectory& tr, const std::string& dir);
Trajectory read_trajectory(const std::string& dir);

}  // namespace nls
