#pragma once

#include <string>

#include "nlslab/diagnostics.hpp"
#include "nlslab/simulate.hpp"

namespace nls {

// Declarative run description. JSON with sections grid, nonlinearity,
// omega, family, spectrum, initial, run, analysis; see README for the schema.
struct RunConfig {
    Grid grid{1, 1024, 30.0};
    Nonlinearity beta = Nonlinearity::cubic();
    double omega = 1.0;

    double family_lo = 0.5, family_hi = 2.0;
    int family_samples = 0;  // 0 skips the family scan

    std::size_t max_modes = 8;
    bool refine_check = true;
    bool scan_embedded = true;

    SimConfig sim;
    AnalysisOptions analysis;
    bool gamma_auto = true;  // compute Gamma with the fgr module when not given

    std::string output = "nlslab_out";
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace nls
