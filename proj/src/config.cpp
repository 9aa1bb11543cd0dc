#include "nlslab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace nls {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

cplx read_complex(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(where + " must be a number or [re, im]");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(j, "config",
              {"grid", "nonlinearity", "omega", "family", "spectrum", "initial", "run", "analysis", "seed", "output"});
    RunConfig c;
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        only_keys(g, "grid", {"dim", "n", "L"});
        int dim = 1;
        std::size_t n = 1024;
        double L = 30.0;
        read(g, "dim", dim, "grid");
        read(g, "n", n, "grid");
        read(g, "L", L, "grid");
        try {
            c.grid = Grid(dim, n, L);
        } catch (const DataError& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
    }
    if (j.contains("nonlinearity")) {
        if (!j["nonlinearity"].is_string()) throw ConfigError("nonlinearity must be a string such as \"poly:-1,-3\"");
        try {
            c.beta = Nonlinearity::parse(j["nonlinearity"].get<std::string>());
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
    }
    read(j, "omega", c.omega, "config");
    read(j, "output", c.output, "config");
    if (j.contains("family")) {
        const auto& f = j["family"];
        only_keys(f, "family", {"omega_lo", "omega_hi", "samples"});
        read(f, "omega_lo", c.family_lo, "family");
        read(f, "omega_hi", c.family_hi, "family");
        read(f, "samples", c.family_samples, "family");
    }
    if (j.contains("spectrum")) {
        const auto& s = j["spectrum"];
        only_keys(s, "spectrum", {"max_modes", "refine_check", "scan_embedded"});
        read(s, "max_modes", c.max_modes, "spectrum");
        read(s, "refine_check", c.refine_check, "spectrum");
        read(s, "scan_embedded", c.scan_embedded, "spectrum");
    }

    SimConfig& sim = c.sim;
    sim.grid = c.grid;
    sim.beta = c.beta;
    sim.ic.omega = c.omega;
    read(j, "seed", sim.ic.seed, "config");
    if (j.contains("initial")) {
        const auto& i = j["initial"];
        only_keys(i, "initial", {"soliton", "omega", "v", "theta", "D", "modes", "packets", "noise"});
        read(i, "soliton", sim.ic.soliton, "initial");
        read(i, "omega", sim.ic.omega, "initial");
        read(i, "v", sim.ic.v, "initial");
        read(i, "theta", sim.ic.theta, "initial");
        read(i, "D", sim.ic.D, "initial");
        read(i, "noise", sim.ic.noise, "initial");
        if (i.contains("modes")) {
            if (!i["modes"].is_array()) throw ConfigError("initial.modes must be a list");
            for (const auto& m : i["modes"]) sim.ic.mode_amplitudes.push_back(read_complex(m, "initial.modes[]"));
        }
        if (i.contains("packets")) {
            if (!i["packets"].is_array()) throw ConfigError("initial.packets must be a list");
            for (const auto& p : i["packets"]) {
                only_keys(p, "initial.packets[]", {"amplitude", "center", "width", "wavenumber"});
                RadiationPacket r;
                if (p.contains("amplitude")) r.amplitude = read_complex(p["amplitude"], "packet amplitude");
                read(p, "center", r.center, "initial.packets[]");
                read(p, "width", r.width, "initial.packets[]");
                read(p, "wavenumber", r.wavenumber, "initial.packets[]");
                sim.ic.packets.push_back(r);
            }
        }
    }
    if (j.contains("run")) {
        const auto& r = j["run"];
        only_keys(r, "run", {"dt", "T", "sponge", "sponge_strength", "sponge_width", "sample_every", "snapshot_stride"});
        read(r, "dt", sim.dt, "run");
        read(r, "T", sim.T_final, "run");
        read(r, "sponge", sim.sponge, "run");
        read(r, "sponge_strength", sim.sponge_strength, "run");
        read(r, "sponge_width", sim.sponge_width, "run");
        read(r, "sample_every", sim.sample_every, "run");
        read(r, "snapshot_stride", sim.snapshot_stride, "run");
    }
    if (j.contains("analysis")) {
        const auto& a = j["analysis"];
        only_keys(a, "analysis", {"tail_fraction", "transient_fraction", "window_periods", "gamma", "N", "refresh_tol",
                                  "fit_tol", "max_remainder"});
        auto& o = c.analysis;
        read(a, "tail_fraction", o.tail_fraction, "analysis");
        read(a, "transient_fraction", o.transient_fraction, "analysis");
        read(a, "window_periods", o.window_periods, "analysis");
        read(a, "N", o.N, "analysis");
        read(a, "refresh_tol", o.track.refresh_tol, "analysis");
        read(a, "fit_tol", o.track.fit.fit_tol, "analysis");
        read(a, "max_remainder", o.track.fit.max_remainder, "analysis");
        if (a.contains("gamma")) {
            const auto& g = a["gamma"];
            if (g.is_number()) {
                o.Gamma = g.get<double>();
                c.gamma_auto = false;
            } else if (g.is_null()) {
                c.gamma_auto = false;
            } else if (!(g.is_string() && g.get<std::string>() == "auto")) {
                throw ConfigError("analysis.gamma must be a number, null or \"auto\"");
            }
        }
        if (!(o.tail_fraction > 0.0 && o.tail_fraction <= 1.0)) throw ConfigError("analysis.tail_fraction must lie in (0, 1]");
    }
    if (!(sim.dt > 0.0) || !(sim.T_final >= 0.0)) throw ConfigError("run needs dt > 0 and T >= 0");
    if (sim.snapshot_stride == 0) throw ConfigError("run.snapshot_stride must be >= 1");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

}  // namespace nls
