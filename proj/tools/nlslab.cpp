// nlslab: command-line front end. Every subcommand reads one JSON config,
// prints its JSON result and writes artifacts under the output directory.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlslab/config.hpp"
#include "nlslab/fgr.hpp"
#include "nlslab/groundstate.hpp"
#include "nlslab/spectrum.hpp"

using namespace nls;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json num(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

void emit(const json& j, const fs::path& file) {
    const std::string text = j.dump(2);
    std::cout << text << '\n';
    fs::create_directories(file.parent_path());
    std::ofstream os(file);
    if (!os) throw DataError("cannot write " + file.string());
    os << text << '\n';
}

int fail(const std::string& kind, const std::string& message, int code) {
    json e{{"error", kind}, {"message", message}};
    std::cout << e.dump(2) << '\n';
    return code;
}

json groundstate_cmd(const RunConfig& c, const fs::path& out) {
    auto gs = ground_state_entry(c.beta, c.omega, c.grid);
    auto lp = check_lplus(gs, c.beta, c.grid);
    {
        fs::create_directories(out);
        std::ofstream os(out / "profile.csv");
        os << "x,phi\n" << std::setprecision(17);
        for (std::size_t j = 0; j < c.grid.n(); ++j) os << c.grid.x(j) << ',' << gs.phi[static_cast<long>(j)] << '\n';
    }
    json j{{"omega", gs.omega},
           {"nonlinearity", c.beta.descriptor()},
           {"q", gs.q},
           {"e", gs.e},
           {"d", gs.d},
           {"dq", gs.dq},
           {"residual", stationary_residual(c.beta, gs.omega, c.grid, gs.phi)},
           {"lplus", {{"negative", lp.n_negative}, {"lowest", lp.lowest}, {"kernel_dim_even", lp.kernel_dim_even}}}};
    if (c.family_samples > 0) {
        auto fam = family_scan(c.beta, c.family_lo, c.family_hi, c.family_samples, c.grid);
        write_family_csv(fam, (out / "family.csv").string());
        j["family_min_dq"] = fam.min_dq;
    }
    return j;
}

json spectrum_cmd(const RunConfig& c) {
    auto gs = ground_state_entry(c.beta, c.omega, c.grid);
    auto H = LinearizedOperator::assemble(gs, c.beta, c.grid);
    auto s = discrete_spectrum(H, SearchWindow::internal(), c.max_modes);
    json modes = json::array();
    for (std::size_t i = 0; i < s.m(); ++i)
        modes.push_back({{"lambda", s.modes[i].lambda},
                         {"N", s.N[i]},
                         {"residual", s.residuals[i]},
                         {"imag", s.imag_parts[i]}});
    return {{"omega", s.omega}, {"m", s.m()}, {"N1", s.N1()}, {"modes", modes}};
}

json hypotheses_cmd(const RunConfig& c) {
    HypothesisOptions opt;
    opt.scan_embedded = c.scan_embedded;
    auto a = analyze(c.beta, c.omega, c.grid, c.refine_check, opt);
    return json::parse(report_json(a.report));
}

FgrReport fgr_at(const RunConfig& c, double omega) {
    auto gs = ground_state_entry(c.beta, omega, c.grid);
    auto H = LinearizedOperator::assemble(gs, c.beta, c.grid);
    auto s = discrete_spectrum(H, SearchWindow::internal(), c.max_modes);
    return fgr_report(H, s, c.beta);
}

json conserved_summary(const Trajectory& tr) {
    double dQ = 0.0, dP = 0.0, dE = 0.0;
    if (!tr.conserved.empty()) {
        const auto& c0 = tr.conserved.front();
        for (const auto& ci : tr.conserved) {
            dQ = std::max(dQ, std::abs(ci.Q - c0.Q) / std::max(c0.Q, 1e-300));
            dP = std::max(dP, std::abs(ci.Pi[0] - c0.Pi[0]));
            dE = std::max(dE, std::abs(ci.E - c0.E) / std::max(std::abs(c0.E), 1e-300));
        }
    }
    return {{"samples", tr.times.size()},
            {"snapshots", tr.snapshots.size()},
            {"T", tr.times.empty() ? 0.0 : tr.times.back()},
            {"aborted", tr.aborted},
            {"max_rel_charge_drift", dQ},
            {"max_momentum_drift", dP},
            {"max_rel_energy_drift", dE}};
}

int simulate_cmd(const RunConfig& c, const fs::path& out) {
    auto tr = run(c.sim);
    write_trajectory(tr, (out / "trajectory").string());
    json j = conserved_summary(tr);
    if (tr.aborted) {
        j["error"] = "non-finite";
        j["message"] = tr.abort_reason;
        emit(j, out / "simulate.json");
        return 1;
    }
    emit(j, out / "simulate.json");
    return 0;
}

int analyze_cmd(const RunConfig& c, const fs::path& out) {
    const fs::path tdir = out / "trajectory";
    Trajectory tr;
    if (fs::exists(tdir)) {
        tr = read_trajectory(tdir.string());
    } else {
        tr = run(c.sim);
        write_trajectory(tr, tdir.string());
        if (tr.aborted) return fail("non-finite", tr.abort_reason, 1);
    }
    if (tr.grid != c.grid) throw DataError("stored trajectory does not match the configured grid");
    AnalysisOptions opt = c.analysis;
    std::string gamma_note;
    const auto& ic = c.sim.ic;
    if (c.gamma_auto && ic.soliton && !ic.mode_amplitudes.empty()) {
        try {
            auto rep = fgr_at(c, ic.omega);
            opt.Gamma = rep.coefficient.Gamma;
            opt.N = rep.N;
        } catch (const Error& e) {
            gamma_note = e.kind() + ": " + e.what();
        }
    }
    json j;
    if (ic.soliton) {
        auto rep = analyze_trajectory(tr, c.beta, {ic.omega, ic.theta, ic.D, ic.v}, opt);
        write_series_csv(rep.series, (out / "modulation.csv").string());
        j = json::parse(stability_json(rep));
    } else {
        // no soliton: the whole field is radiation
        auto s = radiation_series(tr);
        write_series_csv(s, (out / "modulation.csv").string());
        double tail = s.t.front() + (1.0 - opt.tail_fraction) * (s.t.back() - s.t.front());
        j["frames"] = s.t.size();
        j["T"] = s.t.back();
        std::size_t count = 0;
        for (double t : s.t) count += t >= tail;
        if (count >= 16) {
            auto sc = scattering_extract(s, tail);
            j["scattering"] = {{"start_residual", num(sc.start_residual)},
                               {"end_residual", num(sc.end_residual)},
                               {"ratio", num(sc.ratio)},
                               {"converging", sc.converging},
                               {"verdict", sc.verdict}};
        }
        json norms = json::array();
        for (const auto& e : dispersive_norms(s.t, s.f, s.grid).entries)
            norms.push_back({{"name", e.name}, {"p", num(e.p)}, {"q", num(e.q)}, {"value", num(e.value)}});
        j["norms"] = norms;
    }
    if (!gamma_note.empty()) j["gamma_note"] = gamma_note;
    j["conserved"] = conserved_summary(tr);
    emit(j, out / "stability.json");
    return j.value("breakdown", false) ? 1 : 0;
}

std::map<std::string, std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw DataError("missing " + p.string() + " (run analyze first)");
    std::string line;
    std::getline(is, line);
    std::vector<std::string> names;
    std::stringstream hs(line);
    for (std::string h; std::getline(hs, h, ',');) names.push_back(h);
    std::map<std::string, std::vector<double>> cols;
    while (std::getline(is, line)) {
        std::stringstream ls(line);
        std::size_t k = 0;
        for (std::string v; std::getline(ls, v, ',') && k < names.size(); ++k) cols[names[k]].push_back(std::stod(v));
    }
    return cols;
}

json report_cmd(const fs::path& out) {
    auto m = read_csv(out / "modulation.csv");
    std::ifstream js(out / "stability.json");
    if (!js) throw DataError("missing stability.json (run analyze first)");
    json st = json::parse(js);
    std::vector<std::string> plots;
    const auto& t = m["t"];
    if (m.count("re_z1")) {
        PlotSeries z{"|z_1|", t, {}};
        for (std::size_t i = 0; i < t.size(); ++i) z.y.push_back(std::hypot(m["re_z1"][i], m["im_z1"][i]));
        write_svg_plot((out / "mode_amplitude.svg").string(), "discrete mode amplitude", "t", {z}, true);
        plots.push_back("mode_amplitude.svg");
    }
    write_svg_plot((out / "omega.svg").string(), "modulation frequency", "t", {{"omega", t, m["omega"]}});
    write_svg_plot((out / "velocity.svg").string(), "modulation velocity", "t", {{"v", t, m["v"]}});
    write_svg_plot((out / "radiation.svg").string(), "continuous part", "t",
                   {{"|f|_2", t, m["f_l2"]}, {"|f|_{2,-2}", t, m["f_l2w"]}}, true);
    plots.insert(plots.end(), {"omega.svg", "velocity.svg", "radiation.svg"});
    const fs::path cons = out / "trajectory" / "conserved.csv";
    if (fs::exists(cons)) {
        auto c = read_csv(cons);
        PlotSeries q{"|Q - Q0| / Q0", c["t"], {}}, e{"|E - E0| / |E0|", c["t"], {}};
        for (std::size_t i = 0; i < c["t"].size(); ++i) {
            q.y.push_back(std::abs(c["Q"][i] - c["Q"][0]) / std::abs(c["Q"][0]));
            e.y.push_back(std::abs(c["E"][i] - c["E"][0]) / std::abs(c["E"][0]));
        }
        write_svg_plot((out / "conserved.svg").string(), "conservation", "t", {q, e}, true);
        plots.push_back("conserved.svg");
    }
    std::ofstream md(out / "report.md");
    md << "# nlslab run report\n\n";
    md << "| quantity | value |\n|---|---|\n";
    for (const char* k : {"T", "frames", "omega_plus", "omega_tail_variation", "v_plus", "v_tail_variation",
                          "z_tail_max", "Ddot_minus_v_tail", "thetadot_minus_omega_tail", "Gamma"})
        if (st.contains(k)) md << "| " << k << " | " << st[k].dump() << " |\n";
    if (st.contains("decay") && st["decay"].is_object())
        for (const char* k : {"slope", "predicted_slope", "ratio", "monotone", "final_over_initial"})
            md << "| decay." << k << " | " << st["decay"][k].dump() << " |\n";
    if (st.contains("scattering") && st["scattering"].is_object())
        md << "| scattering.ratio | " << st["scattering"]["ratio"].dump() << " |\n";
    md << "\n";
    for (const auto& p : plots) md << "![" << p << "](" << p << ")\n";
    return {{"plots", plots}, {"summary", "report.md"}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nlslab: soliton asymptotic-stability laboratory"};
    app.require_subcommand(1);
    std::string config_path, output;
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"groundstate", "ground state, charge/energy and the L+ check"},
        {"spectrum", "discrete spectrum of the linearization"},
        {"check-hypotheses", "spectral hypotheses report"},
        {"fgr", "Fermi golden rule coefficient"},
        {"simulate", "time integration, writes the trajectory"},
        {"analyze", "modulation tracking and stability report"},
        {"report", "SVG plots and summary from analyze output"}};
    for (const auto& [name, help] : subs) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        s->add_option("-o,--output", output, "output directory (overrides the config)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        RunConfig c = config_path.empty() ? parse_config("{}") : load_config(config_path);
        const fs::path out = output.empty() ? fs::path(c.output) : fs::path(output);
        if (cmd == "groundstate") emit(groundstate_cmd(c, out), out / "groundstate.json");
        else if (cmd == "spectrum") emit(spectrum_cmd(c), out / "spectrum.json");
        else if (cmd == "check-hypotheses") emit(hypotheses_cmd(c), out / "hypotheses.json");
        else if (cmd == "fgr") emit(json::parse(fgr_json(fgr_at(c, c.omega))), out / "fgr.json");
        else if (cmd == "simulate") return simulate_cmd(c, out);
        else if (cmd == "analyze") return analyze_cmd(c, out);
        else if (cmd == "report") emit(report_cmd(out), out / "report.json");
    } catch (const ConfigError& e) {
        return fail(e.kind(), e.what(), 2);
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), 1);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 0;
}
