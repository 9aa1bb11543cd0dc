#include "nlslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include "json.hpp"
#include "nlslab/fgr.hpp"

namespace nls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double h1_norm(const Grid& g, const CVec& u) {
    CVec uh = fft(u);
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j)
        acc += (1.0 + g.ks()[j] * g.ks()[j]) * std::norm(uh[static_cast<long>(j)]);
    return std::sqrt(acc * g.h() / static_cast<double>(g.n()));
}

double lq_norm(const Grid& g, const CVec& u, double q) {
    if (std::isinf(q)) return u.cwiseAbs().maxCoeff();
    return std::pow((g.weights().array() * u.cwiseAbs().array().pow(q)).sum(), 1.0 / q);
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, max_rel = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    f.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / m;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double model = f.intercept + f.slope * x[i];
        f.max_rel = std::max(f.max_rel, std::abs(y[i] - model) / std::max(std::abs(model), 1e-300));
    }
    return f;
}

nlohmann::json num(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

ModulationSeries track_modulation(const Trajectory& tr, SolitonManifold& M, const ModulationParams& guess,
                                  const TrackOptions& opt) {
    if (tr.snapshots.empty()) throw DataError("trajectory has no snapshots");
    if (tr.grid != M.grid()) throw DataError("trajectory and soliton family live on different grids");
    ModulationSeries out;
    out.grid = tr.grid;
    const long n = static_cast<long>(tr.grid.n());
    M.set_refresh_tol(opt.refresh_tol);
    ModulationParams p = guess;
    double t_prev = tr.snapshots.front().time;
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        const auto& U = tr.snapshots[i];
        // advance the guess along the modulation laws
        const double dt = U.time - t_prev;
        p.D += p.v * dt;
        p.theta += (p.omega + 0.25 * p.v * p.v) * dt;
        t_prev = U.time;
        ModulationState st;
        try {
            st = fit_modulation(U, p, M, opt.fit);
        } catch (const Error& e) {
            out.breakdown = true;
            out.breakdown_frame = i;
            char buf[64];
            std::snprintf(buf, sizeof buf, "frame %zu (t = %.6g): ", i, U.time);
            out.breakdown_message = buf + std::string(e.what());
            break;
        }
        p = st.p;
        out.t.push_back(U.time);
        out.p.push_back(st.p);
        out.z.push_back(st.z);
        if (opt.keep_radiation) out.f.push_back(st.f.head(n));
        out.f_l2.push_back(spinor_norm(tr.grid, st.f));
        out.f_weighted.push_back(weighted_norm(tr.grid, st.f, 2.0));
        out.Qf.push_back(st.Qf);
        out.Pif.push_back(st.Pif);
        out.secular_residual.push_back(st.secular_residual);
    }
    if (!out.p.empty())
        for (const auto& e : M.modes(out.p.back().omega)) out.lambdas.push_back(e.lambda);
    return out;
}

ModulationSeries radiation_series(const Trajectory& tr) {
    ModulationSeries out;
    out.grid = tr.grid;
    for (const auto& U : tr.snapshots) {
        out.t.push_back(U.time);
        out.p.push_back({0.0, 0.0, 0.0, 0.0});
        out.z.emplace_back();
        out.f.push_back(U.u);
        CVec F = U.doubled();
        out.f_l2.push_back(spinor_norm(tr.grid, F));
        out.f_weighted.push_back(weighted_norm(tr.grid, F, 2.0));
        out.Qf.push_back(charge(U));
        out.Pif.push_back(momentum(U)[0]);
        out.secular_residual.push_back(0.0);
    }
    return out;
}

void write_series_csv(const ModulationSeries& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    const std::size_t m = s.z.empty() ? 0 : s.z.front().size();
    write_modulation_header(os, m);
    os << std::setprecision(12);
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const auto& p = s.p[i];
        os << s.t[i] << ',' << p.omega << ',' << p.theta << ',' << p.D << ',' << p.v;
        for (const auto& z : s.z[i]) os << ',' << z.real() << ',' << z.imag();
        os << ',' << s.f_l2[i] << ',' << s.f_weighted[i] << ',' << s.Qf[i] << ',' << s.Pif[i] << '\n';
    }
}

LawResiduals modulation_laws(const ModulationSeries& s, double tail_from) {
    LawResiduals out;
    for (std::size_t i = 1; i + 1 < s.t.size(); ++i) {
        const double dt = s.t[i + 1] - s.t[i - 1];
        const auto& p = s.p[i];
        double Ddot = (s.p[i + 1].D - s.p[i - 1].D) / dt;
        double thdot = (s.p[i + 1].theta - s.p[i - 1].theta) / dt;
        out.t.push_back(s.t[i]);
        out.Ddot_minus_v.push_back(Ddot - p.v);
        out.thetadot_minus.push_back(thdot - p.omega - 0.25 * p.v * p.v);
        if (s.t[i] >= tail_from) {
            out.tail_Ddot = std::max(out.tail_Ddot, std::abs(out.Ddot_minus_v.back()));
            out.tail_theta = std::max(out.tail_theta, std::abs(out.thetadot_minus.back()));
        }
    }
    return out;
}

ScatteringResult scattering_extract(const ModulationSeries& s, double t_from) {
    const Grid& g = s.grid;
    if (g.radial()) throw DataError("scattering extraction is one-dimensional only");
    if (s.f.size() != s.t.size()) throw DataError("series carries no radiation fields");
    ScatteringResult out;
    std::vector<CVec> w;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        if (s.t[i] < t_from) continue;
        const auto& p = s.p[i];
        // lab-frame radiation, then free flow run backwards to t = 0
        CVec lab = gauge_boost(SpinorField(g, s.f[i]), p.v, p.theta, p.D).u;
        CVec back(lab.size());
        for (std::size_t j = 0; j < g.n(); ++j)
            back[static_cast<long>(j)] = std::exp(kI * (s.t[i] * g.ks()[j] * g.ks()[j]));
        w.push_back(apply_multiplier(lab, back));
        out.t.push_back(s.t[i]);
    }
    if (w.size() < 16) throw DataError("scattering tail needs at least 16 samples");
    out.f_plus = CVec::Zero(w.front().size());
    for (const auto& x : w) out.f_plus += x;
    out.f_plus /= static_cast<double>(w.size());
    for (std::size_t i = 1; i < w.size(); ++i) out.residuals.push_back(h1_norm(g, w[i] - w[i - 1]));
    const std::size_t k = std::min<std::size_t>(4, out.residuals.size());
    for (std::size_t i = 0; i < k; ++i) {
        out.start_residual += out.residuals[i] / static_cast<double>(k);
        out.end_residual += out.residuals[out.residuals.size() - 1 - i] / static_cast<double>(k);
    }
    out.ratio = out.end_residual > 0.0 ? out.start_residual / out.end_residual
                                       : (out.start_residual > 0.0 ? kInf : 1.0);
    out.converging = out.end_residual <= out.start_residual;
    out.verdict = out.converging ? "converging" : "no-convergence";
    return out;
}

const NormEntry* NormTable::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

NormTable dispersive_norms(const std::vector<double>& t, const std::vector<CVec>& f, const Grid& g, double S) {
    if (t.size() != f.size()) throw DataError("time and field series differ in length");
    for (std::size_t i = 2; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - (t[1] - t[0])) > 1e-9 * std::max(1.0, std::abs(t[1] - t[0])))
            throw DataError("dispersive norms need a uniform time stride");
    const double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
    // 2/p + d/q = d/2
    std::vector<std::pair<double, double>> pairs;
    if (g.radial())
        pairs = {{kInf, 2.0}, {4.0, 3.0}, {2.0, 6.0}};
    else
        pairs = {{kInf, 2.0}, {8.0, 4.0}, {4.0, kInf}};
    auto label = [](double v) {
        if (std::isinf(v)) return std::string("inf");
        char b[16];
        std::snprintf(b, sizeof b, "%g", v);
        return std::string(b);
    };
    NormTable out;
    for (auto [p, q] : pairs) {
        double acc = 0.0;
        for (const auto& u : f) {
            double a = lq_norm(g, u, q) + lq_norm(g, deriv(g, u), q);
            acc = std::isinf(p) ? std::max(acc, a) : acc + dt * std::pow(a, p);
        }
        out.entries.push_back({"L^" + label(p) + "_t W^{1," + label(q) + "}_x", p, q,
                               std::isinf(p) ? acc : std::pow(acc, 1.0 / p)});
    }
    double acc = 0.0;
    const RVec& x = g.xs();
    for (const auto& u : f)
        acc += dt * (g.weights().array() * (1.0 + x.array().square()).pow(-S) * u.cwiseAbs2().array()).sum();
    out.entries.push_back({"L^2_t L^{2,-" + label(S) + "}_x", 2.0, 2.0, std::sqrt(acc)});
    return out;
}

DecayReport compare_decay(const std::vector<double>& t, const std::vector<cplx>& z, double lambda, double Gamma, int N,
                          double tail_from, double window_periods) {
    if (t.size() != z.size()) throw DataError("time and mode series differ in length");
    if (!(lambda > 0.0)) throw DataError("decay comparison needs lambda > 0");
    DecayReport r;
    r.window = window_periods * 2.0 * kPi / lambda;
    double zmax = 0.0;
    for (cplx v : z) zmax = std::max(zmax, std::abs(v));
    if (zmax == 0.0) {
        r.trivial = true;
        r.monotone = true;
        return r;
    }
    // centred running mean of |z| over the window
    const double half = 0.5 * r.window;
    std::size_t lo = 0, hi = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] - half < t.front() || t[i] + half > t.back()) continue;
        while (hi < t.size() && t[hi] <= t[i] + half) sum += std::abs(z[hi++]);
        while (t[lo] < t[i] - half) sum -= std::abs(z[lo++]);
        r.env_t.push_back(t[i]);
        r.env.push_back(sum / static_cast<double>(hi - lo));
    }
    if (r.env.size() < 3) return r;
    r.initial_envelope = r.env.front();
    r.final_envelope = r.env.back();
    r.final_over_initial = r.final_envelope / r.initial_envelope;

    std::vector<double> ft, fy;
    for (std::size_t i = 0; i < r.env.size(); ++i)
        if (r.env_t[i] >= tail_from) {
            ft.push_back(r.env_t[i]);
            fy.push_back(1.0 / (r.env[i] * r.env[i]));
        }
    if (ft.size() >= 3) {
        auto lf = fit_line(ft, fy);
        r.fitted = true;
        r.slope = lf.slope;
        r.intercept = lf.intercept;
        r.fit_residual = lf.max_rel;
        // block means over consecutive windows must not grow
        r.monotone = true;
        double prev = kInf, acc = 0.0;
        std::size_t cnt = 0;
        double edge = ft.front() + r.window;
        for (std::size_t i = 0; i < ft.size(); ++i) {
            if (ft[i] >= edge) {
                double mean = acc / static_cast<double>(cnt);
                if (mean > prev * (1.0 + 1e-9)) r.monotone = false;
                prev = mean;
                acc = 0.0;
                cnt = 0;
                edge += r.window;
            }
            acc += 1.0 / std::sqrt(fy[i]);
            ++cnt;
        }
        if (!std::isnan(Gamma)) {
            const double span = ft.back() - ft.front();
            const double h = std::min(0.05, 2.0 * kPi / (100.0 * lambda));
            const int every = std::max(1, static_cast<int>(std::lround((span / 200.0) / h)));
            auto ode = reduced_mode_ode({cplx(1.0 / std::sqrt(fy.front()), 0.0)}, {lambda}, Gamma, N, span, h, every);
            std::vector<double> ot, oy;
            for (std::size_t i = 0; i < ode.t.size(); ++i) {
                ot.push_back(ode.t[i]);
                oy.push_back(1.0 / std::norm(ode.zeta[i][0]));
            }
            r.predicted_slope = fit_line(ot, oy).slope;
            r.ratio = r.predicted_slope != 0.0 ? r.slope / r.predicted_slope : kInf;
        } else {
            r.ratio = std::numeric_limits<double>::quiet_NaN();
        }
    }
    r.fgr_failure = !(r.fitted && r.slope > 0.0) || r.final_envelope >= r.initial_envelope;
    return r;
}

StabilityReport analyze_trajectory(const Trajectory& tr, const Nonlinearity& beta, const ModulationParams& guess,
                                   const AnalysisOptions& opt) {
    StabilityReport r;
    r.Gamma = opt.Gamma;
    SolitonManifold M(beta, tr.grid);
    r.series = track_modulation(tr, M, guess, opt.track);
    const auto& s = r.series;
    if (s.t.empty()) return r;
    const double t0 = s.t.front();
    r.T = s.t.back();
    r.tail_from = t0 + (1.0 - opt.tail_fraction) * (r.T - t0);

    double wlo = kInf, whi = -kInf, vlo = kInf, vhi = -kInf;
    std::vector<double> tail_w, tail_v;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        if (s.t[i] < r.tail_from) continue;
        const auto& p = s.p[i];
        wlo = std::min(wlo, p.omega);
        whi = std::max(whi, p.omega);
        vlo = std::min(vlo, p.v);
        vhi = std::max(vhi, p.v);
        tail_w.push_back(p.omega);
        tail_v.push_back(p.v);
        for (cplx z : s.z[i]) r.z_tail_max = std::max(r.z_tail_max, std::abs(z));
    }
    r.omega_tail_variation = whi - wlo;
    r.v_tail_variation = vhi - vlo;
    // limits: mean over the last tenth of the tail
    const std::size_t k = std::max<std::size_t>(1, tail_w.size() / 10);
    for (std::size_t i = tail_w.size() - k; i < tail_w.size(); ++i) {
        r.omega_plus += tail_w[i] / static_cast<double>(k);
        r.v_plus += tail_v[i] / static_cast<double>(k);
    }
    r.laws = modulation_laws(s, r.tail_from);
    if (!s.lambdas.empty() && !s.z.front().empty()) {
        std::vector<cplx> z0;
        for (const auto& z : s.z) z0.push_back(z[0]);
        r.decay = compare_decay(s.t, z0, s.lambdas[0], opt.Gamma, opt.N,
                                t0 + opt.transient_fraction * (r.T - t0), opt.window_periods);
    }
    std::size_t tail_count = 0;
    for (double t : s.t) tail_count += t >= r.tail_from;
    if (!s.f.empty() && tail_count >= 16 && !tr.grid.radial()) r.scattering = scattering_extract(s, r.tail_from);
    if (!s.f.empty()) r.norms = dispersive_norms(s.t, s.f, tr.grid);
    return r;
}

std::string stability_json(const StabilityReport& r, int indent) {
    using nlohmann::json;
    const auto& s = r.series;
    json j;
    j["frames"] = s.t.size();
    j["T"] = num(r.T);
    j["tail_from"] = num(r.tail_from);
    j["breakdown"] = s.breakdown;
    if (s.breakdown) {
        j["breakdown_frame"] = s.breakdown_frame;
        j["breakdown_message"] = s.breakdown_message;
    }
    j["lambda"] = s.lambdas;
    j["omega_plus"] = num(r.omega_plus);
    j["omega_tail_variation"] = num(r.omega_tail_variation);
    j["v_plus"] = num(r.v_plus);
    j["v_tail_variation"] = num(r.v_tail_variation);
    j["z_tail_max"] = num(r.z_tail_max);
    j["Ddot_minus_v_tail"] = num(r.laws.tail_Ddot);
    j["thetadot_minus_omega_tail"] = num(r.laws.tail_theta);
    j["Gamma"] = num(r.Gamma);
    if (r.decay) {
        const auto& d = *r.decay;
        j["decay"] = {{"trivial", d.trivial},
                      {"fitted", d.fitted},
                      {"window", num(d.window)},
                      {"slope", num(d.slope)},
                      {"intercept", num(d.intercept)},
                      {"fit_residual", num(d.fit_residual)},
                      {"predicted_slope", num(d.predicted_slope)},
                      {"ratio", num(d.ratio)},
                      {"monotone", d.monotone},
                      {"fgr_failure", d.fgr_failure},
                      {"initial_envelope", num(d.initial_envelope)},
                      {"final_envelope", num(d.final_envelope)},
                      {"final_over_initial", num(d.final_over_initial)}};
    } else {
        j["decay"] = nullptr;
    }
    if (r.scattering) {
        const auto& sc = *r.scattering;
        j["scattering"] = {{"start_residual", num(sc.start_residual)},
                           {"end_residual", num(sc.end_residual)},
                           {"ratio", num(sc.ratio)},
                           {"converging", sc.converging},
                           {"verdict", sc.verdict},
                           {"f_plus_l2", num(l2_norm(s.grid, sc.f_plus))}};
    } else {
        j["scattering"] = nullptr;
    }
    json norms = json::array();
    for (const auto& e : r.norms.entries) norms.push_back({{"name", e.name}, {"p", num(e.p)}, {"q", num(e.q)}, {"value", num(e.value)}});
    j["norms"] = norms;
    return j.dump(indent);
}

void write_svg_plot(const std::string& path, const std::string& title, const std::string& xlabel,
                    const std::vector<PlotSeries>& series, bool log_y) {
    const double W = 720, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    auto yv = [&](double y) { return log_y ? std::log10(y) : y; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (log_y && !(s.y[i] > 0.0)) continue;
            if (!std::isfinite(s.x[i]) || !std::isfinite(yv(s.y[i]))) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, yv(s.y[i]));
            y1 = std::max(y1, yv(s.y[i]));
        }
    if (!(x1 > x0)) {
        if (!std::isfinite(x0)) x0 = 0.0;
        x1 = x0 + 1.0;
    }
    if (!(y1 > y0)) {
        if (!std::isfinite(y0)) y0 = 0.0;
        y1 = y0 + 1.0;
        y0 -= 1.0;
    }
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    char b[256];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << title << "</text>\n";
    std::snprintf(b, sizeof b, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                  ml, mt, W - ml - mr, H - mt - mb);
    os << b;
    for (int k = 0; k <= 4; ++k) {
        double xv = x0 + (x1 - x0) * k / 4.0, yvv = y0 + (y1 - y0) * k / 4.0;
        std::snprintf(b, sizeof b,
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                      "font-size=\"11\">%.4g</text>\n",
                      px(xv), H - mb + 16, xv);
        os << b;
        std::snprintf(b, sizeof b,
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-family=\"sans-serif\" "
                      "font-size=\"11\">%s%.4g</text>\n",
                      ml - 6, py(yvv) + 4, log_y ? "1e" : "", yvv);
        os << b;
    }
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel << "</text>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* c = colors[s % 6];
        os << "<polyline fill=\"none\" stroke-width=\"1.3\" stroke=\"" << c << "\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
            double y = series[s].y[i];
            if (log_y && !(y > 0.0)) continue;
            if (!std::isfinite(series[s].x[i]) || !std::isfinite(yv(y))) continue;
            std::snprintf(b, sizeof b, "%.2f,%.2f ", px(series[s].x[i]), py(yv(y)));
            os << b;
        }
        os << "\"/>\n";
        std::snprintf(b, sizeof b,
                      "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                      ml + 10, mt + 16 + 15.0 * static_cast<double>(s), c, series[s].label.c_str());
        os << b;
    }
    os << "</svg>\n";
}

}  // namespace nls
