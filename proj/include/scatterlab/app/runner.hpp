#pragma once
// Executes a RunConfig and writes summary.json, CSV tables and SVG figures
// into cfg.out_dir.
#include "../analytic.hpp"
#include "../dynamics.hpp"
#include "../io/csv.hpp"
#include "../io/svg.hpp"
#include "../steady.hpp"
#include "config.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace scatterlab::app {

struct RunOutput {
    std::filesystem::path dir;
    std::vector<std::string> files; ///< written artifacts, relative to dir
    json summary;
    std::vector<std::string> warnings;
};

namespace detail {

inline json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json center_json(const CenterSpec& c) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SSHCenter>) {
                return {{"model", "ssh"}, {"v", s.v}, {"w", s.w}, {"cells", s.cells}};
            } else if constexpr (std::is_same_v<T, NonHermitianSSHCenter>) {
                return {{"model", "nh-ssh"}, {"v", s.v}, {"w", s.w}, {"gamma", s.gamma}, {"cells", s.cells}};
            } else {
                json re = json::array(), im = json::array();
                for (Eigen::Index r = 0; r < s.matrix.rows(); ++r) {
                    json rr = json::array(), ii = json::array();
                    for (Eigen::Index c = 0; c < s.matrix.cols(); ++c) {
                        rr.push_back(s.matrix(r, c).real());
                        ii.push_back(s.matrix(r, c).imag());
                    }
                    re.push_back(rr);
                    im.push_back(ii);
                }
                return {{"model", "custom"}, {"real", re}, {"imag", im}};
            }
        },
        c);
}

inline json propagator_json(const PropagatorConfig& p) {
    return {{"tolerance", p.tolerance},
            {"snapshot_stride", p.snapshot_stride},
            {"max_time", p.max_time},
            {"full_state", p.full_state_snapshots},
            {"krylov_dim", p.krylov_dim}};
}

inline json packet_json(const WavePacketSpec& p) {
    return {{"center_site", p.center_site}, {"width", p.width}, {"wave_vector", p.wave_vector}};
}

/// SSH centers off the transition have closed-form channel probabilities.
inline std::optional<double> ssh_ratio(const CenterSpec& c) {
    if (const auto* s = std::get_if<SSHCenter>(&c); s && s->w > 0.0 && s->v > 0.0 && s->v != s->w)
        return s->v / s->w;
    return std::nullopt;
}

/// Real analytic level whose energy is closest to `energy`.
inline std::optional<analytic::NHLevel> nearest_nh_level(const CenterSpec& c, double energy) {
    const auto* s = std::get_if<NonHermitianSSHCenter>(&c);
    if (!s)
        return std::nullopt;
    std::optional<analytic::NHLevel> best;
    for (const auto& l : analytic::nh_spectrum(s->v, s->w, s->gamma, s->cells).real_levels())
        if (!best || std::abs(l.energy - energy) < std::abs(best->energy - energy))
            best = l;
    return best;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

inline void write_channels(const std::filesystem::path& path, const std::vector<double>& p, const CenterSpec& center,
                           const std::vector<cplx>* amplitudes) {
    std::vector<std::string> cols{"channel", "probability", "theory"};
    if (amplitudes)
        cols.insert(cols.end(), {"amplitude_re", "amplitude_im"});
    io::CsvWriter csv(path.string(), cols);
    const auto q = ssh_ratio(center);
    for (std::size_t l = 0; l < p.size(); ++l) {
        std::vector<io::Cell> row{l, p[l], q ? io::Cell(analytic::predicted_probability(*q, static_cast<int>(l)))
                                             : io::Cell("")};
        if (amplitudes) {
            row.emplace_back((*amplitudes)[l].real());
            row.emplace_back((*amplitudes)[l].imag());
        }
        csv.row(row);
    }
}

/// Odd-lead and even-lead profiles normalized to the odd-lead maximum,
/// compared with sin^2(kappa m).
inline json nh_profile_json(const std::vector<double>& p, const analytic::NHLevel& level, int cells) {
    const auto theory = analytic::nh_transmission_profile(level, cells);
    double peak = 0.0;
    for (int m = 1; m <= cells && 2 * m < static_cast<int>(p.size()); ++m)
        peak = std::max(peak, p[2 * m - 1]);
    json odd = json::array(), even = json::array();
    double dev = 0.0, odd_even = 0.0;
    for (int m = 1; m <= cells && 2 * m < static_cast<int>(p.size()); ++m) {
        odd.push_back(p[2 * m - 1] / peak);
        even.push_back(p[2 * m] / peak);
        dev = std::max(dev, std::abs(p[2 * m - 1] / peak - theory[m - 1]));
        odd_even = std::max(odd_even, std::abs(p[2 * m - 1] - p[2 * m]) / peak);
    }
    return {{"level", level.n},
            {"level_energy", level.energy},
            {"odd_profile", odd},
            {"even_profile", even},
            {"theory_profile", theory},
            {"max_profile_deviation", dev},
            {"max_odd_even_difference", odd_even}};
}

inline json theory_json(const CenterSpec& center, std::size_t channels) {
    const auto q = ssh_ratio(center);
    if (!q)
        return nullptr;
    json p = json::array();
    for (std::size_t l = 0; l < channels; ++l)
        p.push_back(analytic::predicted_probability(*q, static_cast<int>(l)));
    json out{{"q", *q}, {"probabilities", p}, {"reflectance", analytic::reflection_theory(*q)}};
    if (*q < 1.0)
        out["visibility"] = analytic::visibility_theory(*q);
    return out;
}

inline json visibility_json(const std::vector<double>& p) {
    if (p.size() < 4)
        return nullptr;
    try {
        return visibility(p, 1);
    } catch (const PreconditionError& e) {
        return e.what();
    }
}

// ---------------------------------------------------------------------------

inline void run_steady(const RunConfig& cfg, RunOutput& out) {
    const auto sol = solve_steady(cfg.network(), cfg.k);
    std::vector<double> p{sol.reflectance()};
    std::vector<cplx> amps{sol.reflection};
    for (std::size_t l = 0; l < sol.transmission.size(); ++l) {
        p.push_back(std::norm(sol.transmission[l]));
        amps.push_back(sol.transmission[l]);
    }
    write_channels(out.dir / "channels.csv", p, cfg.center, &amps);
    out.files.push_back("channels.csv");

    json t = json::array();
    for (const auto& z : sol.transmission)
        t.push_back(complex_json(z));
    json o{{"energy", sol.energy},
           {"reflection", complex_json(sol.reflection)},
           {"reflectance", sol.reflectance()},
           {"transmission", t},
           {"probabilities", p},
           {"flux_error", sol.flux_error},
           {"visibility", visibility_json(p)}};
    if (auto lvl = nearest_nh_level(cfg.center, sol.energy))
        o["nh_profile"] = nh_profile_json(p, *lvl, std::get<NonHermitianSSHCenter>(cfg.center).cells);
    out.summary["outputs"] = o;
    out.summary["theory"] = theory_json(cfg.center, p.size());
    out.warnings.insert(out.warnings.end(), sol.warnings.begin(), sol.warnings.end());
}

inline void write_dynamics_artifacts(const RunConfig& cfg, const Network& net, const TrajectoryRecord& rec,
                                     RunOutput& out) {
    const auto& reg = net.registry();
    const int channels = reg.output_leads() + 1;
    {
        io::CsvWriter csv((out.dir / "trajectory.csv").string(), {"time", "channel", "probability"});
        for (std::size_t s = 0; s < rec.times.size(); ++s) {
            const auto& d = rec.densities[s];
            csv.row({rec.times[s], "center", d.head(reg.center_sites()).sum()});
            for (int c = 0; c < channels; ++c)
                csv.row({rec.times[s], c, d.segment(reg.lead_begin(c), reg.lead_length()).sum()});
        }
        out.files.push_back("trajectory.csv");
    }
    if (cfg.write_snapshots) {
        {
            io::CsvWriter csv((out.dir / "sites.csv").string(), {"index", "region", "channel", "offset"});
            static const char* names[] = {"center", "input", "output"};
            for (Eigen::Index i = 0; i < reg.dim(); ++i) {
                const Site s = reg.site(i);
                csv.row({static_cast<long>(i), names[static_cast<int>(s.region)], s.channel, s.offset});
            }
        }
        std::vector<std::string> cols{"time"};
        for (Eigen::Index i = 0; i < reg.dim(); ++i)
            cols.push_back("site_" + std::to_string(i));
        io::CsvWriter csv((out.dir / "snapshots.csv").string(), cols);
        for (std::size_t s = 0; s < rec.times.size(); ++s) {
            std::vector<io::Cell> row{rec.times[s]};
            row.reserve(reg.dim() + 1);
            for (Eigen::Index i = 0; i < reg.dim(); ++i)
                row.emplace_back(rec.densities[s](i));
            csv.row(row);
        }
        out.files.insert(out.files.end(), {"sites.csv", "snapshots.csv"});
    }

    // channel x time
    io::Heatmap traj;
    traj.title = cfg.label + ": channel probability vs time";
    traj.x_label = "time";
    traj.y_label = "channel";
    traj.rows = channels;
    traj.cols = static_cast<int>(rec.times.size());
    traj.x_min = rec.times.front();
    traj.x_max = rec.times.back();
    for (int c = 0; c < channels; ++c) {
        traj.row_labels.push_back(c == 0 ? "in" : std::to_string(c));
        for (std::size_t s = 0; s < rec.times.size(); ++s)
            traj.values.push_back(rec.densities[s].segment(reg.lead_begin(c), reg.lead_length()).sum());
    }
    io::write_svg((out.dir / "trajectory.svg").string(), traj);

    // final |psi|^2: even leads drawn to the left of the junction, odd leads to the right
    io::Heatmap fin;
    fin.title = cfg.label + ": final |psi|^2 on the leads";
    fin.x_label = "lead site (even leads left, odd right)";
    fin.y_label = "cell";
    const int L = reg.lead_length();
    const int rows = 1 + (reg.output_leads() + 1) / 2;
    fin.rows = rows;
    fin.cols = 2 * L;
    fin.x_min = -L;
    fin.x_max = L;
    fin.values.assign(static_cast<std::size_t>(rows) * fin.cols, 0.0);
    const Eigen::VectorXd d = rec.final_state.cwiseAbs2();
    auto put = [&](int row, int col, double v) { fin.values[static_cast<std::size_t>(row) * fin.cols + col] = v; };
    for (int j = 1; j <= L; ++j)
        put(0, L - j, d(reg.lead_begin(0) + j - 1));
    fin.row_labels.push_back("in");
    for (int m = 1; m < rows; ++m) {
        const int odd = 2 * m - 1, even = 2 * m;
        for (int j = 1; j <= L; ++j) {
            if (odd <= reg.output_leads())
                put(m, L + j - 1, d(reg.lead_begin(odd) + j - 1));
            if (even <= reg.output_leads())
                put(m, L - j, d(reg.lead_begin(even) + j - 1));
        }
        fin.row_labels.push_back(std::to_string(m));
    }
    io::write_svg((out.dir / "final_state.svg").string(), fin);
    out.files.insert(out.files.end(), {"trajectory.svg", "final_state.svg"});
}

inline void run_dynamics(const RunConfig& cfg, RunOutput& out) {
    const Network net(cfg.network());
    const Propagator probe(net.hamiltonian, cfg.propagator);
    const auto rec = run_experiment(net, cfg.packet, cfg.propagator);
    const auto& p = rec.channel_probabilities;
    write_channels(out.dir / "channels.csv", p, cfg.center, nullptr);
    out.files.push_back("channels.csv");
    write_dynamics_artifacts(cfg, net, rec, out);

    json o{{"probabilities", p},
           {"reflectance", p.at(0)},
           {"center_residual", rec.center_residual},
           {"visibility", visibility_json(p)},
           {"base_time", rec.base_time},
           {"final_time", rec.final_time},
           {"final_norm", rec.final_norm()},
           {"snapshots", rec.times.size()},
           {"propagator", probe.uses_chebyshev() ? "chebyshev" : "krylov"},
           {"dimension", net.hamiltonian.dim()}};
    if (auto lvl = nearest_nh_level(cfg.center, cfg.lead.chemical_potential))
        o["nh_profile"] = nh_profile_json(p, *lvl, std::get<NonHermitianSSHCenter>(cfg.center).cells);
    out.summary["outputs"] = o;
    out.summary["theory"] = theory_json(cfg.center, p.size());
    out.warnings.insert(out.warnings.end(), rec.warnings.begin(), rec.warnings.end());
}

inline void run_mu_scan(const RunConfig& cfg, RunOutput& out) {
    const DenseMatrix hc = build_center(cfg.center).center_block();
    ScanOptions opts;
    opts.workers = cfg.workers;
    const auto scan = mu_scan(hc, cfg.scan.alpha, cfg.lead.hopping, cfg.k, cfg.scan.mu_min, cfg.scan.mu_max,
                              cfg.scan.step, opts);
    const auto eigs = dense_eigs(hc);
    std::vector<double> analytic_levels;
    if (const auto* s = std::get_if<NonHermitianSSHCenter>(&cfg.center))
        for (const auto& l : analytic::nh_spectrum(s->v, s->w, s->gamma, s->cells).real_levels())
            analytic_levels.push_back(l.energy);

    // grid rows nearest to an accepted resonance carry a flag
    std::vector<bool> flagged(scan.mu.size(), false);
    for (const auto& r : scan.resonances) {
        const auto i = static_cast<std::size_t>(std::lround((r.mu - cfg.scan.mu_min) / cfg.scan.step));
        if (i < flagged.size())
            flagged[i] = true;
    }
    {
        io::CsvWriter csv((out.dir / "scan.csv").string(), {"mu", "reflectance", "flag"});
        for (std::size_t i = 0; i < scan.mu.size(); ++i)
            csv.row({scan.mu[i], scan.reflectance[i], flagged[i] ? "resonance" : (std::isnan(scan.reflectance[i]) ? "singular" : "")});
    }

    auto nearest = [](const std::vector<double>& xs, double x) -> std::optional<double> {
        std::optional<double> best;
        for (double v : xs)
            if (!best || std::abs(v - x) < std::abs(*best - x))
                best = v;
        return best;
    };
    std::vector<double> real_eigs;
    std::vector<double> weights;
    for (const auto& e : eigs)
        if (std::abs(e.value.imag()) < 1e-9) {
            real_eigs.push_back(e.value.real());
            weights.push_back(std::abs(e.vector(cfg.scan.alpha - 1)));
        }

    json res = json::array(), rej = json::array();
    {
        io::CsvWriter csv((out.dir / "resonances.csv").string(),
                          {"mu", "reflectance", "status", "nearest_eigenvalue", "eigen_weight", "analytic_energy"});
        auto emit = [&](const Resonance& r, const char* status, json& list) {
            io::Cell eig(""), weight(""), ana("");
            json entry{{"mu", r.mu}, {"reflectance", r.reflectance}};
            if (auto e = nearest(real_eigs, r.mu)) {
                const auto idx = std::find(real_eigs.begin(), real_eigs.end(), *e) - real_eigs.begin();
                eig = io::Cell(*e);
                weight = io::Cell(weights[idx]);
                entry["nearest_eigenvalue"] = *e;
                entry["eigen_weight"] = weights[idx];
            }
            if (auto a = nearest(analytic_levels, r.mu)) {
                ana = io::Cell(*a);
                entry["analytic_energy"] = *a;
            }
            csv.row({r.mu, r.reflectance, status, eig, weight, ana});
            list.push_back(entry);
        };
        for (const auto& r : scan.resonances)
            emit(r, "accepted", res);
        for (const auto& r : scan.rejected)
            emit(r, "rejected", rej);
        for (double d : scan.dark_states)
            csv.row({d, "", "dark", d, 0.0, ""});
    }
    out.files.insert(out.files.end(), {"scan.csv", "resonances.csv"});

    io::LinePlot plot;
    plot.title = cfg.label + ": two-lead reflectance";
    plot.x_label = "mu";
    plot.y_label = "|r|^2";
    plot.series.push_back({"|r|^2", scan.mu, scan.reflectance, "black", false});
    io::Series found{"resonances", {}, {}, "blue", true};
    for (const auto& r : scan.resonances) {
        found.x.push_back(r.mu);
        found.y.push_back(r.reflectance);
    }
    plot.series.push_back(found);
    if (!analytic_levels.empty()) {
        io::Series ana{"analytic levels", {}, {}, "green", true};
        for (double a : analytic_levels)
            if (a >= cfg.scan.mu_min && a <= cfg.scan.mu_max) {
                ana.x.push_back(a);
                ana.y.push_back(0.0);
            }
        plot.series.push_back(ana);
    }
    for (double e : real_eigs)
        plot.vertical_markers.push_back(e);
    io::write_svg((out.dir / "reflectance.svg").string(), plot);
    out.files.push_back("reflectance.svg");

    json eig_json = json::array();
    for (std::size_t i = 0; i < real_eigs.size(); ++i)
        eig_json.push_back({{"value", real_eigs[i]}, {"weight", weights[i]}});
    out.summary["outputs"] = {{"points", scan.mu.size()},
                              {"resonances", res},
                              {"rejected", rej},
                              {"dark_states", scan.dark_states},
                              {"eigenvalues", eig_json}};
    out.summary["theory"] = analytic_levels.empty() ? json(nullptr) : json{{"analytic_levels", analytic_levels}};
    for (const auto& r : scan.rejected)
        out.warnings.push_back("reflectance minimum at mu = " + io::format_number(r.mu) +
                               " did not refine to a zero (|r|^2 = " + io::format_number(r.reflectance) + ")");
}

struct SweepPoint {
    double q = 0.0;
    std::string status;
    double v_measured = NAN;
    double r2_measured = NAN;
    std::vector<double> probabilities;
};

inline RunConfig sweep_point_config(const RunConfig& cfg, double q) {
    RunConfig point = cfg;
    point.mode = Mode::dynamics;
    point.center = SSHCenter{q * cfg.sweep.w, cfg.sweep.w, cfg.sweep.cells};
    point.n_output_leads = 0;
    point.input_site = 1;
    return point;
}

inline void run_q_sweep(const RunConfig& cfg, RunOutput& out) {
    const auto points = parallel_map(cfg.sweep.q.size(), cfg.workers, [&](std::size_t i) {
        SweepPoint pt;
        pt.q = cfg.sweep.q[i];
        if (pt.q == 1.0) {
            pt.status = "excluded (transition)";
            return pt;
        }
        const Network net(sweep_point_config(cfg, pt.q).network());
        const auto rec = run_experiment(net, cfg.packet, cfg.propagator);
        pt.probabilities = rec.channel_probabilities;
        pt.r2_measured = pt.probabilities.at(0);
        pt.status = "ok";
        try {
            pt.v_measured = visibility(pt.probabilities, 1);
        } catch (const PreconditionError&) {
            pt.status = "visibility undefined";
        }
        if (!rec.warnings.empty())
            pt.status += " (warning: " + rec.warnings.front() + ")";
        return pt;
    });

    json rows = json::array();
    io::LinePlot plot;
    plot.title = cfg.label + ": visibility and reflectance vs q";
    plot.x_label = "q = v/w";
    plot.y_label = "V(1), |r|^2";
    io::Series vm{"V(1) measured", {}, {}, "black", true}, rm{"|r|^2 measured", {}, {}, "red", true};
    {
        io::CsvWriter csv((out.dir / "qsweep.csv").string(),
                          {"q", "status", "V1_measured", "V1_theory", "r2_measured", "r2_theory"});
        for (const auto& pt : points) {
            const bool excluded = pt.q == 1.0;
            const io::Cell v_th = excluded ? io::Cell("") : io::Cell(analytic::visibility_curve(pt.q));
            const io::Cell r_th = excluded ? io::Cell("") : io::Cell(analytic::reflection_theory(pt.q));
            csv.row({pt.q, pt.status, excluded ? io::Cell("") : io::Cell(pt.v_measured), v_th,
                     excluded ? io::Cell("") : io::Cell(pt.r2_measured), r_th});
            json row{{"q", pt.q}, {"status", pt.status}};
            if (!excluded) {
                row["V1_measured"] = std::isfinite(pt.v_measured) ? json(pt.v_measured) : json(nullptr);
                row["V1_theory"] = analytic::visibility_curve(pt.q);
                row["r2_measured"] = pt.r2_measured;
                row["r2_theory"] = analytic::reflection_theory(pt.q);
                row["probabilities"] = pt.probabilities;
                vm.x.push_back(pt.q);
                vm.y.push_back(pt.v_measured);
                rm.x.push_back(pt.q);
                rm.y.push_back(pt.r2_measured);
            }
            rows.push_back(row);
        }
    }
    out.files.push_back("qsweep.csv");

    io::Series vt{"|1-q^2|/(1+q^2)", {}, {}, "black", false}, rt{"|r|^2 theory", {}, {}, "red", false};
    double q_lo = *std::min_element(cfg.sweep.q.begin(), cfg.sweep.q.end());
    double q_hi = *std::max_element(cfg.sweep.q.begin(), cfg.sweep.q.end());
    for (int i = 0; i <= 400; ++i) {
        const double q = q_lo + (q_hi - q_lo) * i / 400.0;
        if (std::abs(q - 1.0) < 1e-9)
            continue;
        vt.x.push_back(q);
        vt.y.push_back(analytic::visibility_curve(q));
        rt.x.push_back(q);
        rt.y.push_back(analytic::reflection_theory(q));
    }
    plot.series = {vt, rt, vm, rm};
    plot.vertical_markers.push_back(1.0);
    io::write_svg((out.dir / "qsweep.svg").string(), plot);
    out.files.push_back("qsweep.svg");
    out.summary["outputs"] = {{"points", rows}};
}

} // namespace detail

/// Echo of every input, in the same layout as the configuration file.
inline json inputs_json(const RunConfig& cfg) {
    json in{{"mode", to_string(cfg.mode)},
            {"label", cfg.label},
            {"lead", {{"J", cfg.lead.hopping}, {"mu", cfg.lead.chemical_potential}, {"length", cfg.lead.length}}}};
    switch (cfg.mode) {
    case Mode::steady:
        in["center"] = detail::center_json(cfg.center);
        in["k"] = cfg.k;
        in["n_output_leads"] = cfg.n_output_leads;
        in["input_site"] = cfg.input_site;
        break;
    case Mode::dynamics:
        in["center"] = detail::center_json(cfg.center);
        in["packet"] = detail::packet_json(cfg.packet);
        in["propagator"] = detail::propagator_json(cfg.propagator);
        in["n_output_leads"] = cfg.n_output_leads;
        in["input_site"] = cfg.input_site;
        in["write_snapshots"] = cfg.write_snapshots;
        break;
    case Mode::mu_scan:
        in["center"] = detail::center_json(cfg.center);
        in["k"] = cfg.k;
        in["lead"].erase("mu");
        in["scan"] = {{"alpha", cfg.scan.alpha},
                      {"mu_min", cfg.scan.mu_min},
                      {"mu_max", cfg.scan.mu_max},
                      {"step", cfg.scan.step}};
        break;
    case Mode::q_sweep:
        in["sweep"] = {{"q", cfg.sweep.q}, {"w", cfg.sweep.w}, {"cells", cfg.sweep.cells}};
        in["packet"] = detail::packet_json(cfg.packet);
        in["propagator"] = detail::propagator_json(cfg.propagator);
        break;
    }
    return in;
}

/// Validates, runs and writes all artifacts. Module errors propagate as
/// ConfigError / PreconditionError / NumericalError.
inline RunOutput run(const RunConfig& cfg) {
    validate(cfg);
    RunOutput out;
    out.dir = cfg.out_dir;
    std::filesystem::create_directories(out.dir);
    out.summary = {{"format", "scatterlab-summary v1"}, {"inputs", inputs_json(cfg)}};
    switch (cfg.mode) {
    case Mode::steady: detail::run_steady(cfg, out); break;
    case Mode::dynamics: detail::run_dynamics(cfg, out); break;
    case Mode::mu_scan: detail::run_mu_scan(cfg, out); break;
    case Mode::q_sweep: detail::run_q_sweep(cfg, out); break;
    }
    out.summary["warnings"] = out.warnings;
    out.summary["artifacts"] = out.files;
    detail::write_json(out.dir / "summary.json", out.summary);
    out.files.insert(out.files.begin(), "summary.json");
    return out;
}

} // namespace scatterlab::app
