#pragma once
// Run configuration: JSON files (comments allowed), one object per run.
//
//   {
//     "label":  "fig3a",
//     "center": {"model": "ssh", "v": 2, "w": 4, "cells": 20},
//     "lead":   {"J": -0.1, "mu": 0, "length": 200},
//     "packet": {"center_site": -100, "width": 20, "wave_vector": 1.5707963267948966},
//     "propagator": {"tolerance": 1e-8, "snapshot_stride": 10, "max_time": 20000}
//   }
//
// Which top-level sections are accepted depends on the mode; see README.md.
#include "../analytic.hpp"
#include "../dynamics.hpp"
#include "../errors.hpp"
#include "../lattice.hpp"
#include "../parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace scatterlab::app {

using nlohmann::json;

enum class Mode { steady, dynamics, mu_scan, q_sweep };

inline std::string to_string(Mode m) {
    switch (m) {
    case Mode::steady: return "steady";
    case Mode::dynamics: return "dynamics";
    case Mode::mu_scan: return "mu-scan";
    case Mode::q_sweep: return "q-sweep";
    }
    return "?";
}

inline Mode parse_mode(std::string_view name) {
    for (Mode m : {Mode::steady, Mode::dynamics, Mode::mu_scan, Mode::q_sweep})
        if (to_string(m) == name)
            return m;
    throw ConfigError("unknown mode '" + std::string(name) + "'");
}

struct ScanSettings {
    int alpha = 1;
    double mu_min = -7.0;
    double mu_max = 7.0;
    double step = 1e-3;
};

struct SweepSettings {
    std::vector<double> q;
    double w = 4.0;
    int cells = 20;
};

struct RunConfig {
    Mode mode = Mode::steady;
    std::string label;
    CenterSpec center = SSHCenter{2.0, 4.0, 20};
    LeadSpec lead;
    int n_output_leads = 0;
    int input_site = 1;
    double k = std::numbers::pi / 2;
    WavePacketSpec packet;
    PropagatorConfig propagator;
    ScanSettings scan;
    SweepSettings sweep;
    bool write_snapshots = true;
    std::string out_dir = "scatterlab-out";
    unsigned workers = default_workers();

    NetworkSpec network() const {
        NetworkSpec net;
        net.center = center;
        net.lead = lead;
        net.n_output_leads = n_output_leads;
        net.input_site = input_site;
        if (mode == Mode::mu_scan) {
            net.geometry = Geometry::two_lead;
            net.input_site = scan.alpha;
        }
        return net;
    }
};

namespace detail {

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object())
            throw ConfigError(where() + " must be an object");
    }

    void allow(std::initializer_list<const char*> keys) {
        for (auto k : keys)
            allowed_.insert(k);
    }

    /// Rejects keys that were not declared with allow().
    void reject_unknown() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!allowed_.count(it.key()))
                throw ConfigError("unknown key '" + qualified(it.key()) + "'");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    double number(const std::string& key) const {
        const auto& v = at(key);
        if (!v.is_number())
            throw ConfigError("field '" + qualified(key) + "' must be a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    int integer(const std::string& key) const {
        const auto& v = at(key);
        if (!v.is_number_integer())
            throw ConfigError("field '" + qualified(key) + "' must be an integer");
        return v.get<int>();
    }
    int integer(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key))
            return fallback;
        const auto& v = at(key);
        if (!v.is_boolean())
            throw ConfigError("field '" + qualified(key) + "' must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) const {
        const auto& v = at(key);
        if (!v.is_string())
            throw ConfigError("field '" + qualified(key) + "' must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) const {
        const auto& v = at(key);
        if (!v.is_array())
            throw ConfigError("field '" + qualified(key) + "' must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number())
                throw ConfigError("field '" + qualified(key) + "' must contain only numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    DenseMatrix real_matrix(const std::string& key) const {
        const auto& v = at(key);
        if (!v.is_array() || v.empty())
            throw ConfigError("field '" + qualified(key) + "' must be a non-empty array of rows");
        const auto rows = static_cast<Eigen::Index>(v.size());
        Eigen::Index cols = -1;
        DenseMatrix m;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto& row = v[r];
            if (!row.is_array())
                throw ConfigError("field '" + qualified(key) + "' row " + std::to_string(r) + " is not an array");
            if (cols < 0) {
                cols = static_cast<Eigen::Index>(row.size());
                m = DenseMatrix::Zero(rows, cols);
            }
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw ConfigError("field '" + qualified(key) + "' has ragged rows");
            for (Eigen::Index c = 0; c < cols; ++c) {
                if (!row[c].is_number())
                    throw ConfigError("field '" + qualified(key) + "' must contain only numbers");
                m(r, c) = row[c].get<double>();
            }
        }
        return m;
    }

    Reader child(const std::string& key) const { return Reader(at(key), qualified(key)); }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& at(const std::string& key) const {
        if (!obj_.contains(key))
            throw ConfigError("missing required field '" + qualified(key) + "'");
        return obj_.at(key);
    }
    std::string where() const { return path_.empty() ? "configuration" : "field '" + path_ + "'"; }

    const json& obj_;
    std::string path_;
    std::set<std::string> allowed_;
};

inline CenterSpec read_center(const Reader& r) {
    Reader c = r.child("center");
    const std::string model = c.string("model");
    if (model == "ssh") {
        c.allow({"model", "v", "w", "cells"});
        c.reject_unknown();
        return SSHCenter{c.number("v"), c.number("w"), c.integer("cells")};
    }
    if (model == "nh-ssh") {
        c.allow({"model", "v", "w", "gamma", "cells"});
        c.reject_unknown();
        return NonHermitianSSHCenter{c.number("v"), c.number("w"), c.number("gamma"), c.integer("cells")};
    }
    if (model == "custom") {
        c.allow({"model", "real", "imag"});
        c.reject_unknown();
        DenseMatrix m = c.real_matrix("real");
        if (c.has("imag")) {
            DenseMatrix im = c.real_matrix("imag");
            if (im.rows() != m.rows() || im.cols() != m.cols())
                throw ConfigError("field 'center.imag' must match the shape of 'center.real'");
            m += cplx(0.0, 1.0) * im.real().cast<cplx>();
        }
        return CustomCenter{m};
    }
    throw ConfigError("field 'center.model' must be one of ssh, nh-ssh, custom (got '" + model + "')");
}

inline LeadSpec read_lead(const Reader& r, Mode mode) {
    Reader l = r.child("lead");
    l.allow({"J", "length"});
    if (mode == Mode::mu_scan) {
        if (l.has("mu"))
            throw ConfigError("field 'lead.mu' contradicts mode 'mu-scan': mu is set by the scan range");
    } else {
        l.allow({"mu"});
    }
    l.reject_unknown();
    LeadSpec out;
    out.hopping = l.number("J");
    out.chemical_potential = l.number("mu", 0.0);
    out.length = l.integer("length", 200);
    return out;
}

inline WavePacketSpec read_packet(const Reader& r) {
    WavePacketSpec out;
    if (!r.has("packet"))
        return out;
    Reader p = r.child("packet");
    p.allow({"center_site", "width", "wave_vector"});
    p.reject_unknown();
    out.center_site = p.integer("center_site", out.center_site);
    out.width = p.number("width", out.width);
    out.wave_vector = p.number("wave_vector", out.wave_vector);
    return out;
}

inline PropagatorConfig read_propagator(const Reader& r) {
    PropagatorConfig out;
    if (!r.has("propagator"))
        return out;
    Reader p = r.child("propagator");
    p.allow({"tolerance", "snapshot_stride", "max_time", "full_state", "krylov_dim"});
    p.reject_unknown();
    out.tolerance = p.number("tolerance", out.tolerance);
    out.snapshot_stride = p.number("snapshot_stride", out.snapshot_stride);
    out.max_time = p.number("max_time", out.max_time);
    out.full_state_snapshots = p.boolean("full_state", out.full_state_snapshots);
    out.krylov_dim = p.integer("krylov_dim", out.krylov_dim);
    return out;
}

} // namespace detail

/// Parses one run configuration for `mode`. Throws ConfigError naming the
/// offending key, field, or source position.
inline RunConfig parse_config_text(std::string_view text, Mode mode) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    detail::Reader r(doc, "");
    static const std::map<Mode, std::vector<const char*>> sections{
        {Mode::steady, {"label", "center", "lead", "k", "n_output_leads", "input_site"}},
        {Mode::dynamics,
         {"label", "center", "lead", "packet", "propagator", "n_output_leads", "input_site", "write_snapshots"}},
        {Mode::mu_scan, {"label", "center", "lead", "k", "scan"}},
        {Mode::q_sweep, {"label", "sweep", "lead", "packet", "propagator"}},
    };
    static const std::set<std::string> known{"label",      "center", "lead",  "k",     "n_output_leads",
                                             "input_site", "packet", "propagator", "scan", "sweep",
                                             "write_snapshots"};
    const auto& allowed = sections.at(mode);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "'");
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("field '" + it.key() + "' is not valid for mode '" + to_string(mode) + "'");
    }

    RunConfig cfg;
    cfg.mode = mode;
    cfg.label = r.has("label") ? r.string("label") : to_string(mode);
    if (mode != Mode::q_sweep)
        cfg.center = detail::read_center(r);
    cfg.lead = detail::read_lead(r, mode);
    cfg.k = r.number("k", cfg.k);
    cfg.n_output_leads = r.integer("n_output_leads", 0);
    cfg.input_site = r.integer("input_site", 1);
    cfg.write_snapshots = r.boolean("write_snapshots", true);
    cfg.packet = detail::read_packet(r);
    cfg.propagator = detail::read_propagator(r);
    if (mode == Mode::mu_scan) {
        auto s = r.child("scan");
        s.allow({"alpha", "mu_min", "mu_max", "step"});
        s.reject_unknown();
        cfg.scan.alpha = s.integer("alpha", 1);
        cfg.scan.mu_min = s.number("mu_min");
        cfg.scan.mu_max = s.number("mu_max");
        cfg.scan.step = s.number("step", 1e-3);
    }
    if (mode == Mode::q_sweep) {
        auto s = r.child("sweep");
        s.allow({"q", "w", "cells"});
        s.reject_unknown();
        cfg.sweep.q = s.numbers("q");
        cfg.sweep.w = s.number("w", 4.0);
        cfg.sweep.cells = s.integer("cells", 20);
        if (cfg.sweep.q.empty())
            throw ConfigError("field 'sweep.q' must list at least one value");
    }
    return cfg;
}

inline RunConfig parse_config_file(const std::filesystem::path& path, Mode mode) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read configuration file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), mode);
}

/// Physics validation by the owning modules, before anything runs. Throws
/// PreconditionError.
inline void validate(const RunConfig& cfg) {
    if (cfg.mode == Mode::q_sweep) {
        scatterlab::detail::require(cfg.sweep.w > 0.0, "sweep.w must be positive");
        for (double q : cfg.sweep.q)
            scatterlab::detail::require(q > 0.0, "sweep.q values must be positive");
        RunConfig probe = cfg;
        probe.mode = Mode::dynamics;
        probe.center = SSHCenter{cfg.sweep.q.front() * cfg.sweep.w, cfg.sweep.w, cfg.sweep.cells};
        validate(probe);
        return;
    }
    const Network net(cfg.network()); // validates center, lead and attachments
    if (cfg.mode == Mode::steady || cfg.mode == Mode::mu_scan)
        scatterlab::detail::require(std::abs(std::sin(cfg.k)) > 1e-12 && cfg.k > 0.0 && cfg.k < std::numbers::pi,
                                    "k must lie strictly inside (0, pi)");
    if (cfg.mode == Mode::dynamics) {
        validate_packet(net.registry(), cfg.packet);
        scatterlab::detail::require(cfg.propagator.tolerance > 0.0, "propagator.tolerance must be positive");
        scatterlab::detail::require(cfg.propagator.snapshot_stride > 0.0,
                                    "propagator.snapshot_stride must be positive");
        scatterlab::detail::require(group_speed(cfg.lead.hopping, cfg.packet.wave_vector) > 0.0,
                                    "packet wave vector has zero group velocity");
    }
    if (cfg.mode == Mode::mu_scan) {
        scatterlab::detail::require(cfg.scan.step > 0.0, "scan.step must be positive");
        scatterlab::detail::require(cfg.scan.mu_max > cfg.scan.mu_min, "empty mu range");
    }
}

// ---------------------------------------------------------------------------
// Figure presets

inline const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"3a", "3b", "3c", "3d", "5", "6a", "6b", "6c", "6d", "7"};
    return ids;
}

namespace detail {

inline RunConfig fig3_base(double v) {
    RunConfig cfg;
    cfg.mode = Mode::dynamics;
    cfg.center = SSHCenter{v, 4.0, 20};
    cfg.lead = {-0.1, 0.0, 200};
    cfg.packet = {-100, 20.0, std::numbers::pi / 2};
    return cfg;
}

} // namespace detail

/// Expands a figure id into the runs that reproduce it. Output directories
/// are nested under `out_root`.
inline std::vector<RunConfig> reproduce_figure(const std::string& id, const std::string& out_root = "scatterlab-out") {
    namespace fs = std::filesystem;
    std::vector<RunConfig> runs;
    if (id.size() == 2 && id[0] == '3' && id[1] >= 'a' && id[1] <= 'd') {
        static constexpr double v_values[] = {2.0, 3.0, 5.0, 6.0};
        RunConfig cfg = detail::fig3_base(v_values[id[1] - 'a']);
        cfg.label = "fig" + id;
        runs.push_back(cfg);
    } else if (id == "5") {
        RunConfig cfg = detail::fig3_base(2.0);
        cfg.mode = Mode::q_sweep;
        cfg.label = "fig5";
        for (int i = 1; i <= 9; ++i)
            cfg.sweep.q.push_back(i / 10.0);
        for (int i = 11; i <= 20; ++i)
            cfg.sweep.q.push_back(i / 10.0);
        cfg.sweep.w = 4.0;
        cfg.sweep.cells = 20;
        runs.push_back(cfg);
    } else if (id.size() == 2 && id[0] == '6' && id[1] >= 'a' && id[1] <= 'd') {
        const int n = id[1] - 'a';
        const auto spectrum = analytic::nh_spectrum(40.0, 2.0, 10.0, 4);
        RunConfig cfg = detail::fig3_base(0.0);
        cfg.center = NonHermitianSSHCenter{40.0, 2.0, 10.0, 4};
        cfg.lead.chemical_potential = spectrum.levels.at(n).energy;
        cfg.label = "fig" + id;
        runs.push_back(cfg);
    } else if (id == "7") {
        static constexpr double v_values[] = {2.0, 3.0, 5.0, 6.0};
        const char panels[] = {'b', 'c', 'd', 'e'};
        for (int i = 0; i < 4; ++i) {
            RunConfig cfg;
            cfg.mode = Mode::mu_scan;
            cfg.center = SSHCenter{v_values[i], 4.0, 20};
            cfg.lead = {1.0, 0.0, 200};
            const double reach = v_values[i] + 4.0 + 1.0;
            cfg.scan = {1, -reach, reach, 1e-3};
            cfg.label = std::string("fig7") + panels[i];
            runs.push_back(cfg);
        }
        RunConfig nh;
        nh.mode = Mode::mu_scan;
        nh.center = NonHermitianSSHCenter{40.0, 2.0, 10.0, 4};
        nh.lead = {1.0, 0.0, 200};
        nh.scan = {1, 30.0, 50.0, 1e-3};
        nh.label = "fig7f";
        runs.push_back(nh);
    } else {
        throw ConfigError("unknown figure '" + id + "' (expected one of 3a 3b 3c 3d 5 6a 6b 6c 6d 7)");
    }
    for (auto& r : runs)
        r.out_dir = (fs::path(out_root) / r.label).string();
    return runs;
}

} // namespace scatterlab::app
