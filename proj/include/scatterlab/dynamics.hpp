#pragma once
// Wave-packet scattering experiments on finite-lead networks.
#include "errors.hpp"
#include "lattice.hpp"
#include "propagators.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace scatterlab {

/// A network description together with its assembled Hamiltonian.
struct Network {
    NetworkSpec spec;
    Hamiltonian hamiltonian;

    explicit Network(NetworkSpec s) : spec(std::move(s)), hamiltonian(assemble_network(spec)) {}

    const SiteRegistry& registry() const { return hamiltonian.registry(); }
    double hopping() const { return spec.lead.hopping; }
};

/// Gaussian packet on the input lead, centered at lead site `center_site` < 0.
struct WavePacketSpec {
    int center_site = -100;
    double width = 20.0;
    double wave_vector = std::numbers::pi / 2;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> densities; ///< |psi|^2 per snapshot
    std::vector<Vector> states;             ///< full snapshots, only when requested
    std::vector<double> norms;
    std::vector<double> channel_probabilities; ///< p_0 (reflected) .. p_N at the final time
    double center_residual = 0.0;              ///< probability left on the center at the final time
    double base_time = 0.0;
    double final_time = 0.0;
    Vector final_state;
    std::vector<std::string> warnings;

    double final_norm() const { return norms.empty() ? 0.0 : norms.back(); }
};

inline void validate_packet(const SiteRegistry& reg, const WavePacketSpec& spec) {
    detail::require(reg.has_leads(), "wave packet needs a network with leads");
    detail::require(spec.width > 0.0, "packet width must be positive");
    detail::require(spec.center_site < 0, "packet must start on the input lead (negative site)");
    detail::require(std::abs(spec.center_site) + 4.0 * spec.width < reg.lead_length(),
                    "packet support overflows the input lead (need |N_c| + 4 sigma < lead length)");
}

/// psi(j) proportional to exp(-(j - N_c)^2 / 2 sigma^2) exp(i k j) on input-lead sites
/// j = -1 .. -length, normalized over those sites. The wave vector follows the
/// lead sign so the packet always moves toward the center.
inline Vector init_gaussian(const Network& net, const WavePacketSpec& spec) {
    const auto& reg = net.registry();
    validate_packet(reg, spec);
    const double k = outgoing_wave_vector(net.hopping(), spec.wave_vector);
    Vector psi = Vector::Zero(reg.dim());
    double omega = 0.0;
    for (int offset = 1; offset <= reg.lead_length(); ++offset) {
        const double j = -offset;
        const double d = j - spec.center_site;
        const double envelope = std::exp(-d * d / (2.0 * spec.width * spec.width));
        psi(reg.index({Region::input, 0, offset})) = envelope * std::exp(cplx(0.0, k * j));
        omega += envelope * envelope;
    }
    return psi / std::sqrt(omega);
}

/// p_0 sums the input lead, p_l the l-th output lead.
inline std::vector<double> channel_probabilities(const Vector& psi, const SiteRegistry& reg) {
    detail::require(psi.size() == reg.dim(), "state dimension does not match registry");
    std::vector<double> p(reg.output_leads() + 1, 0.0);
    if (!reg.has_leads())
        return p;
    for (int channel = 0; channel <= reg.output_leads(); ++channel)
        p[channel] = psi.segment(reg.lead_begin(channel), reg.lead_length()).squaredNorm();
    return p;
}

inline double center_probability(const Vector& psi, const SiteRegistry& reg) {
    return psi.head(reg.center_sites()).squaredNorm();
}

inline constexpr double visibility_floor = 1e-10;

/// |p_{2 eta + 1} - p_{2 eta - 1}| / (p_{2 eta + 1} + p_{2 eta - 1}).
inline double visibility(const std::vector<double>& p, int eta, double floor = visibility_floor) {
    detail::require(eta >= 1, "visibility cell index must be >= 1");
    detail::require(static_cast<int>(p.size()) > 2 * eta + 1, "not enough channels for visibility");
    const double a = p[2 * eta + 1], b = p[2 * eta - 1];
    if (a < floor && b < floor)
        throw PreconditionError("visibility not well defined: all scattering chains are off-resonant");
    return std::abs(a - b) / (a + b);
}

/// Time for the packet to reach the center and clear it: (|N_c| + margin) / v_g
/// with margin = 4 sigma + center size.
inline double stop_time(const Network& net, const WavePacketSpec& spec) {
    const double vg = group_speed(net.hopping(), spec.wave_vector);
    detail::require(vg > 0.0, "packet has zero group velocity");
    const double margin = 4.0 * spec.width + net.registry().center_sites();
    return (std::abs(spec.center_site) + margin) / vg;
}

inline constexpr int lead_end_window = 5;
inline constexpr double lead_end_threshold = 1e-4;

namespace detail {

/// Largest probability left near the junctions: on the center, or within
/// `lead_end_window` sites of the open (center-side) end of any lead.
inline double junction_residual(const Vector& psi, const SiteRegistry& reg) {
    const double total = std::max(psi.squaredNorm(), 1e-300);
    double worst = center_probability(psi, reg) / total;
    const int window = std::min(lead_end_window, reg.lead_length());
    for (int c = 0; c <= reg.output_leads(); ++c)
        worst = std::max(worst, psi.segment(reg.lead_begin(c), window).squaredNorm() / total);
    return worst;
}

/// Same as junction_residual but at the truncated far ends of the leads.
inline double far_end_leakage(const Vector& psi, const SiteRegistry& reg) {
    const double total = std::max(psi.squaredNorm(), 1e-300);
    const int window = std::min(lead_end_window, reg.lead_length());
    double worst = 0.0;
    for (int c = 0; c <= reg.output_leads(); ++c)
        worst = std::max(worst,
                         psi.segment(reg.lead_begin(c) + reg.lead_length() - window, window).squaredNorm() / total);
    return worst;
}

} // namespace detail

/// Evolves the packet in uniform snapshot strides up to the base stop time,
/// then keeps going until the junction regions have emptied (or max_time).
inline TrajectoryRecord run_experiment(const Network& net, const WavePacketSpec& spec,
                                       const PropagatorConfig& cfg = {}) {
    detail::require(cfg.snapshot_stride > 0.0, "snapshot stride must be positive");
    detail::require(cfg.max_time > 0.0, "max_time must be positive");
    const auto& reg = net.registry();
    const Propagator propagator(net.hamiltonian, cfg);

    TrajectoryRecord rec;
    Vector psi = init_gaussian(net, spec);
    const double stride = cfg.snapshot_stride;
    auto snapshot = [&](double t) {
        rec.times.push_back(t);
        rec.densities.push_back(psi.cwiseAbs2());
        rec.norms.push_back(psi.norm());
        if (cfg.full_state_snapshots)
            rec.states.push_back(psi);
    };
    snapshot(0.0);

    rec.base_time = stop_time(net, spec);
    const long base_steps = static_cast<long>(std::ceil(rec.base_time / stride - 1e-12));
    const long max_steps = static_cast<long>(std::floor(cfg.max_time / stride + 1e-12));
    long step = 0;
    for (; step < std::min(base_steps, max_steps); ++step) {
        psi = propagator.evolve(psi, stride);
        snapshot((step + 1) * stride);
    }
    bool finished = detail::junction_residual(psi, reg) < lead_end_threshold;
    while (!finished && step < max_steps) {
        psi = propagator.evolve(psi, stride);
        ++step;
        snapshot(step * stride);
        finished = detail::junction_residual(psi, reg) < lead_end_threshold;
    }
    rec.final_time = step * stride;
    if (!finished)
        rec.warnings.push_back("max_time reached before the scattering finished (junction residual " +
                               std::to_string(detail::junction_residual(psi, reg)) + ")");
    if (double leak = detail::far_end_leakage(psi, reg); leak > lead_end_threshold)
        rec.warnings.push_back("probability " + std::to_string(leak) +
                               " reached a truncated lead end: finite-lead artifact");

    rec.channel_probabilities = channel_probabilities(psi, reg);
    rec.center_residual = center_probability(psi, reg);
    rec.final_state = std::move(psi);
    return rec;
}

/// Waveguide-array reading of the same experiment: the packet is launched as
/// u(0) and propagated over distance `length` in the same stride segments as
/// run_experiment, so u(L) reproduces the time-domain state at t = L exactly.
inline Vector waveguide_output(const Network& net, const WavePacketSpec& spec, double length,
                               const PropagatorConfig& cfg = {}) {
    detail::require(length >= 0.0, "waveguide length must be non-negative");
    const Propagator propagator(net.hamiltonian, cfg);
    Vector u = init_gaussian(net, spec);
    const double stride = cfg.snapshot_stride;
    const long segments = static_cast<long>(std::floor(length / stride + 1e-12));
    for (long s = 0; s < segments; ++s)
        u = propagator.evolve(u, stride);
    if (const double rest = length - segments * stride; rest > 1e-12 * stride)
        u = propagator.evolve(u, rest);
    return u;
}

} // namespace scatterlab
