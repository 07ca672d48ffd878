#pragma once
// Closed-form reference results for SSH scattering centers.
#include "errors.hpp"
#include "lattice.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace scatterlab::analytic {

/// Zero-energy edge state of a topological SSH chain, q = v / w.
struct EdgeStateProfile {
    double q = 0.0;
    std::vector<double> amplitudes; ///< on odd center sites 1, 3, 5, ... (one per cell)
};

inline EdgeStateProfile edge_state_amplitudes(double q, int cells) {
    scatterlab::detail::require(q >= 0.0, "edge state requires q >= 0");
    scatterlab::detail::require(q < 1.0, "no normalizable edge state for q >= 1");
    scatterlab::detail::require(cells >= 1, "edge state requires at least one cell");
    EdgeStateProfile out{q, {}};
    out.amplitudes.reserve(cells);
    double a = std::sqrt(1.0 - q * q);
    for (int j = 0; j < cells; ++j) {
        out.amplitudes.push_back(a);
        a *= -q;
    }
    return out;
}

/// Embeds the edge profile into a full center vector (zeros on even sites).
inline Vector edge_state_vector(const EdgeStateProfile& profile) {
    Vector out = Vector::Zero(2 * static_cast<Eigen::Index>(profile.amplitudes.size()));
    for (std::size_t j = 0; j < profile.amplitudes.size(); ++j)
        out(2 * static_cast<Eigen::Index>(j)) = profile.amplitudes[j];
    return out;
}

namespace detail {
inline void require_off_transition(double q) {
    scatterlab::detail::require(q > 0.0, "q must be positive");
    scatterlab::detail::require(q != 1.0, "formula is invalid at the transition point q = 1");
}
} // namespace detail

/// First-channel transmission amplitude for an infinite SSH center at resonance.
inline double transmission_amplitude(double q) {
    detail::require_off_transition(q);
    if (q > 1.0)
        return 0.0;
    return 2.0 * (1.0 - q * q) / (2.0 - q * q);
}

/// Reflection amplitude, paired with transmission_amplitude so that t1 - r = 1.
inline double reflection_amplitude(double q) {
    detail::require_off_transition(q);
    if (q > 1.0)
        return -1.0;
    return -q * q / (2.0 - q * q);
}

/// Channel probability p_l (l = 0 is the reflected channel).
inline double predicted_probability(double q, int channel) {
    detail::require_off_transition(q);
    scatterlab::detail::require(channel >= 0, "channel index must be non-negative");
    if (q > 1.0)
        return channel == 0 ? 1.0 : 0.0;
    const double r = q * q / (2.0 - q * q);
    if (channel == 0)
        return r * r;
    if (channel % 2 == 0)
        return 0.0;
    return (1.0 - r) * (1.0 - r) * std::pow(q, channel - 1);
}

/// Neighbouring odd-channel contrast in the topological phase.
inline double visibility_theory(double q) {
    scatterlab::detail::require(q > 0.0, "visibility requires q > 0");
    scatterlab::detail::require(q < 1.0, "visibility is not well defined for q >= 1");
    return (1.0 - q * q) / (1.0 + q * q);
}

/// |1 - q^2| / (1 + q^2) on both sides of the transition. For q > 1 the odd
/// chain response decays as q^{-2} per cell at weak coupling, which gives the
/// same contrast with q replaced by 1/q.
inline double visibility_curve(double q) {
    detail::require_off_transition(q);
    return std::abs(1.0 - q * q) / (1.0 + q * q);
}

inline double reflection_theory(double q) {
    const double r = reflection_amplitude(q);
    return r * r;
}

// ---------------------------------------------------------------------------
// Non-Hermitian SSH chain, strong dimerization (v >> w)

struct NHLevel {
    int n = 0;
    double kappa = 0.0;
    double radicand = 0.0; ///< (v - w cos kappa)^2 - gamma^2
    double energy = 0.0;   ///< sqrt(radicand), valid only when `real`
    double phase = 0.0;    ///< tan(phase) = gamma / energy
    bool real = false;
};

struct NHSpectrum {
    double v = 0.0;
    double w = 0.0;
    double gamma = 0.0;
    int cells = 0;
    std::vector<NHLevel> levels;

    std::vector<NHLevel> real_levels() const {
        std::vector<NHLevel> out;
        for (const auto& l : levels)
            if (l.real)
                out.push_back(l);
        return out;
    }
};

inline NHSpectrum nh_spectrum(double v, double w, double gamma, int cells) {
    scatterlab::detail::require(v >= 0.0 && w >= 0.0 && gamma >= 0.0, "v, w, gamma must be non-negative");
    scatterlab::detail::require(cells >= 1, "need at least one cell");
    NHSpectrum out{v, w, gamma, cells, {}};
    for (int n = 0; n < cells; ++n) {
        NHLevel level;
        level.n = n;
        level.kappa = (n + 1) * std::numbers::pi / (cells + 1);
        const double d = v - w * std::cos(level.kappa);
        level.radicand = d * d - gamma * gamma;
        level.real = level.radicand > 0.0;
        if (level.real) {
            level.energy = std::sqrt(level.radicand);
            level.phase = std::atan2(gamma, level.energy);
        }
        out.levels.push_back(level);
    }
    return out;
}

/// sin^2(kappa m) over cells m = 1..cells, normalized to unit maximum. The
/// odd and even leads of cell m share this value.
inline std::vector<double> nh_transmission_profile(const NHLevel& level, int cells) {
    scatterlab::detail::require(level.real, "transmission profile needs a real level");
    scatterlab::detail::require(cells >= 1, "need at least one cell");
    std::vector<double> out(cells);
    double peak = 0.0;
    for (int m = 1; m <= cells; ++m) {
        const double s = std::sin(level.kappa * m);
        out[m - 1] = s * s;
        peak = std::max(peak, out[m - 1]);
    }
    for (auto& x : out)
        x /= peak;
    return out;
}

} // namespace scatterlab::analytic
