#pragma once
// Plane-wave scattering with the semi-infinite leads folded into the center
// equations as the boundary term J e^{ik} at every attachment site.
#include "errors.hpp"
#include "lattice.hpp"
#include "parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace scatterlab {

struct ScatteringSolution {
    double k = 0.0;
    double energy = 0.0;
    cplx reflection;
    std::vector<cplx> transmission; ///< t_1..t_N, index l-1
    Vector center;                  ///< wavefunction on the center sites
    double flux_error = 0.0;        ///< | |r|^2 + sum |t_l|^2 - 1 |
    std::vector<std::string> warnings;

    double reflectance() const { return std::norm(reflection); }
    double transmittance(int channel) const { return std::norm(transmission.at(channel - 1)); }
    double total_transmittance() const {
        double s = 0.0;
        for (const auto& t : transmission)
            s += std::norm(t);
        return s;
    }
};

struct TwoLeadSolution {
    double k = 0.0;
    double energy = 0.0;
    cplx reflection;
    cplx transmission;
    Vector center;

    double reflectance() const { return std::norm(reflection); }
};

struct SteadyOptions {
    /// Attach a warning when the resonant level is not isolated (needs a dense eigensolve).
    bool check_isolation = true;
};

namespace detail {

inline void require_propagating(double k) {
    require(std::isfinite(k) && k >= 0.0 && k <= std::numbers::pi, "wave vector must lie in [0, pi]");
    require(std::abs(std::sin(k)) > 1e-12, "k = 0 or pi has zero group velocity: no propagating wave");
}

/// Solves [H_c - E + sigma * D] x = source * e_s, where D counts the leads on
/// each center site, sigma = J e^{ik'} is the outgoing-lead boundary term and
/// source = 2 i J sin k' comes from the incoming wave on site s.
inline Vector solve_reduced(const DenseMatrix& hc, const std::vector<int>& leads_on_site, int source_site,
                            double hopping, double chemical_potential, double k) {
    const auto n = hc.rows();
    require(n >= 1 && hc.cols() == n, "center block must be square and non-empty");
    require(hopping != 0.0, "lead hopping J must be nonzero");
    require_propagating(k);
    const double kk = outgoing_wave_vector(hopping, k);
    const double energy = dispersion(hopping, chemical_potential, k);
    const cplx sigma = hopping * std::exp(cplx(0.0, kk));

    DenseMatrix a = hc;
    for (Eigen::Index i = 0; i < n; ++i)
        a(i, i) += -energy + sigma * static_cast<double>(leads_on_site[i]);
    Vector b = Vector::Zero(n);
    b(source_site - 1) = cplx(0.0, 2.0 * hopping * std::sin(kk));

    Eigen::PartialPivLU<DenseMatrix> lu(a);
    if (!(lu.rcond() > 1e-14))
        throw NumericalError("scattering system is singular at E = " + std::to_string(energy));
    return lu.solve(b);
}

/// Warns when the two smallest distinct |lambda - E| of the center differ by
/// less than the level width ~J^2.
inline std::optional<std::string> isolation_warning(const DenseMatrix& hc, double energy, double hopping) {
    if (hc.rows() > default_dense_cap)
        return std::nullopt;
    Eigen::ComplexEigenSolver<DenseMatrix> solver(hc, false);
    if (solver.info() != Eigen::Success)
        return std::nullopt;
    std::vector<double> d;
    for (Eigen::Index i = 0; i < hc.rows(); ++i)
        d.push_back(std::abs(solver.eigenvalues()(i) - energy));
    std::sort(d.begin(), d.end());
    const double merge = 1e-9 * std::max(1.0, hc.cwiseAbs().maxCoeff());
    std::vector<double> distinct;
    for (double x : d)
        if (distinct.empty() || x - distinct.back() > merge)
            distinct.push_back(x);
    if (distinct.size() >= 2 && distinct[1] - distinct[0] < hopping * hopping)
        return "resonant level is not isolated (next level within J^2): near a transition the edge-state theory does not apply";
    return std::nullopt;
}

} // namespace detail

/// Multichannel scattering: input lead and output lead 1 on center site 1,
/// output lead l on site l for every l in [1, N].
inline ScatteringSolution solve_multichannel(const DenseMatrix& hc, double hopping, double chemical_potential, double k,
                                             const SteadyOptions& options = {}) {
    const auto n = static_cast<int>(hc.rows());
    std::vector<int> leads(n, 1);
    if (n >= 1)
        leads[0] = 2;
    ScatteringSolution sol;
    sol.center = detail::solve_reduced(hc, leads, 1, hopping, chemical_potential, k);
    sol.k = k;
    sol.energy = dispersion(hopping, chemical_potential, k);
    sol.reflection = sol.center(0) - 1.0;
    sol.transmission.assign(sol.center.data(), sol.center.data() + n);
    sol.flux_error = std::abs(sol.reflectance() + sol.total_transmittance() - 1.0);
    if (options.check_isolation)
        if (auto w = detail::isolation_warning(hc, sol.energy, hopping))
            sol.warnings.push_back(*w);
    return sol;
}

/// Steady solve for an arbitrary multichannel network layout (fewer output
/// leads, shifted input site). Lead lengths are ignored: leads are semi-infinite here.
inline ScatteringSolution solve_steady(const NetworkSpec& net, double k, const SteadyOptions& options = {}) {
    detail::require(net.geometry == Geometry::multichannel, "solve_steady expects a multichannel network");
    const Hamiltonian center = build_center(net.center);
    const DenseMatrix hc = center.center_block();
    const int n = static_cast<int>(hc.rows());
    detail::require(net.input_site >= 1 && net.input_site <= n, "input attachment site out of range [1, N]");
    const int outputs = net.n_output_leads == 0 ? n : net.n_output_leads;
    detail::require(outputs >= 1 && outputs <= n, "number of output leads out of range [1, N]");
    std::vector<int> leads(n, 0);
    for (int l = 1; l <= outputs; ++l)
        leads[l - 1] += 1;
    leads[net.input_site - 1] += 1;

    ScatteringSolution sol;
    sol.center = detail::solve_reduced(hc, leads, net.input_site, net.lead.hopping, net.lead.chemical_potential, k);
    sol.k = k;
    sol.energy = dispersion(net.lead.hopping, net.lead.chemical_potential, k);
    sol.reflection = sol.center(net.input_site - 1) - 1.0;
    for (int l = 1; l <= outputs; ++l)
        sol.transmission.push_back(sol.center(l - 1));
    sol.flux_error = std::abs(sol.reflectance() + sol.total_transmittance() - 1.0);
    if (options.check_isolation)
        if (auto w = detail::isolation_warning(hc, sol.energy, net.lead.hopping))
            sol.warnings.push_back(*w);
    return sol;
}

/// Input and output lead both attached at center site `alpha` (1-based).
inline TwoLeadSolution two_lead_solve(const DenseMatrix& hc, int alpha, double hopping, double chemical_potential,
                                      double k) {
    const auto n = static_cast<int>(hc.rows());
    detail::require(alpha >= 1 && alpha <= n, "attachment site alpha out of range [1, N]");
    std::vector<int> leads(n, 0);
    leads[alpha - 1] = 2;
    TwoLeadSolution sol;
    sol.center = detail::solve_reduced(hc, leads, alpha, hopping, chemical_potential, k);
    sol.k = k;
    sol.energy = dispersion(hopping, chemical_potential, k);
    sol.transmission = sol.center(alpha - 1);
    sol.reflection = sol.transmission - 1.0;
    return sol;
}

// ---------------------------------------------------------------------------
// Eigenenergy detection by reflection zeros

struct Resonance {
    double mu = 0.0;
    double reflectance = 0.0;
};

struct ResonanceScan {
    std::vector<double> mu;
    std::vector<double> reflectance;
    std::vector<Resonance> resonances; ///< refined, each with |r|^2 below the acceptance threshold
    std::vector<Resonance> rejected;   ///< grid minima that did not refine to a zero
    std::vector<double> dark_states;   ///< real eigenvalues in range with vanishing weight on alpha
};

struct ScanOptions {
    /// Grid minima below this are refined. Narrow dips of weakly coupled
    /// eigenstates can sit far above zero on the grid, so every minimum counts.
    double candidate_threshold = 1.0;
    double acceptance_threshold = 1e-8;
    /// |<alpha|phi>| below this marks an eigenstate invisible to the scan.
    double dark_weight = 1e-8;
    bool report_dark_states = true;
    unsigned workers = 1;
};

namespace detail {

template <class F>
double golden_section_minimize(F&& f, double lo, double hi, double& best_value) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    double fc = f(c), fd = f(d);
    const double tol = 1e-14 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    for (int iter = 0; iter < 300 && hi - lo > tol; ++iter) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - invphi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + invphi * (hi - lo);
            fd = f(d);
        }
    }
    if (fc < fd) {
        best_value = fc;
        return c;
    }
    best_value = fd;
    return d;
}

} // namespace detail

inline ResonanceScan mu_scan(const DenseMatrix& hc, int alpha, double hopping, double k, double mu_min, double mu_max,
                             double step, const ScanOptions& options = {}) {
    detail::require(step > 0.0, "scan resolution must be positive");
    detail::require(mu_max > mu_min, "empty mu range");
    detail::require(alpha >= 1 && alpha <= hc.rows(), "attachment site alpha out of range [1, N]");
    detail::require_propagating(k);

    // a grid point on a dark-state energy makes the system singular; it is
    // recorded as NaN and never becomes a candidate
    auto reflectance_at = [&](double mu) {
        try {
            return two_lead_solve(hc, alpha, hopping, mu, k).reflectance();
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    auto refine_objective = [&](double mu) {
        const double v = reflectance_at(mu);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    const auto points = static_cast<std::size_t>(std::floor((mu_max - mu_min) / step + 1e-9)) + 1;
    ResonanceScan scan;
    scan.mu.resize(points);
    for (std::size_t i = 0; i < points; ++i)
        scan.mu[i] = mu_min + static_cast<double>(i) * step;
    scan.reflectance = parallel_map(points, options.workers, [&](std::size_t i) { return reflectance_at(scan.mu[i]); });

    const auto& r = scan.reflectance;
    for (std::size_t i = 0; i < points; ++i) {
        const bool left_ok = i == 0 || !(r[i] > r[i - 1]);
        const bool right_ok = i + 1 == points || !(r[i] >= r[i + 1]);
        if (std::isnan(r[i]))
            continue;
        if (!(left_ok && right_ok) || r[i] >= options.candidate_threshold)
            continue;
        const double lo = scan.mu[i == 0 ? 0 : i - 1];
        const double hi = scan.mu[i + 1 == points ? i : i + 1];
        double best = r[i];
        double at = scan.mu[i];
        if (hi > lo) {
            double refined_value = 0.0;
            double refined = detail::golden_section_minimize(refine_objective, lo, hi, refined_value);
            if (refined_value < best) {
                best = refined_value;
                at = refined;
            }
        }
        auto& bucket = best < options.acceptance_threshold ? scan.resonances : scan.rejected;
        if (!bucket.empty() && std::abs(bucket.back().mu - at) < 1e-9 * std::max(1.0, std::abs(at)))
            continue;
        bucket.push_back({at, best});
    }

    if (options.report_dark_states && hc.rows() <= default_dense_cap) {
        for (const auto& pair : dense_eigs(hc)) {
            const double e = pair.value.real();
            if (std::abs(pair.value.imag()) > 1e-9 || e < mu_min || e > mu_max)
                continue;
            if (std::abs(pair.vector(alpha - 1)) < options.dark_weight)
                scan.dark_states.push_back(e);
        }
    }
    return scan;
}

/// Normalizes t to unit Euclidean norm and rotates the largest entry to be
/// real positive. Rejects off-resonant solutions (total transmission below
/// `min_transmittance`).
inline Vector eigenfunction_from_transmissions(const ScatteringSolution& sol, double min_transmittance = 1e-2) {
    detail::require(!sol.transmission.empty(), "solution carries no transmission amplitudes");
    const double total = sol.total_transmittance();
    if (!(total >= min_transmittance))
        throw PreconditionError("off-resonant solution: transmission amplitudes vanish (sum |t|^2 = " +
                                std::to_string(total) + ")");
    Vector t = Eigen::Map<const Vector>(sol.transmission.data(), static_cast<Eigen::Index>(sol.transmission.size()));
    Eigen::Index peak = 0;
    t.cwiseAbs().maxCoeff(&peak);
    const cplx phase = t(peak) / std::abs(t(peak));
    return (t / (phase * t.norm())).eval();
}

/// |<a|b>| / (|a| |b|).
inline double profile_overlap(const Vector& a, const Vector& b) {
    return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

} // namespace scatterlab
