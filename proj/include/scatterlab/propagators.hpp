#pragma once
// Action of exp(-iHt) on a state vector.
//
// Hermitian H: Chebyshev expansion with Bessel-function coefficients on the
// Gershgorin interval. General H: Arnoldi projection with Expokit-style local
// error estimates and step-size control. Both target an absolute local error
// of `tolerance * dt` per step, i.e. accumulated error below tolerance * t.
#include "errors.hpp"
#include "lattice.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <variant>
#include <vector>

namespace scatterlab {

enum class PropagatorMethod { automatic, chebyshev, krylov };

struct PropagatorConfig {
    double tolerance = 1e-8;      ///< local error per unit time
    double snapshot_stride = 10.0; ///< time between stored snapshots
    double max_time = 2.0e4;       ///< hard limit for the stop-time extension
    bool full_state_snapshots = false;
    PropagatorMethod method = PropagatorMethod::automatic;
    int krylov_dim = 30;
    long max_steps = 2'000'000; ///< budget on Chebyshev terms or Krylov steps per call
};

struct SpectralInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Gershgorin enclosure of the (real) spectrum of a Hermitian matrix.
inline SpectralInterval gershgorin_interval(const SparseMatrix& h) {
    SpectralInterval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (int r = 0; r < h.outerSize(); ++r) {
        double diag = 0.0, radius = 0.0;
        for (SparseMatrix::InnerIterator it(h, r); it; ++it) {
            if (it.col() == r)
                diag = it.value().real();
            else
                radius += std::abs(it.value());
        }
        out.lo = std::min(out.lo, diag - radius);
        out.hi = std::max(out.hi, diag + radius);
    }
    if (h.outerSize() == 0)
        out = {0.0, 0.0};
    return out;
}

class ChebyshevPropagator {
public:
    /// Largest a*dt handled by one expansion; longer times are split.
    static constexpr double max_argument = 100.0;

    ChebyshevPropagator(const SparseMatrix& h, double tolerance, long max_terms = 2'000'000)
        : h_(h), tolerance_(tolerance), max_terms_(max_terms) {
        detail::require(tolerance > 0.0, "propagator tolerance must be positive");
        auto iv = gershgorin_interval(h);
        center_ = 0.5 * (iv.hi + iv.lo);
        // pad the interval so H_s stays strictly inside [-1, 1]
        half_width_ = std::max(0.5 * (iv.hi - iv.lo) * 1.01, 1e-12);
    }

    Vector evolve(const Vector& psi, double t) const {
        detail::require(t >= 0.0, "propagation time must be non-negative");
        detail::require(psi.size() == h_.rows(), "state dimension does not match Hamiltonian");
        if (t == 0.0)
            return psi;
        const int chunks = std::max(1, static_cast<int>(std::ceil(half_width_ * t / max_argument)));
        const double dt = t / chunks;
        Vector out = psi;
        long used = 0;
        for (int c = 0; c < chunks; ++c)
            out = expand(out, dt, used);
        return out;
    }

private:
    Vector expand(const Vector& psi, double dt, long& used) const {
        const double x = half_width_ * dt;
        const double cutoff = std::max(1e-2 * tolerance_ * dt, 1e-17);
        const int n_cap = static_cast<int>(x + 40.0 * std::cbrt(std::max(x, 1.0)) + 60.0);
        std::vector<double> coeff;
        int quiet = 0;
        for (int n = 0; n <= n_cap; ++n) {
            double jn = std::cyl_bessel_j(static_cast<double>(n), x);
            coeff.push_back(jn);
            if (n > x && std::abs(jn) < cutoff) {
                if (++quiet == 3)
                    break;
            } else {
                quiet = 0;
            }
        }
        if (quiet < 3)
            throw NumericalError("Chebyshev expansion did not reach the requested tolerance");
        used += static_cast<long>(coeff.size());
        if (used > max_terms_)
            throw NumericalError("Chebyshev term budget exhausted");

        auto apply_scaled = [&](const Vector& v) -> Vector { return (h_ * v - center_ * v) / half_width_; };
        const cplx mi(0.0, -1.0);
        Vector prev = psi;
        Vector curr = apply_scaled(psi);
        Vector sum = coeff[0] * psi + 2.0 * mi * coeff[1] * curr;
        cplx phase = mi;
        for (std::size_t n = 2; n < coeff.size(); ++n) {
            Vector next = 2.0 * apply_scaled(curr) - prev;
            phase *= mi;
            sum += (2.0 * coeff[n]) * phase * next;
            prev.swap(curr);
            curr.swap(next);
        }
        return std::exp(cplx(0.0, -center_ * dt)) * sum;
    }

    const SparseMatrix& h_;
    double tolerance_;
    long max_terms_;
    double center_ = 0.0;
    double half_width_ = 1.0;
};

class KrylovPropagator {
public:
    KrylovPropagator(const SparseMatrix& h, double tolerance, int krylov_dim = 30, long max_steps = 2'000'000)
        : h_(h), tolerance_(tolerance), m_(std::max(1, std::min<int>(krylov_dim, static_cast<int>(h.rows())))),
          max_steps_(max_steps) {
        detail::require(tolerance > 0.0, "propagator tolerance must be positive");
        for (int r = 0; r < h.outerSize(); ++r) {
            double row = 0.0;
            for (SparseMatrix::InnerIterator it(h, r); it; ++it)
                row += std::abs(it.value());
            anorm_ = std::max(anorm_, row);
        }
    }

    Vector evolve(const Vector& psi, double t) const {
        detail::require(t >= 0.0, "propagation time must be non-negative");
        detail::require(psi.size() == h_.rows(), "state dimension does not match Hamiltonian");
        Vector w = psi;
        if (t == 0.0 || anorm_ == 0.0 || w.norm() == 0.0)
            return w;

        const int m = m_;
        const double gamma = 0.9, delta = 1.2;
        const double btol = 1e-14 * std::max(1.0, anorm_);
        const cplx mi(0.0, -1.0);
        const auto n = h_.rows();

        double beta = w.norm();
        const double fact = std::pow((m + 1) / std::numbers::e, m + 1) * std::sqrt(2.0 * std::numbers::pi * (m + 1));
        double t_new = (1.0 / anorm_) * std::pow((fact * tolerance_) / (4.0 * beta * anorm_), 1.0 / m);
        t_new = round_two_digits(t_new);

        DenseMatrix basis(n, m + 1);
        double t_now = 0.0;
        long steps = 0;
        while (t_now < t) {
            if (++steps > max_steps_)
                throw NumericalError("Krylov propagator exhausted its step budget before reaching the tolerance");
            double t_step = std::min(t - t_now, t_new);
            beta = w.norm();
            if (beta == 0.0)
                return w;
            basis.col(0) = w / beta;
            DenseMatrix hm = DenseMatrix::Zero(m + 2, m + 2);
            int mb = m, k1 = 2;
            double avnorm = 0.0;
            for (int j = 0; j < m; ++j) {
                Vector p = mi * (h_ * basis.col(j));
                for (int pass = 0; pass < 2; ++pass)
                    for (int i = 0; i <= j; ++i) {
                        cplx hij = basis.col(i).dot(p);
                        hm(i, j) += hij;
                        p -= hij * basis.col(i);
                    }
                const double s = p.norm();
                if (s < btol) {
                    k1 = 0;
                    mb = j + 1;
                    t_step = t - t_now;
                    break;
                }
                hm(j + 1, j) = s;
                basis.col(j + 1) = p / s;
            }
            if (k1 != 0) {
                hm(m + 1, m) = 1.0;
                avnorm = (h_ * basis.col(m)).norm();
            }

            DenseMatrix f;
            double err_loc = 0.0, xm = 1.0 / m;
            for (int reject = 0;; ++reject) {
                const int mx = mb + k1;
                f = (t_step * hm.topLeftCorner(mx, mx)).exp();
                if (k1 == 0) {
                    err_loc = btol;
                    break;
                }
                const double p1 = std::abs(f(m, 0)) * beta;
                const double p2 = std::abs(f(m + 1, 0)) * beta * avnorm;
                if (p1 > 10.0 * p2) {
                    err_loc = p2;
                    xm = 1.0 / m;
                } else if (p1 > p2) {
                    err_loc = (p1 * p2) / (p1 - p2);
                    xm = 1.0 / m;
                } else {
                    err_loc = p1;
                    xm = 1.0 / std::max(1, m - 1);
                }
                if (err_loc <= delta * t_step * tolerance_)
                    break;
                if (reject > 60)
                    throw NumericalError("Krylov propagator cannot reach the requested tolerance");
                t_step = round_two_digits(gamma * t_step * std::pow(t_step * tolerance_ / err_loc, xm));
            }
            const int mx = mb + std::max(0, k1 - 1);
            w = basis.leftCols(mx) * (beta * f.col(0).head(mx));
            t_now += t_step;
            if (err_loc > 0.0)
                t_new = round_two_digits(gamma * t_step * std::pow(t_step * tolerance_ / err_loc, xm));
            else
                t_new = 2.0 * t_step;
        }
        return w;
    }

private:
    static double round_two_digits(double x) {
        if (!(x > 0.0))
            return x;
        const double s = std::pow(10.0, std::floor(std::log10(x)) - 1.0);
        return std::ceil(x / s) * s;
    }

    const SparseMatrix& h_;
    double tolerance_;
    int m_;
    long max_steps_;
    double anorm_ = 0.0;
};

/// exp(-iHt) on one fixed Hamiltonian. Hermitian networks use the Chebyshev
/// expansion; anything else (gain/loss) uses the Krylov propagator. The norm is
/// never renormalized.
class Propagator {
public:
    Propagator(const Hamiltonian& h, const PropagatorConfig& cfg = {}) : dim_(h.dim()) {
        detail::require(cfg.tolerance > 0.0, "propagator tolerance must be positive");
        auto method = cfg.method;
        if (method == PropagatorMethod::automatic)
            method = h.hermitian() ? PropagatorMethod::chebyshev : PropagatorMethod::krylov;
        if (method == PropagatorMethod::chebyshev) {
            detail::require(h.hermitian(), "Chebyshev propagation requires a Hermitian Hamiltonian");
            impl_.emplace<ChebyshevPropagator>(h.matrix(), cfg.tolerance, cfg.max_steps);
        } else {
            impl_.emplace<KrylovPropagator>(h.matrix(), cfg.tolerance, cfg.krylov_dim, cfg.max_steps);
        }
    }

    Vector evolve(const Vector& psi, double t) const {
        detail::require(psi.size() == dim_, "state dimension does not match Hamiltonian");
        detail::require(t >= 0.0, "propagation time must be non-negative");
        return std::visit(
            [&](const auto& p) -> Vector {
                if constexpr (std::is_same_v<std::decay_t<decltype(p)>, std::monostate>)
                    throw NumericalError("propagator not initialized");
                else
                    return p.evolve(psi, t);
            },
            impl_);
    }

    bool uses_chebyshev() const { return std::holds_alternative<ChebyshevPropagator>(impl_); }

private:
    Eigen::Index dim_;
    std::variant<std::monostate, ChebyshevPropagator, KrylovPropagator> impl_;
};

inline Vector propagate(const Hamiltonian& h, const Vector& psi, double t, const PropagatorConfig& cfg = {}) {
    return Propagator(h, cfg).evolve(psi, t);
}

/// Waveguide-array form u(L) = exp(-iHL) u(0): propagation distance plays the role of time.
inline Vector propagate_distance(const Hamiltonian& h, const Vector& u0, double length,
                                 const PropagatorConfig& cfg = {}) {
    return propagate(h, u0, length, cfg);
}

} // namespace scatterlab
