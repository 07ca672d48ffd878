#pragma once
#include "errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace scatterlab {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Threshold on max |H - H^dagger| below which a matrix is treated as Hermitian.
inline constexpr double hermitian_tolerance = 1e-12;

/// Dimerized chain: intracell hopping `v` on bonds (2m-1, 2m), intercell `w` on (2m, 2m+1).
struct SSHCenter {
    double v = 0.0;
    double w = 0.0;
    int cells = 1;
};

/// SSH chain with staggered on-site gain/loss i*gamma*(-1)^m (site m is 1-based).
struct NonHermitianSSHCenter {
    double v = 0.0;
    double w = 0.0;
    double gamma = 0.0;
    int cells = 1;
};

/// Arbitrary square center matrix, copied verbatim.
struct CustomCenter {
    DenseMatrix matrix;
};

using CenterSpec = std::variant<SSHCenter, NonHermitianSSHCenter, CustomCenter>;

/// Uniform tight-binding lead. `hopping` is signed and used for both the lead
/// bonds and the junction bond to the center.
struct LeadSpec {
    double hopping = -0.1;
    double chemical_potential = 0.0;
    int length = 200;
};

enum class Geometry {
    multichannel, ///< one input lead plus one output lead per center site
    two_lead      ///< input and a single output lead both attached at one site
};

struct NetworkSpec {
    CenterSpec center;
    LeadSpec lead;
    Geometry geometry = Geometry::multichannel;
    int n_output_leads = 0; ///< 0 means one per center site; multichannel only
    int input_site = 1;     ///< 1-based center site of the input lead (alpha for two-lead)
};

// ---------------------------------------------------------------------------
// Site bookkeeping

enum class Region : std::uint8_t { center, input, output };

/// A lattice site. `channel` is 0 for the center and the input lead and the
/// lead index l >= 1 for output leads. `offset` is the 1-based center site, or
/// the distance j >= 1 from the junction along a lead.
struct Site {
    Region region = Region::center;
    int channel = 0;
    int offset = 1;

    friend bool operator==(const Site&, const Site&) = default;
};

/// Bijection between sites and global indices. Ordering: center block first,
/// then the input lead, then output leads in channel order.
class SiteRegistry {
public:
    SiteRegistry() = default;

    SiteRegistry(int center_sites, int lead_length, int input_site, std::vector<int> output_attachments)
        : center_sites_(center_sites), lead_length_(lead_length), input_site_(input_site),
          output_attachments_(std::move(output_attachments)) {}

    static SiteRegistry center_only(int center_sites) { return SiteRegistry(center_sites, 0, 0, {}); }

    int center_sites() const { return center_sites_; }
    int lead_length() const { return lead_length_; }
    bool has_leads() const { return lead_length_ > 0; }
    int output_leads() const { return static_cast<int>(output_attachments_.size()); }
    /// 1-based center site carrying the input lead (0 when there are no leads).
    int input_site() const { return input_site_; }
    /// 1-based center site carrying output lead `channel`.
    int attachment(int channel) const {
        detail::require(channel >= 1 && channel <= output_leads(), "output channel out of range");
        return output_attachments_[channel - 1];
    }
    const std::vector<int>& attachments() const { return output_attachments_; }

    Eigen::Index dim() const {
        if (!has_leads())
            return center_sites_;
        return center_sites_ + static_cast<Eigen::Index>(lead_length_) * (1 + output_leads());
    }

    Eigen::Index index(const Site& s) const {
        switch (s.region) {
        case Region::center:
            detail::require(s.offset >= 1 && s.offset <= center_sites_, "center offset out of range");
            return s.offset - 1;
        case Region::input:
            detail::require(has_leads() && s.offset >= 1 && s.offset <= lead_length_, "input offset out of range");
            return center_sites_ + s.offset - 1;
        case Region::output:
            detail::require(has_leads() && s.channel >= 1 && s.channel <= output_leads(), "output channel out of range");
            detail::require(s.offset >= 1 && s.offset <= lead_length_, "output offset out of range");
            return center_sites_ + static_cast<Eigen::Index>(lead_length_) * s.channel + s.offset - 1;
        }
        throw PreconditionError("unknown region");
    }

    Site site(Eigen::Index i) const {
        detail::require(i >= 0 && i < dim(), "global index out of range");
        if (i < center_sites_)
            return {Region::center, 0, static_cast<int>(i) + 1};
        auto rest = i - center_sites_;
        int channel = static_cast<int>(rest / lead_length_);
        int offset = static_cast<int>(rest % lead_length_) + 1;
        if (channel == 0)
            return {Region::input, 0, offset};
        return {Region::output, channel, offset};
    }

    /// First global index of the lead for `channel` (0 = input lead).
    Eigen::Index lead_begin(int channel) const {
        return center_sites_ + static_cast<Eigen::Index>(lead_length_) * channel;
    }

private:
    int center_sites_ = 0;
    int lead_length_ = 0;
    int input_site_ = 0;
    std::vector<int> output_attachments_;
};

// ---------------------------------------------------------------------------

/// Sparse complex Hamiltonian with its site registry. Immutable after construction.
class Hamiltonian {
public:
    Hamiltonian(SparseMatrix matrix, SiteRegistry registry)
        : matrix_(std::move(matrix)), registry_(std::move(registry)) {
        matrix_.makeCompressed();
        detail::require(matrix_.rows() == matrix_.cols(), "Hamiltonian must be square");
        detail::require(matrix_.rows() == registry_.dim(), "registry does not cover the matrix");
        SparseMatrix adjoint = matrix_.adjoint();
        SparseMatrix diff = matrix_ - adjoint;
        for (int k = 0; k < diff.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
                hermiticity_defect_ = std::max(hermiticity_defect_, std::abs(it.value()));
    }

    Eigen::Index dim() const { return matrix_.rows(); }
    const SparseMatrix& matrix() const { return matrix_; }
    const SiteRegistry& registry() const { return registry_; }
    bool hermitian() const { return hermiticity_defect_ < hermitian_tolerance; }
    double hermiticity_defect() const { return hermiticity_defect_; }

    /// True when every stored (i, j) has a stored (j, i).
    bool structurally_symmetric() const {
        for (int k = 0; k < matrix_.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it)
                if (it.row() != it.col() && !has_entry(it.col(), it.row()))
                    return false;
        return true;
    }

    DenseMatrix dense() const { return DenseMatrix(matrix_); }

    /// The center block H_c as a dense matrix.
    DenseMatrix center_block() const {
        auto n = registry_.center_sites();
        return dense_block(n);
    }

private:
    bool has_entry(Eigen::Index row, Eigen::Index col) const {
        for (SparseMatrix::InnerIterator it(matrix_, row); it; ++it)
            if (it.col() == col)
                return true;
        return false;
    }

    DenseMatrix dense_block(Eigen::Index n) const {
        DenseMatrix out = DenseMatrix::Zero(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it)
                if (it.col() < n)
                    out(r, it.col()) = it.value();
        return out;
    }

    SparseMatrix matrix_;
    SiteRegistry registry_;
    double hermiticity_defect_ = 0.0;
};

// ---------------------------------------------------------------------------

inline int site_count(const CenterSpec& spec) {
    return std::visit(
        [](const auto& c) -> int {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, CustomCenter>)
                return static_cast<int>(c.matrix.rows());
            else
                return 2 * c.cells;
        },
        spec);
}

namespace detail {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

inline void add_bond(Triplets& out, Eigen::Index a, Eigen::Index b, cplx amplitude) {
    out.emplace_back(a, b, amplitude);
    out.emplace_back(b, a, std::conj(amplitude));
}

inline void add_ssh_bonds(Triplets& out, double v, double w, int cells) {
    const int n = 2 * cells;
    for (int i = 0; i + 1 < n; ++i)
        add_bond(out, i, i + 1, (i % 2 == 0) ? v : w);
}

inline void append_center(Triplets& out, const CenterSpec& spec) {
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, SSHCenter>) {
                require(c.cells >= 1, "SSH center needs at least one cell");
                add_ssh_bonds(out, c.v, c.w, c.cells);
            } else if constexpr (std::is_same_v<T, NonHermitianSSHCenter>) {
                require(c.cells >= 1, "non-Hermitian SSH center needs at least one cell");
                add_ssh_bonds(out, c.v, c.w, c.cells);
                for (int m = 1; m <= 2 * c.cells; ++m)
                    out.emplace_back(m - 1, m - 1, cplx(0.0, (m % 2 == 0 ? 1.0 : -1.0) * c.gamma));
            } else {
                require(c.matrix.rows() >= 1, "custom center matrix is empty");
                require(c.matrix.rows() == c.matrix.cols(), "custom center matrix must be square");
                for (Eigen::Index i = 0; i < c.matrix.rows(); ++i)
                    for (Eigen::Index j = 0; j < c.matrix.cols(); ++j)
                        if (c.matrix(i, j) != cplx(0.0)) {
                            out.emplace_back(i, j, c.matrix(i, j));
                            // explicit zero keeps the stored pattern symmetric
                            out.emplace_back(j, i, cplx(0.0));
                        }
            }
        },
        spec);
}

} // namespace detail

/// Center Hamiltonian alone (no leads).
inline Hamiltonian build_center(const CenterSpec& spec) {
    detail::Triplets triplets;
    detail::append_center(triplets, spec);
    const int n = site_count(spec);
    SparseMatrix m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return Hamiltonian(std::move(m), SiteRegistry::center_only(n));
}

/// Full network: center block, finite leads with hopping J and on-site mu,
/// and junction bonds of amplitude J from each lead's first site to its attachment.
inline Hamiltonian assemble_network(const NetworkSpec& net) {
    const int n = site_count(net.center);
    const auto& lead = net.lead;
    detail::require(lead.hopping != 0.0, "lead hopping J must be nonzero");
    detail::require(lead.length >= 1, "lead length must be at least 1");
    detail::require(net.input_site >= 1 && net.input_site <= n, "input attachment site out of range [1, N]");

    std::vector<int> attachments;
    if (net.geometry == Geometry::two_lead) {
        attachments.push_back(net.input_site);
    } else {
        int outputs = net.n_output_leads == 0 ? n : net.n_output_leads;
        detail::require(outputs >= 1 && outputs <= n, "number of output leads out of range [1, N]");
        for (int l = 1; l <= outputs; ++l)
            attachments.push_back(l);
    }
    SiteRegistry registry(n, lead.length, net.input_site, attachments);

    detail::Triplets triplets;
    detail::append_center(triplets, net.center);
    const cplx hop(lead.hopping, 0.0);
    auto add_lead = [&](int channel, int attached_site) {
        auto first = registry.lead_begin(channel);
        for (int j = 0; j < lead.length; ++j) {
            if (lead.chemical_potential != 0.0)
                triplets.emplace_back(first + j, first + j, cplx(lead.chemical_potential, 0.0));
            if (j + 1 < lead.length)
                detail::add_bond(triplets, first + j, first + j + 1, hop);
        }
        detail::add_bond(triplets, first, attached_site - 1, hop);
    };
    add_lead(0, net.input_site);
    for (int l = 1; l <= registry.output_leads(); ++l)
        add_lead(l, registry.attachment(l));

    SparseMatrix m(registry.dim(), registry.dim());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return Hamiltonian(std::move(m), std::move(registry));
}

/// Lead band E_k = 2 J cos k + mu for the stored signed hopping J.
inline double dispersion(double hopping, double chemical_potential, double k) {
    return 2.0 * hopping * std::cos(k) + chemical_potential;
}

/// |dE/dk| of the lead band.
inline double group_speed(double hopping, double k) {
    return 2.0 * std::abs(hopping) * std::abs(std::sin(k));
}

/// Wave vector whose plane wave e^{i k' j} travels toward +j for hopping J.
/// The velocity of e^{ikj} is -2 J sin k, so for J > 0 the sign flips.
inline double outgoing_wave_vector(double hopping, double k) {
    return hopping < 0.0 ? k : -k;
}

inline Vector apply(const Hamiltonian& h, const Vector& psi) {
    if (psi.size() != h.dim())
        throw PreconditionError("apply: state dimension " + std::to_string(psi.size()) +
                                " does not match Hamiltonian dimension " + std::to_string(h.dim()));
    return h.matrix() * psi;
}

// ---------------------------------------------------------------------------
// Dense eigen-decomposition oracle

struct EigenPair {
    cplx value;
    Vector vector; ///< right eigenvector, unit Euclidean norm
    double residual = 0.0;
};

inline constexpr Eigen::Index default_dense_cap = 2048;
inline constexpr double eigen_residual_tolerance = 1e-9;

inline std::vector<EigenPair> dense_eigs(const DenseMatrix& m, Eigen::Index cap = default_dense_cap) {
    detail::require(m.rows() == m.cols(), "dense_eigs: matrix must be square");
    if (m.rows() > cap)
        throw PreconditionError("dense_eigs: dimension " + std::to_string(m.rows()) + " exceeds cap " +
                                std::to_string(cap));
    std::vector<EigenPair> out;
    out.reserve(m.rows());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() < hermitian_tolerance) {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(m);
        if (solver.info() != Eigen::Success)
            throw NumericalError("dense_eigs: Hermitian eigensolver failed");
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out.push_back({cplx(solver.eigenvalues()(i), 0.0), solver.eigenvectors().col(i)});
    } else {
        Eigen::ComplexEigenSolver<DenseMatrix> solver(m);
        if (solver.info() != Eigen::Success)
            throw NumericalError("dense_eigs: complex eigensolver failed");
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out.push_back({solver.eigenvalues()(i), solver.eigenvectors().col(i).normalized()});
    }
    for (auto& pair : out) {
        pair.residual = (m * pair.vector - pair.value * pair.vector).norm();
        if (pair.residual > eigen_residual_tolerance)
            throw NumericalError("dense_eigs: residual " + std::to_string(pair.residual) + " above tolerance");
    }
    std::stable_sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) {
        if (a.value.real() != b.value.real())
            return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return out;
}

inline std::vector<EigenPair> dense_eigs(const Hamiltonian& h, Eigen::Index cap = default_dense_cap) {
    if (h.dim() > cap)
        throw PreconditionError("dense_eigs: dimension " + std::to_string(h.dim()) + " exceeds cap " +
                                std::to_string(cap));
    return dense_eigs(h.dense(), cap);
}

/// Coordinate-triplet dump, one "row col re im" line per stored entry (0-based).
inline void write_triplets(std::ostream& os, const Hamiltonian& h) {
    os << "# row col re im\n";
    os.precision(17);
    for (int k = 0; k < h.matrix().outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(h.matrix(), k); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value().real() + 0.0 << ' ' << it.value().imag() + 0.0
               << '\n';
}

} // namespace scatterlab
