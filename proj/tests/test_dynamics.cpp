#include <scatterlab/dynamics.hpp>
#include <scatterlab/steady.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace scatterlab;
using std::numbers::pi;

namespace {

Network small_network(double v, double w, int cells, double J = -0.1, int length = 200) {
    return Network(NetworkSpec{SSHCenter{v, w, cells}, LeadSpec{J, 0.0, length}});
}

} // namespace

TEST(InitGaussian, UnitNormPeakAndSupport) {
    const auto net = small_network(2.0, 4.0, 20);
    const Vector psi = init_gaussian(net, {-100, 20.0, pi / 2});
    EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
    const auto& reg = net.registry();
    Eigen::Index peak = 0;
    psi.cwiseAbs().maxCoeff(&peak);
    EXPECT_EQ(reg.site(peak), (Site{Region::input, 0, 100}));
    EXPECT_EQ(psi.head(reg.center_sites()).norm(), 0.0);
    EXPECT_EQ(psi.tail(reg.dim() - reg.lead_begin(1)).norm(), 0.0);
}

TEST(InitGaussian, PhaseIsPlaneWave) {
    const auto net = small_network(2.0, 4.0, 2, -0.1, 300);
    const double k = 0.7;
    const Vector psi = init_gaussian(net, {-150, 20.0, k});
    const auto& reg = net.registry();
    for (int j = 100; j <= 200; ++j) {
        const cplx z = psi(reg.index({Region::input, 0, j}));
        const cplx expected = std::exp(cplx(0.0, -k * j));
        EXPECT_NEAR(std::abs(z / std::abs(z) - expected), 0.0, 1e-12);
    }
}

TEST(InitGaussian, WiderPacketsApproachPlaneWave) {
    const auto net = small_network(2.0, 4.0, 2, -0.1, 1000);
    const auto& reg = net.registry();
    double prev = 0.0;
    for (double sigma : {10.0, 40.0, 110.0}) {
        const Vector psi = init_gaussian(net, {-500, sigma, pi / 2});
        // autocorrelation with a plane wave over a fixed 41-site window
        cplx s = 0.0;
        int count = 0;
        for (int j = 480; j <= 520; ++j, ++count)
            s += std::conj(std::exp(cplx(0.0, -pi / 2 * j))) * psi(reg.index({Region::input, 0, j}));
        double local = 0.0;
        for (int j = 480; j <= 520; ++j)
            local += std::norm(psi(reg.index({Region::input, 0, j})));
        const double overlap = std::abs(s) / std::sqrt(count * local);
        EXPECT_GT(overlap, prev);
        EXPECT_LE(overlap, 1.0 + 1e-12);
        prev = overlap;
    }
    EXPECT_GT(prev, 0.999);
}

TEST(InitGaussian, ZeroWaveVectorIsRealPositive) {
    const auto net = small_network(2.0, 4.0, 2);
    const Vector psi = init_gaussian(net, {-100, 20.0, 0.0});
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        EXPECT_EQ(psi(i).imag(), 0.0);
        EXPECT_GE(psi(i).real(), 0.0);
    }
}

TEST(InitGaussian, RejectsOverflowingPackets) {
    const auto net = small_network(2.0, 4.0, 2);
    EXPECT_THROW(init_gaussian(net, {-150, 20.0, pi / 2}), PreconditionError);
    EXPECT_THROW(init_gaussian(net, {10, 20.0, pi / 2}), PreconditionError);
    EXPECT_THROW(init_gaussian(net, {-100, 0.0, pi / 2}), PreconditionError);
}

TEST(ChannelProbabilities, InputLeadOnly) {
    const auto net = small_network(2.0, 4.0, 3, -0.1, 50);
    const Vector psi = init_gaussian(net, {-25, 5.0, pi / 2});
    const auto p = channel_probabilities(psi, net.registry());
    ASSERT_EQ(p.size(), 7u);
    EXPECT_NEAR(p[0], 1.0, 1e-12);
    for (std::size_t l = 1; l < p.size(); ++l)
        EXPECT_EQ(p[l], 0.0);
}

TEST(Visibility, Definition) {
    EXPECT_DOUBLE_EQ(visibility({0.0, 0.5, 0.0, 0.0}, 1), 1.0);
    EXPECT_NEAR(visibility({0.0, 0.8, 0.0, 0.2}, 1), 0.6, 1e-15);
    EXPECT_NEAR(visibility({0.0, 0.1, 0.0, 0.4, 0.0, 0.1}, 2), 0.6, 1e-15);
    EXPECT_THROW(visibility({1.0, 1e-12, 0.0, 1e-13}, 1), PreconditionError);
    EXPECT_THROW(visibility({1.0, 0.5, 0.0, 0.5}, 0), PreconditionError);
    EXPECT_THROW(visibility({1.0, 0.5}, 1), PreconditionError);
}

TEST(StopTime, GroupVelocityEstimate) {
    const auto net = small_network(2.0, 4.0, 20);
    EXPECT_DOUBLE_EQ(group_speed(net.hopping(), pi / 2), 0.2);
    const double t = stop_time(net, {-100, 20.0, pi / 2});
    EXPECT_NEAR(t, (100.0 + 80.0 + 40.0) / 0.2, 1e-9);
    const auto fast = small_network(2.0, 4.0, 20, -0.2);
    EXPECT_NEAR(stop_time(fast, {-100, 20.0, pi / 2}), 0.5 * t, 1e-9);
    EXPECT_THROW(stop_time(net, {-100, 20.0, 0.0}), PreconditionError);
}

class SmallExperiment : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        net_ = new Network(NetworkSpec{SSHCenter{2.0, 4.0, 4}, LeadSpec{-0.1, 0.0, 200}});
        rec_ = new TrajectoryRecord(run_experiment(*net_, {-100, 20.0, pi / 2}));
    }
    static void TearDownTestSuite() {
        delete rec_;
        delete net_;
    }
    static Network* net_;
    static TrajectoryRecord* rec_;
};
Network* SmallExperiment::net_ = nullptr;
TrajectoryRecord* SmallExperiment::rec_ = nullptr;

TEST_F(SmallExperiment, NormConservedAtEverySnapshot) {
    for (double n : rec_->norms)
        EXPECT_NEAR(n, 1.0, 1e-8);
}

TEST_F(SmallExperiment, ProbabilityBookkeeping) {
    double s = rec_->center_residual;
    for (double p : rec_->channel_probabilities)
        s += p;
    EXPECT_NEAR(s, rec_->final_norm() * rec_->final_norm(), 1e-12);
    EXPECT_LT(rec_->center_residual, 1e-4);
}

TEST_F(SmallExperiment, UniformSnapshots) {
    ASSERT_GE(rec_->times.size(), 2u);
    for (std::size_t i = 0; i < rec_->times.size(); ++i)
        EXPECT_DOUBLE_EQ(rec_->times[i], 10.0 * static_cast<double>(i));
    EXPECT_GE(rec_->final_time, rec_->base_time);
    EXPECT_EQ(rec_->densities.size(), rec_->times.size());
    EXPECT_TRUE(rec_->states.empty());
    EXPECT_TRUE(rec_->warnings.empty());
}

TEST_F(SmallExperiment, AgreesWithSteadySolution) {
    const auto sol = solve_multichannel(net_->hamiltonian.center_block(), -0.1, 0.0, pi / 2);
    const auto& p = rec_->channel_probabilities;
    EXPECT_NEAR(p[0], sol.reflectance(), 0.02);
    for (int l = 1; l <= 8; ++l)
        EXPECT_NEAR(p[l], sol.transmittance(l), 0.02);
}

TEST_F(SmallExperiment, WaveguideReadingIsBitIdentical) {
    const Vector u = waveguide_output(*net_, {-100, 20.0, pi / 2}, rec_->final_time);
    ASSERT_EQ(u.size(), rec_->final_state.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        ASSERT_EQ(u(i), rec_->final_state(i));
}

TEST_F(SmallExperiment, RepeatRunIsIdentical) {
    const auto again = run_experiment(*net_, {-100, 20.0, pi / 2});
    ASSERT_EQ(again.densities.size(), rec_->densities.size());
    EXPECT_EQ(again.channel_probabilities, rec_->channel_probabilities);
    EXPECT_TRUE(again.densities.back() == rec_->densities.back());
}

TEST(RunExperiment, MaxTimeWarning) {
    const auto net = small_network(2.0, 4.0, 4);
    PropagatorConfig cfg;
    cfg.max_time = 300.0;
    const auto rec = run_experiment(net, {-100, 20.0, pi / 2}, cfg);
    EXPECT_DOUBLE_EQ(rec.final_time, 300.0);
    ASSERT_FALSE(rec.warnings.empty());
    EXPECT_NE(rec.warnings.front().find("max_time"), std::string::npos);
}

TEST(RunExperiment, FullStateSnapshotsOnRequest) {
    const auto net = small_network(2.0, 4.0, 2, -0.5, 60);
    PropagatorConfig cfg;
    cfg.full_state_snapshots = true;
    cfg.snapshot_stride = 5.0;
    const auto rec = run_experiment(net, {-25, 5.0, pi / 2}, cfg);
    ASSERT_EQ(rec.states.size(), rec.times.size());
    EXPECT_TRUE(rec.states.back() == rec.final_state);
}

TEST(RunExperiment, OffResonantCenterReflects) {
    const auto net = small_network(30.0, 1.0, 2, -0.1, 200);
    const auto rec = run_experiment(net, {-100, 20.0, pi / 2});
    EXPECT_GT(rec.channel_probabilities[0], 0.99);
}

TEST(RunExperiment, GainLossIsNotRenormalized) {
    const Network net(NetworkSpec{NonHermitianSSHCenter{40.0, 2.0, 10.0, 2}, LeadSpec{-0.1, 37.5, 120}});
    PropagatorConfig cfg;
    cfg.snapshot_stride = 20.0;
    const auto rec = run_experiment(net, {-60, 10.0, pi / 2}, cfg);
    EXPECT_FALSE(Propagator(net.hamiltonian, cfg).uses_chebyshev());
    EXPECT_GT(std::abs(rec.final_norm() - 1.0), 1e-6);
}
