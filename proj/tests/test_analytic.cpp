#include <scatterlab/analytic.hpp>
#include <scatterlab/lattice.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace scatterlab;
using namespace scatterlab::analytic;
using std::numbers::pi;

TEST(EdgeState, SmallChainAmplitudes) {
    const auto p = edge_state_amplitudes(0.5, 3);
    ASSERT_EQ(p.amplitudes.size(), 3u);
    const double pre = std::sqrt(0.75);
    EXPECT_NEAR(p.amplitudes[0], pre * 1.0, 1e-15);
    EXPECT_NEAR(p.amplitudes[1], pre * -0.5, 1e-15);
    EXPECT_NEAR(p.amplitudes[2], pre * 0.25, 1e-15);
}

TEST(EdgeState, DecoupledLimitIsLocalized) {
    const auto p = edge_state_amplitudes(0.0, 5);
    EXPECT_EQ(p.amplitudes[0], 1.0);
    for (int j = 1; j < 5; ++j)
        EXPECT_EQ(p.amplitudes[j], 0.0);
}

TEST(EdgeState, RatioIsMinusQ) {
    for (double q : {0.1, 0.37, 0.5, 0.9}) {
        const auto p = edge_state_amplitudes(q, 12);
        for (int j = 0; j + 1 < 12; ++j)
            EXPECT_NEAR(p.amplitudes[j + 1] / p.amplitudes[j], -q, 1e-14);
    }
}

TEST(EdgeState, NormApproachesOne) {
    double s = 0.0;
    for (const auto& a : edge_state_amplitudes(0.5, 60).amplitudes)
        s += std::norm(a);
    EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(EdgeState, MatchesDenseZeroModeOnOddSites) {
    const auto pairs = dense_eigs(build_center(SSHCenter{2.0, 4.0, 20}));
    const Vector theory = edge_state_vector(edge_state_amplitudes(0.5, 20));
    ASSERT_EQ(theory.size(), 40);
    int checked = 0;
    for (const auto& p : pairs) {
        if (std::abs(p.value) >= 1e-4)
            continue;
        // chiral partners are (L +- R)/sqrt 2 with L on odd and R on even sites
        Vector odd = Vector::Zero(40);
        for (int i = 0; i < 40; i += 2)
            odd(i) = p.vector(i);
        EXPECT_GT(std::abs(odd.normalized().dot(theory.normalized())), 0.999);
        ++checked;
    }
    EXPECT_EQ(checked, 2);
}

TEST(EdgeState, RejectsTrivialPhase) {
    EXPECT_THROW(edge_state_amplitudes(1.0, 5), PreconditionError);
    EXPECT_THROW(edge_state_amplitudes(1.5, 5), PreconditionError);
    EXPECT_THROW(edge_state_amplitudes(-0.1, 5), PreconditionError);
}

TEST(Predicted, ReferenceValues) {
    EXPECT_NEAR(predicted_probability(0.5, 1), 36.0 / 49.0, 1e-15);
    EXPECT_NEAR(predicted_probability(0.5, 0), 1.0 / 49.0, 1e-15);
    EXPECT_EQ(predicted_probability(0.5, 2), 0.0);
    EXPECT_NEAR(predicted_probability(0.5, 3), 0.25 * 36.0 / 49.0, 1e-15);
    EXPECT_EQ(predicted_probability(1.5, 0), 1.0);
    for (int l = 1; l < 10; ++l)
        EXPECT_EQ(predicted_probability(1.5, l), 0.0);
    EXPECT_THROW(predicted_probability(1.0, 0), PreconditionError);
    EXPECT_THROW(predicted_probability(0.0, 0), PreconditionError);
}

TEST(Predicted, SumsToOne) {
    for (double q = 0.05; q < 1.0; q += 0.05) {
        double s = predicted_probability(q, 0);
        for (int l = 1; l < 100000; ++l) {
            const double p = predicted_probability(q, l);
            s += p;
            if (l % 2 == 1 && p < 1e-18)
                break;
        }
        EXPECT_NEAR(s, 1.0, 1e-12) << "q=" << q;
    }
}

TEST(Predicted, ContinuityOfAmplitudes) {
    for (double q : {0.1, 0.5, 0.99, 1.01, 1.5, 3.0})
        EXPECT_NEAR(transmission_amplitude(q) - reflection_amplitude(q), 1.0, 1e-15);
}

TEST(Visibility, ReferenceValues) {
    EXPECT_NEAR(visibility_theory(0.5), 0.6, 1e-15);
    EXPECT_NEAR(visibility_theory(1e-8), 1.0, 1e-12);
    EXPECT_NEAR(visibility_theory(0.9), 0.19 / 1.81, 1e-15);
    EXPECT_NEAR(visibility_theory(0.9), 0.1050, 1e-4);
    EXPECT_THROW(visibility_theory(1.0), PreconditionError);
    EXPECT_THROW(visibility_theory(1.5), PreconditionError);
}

TEST(Visibility, ConsistentWithPredictedProbabilities) {
    for (double q = 0.05; q < 1.0; q += 0.05) {
        const double p1 = predicted_probability(q, 1), p3 = predicted_probability(q, 3);
        EXPECT_NEAR(std::abs(p3 - p1) / (p3 + p1), visibility_theory(q), 1e-12);
    }
}

TEST(Visibility, CurveAgreesBelowTransitionAndMirrorsAbove) {
    for (double q : {0.2, 0.5, 0.8})
        EXPECT_NEAR(visibility_curve(q), visibility_theory(q), 1e-15);
    for (double q : {1.25, 2.0, 4.0})
        EXPECT_NEAR(visibility_curve(q), visibility_theory(1.0 / q), 1e-14);
}

TEST(Reflection, ReferenceValues) {
    EXPECT_NEAR(reflection_theory(0.5), 1.0 / 49.0, 1e-15);
    EXPECT_NEAR(reflection_theory(1e-6), 0.0, 1e-20);
    EXPECT_EQ(reflection_theory(2.0), 1.0);
    EXPECT_THROW(reflection_theory(1.0), PreconditionError);
}

TEST(NHSpectrum, GroundLevel) {
    const auto s = nh_spectrum(40.0, 2.0, 10.0, 4);
    ASSERT_EQ(s.levels.size(), 4u);
    const auto& l0 = s.levels[0];
    EXPECT_NEAR(l0.kappa, pi / 5.0, 1e-15);
    EXPECT_TRUE(l0.real);
    EXPECT_NEAR(l0.energy, std::sqrt(std::pow(40.0 - 2.0 * std::cos(pi / 5.0), 2) - 100.0), 1e-12);
    EXPECT_NEAR(l0.energy, 37.06, 5e-3);
    EXPECT_NEAR(std::tan(l0.phase), 10.0 / l0.energy, 1e-12);
    EXPECT_EQ(s.real_levels().size(), 4u);
}

TEST(NHSpectrum, HermitianLimit) {
    const auto s = nh_spectrum(40.0, 2.0, 0.0, 4);
    for (const auto& l : s.levels)
        EXPECT_NEAR(l.energy, std::abs(40.0 - 2.0 * std::cos(l.kappa)), 1e-12);
}

TEST(NHSpectrum, BrokenRealityIsFlaggedNotThrown) {
    const auto s = nh_spectrum(1.0, 0.0, 2.0, 1);
    ASSERT_EQ(s.levels.size(), 1u);
    EXPECT_FALSE(s.levels[0].real);
    EXPECT_NEAR(s.levels[0].radicand, -3.0, 1e-15);
    EXPECT_TRUE(s.real_levels().empty());
    EXPECT_THROW(nh_transmission_profile(s.levels[0], 1), PreconditionError);
}

TEST(NHProfile, SinusoidalShapes) {
    const auto s = nh_spectrum(40.0, 2.0, 10.0, 4);
    auto expect_profile = [](const std::vector<double>& got, double kappa) {
        double peak = 0.0;
        for (int m = 1; m <= 4; ++m)
            peak = std::max(peak, std::pow(std::sin(kappa * m), 2));
        for (int m = 1; m <= 4; ++m)
            EXPECT_NEAR(got[m - 1], std::pow(std::sin(kappa * m), 2) / peak, 1e-14);
    };
    const auto p0 = nh_transmission_profile(s.levels[0], 4);
    expect_profile(p0, pi / 5.0);
    EXPECT_NEAR(p0[0], p0[3], 1e-14);
    EXPECT_NEAR(p0[1], p0[2], 1e-14);
    expect_profile(nh_transmission_profile(s.levels[1], 4), 2.0 * pi / 5.0);
    const auto p3 = nh_transmission_profile(s.levels[3], 4);
    for (int m = 0; m < 4; ++m)
        EXPECT_NEAR(p3[m], p0[m], 1e-14);
}
