#include <gtest/gtest.h>

#include <cmath>

#include "gsa/design.hpp"
#include "gsa/scenario.hpp"
#include "gsa/sim.hpp"

using namespace gsa;

namespace {

struct Built {
    EffectiveScenario es;
    ChannelSet cs;
    GsaDesign design;
};

Built build(const Scenario& sc, std::uint64_t seed) {
    EffectiveScenario es = effective_antennas(sc);
    ChannelSet cs = sample_channels(es, seed);
    GsaDesign d = build_design(es, cs);
    return {std::move(es), std::move(cs), std::move(d)};
}

} // namespace

TEST(Noiseless, FeasibleInstancesAreExact) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Built b = build(preset_y(3, 2, 5), seed);
        EXPECT_LE(run_noiseless(b.design, b.cs, seed + 100), 1e-7);
    }
    const Built star = build(preset_star({5, 2, 1}, 3), 7);
    EXPECT_LE(run_noiseless(star.design, star.cs, 3), 1e-7);
}

TEST(Noiseless, ZeroSymbolsGiveZeroError) {
    const Built b = build(preset_y(3, 2, 5), 2);
    const CMatrix zeros = CMatrix::Zero(b.design.plan.total_symbols(), 3);
    EXPECT_EQ(noiseless_recovery_error(b.design, b.cs, zeros), 0.0);
}

TEST(Noiseless, ScalarNetworkCoding) {
    // two single-antenna users: the relay stream is the symbol sum and
    // each side peels its own contribution off
    DataSwitchMatrix D = DataSwitchMatrix::zero(2);
    D(0, 1) = D(1, 0) = 1;
    const Built b = build(make_scenario({1, 1}, 3, D), 11);
    CMatrix sym(2, 1);
    sym(0, 0) = Complex(0.3, -1.1);
    sym(1, 0) = Complex(-2.0, 0.4);
    const CMatrix x_r =
        b.design.U * (b.design.A * (b.cs.H[0] * b.design.V[0] * sym.topRows(1) +
                                    b.cs.H[1] * b.design.V[1] * sym.bottomRows(1)));
    const CMatrix z0 = b.design.rx[0] * (b.cs.G[0] * x_r);
    EXPECT_NEAR(std::abs(z0(0, 0) - (sym(0, 0) + sym(1, 0))), 0.0, 1e-9);
    EXPECT_LE(noiseless_recovery_error(b.design, b.cs, sym), 1e-9);
}

TEST(Noiseless, SymbolRowMismatchRejected) {
    const Built b = build(preset_y(3, 2, 5), 2);
    EXPECT_THROW(noiseless_recovery_error(b.design, b.cs, CMatrix::Zero(4, 1)),
                 InvalidInputError);
}

TEST(Noisy, ConfigValidation) {
    const Built b = build(preset_y(3, 2, 3), 1);
    SimConfig cfg;
    cfg.snr_grid_db = {};
    EXPECT_THROW(run_noisy(b.design, b.cs, cfg), InvalidInputError);
    cfg.snr_grid_db = {20.0, 20.0};
    EXPECT_THROW(run_noisy(b.design, b.cs, cfg), InvalidInputError);
    cfg.snr_grid_db = {20.0, 10.0};
    EXPECT_THROW(run_noisy(b.design, b.cs, cfg), InvalidInputError);
    cfg.snr_grid_db = {10.0};
    cfg.trials = 0;
    EXPECT_THROW(run_noisy(b.design, b.cs, cfg), InvalidInputError);
    cfg.trials = 1;
    cfg.symbol_model = SymbolModel::Qam;
    cfg.qam_order = 8;
    EXPECT_THROW(run_noisy(b.design, b.cs, cfg), InvalidInputError);
    cfg.qam_order = 16;
    EXPECT_NO_THROW(run_noisy(b.design, b.cs, cfg));
}

TEST(Noisy, SlopeMatchesStreamCount) {
    const Built b = build(preset_y(3, 2, 3), 4);
    SimConfig cfg;
    cfg.snr_grid_db = {30, 40, 50, 60};
    cfg.trials = 50;
    cfg.seed = 99;
    const SimResult res = run_noisy(b.design, b.cs, cfg);
    EXPECT_EQ(res.streams_delivered, 6);
    EXPECT_NEAR(res.dof_estimate, 6.0, 0.6);
}

TEST(Noisy, SlopeTightensAtHigherSnr) {
    const Built b = build(preset_y(3, 2, 3), 4);
    SimConfig cfg;
    cfg.trials = 100;
    cfg.seed = 5;
    cfg.snr_grid_db = {40, 50, 60, 70};
    const double mid = run_noisy(b.design, b.cs, cfg).dof_estimate;
    EXPECT_NEAR(mid, 6.0, 0.6);
    cfg.snr_grid_db = {60, 70, 80, 90};
    const double high = run_noisy(b.design, b.cs, cfg).dof_estimate;
    EXPECT_NEAR(high, 6.0, 0.3);
}

TEST(Noisy, RateNondecreasingInSnr) {
    const Built b = build(preset_star({5, 2, 1}, 3), 6);
    SimConfig cfg;
    cfg.snr_grid_db = {10, 20, 30, 40, 50};
    cfg.trials = 40;
    cfg.seed = 21;
    const SimResult res = run_noisy(b.design, b.cs, cfg);
    EXPECT_EQ(res.streams_delivered, 6);  // effective hub antennas: 3
    for (size_t k = 1; k < res.per_snr.size(); ++k)
        EXPECT_GE(res.per_snr[k].sum_rate_bits,
                  0.95 * res.per_snr[k - 1].sum_rate_bits);
}

TEST(Noisy, VanishingNoiseReproducesNoiseless) {
    const Built b = build(preset_y(3, 2, 3), 8);
    SimConfig cfg;
    cfg.snr_grid_db = {300};
    cfg.trials = 2;
    cfg.seed = 13;
    const SimResult res = run_noisy(b.design, b.cs, cfg);
    for (double m : res.per_snr[0].mse_node) EXPECT_LE(m, 1e-20);
}

TEST(Noisy, TrialCountLeavesSlopeStable) {
    const Built b = build(preset_y(3, 2, 3), 4);
    SimConfig cfg;
    cfg.snr_grid_db = {40, 50, 60, 70};
    cfg.seed = 31;
    cfg.trials = 1;
    const double one = run_noisy(b.design, b.cs, cfg).dof_estimate;
    cfg.trials = 100;
    const double many = run_noisy(b.design, b.cs, cfg).dof_estimate;
    EXPECT_NEAR(one, 6.0, 0.6);
    EXPECT_NEAR(many, 6.0, 0.6);
}

TEST(Noisy, DeterministicGivenSeed) {
    const Built b = build(preset_y(3, 2, 3), 9);
    SimConfig cfg;
    cfg.snr_grid_db = {20, 30, 40};
    cfg.trials = 17;
    cfg.seed = 1234;
    const SimResult a = run_noisy(b.design, b.cs, cfg);
    const SimResult c = run_noisy(b.design, b.cs, cfg);
    ASSERT_EQ(a.per_snr.size(), c.per_snr.size());
    EXPECT_EQ(a.dof_estimate, c.dof_estimate);
    for (size_t k = 0; k < a.per_snr.size(); ++k) {
        EXPECT_EQ(a.per_snr[k].sum_rate_bits, c.per_snr[k].sum_rate_bits);
        EXPECT_EQ(a.per_snr[k].mse_node, c.per_snr[k].mse_node);
    }
}

TEST(Noisy, SeedChangesResult) {
    const Built b = build(preset_y(3, 2, 3), 9);
    SimConfig cfg;
    cfg.snr_grid_db = {20, 30};
    cfg.trials = 5;
    cfg.seed = 1;
    const double r1 = run_noisy(b.design, b.cs, cfg).per_snr[0].sum_rate_bits;
    cfg.seed = 2;
    const double r2 = run_noisy(b.design, b.cs, cfg).per_snr[0].sum_rate_bits;
    EXPECT_NE(r1, r2);
}

TEST(Noisy, RelayNormalizationPreservesSlope) {
    const Built b = build(preset_y(3, 2, 3), 4);
    SimConfig cfg;
    cfg.snr_grid_db = {40, 50, 60, 70};
    cfg.trials = 60;
    cfg.seed = 77;
    cfg.normalize_relay_power = false;
    const SimResult raw = run_noisy(b.design, b.cs, cfg);
    cfg.normalize_relay_power = true;
    const SimResult norm = run_noisy(b.design, b.cs, cfg);
    EXPECT_NEAR(raw.dof_estimate, 6.0, 0.6);
    EXPECT_NEAR(norm.dof_estimate, 6.0, 0.6);
    // normalization shifts finite-SNR rates but not the trend
    EXPECT_NE(raw.per_snr[0].sum_rate_bits, norm.per_snr[0].sum_rate_bits);
}

TEST(Noisy, QamSymbolsWork) {
    const Built b = build(preset_y(3, 2, 3), 4);
    SimConfig cfg;
    cfg.snr_grid_db = {40, 50, 60, 70};
    cfg.trials = 60;
    cfg.seed = 15;
    cfg.symbol_model = SymbolModel::Qam;
    cfg.qam_order = 4;
    const SimResult res = run_noisy(b.design, b.cs, cfg);
    EXPECT_NEAR(res.dof_estimate, 6.0, 0.6);
}

TEST(Noisy, QamConstellationHasUnitEnergy) {
    const CMatrix s = gsa::detail::sample_qam(2000, 1, 16, 42);
    double e = 0;
    for (Index r = 0; r < s.rows(); ++r) e += std::norm(s(r, 0));
    EXPECT_NEAR(e / s.rows(), 1.0, 0.05);
}

TEST(Noisy, MsePerNodeCoversEveryNode) {
    const Built b = build(preset_y(4, 3, 9), 3);
    SimConfig cfg;
    cfg.snr_grid_db = {20};
    cfg.trials = 10;
    cfg.seed = 8;
    const SimResult res = run_noisy(b.design, b.cs, cfg);
    ASSERT_EQ(res.per_snr[0].mse_node.size(), 4u);
    for (double m : res.per_snr[0].mse_node) EXPECT_GT(m, 0.0);
    EXPECT_EQ(res.streams_delivered, 12);
}
