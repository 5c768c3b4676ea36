// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "doalab/eval.hpp"
#include "oracles.hpp"

using namespace doalab;
using oracle::Mat;

TEST(Associate, IdenticalSets) {
    const std::vector<double> t{-0.4, 0.1, 0.7};
    const std::vector<double> e{0.7, -0.4, 0.1};
    const auto a = associate(t, e);
    ASSERT_EQ(a.pairs.size(), 3u);
    for (const auto& p : a.pairs)
        EXPECT_EQ(p.gap, 0.0);
    EXPECT_EQ(a.pairs[0].estimate, 1u);
    EXPECT_TRUE(a.unmatched_true.empty());
    EXPECT_TRUE(a.unmatched_est.empty());
}

TEST(Associate, EmptyEstimates) {
    const std::vector<double> t{0.1, 0.2};
    const auto a = associate(t, {});
    EXPECT_TRUE(a.pairs.empty());
    EXPECT_EQ(a.unmatched_true, (std::vector<std::size_t>{0, 1}));
}

TEST(Associate, BeatsGreedy) {
    const std::vector<double> t{0.0, 0.1};
    const std::vector<double> e{0.09, 0.01};
    const auto a = associate(t, e);
    EXPECT_NEAR(a.total_cost(), 0.02, 1e-15);
    EXPECT_EQ(a.pairs[0].estimate, 1u);
    EXPECT_EQ(a.pairs[1].estimate, 0u);
}

TEST(Associate, Rectangular) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> truth(1 + t % 5), est(1 + (t / 5) % 6);
        for (double& v : truth)
            v = u(rng);
        for (double& v : est)
            v = u(rng);
        const auto a = associate(truth, est);
        EXPECT_EQ(a.pairs.size(), std::min(truth.size(), est.size()));
        EXPECT_EQ(a.pairs.size() + a.unmatched_true.size(), truth.size());
        EXPECT_EQ(a.pairs.size() + a.unmatched_est.size(), est.size());
        EXPECT_NEAR(a.total_cost(), oracle::brute_force_assignment_cost(truth, est), 1e-12);
    }
}

TEST(Associate, NoWorseThanPermutations) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> truth(7), est(7);
    for (double& v : truth)
        v = u(rng);
    for (double& v : est)
        v = u(rng);
    const double best = associate(truth, est).total_cost();
    std::vector<std::size_t> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t <= 100; ++t) {
        double c = 0.0;
        for (std::size_t i = 0; i < 7; ++i)
            c += std::abs(truth[i] - est[perm[i]]);
        EXPECT_LE(best, c + 1e-15);
        std::shuffle(perm.begin(), perm.end(), rng);
    }
}

TEST(Detection, PerfectDetection) {
    const std::vector<double> t{-0.2, 0.5};
    const auto d = detection_metrics(associate(t, t), 2, default_hit_halfwidth(16));
    EXPECT_EQ(d.youden_j, 1.0);
    EXPECT_EQ(d.hits, 2u);
}

TEST(Detection, OneHitOneSpurious) {
    const std::vector<double> t{-0.2, 0.5};
    const std::vector<double> e{-0.21, 0.95};
    const auto d = detection_metrics(associate(t, e), 2, default_hit_halfwidth(16));
    EXPECT_DOUBLE_EQ(d.hit_rate, 0.5);
    EXPECT_DOUBLE_EQ(d.fa_rate, 0.5);
    EXPECT_DOUBLE_EQ(d.youden_j, 0.0);
}

TEST(Detection, ExtrasCountAsFalseAlarms) {
    const std::vector<double> t{0.0};
    const std::vector<double> e{0.0, 0.5, -0.5};
    const auto d = detection_metrics(associate(t, e), 1, 0.1);
    EXPECT_EQ(d.false_alarms, 2u);
    EXPECT_DOUBLE_EQ(d.fa_rate, 2.0 / 3.0);
}

TEST(Detection, NoDetections) {
    const std::vector<double> t{0.0, 0.3};
    const auto d = detection_metrics(associate(t, {}), 2, 0.1);
    EXPECT_EQ(d.youden_j, 0.0);
    EXPECT_THROW(detection_metrics(associate({}, {}), 0, 0.1), ContractError);
}

TEST(Detection, YoudenBounded) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> truth(1 + t % 6), est(t % 9);
        for (double& v : truth)
            v = u(rng);
        for (double& v : est)
            v = u(rng);
        const auto d = detection_metrics(associate(truth, est), truth.size(), 0.125);
        EXPECT_GE(d.youden_j, -1.0);
        EXPECT_LE(d.youden_j, 1.0);
        EXPECT_DOUBLE_EQ(d.youden_j, d.hit_rate - d.fa_rate);
    }
}

TEST(Rmse, SingleMethod) {
    const std::vector<double> t{0.3};
    const std::vector<double> e{0.301};
    const std::vector<DetectionMetrics> d{detection_metrics(associate(t, e), 1, 0.1)};
    const auto r = rmse_common_hits(d);
    ASSERT_TRUE(r[0].has_value());
    EXPECT_NEAR(*r[0], 0.001, 1e-12);
}

TEST(Rmse, DisjointHits) {
    const std::vector<double> t{-0.5, 0.5};
    const std::vector<double> e1{-0.5, 0.9};
    const std::vector<double> e2{-0.9, 0.5};
    const std::vector<DetectionMetrics> d{detection_metrics(associate(t, e1), 2, 0.1),
                                          detection_metrics(associate(t, e2), 2, 0.1)};
    const auto r = rmse_common_hits(d);
    EXPECT_FALSE(r[0].has_value());
    EXPECT_FALSE(r[1].has_value());
}

TEST(Rmse, ThreeTargetsByHand) {
    const std::vector<double> t{-0.6, 0.0, 0.6};
    const std::vector<double> e1{-0.61, 0.02, 0.6};
    const std::vector<double> e2{-0.6, 0.01, 0.9}; // misses target 2
    const std::vector<DetectionMetrics> d{detection_metrics(associate(t, e1), 3, 0.1),
                                          detection_metrics(associate(t, e2), 3, 0.1)};
    const auto r = rmse_common_hits(d);
    EXPECT_NEAR(*r[0], std::sqrt((0.01 * 0.01 + 0.02 * 0.02) / 2.0), 1e-12);
    EXPECT_NEAR(*r[1], std::sqrt((0.0 + 0.01 * 0.01) / 2.0), 1e-12);
}

TEST(Diagonality, Endpoints) {
    EXPECT_EQ(diagonality_score(Mat::Identity(5, 5)), 1.0);
    EXPECT_NEAR(diagonality_score(Mat::Ones(4, 4)), 0.0, 1e-15);
    Mat two(2, 2);
    two << 2, 1, 1, 2;
    EXPECT_NEAR(diagonality_score(two), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(diagonality_score(Mat::Constant(1, 1, 3.0)), 1.0);
    Mat z = Mat::Identity(3, 3);
    z.row(1).setZero();
    EXPECT_THROW(diagonality_score(z), ContractError);
}

TEST(Diagonality, PermutationInvariant) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const Mat a = oracle::random_complex(6, 6, rng);
        Eigen::PermutationMatrix<Eigen::Dynamic> p(6);
        p.setIdentity();
        std::shuffle(p.indices().data(), p.indices().data() + 6, rng);
        const Mat pap = p.transpose() * a * p;
        EXPECT_NEAR(diagonality_score(pap), diagonality_score(a), 1e-12);
        EXPECT_GE(diagonality_score(a), 0.0);
        EXPECT_LE(diagonality_score(a), 1.0);
    }
}

TEST(Diagnostics, OrthogonalSteering) {
    GroundTruth truth;
    truth.doas = {0.0, 0.25, 0.5}; // gap 2/M with M = 8
    Mat coeffs = Mat::Identity(3, 3);
    const auto d = diagnostics(truth, coeffs, 8, std::numbers::pi);
    EXPECT_NEAR(d.t_metric, 1.0, 1e-12);
    EXPECT_NEAR(d.s_metric, 1.0, 1e-12);
}

TEST(Diagnostics, SingleTarget) {
    GroundTruth truth;
    truth.doas = {0.3};
    std::mt19937_64 rng(5);
    const auto d = diagnostics(truth, oracle::random_complex(1, 10, rng), 8, std::numbers::pi);
    EXPECT_EQ(d.t_metric, 1.0);
    EXPECT_EQ(d.s_metric, 1.0);
}
