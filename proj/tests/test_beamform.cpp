#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "relaynet/beamform.hpp"
#include "support.hpp"

using namespace relaynet;
using relaynet::test::random_matrix;
using relaynet::test::random_psd;

TEST(SvdReceive, Identity) {
    const EffectiveChannel e = svd_receive_bf(CMatrix::Identity(3, 3));
    ASSERT_EQ(e.rows.rows(), 3);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.norms(i), 1.0, 1e-14);
    EXPECT_NEAR((e.rows * e.rows.adjoint() - CMatrix::Identity(3, 3)).norm(), 0.0, 1e-12);
}

TEST(SvdReceive, OrthogonalRowsWithSingularNorms) {
    std::mt19937_64 eng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix H = random_matrix(eng, 2, 4);
        const EffectiveChannel e = svd_receive_bf(H);
        ASSERT_EQ(e.rows.rows(), 2);
        EXPECT_LT(std::abs(e.rows.row(0).dot(e.rows.row(1))), 1e-10);
        // Independent oracle: singular values are the square roots of the
        // eigenvalues of H H^H.
        Eigen::SelfAdjointEigenSolver<CMatrix> es(H * H.adjoint());
        const double s_hi = std::sqrt(es.eigenvalues()(1)), s_lo = std::sqrt(es.eigenvalues()(0));
        EXPECT_NEAR(e.rows.row(0).norm(), s_hi, 1e-10);
        EXPECT_NEAR(e.rows.row(1).norm(), s_lo, 1e-10);
        EXPECT_NEAR(e.norms(0), s_hi, 1e-10);
        // Receive filter applied to H gives the effective rows.
        EXPECT_LT((e.receive * H - e.rows).norm(), 1e-10);
    }
}

TEST(SvdReceive, RankDeficientRejected) {
    CMatrix H(2, 3);
    H << 1, 2, 3, 2, 4, 6;
    EXPECT_THROW(svd_receive_bf(H), InputError);
}

TEST(JointDiag, SingleMatrixExact) {
    std::mt19937_64 eng(5);
    const CMatrix A = random_psd(eng, 3);
    const CMatrix R = joint_diagonalize({A});
    EXPECT_LT(offdiag_ratio(R, A), 1e-10);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(R.row(i).norm(), 1.0, 1e-12);
}

TEST(JointDiag, TwoMatricesExact) {
    std::mt19937_64 eng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix A0 = random_psd(eng, 2), A1 = random_psd(eng, 2);
        const CMatrix R = joint_diagonalize({A0, A1});
        EXPECT_LT(offdiag_ratio(R, A0), 1e-8);
        EXPECT_LT(offdiag_ratio(R, A1), 1e-8);
    }
}

TEST(JointDiag, ThreeMatricesNoWorseThanIdentity) {
    std::mt19937_64 eng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<CMatrix> A = {random_psd(eng, 2), random_psd(eng, 2), random_psd(eng, 2)};
        const CMatrix R = joint_diagonalize(A);
        EXPECT_LE(jd_objective(R, A), jd_objective(CMatrix::Identity(2, 2), A) * (1 + 1e-12));
    }
}

TEST(JointDiag, SharedEigenbasisRecovered) {
    // A_i = U D_i U^H with a common unitary U is exactly diagonalizable.
    std::mt19937_64 eng(8);
    const CMatrix U = Eigen::HouseholderQR<CMatrix>(random_matrix(eng, 3, 3)).householderQ();
    std::vector<CMatrix> A;
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d d(u(eng), u(eng), u(eng));
        A.push_back(U * d.cast<cd>().asDiagonal() * U.adjoint());
    }
    const CMatrix R = joint_diagonalize(A);
    for (const auto& Ai : A) EXPECT_LT(offdiag_ratio(R, Ai), 1e-6);
}

TEST(Zfbf, OrthonormalRows) {
    std::mt19937_64 eng(9);
    const CMatrix Q = Eigen::HouseholderQR<CMatrix>(random_matrix(eng, 4, 4)).householderQ();
    const CMatrix H = Q.topRows(2);
    const double noise = 2.5;
    const ZfbfResult r = zfbf_phase1(H, noise);
    EXPECT_LT((r.T - H.adjoint()).norm(), 1e-12);
    for (int c = 0; c < 2; ++c) {
        EXPECT_NEAR(r.w(c), 1.0, 1e-12);
        EXPECT_NEAR(r.cnr(c), 1.0 / noise, 1e-12);
    }
}

TEST(Zfbf, RightInverseAndNormalization) {
    std::mt19937_64 eng(10);
    for (int trial = 0; trial < 50; ++trial) {
        const CMatrix H = random_matrix(eng, 2, 4);
        const ZfbfResult r = zfbf_phase1(H, 1e-3);
        EXPECT_LT((H * r.T - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-9);
        for (int c = 0; c < 2; ++c) {
            EXPECT_NEAR((r.T.col(c) * r.w(c)).norm(), 1.0, 1e-12);
            EXPECT_DOUBLE_EQ(r.cnr(c) * 1e-3, r.w(c) * r.w(c));
        }
    }
}

TEST(Zfbf, SquareIsInverse) {
    std::mt19937_64 eng(11);
    const CMatrix H = random_matrix(eng, 4, 4);
    const ZfbfResult r = zfbf_phase1(H, 1.0);
    EXPECT_LT((r.T - H.inverse()).norm(), 1e-8 * H.inverse().norm());
}

TEST(Zfbf, IllConditionedAndOversized) {
    CMatrix H(2, 4);
    H << 1, 0, 0, 0, 1, 1e-9, 0, 0;
    EXPECT_THROW(zfbf_phase1(H, 1.0), InfeasibleGroupError);
    std::mt19937_64 eng(12);
    EXPECT_THROW(zfbf_phase1(random_matrix(eng, 5, 4), 1.0), InfeasibleGroupError);
}

TEST(ZfbfPhase2, SingleTransmitterMatchesPhase1) {
    std::mt19937_64 eng(13);
    const CMatrix H = random_matrix(eng, 3, 4);
    const auto r2 = zfbf_phase2({Phase2Stack{0, H, 3, 4}}, 0.5);
    const ZfbfResult r1 = zfbf_phase1(H, 0.5);
    ASSERT_EQ(r2.size(), 1u);
    EXPECT_EQ(r2[0].T, r1.T);
    EXPECT_EQ(r2[0].cnr, r1.cnr);
}

TEST(ZfbfPhase2, AuxiliaryRowsNullCrossInterference) {
    std::mt19937_64 eng(14);
    for (int trial = 0; trial < 20; ++trial) {
        // BS serves a (victim of the RN), RN serves b (victim of the BS).
        const CRow a_bs = random_matrix(eng, 1, 4), b_bs = random_matrix(eng, 1, 4);
        const CRow a_rn = random_matrix(eng, 1, 4), b_rn = random_matrix(eng, 1, 4);
        CMatrix bs(2, 4), rn(2, 4);
        bs << a_bs, b_bs;
        rn << b_rn, a_rn;
        const auto r = zfbf_phase2({Phase2Stack{0, bs, 1, 4}, Phase2Stack{1, rn, 1, 4}}, 1.0);
        ASSERT_EQ(r.size(), 2u);
        EXPECT_EQ(r[0].cnr.size(), 1);
        EXPECT_EQ(r[1].cnr.size(), 1);
        EXPECT_LT(std::abs((b_bs * r[0].T.col(0))(0)), 1e-9);
        EXPECT_LT(std::abs((a_rn * r[1].T.col(0))(0)), 1e-9);
        EXPECT_NEAR(std::abs((a_bs * r[0].T.col(0))(0)), 1.0, 1e-9);
    }
}

TEST(ZfbfPhase2, TooManyRows) {
    std::mt19937_64 eng(15);
    EXPECT_THROW(zfbf_phase2({Phase2Stack{1, random_matrix(eng, 3, 4), 2, 2}}, 1.0), InfeasibleGroupError);
}
