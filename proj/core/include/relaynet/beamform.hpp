#pragma once

#include <stdexcept>
#include <vector>

#include "relaynet/scenario.hpp"

namespace relaynet {

class InfeasibleGroupError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// SVD receive-BF output: rows = S * V^H (one row per nonzero singular value),
/// receive = U^H restricted to the same rows.
struct EffectiveChannel {
    CMatrix rows;
    CMatrix receive;
    Eigen::VectorXd norms;
};

EffectiveChannel svd_receive_bf(const CMatrix& H);

/// Receive-BF R (unit-norm rows) making R * A_i * R^H as diagonal as possible.
/// One matrix: eigendecomposition. Two: generalized eigenproblem (exact).
/// More, or a singular second matrix: AC-DC alternating minimization.
CMatrix joint_diagonalize(const std::vector<CMatrix>& A, int max_sweeps = 200, double tol = 1e-10);

/// Sum over i of ||A_i - R^-1 diag(R A_i R^H) R^-H||_F^2.
double jd_objective(const CMatrix& R, const std::vector<CMatrix>& A);

/// ||offdiag(R A R^H)||_F / ||R A R^H||_F.
double offdiag_ratio(const CMatrix& R, const CMatrix& A);

struct ZfbfResult {
    CMatrix T;            // right inverse, before normalization
    Eigen::VectorXd w;    // 1 / column norms of T
    Eigen::VectorXd cnr;  // |w|^2 / noise, served rows only
    double condition = 1; // condition number of H H^H
};

/// T = H^H (H H^H)^-1. Throws InfeasibleGroupError above cond_max.
/// noise = delta_gamma * N0 * W.
ZfbfResult zfbf_phase1(const CMatrix& H, double noise, double cond_max = 1e8);

/// One transmitter's stacked matrix: the first `served` rows carry data, the
/// rest are auxiliary rows that only receive nulls.
struct Phase2Stack {
    int transmitter = 0;
    CMatrix rows;
    int served = 0;
    int antennas = 0;
};

std::vector<ZfbfResult> zfbf_phase2(const std::vector<Phase2Stack>& stacks, double noise, double cond_max = 1e8);

} // namespace relaynet
