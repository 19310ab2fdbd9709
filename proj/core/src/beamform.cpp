#include "relaynet/beamform.hpp"

#include <cmath>
#include <limits>

namespace relaynet {

EffectiveChannel svd_receive_bf(const CMatrix& H) {
    Eigen::JacobiSVD<CMatrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(0) > 0.0)) throw InputError("receive-BF of a zero matrix");
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > 1e-9 * s(0)) ++rank;
    if (rank < std::min(H.rows(), H.cols())) throw InputError("receive-BF needs a full row rank channel");
    EffectiveChannel e;
    e.receive = svd.matrixU().leftCols(rank).adjoint();
    e.rows = s.head(rank).asDiagonal() * svd.matrixV().leftCols(rank).adjoint();
    e.norms = s.head(rank);
    return e;
}

namespace {

CMatrix normalize_rows(CMatrix R) {
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
        const double n = R.row(i).norm();
        if (n > 0) R.row(i) /= n;
    }
    return R;
}

CMatrix eig_route(const CMatrix& A) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(A);
    return es.eigenvectors().adjoint();
}

// X^H A0 X diagonal and X^H A1 X = I; returns R = X^H, or empty if A1 is not
// positive definite enough.
CMatrix pencil_route(const CMatrix& A0, const CMatrix& A1) {
    Eigen::LLT<CMatrix> llt(A1);
    if (llt.info() != Eigen::Success) return {};
    Eigen::SelfAdjointEigenSolver<CMatrix> e1(A1, Eigen::EigenvaluesOnly);
    const auto& ev = e1.eigenvalues();
    if (!(ev(0) > 1e-12 * ev(ev.size() - 1))) return {};
    Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> ges(A0, A1);
    if (ges.info() != Eigen::Success) return {};
    return ges.eigenvectors().adjoint();
}

// AC-DC: alternate the diagonal loads (linear least squares) and one column
// of the mixing matrix B at a time (rank-one fit), for A_i ~ B L_i B^H.
CMatrix acdc(const std::vector<CMatrix>& A, CMatrix B, int max_sweeps, double tol) {
    const Eigen::Index n = B.cols();
    const std::size_t L = A.size();
    Eigen::MatrixXd lam(n, static_cast<Eigen::Index>(L));

    auto fit_loads = [&]() {
        Eigen::MatrixXd G(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b) G(a, b) = std::norm(B.col(a).dot(B.col(b)));
        Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
        for (std::size_t i = 0; i < L; ++i) {
            Eigen::VectorXd c(n);
            for (Eigen::Index a = 0; a < n; ++a) c(a) = B.col(a).dot(A[i] * B.col(a)).real();
            lam.col(static_cast<Eigen::Index>(i)) = ldlt.solve(c);
        }
    };
    auto cost = [&]() {
        double s = 0;
        for (std::size_t i = 0; i < L; ++i) {
            CMatrix model = B * lam.col(static_cast<Eigen::Index>(i)).cast<cd>().asDiagonal() * B.adjoint();
            s += (A[i] - model).squaredNorm();
        }
        return s;
    };

    fit_loads();
    double prev = cost();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (Eigen::Index l = 0; l < n; ++l) {
            CMatrix P = CMatrix::Zero(n, n);
            double w = 0;
            for (std::size_t i = 0; i < L; ++i) {
                const double li = lam(l, static_cast<Eigen::Index>(i));
                if (li == 0.0) continue;
                CMatrix R = A[i];
                for (Eigen::Index j = 0; j < n; ++j)
                    if (j != l) R -= lam(j, static_cast<Eigen::Index>(i)) * B.col(j) * B.col(j).adjoint();
                P += li * R;
                w += li * li;
            }
            if (w <= 0) continue;
            Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (P + P.adjoint()));
            const double rho = es.eigenvalues()(n - 1);
            if (rho <= 0) continue;
            B.col(l) = std::sqrt(rho / w) * es.eigenvectors().col(n - 1);
        }
        fit_loads();
        const double c = cost();
        if (prev - c <= tol * std::max(prev, std::numeric_limits<double>::min())) {
            prev = c;
            break;
        }
        prev = c;
    }
    return B;
}

} // namespace

double jd_objective(const CMatrix& R, const std::vector<CMatrix>& A) {
    Eigen::FullPivLU<CMatrix> lu(R);
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    const CMatrix Ri = lu.inverse();
    double s = 0;
    for (const auto& Ai : A) {
        CMatrix D = (R * Ai * R.adjoint()).diagonal().asDiagonal();
        s += (Ai - Ri * D * Ri.adjoint()).squaredNorm();
    }
    return s;
}

double offdiag_ratio(const CMatrix& R, const CMatrix& A) {
    CMatrix D = R * A * R.adjoint();
    const double total = D.norm();
    if (total == 0) return 0;
    D.diagonal().setZero();
    return D.norm() / total;
}

CMatrix joint_diagonalize(const std::vector<CMatrix>& A, int max_sweeps, double tol) {
    if (A.empty()) throw InputError("joint diagonalization of an empty list");
    const Eigen::Index n = A.front().rows();
    for (const auto& Ai : A)
        if (Ai.rows() != n || Ai.cols() != n) throw InputError("joint diagonalization needs equal square matrices");

    if (A.size() == 1) return normalize_rows(eig_route(A[0]));

    CMatrix exact = pencil_route(A[0], A[1]);
    if (A.size() == 2 && exact.size() != 0) return normalize_rows(exact);

    CMatrix start = exact.size() != 0 ? exact : eig_route(A[0]);
    CMatrix B = acdc(A, start.inverse(), max_sweeps, tol);

    // Keep whichever of {identity, start, optimized} scores best.
    std::vector<CMatrix> options;
    options.push_back(CMatrix::Identity(n, n));
    options.push_back(normalize_rows(start));
    Eigen::FullPivLU<CMatrix> lu(B);
    if (lu.isInvertible()) options.push_back(normalize_rows(lu.inverse()));
    std::size_t best = 0;
    double best_cost = jd_objective(options[0], A);
    for (std::size_t i = 1; i < options.size(); ++i) {
        const double c = jd_objective(options[i], A);
        if (c < best_cost) {
            best_cost = c;
            best = i;
        }
    }
    return options[best];
}

ZfbfResult zfbf_phase1(const CMatrix& H, double noise, double cond_max) {
    if (H.rows() == 0) return {};
    if (H.rows() > H.cols()) throw InfeasibleGroupError("more streams than transmit antennas");
    const CMatrix G = H * H.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(G, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(G.rows() - 1);
    const double cond = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(cond <= cond_max)) throw InfeasibleGroupError("ill-conditioned stream matrix");
    ZfbfResult r;
    r.condition = cond;
    r.T = H.adjoint() * G.llt().solve(CMatrix::Identity(G.rows(), G.cols()));
    r.w.resize(r.T.cols());
    r.cnr.resize(r.T.cols());
    for (Eigen::Index c = 0; c < r.T.cols(); ++c) {
        r.w(c) = 1.0 / r.T.col(c).norm();
        r.cnr(c) = r.w(c) * r.w(c) / noise;
    }
    return r;
}

std::vector<ZfbfResult> zfbf_phase2(const std::vector<Phase2Stack>& stacks, double noise, double cond_max) {
    std::vector<ZfbfResult> out;
    out.reserve(stacks.size());
    for (const auto& s : stacks) {
        if (s.antennas > 0 && s.rows.rows() > s.antennas)
            throw InfeasibleGroupError("transmitter " + std::to_string(s.transmitter) + " exceeds its antennas");
        ZfbfResult r = zfbf_phase1(s.rows, noise, cond_max);
        r.cnr.conservativeResize(s.served);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace relaynet
