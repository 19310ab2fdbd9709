#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "relaynet/config.hpp"

namespace relaynet {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CRow = Eigen::RowVectorXcd;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Topology {
    Point bs_position{};
    std::vector<Point> rn_positions;
    std::vector<Point> ue_positions;
};

enum class LinkKind { BsUe, RnUe, BsRn };

/// Channels of one realization. H_BU(n,k) is N_U x N_B, H_BR(n,m) is
/// N_R x N_B, H_RU(n,m,k) is N_U x N_R.
class ChannelSet {
  public:
    ChannelSet() = default;
    ChannelSet(int N, int M, int K);

    int N() const { return N_; }
    int M() const { return M_; }
    int K() const { return K_; }

    CMatrix& bu(int n, int k) { return bu_[static_cast<std::size_t>(n * K_ + k)]; }
    CMatrix& br(int n, int m) { return br_[static_cast<std::size_t>(n * M_ + m)]; }
    CMatrix& ru(int n, int m, int k) { return ru_[static_cast<std::size_t>((n * M_ + m) * K_ + k)]; }
    const CMatrix& bu(int n, int k) const { return bu_[static_cast<std::size_t>(n * K_ + k)]; }
    const CMatrix& br(int n, int m) const { return br_[static_cast<std::size_t>(n * M_ + m)]; }
    const CMatrix& ru(int n, int m, int k) const { return ru_[static_cast<std::size_t>((n * M_ + m) * K_ + k)]; }

    std::size_t count_bu() const { return bu_.size(); }
    std::size_t count_br() const { return br_.size(); }
    std::size_t count_ru() const { return ru_.size(); }

  private:
    int N_ = 0, M_ = 0, K_ = 0;
    std::vector<CMatrix> bu_, br_, ru_;
};

/// Path loss in dB for a distance in meters.
double path_loss_db(double distance_m, LinkKind kind, const ScenarioConfig& cfg);
double path_loss_db(double distance_m, LinkKind kind);

Topology generate_topology(const ScenarioConfig& cfg, std::uint64_t seed);

/// Rank test used for resampling: every singular value above 1e-9 * sigma_max.
bool full_row_rank(const CMatrix& H);

ChannelSet sample_channels(const ScenarioConfig& cfg, const Topology& topo, std::uint64_t seed);

} // namespace relaynet
