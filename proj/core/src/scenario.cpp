#include "relaynet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "relaynet/rng.hpp"

namespace relaynet {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

ChannelSet::ChannelSet(int N, int M, int K)
    : N_(N), M_(M), K_(K), bu_(static_cast<std::size_t>(N * K)), br_(static_cast<std::size_t>(N * M)),
      ru_(static_cast<std::size_t>(N * M * K)) {}

double path_loss_db(double distance_m, LinkKind kind, const ScenarioConfig& cfg) {
    if (!(distance_m > 0.0)) throw InputError("path loss needs a positive distance");
    const double dkm = distance_m / 1000.0;
    if (kind == LinkKind::BsRn) return cfg.los_a + cfg.los_b * std::log10(dkm);
    return cfg.nlos_a + cfg.nlos_b * std::log10(dkm);
}

double path_loss_db(double distance_m, LinkKind kind) { return path_loss_db(distance_m, kind, ScenarioConfig{}); }

Topology generate_topology(const ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Topology t;
    const double ring = cfg.D_r * cfg.cell_radius;
    for (int m = 0; m < cfg.M; ++m) {
        const double phi = 2.0 * std::numbers::pi * m / cfg.M;
        t.rn_positions.push_back({ring * std::cos(phi), ring * std::sin(phi)});
    }
    Engine eng(derive_seed(seed, kTopology));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    // Area-uniform over the annulus [ue_min_distance, cell_radius].
    const double r0 = cfg.ue_min_distance / cfg.cell_radius;
    for (int k = 0; k < cfg.K; ++k) {
        const double u = u01(eng);
        const double r = cfg.cell_radius * std::sqrt(r0 * r0 + (1.0 - r0 * r0) * u);
        const double phi = 2.0 * std::numbers::pi * u01(eng);
        t.ue_positions.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return t;
}

bool full_row_rank(const CMatrix& H) {
    if (H.rows() == 0 || H.cols() == 0) return false;
    Eigen::JacobiSVD<CMatrix> svd(H);
    const auto& s = svd.singularValues();
    const Eigen::Index need = std::min(H.rows(), H.cols());
    if (s.size() < need || s(0) <= 0.0) return false;
    for (Eigen::Index i = 0; i < need; ++i)
        if (!(s(i) > 1e-9 * s(0))) return false;
    return true;
}

namespace {

CMatrix draw(Engine& eng, int rows, int cols, double scale) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    for (;;) {
        CMatrix H(rows, cols);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) H(r, c) = scale * cd(g(eng), g(eng));
        if (full_row_rank(H)) return H;
    }
}

double amplitude(double pl_db) { return std::pow(10.0, -pl_db / 20.0); }

// The guard distance also bounds RN-UE links so a UE dropped next to a relay
// does not get an unbounded gain.
double link_distance(const Point& a, const Point& b, const ScenarioConfig& cfg) {
    return std::max(distance(a, b), std::max(cfg.ue_min_distance, 1.0));
}

} // namespace

ChannelSet sample_channels(const ScenarioConfig& cfg, const Topology& topo, std::uint64_t seed) {
    const int N = cfg.N, M = static_cast<int>(topo.rn_positions.size()), K = static_cast<int>(topo.ue_positions.size());
    ChannelSet cs(N, M, K);
    std::vector<double> a_bu(K), a_br(M), a_ru(static_cast<std::size_t>(M * K));
    for (int k = 0; k < K; ++k)
        a_bu[k] = amplitude(path_loss_db(link_distance(topo.bs_position, topo.ue_positions[k], cfg), LinkKind::BsUe, cfg));
    for (int m = 0; m < M; ++m) {
        a_br[m] = amplitude(path_loss_db(distance(topo.bs_position, topo.rn_positions[m]), LinkKind::BsRn, cfg));
        for (int k = 0; k < K; ++k)
            a_ru[m * K + k] =
                amplitude(path_loss_db(link_distance(topo.rn_positions[m], topo.ue_positions[k], cfg), LinkKind::RnUe, cfg));
    }
    // Separate streams per family keep H_BU identical when only M changes.
    Engine e_bu(derive_seed(seed, kChannelBU));
    Engine e_br(derive_seed(seed, kChannelBR));
    Engine e_ru(derive_seed(seed, kChannelRU));
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) cs.bu(n, k) = draw(e_bu, cfg.N_U, cfg.N_B, a_bu[k]);
        for (int m = 0; m < M; ++m) cs.br(n, m) = draw(e_br, cfg.N_R, cfg.N_B, a_br[m]);
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k) cs.ru(n, m, k) = draw(e_ru, cfg.N_U, cfg.N_R, a_ru[m * K + k]);
    }
    return cs;
}

} // namespace relaynet
