#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace relaynet {

struct RelayGain {
    int rn = 0;
    double g_br = 0; // BS -> RN, phase 1
    double g_ru = 0; // RN -> UE, phase 2
};

/// Effective CNRs of every group on one subcarrier block, stored flat.
class GroupTable {
  public:
    std::size_t size() const { return t1_off_.size() - 1; }
    bool empty() const { return size() == 0; }

    void add(std::span<const double> t1, std::span<const double> t2, std::span<const RelayGain> relay,
             std::vector<std::uint32_t> members = {});

    std::span<const double> t1(std::size_t j) const { return {t1_.data() + t1_off_[j], t1_off_[j + 1] - t1_off_[j]}; }
    std::span<const double> t2(std::size_t j) const { return {t2_.data() + t2_off_[j], t2_off_[j + 1] - t2_off_[j]}; }
    std::span<const RelayGain> relay(std::size_t j) const {
        return {rl_.data() + rl_off_[j], rl_off_[j + 1] - rl_off_[j]};
    }
    const std::vector<std::uint32_t>& members(std::size_t j) const { return members_[j]; }

    std::size_t smc_count(std::size_t j) const { return t1(j).size() + t2(j).size() + relay(j).size(); }

  private:
    std::vector<std::uint32_t> t1_off_{0}, t2_off_{0}, rl_off_{0};
    std::vector<double> t1_, t2_;
    std::vector<RelayGain> rl_;
    std::vector<std::vector<std::uint32_t>> members_;
};

inline void GroupTable::add(std::span<const double> t1, std::span<const double> t2, std::span<const RelayGain> relay,
                            std::vector<std::uint32_t> members) {
    t1_.insert(t1_.end(), t1.begin(), t1.end());
    t2_.insert(t2_.end(), t2.begin(), t2.end());
    rl_.insert(rl_.end(), relay.begin(), relay.end());
    t1_off_.push_back(static_cast<std::uint32_t>(t1_.size()));
    t2_off_.push_back(static_cast<std::uint32_t>(t2_.size()));
    rl_off_.push_back(static_cast<std::uint32_t>(rl_.size()));
    members_.push_back(std::move(members));
}

} // namespace relaynet
