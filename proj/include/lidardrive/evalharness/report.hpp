#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "lidardrive/evalharness/offline.hpp"
#include "lidardrive/evalharness/online.hpp"

namespace lidardrive::evalharness {

/// Mean and sample standard deviation (n - 1; zero for fewer than two values).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(const std::vector<double>& values);

/// condition,model,mae_wp,mae_st,mae_th,tm,tm_std after a '#' comment line.
void write_offline_csv(std::ostream& os, const std::vector<OfflineRow>& rows);
void write_offline_csv(const std::filesystem::path& path, const std::vector<OfflineRow>& rows);

/// condition,model,interventions,interventions_std,time_s,time_s_std after a '#' comment line.
void write_online_csv(std::ostream& os, const std::vector<OnlineRow>& rows);
void write_online_csv(const std::filesystem::path& path, const std::vector<OnlineRow>& rows);

/// Per-episode detail: scene,route,condition,repeat,interventions,time_s,collisions,completed,duration_s.
void write_episode_csv(const std::filesystem::path& path, const std::vector<EpisodeScore>& episodes);

}  // namespace lidardrive::evalharness
