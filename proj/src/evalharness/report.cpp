#include "lidardrive/evalharness/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace lidardrive::evalharness {

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return r;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(10);
  return os;
}

}  // namespace

void write_offline_csv(std::ostream& os, const std::vector<OfflineRow>& rows) {
  os << "# MAE values are means over repeats; tm_std is the standard deviation of TM over repeats\n";
  os << "condition,model,mae_wp,mae_st,mae_th,tm,tm_std\n";
  for (const auto& r : rows) {
    os << r.condition << ',' << r.model << ',' << r.mae_wp << ',' << r.mae_st << ',' << r.mae_th
       << ',' << r.tm << ',' << r.tm_std << '\n';
  }
}

void write_offline_csv(const std::filesystem::path& path, const std::vector<OfflineRow>& rows) {
  auto os = open_out(path);
  write_offline_csv(os, rows);
}

void write_online_csv(std::ostream& os, const std::vector<OnlineRow>& rows) {
  os << "# per-episode means; std over every route x repeat episode of the condition\n";
  os << "condition,model,interventions,interventions_std,time_s,time_s_std\n";
  for (const auto& r : rows) {
    os << r.condition << ',' << r.model << ',' << r.interventions << ',' << r.interventions_std << ','
       << r.time_s << ',' << r.time_s_std << '\n';
  }
}

void write_online_csv(const std::filesystem::path& path, const std::vector<OnlineRow>& rows) {
  auto os = open_out(path);
  write_online_csv(os, rows);
}

void write_episode_csv(const std::filesystem::path& path, const std::vector<EpisodeScore>& episodes) {
  auto os = open_out(path);
  os << "scene,route,condition,repeat,interventions,time_s,collisions,completed,duration_s\n";
  for (const auto& e : episodes) {
    os << e.scene << ',' << e.route << ',' << simworld::condition_name(e.condition) << ',' << e.repeat
       << ',' << e.interventions << ',' << e.intervention_time << ',' << e.collisions << ','
       << (e.completed ? 1 : 0) << ',' << e.duration << '\n';
  }
}

}  // namespace lidardrive::evalharness
