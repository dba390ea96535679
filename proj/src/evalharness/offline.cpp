#include "lidardrive/evalharness/offline.hpp"

#include <algorithm>
#include <map>

#include "lidardrive/evalharness/report.hpp"
#include "lidardrive/trainer/loss.hpp"

namespace lidardrive::evalharness {

model::ModelOutput OraclePredictor::predict(const trainer::Sample& sample) {
  model::ModelOutput out;
  out.waypoints = sample.target.waypoints;
  out.steering = sample.target.steering;
  out.throttle = sample.target.throttle;
  return out;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

ConstantPredictor fit_constant_predictor(const std::vector<trainer::Sample>& samples, std::string name) {
  std::vector<std::vector<double>> cols(8);
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < 3; ++k) {
      cols[2 * k].push_back(s.target.waypoints[k].x);
      cols[2 * k + 1].push_back(s.target.waypoints[k].y);
    }
    cols[6].push_back(s.target.steering);
    cols[7].push_back(s.target.throttle);
  }
  model::ModelOutput out;
  for (std::size_t k = 0; k < 3; ++k) {
    out.waypoints[k].x = median(cols[2 * k]);
    out.waypoints[k].y = median(cols[2 * k + 1]);
  }
  out.steering = median(cols[6]);
  out.throttle = median(cols[7]);
  return ConstantPredictor(out, std::move(name));
}

LoadedLogs load_eval_logs(const std::vector<std::filesystem::path>& paths, const OfflineOptions& opts) {
  LoadedLogs out;
  for (const auto& path : paths) {
    try {
      simworld::EpisodeLog log = simworld::read_log(path);
      EvalLog e;
      e.path = path;
      e.samples = trainer::samples_from_log(log, opts.dataset, out.logs.size());
      e.meta = std::move(log.meta);
      out.logs.push_back(std::move(e));
    } catch (const simworld::LogError& err) {
      if (!opts.skip_corrupt) throw;
      out.warnings.push_back("skipped " + path.string() + ": " + err.what());
    }
  }
  return out;
}

OfflineReport offline_eval(Predictor& predictor, const std::vector<EvalLog>& logs) {
  struct Acc {
    std::size_t n = 0;
    double wp = 0.0, st = 0.0, th = 0.0;
  };
  std::vector<simworld::Condition> order;
  std::map<std::pair<int, int>, Acc> acc;  // (condition, repeat)
  OfflineReport report;

  for (const EvalLog& log : logs) {
    const simworld::Condition c = log.meta.condition;
    if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
    Acc& a = acc[{static_cast<int>(c), log.meta.repeat}];
    if (log.samples.empty()) report.warnings.push_back(log.path.string() + " holds no samples");
    for (const trainer::Sample& s : log.samples) {
      const trainer::TaskLosses l = trainer::task_losses(predictor.predict(s), s.target);
      a.wp += l.waypoint;
      a.st += l.steering;
      a.th += l.throttle;
      ++a.n;
    }
  }

  for (simworld::Condition c : order) {
    OfflineRow row;
    row.condition = simworld::condition_name(c);
    row.model = predictor.name();
    std::vector<double> wp, st, th, tm;
    for (const auto& [key, a] : acc) {
      if (key.first != static_cast<int>(c) || a.n == 0) continue;
      RepeatScore r;
      r.repeat = key.second;
      r.samples = a.n;
      const double n = static_cast<double>(a.n);
      r.mae_wp = a.wp / n;
      r.mae_st = a.st / n;
      r.mae_th = a.th / n;
      r.tm = r.mae_wp + r.mae_st + r.mae_th;
      wp.push_back(r.mae_wp);
      st.push_back(r.mae_st);
      th.push_back(r.mae_th);
      tm.push_back(r.tm);
      row.repeats.push_back(r);
    }
    row.mae_wp = mean_std(wp).mean;
    row.mae_st = mean_std(st).mean;
    row.mae_th = mean_std(th).mean;
    const MeanStd t = mean_std(tm);
    row.tm = t.mean;
    row.tm_std = t.std;
    report.rows.push_back(std::move(row));
  }
  return report;
}

double overall_tm(const OfflineReport& report) {
  if (report.rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : report.rows) s += r.tm;
  return s / static_cast<double>(report.rows.size());
}

}  // namespace lidardrive::evalharness
