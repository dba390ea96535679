#include "lidardrive/evalharness/online.hpp"

#include <stdexcept>

#include "lidardrive/evalharness/report.hpp"

namespace lidardrive::evalharness {

ModelAgent::ModelAgent(model::Network& net, const controller::ControllerConfig& ctrl,
                       const std::array<double, 3>& loss_weights, projection::GridConfig front,
                       projection::GridConfig bev)
    : net_(net),
      policy_(ctrl, controller::init_control_weights(loss_weights)),
      front_(std::move(front)),
      bev_(std::move(bev)) {}

void ModelAgent::reset() {
  policy_.reset();
  last_ = {};
  last_output_ = {};
}

controller::ControlCommand ModelAgent::act(const simworld::Observation& obs) {
  if (obs.cloud == nullptr) throw std::invalid_argument("ModelAgent: observation without a point cloud");
  model::ObservationInput in;
  in.front = projection::project(*obs.cloud, front_);
  in.bev = projection::project(*obs.cloud, bev_);
  in.rp1 = obs.nav.view.rp1;
  in.rp2 = obs.nav.view.rp2;
  in.omega_left = obs.sensors.omega_left;
  in.omega_right = obs.sensors.omega_right;
  in.command = static_cast<int>(obs.nav.command);
  last_output_ = net_.predict(in);
  last_ = policy_.step(last_output_.waypoints[0], last_output_.waypoints[1], last_output_.steering,
                       last_output_.throttle, in.omega_left, in.omega_right);
  return last_.command;
}

OnlineReport online_eval(simworld::DrivingAgent* agent, const std::string& model_name,
                         const std::vector<simworld::World>& worlds, const simworld::SimConfig& sim,
                         const OnlineOptions& opts) {
  if (opts.repeats < 1) throw std::invalid_argument("online_eval: repeats must be >= 1");
  OnlineReport report;
  simworld::EpisodeOptions eo;
  eo.record = opts.replay_dir.has_value();
  eo.interventions = opts.interventions;
  if (opts.replay_dir) std::filesystem::create_directories(*opts.replay_dir);

  for (const simworld::World& w : worlds) {
    std::vector<std::size_t> routes;
    if (opts.route) {
      if (*opts.route >= w.routes.size()) {
        throw std::out_of_range("online_eval: scene " + w.name + " has no route " + std::to_string(*opts.route));
      }
      routes.push_back(*opts.route);
    } else {
      for (std::size_t r = 0; r < w.routes.size(); ++r) routes.push_back(r);
    }
    for (simworld::Condition c : opts.conditions) {
      for (std::size_t r : routes) {
        for (int rep = 0; rep < opts.repeats; ++rep) {
          const simworld::EpisodeSpec spec{r, c, rep, simworld::episode_seed(opts.seed, w.name, r, c, rep)};
          simworld::EpisodeResult res = simworld::run_episode(w, spec, sim, agent, eo);
          if (opts.replay_dir) {
            simworld::write_log(*opts.replay_dir / simworld::log_file_name(w.name, r, c, rep), res.log);
          }
          report.episodes.push_back({w.name, r, c, rep, res.interventions, res.intervention_time,
                                     res.collisions, res.completed, res.duration});
        }
      }
    }
  }

  for (simworld::Condition c : opts.conditions) {
    OnlineRow row;
    row.condition = simworld::condition_name(c);
    row.model = model_name;
    std::vector<double> counts, times;
    for (const auto& e : report.episodes) {
      if (e.condition != c) continue;
      counts.push_back(e.interventions);
      times.push_back(e.intervention_time);
      ++row.episodes;
      row.completed += e.completed ? 1 : 0;
      row.collisions += e.collisions;
    }
    const MeanStd n = mean_std(counts), t = mean_std(times);
    row.interventions = n.mean;
    row.interventions_std = n.std;
    row.time_s = t.mean;
    row.time_s_std = t.std;
    report.rows.push_back(row);
  }
  return report;
}

double mean_interventions(const OnlineReport& report) {
  if (report.episodes.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : report.episodes) s += e.interventions;
  return s / static_cast<double>(report.episodes.size());
}

}  // namespace lidardrive::evalharness
