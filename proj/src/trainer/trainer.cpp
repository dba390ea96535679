#include "lidardrive/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace lidardrive::trainer {

namespace tg = tensorgrad;
using nlohmann::json;

TaskLosses evaluate_split(model::Network& net, const std::vector<Sample>& samples) {
  TaskLosses acc;
  if (samples.empty()) return acc;
  for (const Sample& s : samples) {
    const TaskLosses l = task_losses(net.predict(s.input), s.target);
    acc.waypoint += l.waypoint;
    acc.steering += l.steering;
    acc.throttle += l.throttle;
  }
  const double n = static_cast<double>(samples.size());
  acc.waypoint /= n;
  acc.steering /= n;
  acc.throttle /= n;
  return acc;
}

namespace {

/// Per-task gradient of one sample on the shared parameters, added into
/// `sums` (one flat vector per task). Leaves the tape's gradients cleared.
void accumulate_task_gradients(tg::Tape& t, const model::ForwardTrace& trace, const LossVars& lv,
                               const std::vector<tg::Parameter*>& shared,
                               std::array<std::vector<double>, 3>& sums) {
  const std::array<tg::Var, 3> task{lv.waypoint, lv.steering, lv.throttle};
  for (std::size_t k = 0; k < 3; ++k) {
    t.zero_grad();
    t.backward(task[k], 1.0, trace.shared_layer_node);
    std::size_t offset = 0;
    for (tg::Parameter* p : shared) {
      const tg::Tensor* g = t.grad(t.param(*p));
      const std::size_t n = p->value.size();
      if (sums[k].size() < offset + n) sums[k].resize(offset + n, 0.0);
      if (g != nullptr) {
        for (std::size_t i = 0; i < n; ++i) sums[k][offset + i] += (*g)[i];
      }
      offset += n;
    }
  }
  t.zero_grad();
}

std::array<double, 3> norms_of_mean(const std::array<std::vector<double>, 3>& sums, std::size_t count) {
  std::array<double, 3> out{};
  for (std::size_t k = 0; k < 3; ++k) {
    double sq = 0.0;
    for (double v : sums[k]) sq += v * v;
    out[k] = std::sqrt(sq) / static_cast<double>(count);
  }
  return out;
}

json losses_json(const TaskLosses& l) {
  return {{"waypoint", l.waypoint}, {"steering", l.steering}, {"throttle", l.throttle}, {"sum", l.sum()}};
}

void write_nan_dump(const std::filesystem::path& path, int epoch, std::size_t batch_index,
                    const std::vector<const Sample*>& batch, const std::vector<TaskLosses>& losses,
                    const LossWeights& alpha, double lr) {
  json samples = json::array();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Sample& s = *batch[i];
    json j = {{"log_index", s.log_index},
              {"sample_index", s.sample_index},
              {"command", s.input.command},
              {"rp1", {s.input.rp1.x, s.input.rp1.y}},
              {"rp2", {s.input.rp2.x, s.input.rp2.y}},
              {"omega", {s.input.omega_left, s.input.omega_right}},
              {"front_cells", s.input.front.cells().size()},
              {"bev_cells", s.input.bev.cells().size()},
              {"target",
               {{"waypoints",
                 {s.target.waypoints[0].x, s.target.waypoints[0].y, s.target.waypoints[1].x,
                  s.target.waypoints[1].y, s.target.waypoints[2].x, s.target.waypoints[2].y}},
                {"steering", s.target.steering},
                {"throttle", s.target.throttle}}}};
    if (i < losses.size()) {
      // NaN is not valid JSON; store the text form.
      auto text = [](double v) { return std::isfinite(v) ? json(v) : json(std::to_string(v)); };
      j["losses"] = {{"waypoint", text(losses[i].waypoint)},
                     {"steering", text(losses[i].steering)},
                     {"throttle", text(losses[i].throttle)}};
    }
    samples.push_back(std::move(j));
  }
  json dump = {{"epoch", epoch}, {"batch", batch_index}, {"lr", lr},
               {"alpha", alpha}, {"samples", samples}};
  std::ofstream(path) << dump.dump(1) << "\n";
}

}  // namespace

std::array<double, 3> shared_gradient_norms(model::Network& net, const std::vector<const Sample*>& batch) {
  if (batch.empty()) throw std::invalid_argument("shared_gradient_norms: empty batch");
  const auto shared = net.shared_parameters();
  std::array<std::vector<double>, 3> sums;
  for (const Sample* s : batch) {
    tg::Tape t;
    const auto trace = net.forward(t, s->input);
    const LossVars lv = mtl_loss(t, trace, s->target, {1.0, 1.0, 1.0});
    accumulate_task_gradients(t, trace, lv, shared, sums);
  }
  return norms_of_mean(sums, batch.size());
}

TrainResult train(model::Network& net, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& cfg) {
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (val_set.empty()) throw std::invalid_argument("train: empty validation set");
  if (cfg.batch_size < 1 || cfg.max_epochs < 1 || !(cfg.lr > 0.0) || cfg.weight_decay < 0.0) {
    throw std::invalid_argument("train: batch size, epochs and lr must be positive");
  }
  for (double a : cfg.initial_alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("train: initial loss weights must be positive");
  }

  std::filesystem::create_directories(cfg.out_dir);
  TrainResult result;
  result.checkpoint = cfg.out_dir / (cfg.run_name + ".ckpt");
  result.run_log = cfg.out_dir / (cfg.run_name + ".jsonl");
  result.curve_csv = cfg.out_dir / (cfg.run_name + "_curve.csv");
  std::ofstream run_log(result.run_log, std::ios::trunc);
  if (!run_log) throw std::runtime_error("train: cannot open " + result.run_log.string());

  run_log << json{{"event", "start"},
                  {"train_samples", train_set.size()},
                  {"val_samples", val_set.size()},
                  {"batch_size", cfg.batch_size},
                  {"lr", cfg.lr},
                  {"weight_decay", cfg.weight_decay},
                  {"plateau", {{"factor", cfg.plateau.factor},
                               {"patience", cfg.plateau.patience},
                               {"stop_patience", cfg.plateau.stop_patience}}},
                  {"mgn", {{"enabled", cfg.mgn.enabled},
                           {"exponent", cfg.mgn.exponent},
                           {"smoothing", cfg.mgn.smoothing}}},
                  {"max_epochs", cfg.max_epochs},
                  {"seed", cfg.seed},
                  {"model", json::parse(net.config().to_json())}}
                  .dump()
           << "\n" << std::flush;

  tg::AdamWConfig opt_cfg;
  opt_cfg.weight_decay = cfg.weight_decay;
  tg::AdamWState opt_state;
  MgnState mgn_state;
  PlateauSchedule schedule(cfg.lr, cfg.plateau);
  LossWeights alpha = cfg.initial_alpha;
  std::mt19937_64 rng(cfg.seed);
  const auto shared = net.shared_parameters();
  std::vector<tg::Tensor> best_values;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);
  net.params().zero_grads();

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = schedule.lr();
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    run_log << json{{"event", "shuffle"}, {"epoch", epoch}, {"permutation", order}}.dump() << "\n";

    TaskLosses train_sum;
    double weighted_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + batch_size);
      std::vector<const Sample*> batch;
      for (std::size_t i = begin; i < end; ++i) batch.push_back(&train_set[order[i]]);
      const double scale = 1.0 / static_cast<double>(batch.size());

      std::array<std::vector<double>, 3> task_sums;
      std::vector<TaskLosses> batch_losses;
      for (const Sample* s : batch) {
        tg::Tape t;
        const auto trace = net.forward(t, s->input);
        const LossVars lv = mtl_loss(t, trace, s->target, alpha);
        const TaskLosses l{t.value(lv.waypoint).item(), t.value(lv.steering).item(),
                           t.value(lv.throttle).item()};
        batch_losses.push_back(l);
        const double total = t.value(lv.total).item();
        if (!std::isfinite(total)) {
          const auto dump = cfg.out_dir / (cfg.run_name + "_nan_dump.json");
          write_nan_dump(dump, epoch, batch_index, batch, batch_losses, alpha, lr);
          run_log << json{{"event", "abort"}, {"epoch", epoch}, {"batch", batch_index},
                          {"dump", dump.string()}}.dump() << "\n";
          throw TrainingError("non-finite training loss in epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(batch_index) + "; see " + dump.string());
        }
        if (cfg.mgn.enabled) accumulate_task_gradients(t, trace, lv, shared, task_sums);
        t.backward(lv.total);
        t.flush_param_grads(scale);

        train_sum.waypoint += l.waypoint;
        train_sum.steering += l.steering;
        train_sum.throttle += l.throttle;
        weighted_sum += total;
      }
      tg::adamw_step(net.params(), opt_state, lr, opt_cfg);
      net.params().zero_grads();
      if (cfg.mgn.enabled) alpha = mgn_update(mgn_state, norms_of_mean(task_sums, batch.size()), alpha, cfg.mgn);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.alpha = alpha;
    const double n = static_cast<double>(train_set.size());
    rec.train = {train_sum.waypoint / n, train_sum.steering / n, train_sum.throttle / n};
    rec.train_loss = weighted_sum / n;
    rec.val = evaluate_split(net, val_set);
    // Scored at the starting weights: the adaptive alpha would otherwise move
    // the criterion even when the predictions do not change.
    rec.val_loss = rec.val.weighted(cfg.initial_alpha);
    const auto decision = schedule.observe(rec.val_loss);
    rec.improved = decision.improved;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rec.improved) {
      best_values.clear();
      for (std::size_t i = 0; i < net.params().size(); ++i) best_values.push_back(net.params()[i].value);
      model::save_model(result.checkpoint, net, alpha);
      result.best_epoch = epoch;
      result.best_val_loss = rec.val_loss;
      result.best_alpha = alpha;
    }
    result.curve.push_back(rec);

    run_log << json{{"event", "epoch"},
                    {"epoch", epoch},
                    {"lr", lr},
                    {"alpha", alpha},
                    {"train", losses_json(rec.train)},
                    {"train_loss", rec.train_loss},
                    {"val", losses_json(rec.val)},
                    {"val_loss", rec.val_loss},
                    {"improved", rec.improved},
                    {"next_lr", schedule.lr()},
                    {"seconds", rec.seconds}}
                   .dump()
            << "\n" << std::flush;
    if (cfg.verbose) {
      std::cerr << std::fixed << std::setprecision(4) << "epoch " << epoch << " lr " << std::scientific
                << lr << std::fixed << " train " << rec.train_loss << " (wp " << rec.train.waypoint
                << " st " << rec.train.steering << " th " << rec.train.throttle << ") val "
                << rec.val_loss << " (wp " << rec.val.waypoint << " st " << rec.val.steering << " th "
                << rec.val.throttle << ") alpha " << alpha[0] << "/" << alpha[1] << "/" << alpha[2]
                << (rec.improved ? " *" : "") << " " << std::setprecision(1) << rec.seconds << "s\n";
    }
    if (decision.stop) {
      result.early_stopped = true;
      break;
    }
  }
  result.final_alpha = alpha;

  for (std::size_t i = 0; i < best_values.size(); ++i) net.params()[i].value = best_values[i];

  std::ofstream csv(result.curve_csv, std::ios::trunc);
  csv << "epoch,lr,alpha_wp,alpha_st,alpha_th,train_wp,train_st,train_th,train_loss,"
         "val_wp,val_st,val_th,val_loss,improved\n";
  csv << std::setprecision(17);
  for (const auto& r : result.curve) {
    csv << r.epoch << ',' << r.lr << ',' << r.alpha[0] << ',' << r.alpha[1] << ',' << r.alpha[2] << ','
        << r.train.waypoint << ',' << r.train.steering << ',' << r.train.throttle << ','
        << r.train_loss << ',' << r.val.waypoint << ',' << r.val.steering << ',' << r.val.throttle
        << ',' << r.val_loss << ',' << (r.improved ? 1 : 0) << '\n';
  }
  run_log << json{{"event", "end"},
                  {"best_epoch", result.best_epoch},
                  {"best_val_loss", result.best_val_loss},
                  {"best_alpha", result.best_alpha},
                  {"final_alpha", result.final_alpha},
                  {"early_stopped", result.early_stopped},
                  {"epochs", result.curve.size()}}
                 .dump()
          << "\n";
  return result;
}

}  // namespace lidardrive::trainer
