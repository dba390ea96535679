#include "lidardrive/evalharness/cli.hpp"

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "lidardrive/evalharness/app_config.hpp"
#include "lidardrive/evalharness/offline.hpp"
#include "lidardrive/evalharness/online.hpp"
#include "lidardrive/evalharness/report.hpp"
#include "lidardrive/projection/render.hpp"
#include "lidardrive/simworld/scene_io.hpp"

namespace lidardrive::evalharness {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
};

AppConfig load_config(const Globals& g) {
  AppConfig c = g.config.empty() ? AppConfig{} : AppConfig::load(g.config);
  if (g.seed) {
    c.train.config.seed = *g.seed;
    c.train.model_seed = *g.seed;
  }
  return c;
}

std::vector<fs::path> collect_logs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      auto found = trainer::find_logs(in);
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      out.emplace_back(in);
    } else {
      throw std::runtime_error("no such log file or directory: " + in);
    }
  }
  if (out.empty()) throw std::runtime_error("no .dpl logs found");
  return out;
}

std::vector<simworld::World> load_scenes(const std::vector<std::string>& paths) {
  std::vector<simworld::World> worlds;
  for (const auto& p : paths) worlds.push_back(simworld::load_scene(p));
  return worlds;
}

std::vector<simworld::Condition> parse_conditions(const std::vector<std::string>& names) {
  std::vector<simworld::Condition> out;
  for (const auto& n : names) out.push_back(simworld::parse_condition(n));
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LiDAR driving policy: data generation, training and evaluation", "lidardrive"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config with sections model/train/controller/lidar/sim/eval")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for data generation, weight init, shuffling and episodes");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Run the scripted expert over scenes and write episode logs");
  std::vector<std::string> gen_scenes, gen_conditions;
  std::optional<int> gen_repeats;
  gen->add_option("--scene", gen_scenes, "Scene JSON file(s)")->required()->check(CLI::ExistingFile);
  gen->add_option("--conditions", gen_conditions, "Traffic conditions (light, moderate, dense)")->delimiter(',');
  gen->add_option("--repeats", gen_repeats, "Episodes per route and condition");

  // train
  auto* tr = app.add_subcommand("train", "Train a model on episode logs");
  std::vector<std::string> tr_logs;
  std::optional<int> tr_epochs, tr_stride;
  std::string tr_variant = "both", tr_name = "model";
  tr->add_option("--logs", tr_logs, "Log files or directories")->required();
  tr->add_option("--epochs", tr_epochs, "Maximum epochs");
  tr->add_option("--stride", tr_stride, "Keep every n-th log sample");
  tr->add_option("--variant", tr_variant, "Input views: both, front or bev")
      ->check(CLI::IsMember({"both", "front", "bev"}));
  tr->add_option("--name", tr_name, "Checkpoint base name");

  // eval-offline
  auto* off = app.add_subcommand("eval-offline", "Score predictions against logged expert driving");
  std::vector<std::string> off_logs, off_ckpts;
  bool off_oracle = false, off_zero = false, off_logged = false, off_skip = false;
  std::optional<int> off_stride;
  off->add_option("--logs", off_logs, "Log files or directories")->required();
  off->add_option("--checkpoint", off_ckpts, "Checkpoint(s) to evaluate")->check(CLI::ExistingFile);
  off->add_flag("--oracle", off_oracle, "Include the label-echo predictor");
  off->add_flag("--zero", off_zero, "Include the all-zero predictor");
  off->add_flag("--logged-commands", off_logged, "Use logged commands instead of re-deriving them");
  off->add_flag("--skip-corrupt", off_skip, "Skip unreadable logs with a warning instead of aborting");
  off->add_option("--stride", off_stride, "Keep every n-th log sample");

  // drive
  auto* drv = app.add_subcommand("drive", "Closed-loop driving with the safety monitor");
  std::string drv_ckpt;
  std::vector<std::string> drv_scenes, drv_conditions;
  bool drv_expert = false, drv_no_monitor = false, drv_no_replay = false;
  std::optional<std::size_t> drv_route;
  std::optional<int> drv_repeats;
  drv->add_option("--checkpoint", drv_ckpt, "Checkpoint to drive with")->check(CLI::ExistingFile);
  drv->add_flag("--expert", drv_expert, "Let the scripted expert drive");
  drv->add_option("--scene", drv_scenes, "Scene JSON file(s)")->required()->check(CLI::ExistingFile);
  drv->add_option("--route", drv_route, "Only this route index");
  drv->add_option("--conditions", drv_conditions, "Traffic conditions")->delimiter(',');
  drv->add_option("--repeats", drv_repeats, "Repeats per route and condition");
  drv->add_flag("--no-interventions", drv_no_monitor, "Disable the safety monitor");
  drv->add_flag("--no-replay", drv_no_replay, "Do not write episode replay logs");

  // project
  auto* prj = app.add_subcommand("project", "Dump the front and BEV grids of one log sample");
  std::string prj_log;
  std::size_t prj_sample = 0;
  prj->add_option("--log", prj_log, "Episode log")->required()->check(CLI::ExistingFile);
  prj->add_option("--sample", prj_sample, "Sample index")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 prints help and errors to the given streams.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    const AppConfig cfg = load_config(g);
    const fs::path out_dir = g.out_dir;
    fs::create_directories(out_dir);
    const std::uint64_t seed = g.seed.value_or(1);

    if (*gen) {
      const auto worlds = load_scenes(gen_scenes);
      const auto conditions = gen_conditions.empty() ? cfg.sim.conditions : parse_conditions(gen_conditions);
      const auto logs = simworld::generate_dataset(worlds, conditions, gen_repeats.value_or(cfg.sim.repeats),
                                                   seed, out_dir / "logs", cfg.sim.config);
      out << "wrote " << logs.size() << " logs to " << (out_dir / "logs").string() << "\n";
      return 0;
    }

    if (*tr) {
      const auto logs = collect_logs(tr_logs);
      const auto split = trainer::split_logs(logs, cfg.train.val_fraction, cfg.train.config.seed);
      if (split.val.empty()) throw std::runtime_error("training needs at least two logs (one for validation)");
      trainer::DatasetConfig dc;
      dc.stride = tr_stride.value_or(cfg.train.stride);
      const auto train_set = trainer::load_dataset(split.train, dc);
      const auto val_set = trainer::load_dataset(split.val, dc);
      model::ModelConfig mc = cfg.model;
      mc.use_front = tr_variant != "bev";
      mc.use_bev = tr_variant != "front";
      model::Network net(mc, cfg.train.model_seed);
      trainer::TrainConfig tc = cfg.train.config;
      if (tr_epochs) tc.max_epochs = *tr_epochs;
      tc.out_dir = out_dir;
      tc.run_name = tr_name;
      tc.verbose = true;
      out << "training on " << train_set.samples.size() << " samples from " << split.train.size()
          << " logs, validating on " << val_set.samples.size() << " from " << split.val.size() << "\n";
      const auto res = trainer::train(net, train_set.samples, val_set.samples, tc);
      out << "best epoch " << res.best_epoch << " of " << res.curve.size() << ", validation loss "
          << res.best_val_loss << "; checkpoint " << res.checkpoint.string() << "\n";
      return 0;
    }

    if (*off) {
      if (off_ckpts.empty() && !off_oracle && !off_zero) {
        throw CLI::ValidationError("eval-offline", "give --checkpoint, --oracle or --zero");
      }
      OfflineOptions oo;
      oo.dataset.stride = off_stride.value_or(cfg.eval.stride);
      oo.dataset.logged_commands = off_logged || cfg.eval.logged_commands;
      oo.skip_corrupt = off_skip || cfg.eval.skip_corrupt;
      const auto loaded = load_eval_logs(collect_logs(off_logs), oo);
      for (const auto& w : loaded.warnings) err << "warning: " << w << "\n";
      std::vector<OfflineRow> rows;
      auto run = [&](Predictor& p) {
        const auto rep = offline_eval(p, loaded.logs);
        for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
        rows.insert(rows.end(), rep.rows.begin(), rep.rows.end());
      };
      for (const auto& ck : off_ckpts) {
        auto lm = model::load_model(ck);
        ModelPredictor p(*lm.network, fs::path(ck).stem().string());
        run(p);
      }
      if (off_oracle) {
        OraclePredictor p;
        run(p);
      }
      if (off_zero) {
        ConstantPredictor p;
        run(p);
      }
      write_offline_csv(out_dir / "offline.csv", rows);
      write_offline_csv(out, rows);
      return 0;
    }

    if (*drv) {
      if (drv_ckpt.empty() == !drv_expert) {
        throw CLI::ValidationError("drive", "give exactly one of --checkpoint or --expert");
      }
      const auto worlds = load_scenes(drv_scenes);
      OnlineOptions oo;
      oo.conditions = drv_conditions.empty() ? cfg.eval.conditions : parse_conditions(drv_conditions);
      oo.repeats = drv_repeats.value_or(cfg.eval.repeats);
      oo.seed = seed;
      oo.route = drv_route;
      oo.interventions = cfg.eval.interventions && !drv_no_monitor;
      if (!drv_no_replay) oo.replay_dir = out_dir / "replay";
      OnlineReport rep;
      if (drv_expert) {
        rep = online_eval(nullptr, "expert", worlds, cfg.sim.config, oo);
      } else {
        auto lm = model::load_model(drv_ckpt);
        ModelAgent agent(*lm.network, cfg.controller, lm.loss_weights);
        rep = online_eval(&agent, fs::path(drv_ckpt).stem().string(), worlds, cfg.sim.config, oo);
      }
      write_online_csv(out_dir / "online.csv", rep.rows);
      write_episode_csv(out_dir / "episodes.csv", rep.episodes);
      write_online_csv(out, rep.rows);
      return 0;
    }

    if (*prj) {
      const auto log = simworld::read_log(prj_log);
      if (prj_sample >= log.samples.size()) {
        throw std::out_of_range("sample " + std::to_string(prj_sample) + " outside log of " +
                                std::to_string(log.samples.size()) + " samples");
      }
      const auto& s = log.samples[prj_sample];
      const projection::LabeledPointCloud cloud{s.points, s.timestamp};
      const std::string stem = fs::path(prj_log).stem().string() + "_" + std::to_string(prj_sample);
      for (const auto& gc : {projection::GridConfig::front(), projection::GridConfig::bev()}) {
        const auto grid = projection::project(cloud, gc);
        const std::string view = gc.mode == projection::GridMode::kFront ? "front" : "bev";
        const fs::path base = out_dir / (stem + "_" + view);
        projection::write_grid_dump(fs::path(base.string() + ".grid"), grid);
        projection::write_png(fs::path(base.string() + ".png"), projection::render_grid(grid));
        projection::write_pgm(fs::path(base.string() + "_depth.pgm"), grid, projection::kDepthChannel);
        out << view << ": " << grid.cells().size() << " occupied cells -> " << base.string() << ".{grid,png}\n";
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace lidardrive::evalharness
