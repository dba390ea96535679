#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lidardrive/evalharness/app_config.hpp"
#include "lidardrive/evalharness/cli.hpp"
#include "lidardrive/evalharness/offline.hpp"
#include "lidardrive/evalharness/online.hpp"
#include "lidardrive/evalharness/report.hpp"
#include "lidardrive/simworld/scene_io.hpp"
#include "model_fixtures.hpp"

using namespace lidardrive;
using namespace lidardrive::evalharness;
namespace fs = std::filesystem;

namespace {

const fs::path kScenes = fs::path(LIDARDRIVE_DATA_DIR) / "scenes";

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("lidardrive_eval_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Synthetic logs: labels only matter for offline scoring.
EvalLog synthetic_log(simworld::Condition c, int repeat, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EvalLog log;
  log.meta.condition = c;
  log.meta.repeat = repeat;
  log.path = "synthetic_" + std::to_string(seed) + ".dpl";
  for (int i = 0; i < n; ++i) {
    trainer::Sample s;
    s.target = fixtures::random_target(rng);
    s.sample_index = static_cast<std::size_t>(i);
    log.samples.push_back(s);
  }
  return log;
}

trainer::TaskLosses naive_mae(const model::ModelOutput& p, const std::vector<const trainer::Sample*>& samples) {
  trainer::TaskLosses l;
  for (const auto* s : samples) {
    double wp = 0.0;
    for (int k = 0; k < 3; ++k) {
      wp += std::abs(p.waypoints[k].x - s->target.waypoints[k].x) + std::abs(p.waypoints[k].y - s->target.waypoints[k].y);
    }
    l.waypoint += wp / 6.0;
    l.steering += std::abs(p.steering - s->target.steering);
    l.throttle += std::abs(p.throttle - s->target.throttle);
  }
  const double n = static_cast<double>(samples.size());
  return {l.waypoint / n, l.steering / n, l.throttle / n};
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::vector<const char*> argv{"lidardrive"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(is, l);) lines.push_back(l);
  return lines;
}

}  // namespace

// ---- offline metrics ----

TEST(Offline, OracleScoresZero) {
  std::vector<EvalLog> logs{synthetic_log(simworld::Condition::kLight, 0, 30, 1),
                            synthetic_log(simworld::Condition::kDense, 0, 20, 2)};
  OraclePredictor oracle;
  const auto rep = offline_eval(oracle, logs);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.tm, 0.0);
    EXPECT_EQ(r.model, "oracle");
  }
  EXPECT_EQ(overall_tm(rep), 0.0);
}

TEST(Offline, ZeroModelScoresMeanAbsoluteLabels) {
  std::vector<EvalLog> logs{synthetic_log(simworld::Condition::kModerate, 0, 40, 3)};
  ConstantPredictor zero;
  const auto rep = offline_eval(zero, logs);
  ASSERT_EQ(rep.rows.size(), 1u);
  std::vector<const trainer::Sample*> all;
  for (const auto& s : logs[0].samples) all.push_back(&s);
  const auto want = naive_mae({}, all);
  const auto& r = rep.rows[0];
  EXPECT_NEAR(r.mae_wp, want.waypoint, 1e-12);
  EXPECT_NEAR(r.mae_st, want.steering, 1e-12);
  EXPECT_NEAR(r.mae_th, want.throttle, 1e-12);
  EXPECT_NEAR(r.tm, want.waypoint + want.steering + want.throttle, 1e-12);
  EXPECT_EQ(r.condition, "moderate");
}

TEST(Offline, RepeatsAggregateAndTmIsAdditive) {
  std::vector<EvalLog> logs;
  for (int rep = 0; rep < 3; ++rep) {
    logs.push_back(synthetic_log(simworld::Condition::kLight, rep, 15, 10 + rep));
    logs.push_back(synthetic_log(simworld::Condition::kLight, rep, 9, 20 + rep));
  }
  model::ModelOutput guess;
  guess.waypoints = {{{0, 1}, {0, 2}, {0, 3}}};
  guess.steering = 0.1;
  guess.throttle = 0.6;
  ConstantPredictor p(guess, "guess");
  const auto report = offline_eval(p, logs);
  ASSERT_EQ(report.rows.size(), 1u);
  const auto& row = report.rows[0];
  ASSERT_EQ(row.repeats.size(), 3u);
  std::vector<double> tms;
  for (int rep = 0; rep < 3; ++rep) {
    std::vector<const trainer::Sample*> ss;
    for (const auto& l : logs)
      if (l.meta.repeat == rep)
        for (const auto& s : l.samples) ss.push_back(&s);
    const auto m = naive_mae(guess, ss);
    const auto& rs = row.repeats[rep];
    EXPECT_EQ(rs.samples, 24u);
    EXPECT_NEAR(rs.tm, rs.mae_wp + rs.mae_st + rs.mae_th, 1e-15);
    EXPECT_NEAR(rs.tm, m.sum(), 1e-12);
    tms.push_back(rs.tm);
  }
  const auto ms = mean_std(tms);
  EXPECT_NEAR(row.tm, ms.mean, 1e-12);
  EXPECT_NEAR(row.tm_std, ms.std, 1e-12);
  EXPECT_NEAR(row.tm, row.mae_wp + row.mae_st + row.mae_th, 1e-12);
}

TEST(Offline, BestConstantIsPerCoordinateMedian) {
  auto log = synthetic_log(simworld::Condition::kLight, 0, 41, 4);
  const auto c = fit_constant_predictor(log.samples);
  std::vector<double> st;
  for (const auto& s : log.samples) st.push_back(s.target.steering);
  std::nth_element(st.begin(), st.begin() + 20, st.end());
  EXPECT_EQ(c.value().steering, st[20]);
  // No single-coordinate nudge lowers the error.
  ConstantPredictor best = c;
  const double base = offline_eval(best, {log}).rows[0].tm;
  for (double d : {-0.01, 0.01}) {
    auto v = c.value();
    v.throttle += d;
    ConstantPredictor q(v);
    EXPECT_GE(offline_eval(q, {log}).rows[0].tm, base);
    v = c.value();
    v.waypoints[1].y += d;
    ConstantPredictor r(v);
    EXPECT_GE(offline_eval(r, {log}).rows[0].tm, base);
  }
}

TEST(Report, MeanStdAndCsvLayout) {
  const auto ms = mean_std({1.0, 2.0, 4.0});
  EXPECT_NEAR(ms.mean, 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(ms.std, std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) + (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2.0), 1e-15);
  EXPECT_EQ(mean_std({5.0}).std, 0.0);

  OfflineRow r;
  r.condition = "light";
  r.model = "m";
  r.mae_wp = 0.5;
  r.tm = 0.75;
  std::ostringstream os;
  write_offline_csv(os, {r, r});
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line[0], '#');
  std::getline(is, line);
  EXPECT_EQ(line, "condition,model,mae_wp,mae_st,mae_th,tm,tm_std");
  int rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(line.rfind("light,m,", 0), 0u);
    ++rows;
  }
  EXPECT_EQ(rows, 2);

  OnlineRow o;
  o.condition = "dense";
  o.model = "expert";
  std::ostringstream on;
  write_online_csv(on, {o});
  std::istringstream ion(on.str());
  std::getline(ion, line);
  EXPECT_EQ(line[0], '#');
  std::getline(ion, line);
  EXPECT_EQ(line, "condition,model,interventions,interventions_std,time_s,time_s_std");
}

// ---- config ----

TEST(AppConfig, DefaultsOverridesAndErrors) {
  const auto d = AppConfig::from_json_text("{}");
  EXPECT_EQ(d.train.config.batch_size, 10);
  EXPECT_EQ(d.train.config.lr, 1e-4);
  EXPECT_EQ(d.model.latent_size, 192);

  const auto c = AppConfig::from_json_text(
      R"({"train": {"batch_size": 4, "lr": 0.002, "initial_alpha": [1, 2, 3]},
          "controller": {"lateral": {"kp": 0.05}},
          "eval": {"conditions": ["dense"], "repeats": 2}})");
  EXPECT_EQ(c.train.config.batch_size, 4);
  EXPECT_EQ(c.train.config.lr, 0.002);
  EXPECT_EQ(c.train.config.initial_alpha, (trainer::LossWeights{1, 2, 3}));
  EXPECT_EQ(c.controller.lateral.kp, 0.05);
  EXPECT_EQ(c.controller.lateral.ki, 0.001);
  ASSERT_EQ(c.eval.conditions.size(), 1u);
  EXPECT_EQ(c.eval.conditions[0], simworld::Condition::kDense);

  EXPECT_THROW(AppConfig::from_json_text(R"({"train": {"batch": 4}})"), ConfigError);
  EXPECT_THROW(AppConfig::from_json_text(R"({"trainer": {}})"), ConfigError);
  EXPECT_THROW(AppConfig::from_json_text(R"({"train": {"lr": "fast"}})"), ConfigError);
  EXPECT_THROW(AppConfig::from_json_text("[1, 2"), ConfigError);

  const auto back = AppConfig::from_json_text(c.to_json_text());
  EXPECT_EQ(back.to_json_text(), c.to_json_text());
}

// ---- online ----

TEST(Online, ExpertDrivesTestRouteCleanly) {
  const auto w = simworld::load_scene(kScenes / "campus_c.json");
  OnlineOptions o;
  o.repeats = 2;
  o.route = 1;
  const auto rep = online_eval(nullptr, "expert", {w}, simworld::SimConfig{}, o);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].episodes, 2);
  EXPECT_EQ(rep.rows[0].completed, 2);
  EXPECT_EQ(rep.rows[0].interventions, 0.0);
  EXPECT_EQ(rep.episodes.size(), 2u);
  EXPECT_EQ(mean_interventions(rep), 0.0);
}

TEST(Online, ModelAgentRunsUnderTheMonitor) {
  const auto cfg = fixtures::tiny_config();
  model::Network net(cfg, 5);
  ModelAgent agent(net, controller::ControllerConfig{}, {1, 1, 1},
                   fixtures::grid_for(cfg.front, projection::GridMode::kFront),
                   fixtures::grid_for(cfg.bev, projection::GridMode::kBev));
  const auto w = simworld::load_scene(kScenes / "campus_c.json");
  OnlineOptions o;
  o.repeats = 1;
  o.route = 1;
  o.replay_dir = temp_dir("replay");
  const auto rep = online_eval(&agent, "tiny", {w}, simworld::SimConfig{}, o);
  ASSERT_EQ(rep.episodes.size(), 1u);
  const auto& e = rep.episodes[0];
  EXPECT_EQ(rep.rows[0].interventions, e.interventions);
  EXPECT_GE(e.intervention_time, e.interventions * 1.0);
  EXPECT_FALSE(trainer::find_logs(*o.replay_dir).empty());
  const auto& d = agent.last_decision();
  EXPECT_TRUE(d.command.throttle >= 0.0 && d.command.throttle <= 1.0);
}

// ---- command line ----

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"fly"}), 2);
  EXPECT_EQ(run({"train"}), 2);
  const std::string out_dir = temp_dir("cli_usage").string();
  EXPECT_EQ(run({"--out-dir", out_dir, "eval-offline", "--logs", out_dir}), 2);
  EXPECT_EQ(run({"--out-dir", out_dir, "drive", "--scene", (kScenes / "campus_a.json").string()}), 2);
  std::string out;
  EXPECT_EQ(run({"--help"}, &out), 0);
  EXPECT_NE(out.find("gen-data"), std::string::npos);
}

TEST(Cli, RuntimeErrorsExitOne) {
  const auto dir = temp_dir("cli_err");
  { std::ofstream(dir / "bad.json") << R"({"train": {"nope": 1}})"; }
  std::string err;
  EXPECT_EQ(run({"--config", (dir / "bad.json").string(), "--out-dir", dir.string(), "gen-data", "--scene",
                 (kScenes / "campus_a.json").string()},
                nullptr, &err),
            1);
  EXPECT_NE(err.find("nope"), std::string::npos);
  EXPECT_EQ(run({"--out-dir", dir.string(), "train", "--logs", dir.string()}), 1);
}

TEST(Cli, SmallPipeline) {
  const auto dir = temp_dir("pipeline");
  const std::string out_dir = dir.string();
  std::string out;
  ASSERT_EQ(run({"--out-dir", out_dir, "--seed", "3", "gen-data", "--scene", (kScenes / "campus_c.json").string(),
                 "--conditions", "light", "--repeats", "1"},
                &out),
            0)
      << out;
  const auto logs = trainer::find_logs(dir / "logs");
  ASSERT_EQ(logs.size(), 6u);

  ASSERT_EQ(run({"--out-dir", out_dir, "train", "--logs", (dir / "logs").string(), "--epochs", "1", "--stride", "40",
                 "--name", "smoke"},
                &out),
            0)
      << out;
  ASSERT_TRUE(fs::exists(dir / "smoke.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "smoke_curve.csv"));

  ASSERT_EQ(run({"--out-dir", out_dir, "eval-offline", "--logs", (dir / "logs").string(), "--checkpoint",
                 (dir / "smoke.ckpt").string(), "--oracle", "--zero", "--stride", "20"},
                &out),
            0)
      << out;
  const auto off = csv_lines(dir / "offline.csv");
  ASSERT_EQ(off.size(), 2u + 3u);
  EXPECT_EQ(off[2].rfind("light,smoke,", 0), 0u);
  EXPECT_EQ(off[3].rfind("light,oracle,", 0), 0u);
  EXPECT_NE(off[3].find(",0,"), std::string::npos);

  ASSERT_EQ(run({"--out-dir", out_dir, "project", "--log", logs[0].string(), "--sample", "3"}, &out), 0) << out;
  const std::string stem = logs[0].stem().string() + "_3";
  EXPECT_TRUE(fs::exists(dir / (stem + "_front.png")));
  EXPECT_TRUE(fs::exists(dir / (stem + "_bev.grid")));
  EXPECT_TRUE(fs::exists(dir / (stem + "_bev_depth.pgm")));

  ASSERT_EQ(run({"--out-dir", out_dir, "drive", "--expert", "--scene", (kScenes / "campus_c.json").string(), "--route",
                 "0", "--conditions", "light", "--repeats", "1"},
                &out),
            0)
      << out;
  const auto onl = csv_lines(dir / "online.csv");
  ASSERT_EQ(onl.size(), 3u);
  EXPECT_EQ(onl[2].rfind("light,expert,0,", 0), 0u);
  EXPECT_EQ(csv_lines(dir / "episodes.csv").size(), 2u);
}

TEST(Cli, InstalledBinaryReportsUsage) {
  const char* exe = std::getenv("LIDARDRIVE_CLI");
  if (exe == nullptr) GTEST_SKIP() << "LIDARDRIVE_CLI not set";
  const std::string cmd = std::string("\"") + exe + "\" > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
  const std::string help = std::string("\"") + exe + "\" --help > /dev/null 2>&1";
  EXPECT_EQ(WEXITSTATUS(std::system(help.c_str())), 0);
}
