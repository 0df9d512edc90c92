#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "forcemap/config.hpp"
#include "forcemap/labelgen.hpp"
#include "forcemap/liftmetrics.hpp"
#include "forcemap/map_io.hpp"
#include "forcemap/pipeline.hpp"
#include "forcemap/planner.hpp"
#include "forcemap/staticscene.hpp"

namespace forcemap::cli {
namespace {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, CommonFlags& flags, bool out_required) {
  app->add_option("--config", flags.config_path, "pipeline config JSON")->check(CLI::ExistingFile);
  app->add_option("--seed", flags.seed, "seed (overrides config)");
  auto* out = app->add_option("--out", flags.out, "output path");
  if (out_required) out->required();
}

PipelineConfig resolve_config(const CommonFlags& flags) {
  PipelineConfig config = flags.config_path.empty() ? PipelineConfig{} : load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  config.validate();
  return config;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

OJson vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

void emit_warnings(const Diagnostics& diagnostics, std::ostream& err) {
  for (const auto& message : diagnostics) err << OJson{{"warning", message}}.dump() << '\n';
}

// gen -------------------------------------------------------------------

struct GenArgs {
  CommonFlags common;
  int count = 1;
};

void cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = resolve_config(args.common);
  if (args.count < 1) throw Error(ErrorKind::InvalidArgument, "--count must be >= 1");
  struct Output {
    fs::path path;
    std::string text;
  };
  std::vector<Output> outputs;
  Diagnostics diagnostics;
  const fs::path dir = args.common.out;
  for (int n = 0; n < args.count; ++n) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(n);
    const StackScene scene = generate_for_seed(seed, config, &diagnostics);
    const ContactFrame frame = solve_static_contacts(scene);
    std::ostringstream contacts;
    write_contacts(std::span<const ContactFrame>(&frame, 1), contacts);
    const std::string stem = std::to_string(seed);
    outputs.push_back({dir / ("scene_" + stem + ".json"), scene_to_json(scene)});
    outputs.push_back({dir / ("contacts_" + stem + ".jsonl"), contacts.str()});
  }
  OJson written = OJson::array();
  for (const auto& o : outputs) {
    write_text(o.path, o.text);
    written.push_back(o.path.string());
  }
  emit_warnings(diagnostics, err);
  out << OJson{{"written", written}}.dump() << '\n';
}

// kde -------------------------------------------------------------------

struct KdeArgs {
  CommonFlags common;
  std::string contacts;
  std::optional<int> window;
};

void cmd_kde(const KdeArgs& args, std::ostream& out, std::ostream& err) {
  PipelineConfig config = resolve_config(args.common);
  if (args.window) config.temporal_window = *args.window;
  config.validate();
  const auto frames = read_contacts_file(args.contacts);
  Diagnostics diagnostics;
  std::vector<ForceMap> maps;
  if (frames.empty()) {
    maps.emplace_back(config.grid);
  } else {
    for (const auto& frame : frames) maps.push_back(kde_voxelize(frame, config.grid, config.kde, &diagnostics));
    if (config.temporal_window > 1) maps = temporal_average(maps, config.temporal_window);
  }

  const fs::path target = args.common.out;
  std::vector<fs::path> paths;
  if (maps.size() == 1) {
    paths.push_back(target);
  } else {
    for (const auto& m : maps) {
      char suffix[32];
      std::snprintf(suffix, sizeof(suffix), "_f%06lld", static_cast<long long>(m.frame().value_or(-1)));
      paths.push_back(target.parent_path() / (target.stem().string() + suffix + target.extension().string()));
    }
  }
  OJson written = OJson::array();
  for (std::size_t n = 0; n < maps.size(); ++n) {
    if (paths[n].has_parent_path()) fs::create_directories(paths[n].parent_path());
    write_map_file(maps[n], paths[n]);
    written.push_back(paths[n].string());
  }
  emit_warnings(diagnostics, err);
  out << OJson{{"written", written}}.dump() << '\n';
}

// plan ------------------------------------------------------------------

struct PlanArgs {
  CommonFlags common;
  std::string map;
  std::vector<double> center;
  std::optional<double> radius;
  std::optional<double> slope;
  std::optional<std::string> sign;
  std::optional<std::size_t> candidates;
  bool table = false;
};

void cmd_plan(const PlanArgs& args, std::ostream& out) {
  PipelineConfig config = resolve_config(args.common);
  LiftQuery query = config.query;
  query.center = Vec3(args.center[0], args.center[1], args.center[2]);
  if (args.radius) query.radius = *args.radius;
  if (args.slope) query.leaky_slope = *args.slope;
  if (args.sign) query.sign = parse_sign_convention(*args.sign);
  PlanOptions options;
  options.n_candidates = args.candidates.value_or(config.n_candidates);
  options.keep_candidates = args.table;
  const ForceMap map = read_map_file(args.map);
  const LiftPlan plan = plan_lift(map, query, options);
  const std::string report = plan_to_json(query, plan);
  write_text(args.common.out, report);
  out << OJson{{"written", OJson::array({args.common.out})}}.dump() << '\n';
}

// eval ------------------------------------------------------------------

struct EvalArgs {
  CommonFlags common;
  std::vector<std::string> scenes;
  std::vector<std::string> plans;
  std::vector<std::string> trajectories;
  std::vector<std::string> targets;
  double threshold_deg = 30.0;
};

OJson row_json(const ProxySummaryRow& row) {
  return {{"stratum", row.label},
          {"count", row.count},
          {"mean_proxy_planned_m3", row.mean_planned},
          {"mean_proxy_straight_up_m3", row.mean_straight_up},
          {"median_proxy_planned_m3", row.median_planned},
          {"median_proxy_straight_up_m3", row.median_straight_up},
          {"median_ratio", row.median_ratio},
          {"planned_worse_count", row.planned_worse}};
}

std::string nearest_body(const StackScene& scene, const Vec3& point) {
  if (scene.bodies.empty()) throw Error(ErrorKind::UnknownBody, "scene has no bodies");
  const auto it = std::min_element(scene.bodies.begin(), scene.bodies.end(), [&](const BoxBody& a, const BoxBody& b) {
    return (a.position - point).squaredNorm() < (b.position - point).squaredNorm();
  });
  return it->id;
}

OJson eval_scenes(const EvalArgs& args, const PipelineConfig& config, Diagnostics& diagnostics) {
  if (!args.plans.empty() && args.plans.size() != args.scenes.size()) {
    throw Error(ErrorKind::InvalidArgument, "--plans must list one plan per scene");
  }
  std::vector<LiftComparison> records;
  for (std::size_t n = 0; n < args.scenes.size(); ++n) {
    const StackScene scene = read_scene_file(args.scenes[n]);
    const std::string name = fs::path(args.scenes[n]).filename().string();
    if (!args.plans.empty()) {
      const PlanRecord plan = plan_from_json(read_text(args.plans[n]));
      const std::string target = nearest_body(scene, plan.query.center);
      records.push_back(compare_plan(scene, target, plan.query, plan.plan, config));
      records.back().scene = name;
      continue;
    }
    const ForceMap map = scene_force_map(scene, config, &diagnostics);
    for (const auto& target : overlapped_targets(scene)) {
      records.push_back(compare_lift(scene, map, target, config));
      records.back().scene = name;
    }
  }
  OJson doc;
  doc["mode"] = "sweep_proxy";
  doc["travel_m"] = config.travel;
  doc["records"] = OJson::array();
  for (const auto& r : records) {
    doc["records"].push_back({{"scene", r.scene},
                              {"target", r.target},
                              {"center", vec_json(r.query.center)},
                              {"direction", vec_json(r.plan.direction)},
                              {"elevation_deg", elevation_deg(r.plan.direction)},
                              {"cost", r.plan.cost},
                              {"degenerate", r.plan.degenerate},
                              {"proxy_planned_m3", r.proxy_planned},
                              {"proxy_straight_up_m3", r.proxy_straight_up}});
  }
  doc["summary"] = OJson::array();
  for (const auto& row : summarize_proxy(records, args.threshold_deg)) doc["summary"].push_back(row_json(row));
  return doc;
}

OJson eval_trajectories(const EvalArgs& args, Diagnostics& diagnostics) {
  if (args.targets.size() != args.trajectories.size()) {
    throw Error(ErrorKind::InvalidArgument, "--targets must list one target id per trajectory");
  }
  if (!args.plans.empty() && args.plans.size() != args.trajectories.size()) {
    throw Error(ErrorKind::InvalidArgument, "--plans must list one plan per trajectory");
  }
  struct Trial {
    std::string log;
    DisturbanceReport report;
  };
  std::vector<std::pair<LiftPlan, Trial>> trials;
  OJson records = OJson::array();
  for (std::size_t n = 0; n < args.trajectories.size(); ++n) {
    const TrajectoryLog log = read_trajectory_file(args.trajectories[n]);
    Trial trial{fs::path(args.trajectories[n]).filename().string(),
                displacement_metrics(log, args.targets[n], &diagnostics)};
    LiftPlan plan;
    if (!args.plans.empty()) plan = plan_from_json(read_text(args.plans[n])).plan;
    OJson bodies = OJson::array();
    for (const auto& b : trial.report.bodies) {
      bodies.push_back({{"id", b.id}, {"max_linear_m", b.max_linear}, {"max_angular_rad", b.max_angular}});
    }
    OJson rec{{"trajectory", trial.log},
              {"target", trial.report.target},
              {"bodies", bodies},
              {"mean_linear_m", trial.report.mean_linear},
              {"max_linear_m", trial.report.max_linear},
              {"mean_angular_rad", trial.report.mean_angular},
              {"max_angular_rad", trial.report.max_angular}};
    if (!args.plans.empty()) {
      rec["direction"] = vec_json(plan.direction);
      rec["elevation_deg"] = elevation_deg(plan.direction);
    }
    records.push_back(std::move(rec));
    trials.emplace_back(plan, std::move(trial));
  }

  auto row = [](const std::string& label, const std::vector<std::pair<LiftPlan, Trial>>& group) {
    OJson r{{"stratum", label}, {"count", group.size()}};
    double max_lin = 0.0, max_ang = 0.0, mean_lin = 0.0, mean_ang = 0.0;
    for (const auto& [plan, t] : group) {
      max_lin += t.report.max_linear;
      max_ang += t.report.max_angular;
      mean_lin += t.report.mean_linear;
      mean_ang += t.report.mean_angular;
    }
    const double count = group.empty() ? 1.0 : static_cast<double>(group.size());
    r["mean_of_max_linear_m"] = max_lin / count;
    r["mean_of_max_angular_rad"] = max_ang / count;
    r["mean_of_mean_linear_m"] = mean_lin / count;
    r["mean_of_mean_angular_rad"] = mean_ang / count;
    return r;
  };
  OJson doc;
  doc["mode"] = "displacement";
  doc["records"] = records;
  doc["summary"] = OJson::array({row("all", trials)});
  if (!args.plans.empty()) {
    auto strata = stratify_by_angle(trials, args.threshold_deg);
    doc["summary"].push_back(row("angle<=" + std::to_string(static_cast<int>(args.threshold_deg)) + "deg", strata.within));
  }
  return doc;
}

void cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = resolve_config(args.common);
  if (args.scenes.empty() == args.trajectories.empty()) {
    throw Error(ErrorKind::InvalidArgument, "eval needs either --scenes or --trajectories");
  }
  Diagnostics diagnostics;
  const OJson doc = args.scenes.empty() ? eval_trajectories(args, diagnostics)
                                        : eval_scenes(args, config, diagnostics);
  write_text(args.common.out, doc.dump(2) + "\n");
  emit_warnings(diagnostics, err);
  out << OJson{{"written", OJson::array({args.common.out})}}.dump() << '\n';
}

// export ----------------------------------------------------------------

struct ExportArgs {
  CommonFlags common;
  std::string map;
  std::string mode;
  std::optional<double> threshold;
};

void cmd_export(const ExportArgs& args, std::ostream& out) {
  const PipelineConfig config = resolve_config(args.common);
  const ForceMap map = read_map_file(args.map);
  OJson written = OJson::array();
  if (args.mode == "ply") {
    const double threshold = args.threshold.value_or(config.ply_threshold);
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "--threshold must lie in [0, 1]");
    }
    write_text(args.common.out, ply_point_cloud(map, threshold));
    written.push_back(args.common.out);
  } else {
    for (const auto& p : export_png_slices(map, args.common.out)) written.push_back(p.string());
  }
  out << OJson{{"written", written}}.dump() << '\n';
}

void report_error(std::ostream& err, std::string_view kind, const std::string& message) {
  err << OJson{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contact force maps: label generation, lift planning and evaluation", "forcemap"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate stacked scenes and their contact logs");
  add_common(gen_cmd, gen.common, true);
  gen_cmd->add_option("--count", gen.count, "number of consecutive seeds");

  KdeArgs kde;
  auto* kde_cmd = app.add_subcommand("kde", "contact log -> force-map file(s)");
  add_common(kde_cmd, kde.common, true);
  kde_cmd->add_option("--contacts", kde.contacts, "contact log (.jsonl)")->required()->check(CLI::ExistingFile);
  kde_cmd->add_option("--window", kde.window, "moving-average window in frames (1 disables)");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "force map -> lift-plan JSON");
  add_common(plan_cmd, plan.common, true);
  plan_cmd->add_option("--map", plan.map, "force-map file")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--center", plan.center, "target center x y z (m)")->required()->expected(3);
  plan_cmd->add_option("--radius", plan.radius, "target radius R (m)");
  plan_cmd->add_option("--slope", plan.slope, "LeakyReLU slope");
  plan_cmd->add_option("--sign", plan.sign, "prose-consistent | as-printed");
  plan_cmd->add_option("--candidates", plan.candidates, "lattice size");
  plan_cmd->add_flag("--table", plan.table, "include the candidate cost table");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "sweep-proxy comparison or displacement metrics");
  add_common(eval_cmd, eval.common, true);
  eval_cmd->add_option("--scenes", eval.scenes, "scene JSON files")->check(CLI::ExistingFile);
  eval_cmd->add_option("--plans", eval.plans, "plan JSON files, one per scene or trajectory")->check(CLI::ExistingFile);
  eval_cmd->add_option("--trajectories", eval.trajectories, "trajectory logs (.jsonl)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--targets", eval.targets, "target id per trajectory");
  eval_cmd->add_option("--threshold-deg", eval.threshold_deg, "stratification angle");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "force map -> PLY point cloud or PNG slices");
  add_common(export_cmd, exp.common, true);
  export_cmd->add_option("--map", exp.map, "force-map file")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--mode", exp.mode, "ply | png")->required()->check(CLI::IsMember({"ply", "png"}));
  export_cmd->add_option("--threshold", exp.threshold, "PLY threshold as a fraction of the map max");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (*gen_cmd) cmd_gen(gen, out, err);
    if (*kde_cmd) cmd_kde(kde, out, err);
    if (*plan_cmd) cmd_plan(plan, out);
    if (*eval_cmd) cmd_eval(eval, out, err);
    if (*export_cmd) cmd_export(exp, out);
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace forcemap::cli
