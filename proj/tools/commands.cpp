#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "msviper/core/errors.hpp"
#include "msviper/core/tree_io.hpp"
#include "msviper/distill/distill.hpp"
#include "msviper/envs/scenario.hpp"
#include "msviper/expert/expert.hpp"
#include "msviper/metrics/metrics.hpp"
#include "msviper/treemod/treemod.hpp"

namespace msviper::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : doc.items()) {
    if (!allowed.contains(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
T get_or(const json& doc, const std::string& key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

json load_config(const fs::path& path) {
  try {
    return read_json_file(path);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

void refuse_existing(const fs::path& out) {
  if (fs::exists(out)) throw InputError("output path already exists: " + out.string());
}

void make_output(const fs::path& out) {
  refuse_existing(out);
  fs::create_directories(out);
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw InputError(what + " not found: " + p.string());
}

void write_manifest(const fs::path& out, const std::string& command, const json& inputs, const json& config,
                    const std::vector<std::string>& outputs) {
  write_json_file({{"command", command}, {"inputs", inputs}, {"config", config}, {"outputs", outputs}},
                  out / "manifest.json");
}

std::vector<envs::ScenarioSpec> scenarios_from(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ConfigError("missing '" + key + "'");
  return envs::curriculum_from_json(json{{"curriculum", doc.at(key)}});
}

metrics::BehaviorParams behavior_from_json(const json& doc) {
  reject_unknown(doc, {"trials", "seed", "freeze_steps", "gamma", "window", "min_alternations"}, "behavior");
  metrics::BehaviorParams p;
  p.trials = get_or(doc, "trials", p.trials);
  p.seed = get_or(doc, "seed", p.seed);
  p.freeze_steps = get_or(doc, "freeze_steps", p.freeze_steps);
  p.gamma = get_or(doc, "gamma", p.gamma);
  p.oscillation.window = get_or(doc, "window", p.oscillation.window);
  p.oscillation.min_alternations = get_or(doc, "min_alternations", p.oscillation.min_alternations);
  if (p.trials < 1) throw ConfigError("behavior.trials must be >= 1");
  if (p.freeze_steps < 1) throw ConfigError("behavior.freeze_steps must be >= 1");
  p.oscillation.validate();
  return p;
}

json behavior_to_json(const metrics::BehaviorParams& p) {
  return {{"trials", p.trials},
          {"seed", p.seed},
          {"freeze_steps", p.freeze_steps},
          {"gamma", p.gamma},
          {"window", p.oscillation.window},
          {"min_alternations", p.oscillation.min_alternations}};
}

void check_layout(const StateLayout& policy, const envs::ScenarioSpec& scenario, const std::string& who) {
  if (!(policy == envs::layout_for(scenario))) {
    throw ConfigError(who + " layout does not match scenario stage " + std::to_string(scenario.stage));
  }
}

}  // namespace

// ---- train-expert -------------------------------------------------------

void train_expert(const TrainExpertArgs& args) {
  refuse_existing(args.out);
  const json doc = load_config(args.config);
  reject_unknown(doc, {"kind", "curriculum", "q_learning", "scripted"}, "train-expert config");
  const auto kind = get_or<std::string>(doc, "kind", "q_table");
  const auto curriculum = scenarios_from(doc, "curriculum");
  json resolved{{"kind", kind}, {"curriculum", envs::curriculum_to_json(curriculum)}};

  if (kind == "q_table") {
    if (doc.contains("scripted")) throw ConfigError("'scripted' parameters given for a q_table expert");
    const auto params = expert::qparams_from_json(doc.value("q_learning", json::object()));
    resolved["q_learning"] = expert::qparams_to_json(params);
    const auto result = expert::train_q_expert(curriculum, params);

    std::ostringstream returns;
    returns << "episode,return\n";
    for (std::size_t i = 0; i < result.episode_returns.size(); ++i) {
      returns << i << ',' << format_double(result.episode_returns[i]) << '\n';
    }
    make_output(args.out);
    expert::save_expert(*result.expert, args.out / "expert.json");
    write_text_file(returns.str(), args.out / "training_returns.csv");
    write_manifest(args.out, "train-expert", {{"config", args.config.string()}}, resolved,
                   {"expert.json", "qtable.txt", "training_returns.csv"});
    std::cout << "trained q_table expert: " << result.expert->table().bucket_count() << " buckets\n";
    return;
  }

  if (doc.contains("q_learning")) throw ConfigError("'q_learning' parameters given for a scripted expert");
  const auto params = expert::scripted_params_from_json(doc.value("scripted", json::object()));
  resolved["scripted"] = expert::scripted_params_to_json(params);
  // Scripted controllers read the layout of the final stage.
  const auto ex = expert::scripted_expert(kind, envs::layout_for(curriculum.back()), params);
  make_output(args.out);
  expert::save_expert(*ex, args.out / "expert.json");
  write_manifest(args.out, "train-expert", {{"config", args.config.string()}}, resolved, {"expert.json"});
  std::cout << "wrote scripted expert '" << kind << "'\n";
}

// ---- distill ------------------------------------------------------------

void distill(const DistillArgs& args) {
  refuse_existing(args.out);
  if (args.mode != "msviper" && args.mode != "ssviper") {
    throw ConfigError("unknown mode '" + args.mode + "' (expected msviper or ssviper)");
  }
  const json doc = load_config(args.config);
  reject_unknown(doc, {"curriculum", "distill", "equal_budget", "scenario", "n_s_sweep"}, "distill config");
  const auto curriculum = scenarios_from(doc, "curriculum");
  auto cfg = distill::config_from_json(doc.value("distill", json::object()));
  if (args.jobs) cfg.jobs = *args.jobs;
  cfg.validate();
  const bool equal_budget = get_or(doc, "equal_budget", false);
  const int scenario = get_or(doc, "scenario", static_cast<int>(curriculum.size()) - 1);
  if (scenario < 0 || scenario >= static_cast<int>(curriculum.size())) {
    throw ConfigError("'scenario' is out of range");
  }
  const auto sweep = get_or(doc, "n_s_sweep", std::vector<int>{});
  for (int n : sweep) {
    if (n < 1) throw ConfigError("n_s_sweep entries must be >= 1");
  }

  require_file(args.expert, "expert manifest");
  const auto ex = expert::load_expert(args.expert);
  for (const auto& s : curriculum) check_layout(ex->layout(), s, "expert");

  auto run_once = [&](const distill::DistillConfig& c) {
    if (args.mode == "msviper") return distill::msviper(*ex, curriculum, c);
    const auto scaled = equal_budget ? distill::equal_budget_config(c, curriculum.size()) : c;
    return distill::ssviper(*ex, curriculum[static_cast<std::size_t>(scenario)], scaled);
  };
  const auto effective = [&](const distill::DistillConfig& c) {
    return args.mode == "ssviper" && equal_budget ? distill::equal_budget_config(c, curriculum.size()) : c;
  };

  const auto run = run_once(cfg);
  const auto& tree = run.selected_tree();

  std::ostringstream iterations;
  iterations << "scenario,iteration,beta,dataset_size,sample_size,node_count,depth,mean_return\n";
  for (const auto& st : run.iterations) {
    iterations << st.scenario_index << ',' << st.iteration << ',' << format_double(st.beta) << ','
               << st.dataset_size << ',' << st.sample_size << ',' << st.tree.node_count << ','
               << st.tree.depth << ',' << format_double(st.mean_return) << '\n';
  }

  std::ostringstream sizes;
  if (!sweep.empty()) {
    sizes << "mode,n_s,node_count,leaf_count,depth,mean_return\n";
    for (int n : sweep) {
      auto c = cfg;
      c.n_s = n;
      const auto r = run_once(c);
      const auto st = r.selected_tree().stats();
      sizes << args.mode << ',' << n << ',' << st.node_count << ',' << st.leaf_count << ',' << st.depth << ','
            << format_double(r.candidates[r.selected].eval.mean_return) << '\n';
    }
  }

  json resolved{{"mode", args.mode},
                {"curriculum", envs::curriculum_to_json(curriculum)},
                {"distill", distill::config_to_json(effective(cfg))},
                {"equal_budget", equal_budget},
                {"scenario", scenario},
                {"n_s_sweep", sweep}};
  std::vector<std::string> outputs{"tree.json", "run.json", "iterations.csv"};
  make_output(args.out);
  save_tree(tree, args.out / "tree.json");
  write_json_file(distill::run_to_json(run, effective(cfg)), args.out / "run.json");
  write_text_file(iterations.str(), args.out / "iterations.csv");
  if (!sweep.empty()) {
    write_text_file(sizes.str(), args.out / "size_vs_samples.csv");
    outputs.push_back("size_vs_samples.csv");
  }
  write_manifest(args.out, "distill", {{"config", args.config.string()}, {"expert", args.expert.string()}},
                 resolved, outputs);
  const auto st = tree.stats();
  std::cout << args.mode << ": selected candidate " << run.selected << " with " << st.node_count
            << " nodes (depth " << st.depth << ")\n";
}

// ---- eval ---------------------------------------------------------------

void eval(const EvalArgs& args) {
  refuse_existing(args.out);
  if (!args.tree && !args.expert) throw ConfigError("eval needs --tree, --expert or both");
  const json doc = load_config(args.config);
  reject_unknown(doc, {"scenarios", "behavior", "fidelity_states", "fidelity_seed"}, "eval config");
  const auto scenarios = scenarios_from(doc, "scenarios");
  auto behavior = behavior_from_json(doc.value("behavior", json::object()));
  if (args.jobs) behavior.jobs = *args.jobs;
  const auto fidelity_states = get_or(doc, "fidelity_states", 10000);
  const auto fidelity_seed = get_or<std::uint64_t>(doc, "fidelity_seed", 1);
  if (fidelity_states < 1) throw ConfigError("fidelity_states must be >= 1");

  std::optional<DecisionTreePolicy> tree;
  std::shared_ptr<expert::ExpertPolicy> ex;
  json inputs{{"config", args.config.string()}};
  if (args.tree) {
    require_file(*args.tree, "tree");
    tree = load_tree(*args.tree);
    inputs["tree"] = args.tree->string();
  }
  if (args.expert) {
    require_file(*args.expert, "expert manifest");
    ex = expert::load_expert(*args.expert);
    inputs["expert"] = args.expert->string();
  }

  auto evaluate_policy = [&](const Policy& policy, const StateLayout& layout, const std::string& who) {
    json per = json::array();
    for (const auto& s : scenarios) {
      check_layout(layout, s, who);
      const auto logs = metrics::rollouts(policy, s, behavior.trials, behavior.seed, behavior.jobs);
      const auto rep = metrics::behavior_report(logs, default_actions(), behavior);
      per.push_back({{"stage", s.stage}, {"report", metrics::report_to_json(rep)}});
    }
    return per;
  };

  json result{{"behavior", behavior_to_json(behavior)}, {"policies", json::object()}};
  if (tree) result["policies"]["tree"] = evaluate_policy(*tree, tree->layout(), "tree");
  if (ex) result["policies"]["expert"] = evaluate_policy(*ex, ex->layout(), "expert");
  if (tree && ex) {
    json fid = json::array();
    for (const auto& s : scenarios) {
      const auto states =
          distill::expert_rollout_states(*ex, s, static_cast<std::size_t>(fidelity_states), fidelity_seed);
      const double f = distill::fidelity(*tree, *ex, states);
      fid.push_back({{"stage", s.stage}, {"states", states.size()}, {"fidelity", f}});
      std::cout << "stage " << s.stage << ": fidelity " << std::setprecision(6) << f << '\n';
    }
    result["fidelity"] = fid;
  }

  json resolved{{"scenarios", envs::curriculum_to_json(scenarios)},
                {"behavior", behavior_to_json(behavior)},
                {"fidelity_states", fidelity_states},
                {"fidelity_seed", fidelity_seed}};
  make_output(args.out);
  write_json_file(result, args.out / "eval.json");
  write_manifest(args.out, "eval", inputs, resolved, {"eval.json"});
}

// ---- repair -------------------------------------------------------------

namespace {

std::map<ActionId, ActionId> remap_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("M_c must be an object of \"source\": target entries");
  std::map<ActionId, ActionId> out;
  for (const auto& [k, v] : doc.items()) {
    try {
      std::size_t used = 0;
      const int from = std::stoi(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
      out[from] = v.get<int>();
    } catch (const std::exception&) {
      throw ConfigError("bad M_c entry '" + k + "'");
    }
  }
  return out;
}

json remap_to_json(const std::map<ActionId, ActionId>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[std::to_string(k)] = v;
  return out;
}

}  // namespace

void repair(const RepairArgs& args) {
  refuse_existing(args.out);
  static const std::set<std::string> defects{"freezing", "oscillation", "vibration1", "vibration2"};
  if (!defects.contains(args.defect)) {
    throw ConfigError("unknown defect '" + args.defect + "' (expected freezing, oscillation, vibration1 or vibration2)");
  }
  const json doc = args.config ? load_config(*args.config) : json::object();
  reject_unknown(doc, defects, "repair config");
  const json section = doc.value(args.defect, json::object());

  require_file(args.tree, "tree");
  const auto tree = load_tree(args.tree);
  const auto& layout = tree.layout();
  json inputs{{"tree", args.tree.string()}};
  if (args.config) inputs["config"] = args.config->string();

  json resolved{{"defect", args.defect}};
  std::optional<treemod::RepairResult> result;

  if (args.defect == "freezing") {
    reject_unknown(section, {"a_F", "m_A", "a_R", "a_L", "occupancy_threshold"}, "freezing");
    const auto a_F = get_or(section, "a_F", std::vector<ActionId>{kStopAction});
    const int m_A = get_or(section, "m_A", 4);
    const ActionId a_R = get_or(section, "a_R", kRotateRightAction);
    const ActionId a_L = get_or(section, "a_L", kRotateLeftAction);
    const double thr = get_or(section, "occupancy_threshold", 0.0);
    if (m_A < 0) throw ConfigError("m_A must be >= 0");
    const auto detected = treemod::detect_freezing(tree, {a_F.begin(), a_F.end()}, m_A);
    result = treemod::fix_freezing(tree, detected, a_R, a_L, thr);
    resolved["freezing"] = {{"a_F", a_F}, {"m_A", m_A}, {"a_R", a_R}, {"a_L", a_L}, {"occupancy_threshold", thr}};
  } else if (args.defect == "oscillation") {
    reject_unknown(section,
                   {"scenario", "n_e", "window", "min_alternations", "seed", "force_replace", "reduce_scale"},
                   "oscillation");
    if (!section.contains("scenario")) throw ConfigError("oscillation repair needs 'scenario'");
    const auto scenario = envs::scenario_from_json(section.at("scenario"));
    check_layout(layout, scenario, "tree");
    metrics::OscillationParams op;
    op.window = get_or(section, "window", op.window);
    op.min_alternations = get_or(section, "min_alternations", op.min_alternations);
    const int n_e = get_or(section, "n_e", 20);
    const auto seed = get_or<std::uint64_t>(section, "seed", 1);
    const bool z = get_or(section, "force_replace", false);
    const double scale = get_or(section, "reduce_scale", 0.4);
    const auto obs = treemod::detect_oscillation(tree, scenario, n_e, op, seed, args.jobs.value_or(1));
    result = treemod::fix_oscillation(tree, obs, z, scale);
    resolved["oscillation"] = {{"scenario", envs::scenario_to_json(scenario)},
                               {"n_e", n_e},
                               {"window", op.window},
                               {"min_alternations", op.min_alternations},
                               {"seed", seed},
                               {"force_replace", z},
                               {"reduce_scale", scale}};
  } else if (args.defect == "vibration1") {
    reject_unknown(section, {"h", "indices"}, "vibration1");
    const double h = args.h.value_or(get_or(section, "h", 0.0));
    const auto group = section.contains("indices") ? get_or(section, "indices", std::vector<std::size_t>{})
                       : layout.has_group(kAngularVelocityGroup) ? layout.group(kAngularVelocityGroup)
                                                                 : std::vector<std::size_t>{};
    const auto detected = treemod::detect_vibration_m1(tree, group);
    result = treemod::fix_vibration_m1(tree, detected, h);
    resolved["vibration1"] = {{"h", h}, {"indices", group}};
  } else {
    reject_unknown(section, {"V_b", "gamma", "indices", "M_c"}, "vibration2");
    treemod::VibrationSpaceSpec spec;
    spec.V_b = get_or(section, "V_b", spec.V_b);
    spec.gamma = get_or(section, "gamma", spec.gamma);
    if (section.contains("indices")) {
      spec.indices = get_or(section, "indices", std::vector<std::size_t>{});
    } else if (layout.has_group(kAngularVelocityGroup)) {
      spec.indices = layout.group(kAngularVelocityGroup);
    }
    const auto M_c = section.contains("M_c") ? remap_from_json(section.at("M_c")) : default_vibration_remap();
    const auto detected = treemod::detect_vibration_m2(tree, spec);
    result = treemod::fix_vibration_m2(tree, detected, M_c);
    resolved["vibration2"] = {
        {"V_b", spec.V_b}, {"gamma", spec.gamma}, {"indices", spec.indices}, {"M_c", remap_to_json(M_c)}};
  }

  make_output(args.out);
  save_tree(result->tree, args.out / "tree.json");
  write_json_file(treemod::log_to_json(result->log), args.out / "repair_log.json");
  write_manifest(args.out, "repair", inputs, resolved, {"tree.json", "repair_log.json"});
  std::cout << args.defect << ": detected " << result->log.detected.size() << " nodes, N_plus "
            << result->log.N_plus << " of N_1 " << result->log.N_1 << '\n';
}

// ---- report -------------------------------------------------------------

void report(const ReportArgs& args) {
  refuse_existing(args.out);
  for (const auto& [p, what] : {std::pair{args.before, "before report"}, std::pair{args.after, "after report"},
                                std::pair{args.log, "repair log"}}) {
    require_file(p, what);
  }
  const json before_doc = read_json_file(args.before);
  const json after_doc = read_json_file(args.after);
  const auto log = treemod::log_from_json(read_json_file(args.log));
  const std::string metric = args.metric.value_or(log.target_metric);

  auto pick = [&](const json& doc, const std::string& which) -> json {
    try {
      const auto& entry = doc.at("policies").at(args.policy).at(static_cast<std::size_t>(args.scenario));
      return entry.at("report");
    } catch (const json::exception&) {
      throw InputError(which + " report has no policy '" + args.policy + "' at scenario " +
                       std::to_string(args.scenario));
    }
  };
  const json before = pick(before_doc, "before");
  const json after = pick(after_doc, "after");
  if (!before.contains(metric) || !after.contains(metric)) throw ConfigError("unknown metric '" + metric + "'");
  const double M_1 = before.at(metric).get<double>();
  const double M_2 = after.at(metric).get<double>();
  const auto eff = treemod::efficiency(M_1, M_2, log);

  std::ostringstream csv;
  csv << "field,before,after\n";
  for (const auto& [k, v] : before.items()) {
    if (!v.is_number() || !after.contains(k)) continue;
    csv << k << ',' << format_double(v.get<double>()) << ',' << format_double(after.at(k).get<double>()) << '\n';
  }
  json doc{{"defect", log.defect},
           {"metric", metric},
           {"before", before},
           {"after", after},
           {"efficiency", metrics::efficiency_to_json(eff)},
           {"changes", log.changes.size()},
           {"detected", log.detected.size()}};

  make_output(args.out);
  write_json_file(doc, args.out / "report.json");
  write_text_file(csv.str(), args.out / "before_after.csv");
  write_manifest(args.out, "report",
                 {{"before", args.before.string()}, {"after", args.after.string()}, {"log", args.log.string()}},
                 {{"metric", metric}, {"policy", args.policy}, {"scenario", args.scenario}},
                 {"report.json", "before_after.csv"});
  std::cout << metric << ": " << M_1 << " -> " << M_2 << ", e_O " << eff.e_O << ", e_R " << eff.e_R << '\n';
}

// ---- coverage -----------------------------------------------------------

void coverage(const CoverageArgs& args) {
  refuse_existing(args.out);
  const json doc = load_config(args.config);
  const auto params = metrics::coverage_params_from_json(doc);
  json result{{"threshold", metrics::coverage_threshold(params.K, params.epsilon)}};
  result["P_V"] = metrics::coverage_probability(params, metrics::CoverageMethod::viper);
  result["P_M"] = metrics::coverage_probability(params, metrics::CoverageMethod::msviper);
  make_output(args.out);
  write_json_file(result, args.out / "coverage.json");
  write_manifest(args.out, "coverage", {{"config", args.config.string()}}, doc, {"coverage.json"});
  std::cout << "P_V " << result["P_V"].get<double>() << ", P_M " << result["P_M"].get<double>() << '\n';
}

}  // namespace msviper::cli
