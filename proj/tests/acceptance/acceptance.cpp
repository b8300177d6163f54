// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msviper/cart/cart.hpp"
#include "msviper/core/actions.hpp"
#include "msviper/core/random.hpp"
#include "msviper/core/tree_io.hpp"
#include "msviper/distill/distill.hpp"
#include "msviper/envs/env.hpp"
#include "msviper/expert/expert.hpp"
#include "msviper/metrics/metrics.hpp"
#include "msviper/treemod/treemod.hpp"
#include "oracles.hpp"
#include "random_tree.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace msviper;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kWork = MSVIPER_WORKDIR;
const fs::path kConfigs = MSVIPER_CONFIGS;

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

/// Runs the CLI, appending its output to the work log. Returns the exit code.
int cli(const std::string& args) {
  const std::string cmd = std::string(MSVIPER_CLI) + " " + args + " >> " + quote(kWork / "cli.log") + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void cli_ok(const std::string& args) {
  if (const int rc = cli(args); rc != 0) {
    throw std::runtime_error("command failed (exit " + std::to_string(rc) + "): msviper " + args);
  }
}

json tree_report(const fs::path& eval_dir) {
  return read_json_file(eval_dir / "eval.json").at("policies").at("tree").at(0).at("report");
}

// ---- reference tables ----------------------------------------------------

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, '&')) {
    cur = std::regex_replace(cur, std::regex(R"(\\\\|\\textbf\{[^}]*\}|,)"), "");
    cur = std::regex_replace(cur, std::regex(R"(^\s+|\s+$)"), "");
    out.push_back(cur);
  }
  return out;
}

std::string line_containing(const std::string& text, const std::string& needle) {
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.find(needle) != std::string::npos) return line;
  }
  throw std::runtime_error("reference text has no line with '" + needle + "'");
}

struct ModRow {
  double n_s, N_1, N_plus, before, after, e_O, e_R;
};

ModRow modification_row(const std::string& text, const std::string& label) {
  const auto c = cells(line_containing(text, label));
  // label, n_s, N_1, N_2, N_+, (blank), initial, modified, e_O, e_R
  if (c.size() < 10) throw std::runtime_error("unexpected table row for " + label);
  return {std::stod(c[1]), std::stod(c[2]), std::stod(c[4]), std::stod(c[6]),
          std::stod(c[7]), std::stod(c[8]), std::stod(c[9])};
}

// ---- criteria -----------------------------------------------------------

Outcome efficiency_formula(const std::string& reference) {
  std::ostringstream d;
  bool ok = true;
  const struct {
    const char* label;
    double eO_tol, eR_tol;
  } rows[] = {{"Policy with Freezing Error", 0.0005, 0.01}, {"Policy with Excessive Oscillation", 0.0005, 0.1}};
  for (const auto& r : rows) {
    const auto row = modification_row(reference, r.label);
    const auto e = metrics::efficiency(row.before, row.after, static_cast<long long>(row.N_plus),
                                       static_cast<long long>(row.N_1));
    const bool good = std::abs(e.e_O - row.e_O) <= r.eO_tol && std::abs(e.e_R - row.e_R) <= r.eR_tol;
    ok = ok && good;
    d << (d.tellp() > 0 ? "; " : "") << "e_O " << fmt(e.e_O) << " vs " << row.e_O << ", e_R " << fmt(e.e_R, 5)
      << " vs " << row.e_R;
  }
  return {ok, d.str()};
}

Outcome catalog_fidelity(const std::string& reference) {
  const auto lin = cells(line_containing(reference, "Linear Velocity"));
  const auto ang = cells(line_containing(reference, "Angular Velocity"));
  const auto catalog = default_actions();
  std::vector<std::string> problems;
  if (lin.size() != 16 || ang.size() != 16) problems.push_back("reference table not 15 columns");
  if (catalog.size() != 15) problems.push_back("catalog has " + std::to_string(catalog.size()) + " actions");
  for (std::size_t i = 0; i < std::min<std::size_t>(catalog.size(), lin.size() - 1); ++i) {
    if (catalog[i].linear != std::stod(lin[i + 1]) || catalog[i].angular != std::stod(ang[i + 1])) {
      problems.push_back("action " + std::to_string(i) + " velocities differ");
    }
  }
  // The remap listed in the text.
  const std::string mc_line = line_containing(reference, "mathbf{M}_c = \\{");
  const std::string mc_text = mc_line.substr(mc_line.find("mathbf{M}_c = \\{"));
  std::map<ActionId, ActionId> listed;
  const std::regex pair_re(R"((\d+)\s*\\rightarrow\s*(\d+))");
  for (std::sregex_iterator it(mc_text.begin(), mc_text.end(), pair_re), end; it != end; ++it) {
    listed[std::stoi((*it)[1])] = std::stoi((*it)[2]);
  }
  const auto remap = default_vibration_remap();
  if (listed.empty() || remap != listed) problems.push_back("remap differs from the listed map");
  for (const auto& [a, b] : remap) {
    const auto& from = catalog.at(static_cast<std::size_t>(a));
    const auto& to = catalog.at(static_cast<std::size_t>(b));
    if (std::abs(to.linear) > std::abs(from.linear) || std::abs(to.angular) > std::abs(from.angular)) {
      problems.push_back("remap " + std::to_string(a) + "->" + std::to_string(b) + " raises a magnitude (" +
                         fmt(from.linear) + "," + fmt(from.angular) + ") -> (" + fmt(to.linear) + "," +
                         fmt(to.angular) + ")");
    }
  }
  std::string d = "15 actions and " + std::to_string(listed.size()) + " remap pairs compared";
  for (const auto& p : problems) d += "; " + p;
  return {problems.empty(), d};
}

Outcome tree_size() {
  const auto curriculum = envs::randomized_grid_curriculum(7);
  expert::QLearningParams qp;
  qp.seed = 1;
  const auto q = expert::train_q_expert(curriculum, qp);
  distill::DistillConfig cfg;
  cfg.M = 30;
  cfg.N = 5;
  cfg.l_t = 100;
  cfg.n_s = 500;
  cfg.n_cv = 20;
  cfg.jobs = 4;
  double ms = 0.0, ss = 0.0;
  std::ostringstream per_seed;
  const int seeds = 10;
  for (int s = 1; s <= seeds; ++s) {
    cfg.rng_seed = static_cast<std::uint64_t>(s);
    const auto m = distill::msviper(*q.expert, curriculum, cfg);
    const auto b = distill::ssviper(*q.expert, curriculum.back(), distill::equal_budget_config(cfg, curriculum.size()));
    const int mn = m.selected_tree().stats().node_count;
    const int sn = b.selected_tree().stats().node_count;
    ms += mn;
    ss += sn;
    per_seed << (s > 1 ? " " : "") << mn << "/" << sn;
  }
  ms /= seeds;
  ss /= seeds;
  return {ms <= ss, "mean nodes MSVIPER " + fmt(ms) + " vs SSVIPER " + fmt(ss) + " over " + std::to_string(seeds) +
                        " seeds (per seed " + per_seed.str() + ")"};
}

Outcome distill_fidelity() {
  const json expert_cfg = read_json_file(kConfigs / "grid_expert.json");
  const json distill_cfg = read_json_file(kConfigs / "grid_distill.json");
  const auto curriculum = envs::curriculum_from_json(json{{"curriculum", distill_cfg.at("curriculum")}});
  const auto q = expert::train_q_expert(
      envs::curriculum_from_json(json{{"curriculum", expert_cfg.at("curriculum")}}),
      expert::qparams_from_json(expert_cfg.at("q_learning")));
  auto cfg = distill::config_from_json(distill_cfg.at("distill"));
  cfg.jobs = 4;
  const auto run = distill::msviper(*q.expert, curriculum, cfg);
  const auto& tree = run.selected_tree();
  // States visited by greedy expert rollouts on the final stage.
  auto env = envs::make_environment(curriculum.back());
  std::size_t states = 0, agree = 0;
  for (std::uint64_t episode = 0; states < 10000; ++episode) {
    const auto log = envs::run_episode(*env, *q.expert, derive_seed(99, episode));
    for (const auto& s : log.states) {
      if (states == 10000) break;
      ++states;
      agree += tree.act(s) == q.expert->act(s) ? 1 : 0;
    }
  }
  const double f = static_cast<double>(agree) / static_cast<double>(states);
  return {f >= 0.95, "fidelity " + fmt(f) + " on " + std::to_string(states) + " expert states, tree " +
                         std::to_string(tree.stats().node_count) + " nodes"};
}

/// train-expert, distill and a baseline eval for one of the shipped pipelines.
fs::path prepare_pipeline(const std::string& name) {
  const fs::path dir = kWork / name;
  fs::create_directories(dir);
  cli_ok("train-expert --config " + quote(kConfigs / (name + "_expert.json")) + " --out " + quote(dir / "expert"));
  cli_ok("distill --config " + quote(kConfigs / (name + "_distill.json")) + " --expert " +
         quote(dir / "expert" / "expert.json") + " --jobs 4 --out " + quote(dir / "distill"));
  cli_ok("eval --config " + quote(kConfigs / (name + "_eval.json")) + " --tree " + quote(dir / "distill" / "tree.json") +
         " --jobs 4 --out " + quote(dir / "pre"));
  return dir;
}

/// repair, eval and report; returns the report document.
json repair_and_report(const fs::path& dir, const std::string& name, const std::string& defect,
                       const std::string& tag, const std::string& extra = "") {
  cli_ok("repair --tree " + quote(dir / "distill" / "tree.json") + " --defect " + defect + " --config " +
         quote(kConfigs / (name + "_repair.json")) + " " + extra + " --jobs 4 --out " + quote(dir / ("repair_" + tag)));
  cli_ok("eval --config " + quote(kConfigs / (name + "_eval.json")) + " --tree " +
         quote(dir / ("repair_" + tag) / "tree.json") + " --jobs 4 --out " + quote(dir / ("post_" + tag)));
  cli_ok("report --before " + quote(dir / "pre" / "eval.json") + " --after " +
         quote(dir / ("post_" + tag) / "eval.json") + " --log " + quote(dir / ("repair_" + tag) / "repair_log.json") +
         " --out " + quote(dir / ("report_" + tag)));
  return read_json_file(dir / ("report_" + tag) / "report.json");
}

Outcome freezing_repair() {
  const auto dir = prepare_pipeline("freezing");
  const auto rep = repair_and_report(dir, "freezing", "freezing", "main");
  const double before = rep.at("before").at("freezing_rate");
  const double after = rep.at("after").at("freezing_rate");
  const int trials = rep.at("before").at("trials");
  const bool ok = trials == 100 && before >= 0.5 && after <= 0.2 * before;
  return {ok, "freezing rate " + fmt(before) + " -> " + fmt(after) + " over " + std::to_string(trials) +
                  " episodes, N_plus " + rep.at("efficiency").at("N_plus").dump() + " of " +
                  rep.at("efficiency").at("N_1").dump() + ", e_O " + fmt(rep.at("efficiency").at("e_O")) + ", e_R " +
                  fmt(rep.at("efficiency").at("e_R"))};
}

Outcome oscillation_repair() {
  const auto dir = prepare_pipeline("oscillation");
  const auto rep = repair_and_report(dir, "oscillation", "oscillation", "main");
  const double before = rep.at("before").at("c_osc_pct");
  const double after = rep.at("after").at("c_osc_pct");
  const int trials = rep.at("before").at("trials");
  const auto& e = rep.at("efficiency");
  const auto log = read_json_file(dir / "repair_main" / "repair_log.json");
  const bool logged = log.contains("N_plus") && log.at("N_plus").get<long long>() > 0;
  // e_R = e_O * N_1 follows from the two definitions.
  const bool identity = std::abs(e.at("e_R").get<double>() - e.at("e_O").get<double>() * e.at("N_1").get<double>()) <=
                        1e-9 * std::max(1.0, e.at("e_R").get<double>());
  const bool ok = trials == 50 && before > 0.0 && after <= 0.2 * before && logged && identity;
  return {ok, "C_osc " + fmt(before) + " -> " + fmt(after) + " over " + std::to_string(trials) + " episodes, N_plus " +
                  log.at("N_plus").dump() + ", e_O " + fmt(e.at("e_O")) + ", e_R " + fmt(e.at("e_R"))};
}

Outcome vibration_repair() {
  const auto dir = prepare_pipeline("terrain");
  const double base = tree_report(dir / "pre").at("v_b_mean");
  std::ostringstream d;
  d << "V_b " << fmt(base) << "; method 1:";
  double best_m1 = -1e9;
  const std::vector<std::string> sweep{"-0.2", "-0.1", "0.1", "0.2", "0.3"};
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto rep = repair_and_report(dir, "terrain", "vibration1", "h" + std::to_string(i), "--h " + sweep[i]);
    const double rel = (base - rep.at("after").at("v_b_mean").get<double>()) / base;
    best_m1 = std::max(best_m1, rel);
    d << " h=" << sweep[i] << " " << fmt(100 * rel, 3) << "%";
  }
  const auto rep2 = repair_and_report(dir, "terrain", "vibration2", "m2");
  const double rel2 = (base - rep2.at("after").at("v_b_mean").get<double>()) / base;
  d << "; method 2 " << fmt(100 * rel2, 3) << "% (N_plus " << rep2.at("efficiency").at("N_plus").dump() << ")";
  return {best_m1 >= 0.05 && rel2 >= 0.05, d.str()};
}

Outcome coverage_theorem() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_params = [&](int n_E) {
    metrics::CoverageParams c;
    c.K = 1 + static_cast<int>(gen() % 8);
    c.n_E = n_E;
    c.m = n_E * (1 + static_cast<int>(gen() % 6));
    c.epsilon = 0.1 + 0.9 * u(gen);
    for (int k = 0; k < c.K; ++k) {
      std::vector<double> row(static_cast<std::size_t>(n_E));
      row.back() = 0.5 * u(gen);
      // Earlier stages miss less often than the final one.
      for (int e = 0; e + 1 < n_E; ++e) row[static_cast<std::size_t>(e)] = row.back() + (1.0 - row.back()) * u(gen);
      c.p.push_back(row);
    }
    return c;
  };
  int dominance_failures = 0;
  double worst_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = random_params(2 + static_cast<int>(gen() % 3));
    const double pm = metrics::coverage_probability(c, metrics::CoverageMethod::msviper);
    const double pv = metrics::coverage_probability(c, metrics::CoverageMethod::viper);
    if (pm < pv - 1e-12) ++dominance_failures;
    worst_gap = std::min(worst_gap, pm - pv);
  }
  int equality_failures = 0;
  for (int i = 0; i < 200; ++i) {
    const auto c = random_params(1);
    if (metrics::coverage_probability(c, metrics::CoverageMethod::msviper) !=
        metrics::coverage_probability(c, metrics::CoverageMethod::viper)) {
      ++equality_failures;
    }
  }
  double worst_mc = 0.0;
  for (int i = 0; i < 6; ++i) {
    auto c = random_params(1 + i % 3);
    c.K = std::min(c.K, 6);
    c.p.resize(static_cast<std::size_t>(c.K));
    for (auto method : {metrics::CoverageMethod::viper, metrics::CoverageMethod::msviper}) {
      const double exact = metrics::coverage_probability(c, method);
      const double mc = oracle::coverage_monte_carlo(c.p, c.m, method == metrics::CoverageMethod::msviper, c.epsilon,
                                                     1000000, 500 + static_cast<std::uint64_t>(i));
      worst_mc = std::max(worst_mc, std::abs(exact - mc));
    }
  }
  const bool ok = dominance_failures == 0 && equality_failures == 0 && worst_mc <= 1e-2;
  return {ok, "P_M >= P_V on 1000/1000 sets" + std::string(dominance_failures ? " FAILED " + std::to_string(dominance_failures) : "") +
                  " (min gap " + fmt(worst_gap) + "), n_E=1 equal on " + std::to_string(200 - equality_failures) +
                  "/200, max |exact - MC(1e6)| " + fmt(worst_mc, 3)};
}

Outcome cart_oracle() {
  Rng rng(31337);
  int split_mismatch = 0, accuracy_failures = 0, node_mismatch = 0, nodes_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng.below(5);
    const std::size_t width = std::max<std::size_t>(dim, 3);
    const std::size_t n = 2 + rng.below(199);
    const int labels = 2 + static_cast<int>(rng.below(3));
    const bool weighted = trial % 4 == 3;
    cart::PairSet pairs(width);
    std::map<std::vector<double>, int> label_of;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(width, 0.0);
      for (std::size_t f = 0; f < dim; ++f) x[f] = static_cast<double>(rng.below(7)) * 0.25 - 0.5;
      auto it = label_of.try_emplace(x, static_cast<int>(rng.below(static_cast<std::uint64_t>(labels)))).first;
      if (weighted) {
        pairs.add(x, it->second, 0.5 + static_cast<double>(rng.below(4)));
      } else {
        pairs.add(x, it->second);
      }
    }
    std::vector<oracle::Row> rows;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto s = pairs.state(i);
      rows.push_back({{s.begin(), s.end()}, pairs.action(i), pairs.weight(i)});
    }
    const auto got = cart::best_split(pairs);
    const auto want = oracle::best_split(rows);
    if (got.has_value() != want.has_value() ||
        (got && (got->feature != want->feature || got->threshold != want->threshold))) {
      ++split_mismatch;
    }
    StateLayout layout;
    layout.occupancy_columns = 0;
    layout.occupancy_rows = 0;
    layout.extra_features = static_cast<int>(width) - 3;
    const auto tree = cart::train(pairs, {}, layout, default_actions());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (tree.predict(pairs.state(i)) != pairs.action(i)) {
        ++accuracy_failures;
        break;
      }
    }
    // Every branch carries the exhaustive best split of the rows reaching it.
    std::function<void(NodeId, const std::vector<oracle::Row>&)> walk = [&](NodeId id,
                                                                          const std::vector<oracle::Row>& here) {
      ++nodes_checked;
      const auto& node = tree.node(id);
      const auto best = oracle::best_split(here);
      if (node.is_leaf()) {
        node_mismatch += best.has_value() ? 1 : 0;
        return;
      }
      if (!best || best->feature != node.feature || best->threshold != node.threshold) {
        ++node_mismatch;
        return;
      }
      std::vector<oracle::Row> l, r;
      for (const auto& row : here) (row.x[static_cast<std::size_t>(node.feature)] <= node.threshold ? l : r).push_back(row);
      walk(node.left, l);
      walk(node.right, r);
    };
    walk(tree.root(), rows);
  }
  const bool ok = split_mismatch == 0 && accuracy_failures == 0 && node_mismatch == 0;
  return {ok, "100 datasets: root split mismatches " + std::to_string(split_mismatch) + ", training-accuracy failures " +
                  std::to_string(accuracy_failures) + ", node mismatches " + std::to_string(node_mismatch) + " of " +
                  std::to_string(nodes_checked) + " nodes"};
}

Outcome vibration_oracle() {
  const auto layout = StateLayout::terrain_desk();
  const auto& group = layout.group(kAngularVelocityGroup);
  treemod::VibrationSpaceSpec spec;
  spec.V_b = 0.45;
  spec.gamma = 0.9;
  spec.indices = {group[0], group[1], group[2], group[3]};
  const auto w = spec.weights();
  const auto samples = oracle::surface_samples(w, spec.V_b, 200000, 77);
  const std::vector<double> cuts{-0.6, -0.3, 0.0, 0.3, 0.6};
  const int bearing = static_cast<int>(layout.goal_bearing_index());
  Rng rng(4242);
  int agree = 0, reported = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const auto tree = testing_support::random_tree(
        layout, default_actions(), rng, 5, 0.15,
        [&](Rng& r) { return r.below(6) == 0 ? bearing : static_cast<int>(spec.indices[r.below(4)]); },
        [&](Rng& r, int) { return cuts[r.below(cuts.size())]; });
    // Oracle detection: the same pruned descent, deciding each node by
    // whether the sampled surface crosses its box.
    std::vector<NodeId> expected;
    std::function<void(NodeId, std::vector<double>, std::vector<double>)> descend =
        [&](NodeId id, std::vector<double> lo, std::vector<double> hi) {
          if (oracle::box_straddles(samples, lo, hi)) {
            expected.push_back(id);
            return;
          }
          const auto& n = tree.node(id);
          if (n.is_leaf()) return;
          auto lhi = hi, rlo = lo;
          const auto it = std::find(spec.indices.begin(), spec.indices.end(), static_cast<std::size_t>(n.feature));
          if (it != spec.indices.end()) {
            const auto k = static_cast<std::size_t>(it - spec.indices.begin());
            lhi[k] = std::min(hi[k], n.threshold);
            rlo[k] = std::max(lo[k], n.threshold);
          }
          descend(n.left, lo, lhi);
          descend(n.right, rlo, hi);
        };
    descend(tree.root(), std::vector<double>(4, -inf), std::vector<double>(4, inf));
    std::sort(expected.begin(), expected.end());
    const auto got = treemod::detect_vibration_m2(tree, spec);
    agree += got == expected ? 1 : 0;
    reported += static_cast<int>(got.size());
  }
  return {agree == 100, "detections equal on " + std::to_string(agree) + "/100 trees (" + std::to_string(reported) +
                            " nodes reported)"};
}

Outcome determinism() {
  const fs::path dir = kWork / "determinism";
  fs::create_directories(dir);
  const auto& C = kConfigs;
  auto out = [&](const std::string& name, int run) { return dir / (name + "_" + std::to_string(run)); };
  std::vector<std::string> diffs;
  int compared = 0, commands = 0;
  auto twice = [&](const std::string& name, const std::string& args) {
    for (int run = 1; run <= 2; ++run) cli_ok(args + " --out " + quote(out(name, run)));
    ++commands;
    for (const auto& entry : fs::recursive_directory_iterator(out(name, 1))) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), out(name, 1));
      ++compared;
      if (!fs::exists(out(name, 2) / rel) || slurp(entry.path()) != slurp(out(name, 2) / rel)) {
        diffs.push_back(name + "/" + rel.string());
      }
    }
  };
  twice("train_grid", "train-expert --config " + quote(C / "grid_expert.json"));
  twice("train_terrain", "train-expert --config " + quote(C / "terrain_expert.json"));
  const auto grid_expert = out("train_grid", 1) / "expert.json";
  twice("distill_grid", "distill --config " + quote(C / "grid_distill.json") + " --expert " + quote(grid_expert) +
                            " --jobs 4");
  twice("distill_terrain", "distill --config " + quote(C / "terrain_distill.json") + " --expert " +
                               quote(out("train_terrain", 1) / "expert.json") + " --mode ssviper --jobs 4");
  const auto grid_tree = out("distill_grid", 1) / "tree.json";
  const auto terrain_tree = out("distill_terrain", 1) / "tree.json";
  twice("eval_grid", "eval --config " + quote(C / "grid_eval.json") + " --tree " + quote(grid_tree) + " --expert " +
                         quote(grid_expert) + " --jobs 4");
  twice("repair_freezing", "repair --tree " + quote(grid_tree) + " --defect freezing --config " +
                               quote(C / "freezing_repair.json"));
  twice("repair_oscillation", "repair --tree " + quote(grid_tree) + " --defect oscillation --config " +
                                  quote(C / "oscillation_repair.json") + " --jobs 4");
  twice("repair_vibration1", "repair --tree " + quote(terrain_tree) + " --defect vibration1 --config " +
                                 quote(C / "terrain_repair.json"));
  twice("repair_vibration2", "repair --tree " + quote(terrain_tree) + " --defect vibration2 --config " +
                                 quote(C / "terrain_repair.json"));
  cli_ok("eval --config " + quote(C / "grid_eval.json") + " --tree " +
         quote(out("repair_oscillation", 1) / "tree.json") + " --out " + quote(dir / "eval_after"));
  twice("report", "report --before " + quote(out("eval_grid", 1) / "eval.json") + " --after " +
                      quote(dir / "eval_after" / "eval.json") + " --log " +
                      quote(out("repair_oscillation", 1) / "repair_log.json") + " --metric mean_return");
  twice("coverage", "coverage --config " + quote(C / "coverage.json"));
  std::string d = std::to_string(compared) + " artifacts from " + std::to_string(commands) + " commands run twice";
  for (const auto& f : diffs) d += "; differs: " + f;
  return {diffs.empty(), d};
}

}  // namespace

int main() {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  const std::string reference = slurp(MSVIPER_REFERENCE);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"efficiency formula reproduces the modification table", [&] { return efficiency_formula(reference); }},
      {"action catalog and vibration remap match the reference", [&] { return catalog_fidelity(reference); }},
      {"multi-scenario trees are no larger at equal budget", tree_size},
      {"distilled tree agrees with the expert on >= 95% of states", distill_fidelity},
      {"freezing repair cuts the freezing rate by >= 80%", freezing_repair},
      {"oscillation repair cuts C_osc by >= 80%", oscillation_repair},
      {"both vibration repairs cut mean V_b by >= 5%", vibration_repair},
      {"coverage theorem and Monte-Carlo agreement", coverage_theorem},
      {"CART matches exhaustive split enumeration", cart_oracle},
      {"vibration-space detection matches surface sampling", vibration_oracle},
      {"every CLI command is byte-for-byte reproducible", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << i + 1 << ": " << criteria[i].first
              << " | " << o.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
