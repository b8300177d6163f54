#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "msviper/core/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace msviper::cli;
  CLI::App app{"Distill navigation experts into decision trees and repair their behaviour."};
  app.require_subcommand(1);

  TrainExpertArgs train;
  auto* c_train = app.add_subcommand("train-expert", "Train a Q-table expert or write a scripted one");
  c_train->add_option("--config", train.config, "Expert config (JSON)")->required();
  c_train->add_option("--out", train.out, "Fresh output directory")->required();

  DistillArgs dist;
  auto* c_dist = app.add_subcommand("distill", "Distill an expert into a decision tree");
  c_dist->add_option("--config", dist.config, "Distillation config (JSON)")->required();
  c_dist->add_option("--expert", dist.expert, "Expert manifest")->required();
  c_dist->add_option("--out", dist.out, "Fresh output directory")->required();
  c_dist->add_option("--mode", dist.mode, "msviper or ssviper");
  c_dist->add_option("--jobs", dist.jobs, "Concurrent rollouts");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Behaviour metrics of a tree and/or an expert");
  c_eval->add_option("--config", ev.config, "Evaluation config (JSON)")->required();
  c_eval->add_option("--tree", ev.tree, "Tree file");
  c_eval->add_option("--expert", ev.expert, "Expert manifest");
  c_eval->add_option("--out", ev.out, "Fresh output directory")->required();
  c_eval->add_option("--jobs", ev.jobs, "Concurrent rollouts");

  RepairArgs rep;
  auto* c_rep = app.add_subcommand("repair", "Detect and repair a behaviour defect in a tree");
  // --h is the threshold increment, so help is long-form only here.
  c_rep->set_help_flag("--help", "Print this help message and exit");
  c_rep->add_option("--tree", rep.tree, "Tree file")->required();
  c_rep->add_option("--defect", rep.defect, "freezing, oscillation, vibration1 or vibration2")->required();
  c_rep->add_option("--config", rep.config, "Repair parameters (JSON)");
  c_rep->add_option("--h", rep.h, "Threshold increment for vibration1");
  c_rep->add_option("--out", rep.out, "Fresh output directory")->required();
  c_rep->add_option("--jobs", rep.jobs, "Concurrent rollouts");

  ReportArgs rpt;
  auto* c_rpt = app.add_subcommand("report", "Before/after comparison with modification efficiency");
  c_rpt->add_option("--before", rpt.before, "eval.json before the repair")->required();
  c_rpt->add_option("--after", rpt.after, "eval.json after the repair")->required();
  c_rpt->add_option("--log", rpt.log, "repair_log.json")->required();
  c_rpt->add_option("--metric", rpt.metric, "Report field (default: the log's target metric)");
  c_rpt->add_option("--policy", rpt.policy, "Policy entry in the eval documents");
  c_rpt->add_option("--scenario", rpt.scenario, "Scenario position in the eval documents");
  c_rpt->add_option("--out", rpt.out, "Fresh output directory")->required();

  CoverageArgs cov;
  auto* c_cov = app.add_subcommand("coverage", "Critical-state coverage probabilities");
  c_cov->add_option("--config", cov.config, "Coverage parameters (JSON)")->required();
  c_cov->add_option("--out", cov.out, "Fresh output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*c_train) train_expert(train);
    else if (*c_dist) distill(dist);
    else if (*c_eval) eval(ev);
    else if (*c_rep) repair(rep);
    else if (*c_rpt) report(rpt);
    else if (*c_cov) coverage(cov);
  } catch (const msviper::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const msviper::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
