#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace msviper::cli {

namespace fs = std::filesystem;

struct TrainExpertArgs {
  fs::path config;
  fs::path out;
};

struct DistillArgs {
  fs::path config;
  fs::path expert;
  fs::path out;
  std::string mode = "msviper";
  std::optional<int> jobs;
};

struct EvalArgs {
  fs::path config;
  std::optional<fs::path> tree;
  std::optional<fs::path> expert;
  fs::path out;
  std::optional<int> jobs;
};

struct RepairArgs {
  fs::path tree;
  std::string defect;
  std::optional<fs::path> config;
  std::optional<double> h;
  fs::path out;
  std::optional<int> jobs;
};

struct ReportArgs {
  fs::path before;
  fs::path after;
  fs::path log;
  std::optional<std::string> metric;
  std::string policy = "tree";
  int scenario = 0;
  fs::path out;
};

struct CoverageArgs {
  fs::path config;
  fs::path out;
};

void train_expert(const TrainExpertArgs& args);
void distill(const DistillArgs& args);
void eval(const EvalArgs& args);
void repair(const RepairArgs& args);
void report(const ReportArgs& args);
void coverage(const CoverageArgs& args);

}  // namespace msviper::cli
