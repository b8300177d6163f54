#include "msviper/core/errors.hpp"
#include "msviper/treemod/treemod.hpp"

namespace msviper::treemod {

using nlohmann::json;

const char* to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::action_changed: return "action_changed";
    case ChangeKind::threshold_changed: return "threshold_changed";
    case ChangeKind::node_split_added: return "node_split_added";
  }
  return "action_changed";
}

namespace {

ChangeKind change_kind_from_string(const std::string& s) {
  if (s == "action_changed") return ChangeKind::action_changed;
  if (s == "threshold_changed") return ChangeKind::threshold_changed;
  if (s == "node_split_added") return ChangeKind::node_split_added;
  throw InputError("unknown change kind '" + s + "'");
}

}  // namespace

json log_to_json(const RepairLog& log) {
  json changes = json::array();
  for (const auto& c : log.changes) {
    changes.push_back({{"node_id", c.node_id}, {"kind", to_string(c.kind)}, {"before", c.before}, {"after", c.after}});
  }
  return {{"defect", log.defect},       {"target_metric", log.target_metric},
          {"detected", log.detected},   {"changes", changes},
          {"N_1", log.N_1},             {"N_plus", log.N_plus},
          {"notes", log.notes}};
}

RepairLog log_from_json(const json& doc) {
  try {
    RepairLog log;
    log.defect = doc.at("defect").get<std::string>();
    log.target_metric = doc.at("target_metric").get<std::string>();
    log.detected = doc.at("detected").get<std::vector<NodeId>>();
    for (const auto& c : doc.at("changes")) {
      log.changes.push_back({c.at("node_id").get<NodeId>(), change_kind_from_string(c.at("kind").get<std::string>()),
                             c.at("before"), c.at("after")});
    }
    log.N_1 = doc.at("N_1").get<long long>();
    log.N_plus = doc.at("N_plus").get<long long>();
    if (doc.contains("notes")) log.notes = doc.at("notes").get<std::vector<std::string>>();
    return log;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed repair log: ") + e.what());
  }
}

metrics::EfficiencyResult efficiency(double M_1, double M_2, const RepairLog& log) {
  return metrics::efficiency(M_1, M_2, log.N_plus, log.N_1);
}

}  // namespace msviper::treemod
