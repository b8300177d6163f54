#include <fstream>
#include <sstream>

#include "msviper/core/errors.hpp"
#include "msviper/core/tree_io.hpp"
#include "msviper/expert/expert.hpp"

namespace msviper::expert {

using nlohmann::json;

void save_expert(const ExpertPolicy& expert, const std::filesystem::path& manifest_path,
                 const std::string& table_file) {
  json doc;
  doc["kind"] = expert.kind();
  doc["params"] = expert.params_json();
  doc["layout"] = layout_to_json(expert.layout());
  if (const auto* q = dynamic_cast<const QExpert*>(&expert)) {
    doc["seed"] = q->params().seed;
    doc["table"] = table_file;
    write_text_file(serialize_qtable(q->table()), manifest_path.parent_path() / table_file);
  }
  write_json_file(doc, manifest_path);
}

std::shared_ptr<ExpertPolicy> load_expert(const std::filesystem::path& manifest_path) {
  const json doc = read_json_file(manifest_path);
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    const StateLayout layout = layout_from_json(doc.at("layout"));
    if (kind == "q_table") {
      const auto table_path = manifest_path.parent_path() / doc.at("table").get<std::string>();
      std::ifstream in(table_path, std::ios::binary);
      if (!in) throw InputError("cannot read Q-table " + table_path.string());
      std::ostringstream text;
      text << in.rdbuf();
      const ActionCatalog actions = default_actions();
      return std::make_shared<QExpert>(layout, actions, parse_qtable(text.str(), actions.size()),
                                       qparams_from_json(doc.at("params")));
    }
    return scripted_expert(kind, layout, scripted_params_from_json(doc.at("params")));
  } catch (const json::exception& e) {
    throw InputError("malformed expert manifest " + manifest_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw InputError("malformed expert manifest " + manifest_path.string() + ": " + e.what());
  }
}

}  // namespace msviper::expert
