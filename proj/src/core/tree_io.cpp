#include "msviper/core/tree_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "msviper/core/errors.hpp"

namespace msviper {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  // %.17g: enough significant digits to read back the identical double.
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError("not a decimal number: '" + text + "'");
  }
  return value;
}

namespace {

double number_or_string(const json& v) {
  if (v.is_string()) return parse_double(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  throw InputError("expected a number or decimal string");
}

template <class T>
T required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json layout_to_json(const StateLayout& layout) {
  json doc;
  doc["occupancy_columns"] = layout.occupancy_columns;
  doc["occupancy_rows"] = layout.occupancy_rows;
  doc["timesteps"] = layout.timesteps;
  doc["goal_features"] = layout.goal_features;
  doc["prev_action_features"] = layout.prev_action_features;
  doc["extra_features"] = layout.extra_features;
  json groups = json::object();
  for (const auto& [name, indices] : layout.named_index_groups) groups[name] = indices;
  doc["named_index_groups"] = groups;
  json ranges = json::array();
  for (const auto& r : layout.ranges) {
    ranges.push_back(json::array({format_double(r.lower), format_double(r.upper)}));
  }
  doc["ranges"] = ranges;
  return doc;
}

StateLayout layout_from_json(const json& doc) {
  StateLayout layout;
  layout.occupancy_columns = required<int>(doc, "occupancy_columns");
  layout.occupancy_rows = required<int>(doc, "occupancy_rows");
  layout.timesteps = required<int>(doc, "timesteps");
  layout.goal_features = required<int>(doc, "goal_features");
  layout.prev_action_features = required<int>(doc, "prev_action_features");
  layout.extra_features = required<int>(doc, "extra_features");
  if (doc.contains("named_index_groups")) {
    for (const auto& [name, indices] : doc.at("named_index_groups").items()) {
      layout.named_index_groups[name] = indices.get<std::vector<std::size_t>>();
    }
  }
  if (doc.contains("ranges")) {
    for (const auto& r : doc.at("ranges")) {
      if (!r.is_array() || r.size() != 2) throw InputError("range entries must be [lower, upper]");
      layout.ranges.push_back({number_or_string(r[0]), number_or_string(r[1])});
    }
  }
  try {
    layout.validate();
  } catch (const LayoutError& e) {
    throw InputError(std::string("invalid layout: ") + e.what());
  }
  return layout;
}

json actions_to_json(const ActionCatalog& actions) {
  json arr = json::array();
  for (const auto& a : actions) {
    arr.push_back({{"id", a.id}, {"linear", a.linear}, {"angular", a.angular}});
  }
  return arr;
}

ActionCatalog actions_from_json(const json& doc) {
  if (!doc.is_array()) throw InputError("actions must be an array");
  ActionCatalog actions;
  for (const auto& a : doc) {
    actions.push_back({required<int>(a, "id"), number_or_string(a.at("linear")),
                       number_or_string(a.at("angular"))});
  }
  try {
    validate_catalog(actions);
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }
  return actions;
}

json tree_to_json(const DecisionTreePolicy& tree) {
  json doc;
  doc["format_version"] = kTreeFormatVersion;
  doc["layout"] = layout_to_json(tree.layout());
  doc["actions"] = actions_to_json(tree.actions());
  doc["root_id"] = tree.root();
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back({{"id", n.id}, {"action", n.action}});
    } else {
      nodes.push_back({{"id", n.id},
                       {"feature", n.feature},
                       {"threshold", format_double(n.threshold)},
                       {"left", n.left},
                       {"right", n.right}});
    }
  }
  doc["nodes"] = nodes;
  return doc;
}

DecisionTreePolicy tree_from_json(const json& doc) {
  const int version = required<int>(doc, "format_version");
  if (version != kTreeFormatVersion) {
    throw InputError("unsupported tree format_version " + std::to_string(version));
  }
  StateLayout layout = layout_from_json(doc.at("layout"));
  ActionCatalog actions = actions_from_json(doc.at("actions"));
  std::vector<TreeNode> nodes;
  for (const auto& n : doc.at("nodes")) {
    const int id = required<int>(n, "id");
    if (n.contains("action")) {
      nodes.push_back(TreeNode::leaf(id, required<int>(n, "action")));
    } else {
      nodes.push_back(TreeNode::branch(id, required<int>(n, "feature"),
                                       number_or_string(n.at("threshold")),
                                       required<int>(n, "left"), required<int>(n, "right")));
    }
  }
  try {
    return DecisionTreePolicy(std::move(layout), std::move(actions), std::move(nodes),
                              required<int>(doc, "root_id"));
  } catch (const ConfigError& e) {
    throw InputError(std::string("invalid tree: ") + e.what());
  }
}

std::string serialize_tree(const DecisionTreePolicy& tree) {
  return tree_to_json(tree).dump(2) + "\n";
}

void save_tree(const DecisionTreePolicy& tree, const std::filesystem::path& path) {
  write_text_file(serialize_tree(tree), path);
}

DecisionTreePolicy load_tree(const std::filesystem::path& path) {
  return tree_from_json(read_json_file(path));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  write_text_file(doc.dump(2) + "\n", path);
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace msviper
