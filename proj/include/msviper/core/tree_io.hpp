#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "msviper/core/tree.hpp"

namespace msviper {

inline constexpr int kTreeFormatVersion = 1;

/// Decimal string with 17 significant digits; reads back bit-exactly.
std::string format_double(double value);
/// Inverse of format_double; accepts "inf"/"-inf". Throws InputError.
double parse_double(const std::string& text);

nlohmann::json layout_to_json(const StateLayout& layout);
StateLayout layout_from_json(const nlohmann::json& doc);

nlohmann::json actions_to_json(const ActionCatalog& actions);
ActionCatalog actions_from_json(const nlohmann::json& doc);

/// Tree document: {format_version, layout, actions, root_id, nodes}. Branch
/// thresholds are decimal strings so the file round-trips bit-exactly.
nlohmann::json tree_to_json(const DecisionTreePolicy& tree);
DecisionTreePolicy tree_from_json(const nlohmann::json& doc);

std::string serialize_tree(const DecisionTreePolicy& tree);
void save_tree(const DecisionTreePolicy& tree, const std::filesystem::path& path);
DecisionTreePolicy load_tree(const std::filesystem::path& path);

/// Reads a whole JSON file; throws InputError when missing or malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `doc` with 2-space indentation and a trailing newline.
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

}  // namespace msviper
