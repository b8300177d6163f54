#include "msviper/cart/pairset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "msviper/core/errors.hpp"
#include "msviper/core/tree_io.hpp"

namespace msviper::cart {

void PairSet::add(std::span<const double> state, ActionId action) {
  if (weighted()) {
    add(state, action, 1.0);
    return;
  }
  if (empty() && dim_ == 0) dim_ = state.size();
  if (state.size() != dim_) throw DimensionError("pair state does not match the set dimension");
  states_.insert(states_.end(), state.begin(), state.end());
  actions_.push_back(action);
}

void PairSet::add(std::span<const double> state, ActionId action, double weight) {
  if (!std::isfinite(weight) || weight < 0.0) {
    throw ConfigError("pair weights must be finite and nonnegative");
  }
  if (!weighted()) weights_.assign(actions_.size(), 1.0);
  if (empty() && dim_ == 0) dim_ = state.size();
  if (state.size() != dim_) throw DimensionError("pair state does not match the set dimension");
  states_.insert(states_.end(), state.begin(), state.end());
  actions_.push_back(action);
  weights_.push_back(weight);
}

void PairSet::append(const PairSet& other) {
  if (other.empty()) return;
  if (empty() && dim_ == 0) dim_ = other.dim_;
  if (other.dim_ != dim_) throw DimensionError("cannot append pairs of a different dimension");
  if (other.weighted() && !weighted()) weights_.assign(actions_.size(), 1.0);
  states_.insert(states_.end(), other.states_.begin(), other.states_.end());
  actions_.insert(actions_.end(), other.actions_.begin(), other.actions_.end());
  if (weighted()) {
    for (std::size_t i = 0; i < other.size(); ++i) weights_.push_back(other.weight(i));
  }
}

void PairSet::reserve(std::size_t n) {
  states_.reserve(n * dim_);
  actions_.reserve(n);
}

PairSet PairSet::subset(std::span<const std::size_t> rows) const {
  PairSet out(dim_);
  out.reserve(rows.size());
  for (const std::size_t r : rows) {
    if (weighted()) {
      out.add(state(r), action(r), weight(r));
    } else {
      out.add(state(r), action(r));
    }
  }
  return out;
}

void save_pairs_csv(const PairSet& pairs, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t f = 0; f < pairs.dimension(); ++f) out << 'f' << f << ',';
  out << "action";
  if (pairs.weighted()) out << ",weight";
  out << '\n';
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (const double v : pairs.state(i)) out << format_double(v) << ',';
    out << pairs.action(i);
    if (pairs.weighted()) out << ',' << format_double(pairs.weight(i));
    out << '\n';
  }
  write_text_file(out.str(), path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

PairSet load_pairs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + " is empty");
  const auto header = split_csv(line);
  bool has_weight = !header.empty() && header.back() == "weight";
  const std::size_t label_col = header.size() - (has_weight ? 2 : 1);
  if (header.size() < 2 || header[label_col] != "action") {
    throw InputError(path.string() + ": header must end with action[,weight]");
  }
  for (std::size_t f = 0; f < label_col; ++f) {
    if (header[f] != "f" + std::to_string(f)) {
      throw InputError(path.string() + ": unexpected column '" + header[f] + "'");
    }
  }
  PairSet pairs(label_col);
  std::vector<double> state(label_col);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    for (std::size_t f = 0; f < label_col; ++f) state[f] = parse_double(cells[f]);
    const auto action = static_cast<ActionId>(parse_double(cells[label_col]));
    if (has_weight) {
      pairs.add(state, action, parse_double(cells.back()));
    } else {
      pairs.add(state, action);
    }
  }
  return pairs;
}

}  // namespace msviper::cart
