#include <doctest.h>

#include <cmath>
#include <set>

#include "msviper/core/actions.hpp"
#include "msviper/core/errors.hpp"
#include "msviper/core/random.hpp"
#include "msviper/core/tree.hpp"
#include "msviper/core/tree_io.hpp"
#include "random_tree.hpp"

using namespace msviper;

TEST_CASE("catalog holds every velocity pair once") {
  const auto actions = default_actions();
  REQUIRE(actions.size() == 15);
  std::set<std::pair<double, double>> pairs;
  for (const auto& a : actions) pairs.insert({a.linear, a.angular});
  CHECK(pairs.size() == 15);
  for (double l : {0.0, 0.4, 1.0}) {
    for (double w : {-1.0, -0.4, 0.0, 0.4, 1.0}) CHECK(pairs.contains({l, w}));
  }
  CHECK(actions[kStopAction].linear == 0.0);
  CHECK(actions[kStopAction].angular == 0.0);
  CHECK(actions[kRotateRightAction].angular < 0.0);
  CHECK(actions[kRotateLeftAction].angular > 0.0);
  CHECK_NOTHROW(validate_catalog(actions));
  auto broken = actions;
  broken[2].id = 7;
  CHECK_THROWS_AS(validate_catalog(broken), ConfigError);
}

TEST_CASE("reduced-magnitude action never grows either velocity") {
  const auto actions = default_actions();
  CHECK(reduced_magnitude_action(actions, 0) == 13);
  CHECK(reduced_magnitude_action(actions, 4) == 14);
  CHECK(reduced_magnitude_action(actions, 3) == 3);
  for (const auto& a : actions) {
    const auto& r = actions[reduced_magnitude_action(actions, a.id)];
    CHECK(std::fabs(r.linear) <= std::fabs(a.linear));
    CHECK(std::fabs(r.angular) <= std::fabs(a.angular));
  }
}

TEST_CASE("layout dimensions and index groups") {
  CHECK(StateLayout::desk().dimension() == 48);
  CHECK(StateLayout::full().dimension() == 213);
  const auto td = StateLayout::terrain_desk();
  CHECK(td.dimension() == 56);
  CHECK(td.group(kAngularVelocityGroup).size() == 8);
  const auto tf = StateLayout::terrain_full();
  const std::vector<std::size_t> expected{872, 873, 883, 884, 894, 895, 905, 906};
  CHECK(tf.group(kAngularVelocityGroup) == expected);
  const auto d = StateLayout::desk();
  CHECK(d.occupancy_index(1, 0, 0) == d.cells_per_slice());
  CHECK(d.goal_distance_index() == d.occupancy_size());
  CHECK(d.is_right_column(0));
  CHECK(d.is_left_column(d.occupancy_columns - 1));
  CHECK_FALSE(d.is_right_column(2));
  CHECK_THROWS_AS(d.check_state(std::vector<double>(47, 0.0)), DimensionError);
}

TEST_CASE("routing matches a recursive reference on random trees") {
  const auto layout = StateLayout::desk();
  const auto actions = default_actions();
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const auto tree = testing_support::random_tree(
        layout, actions, rng, 6, 0.2, [&](Rng& r) { return static_cast<int>(r.below(layout.dimension())); },
        [](Rng& r, int) { return std::round(r.uniform(-1.0, 1.0) * 4.0) / 4.0; });
    const auto ref = testing_support::oracle_nodes(tree);
    for (int s = 0; s < 200; ++s) {
      StateVector x(layout.dimension());
      // Quarter steps land exactly on thresholds fairly often.
      for (auto& v : x) v = std::round(rng.uniform(-1.2, 1.2) * 4.0) / 4.0;
      const int leaf = oracle::route(ref, tree.root(), x);
      REQUIRE(tree.leaf_for(x) == leaf);
      CHECK(tree.predict(x) == ref[static_cast<std::size_t>(leaf)].action);
      // The leaf's box holds the state; no other leaf's box does.
      for (NodeId l : tree.leaves()) CHECK(tree.subspace(l).contains(x) == (l == leaf));
    }
  }
}

TEST_CASE("subspace bounds follow the routing convention") {
  const auto layout = StateLayout::desk();
  const std::vector<TreeNode> nodes{TreeNode::branch(0, 2, 0.5, 1, 2), TreeNode::leaf(1, 3),
                                    TreeNode::leaf(2, 4)};
  const DecisionTreePolicy tree(layout, default_actions(), nodes, 0);
  const auto left = tree.subspace(1);
  const auto right = tree.subspace(2);
  CHECK(left.upper[2] == 0.5);
  CHECK(std::isinf(left.lower[2]));
  CHECK(right.lower[2] == 0.5);
  StateVector x(layout.dimension(), 0.0);
  x[2] = 0.5;
  CHECK(left.contains(x));
  CHECK_FALSE(right.contains(x));
  const auto clipped = left.clipped(layout);
  CHECK(clipped.lower[2] == 0.0);
  CHECK(clipped.upper[2] == 0.5);
  CHECK(clipped.is_subset_of(left));
}

TEST_CASE("edits keep ids stable and append new leaves") {
  auto tree = DecisionTreePolicy::single_leaf(StateLayout::desk(), default_actions(), 2);
  const auto [l, r] = tree.split_leaf(0, 4, 0.25, 1, 5);
  CHECK(l == 1);
  CHECK(r == 2);
  CHECK(tree.stats().node_count == 3);
  CHECK(tree.parent(1) == std::optional<NodeId>(0));
  tree.set_action(1, 3);
  CHECK(tree.node(1).action == 3);
  tree.set_threshold(0, 0.75);
  CHECK(tree.node(0).threshold == 0.75);
  CHECK_THROWS(tree.set_threshold(1, 0.1));
  CHECK(tree.path_to(2) == std::vector<NodeId>{0, 2});
}

TEST_CASE("malformed trees are rejected") {
  const auto layout = StateLayout::desk();
  const auto actions = default_actions();
  CHECK_THROWS_AS(DecisionTreePolicy(layout, actions, {TreeNode::branch(0, 1, 0.0, 0, 0)}, 0), ConfigError);
  CHECK_THROWS_AS(DecisionTreePolicy(layout, actions, {TreeNode::leaf(0, 99)}, 0), ConfigError);
  CHECK_THROWS_AS(DecisionTreePolicy(layout, actions, {TreeNode::branch(0, 999, 0.0, 1, 2), TreeNode::leaf(1, 0),
                                                       TreeNode::leaf(2, 0)},
                                     0),
                  ConfigError);
}

TEST_CASE("tree documents round-trip bit-exactly") {
  const auto layout = StateLayout::terrain_desk();
  Rng rng(19);
  const auto tree = testing_support::random_tree(
      layout, default_actions(), rng, 5, 0.1,
      [&](Rng& r) { return static_cast<int>(r.below(layout.dimension())); },
      [](Rng& r, int) { return r.uniform(-1.0, 1.0) / 3.0; });
  const std::string text = serialize_tree(tree);
  const auto back = tree_from_json(nlohmann::json::parse(text));
  CHECK(back == tree);
  CHECK(serialize_tree(back) == text);
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) CHECK(parse_double(format_double(v)) == v);
  CHECK(std::isinf(parse_double("inf")));
  CHECK_THROWS_AS(parse_double("abc"), InputError);
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.below(7) < 7);
  }
}
