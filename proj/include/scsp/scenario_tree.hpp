// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scenario tree of a staged model.
//
// The root sits at depth 0 (nothing observed). A node at depth d has one
// child per joint outcome of the stage-(d+1) stochastic variables, so nodes
// at depth d carry the history of stages 1..d and the leaves (depth m) are
// the scenarios. A stage without stochastic variables still adds a level
// whose nodes have a single child of probability 1.

#include "scsp/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scsp {

struct SizeLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using NodeId = std::size_t;

struct TreeNode {
    NodeId id = 0;
    std::size_t depth = 0;
    std::optional<NodeId> parent;
    std::size_t level_index = 0; // position among the nodes of the same depth
    Rational edge_prob{1};
    Rational mass{1};            // product of edge probabilities from the root
    // Values of every stochastic variable observed so far, indexed like
    // model.stochastics; entries for later stages are unset.
    std::vector<std::optional<std::int64_t>> history;
    std::vector<NodeId> children;
};

struct Scenario {
    std::size_t index = 0; // position among the leaves
    NodeId leaf = 0;
    std::vector<std::int64_t> values; // full stochastic assignment
    Rational prob{1};
};

struct ScenarioTree {
    std::size_t stage_count = 0;
    std::vector<TreeNode> nodes;               // nodes[0] is the root
    std::vector<std::vector<NodeId>> levels;   // levels[d] = nodes at depth d, in order
    std::vector<Scenario> scenarios;           // one per leaf, in level order

    const TreeNode& node(NodeId id) const { return nodes.at(id); }

    // Ancestor of `id` at depth `depth` (the node itself when depths match).
    NodeId ancestor(NodeId id, std::size_t depth) const {
        while (nodes[id].depth > depth) id = *nodes[id].parent;
        return id;
    }
};

inline constexpr std::size_t default_max_scenarios = 100000;

// Number of leaves the tree would have, saturating at max+1.
inline std::size_t scenario_count(const StochasticModel& m, std::size_t max = SIZE_MAX - 1) {
    std::size_t count = 1;
    for (const auto& v : m.stochastics) {
        std::size_t k = v.distribution.size();
        if (k != 0 && count > (max + 1) / k) return max + 1;
        count *= k;
    }
    return count;
}

// Expands the full tree. Children of a node enumerate the Cartesian product
// of the next stage's outcomes with the first declared variable varying
// slowest and values in declaration order.
inline ScenarioTree build_scenario_tree(const StochasticModel& m,
                                        std::size_t max_scenarios = default_max_scenarios) {
    std::size_t leaves = scenario_count(m, max_scenarios);
    if (leaves > max_scenarios)
        throw SizeLimitError("scenario tree exceeds " + std::to_string(max_scenarios) + " leaves");

    ScenarioTree tree;
    tree.stage_count = static_cast<std::size_t>(m.stage_count);
    TreeNode root;
    root.history.assign(m.stochastics.size(), std::nullopt);
    tree.nodes.push_back(root);
    tree.levels.push_back({0});

    for (std::size_t depth = 1; depth <= tree.stage_count; ++depth) {
        std::vector<std::size_t> stage_vars;
        for (std::size_t i = 0; i < m.stochastics.size(); ++i)
            if (static_cast<std::size_t>(m.stochastics[i].stage) == depth) stage_vars.push_back(i);

        std::vector<NodeId> level;
        for (NodeId parent_id : tree.levels[depth - 1]) {
            // odometer over the outcomes of this stage's variables
            std::vector<std::size_t> pick(stage_vars.size(), 0);
            for (bool more = true; more;) {
                TreeNode child;
                child.id = tree.nodes.size();
                child.depth = depth;
                child.parent = parent_id;
                child.level_index = level.size();
                child.history = tree.nodes[parent_id].history;
                Rational p(1);
                for (std::size_t k = 0; k < stage_vars.size(); ++k) {
                    const Outcome& o = m.stochastics[stage_vars[k]].distribution[pick[k]];
                    child.history[stage_vars[k]] = o.value;
                    p *= o.prob;
                }
                child.edge_prob = p;
                child.mass = tree.nodes[parent_id].mass * p;
                tree.nodes[parent_id].children.push_back(child.id);
                level.push_back(child.id);
                tree.nodes.push_back(std::move(child));

                more = false;
                for (std::size_t k = stage_vars.size(); k-- > 0;) {
                    if (++pick[k] < m.stochastics[stage_vars[k]].distribution.size()) {
                        more = true;
                        break;
                    }
                    pick[k] = 0;
                }
            }
        }
        tree.levels.push_back(std::move(level));
    }

    for (NodeId leaf : tree.levels.back()) {
        Scenario s;
        s.index = tree.scenarios.size();
        s.leaf = leaf;
        for (const auto& h : tree.nodes[leaf].history) s.values.push_back(h.value_or(0));
        s.prob = tree.nodes[leaf].mass;
        tree.scenarios.push_back(std::move(s));
    }
    return tree;
}

// Product of the marginal probabilities along the leaf's history.
inline Rational scenario_probability(const ScenarioTree& tree, NodeId leaf) {
    Rational p(1);
    for (std::optional<NodeId> id = leaf; id; id = tree.nodes[*id].parent) p *= tree.nodes[*id].edge_prob;
    return p;
}

// ---------------------------------------------------------------------------
// Policies

// One decision slot: decision variable `decision` at the depth-(stage-1)
// node `node`. Slots are ordered by (stage, node, declaration).
struct PolicySlot {
    std::size_t decision = 0;
    NodeId node = 0;
};

struct PolicyLayout {
    std::vector<PolicySlot> slots;
    // slot_of[decision][level_index of the node at depth stage-1]
    std::vector<std::vector<std::size_t>> slot_of;

    std::size_t slot(std::size_t decision, const ScenarioTree& tree, NodeId node) const {
        return slot_of[decision][tree.node(node).level_index];
    }
};

inline PolicyLayout make_policy_layout(const StochasticModel& m, const ScenarioTree& tree) {
    PolicyLayout layout;
    layout.slot_of.resize(m.decisions.size());
    for (std::size_t d = 0; d < m.decisions.size(); ++d)
        layout.slot_of[d].resize(tree.levels[static_cast<std::size_t>(m.decisions[d].stage) - 1].size());
    for (int stage = 1; stage <= m.stage_count; ++stage) {
        for (NodeId node : tree.levels[static_cast<std::size_t>(stage) - 1]) {
            for (std::size_t d = 0; d < m.decisions.size(); ++d) {
                if (m.decisions[d].stage != stage) continue;
                layout.slot_of[d][tree.node(node).level_index] = layout.slots.size();
                layout.slots.push_back({d, node});
            }
        }
    }
    return layout;
}

// A value for every policy slot, indexed like PolicyLayout::slots.
struct Policy {
    std::vector<std::int64_t> values;

    friend bool operator==(const Policy&, const Policy&) = default;
};

// "w1=0,w2=1" for the stochastic values observed at `node`; "" at the root.
inline std::string render_history(const StochasticModel& m, const ScenarioTree& tree, NodeId node) {
    std::string out;
    const auto& h = tree.node(node).history;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!h[i]) continue;
        if (!out.empty()) out += ",";
        out += m.stochastics[i].name + "=" + std::to_string(*h[i]);
    }
    return out;
}

} // namespace scsp
