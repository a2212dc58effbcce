#include "taxicab/tree.hpp"

#include <cmath>
#include <stdexcept>

namespace taxicab {

Tree::Tree() { nodes_.emplace_back(); }

int Tree::alloc() {
  if (!free_.empty()) {
    int id = free_.back();
    free_.pop_back();
    nodes_[static_cast<size_t>(id)] = TreeNode{};
    return id;
  }
  nodes_.emplace_back();
  return static_cast<int>(nodes_.size()) - 1;
}

int Tree::depth(int id) const {
  int d = 0;
  while (nodes_[static_cast<size_t>(id)].parent >= 0) {
    id = nodes_[static_cast<size_t>(id)].parent;
    ++d;
  }
  return d;
}

namespace {

template <typename Pred>
void collect(const Tree& t, int id, Pred&& pred, std::vector<int>& out) {
  const TreeNode& n = t.node(id);
  if (pred(n)) out.push_back(id);
  if (!n.is_leaf()) {
    collect(t, n.left, pred, out);
    collect(t, n.right, pred, out);
  }
}

}  // namespace

std::vector<int> Tree::leaves() const {
  std::vector<int> out;
  collect(*this, root_, [](const TreeNode& n) { return n.is_leaf(); }, out);
  return out;
}

std::vector<int> Tree::internals() const {
  std::vector<int> out;
  collect(*this, root_, [](const TreeNode& n) { return !n.is_leaf(); }, out);
  return out;
}

std::vector<int> Tree::prunable() const {
  std::vector<int> out;
  collect(
      *this, root_,
      [this](const TreeNode& n) {
        return !n.is_leaf() && node(n.left).is_leaf() && node(n.right).is_leaf();
      },
      out);
  return out;
}

int Tree::leaf_count() const { return static_cast<int>(leaves().size()); }
int Tree::internal_count() const { return static_cast<int>(internals().size()); }

std::pair<int, int> Tree::birth(int leaf_id, SplitRule rule) {
  if (!node(leaf_id).is_leaf()) throw std::logic_error("tree: birth on an internal node");
  int l = alloc();
  int r = alloc();
  TreeNode& n = node(leaf_id);
  n.rule = rule;
  n.left = l;
  n.right = r;
  node(l).parent = leaf_id;
  node(r).parent = leaf_id;
  return {l, r};
}

void Tree::death(int internal_id) {
  TreeNode& n = node(internal_id);
  if (n.is_leaf() || !node(n.left).is_leaf() || !node(n.right).is_leaf())
    throw std::logic_error("tree: death requires an internal node with two leaf children");
  free_.push_back(n.left);
  free_.push_back(n.right);
  n.left = -1;
  n.right = -1;
  n.rule = SplitRule{};
}

CutpointGrid CutpointGrid::make(const std::vector<std::vector<double>>& rows, int zeta) {
  if (rows.empty()) throw std::invalid_argument("cutpoints: no data");
  if (zeta < 1) throw std::invalid_argument("cutpoints: zeta must be >= 1");
  size_t p = rows.front().size();
  CutpointGrid grid;
  grid.cuts.resize(p);
  for (size_t v = 0; v < p; ++v) {
    double lo = rows.front()[v];
    double hi = lo;
    for (const auto& row : rows) {
      lo = std::min(lo, row[v]);
      hi = std::max(hi, row[v]);
    }
    if (!(hi > lo)) throw std::invalid_argument("cutpoints: constant covariate");
    grid.cuts[v].resize(static_cast<size_t>(zeta));
    for (int j = 0; j < zeta; ++j) {
      grid.cuts[v][static_cast<size_t>(j)] =
          lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(zeta + 1);
    }
  }
  return grid;
}

void TreePrior::validate() const {
  if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("tree prior: alpha must lie in (0, 1)");
  if (beta <= 0.0) throw std::invalid_argument("tree prior: beta must be > 0");
}

double TreePrior::split_prob(int depth) const {
  return alpha * std::pow(1.0 + static_cast<double>(depth), -beta);
}

double TreePrior::log_split(int depth) const { return std::log(split_prob(depth)); }

double TreePrior::log_stay(int depth) const { return std::log1p(-split_prob(depth)); }

int route(const Tree& tree, const CutpointGrid& grid, const std::vector<double>& x) {
  int id = tree.root();
  while (!tree.node(id).is_leaf()) {
    const SplitRule& rule = tree.node(id).rule;
    id = (x[static_cast<size_t>(rule.var)] < grid.value(rule.var, rule.cut)) ? tree.node(id).left
                                                                             : tree.node(id).right;
  }
  return id;
}

}  // namespace taxicab
