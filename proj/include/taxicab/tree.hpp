#pragma once

#include <cstdint>
#include <vector>

namespace taxicab {

struct SplitRule {
  int var = -1;
  int cut = -1;  // index into the cutpoint grid for var
};

struct TreeNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  SplitRule rule;    // internal nodes only
  long lambda = 0;   // leaf payload
  long k = 0;        // leaf payload (raw scale)
  double rho = 0.0;  // leaf payload, zero-inflated model only

  bool is_leaf() const { return left < 0; }
};

// Binary decision tree backed by a slot vector with a free list, so node ids
// stay stable across birth/death edits and copies are plain vector copies.
class Tree {
 public:
  Tree();

  int root() const { return root_; }
  const TreeNode& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  TreeNode& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  int capacity() const { return static_cast<int>(nodes_.size()); }

  int depth(int id) const;
  std::vector<int> leaves() const;     // preorder
  std::vector<int> internals() const;  // preorder
  std::vector<int> prunable() const;   // internal nodes with two leaf children, preorder
  int leaf_count() const;
  int internal_count() const;

  // Split a leaf: it becomes internal with the given rule, two fresh leaves
  // are attached. Returns {left_id, right_id}.
  std::pair<int, int> birth(int leaf_id, SplitRule rule);

  // Collapse an internal node whose children are both leaves.
  void death(int internal_id);

 private:
  int alloc();
  std::vector<TreeNode> nodes_;
  std::vector<int> free_;
  int root_ = 0;
};

// Per-covariate grids of equally spaced cutpoints strictly inside the
// observed range of each covariate.
struct CutpointGrid {
  std::vector<std::vector<double>> cuts;

  static CutpointGrid make(const std::vector<std::vector<double>>& rows, int zeta);

  int vars() const { return static_cast<int>(cuts.size()); }
  int size(int var) const { return static_cast<int>(cuts[static_cast<size_t>(var)].size()); }
  double value(int var, int idx) const { return cuts[static_cast<size_t>(var)][static_cast<size_t>(idx)]; }
};

// Depth-penalized split prior: a node at depth d is internal with probability
// alpha (1+d)^{-beta}; split rules are uniform over covariates and cutpoints.
struct TreePrior {
  double alpha = 0.95;
  double beta = 4.0;

  void validate() const;
  double split_prob(int depth) const;
  double log_split(int depth) const;
  double log_stay(int depth) const;
};

// Deterministic routing: x goes left at an internal node when
// x[rule.var] < cut value.
int route(const Tree& tree, const CutpointGrid& grid, const std::vector<double>& x);

}  // namespace taxicab
