#pragma once

#include <cstdint>
#include <vector>

#include "gwlab/errors.hpp"

namespace gwlab {

// Lazily discovered rooted tree. Only visited vertices are stored; ids are
// dense and assigned in discovery order, so a vertex discovered later always
// has a larger id than everything outside its subtree. Child counts are
// assigned exactly once, on first entry, from the shared offspring stream.
//
// prune_below(keep) drops every vertex with id < keep and turns `keep` into a
// parentless virtual root. This is sound whenever `keep` was discovered at a
// regeneration time: the walk never returns below it, and all later ids lie in
// its subtree, so the live set is a contiguous id range.
class LazyTree {
 public:
  static constexpr std::int64_t npos = -1;

  explicit LazyTree(int root_child_count, std::int64_t max_live_vertices = 1ll << 25)
      : max_live_(max_live_vertices) {
    nodes_.push_back(Node{npos, 0, root_child_count, 0});
    slots_.assign(static_cast<size_t>(root_child_count), npos);
  }

  std::int64_t root_id() const { return base_; }
  bool at_real_root(std::int64_t id) const { return id == 0; }

  std::int64_t parent_of(std::int64_t id) const { return node(id).parent; }
  int count_of(std::int64_t id) const { return node(id).count; }
  int depth_of(std::int64_t id) const { return node(id).depth; }

  struct Entry {
    std::int64_t id;
    bool discovered;
  };

  // Move into child `index` (1-based) of `id`, materializing it if this is the
  // first visit; a fresh vertex takes `count_if_new` children.
  Entry enter_child(std::int64_t id, int index, int count_if_new) {
    const Node n = node(id);
    std::int64_t* cell = &slots_[static_cast<size_t>(n.slot_begin + (index - 1) - slot_base_)];
    if (*cell != npos) return {*cell, false};
    if (static_cast<std::int64_t>(nodes_.size()) >= max_live_)
      throw capacity_error("tree vertex arena exhausted");
    const std::int64_t nid = base_ + static_cast<std::int64_t>(nodes_.size());
    const std::int64_t sb = slot_base_ + static_cast<std::int64_t>(slots_.size());
    *cell = nid;
    nodes_.push_back(Node{id, sb, count_if_new, n.depth + 1});
    slots_.insert(slots_.end(), static_cast<size_t>(count_if_new), npos);
    return {nid, true};
  }

  void prune_below(std::int64_t keep) {
    if (keep <= base_) return;
    const std::int64_t node_cut = keep - base_;
    const std::int64_t slot_cut = nodes_[static_cast<size_t>(node_cut)].slot_begin - slot_base_;
    nodes_.erase(nodes_.begin(), nodes_.begin() + node_cut);
    slots_.erase(slots_.begin(), slots_.begin() + slot_cut);
    base_ = keep;
    slot_base_ += slot_cut;
    nodes_.front().parent = npos;
  }

  std::int64_t live_count() const { return static_cast<std::int64_t>(nodes_.size()); }
  std::int64_t discovered_total() const { return base_ + live_count(); }
  std::int64_t base() const { return base_; }

 private:
  struct Node {
    std::int64_t parent;
    std::int64_t slot_begin;  // absolute offset into the child-id pool
    int count;                // number of children, fixed at discovery
    int depth;                // absolute depth, preserved across pruning
  };

  const Node& node(std::int64_t id) const { return nodes_[static_cast<size_t>(id - base_)]; }

  std::vector<Node> nodes_;
  std::vector<std::int64_t> slots_;
  std::int64_t base_ = 0;
  std::int64_t slot_base_ = 0;
  std::int64_t max_live_;
};

}  // namespace gwlab
