#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "qle/bits.h"
#include "qle/proc.h"
#include "qle/topology.h"

namespace qle {

class PartyContext;

using Label = std::uint64_t;

// (port at the node, port used by the neighbor). Ports are 1-based.
struct EdgeLabel {
  std::uint32_t port = 0;
  std::uint32_t peer_port = 0;
  auto operator<=>(const EdgeLabel&) const = default;
};

struct FViewEdge {
  EdgeLabel label;
  std::uint32_t target = 0;  // index in the next level
  bool operator==(const FViewEdge&) const = default;
};

struct FViewNode {
  Label label = 0;
  std::vector<FViewEdge> edges;  // sorted by label.port
  bool operator==(const FViewNode&) const = default;
};

struct NodeRef {
  std::size_t level = 0;
  std::size_t index = 0;
  auto operator<=>(const NodeRef&) const = default;
};

// Leveled labeled DAG; level 0 holds the root and every edge goes from
// level j to level j + 1.
class FView {
 public:
  FView() : levels_(1, std::vector<FViewNode>(1)) {}
  explicit FView(std::vector<std::vector<FViewNode>> levels);

  static FView leaf(Label label);
  // New root labeled `label` whose children are the roots of `children`.
  static FView attach(Label label, const std::vector<std::pair<EdgeLabel, FView>>& children);

  std::size_t depth() const { return levels_.size() - 1; }
  const std::vector<std::vector<FViewNode>>& levels() const { return levels_; }
  const std::vector<FViewNode>& level(std::size_t j) const { return levels_[j]; }
  const FViewNode& node(NodeRef r) const { return levels_[r.level][r.index]; }
  const FViewNode& root() const { return levels_[0][0]; }
  std::size_t node_count() const;
  std::size_t max_level_width() const;

  // Applies `f` to every label.
  FView relabeled(const std::function<Label(Label)>& f) const;
  // The sub-f-view rooted at r, truncated to `depth` levels below r.
  FView sub_view(NodeRef r, std::size_t depth) const;
  // Empty means well formed: edges in range, ports sorted and distinct,
  // single root, every node reachable.
  std::vector<std::string> check() const;

  bool operator==(const FView&) const = default;

 private:
  std::vector<std::vector<FViewNode>> levels_;
};

// Rooted labeled tree; nodes[0] is the root. Oracle-only structure.
struct ViewTree {
  struct Node {
    Label label = 0;
    std::vector<std::pair<EdgeLabel, std::size_t>> children;  // sorted by port
  };
  std::vector<Node> nodes;

  std::size_t depth() const;
  // Equal strings iff the trees are isomorphic as rooted edge-labeled trees.
  std::string canonical() const;
};

inline constexpr int kOracleMaxNodes = 6;
inline constexpr int kOracleMaxDepth = 10;

// Recursive view of party v to depth h. Throws OracleRefusal beyond the
// guard sizes.
ViewTree build_view(const Network& net, const std::vector<Label>& labels, int v, int h);
ViewTree unfold(const FView& fv);
// The tree as an f-view with one node per tree node.
FView fold(const ViewTree& tree);

// Throws MergeError when the merging precondition fails.
FView merge_nodes(const FView& fv, NodeRef u, NodeRef u2);
// True when u and u2 satisfy the merging precondition.
bool mergeable(const FView& fv, NodeRef u, NodeRef u2);
FView minimize(const FView& fv);
// Nodes within each level reordered canonically. fv must be minimal.
FView canonicalize(const FView& fv);

// Canonical wire form; the byte length times eight is the bit count.
BitString serialize(const FView& fv);
FView deserialize(const BitString& bits);
FView deserialize(BitReader& reader);

// Whether the sub-f-views at u and w define the same path set of the given
// length. Requires depth(u) <= depth(w) and enough levels below both.
bool paths_agree(const FView& fv, NodeRef u, NodeRef w, std::size_t length);
// The same test with length n - 1.
bool path_set_equal(const FView& fv, NodeRef u, NodeRef w, int n);

using LabelSet = std::set<Label>;

// Representatives of the distinct path sets of length n - 1 among nodes of
// depth <= n - 1, first-encountered in breadth-first order.
std::vector<NodeRef> view_representatives(const FView& fv, int n);
std::int64_t count_views(const FView& fv, const LabelSet& labels, int n);
std::int64_t count_all_views(const FView& fv, int n);
// n * |views with label in S| / |views|. Throws InconsistencyError when the
// quotient is not an integer.
std::int64_t count_parties(const FView& fv, const LabelSet& labels, int n);

using LabelTransform = std::function<FView(int in_port, FView received)>;

// Distributed construction: h rounds, after which every party holds the
// minimal f-view of depth h of its own view.
Proc<FView> construct_fview(PartyContext& ctx, int h, Label x, LabelTransform transform = {});

}  // namespace qle
