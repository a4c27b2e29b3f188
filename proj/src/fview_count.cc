#include <map>
#include <queue>

#include "qle/errors.h"
#include "qle/fview.h"

namespace qle {

bool paths_agree(const FView& fv, NodeRef u, NodeRef w, std::size_t length) {
  if (u.level + length > fv.depth() || w.level + length > fv.depth())
    throw UsageError("paths_agree needs `length` levels below both nodes");
  // Ports are distinct at every node, so a path set of length L fixes the
  // depth-L tree up to isomorphism, and minimal f-views of equal trees
  // serialize identically.
  return serialize(minimize(fv.sub_view(u, length))) == serialize(minimize(fv.sub_view(w, length)));
}

namespace {

// Breadth-first ids and depths for every node of the f-view.
struct Traversal {
  std::vector<NodeRef> order;                  // id - 1 -> node
  std::map<NodeRef, std::size_t> id;           // node -> id (1-based)
};

Traversal traverse(const FView& fv) {
  Traversal t;
  std::queue<NodeRef> q;
  NodeRef root{0, 0};
  t.order.push_back(root);
  t.id[root] = 1;
  q.push(root);
  while (!q.empty()) {
    NodeRef u = q.front();
    q.pop();
    for (const auto& e : fv.node(u).edges) {
      NodeRef c{u.level + 1, e.target};
      if (t.id.count(c)) continue;
      t.order.push_back(c);
      t.id[c] = t.order.size();
      q.push(c);
    }
  }
  return t;
}

// Builds the label- and edge-preserving map from the sub-f-view at ur onto
// the one at wr, breadth first; fails on the first mismatch.
bool homomorphic(const FView& fv, NodeRef ur, NodeRef wr, std::size_t length) {
  std::map<NodeRef, NodeRef> phi;
  std::queue<NodeRef> q;
  phi[ur] = wr;
  q.push(ur);
  while (!q.empty()) {
    NodeRef u = q.front();
    q.pop();
    const FViewNode& a = fv.node(u);
    const FViewNode& b = fv.node(phi[u]);
    if (a.label != b.label) return false;
    if (u.level == ur.level + length) continue;
    if (a.edges.size() != b.edges.size()) return false;
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      if (a.edges[i].label != b.edges[i].label) return false;
      NodeRef ui{u.level + 1, a.edges[i].target};
      NodeRef wi{phi[u].level + 1, b.edges[i].target};
      auto it = phi.find(ui);
      if (it != phi.end()) {
        if (it->second != wi) return false;
        continue;
      }
      phi[ui] = wi;
      q.push(ui);
    }
  }
  return true;
}

void require_counting_depth(const FView& fv, int n) {
  if (n < 1) throw UsageError("party count must be positive");
  if (fv.depth() < 2 * static_cast<std::size_t>(n - 1))
    throw UsageError("view counting needs an f-view of depth at least 2(n-1)");
}

}  // namespace

bool path_set_equal(const FView& fv, NodeRef u, NodeRef w, int n) {
  const std::size_t length = static_cast<std::size_t>(n - 1);
  if (u.level > w.level) std::swap(u, w);
  if (w.level > length || w.level + length > fv.depth())
    throw UsageError("path_set_equal needs depth(u) <= depth(w) <= n - 1 inside a depth 2(n-1) f-view");
  return homomorphic(fv, u, w, length);
}

std::vector<NodeRef> view_representatives(const FView& fv, int n) {
  require_counting_depth(fv, n);
  const Traversal t = traverse(fv);
  const std::size_t max_depth = static_cast<std::size_t>(n - 1);
  std::vector<NodeRef> reps{t.order.front()};
  for (std::size_t i = 1; i < t.order.size(); ++i) {
    NodeRef u = t.order[i];
    if (u.level > max_depth) break;
    bool fresh = true;
    for (NodeRef rep : reps) {
      if (path_set_equal(fv, rep, u, n)) {
        fresh = false;
        break;
      }
    }
    if (fresh) reps.push_back(u);
  }
  return reps;
}

std::int64_t count_views(const FView& fv, const LabelSet& labels, int n) {
  std::int64_t c = 0;
  for (NodeRef r : view_representatives(fv, n))
    if (labels.count(fv.node(r).label)) ++c;
  return c;
}

std::int64_t count_all_views(const FView& fv, int n) {
  return static_cast<std::int64_t>(view_representatives(fv, n).size());
}

std::int64_t count_parties(const FView& fv, const LabelSet& labels, int n) {
  const auto reps = view_representatives(fv, n);
  std::int64_t in_set = 0;
  for (NodeRef r : reps)
    if (labels.count(fv.node(r).label)) ++in_set;
  const std::int64_t total = static_cast<std::int64_t>(reps.size());
  if ((n * in_set) % total != 0)
    throw InconsistencyError("party count " + std::to_string(n) + " * " + std::to_string(in_set) + " / " +
                             std::to_string(total) + " is not an integer");
  return n * in_set / total;
}

}  // namespace qle
