#include "qle/fview.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>

#include "qle/errors.h"

namespace qle {

FView::FView(std::vector<std::vector<FViewNode>> levels) : levels_(std::move(levels)) {
  if (levels_.empty() || levels_[0].size() != 1) throw UsageError("an f-view needs a single root level");
}

FView FView::leaf(Label label) {
  std::vector<std::vector<FViewNode>> levels(1);
  levels[0].push_back(FViewNode{label, {}});
  return FView(std::move(levels));
}

FView FView::attach(Label label, const std::vector<std::pair<EdgeLabel, FView>>& children) {
  std::size_t depth = 0;
  for (const auto& [el, c] : children) depth = std::max(depth, c.depth() + 1);
  std::vector<std::vector<FViewNode>> levels(depth + 1);
  FViewNode root{label, {}};
  // next_offset[j]: nodes already placed at level j by earlier children.
  std::vector<std::size_t> next_offset(depth + 2, 0);
  for (const auto& [el, c] : children) {
    root.edges.push_back(FViewEdge{el, static_cast<std::uint32_t>(next_offset[1])});
    for (std::size_t j = 0; j <= c.depth(); ++j) {
      for (FViewNode node : c.levels_[j]) {
        for (auto& e : node.edges) e.target += static_cast<std::uint32_t>(next_offset[j + 2]);
        levels[j + 1].push_back(std::move(node));
      }
    }
    for (std::size_t j = 0; j <= c.depth(); ++j) next_offset[j + 1] += c.levels_[j].size();
  }
  std::sort(root.edges.begin(), root.edges.end(),
            [](const FViewEdge& a, const FViewEdge& b) { return a.label < b.label; });
  levels[0].push_back(std::move(root));
  return FView(std::move(levels));
}

std::size_t FView::node_count() const {
  std::size_t c = 0;
  for (const auto& l : levels_) c += l.size();
  return c;
}

std::size_t FView::max_level_width() const {
  std::size_t w = 0;
  for (const auto& l : levels_) w = std::max(w, l.size());
  return w;
}

FView FView::relabeled(const std::function<Label(Label)>& f) const {
  FView out = *this;
  for (auto& l : out.levels_)
    for (auto& node : l) node.label = f(node.label);
  return out;
}

FView FView::sub_view(NodeRef r, std::size_t depth) const {
  if (r.level + depth > this->depth()) throw UsageError("sub_view deeper than the f-view");
  std::vector<std::vector<FViewNode>> levels(depth + 1);
  std::vector<std::map<std::size_t, std::uint32_t>> index(depth + 1);
  index[0][r.index] = 0;
  levels[0].push_back(FViewNode{node(r).label, {}});
  for (std::size_t j = 0; j <= depth; ++j) {
    // Visit in insertion order.
    std::vector<std::pair<std::uint32_t, std::size_t>> order;
    for (auto [src, dst] : index[j]) order.emplace_back(dst, src);
    std::sort(order.begin(), order.end());
    for (auto [dst, src] : order) {
      const FViewNode& n = levels_[r.level + j][src];
      levels[j][dst].label = n.label;
      if (j == depth) continue;
      for (const auto& e : n.edges) {
        auto [it, fresh] = index[j + 1].emplace(e.target, static_cast<std::uint32_t>(levels[j + 1].size()));
        if (fresh) levels[j + 1].push_back(FViewNode{});
        levels[j][dst].edges.push_back(FViewEdge{e.label, it->second});
      }
    }
  }
  return FView(std::move(levels));
}

std::vector<std::string> FView::check() const {
  std::vector<std::string> out;
  if (levels_.empty() || levels_[0].size() != 1) {
    out.push_back("root level must hold one node");
    return out;
  }
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    for (const auto& node : levels_[j]) {
      for (std::size_t i = 0; i < node.edges.size(); ++i) {
        const auto& e = node.edges[i];
        if (j + 1 >= levels_.size()) {
          out.push_back("edge below the last level");
          continue;
        }
        if (e.target >= levels_[j + 1].size()) out.push_back("edge target out of range");
        if (e.label.port == 0 || e.label.peer_port == 0) out.push_back("ports are 1-based");
        if (i > 0 && !(node.edges[i - 1].label.port < e.label.port)) out.push_back("edge ports not increasing");
      }
    }
  }
  if (!out.empty()) return out;
  for (std::size_t j = 1; j < levels_.size(); ++j) {
    std::vector<bool> hit(levels_[j].size(), false);
    for (const auto& node : levels_[j - 1])
      for (const auto& e : node.edges) hit[e.target] = true;
    if (std::find(hit.begin(), hit.end(), false) != hit.end()) {
      out.push_back("unreachable node at level " + std::to_string(j));
      break;
    }
  }
  return out;
}

std::size_t ViewTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (auto [el, c] : nodes[i].children) {
      d[c] = d[i] + 1;
      best = std::max(best, d[c]);
    }
  return best;
}

namespace {

void canonical_into(const ViewTree& t, std::size_t i, std::string& out) {
  out += '(';
  out += std::to_string(t.nodes[i].label);
  for (auto [el, c] : t.nodes[i].children) {
    out += '[';
    out += std::to_string(el.port);
    out += ',';
    out += std::to_string(el.peer_port);
    out += ']';
    canonical_into(t, c, out);
  }
  out += ')';
}

}  // namespace

std::string ViewTree::canonical() const {
  std::string out;
  if (!nodes.empty()) canonical_into(*this, 0, out);
  return out;
}

ViewTree build_view(const Network& net, const std::vector<Label>& labels, int v, int h) {
  if (net.size() > kOracleMaxNodes || h > kOracleMaxDepth)
    throw OracleRefusal("build_view is limited to n <= 6 and h <= 10");
  ViewTree t;
  t.nodes.push_back({labels[v], {}});
  std::vector<std::pair<std::size_t, int>> frontier{{0, v}};
  for (int depth = 0; depth < h; ++depth) {
    std::vector<std::pair<std::size_t, int>> next;
    for (auto [idx, party] : frontier) {
      for (int p = 1; p <= net.in_degree(party); ++p) {
        auto src = net.source(party, p);
        std::size_t child = t.nodes.size();
        t.nodes.push_back({labels[src.node], {}});
        t.nodes[idx].children.push_back(
            {EdgeLabel{static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(src.port)}, child});
        next.emplace_back(child, src.node);
      }
    }
    frontier = std::move(next);
  }
  return t;
}

ViewTree unfold(const FView& fv) {
  ViewTree t;
  t.nodes.push_back({fv.root().label, {}});
  std::vector<std::pair<std::size_t, NodeRef>> frontier{{0, NodeRef{0, 0}}};
  while (!frontier.empty()) {
    std::vector<std::pair<std::size_t, NodeRef>> next;
    for (auto [idx, ref] : frontier) {
      for (const auto& e : fv.node(ref).edges) {
        NodeRef child_ref{ref.level + 1, e.target};
        std::size_t child = t.nodes.size();
        t.nodes.push_back({fv.node(child_ref).label, {}});
        t.nodes[idx].children.push_back({e.label, child});
        next.emplace_back(child, child_ref);
      }
    }
    frontier = std::move(next);
  }
  return t;
}

FView fold(const ViewTree& tree) {
  std::vector<std::vector<FViewNode>> levels;
  std::vector<std::pair<std::size_t, std::size_t>> where(tree.nodes.size());  // (level, index)
  levels.push_back({FViewNode{tree.nodes[0].label, {}}});
  where[0] = {0, 0};
  std::vector<std::size_t> frontier{0};
  std::size_t level = 0;
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : frontier) {
      for (auto [el, c] : tree.nodes[i].children) {
        if (levels.size() <= level + 1) levels.emplace_back();
        where[c] = {level + 1, levels[level + 1].size()};
        levels[level + 1].push_back(FViewNode{tree.nodes[c].label, {}});
        levels[level][where[i].second].edges.push_back(
            FViewEdge{el, static_cast<std::uint32_t>(where[c].second)});
        next.push_back(c);
      }
    }
    frontier = std::move(next);
    ++level;
  }
  return FView(std::move(levels));
}

bool mergeable(const FView& fv, NodeRef u, NodeRef u2) {
  if (u.level != u2.level || u.index == u2.index) return false;
  if (u.level > fv.depth()) return false;
  const auto& lvl = fv.level(u.level);
  if (u.index >= lvl.size() || u2.index >= lvl.size()) return false;
  const FViewNode& a = lvl[u.index];
  const FViewNode& b = lvl[u2.index];
  return a.label == b.label && a.edges == b.edges;
}

FView merge_nodes(const FView& fv, NodeRef u, NodeRef u2) {
  if (!mergeable(fv, u, u2)) throw MergeError("merging precondition fails");
  auto levels = fv.levels();
  const std::size_t j = u.level;
  levels[j].erase(levels[j].begin() + static_cast<std::ptrdiff_t>(u2.index));
  if (j > 0) {
    const auto keep = static_cast<std::uint32_t>(u.index > u2.index ? u.index - 1 : u.index);
    for (auto& node : levels[j - 1]) {
      for (auto& e : node.edges) {
        if (e.target == u2.index) {
          e.target = keep;
        } else if (e.target > u2.index) {
          --e.target;
        }
      }
    }
  }
  return FView(std::move(levels));
}

FView minimize(const FView& fv) {
  const std::size_t h = fv.depth();
  // Traversal: breadth-first ids and per-level lists.
  std::vector<std::vector<std::int64_t>> id(h + 1);
  for (std::size_t j = 0; j <= h; ++j) id[j].assign(fv.level(j).size(), -1);
  std::vector<std::vector<std::uint32_t>> members(h + 1);
  std::int64_t size = 1;
  id[0][0] = size++;
  members[0].push_back(0);
  std::queue<NodeRef> q;
  q.push(NodeRef{0, 0});
  while (!q.empty()) {
    NodeRef u = q.front();
    q.pop();
    for (const auto& e : fv.node(u).edges) {
      if (id[u.level + 1][e.target] >= 0) continue;
      id[u.level + 1][e.target] = size++;
      members[u.level + 1].push_back(e.target);
      q.push(NodeRef{u.level + 1, e.target});
    }
  }

  // Bottom-up merge of equal (label, edge key) nodes.
  std::vector<std::vector<std::uint32_t>> primary(h + 1);
  for (std::size_t j = 0; j <= h; ++j) primary[j].assign(fv.level(j).size(), 0);
  primary[0][0] = 0;
  std::vector<std::vector<std::uint32_t>> kept(h + 1);
  kept[0] = {0};
  for (std::size_t j = h; j >= 1; --j) {
    auto key = [&](std::uint32_t i) {
      const FViewNode& n = fv.level(j)[i];
      std::vector<std::uint64_t> k{n.label};
      for (const auto& e : n.edges) {
        k.push_back(e.label.port);
        k.push_back(e.label.peer_port);
        k.push_back(static_cast<std::uint64_t>(id[j + 1][e.target]));
      }
      return k;
    };
    auto& list = members[j];
    std::vector<std::vector<std::uint64_t>> keys(fv.level(j).size());
    for (auto i : list) keys[i] = key(i);
    std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
    std::uint32_t prim = 0;
    bool have = false;
    for (auto i : list) {
      if (have && keys[i] == keys[prim]) {
        primary[j][i] = prim;
        id[j][i] = id[j][prim];
      } else {
        prim = i;
        have = true;
        primary[j][i] = i;
        kept[j].push_back(i);
      }
    }
    if (j == 1) break;
  }

  std::vector<std::vector<FViewNode>> levels(h + 1);
  std::vector<std::vector<std::uint32_t>> new_index(h + 1);
  for (std::size_t j = 0; j <= h; ++j) {
    new_index[j].assign(fv.level(j).size(), 0);
    for (std::size_t k = 0; k < kept[j].size(); ++k) new_index[j][kept[j][k]] = static_cast<std::uint32_t>(k);
  }
  for (std::size_t j = 0; j <= h; ++j) {
    for (auto i : kept[j]) {
      FViewNode node = fv.level(j)[i];
      for (auto& e : node.edges) e.target = new_index[j + 1][primary[j + 1][e.target]];
      levels[j].push_back(std::move(node));
    }
  }
  // Drop empty trailing levels (only possible for unreachable input).
  while (levels.size() > 1 && levels.back().empty()) levels.pop_back();
  return FView(std::move(levels));
}

FView canonicalize(const FView& fv) {
  const std::size_t h = fv.depth();
  std::vector<std::vector<FViewNode>> levels(h + 1);
  std::vector<std::uint32_t> position_below;  // old index -> new index at level j + 1
  for (std::size_t j = h + 1; j-- > 0;) {
    std::vector<FViewNode> nodes = fv.level(j);
    for (auto& n : nodes)
      for (auto& e : n.edges) e.target = position_below[e.target];
    std::vector<std::uint32_t> order(nodes.size());
    std::iota(order.begin(), order.end(), 0u);
    auto key = [&](const FViewNode& n) {
      std::vector<std::uint64_t> k{n.label};
      for (const auto& e : n.edges) {
        k.push_back(e.label.port);
        k.push_back(e.label.peer_port);
        k.push_back(e.target);
      }
      return k;
    };
    std::vector<std::vector<std::uint64_t>> keys;
    for (const auto& n : nodes) keys.push_back(key(n));
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
    position_below.assign(nodes.size(), 0);
    for (std::size_t k = 0; k < order.size(); ++k) {
      position_below[order[k]] = static_cast<std::uint32_t>(k);
      levels[j].push_back(std::move(nodes[order[k]]));
    }
  }
  return FView(std::move(levels));
}

BitString serialize(const FView& fv) {
  FView c = canonicalize(fv);
  BitString out;
  out.push_varint(c.levels().size());
  for (const auto& lvl : c.levels()) {
    out.push_varint(lvl.size());
    for (const auto& node : lvl) {
      out.push_varint(node.label);
      out.push_varint(node.edges.size());
      for (const auto& e : node.edges) {
        out.push_varint(e.label.port);
        out.push_varint(e.label.peer_port);
        out.push_varint(e.target);
      }
    }
  }
  return out;
}

FView deserialize(BitReader& in) {
  const std::uint64_t nlevels = in.read_varint();
  if (nlevels == 0 || nlevels > (1u << 16)) throw DecodeError("bad level count");
  std::vector<std::vector<FViewNode>> levels(nlevels);
  for (auto& lvl : levels) {
    const std::uint64_t count = in.read_varint();
    if (count > in.remaining()) throw DecodeError("bad node count");
    for (std::uint64_t i = 0; i < count; ++i) {
      FViewNode node;
      node.label = in.read_varint();
      const std::uint64_t ne = in.read_varint();
      if (ne > in.remaining()) throw DecodeError("bad edge count");
      for (std::uint64_t k = 0; k < ne; ++k) {
        FViewEdge e;
        e.label.port = static_cast<std::uint32_t>(in.read_varint());
        e.label.peer_port = static_cast<std::uint32_t>(in.read_varint());
        e.target = static_cast<std::uint32_t>(in.read_varint());
        node.edges.push_back(e);
      }
      lvl.push_back(std::move(node));
    }
  }
  if (levels[0].size() != 1) throw DecodeError("root level must hold one node");
  FView fv(std::move(levels));
  auto problems = fv.check();
  if (!problems.empty()) throw DecodeError("malformed f-view: " + problems.front());
  return fv;
}

FView deserialize(const BitString& bits) {
  BitReader in(bits);
  FView fv = deserialize(in);
  if (!in.done()) throw DecodeError("trailing bits after f-view");
  return fv;
}

}  // namespace qle
