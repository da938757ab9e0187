#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "tdem/error.hpp"
#include "tdem/mesh.hpp"
#include "topology.hpp"

namespace tdem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Edge {
  int a, b;
  int left_face, right_face;
};

struct ShortestPathTree {
  std::vector<double> dist;
  std::vector<int> parent;
  std::vector<int> order;  // settle order
};

double edge_length(const TriangleMesh& mesh, int a, int b) {
  return (mesh.vertices[a] - mesh.vertices[b]).norm();
}

// Dijkstra over `allowed` vertices; ties settle the smaller vertex id first.
ShortestPathTree dijkstra(const TriangleMesh& mesh, const std::vector<std::vector<int>>& nbrs,
                          const std::vector<std::pair<int, double>>& sources,
                          const std::function<bool(int)>& allowed) {
  const int n = mesh.num_vertices();
  ShortestPathTree t{std::vector<double>(n, kInf), std::vector<int>(n, -1), {}};
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (auto [v, d] : sources) {
    if (d < t.dist[v]) {
      t.dist[v] = d;
      queue.emplace(d, v);
    }
  }
  std::vector<bool> done(n, false);
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (done[v]) continue;
    done[v] = true;
    t.order.push_back(v);
    for (int w : nbrs[v]) {
      if (done[w] || !allowed(w)) continue;
      const double nd = d + edge_length(mesh, v, w);
      if (nd < t.dist[w]) {
        t.dist[w] = nd;
        t.parent[w] = v;
        queue.emplace(nd, w);
      }
    }
  }
  return t;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

std::vector<int> path_to_root(const std::vector<int>& parent, int v, int root) {
  std::vector<int> path{v};
  while (v != root) {
    v = parent[v];
    path.push_back(v);
  }
  return path;
}

// Closed loop root -> ... -> x, y -> ... -> root (root not repeated).
std::vector<int> fundamental_loop(const std::vector<int>& parent, int root, int x, int y) {
  std::vector<int> px = path_to_root(parent, x, root);
  std::vector<int> py = path_to_root(parent, y, root);
  std::vector<int> loop(px.rbegin(), px.rend());
  loop.insert(loop.end(), py.begin(), py.end() - 1);
  return loop;
}

double loop_length(const TriangleMesh& mesh, const std::vector<int>& loop) {
  double total = 0.0;
  for (size_t i = 0; i < loop.size(); ++i)
    total += edge_length(mesh, loop[i], loop[(i + 1) % loop.size()]);
  return total;
}

std::vector<int> reversed_loop(const std::vector<int>& loop) {
  std::vector<int> out{loop.front()};
  out.insert(out.end(), loop.rbegin(), loop.rend() - 1);
  return out;
}

// Neighbors of v in counterclockwise order starting at `start`.
std::vector<int> rotation(const TriangleMesh& mesh, const detail::HalfedgeTable& he, int v,
                          int start) {
  std::vector<int> ring{start};
  for (int p = detail::ccw_next(mesh, he, v, start); p != start;
       p = detail::ccw_next(mesh, he, v, p)) {
    if (p < 0 || ring.size() > mesh.faces.size())
      throw TopologyError("vertex " + std::to_string(v) + " has no closed one-ring");
    ring.push_back(p);
  }
  return ring;
}

}  // namespace

CutGraph compute_cut_graph(const TriangleMesh& mesh, std::optional<int> base_vertex) {
  const int genus = euler_genus(mesh);
  if (genus != 1)
    throw TopologyError("genus " + std::to_string(genus) + ", require genus 1");
  const int base = base_vertex.value_or(0);
  if (base < 0 || base >= mesh.num_vertices())
    throw InvalidArgument("base vertex " + std::to_string(base) + " out of range");

  const auto nbrs = detail::vertex_neighbors(mesh);
  const detail::HalfedgeTable he(mesh);
  const ShortestPathTree tree = dijkstra(mesh, nbrs, {{base, 0.0}}, [](int) { return true; });

  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> tree_edges;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (tree.parent[v] >= 0) tree_edges.insert(detail::undirected_key(v, tree.parent[v]));
  for (int a = 0; a < mesh.num_vertices(); ++a)
    for (int b : nbrs[a])
      if (a < b) edges.push_back({a, b, he.face(a, b), he.face(b, a)});

  // Maximum spanning dual cotree; weights are the lengths of the
  // fundamental loops, so the leftover edges give the shortest loop system.
  auto loop_weight = [&](const Edge& e) {
    return tree.dist[e.a] + edge_length(mesh, e.a, e.b) + tree.dist[e.b];
  };
  std::vector<int> dual_candidates;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i)
    if (!tree_edges.count(detail::undirected_key(edges[i].a, edges[i].b)))
      dual_candidates.push_back(i);
  std::stable_sort(dual_candidates.begin(), dual_candidates.end(), [&](int x, int y) {
    return loop_weight(edges[x]) > loop_weight(edges[y]);
  });
  DisjointSets faces(mesh.num_faces());
  std::vector<std::vector<std::pair<int, int>>> cotree(mesh.num_faces());  // (face, edge)
  std::vector<int> generators;
  for (int i : dual_candidates) {
    const Edge& e = edges[i];
    if (faces.unite(e.left_face, e.right_face)) {
      cotree[e.left_face].emplace_back(e.right_face, i);
      cotree[e.right_face].emplace_back(e.left_face, i);
    } else {
      generators.push_back(i);
    }
  }
  if (generators.size() != 2)
    throw TopologyError("tree-cotree left " + std::to_string(generators.size()) +
                        " generators, expected 2");

  // Primal edges crossed by each dual homology cycle. The fundamental loop of
  // an edge is non-separating exactly when the edge lies on one of them.
  std::vector<int> nonseparating;
  for (int g : generators) {
    const int source = edges[g].left_face, target = edges[g].right_face;
    std::vector<int> via(mesh.num_faces(), -2);
    std::queue<int> queue;
    via[source] = -1;
    queue.push(source);
    while (!queue.empty()) {
      const int f = queue.front();
      queue.pop();
      for (auto [h, e] : cotree[f])
        if (via[h] == -2) {
          via[h] = e;
          queue.push(h);
        }
    }
    nonseparating.push_back(g);
    for (int f = target; f != source;) {
      const int e = via[f];
      nonseparating.push_back(e);
      f = edges[e].left_face == f ? edges[e].right_face : edges[e].left_face;
    }
  }
  std::sort(nonseparating.begin(), nonseparating.end());
  nonseparating.erase(std::unique(nonseparating.begin(), nonseparating.end()),
                      nonseparating.end());

  // Subtree of the root each vertex hangs from; a fundamental loop is simple
  // at the root when its endpoints hang from different subtrees.
  std::vector<int> branch(mesh.num_vertices(), -1);
  for (int v : tree.order)
    branch[v] = (v == base || tree.parent[v] == base) ? v : branch[tree.parent[v]];

  int best = -1, fallback = -1;
  for (int i : nonseparating) {
    const Edge& e = edges[i];
    const bool simple = e.a == base || e.b == base || branch[e.a] != branch[e.b];
    if (fallback < 0 || loop_weight(e) < loop_weight(edges[fallback])) fallback = i;
    if (simple && (best < 0 || loop_weight(e) < loop_weight(edges[best]))) best = i;
  }

  CutGraph cut;
  if (best >= 0) {
    cut.base_vertex = base;
    cut.loop_a = fundamental_loop(tree.parent, base, edges[best].a, edges[best].b);
  } else {
    // Every candidate retraces a stem from the root; cut at its branch point.
    const Edge& e = edges[fallback];
    std::vector<int> px = path_to_root(tree.parent, e.a, base);
    std::unordered_set<int> on_px(px.begin(), px.end());
    int lca = e.b;
    while (!on_px.count(lca)) lca = tree.parent[lca];
    cut.base_vertex = lca;
    cut.loop_a = fundamental_loop(tree.parent, lca, e.a, e.b);
  }

  // Second loop: leave the base on the left of loop_a, come back from the
  // right, never touching loop_a elsewhere. It crosses loop_a exactly once.
  const int root = cut.base_vertex;
  const auto& la = cut.loop_a;
  const int a_next = la[1];
  const int a_prev = la.back();
  const std::vector<int> ring = rotation(mesh, he, root, a_next);
  const auto prev_pos = std::find(ring.begin(), ring.end(), a_prev) - ring.begin();
  std::unordered_set<int> on_a(la.begin(), la.end());
  std::vector<std::pair<int, double>> sources;
  for (long k = 1; k < prev_pos; ++k)
    if (!on_a.count(ring[k])) sources.emplace_back(ring[k], edge_length(mesh, root, ring[k]));
  const ShortestPathTree side =
      dijkstra(mesh, nbrs, sources, [&](int v) { return !on_a.count(v); });
  int closing = -1;
  double closing_length = kInf;
  for (long k = prev_pos + 1; k < static_cast<long>(ring.size()); ++k) {
    const int z = ring[k];
    if (on_a.count(z) || side.dist[z] == kInf) continue;
    const double total = side.dist[z] + edge_length(mesh, z, root);
    if (total < closing_length) {
      closing_length = total;
      closing = z;
    }
  }
  if (closing < 0) throw TopologyError("no loop crossing the first cut path exists");
  std::vector<int> path{closing};
  for (int v = closing; side.parent[v] >= 0; v = side.parent[v]) path.push_back(side.parent[v]);
  cut.loop_b.push_back(root);
  cut.loop_b.insert(cut.loop_b.end(), path.rbegin(), path.rend());

  if (loop_length(mesh, cut.loop_b) > loop_length(mesh, cut.loop_a)) {
    std::vector<int> old_a = std::move(cut.loop_a);
    cut.loop_a = std::move(cut.loop_b);
    cut.loop_b = reversed_loop(old_a);
  }
  return cut;
}

CutMesh cut_along(const TriangleMesh& mesh, const CutGraph& cut) {
  const int n = mesh.num_vertices();
  const int base = cut.base_vertex;
  const auto& la = cut.loop_a;
  const auto& lb_in = cut.loop_b;
  if (la.size() < 3 || lb_in.size() < 3 || la.front() != base || lb_in.front() != base)
    throw TopologyError("cut loops must start at the base vertex and have >= 3 edges");

  const detail::HalfedgeTable he(mesh);
  auto check_loop = [&](const std::vector<int>& loop, const char* name) {
    std::unordered_set<int> seen;
    for (size_t i = 0; i < loop.size(); ++i) {
      const int v = loop[i], w = loop[(i + 1) % loop.size()];
      if (v < 0 || v >= n) throw TopologyError(std::string(name) + " has an invalid vertex");
      if (!seen.insert(v).second)
        throw TopologyError(std::string(name) + " revisits vertex " + std::to_string(v));
      if (he.face(v, w) < 0 || he.face(w, v) < 0)
        throw TopologyError(std::string(name) + " step " + std::to_string(v) + " -> " +
                            std::to_string(w) + " is not an interior edge");
    }
  };
  check_loop(la, "loop_a");
  check_loop(lb_in, "loop_b");
  {
    std::unordered_set<int> a_set(la.begin() + 1, la.end());
    for (size_t i = 1; i < lb_in.size(); ++i)
      if (a_set.count(lb_in[i]))
        throw TopologyError("loops meet away from the base vertex at " +
                            std::to_string(lb_in[i]));
  }

  // Orient loop_b so that, counterclockwise around the base, the cut edges
  // read a_out, b_out, a_in, b_in.
  std::vector<int> lb = lb_in;
  {
    const std::vector<int> ring = rotation(mesh, he, base, la[1]);
    auto pos = [&](int v) { return std::find(ring.begin(), ring.end(), v) - ring.begin(); };
    const auto a_in = pos(la.back()), b_out = pos(lb[1]), b_in = pos(lb.back());
    if (b_out < a_in && a_in < b_in) {
      // already oriented
    } else if (b_in < a_in && a_in < b_out) {
      lb = reversed_loop(lb);
    } else {
      throw TopologyError("cut loops touch at the base vertex without crossing");
    }
  }

  const int m = static_cast<int>(la.size());
  const int k = static_cast<int>(lb.size());
  std::vector<int> top(m, -1), right(k, -1);
  int next_id = n;
  for (int i = 1; i < m; ++i) top[i] = next_id++;
  for (int i = 1; i < k; ++i) right[i] = next_id++;
  const int bl = base, br = next_id++, tl = next_id++, tr = next_id++;

  CutMesh out;
  out.origin.resize(next_id);
  std::iota(out.origin.begin(), out.origin.begin() + n, 0);
  for (int i = 1; i < m; ++i) out.origin[top[i]] = la[i];
  for (int i = 1; i < k; ++i) out.origin[right[i]] = lb[i];
  out.origin[br] = out.origin[tl] = out.origin[tr] = base;
  out.mesh.vertices.reserve(next_id);
  for (int c = 0; c < next_id; ++c) out.mesh.vertices.push_back(mesh.vertices[out.origin[c]]);
  out.mesh.faces = mesh.faces;
  out.mesh.population = mesh.population;

  // For every cut vertex, the copy taken by the wedge of faces that starts
  // (counterclockwise) at each of its cut neighbors. Wedges are walked on the
  // original connectivity and applied afterwards.
  std::vector<std::pair<int, std::vector<std::pair<int, int>>>> plan;
  plan.push_back({base, {{la[1], bl}, {lb[1], br}, {la[m - 1], tr}, {lb[k - 1], tl}}});
  for (int i = 1; i < m; ++i)
    plan.push_back({la[i], {{la[(i + 1) % m], la[i]}, {la[i - 1], top[i]}}});
  for (int i = 1; i < k; ++i)
    plan.push_back({lb[i], {{lb[(i + 1) % k], right[i]}, {lb[i - 1], lb[i]}}});
  std::vector<std::array<int, 3>> relabeled(mesh.faces.size(), {-1, -1, -1});
  for (const auto& [v, wedges] : plan) {
    std::unordered_set<int> stops;
    for (auto [nbr, copy] : wedges) stops.insert(nbr);
    for (auto [start, copy] : wedges) {
      int p = start;
      do {
        int f = -1;
        const int q = detail::ccw_next(mesh, he, v, p, &f);
        if (q < 0) throw TopologyError("open one-ring at cut vertex " + std::to_string(v));
        for (int c = 0; c < 3; ++c)
          if (mesh.faces[f][c] == v) relabeled[f][c] = copy;
        p = q;
      } while (!stops.count(p));
    }
  }
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int c = 0; c < 3; ++c)
      if (relabeled[f][c] >= 0) out.mesh.faces[f][c] = relabeled[f][c];

  for (int i = 1; i < k; ++i) out.seams.pairs_lr.emplace_back(lb[i], right[i]);
  out.seams.pairs_lr.emplace_back(bl, br);
  out.seams.pairs_lr.emplace_back(tl, tr);
  for (int i = 1; i < m; ++i) out.seams.pairs_tb.emplace_back(la[i], top[i]);
  out.seams.pairs_tb.emplace_back(bl, tl);
  out.seams.pairs_tb.emplace_back(br, tr);
  out.seams.corner_ids = {bl, br, tr, tl};
  return out;
}

}  // namespace tdem
