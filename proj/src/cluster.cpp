#include "bridgegraph/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "bridgegraph/util.hpp"

namespace bridgegraph {

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

// Plain disjoint-set with union by size; used for the merge hierarchy.
struct Dsu {
  std::vector<int> parent, size;
  explicit Dsu(int n) : parent(std::size_t(n)), size(std::size_t(n), 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int v) {
    while (parent[std::size_t(v)] != v) {
      parent[std::size_t(v)] = parent[std::size_t(parent[std::size_t(v)])];
      v = parent[std::size_t(v)];
    }
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size[std::size_t(a)] < size[std::size_t(b)]) std::swap(a, b);
    parent[std::size_t(b)] = a;
    size[std::size_t(a)] += size[std::size_t(b)];
    return true;
  }
};

double clip4(double v) { return v > 4.0 ? 4.0 : (v < -4.0 ? -4.0 : v); }

}  // namespace

FuzzyGraph fuzzy_graph(const std::vector<double>& data, std::size_t n,
                       std::size_t dim, const UmapParams& p) {
  const int k = p.n_neighbors;
  if (k < 2) throw ClusterError("n_neighbors must be at least 2");
  if (n < std::size_t(k) + 1)
    throw ClusterError("need at least n_neighbors+1 points to build the graph");

  FuzzyGraph fg;
  fg.n = int(n);
  fg.k = k;
  fg.knn.assign(n * std::size_t(k), 0);
  fg.knn_dist.assign(n * std::size_t(k), 0.0);
  fg.knn_w.assign(n * std::size_t(k), 0.0);
  fg.rho.assign(n, 0.0);
  fg.sigma.assign(n, 0.0);

  const double target = std::log2(double(k));
  std::vector<std::pair<double, int>> cand;
  cand.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.push_back({std::sqrt(sq_dist(&data[i * dim], &data[j * dim], dim)), int(j)});
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    const double rho = cand[0].first;
    fg.rho[i] = rho;

    // Bandwidth so the neighbor weights sum to log2(k). The sum grows with
    // sigma, so a plain bisection (doubling until bracketed) converges fast.
    double lo = 0.0, hi = kInf, mid = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
      double sum = 0;
      for (int t = 0; t < k; ++t)
        sum += std::exp(-std::max(0.0, cand[std::size_t(t)].first - rho) / mid);
      if (std::fabs(sum - target) < 1e-5) break;
      if (sum > target) {
        hi = mid;
        mid = (lo + hi) / 2.0;
      } else {
        lo = mid;
        mid = hi == kInf ? mid * 2.0 : (lo + hi) / 2.0;
      }
    }
    const double sigma = std::max(mid, 1e-8);
    fg.sigma[i] = sigma;
    for (int t = 0; t < k; ++t) {
      const std::size_t slot = i * std::size_t(k) + std::size_t(t);
      fg.knn[slot] = cand[std::size_t(t)].second;
      fg.knn_dist[slot] = cand[std::size_t(t)].first;
      fg.knn_w[slot] = std::exp(-std::max(0.0, cand[std::size_t(t)].first - rho) / sigma);
    }
  }

  // Fuse the two directed weights of each unordered pair: w + w' - w*w'.
  // Each pair appears once or twice in the directed lists.
  std::vector<std::pair<std::pair<int, int>, double>> directed;
  directed.reserve(n * std::size_t(k));
  for (std::size_t i = 0; i < n; ++i)
    for (int t = 0; t < k; ++t) {
      const std::size_t slot = i * std::size_t(k) + std::size_t(t);
      const int j = fg.knn[slot];
      const int a = std::min(int(i), j), b = std::max(int(i), j);
      directed.push_back({{a, b}, fg.knn_w[slot]});
    }
  std::sort(directed.begin(), directed.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t e = 0; e < directed.size();) {
    const auto key = directed[e].first;
    double w = directed[e].second;
    if (e + 1 < directed.size() && directed[e + 1].first == key) {
      const double w2 = directed[e + 1].second;
      w = w + w2 - w * w2;
      e += 2;
    } else {
      e += 1;
    }
    fg.edges.push_back({key.first, key.second, w});
  }
  return fg;
}

KernelFit fit_output_kernel(double min_dist) {
  // Target: 1 inside min_dist, exp(-(d - min_dist)) beyond it, sampled at 300
  // points on [0, 3]. d = 0 is skipped; both curve families pass through 1
  // there exactly. Fitted by Levenberg-Marquardt on (a, b).
  const int m = 300;
  std::vector<double> xs, ys;
  for (int i = 1; i < m; ++i) {
    const double d = 3.0 * double(i) / double(m - 1);
    xs.push_back(d);
    ys.push_back(d <= min_dist ? 1.0 : std::exp(-(d - min_dist)));
  }
  auto sse = [&](double a, double b) {
    double s = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b));
      s += (f - ys[i]) * (f - ys[i]);
    }
    return s;
  };
  double a = 1.0, b = 1.0;
  double lambda = 1e-3;
  double cur = sse(a, b);
  for (int iter = 0; iter < 200; ++iter) {
    // Accumulate J^T J and J^T r for the 2-parameter system.
    double jaa = 0, jab = 0, jbb = 0, ga = 0, gb = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double t = std::pow(xs[i], 2.0 * b);
      const double den = 1.0 + a * t;
      const double f = 1.0 / den;
      const double r = f - ys[i];
      const double dfda = -t / (den * den);
      const double dfdb = -a * t * 2.0 * std::log(xs[i]) / (den * den);
      jaa += dfda * dfda;
      jab += dfda * dfdb;
      jbb += dfdb * dfdb;
      ga += dfda * r;
      gb += dfdb * r;
    }
    const double paa = jaa * (1.0 + lambda), pbb = jbb * (1.0 + lambda);
    const double det = paa * pbb - jab * jab;
    if (std::fabs(det) < 1e-300) break;
    const double da = (-ga * pbb + gb * jab) / det;
    const double db = (-gb * paa + ga * jab) / det;
    const double na = std::max(a + da, 1e-3), nb = std::max(b + db, 1e-3);
    const double nxt = sse(na, nb);
    if (nxt < cur) {
      a = na;
      b = nb;
      cur = nxt;
      lambda = std::max(lambda * 0.5, 1e-12);
      if (da * da + db * db < 1e-24) break;
    } else {
      lambda *= 4.0;
      if (lambda > 1e12) break;
    }
  }
  return {a, b};
}

double embedding_cross_entropy(const std::vector<double>& xy, std::size_t n,
                               const FuzzyGraph& fg, const KernelFit& kf) {
  // Full-pair objective: attractive term for graph edges, repulsive term for
  // everything (non-edges have weight 0). Edges are sorted by (a, b), so a
  // single cursor tracks them through the i<j sweep.
  double ce = 0;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double w = 0;
      if (cursor < fg.edges.size() && fg.edges[cursor].a == int(i) &&
          fg.edges[cursor].b == int(j)) {
        w = fg.edges[cursor].w;
        cursor++;
      }
      const double d2 = sq_dist(&xy[i * 2], &xy[j * 2], 2);
      double q = 1.0 / (1.0 + kf.a * std::pow(d2, kf.b));
      q = std::min(std::max(q, 1e-12), 1.0 - 1e-12);
      ce += -w * std::log(q) - (1.0 - w) * std::log(1.0 - q);
    }
  return ce;
}

namespace {

struct DirEdge {
  int head, tail;
  double w;
};

// Deterministic expectation of the objective the SGD samples: per directed
// edge at its sampling rate, the attractive term plus negative_samples
// repulsions averaged over all uniform candidates.
double sampled_objective(const std::vector<double>& xy, std::size_t n,
                         const std::vector<DirEdge>& dir, double wmax,
                         const KernelFit& kf, int negative_samples) {
  double ce = 0;
  for (const auto& de : dir) {
    const double rate = de.w / wmax;
    const double* yi = &xy[std::size_t(de.head) * 2];
    double q = 1.0 / (1.0 + kf.a * std::pow(sq_dist(yi, &xy[std::size_t(de.tail) * 2], 2), kf.b));
    q = std::min(std::max(q, 1e-12), 1.0 - 1e-12);
    ce += rate * -std::log(q);
    double rep = 0;
    for (std::size_t k = 0; k < n; ++k) {
      double qk = 1.0 / (1.0 + kf.a * std::pow(sq_dist(yi, &xy[k * 2], 2), kf.b));
      qk = std::min(std::max(qk, 1e-12), 1.0 - 1e-12);
      rep += -std::log(1.0 - qk);
    }
    ce += rate * double(negative_samples) * rep / double(n);
  }
  return ce;
}

}  // namespace

Embedding optimize_embedding(const FuzzyGraph& fg, const UmapParams& p) {
  const std::size_t n = std::size_t(fg.n);
  if (p.n_epochs < 1) throw ClusterError("n_epochs must be at least 1");
  if (p.negative_samples < 1) throw ClusterError("negative_samples must be at least 1");
  Embedding e;
  e.n = fg.n;
  e.kernel = fit_output_kernel(p.min_dist);

  Rng rng(p.seed);
  e.xy.assign(n * 2, 0.0);
  for (double& c : e.xy) c = rng.uniform_range(-10.0, 10.0);

  // Sampling schedule: each direction of an edge is stepped every
  // w_max/w epochs, negatives five times as often, matching the usual
  // epochs-per-sample bookkeeping. Edges far below the per-epoch resolution
  // are dropped up front.
  double wmax = 0;
  for (const auto& ed : fg.edges) wmax = std::max(wmax, ed.w);
  std::vector<DirEdge> dir;
  for (const auto& ed : fg.edges) {
    if (ed.w < wmax / double(p.n_epochs)) continue;
    dir.push_back({ed.a, ed.b, ed.w});
    dir.push_back({ed.b, ed.a, ed.w});
  }
  std::sort(dir.begin(), dir.end(), [](const DirEdge& x, const DirEdge& y) {
    return x.head != y.head ? x.head < y.head : x.tail < y.tail;
  });

  const std::size_t ne = dir.size();
  std::vector<double> eps(ne), next_sample(ne), eps_neg(ne), next_neg(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    eps[i] = wmax / dir[i].w;
    next_sample[i] = eps[i];
    eps_neg[i] = eps[i] / double(p.negative_samples);
    next_neg[i] = eps_neg[i];
  }

  const double a = e.kernel.a, b = e.kernel.b;
  const double gamma = 1.0;
  e.ce_epoch1 = sampled_objective(e.xy, n, dir, wmax, e.kernel, p.negative_samples);
  bool epoch1_captured = false;
  for (int epoch = 0; epoch < p.n_epochs; ++epoch) {
    const double alpha = p.learning_rate * (1.0 - double(epoch) / double(p.n_epochs));
    bool moved = false;
    for (std::size_t s = 0; s < ne; ++s) {
      if (next_sample[s] > double(epoch)) continue;
      moved = true;
      const int i = dir[s].head, j = dir[s].tail;
      double* yi = &e.xy[std::size_t(i) * 2];
      double* yj = &e.xy[std::size_t(j) * 2];

      const double d2 = sq_dist(yi, yj, 2);
      double grad_coeff = 0;
      if (d2 > 0) {
        grad_coeff = -2.0 * a * b * std::pow(d2, b - 1.0);
        grad_coeff /= a * std::pow(d2, b) + 1.0;
      }
      for (int d = 0; d < 2; ++d) {
        const double g = clip4(grad_coeff * (yi[d] - yj[d]));
        yi[d] += g * alpha;
        yj[d] -= g * alpha;
      }
      next_sample[s] += eps[s];

      int n_neg = int((double(epoch) - next_neg[s]) / eps_neg[s]);
      if (n_neg < 0) n_neg = 0;
      for (int t = 0; t < n_neg; ++t) {
        const int k = int(rng.uniform_index(n));
        const double* yk = &e.xy[std::size_t(k) * 2];
        const double dn2 = sq_dist(yi, yk, 2);
        double rep = 0;
        if (dn2 > 0) {
          rep = 2.0 * gamma * b;
          rep /= (0.001 + dn2) * (a * std::pow(dn2, b) + 1.0);
        } else if (j == k) {
          continue;
        }
        // Coincident points (rep == 0) get a fixed full-strength shove so
        // they separate instead of sticking.
        for (int d = 0; d < 2; ++d) {
          const double g = rep > 0 ? clip4(rep * (yi[d] - yk[d])) : 4.0;
          yi[d] += g * alpha;
        }
      }
      next_neg[s] += double(n_neg) * eps_neg[s];
    }
    if (moved && !epoch1_captured) {
      // The schedule fires its first samples once epoch reaches the smallest
      // epochs-per-sample value, so "after the first epoch" means the first
      // epoch that actually moved something.
      e.ce_epoch1 = sampled_objective(e.xy, n, dir, wmax, e.kernel, p.negative_samples);
      epoch1_captured = true;
    }
  }
  e.ce_final = sampled_objective(e.xy, n, dir, wmax, e.kernel, p.negative_samples);
  return e;
}

Embedding umap_embed(const std::vector<double>& data, std::size_t n,
                     std::size_t dim, const UmapParams& p) {
  const FuzzyGraph fg = fuzzy_graph(data, n, dim, p);
  return optimize_embedding(fg, p);
}

std::vector<double> core_distances(const std::vector<double>& pts,
                                   std::size_t n, std::size_t dim, int k) {
  const std::size_t kk = std::min<std::size_t>(std::size_t(std::max(k, 1)), n - 1);
  std::vector<double> core(n, 0.0);
  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t t = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d[t++] = std::sqrt(sq_dist(&pts[i * dim], &pts[j * dim], dim));
    std::nth_element(d.begin(), d.begin() + (kk - 1), d.end());
    core[i] = d[kk - 1];
  }
  return core;
}

std::vector<MstEdge> mutual_reachability_mst(const std::vector<double>& pts,
                                             std::size_t n, std::size_t dim,
                                             const std::vector<double>& core) {
  // Prim over the implicit complete graph; O(n^2) time, O(n) memory.
  std::vector<MstEdge> mst;
  if (n < 2) return mst;
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, kInf);
  std::vector<int> from(n, 0);
  in_tree[0] = 1;
  for (std::size_t j = 1; j < n; ++j) {
    const double d = std::sqrt(sq_dist(&pts[0], &pts[j * dim], dim));
    best[j] = std::max({core[0], core[j], d});
  }
  for (std::size_t added = 1; added < n; ++added) {
    std::size_t pick = 0;
    double bw = kInf;
    for (std::size_t j = 0; j < n; ++j)
      if (!in_tree[j] && best[j] < bw) {
        bw = best[j];
        pick = j;
      }
    in_tree[pick] = 1;
    mst.push_back({from[pick], int(pick), best[pick]});
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = std::sqrt(sq_dist(&pts[pick * dim], &pts[j * dim], dim));
      const double w = std::max({core[pick], core[j], d});
      if (w < best[j]) {
        best[j] = w;
        from[j] = int(pick);
      }
    }
  }
  return mst;
}

namespace {

// Merge tree node: leaves are the input points, internal nodes are merge
// events. A node can have more than two children when several components
// join at exactly the same distance; grouping those ties into one event is
// what makes the hierarchy independent of input row order.
struct DendroNode {
  double dist = 0.0;
  int size = 1;
  std::vector<int> children;
};

std::vector<int> leaves_under(const std::vector<DendroNode>& nodes, int root, int n_points) {
  std::vector<int> out, stack = {root};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (v < n_points) {
      out.push_back(v);
      continue;
    }
    for (int c : nodes[std::size_t(v)].children) stack.push_back(c);
  }
  return out;
}

// One row of the condensed hierarchy: `child` (a point or a condensed
// cluster) leaves `parent` at density lambda.
struct CondensedRow {
  int parent = 0;
  int child = 0;
  double lambda = 0.0;
  int size = 1;
};

}  // namespace

ClusterAssignment hdbscan_fit(const std::vector<double>& xy, std::size_t n,
                              const HdbscanParams& p) {
  ClusterAssignment out;
  out.labels.assign(n, -1);
  if (p.min_cluster_size < 2) throw ClusterError("min_cluster_size must be at least 2");
  if (n < std::size_t(p.min_cluster_size)) {
    out.noise_fraction = n == 0 ? 0.0 : 1.0;
    return out;
  }

  const auto core = core_distances(xy, n, 2, p.min_samples);
  auto mst = mutual_reachability_mst(xy, n, 2, core);
  std::sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.w != y.w) return x.w < y.w;
    return std::make_pair(x.a, x.b) < std::make_pair(y.a, y.b);
  });

  // Single-linkage merge tree, grouping exactly-equal edge weights into one
  // multi-way event.
  std::vector<DendroNode> nodes(n);
  Dsu dsu(static_cast<int>(n));
  std::vector<int> comp_node(n);
  std::iota(comp_node.begin(), comp_node.end(), 0);
  std::size_t ei = 0;
  while (ei < mst.size()) {
    std::size_t ge = ei;
    const double w = mst[ei].w;
    while (ge < mst.size() && mst[ge].w == w) ge++;
    std::map<int, int> before;  // dsu root -> merge-tree node, pre-union
    for (std::size_t e = ei; e < ge; ++e) {
      const int ra = dsu.find(mst[e].a), rb = dsu.find(mst[e].b);
      before.emplace(ra, comp_node[std::size_t(ra)]);
      before.emplace(rb, comp_node[std::size_t(rb)]);
    }
    for (std::size_t e = ei; e < ge; ++e) dsu.unite(mst[e].a, mst[e].b);
    std::map<int, std::vector<int>> merged;  // new root -> old merge-tree nodes
    for (const auto& [root, node] : before) merged[dsu.find(root)].push_back(node);
    for (const auto& [root, kids] : merged) {
      if (kids.size() < 2) continue;  // component untouched by this group
      DendroNode dn;
      dn.dist = w;
      dn.children = kids;
      dn.size = 0;
      for (int c : kids) dn.size += nodes[std::size_t(c)].size;
      comp_node[std::size_t(root)] = int(nodes.size());
      nodes.push_back(std::move(dn));
    }
    ei = ge;
  }
  const int root = comp_node[std::size_t(dsu.find(0))];
  const int np = int(n);

  // Condense: walking down from the root, a cluster keeps its identity while
  // at most one child is big enough to stand alone; a split into two or more
  // viable children births new clusters; everything else falls out as points.
  std::vector<CondensedRow> rows;
  int next_cluster = np;  // condensed cluster ids start at np (root = np)
  std::vector<std::pair<int, int>> walk = {{root, next_cluster++}};
  std::vector<int> cluster_parent = {-1};  // indexed by id - np
  std::vector<double> cluster_birth = {0.0};
  while (!walk.empty()) {
    const auto [node, label] = walk.back();
    walk.pop_back();
    const auto& dn = nodes[std::size_t(node)];
    const double lambda = dn.dist > 0 ? 1.0 / dn.dist : kInf;
    std::vector<int> big;
    for (int c : dn.children)
      if (nodes[std::size_t(c)].size >= p.min_cluster_size) big.push_back(c);
    if (big.size() >= 2) {
      for (int c : dn.children) {
        if (nodes[std::size_t(c)].size >= p.min_cluster_size) {
          const int child_label = next_cluster++;
          cluster_parent.push_back(label);
          cluster_birth.push_back(lambda);
          rows.push_back({label, child_label, lambda, nodes[std::size_t(c)].size});
          walk.push_back({c, child_label});
        } else {
          for (int leaf : leaves_under(nodes, c, np)) rows.push_back({label, leaf, lambda, 1});
        }
      }
    } else if (big.size() == 1) {
      for (int c : dn.children) {
        if (c == big[0]) {
          walk.push_back({c, label});
        } else {
          for (int leaf : leaves_under(nodes, c, np)) rows.push_back({label, leaf, lambda, 1});
        }
      }
    } else {
      for (int c : dn.children)
        for (int leaf : leaves_under(nodes, c, np)) rows.push_back({label, leaf, lambda, 1});
    }
  }

  // Stability: every departure contributes (lambda - birth) * size.
  const int n_cond = next_cluster - np;
  std::vector<double> stability(std::size_t(n_cond), 0.0);
  for (const auto& r : rows)
    stability[std::size_t(r.parent - np)] +=
        (r.lambda - cluster_birth[std::size_t(r.parent - np)]) * double(r.size);

  // Excess-of-mass selection, children before parents; the root is never a
  // cluster. Selecting a node deselects its whole subtree.
  std::vector<std::vector<int>> cluster_kids(static_cast<std::size_t>(n_cond));
  for (int c = 1; c < n_cond; ++c)
    cluster_kids[std::size_t(cluster_parent[std::size_t(c)] - np)].push_back(c + np);
  std::vector<char> selected(std::size_t(n_cond), 0);
  std::vector<double> subtree_stab = stability;
  for (int c = n_cond - 1; c >= 1; --c) {
    double kid_sum = 0;
    for (int kid : cluster_kids[std::size_t(c)]) kid_sum += subtree_stab[std::size_t(kid - np)];
    if (!cluster_kids[std::size_t(c)].empty() && kid_sum > stability[std::size_t(c)]) {
      subtree_stab[std::size_t(c)] = kid_sum;
    } else {
      selected[std::size_t(c)] = 1;
      std::vector<int> stack = cluster_kids[std::size_t(c)];
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        selected[std::size_t(v - np)] = 0;
        for (int kid : cluster_kids[std::size_t(v - np)]) stack.push_back(kid);
      }
    }
  }

  // Membership: union every condensed row except those whose child is itself
  // a selected cluster, then read each point's representative.
  Dsu flat(next_cluster);
  for (const auto& r : rows)
    if (r.child < np || !selected[std::size_t(r.child - np)]) flat.unite(r.parent, r.child);
  std::map<int, int> rep_to_cluster;  // dsu representative -> condensed id
  for (int c = 1; c < n_cond; ++c)
    if (selected[std::size_t(c)]) rep_to_cluster[flat.find(c + np)] = c + np;

  std::map<int, std::vector<int>> members;  // condensed id -> point indices
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = rep_to_cluster.find(flat.find(int(i)));
    if (it != rep_to_cluster.end()) members[it->second].push_back(int(i));
  }

  // Dense labels in order of smallest member index.
  std::vector<std::pair<int, int>> order;  // (min member, condensed id)
  for (const auto& [cid, pts] : members) order.push_back({pts.front(), cid});
  std::sort(order.begin(), order.end());
  int noise = int(n);
  for (std::size_t label = 0; label < order.size(); ++label) {
    const int cid = order[label].second;
    for (int pt : members[cid]) out.labels[std::size_t(pt)] = int(label);
    out.stability.push_back(stability[std::size_t(cid - np)]);
    noise -= int(members[cid].size());
  }
  out.n_clusters = int(order.size());
  out.noise_fraction = double(noise) / double(n);
  return out;
}

ClusterProfileTable profile_clusters(const ClusterAssignment& assign,
                                     const FeatureMatrix& raw,
                                     const std::vector<std::string>& bridge_city) {
  if (assign.labels.size() != raw.rows() || bridge_city.size() != raw.rows())
    throw ClusterError("assignment, matrix, and city list must be row-aligned");
  if (raw.mean.size() != raw.cols())
    throw ClusterError("matrix-wide stats missing; run drop_zero_variance first");

  ClusterProfileTable t;
  t.feature_names = raw.names;
  for (const auto& city : bridge_city)
    if (std::find(t.cities.begin(), t.cities.end(), city) == t.cities.end())
      t.cities.push_back(city);

  for (int cid = 0; cid < assign.n_clusters; ++cid) {
    ClusterProfileRow row;
    row.cluster_id = cid;
    row.city_pct.assign(t.cities.size(), 0.0);
    row.mean.assign(raw.cols(), 0.0);
    row.stddev.assign(raw.cols(), 0.0);
    row.z.assign(raw.cols(), 0.0);
    for (std::size_t r = 0; r < raw.rows(); ++r) {
      if (assign.labels[r] != cid) continue;
      row.size++;
      const auto cit = std::find(t.cities.begin(), t.cities.end(), bridge_city[r]);
      row.city_pct[std::size_t(cit - t.cities.begin())] += 1.0;
      for (std::size_t c = 0; c < raw.cols(); ++c) row.mean[c] += raw.at(r, c);
    }
    for (auto& pct : row.city_pct) pct = 100.0 * pct / double(row.size);
    for (auto& m : row.mean) m /= double(row.size);
    for (std::size_t r = 0; r < raw.rows(); ++r) {
      if (assign.labels[r] != cid) continue;
      for (std::size_t c = 0; c < raw.cols(); ++c) {
        const double d = raw.at(r, c) - row.mean[c];
        row.stddev[c] += d * d;
      }
    }
    for (std::size_t c = 0; c < raw.cols(); ++c) {
      row.stddev[c] = std::sqrt(row.stddev[c] / double(row.size));
      row.z[c] = raw.stddev[c] > 1e-12 ? (row.mean[c] - raw.mean[c]) / raw.stddev[c] : 0.0;
    }
    t.rows.push_back(std::move(row));
  }
  t.noise_count = 0;
  for (int l : assign.labels)
    if (l < 0) t.noise_count++;
  return t;
}

void write_embedding_csv(const Embedding& e, const ClusterAssignment& assign,
                         const std::vector<std::int64_t>& bridge_ids,
                         const std::string& path) {
  std::ostringstream out;
  out << "bridge_id,x,y,cluster\n";
  for (std::size_t r = 0; r < bridge_ids.size(); ++r)
    out << bridge_ids[r] << ',' << fmt_g17(e.xy[r * 2]) << ',' << fmt_g17(e.xy[r * 2 + 1])
        << ',' << assign.labels[r] << '\n';
  atomic_write_file(path, out.str());
}

void write_cluster_statistics_csv(const ClusterProfileTable& t, const std::string& path) {
  std::ostringstream out;
  out << "cluster_id,size";
  for (const auto& city : t.cities) out << ',' << csv_escape(city + "_pct");
  for (const auto& f : t.feature_names)
    out << ',' << csv_escape(f + "_mean") << ',' << csv_escape(f + "_std") << ','
        << csv_escape(f + "_z");
  out << '\n';
  for (const auto& row : t.rows) {
    out << row.cluster_id << ',' << row.size;
    for (double pct : row.city_pct) out << ',' << fmt_g17(pct);
    for (std::size_t c = 0; c < t.feature_names.size(); ++c)
      out << ',' << fmt_g17(row.mean[c]) << ',' << fmt_g17(row.stddev[c]) << ','
          << fmt_g17(row.z[c]);
    out << '\n';
  }
  atomic_write_file(path, out.str());
}

ClusterProfileTable read_cluster_statistics_csv(const std::string& path) {
  const auto text = read_file(path);
  if (!text) throw ClusterError("cannot read cluster statistics csv: " + path);
  std::istringstream in(*text);
  std::string line;
  if (!std::getline(in, line))
    throw ClusterError("empty cluster statistics csv: " + path);
  const auto header = csv_split(line);
  if (header.size() < 2 || header[0] != "cluster_id" || header[1] != "size")
    throw ClusterError("cluster statistics csv must start with cluster_id,size: " + path);

  const auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };

  ClusterProfileTable t;
  std::size_t col = 2;
  while (col < header.size() && ends_with(header[col], "_pct")) {
    t.cities.push_back(header[col].substr(0, header[col].size() - 4));
    ++col;
  }
  while (col < header.size()) {
    if (col + 2 >= header.size() || !ends_with(header[col], "_mean") ||
        !ends_with(header[col + 1], "_std") || !ends_with(header[col + 2], "_z"))
      throw ClusterError("malformed feature columns in cluster statistics csv: " + path);
    t.feature_names.push_back(header[col].substr(0, header[col].size() - 5));
    col += 3;
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = csv_split(line);
    if (cells.size() != header.size())
      throw ClusterError("ragged row in cluster statistics csv: " + path);
    ClusterProfileRow row;
    row.cluster_id = int(std::strtol(cells[0].c_str(), nullptr, 10));
    row.size = int(std::strtol(cells[1].c_str(), nullptr, 10));
    std::size_t c = 2;
    for (std::size_t k = 0; k < t.cities.size(); ++k)
      row.city_pct.push_back(std::strtod(cells[c++].c_str(), nullptr));
    for (std::size_t k = 0; k < t.feature_names.size(); ++k) {
      row.mean.push_back(std::strtod(cells[c++].c_str(), nullptr));
      row.stddev.push_back(std::strtod(cells[c++].c_str(), nullptr));
      row.z.push_back(std::strtod(cells[c++].c_str(), nullptr));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace bridgegraph
