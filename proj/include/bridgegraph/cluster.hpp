#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgegraph/features.hpp"

namespace bridgegraph {

// Manifold embedding and density clustering over the normalized feature
// matrix. Everything here is hand-rolled: exact brute-force kNN, the fuzzy
// simplicial graph, SGD layout with negative sampling, and the full
// mutual-reachability / condensed-hierarchy clustering stack. Points are
// passed as row-major buffers (n rows, dim columns) so the stages stay
// decoupled from FeatureMatrix internals.

struct ClusterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UmapParams {
  int n_neighbors = 15;
  double min_dist = 0.1;
  int n_components = 2;  // embedding is always 2-D; kept for config echo
  int n_epochs = 200;
  double learning_rate = 1.0;
  int negative_samples = 5;
  std::uint64_t seed = 0;
};

// Per-point neighborhood graph with smoothed connectivity weights.
//
// For each point i the k nearest neighbors (self excluded, exact search) are
// stored row-major. rho[i] is the distance to i's nearest neighbor and
// sigma[i] the bandwidth solved by binary search so that the neighbor weights
// exp(-max(0, d - rho)/sigma) sum to log2(k). The nearest neighbor therefore
// always carries weight exactly 1. Directed weights are then fused per
// unordered pair as w + w' - w*w'.
struct FuzzyGraph {
  int n = 0;
  int k = 0;
  std::vector<int> knn;          // n*k neighbor indices
  std::vector<double> knn_dist;  // n*k distances, ascending per row
  std::vector<double> knn_w;     // n*k directed weights
  std::vector<double> rho;
  std::vector<double> sigma;
  struct Edge {
    int a = 0, b = 0;  // a < b
    double w = 0.0;    // symmetrized weight in (0, 1]
  };
  std::vector<Edge> edges;  // sorted by (a, b)
};

// Output kernel 1/(1 + a*d^(2b)), least-squares fitted so it tracks the
// piecewise target curve implied by min_dist (1 inside min_dist, exponential
// falloff outside). Fitted over 300 samples on (0, 3].
struct KernelFit {
  double a = 0.0;
  double b = 0.0;
};

struct Embedding {
  int n = 0;
  std::vector<double> xy;  // n*2 row-major
  KernelFit kernel;
  // Expected value of the stochastic objective the optimizer draws samples
  // from: per directed edge, the attractive term at the edge's sampling rate
  // plus the negative-sampling repulsion averaged over uniform candidates.
  // Measured after the first epoch that applied any update and after the
  // last epoch. The exact all-pairs cross-entropy is exposed separately via
  // embedding_cross_entropy; negative-sampling SGD does not monotonically
  // reduce that exact quantity, so progress is tracked on the surrogate it
  // actually optimizes.
  double ce_epoch1 = 0.0;
  double ce_final = 0.0;
};

FuzzyGraph fuzzy_graph(const std::vector<double>& data, std::size_t n,
                       std::size_t dim, const UmapParams& p);

KernelFit fit_output_kernel(double min_dist);

// Layout optimization: coordinates seeded uniformly in [-10, 10]^2 from the
// params seed, then refined by per-edge stochastic gradient steps with
// negative sampling, learning rate annealed linearly to zero.
// Single-threaded by contract so a fixed seed reproduces bit-identical
// coordinates.
Embedding optimize_embedding(const FuzzyGraph& fg, const UmapParams& p);

// fuzzy_graph + optimize_embedding in one call.
Embedding umap_embed(const std::vector<double>& data, std::size_t n,
                     std::size_t dim, const UmapParams& p);

// Exact full-pair cross-entropy of an embedding against the fuzzy graph's
// symmetrized weights (non-edges count as weight 0). Diagnostic companion to
// the sampled-objective fields above.
double embedding_cross_entropy(const std::vector<double>& xy, std::size_t n,
                               const FuzzyGraph& fg, const KernelFit& kf);

struct HdbscanParams {
  int min_cluster_size = 20;
  int min_samples = 10;
};

struct ClusterAssignment {
  std::vector<int> labels;        // per point; -1 = noise
  std::vector<double> stability;  // per cluster, aligned with label values
  int n_clusters = 0;
  double noise_fraction = 0.0;
};

// Distance to the k-th nearest neighbor, self excluded (k capped at n-1).
std::vector<double> core_distances(const std::vector<double>& pts,
                                   std::size_t n, std::size_t dim, int k);

struct MstEdge {
  int a = 0, b = 0;
  double w = 0.0;
};

// Exact MST over the complete mutual-reachability graph
// max(core[a], core[b], d(a,b)) via Prim's algorithm, O(n^2).
std::vector<MstEdge> mutual_reachability_mst(const std::vector<double>& pts,
                                             std::size_t n, std::size_t dim,
                                             const std::vector<double>& core);

// Density clustering of 2-D points: single-linkage hierarchy over the
// mutual-reachability MST, condensed at min_cluster_size, clusters selected
// by excess-of-mass stability (lambda = 1/distance). Merges at exactly equal
// distances are grouped into one multi-way event, which makes the hierarchy,
// and therefore the labels, invariant under input row permutation. Labels are
// dense from 0 in order of each cluster's smallest member index; points in no
// selected cluster get -1. Fewer than min_cluster_size points: all noise.
ClusterAssignment hdbscan_fit(const std::vector<double>& xy, std::size_t n,
                              const HdbscanParams& p);

// Per-cluster statistics over the raw (pre-normalization) feature values:
// mean and population std per feature, plus the z-score of the cluster mean
// under the matrix-wide stats, plus city composition percentages. Cities are
// listed in first-appearance order of the input bridges.
struct ClusterProfileRow {
  int cluster_id = 0;
  int size = 0;
  std::vector<double> city_pct;  // aligned with ClusterProfileTable::cities
  std::vector<double> mean;      // aligned with feature_names
  std::vector<double> stddev;
  std::vector<double> z;  // 0 when the global std is degenerate
};

struct ClusterProfileTable {
  std::vector<std::string> cities;
  std::vector<std::string> feature_names;
  std::vector<ClusterProfileRow> rows;  // ascending cluster_id
  int noise_count = 0;
};

// `raw` must carry matrix-wide mean/stddev (run drop_zero_variance on it)
// but unnormalized values. bridge_city gives each row's city of origin.
ClusterProfileTable profile_clusters(const ClusterAssignment& assign,
                                     const FeatureMatrix& raw,
                                     const std::vector<std::string>& bridge_city);

// umap_embedding.csv: bridge_id,x,y,cluster with %.17g coordinates.
void write_embedding_csv(const Embedding& e, const ClusterAssignment& assign,
                         const std::vector<std::int64_t>& bridge_ids,
                         const std::string& path);

// cluster_statistics.csv: cluster_id,size,<city>_pct...,then
// <feature>_mean,<feature>_std,<feature>_z per feature.
void write_cluster_statistics_csv(const ClusterProfileTable& t,
                                  const std::string& path);

// Inverse of write_cluster_statistics_csv: city axes come from the *_pct
// header columns, feature names from the *_mean/_std/_z triples. The noise
// count is not stored in the file and loads as 0. Throws ClusterError on a
// malformed header or ragged rows.
ClusterProfileTable read_cluster_statistics_csv(const std::string& path);

}  // namespace bridgegraph
