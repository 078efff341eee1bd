#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bridgegraph/config.hpp"
#include "bridgegraph/hetero.hpp"
#include "bridgegraph/kdtree.hpp"

namespace bridgegraph {

struct ScoreCard {
  std::int64_t bridge_osm_id = 0;
  double transit = 0.0;
  double hospital = 0.0;
  double isolation = 0.0;
  double supply = 0.0;
  double green = 0.0;
  double composite = 0.0;
  bool snap_failed = false;
};

// Exact weighted sum of the five indicator fields.
double composite_score(const ScoreCard& card, const WeightVector& w);

struct ScoreTimings {
  double transit_s = 0.0;
  double hospital_s = 0.0;
  double isolation_s = 0.0;
  double supply_s = 0.0;
  double green_s = 0.0;
};

struct ScoreReport {
  std::vector<ScoreCard> cards;
  ScoreTimings timings;
  std::vector<std::string> warnings;
};

// Evaluates the five closure indicators against an immutable HeteroGraph.
//
// Open-graph distances and per-entity candidate facility sets never depend
// on a closure, so they are memoized on first use and shared across all
// bridges. Masked distances are recomputed per closure. The memo tables make
// the engine single-threaded; parallel scoring needs one engine per thread.
//
// All network distances feeding weighted deltas are capped at
// transit.impact_radius * 10 before differencing. The cap turns
// disconnection into a large finite detour and keeps every delta a
// non-decreasing function of the blocked edge set.
class IndicatorEngine {
 public:
  IndicatorEngine(const HeteroGraph& h, const IndicatorParams& p);

  // Each indicator takes an explicit mask so tests can drive arbitrary
  // closures (empty masks, merged masks) through the same code path.
  double transit_desert(int bridge, const ClosureMask& mask, std::uint64_t seed);
  double hospital_access(int bridge, const ClosureMask& mask);
  double isolation_risk(int bridge, const ClosureMask& mask);
  double supply_chain(int bridge, const ClosureMask& mask);
  double green_space(int bridge, const ClosureMask& mask);

  const std::vector<std::string>& warnings() const { return warnings_; }
  int nodata_residences() const { return nodata_residences_; }

 private:
  // Candidate facilities for one entity: street nodes in Euclidean order,
  // open-graph distances aligned with them, and a permutation sorting
  // candidates by (open distance, facility index) for inverse-rank weights.
  struct Candidates {
    bool ready = false;
    std::vector<int> nodes;
    std::vector<double> open;
    std::vector<int> by_open;
  };

  double capped(double d) const;
  std::vector<double> masked_dists(int source, const std::vector<int>& targets,
                                   const std::vector<char>& blocked) const;
  const Candidates& residence_bus(int res);
  const Candidates& residence_hospitals(int res);
  const Candidates& residence_parks(int res);
  const Candidates& shop_highways(int shop);
  Candidates build_candidates(PlanarCoord origin, int origin_node,
                              const SpatialIndex* index,
                              const std::vector<int>& pool_nodes, int k) const;
  // Weighted detour sum for one entity: sum over candidates of
  // weight(rank) * max(0, capped(masked) - capped(open)).
  double detour_sum(const Candidates& c, const std::vector<char>& blocked,
                    int source_node, bool inverse_rank) const;

  const HeteroGraph& h_;
  IndicatorParams p_;
  double dist_cap_;

  // Residences (residential buildings), aligned vectors.
  std::vector<int> res_building_;
  std::vector<PlanarCoord> res_xy_;
  std::vector<int> res_node_;
  std::vector<double> res_pop_;
  std::vector<double> res_elev_;
  double total_pop_ = 0.0;
  std::unique_ptr<SpatialIndex> res_index_;

  // Facility pools: indices into h.facilities plus their street nodes.
  std::vector<int> bus_fac_, hospital_fac_, park_fac_, shop_fac_;
  std::vector<int> bus_node_, hospital_node_, park_node_, shop_node_;
  std::vector<double> shop_weight_;
  std::vector<PlanarCoord> shop_xy_;
  std::unique_ptr<SpatialIndex> bus_index_, hospital_index_, park_index_;
  std::unique_ptr<SpatialIndex> shop_index_;

  // Highway-classified street nodes and their own index.
  std::vector<int> highway_nodes_;
  std::unique_ptr<SpatialIndex> highway_index_;

  // Pre-closure connectivity and the urban core membership per component.
  std::vector<int> comp_open_;
  std::vector<char> comp_open_has_core_;
  std::vector<char> node_in_core_;

  // Memo tables, one slot per entity.
  std::vector<Candidates> memo_bus_, memo_hosp_, memo_park_, memo_shop_;
  std::vector<double> memo_bus_pre_;  // d_pre per residence, NaN until filled

  std::vector<std::string> warnings_;
  int nodata_residences_ = 0;
};

// Scores every bridge serially: snap failures short-circuit to an all-zero
// flagged card, everything else runs the five indicators with a per-bridge
// seed of global_seed XOR bridge osm id. Deterministic for a fixed seed.
ScoreReport score_all(const HeteroGraph& h, const IndicatorParams& p,
                      const WeightVector& w, std::uint64_t seed);

// bridges_scored.csv, UTF-8. Header: bridge_id,name,lat,lon,transit_desert,
// hospital_access,isolation_risk,supply_chain,green_space,composite,
// snap_failed. Scores carry four decimals, coordinates seven, snap_failed
// prints true/false. Rows align with `bridges`.
void write_scores_csv(const std::vector<BridgeRecord>& bridges,
                      const std::vector<ScoreCard>& cards,
                      const std::string& path);

}  // namespace bridgegraph
