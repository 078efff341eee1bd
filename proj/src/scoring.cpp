#include "bridgegraph/scoring.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bridgegraph/street_graph.hpp"
#include "bridgegraph/util.hpp"

namespace bridgegraph {

namespace {

double clamp_score(double s) { return std::min(100.0, std::max(0.0, s)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double composite_score(const ScoreCard& card, const WeightVector& w) {
  return w.transit * card.transit + w.hospital * card.hospital +
         w.isolation * card.isolation + w.supply * card.supply +
         w.green * card.green;
}

IndicatorEngine::IndicatorEngine(const HeteroGraph& h, const IndicatorParams& p)
    : h_(h), p_(p), dist_cap_(p.transit.impact_radius * 10.0) {
  // Residences.
  for (std::size_t i = 0; i < h.buildings.size(); ++i) {
    const BuildingRecord& b = h.buildings[i];
    if (!b.is_residential) continue;
    res_building_.push_back(int(i));
    res_xy_.push_back(h.building_xy[i]);
    res_node_.push_back(h.building_node[i]);
    res_pop_.push_back(b.population_estimate);
    res_elev_.push_back(b.elevation_m);
    total_pop_ += b.population_estimate;
    if (std::isnan(b.elevation_m)) nodata_residences_++;
  }
  if (!res_xy_.empty()) res_index_ = std::make_unique<SpatialIndex>(res_xy_);

  // Facility pools.
  std::vector<PlanarCoord> bus_xy, hospital_xy, park_xy;
  for (std::size_t i = 0; i < h.facilities.size(); ++i) {
    const FacilityRecord& f = h.facilities[i];
    switch (f.category) {
      case FacilityCategory::BusStop:
        bus_fac_.push_back(int(i));
        bus_node_.push_back(h.facility_node[i]);
        bus_xy.push_back(h.facility_xy[i]);
        break;
      case FacilityCategory::Hospital:
        hospital_fac_.push_back(int(i));
        hospital_node_.push_back(h.facility_node[i]);
        hospital_xy.push_back(h.facility_xy[i]);
        break;
      case FacilityCategory::Park:
        park_fac_.push_back(int(i));
        park_node_.push_back(h.facility_node[i]);
        park_xy.push_back(h.facility_xy[i]);
        break;
      case FacilityCategory::Shop:
        shop_fac_.push_back(int(i));
        shop_node_.push_back(h.facility_node[i]);
        shop_xy_.push_back(h.facility_xy[i]);
        shop_weight_.push_back(is_food_shop(f.subcategory) ? p_.supply.food_weight
                                                           : p_.supply.base_weight);
        break;
      default:
        break;
    }
  }
  if (!bus_xy.empty()) bus_index_ = std::make_unique<SpatialIndex>(bus_xy);
  if (!hospital_xy.empty()) hospital_index_ = std::make_unique<SpatialIndex>(hospital_xy);
  if (!park_xy.empty()) park_index_ = std::make_unique<SpatialIndex>(park_xy);
  if (!shop_xy_.empty()) shop_index_ = std::make_unique<SpatialIndex>(shop_xy_);

  highway_nodes_ = h.streets.highway_nodes();
  if (!highway_nodes_.empty()) {
    std::vector<PlanarCoord> hw_xy;
    hw_xy.reserve(highway_nodes_.size());
    for (int v : highway_nodes_) hw_xy.push_back(h.streets.node_xy(v));
    highway_index_ = std::make_unique<SpatialIndex>(hw_xy);
  }

  // Pre-closure components and the urban core: low-elevation street nodes of
  // the largest component. A component "has core" when any of its nodes is
  // a core node, so residences in never-connected pockets are not counted
  // as newly isolated later.
  comp_open_ = connected_components(h.streets);
  int comp_count = 0;
  for (int c : comp_open_) comp_count = std::max(comp_count, c + 1);
  std::vector<int> comp_size(std::size_t(comp_count), 0);
  for (int c : comp_open_) comp_size[std::size_t(c)]++;
  int largest = -1;
  for (int c = 0; c < comp_count; ++c)
    if (largest < 0 || comp_size[std::size_t(c)] > comp_size[std::size_t(largest)])
      largest = c;
  node_in_core_.assign(std::size_t(h.streets.node_count()), 0);
  comp_open_has_core_.assign(std::size_t(comp_count), 0);
  for (int v = 0; v < h.streets.node_count(); ++v) {
    const double elev = h.node_elevation.empty() ? std::nan("") : h.node_elevation[std::size_t(v)];
    if (comp_open_[std::size_t(v)] == largest && elev < p_.isolation.elev_threshold) {
      node_in_core_[std::size_t(v)] = 1;
      comp_open_has_core_[std::size_t(largest)] = 1;
    }
  }

  memo_bus_.resize(res_xy_.size());
  memo_hosp_.resize(res_xy_.size());
  memo_park_.resize(res_xy_.size());
  memo_shop_.resize(shop_xy_.size());
  memo_bus_pre_.assign(res_xy_.size(), std::nan(""));

  if (bus_fac_.empty()) warnings_.push_back("no bus stops in graph; transit scores are 0");
  if (hospital_fac_.empty()) warnings_.push_back("no hospitals in graph; hospital scores are 0");
  if (park_fac_.empty()) warnings_.push_back("no parks in graph; green scores are 0");
  if (shop_fac_.empty()) warnings_.push_back("no shops in graph; supply scores are 0");
  if (highway_nodes_.empty())
    warnings_.push_back("no primary/trunk highway nodes; supply scores are 0");
  if (nodata_residences_ > 0)
    warnings_.push_back("elevation raster has no data for " +
                        std::to_string(nodata_residences_) +
                        " residence(s); excluded from isolation risk");
}

double IndicatorEngine::capped(double d) const { return std::min(d, dist_cap_); }

std::vector<double> IndicatorEngine::masked_dists(int source,
                                                  const std::vector<int>& targets,
                                                  const std::vector<char>& blocked) const {
  return shortest_dists(h_.streets, source, targets, &blocked);
}

IndicatorEngine::Candidates IndicatorEngine::build_candidates(
    PlanarCoord origin, int origin_node, const SpatialIndex* index,
    const std::vector<int>& pool_nodes, int k) const {
  Candidates c;
  c.ready = true;
  if (!index || origin_node < 0) return c;
  for (const auto& [idx, d2] : index->knn(origin, std::size_t(k))) {
    (void)d2;
    c.nodes.push_back(pool_nodes[std::size_t(idx)]);
  }
  c.open = shortest_dists(h_.streets, origin_node, c.nodes, nullptr);
  c.by_open.resize(c.nodes.size());
  for (std::size_t i = 0; i < c.by_open.size(); ++i) c.by_open[std::size_t(i)] = int(i);
  std::stable_sort(c.by_open.begin(), c.by_open.end(),
                   [&](int a, int b) { return c.open[std::size_t(a)] < c.open[std::size_t(b)]; });
  return c;
}

const IndicatorEngine::Candidates& IndicatorEngine::residence_bus(int res) {
  Candidates& slot = memo_bus_[std::size_t(res)];
  if (!slot.ready)
    slot = build_candidates(res_xy_[std::size_t(res)], res_node_[std::size_t(res)],
                            bus_index_.get(), bus_node_, p_.transit.k_bus);
  return slot;
}

const IndicatorEngine::Candidates& IndicatorEngine::residence_hospitals(int res) {
  Candidates& slot = memo_hosp_[std::size_t(res)];
  if (!slot.ready)
    slot = build_candidates(res_xy_[std::size_t(res)], res_node_[std::size_t(res)],
                            hospital_index_.get(), hospital_node_, p_.hospital.k_hosp);
  return slot;
}

const IndicatorEngine::Candidates& IndicatorEngine::residence_parks(int res) {
  Candidates& slot = memo_park_[std::size_t(res)];
  if (!slot.ready)
    slot = build_candidates(res_xy_[std::size_t(res)], res_node_[std::size_t(res)],
                            park_index_.get(), park_node_, p_.green.k_park);
  return slot;
}

const IndicatorEngine::Candidates& IndicatorEngine::shop_highways(int shop) {
  Candidates& slot = memo_shop_[std::size_t(shop)];
  if (!slot.ready)
    slot = build_candidates(shop_xy_[std::size_t(shop)], shop_node_[std::size_t(shop)],
                            highway_index_.get(), highway_nodes_, p_.supply.k_highway);
  return slot;
}

double IndicatorEngine::detour_sum(const Candidates& c, const std::vector<char>& blocked,
                                   int source_node, bool inverse_rank) const {
  if (c.nodes.empty() || source_node < 0) return 0.0;
  const std::vector<double> masked = masked_dists(source_node, c.nodes, blocked);
  double sum = 0.0;
  for (std::size_t r = 0; r < c.by_open.size(); ++r) {
    const int i = c.by_open[std::size_t(r)];
    const double delta =
        std::max(0.0, capped(masked[std::size_t(i)]) - capped(c.open[std::size_t(i)]));
    const double weight = inverse_rank ? 1.0 / double(r + 1) : 1.0;
    sum += weight * delta;
  }
  return sum;
}

double IndicatorEngine::transit_desert(int bridge, const ClosureMask& mask,
                                       std::uint64_t seed) {
  if (!bus_index_ || !res_index_) return 0.0;
  const std::vector<char> blocked = street_block_bitmap(h_, mask);

  std::vector<int> in_range =
      res_index_->within(h_.bridge_xy[std::size_t(bridge)], p_.transit.impact_radius);
  std::vector<int> sampled;
  if (int(in_range.size()) > p_.transit.sample_cap) {
    Rng rng(seed);
    for (std::size_t pos :
         rng.sample_indices(in_range.size(), std::size_t(p_.transit.sample_cap)))
      sampled.push_back(in_range[pos]);
  } else {
    sampled = std::move(in_range);
  }

  int affected = 0;
  for (int res : sampled) {
    const Candidates& c = residence_bus(res);
    if (c.nodes.empty()) continue;
    double& d_pre = memo_bus_pre_[std::size_t(res)];
    if (std::isnan(d_pre)) {
      d_pre = kInf;
      for (double d : c.open) d_pre = std::min(d_pre, d);
    }
    if (d_pre >= kInf) continue;  // never reachable, closure changes nothing

    const std::vector<double> masked = masked_dists(res_node_[std::size_t(res)], c.nodes, blocked);
    double d_post = kInf;
    for (double d : masked) d_post = std::min(d_post, d);
    if (d_post >= kInf || d_post - d_pre > p_.transit.theta) affected++;
  }
  return clamp_score(double(affected) / p_.transit.n_norm * 100.0);
}

double IndicatorEngine::hospital_access(int bridge, const ClosureMask& mask) {
  if (!hospital_index_ || !res_index_ || res_xy_.empty()) return 0.0;
  const std::vector<char> blocked = street_block_bitmap(h_, mask);
  double sum = 0.0;
  for (int res : res_index_->within(h_.bridge_xy[std::size_t(bridge)],
                                    p_.hospital.influence_radius)) {
    sum += detour_sum(residence_hospitals(res), blocked, res_node_[std::size_t(res)],
                      /*inverse_rank=*/true);
  }
  const double n = double(res_xy_.size());
  return clamp_score(sum / (n * p_.hospital.d_norm) * 100.0);
}

double IndicatorEngine::isolation_risk(int bridge, const ClosureMask& mask) {
  if (!res_index_ || total_pop_ <= 0.0) return 0.0;
  const std::vector<char> blocked = street_block_bitmap(h_, mask);
  const std::vector<int> comp_masked = connected_components(h_.streets, &blocked);
  int comp_count = 0;
  for (int c : comp_masked) comp_count = std::max(comp_count, c + 1);
  std::vector<char> masked_has_core(std::size_t(comp_count), 0);
  for (int v = 0; v < h_.streets.node_count(); ++v)
    if (node_in_core_[std::size_t(v)]) masked_has_core[std::size_t(comp_masked[std::size_t(v)])] = 1;

  double isolated_pop = 0.0;
  for (int res : res_index_->within(h_.bridge_xy[std::size_t(bridge)], p_.isolation.radius)) {
    const double elev = res_elev_[std::size_t(res)];
    if (std::isnan(elev) || elev < p_.isolation.elev_threshold) continue;
    const int v = res_node_[std::size_t(res)];
    if (v < 0) continue;
    const bool pre = comp_open_has_core_[std::size_t(comp_open_[std::size_t(v)])] != 0;
    const bool post = masked_has_core[std::size_t(comp_masked[std::size_t(v)])] != 0;
    if (pre && !post) isolated_pop += res_pop_[std::size_t(res)];
  }
  return clamp_score(isolated_pop / total_pop_ * 100.0);
}

double IndicatorEngine::supply_chain(int bridge, const ClosureMask& mask) {
  if (!shop_index_ || !highway_index_ || shop_xy_.empty()) return 0.0;
  const std::vector<char> blocked = street_block_bitmap(h_, mask);
  double sum = 0.0;
  for (int shop : shop_index_->within(h_.bridge_xy[std::size_t(bridge)],
                                      p_.supply.influence_radius)) {
    sum += shop_weight_[std::size_t(shop)] *
           detour_sum(shop_highways(shop), blocked, shop_node_[std::size_t(shop)],
                      /*inverse_rank=*/false);
  }
  const double n = double(shop_xy_.size());
  return clamp_score(sum / (n * p_.supply.d_norm) * 100.0);
}

double IndicatorEngine::green_space(int bridge, const ClosureMask& mask) {
  (void)bridge;  // every residence participates, no prefilter
  if (!park_index_ || res_xy_.empty()) return 0.0;
  const std::vector<char> blocked = street_block_bitmap(h_, mask);
  double sum = 0.0;
  for (int res = 0; res < int(res_xy_.size()); ++res) {
    sum += detour_sum(residence_parks(res), blocked, res_node_[std::size_t(res)],
                      /*inverse_rank=*/true);
  }
  const double n = double(res_xy_.size());
  return clamp_score(sum / (n * p_.green.d_norm) * 100.0);
}

ScoreReport score_all(const HeteroGraph& h, const IndicatorParams& p,
                      const WeightVector& w, std::uint64_t seed) {
  IndicatorEngine engine(h, p);
  ScoreReport report;
  report.cards.reserve(h.bridges.size());

  for (int b = 0; b < int(h.bridges.size()); ++b) {
    ScoreCard card;
    card.bridge_osm_id = h.bridges[std::size_t(b)].osm_id;
    if (h.snap_failed[std::size_t(b)]) {
      card.snap_failed = true;
      report.cards.push_back(card);
      continue;
    }
    const ClosureMask mask = make_closure_mask(h, b);
    const std::uint64_t bridge_seed = seed ^ std::uint64_t(card.bridge_osm_id);

    auto t0 = std::chrono::steady_clock::now();
    card.transit = engine.transit_desert(b, mask, bridge_seed);
    report.timings.transit_s += seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    card.hospital = engine.hospital_access(b, mask);
    report.timings.hospital_s += seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    card.isolation = engine.isolation_risk(b, mask);
    report.timings.isolation_s += seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    card.supply = engine.supply_chain(b, mask);
    report.timings.supply_s += seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    card.green = engine.green_space(b, mask);
    report.timings.green_s += seconds_since(t0);

    card.composite = clamp_score(composite_score(card, w));
    report.cards.push_back(card);
  }

  report.warnings = engine.warnings();
  return report;
}

void write_scores_csv(const std::vector<BridgeRecord>& bridges,
                      const std::vector<ScoreCard>& cards,
                      const std::string& path) {
  if (bridges.size() != cards.size())
    throw std::invalid_argument("bridges and score cards are misaligned");
  std::ostringstream out;
  out << "bridge_id,name,lat,lon,transit_desert,hospital_access,"
         "isolation_risk,supply_chain,green_space,composite,snap_failed\n";
  for (std::size_t i = 0; i < bridges.size(); ++i) {
    const BridgeRecord& b = bridges[i];
    const ScoreCard& c = cards[i];
    out << b.osm_id << ',' << csv_escape(b.name) << ','
        << fmt_fixed(b.centroid.lat, 7) << ',' << fmt_fixed(b.centroid.lon, 7)
        << ',' << fmt_fixed(c.transit, 4) << ',' << fmt_fixed(c.hospital, 4)
        << ',' << fmt_fixed(c.isolation, 4) << ',' << fmt_fixed(c.supply, 4)
        << ',' << fmt_fixed(c.green, 4) << ',' << fmt_fixed(c.composite, 4)
        << ',' << (c.snap_failed ? "true" : "false") << '\n';
  }
  atomic_write_file(path, out.str());
}

}  // namespace bridgegraph
