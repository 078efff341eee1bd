#include "bridgegraph/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "bridgegraph/street_graph.hpp"
#include "bridgegraph/util.hpp"

namespace bridgegraph {

std::string feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Social: return "social";
    case FeatureGroup::Topology: return "topology";
    case FeatureGroup::Spatial: return "spatial";
    case FeatureGroup::Facility: return "facility";
    case FeatureGroup::Attribute: return "attribute";
  }
  return "unknown";
}

std::size_t FeatureMatrix::retained_count() const {
  std::size_t n = 0;
  for (char r : retained) n += std::size_t(r != 0);
  return n;
}

std::vector<FeatureSpec> default_feature_registry() {
  std::vector<FeatureSpec> r;
  auto add = [&r](std::string name, FeatureGroup g, std::string ex) {
    r.push_back({std::move(name), g, std::move(ex)});
  };

  add("transit_desert", FeatureGroup::Social, "score:transit");
  add("hospital_access", FeatureGroup::Social, "score:hospital");
  add("isolation_risk", FeatureGroup::Social, "score:isolation");
  add("supply_chain", FeatureGroup::Social, "score:supply");
  add("green_space", FeatureGroup::Social, "score:green");

  add("betweenness_max", FeatureGroup::Topology, "topo:betweenness_max");
  add("betweenness_mean", FeatureGroup::Topology, "topo:betweenness_mean");
  add("street_connections", FeatureGroup::Topology, "topo:street_connections");
  add("two_hop_neighbors", FeatureGroup::Topology, "topo:two_hop_max");
  add("clustering_coeff", FeatureGroup::Topology, "topo:clustering_max");
  add("street_degree_mean", FeatureGroup::Topology, "topo:degree_mean");
  add("street_degree_max", FeatureGroup::Topology, "topo:degree_max");
  add("way_segments", FeatureGroup::Topology, "topo:way_segments");

  add("water_dist_log", FeatureGroup::Spatial, "spatial:water_dist_log");
  add("elevation", FeatureGroup::Spatial, "spatial:elevation");
  add("latitude", FeatureGroup::Spatial, "spatial:lat");
  add("longitude", FeatureGroup::Spatial, "spatial:lon");
  add("snap_elev_mean", FeatureGroup::Spatial, "spatial:snap_elev_mean");
  add("snap_elev_range", FeatureGroup::Spatial, "spatial:snap_elev_range");

  for (const char* cat : {"hospital", "school", "bus_stop", "park", "shop"}) {
    add(std::string(cat) + "_count_500m", FeatureGroup::Facility,
        std::string("fac:count:") + cat + ":500");
    add(std::string(cat) + "_count_1km", FeatureGroup::Facility,
        std::string("fac:count:") + cat + ":1000");
    add(std::string(cat) + "_dist_log", FeatureGroup::Facility,
        std::string("fac:dist_log:") + cat);
  }

  for (const char* hw : {"motorway", "trunk", "primary", "secondary", "tertiary",
                         "residential", "service", "footway"}) {
    add(std::string("highway_") + hw, FeatureGroup::Attribute,
        std::string("attr:onehot:highway:") + hw);
  }
  for (const char* st : {"beam", "arch", "suspension", "truss"}) {
    add(std::string("structure_") + st, FeatureGroup::Attribute,
        std::string("attr:onehot:bridge:structure:") + st);
  }
  add("railway_crossing", FeatureGroup::Attribute, "attr:flag:railway");
  add("lanes", FeatureGroup::Attribute, "attr:num:lanes");
  add("maxspeed", FeatureGroup::Attribute, "attr:num:maxspeed");
  add("layer", FeatureGroup::Attribute, "attr:num:layer");
  add("width", FeatureGroup::Attribute, "attr:num:width");
  add("length", FeatureGroup::Attribute, "attr:num:length");
  return r;
}

std::vector<FeatureSpec> optional_attribute_features() {
  return {
      {"voltage", FeatureGroup::Attribute, "attr:num:voltage"},
      {"gauge", FeatureGroup::Attribute, "attr:num:gauge"},
      {"frequency", FeatureGroup::Attribute, "attr:num:frequency"},
      {"passenger_lines", FeatureGroup::Attribute, "attr:num:passenger_lines"},
  };
}

namespace {

std::vector<std::string> split_extractor(const std::string& ex) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : ex) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

// Leading numeric value of a tag ("40 km/h" reads as 40); fallback when the
// tag is missing or does not start with a number.
double numeric_tag(const std::map<std::string, std::string>& tags, const std::string& key,
                   double fallback) {
  const auto it = tags.find(key);
  if (it == tags.end()) return fallback;
  const char* s = it->second.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s) return fallback;
  return v;
}

FacilityCategory category_from_token(const std::string& tok) {
  if (tok == "hospital") return FacilityCategory::Hospital;
  if (tok == "school") return FacilityCategory::School;
  if (tok == "bus_stop") return FacilityCategory::BusStop;
  if (tok == "park") return FacilityCategory::Park;
  if (tok == "shop") return FacilityCategory::Shop;
  throw FeatureError("unknown facility category in extractor: " + tok);
}

// Per-bridge topology metrics over the snap nodes.
struct SnapTopology {
  double betweenness_max = 0, betweenness_mean = 0;
  double street_connections = 0;
  double two_hop_max = 0;
  double clustering_max = 0;
  double degree_mean = 0, degree_max = 0;
  double way_segments = 0;
};

SnapTopology snap_topology(const HeteroGraph& h, int bridge,
                           const std::vector<double>& betweenness) {
  SnapTopology t;
  const StreetGraph& g = h.streets;
  std::vector<int> snaps;
  for (int s : h.bridge_snaps[std::size_t(bridge)])
    snaps.push_back(h.snap_edges[std::size_t(s)].node);
  t.street_connections = double(snaps.size());

  for (int e = 0; e < g.edge_count(); ++e)
    if (g.edge(e).way_id == h.bridges[std::size_t(bridge)].osm_id) t.way_segments += 1.0;

  if (snaps.empty()) return t;

  double bet_sum = 0, deg_sum = 0;
  for (int v : snaps) {
    const double bet = v < int(betweenness.size()) ? betweenness[std::size_t(v)] : 0.0;
    bet_sum += bet;
    t.betweenness_max = std::max(t.betweenness_max, bet);

    const auto& nbrs = g.neighbors(v);
    const double deg = double(nbrs.size());
    deg_sum += deg;
    t.degree_max = std::max(t.degree_max, deg);

    // Two-hop neighborhood size, self excluded.
    std::vector<int> frontier = {v};
    std::vector<char> seen(std::size_t(g.node_count()), 0);
    seen[std::size_t(v)] = 1;
    int count = 0;
    for (int hop = 0; hop < 2; ++hop) {
      std::vector<int> next;
      for (int u : frontier) {
        for (const auto& [w, eidx] : g.neighbors(u)) {
          (void)eidx;
          if (!seen[std::size_t(w)]) {
            seen[std::size_t(w)] = 1;
            next.push_back(w);
            count++;
          }
        }
      }
      frontier = std::move(next);
    }
    t.two_hop_max = std::max(t.two_hop_max, double(count));

    // Local clustering: fraction of neighbor pairs that are edges.
    if (nbrs.size() >= 2) {
      std::vector<char> is_nbr(std::size_t(g.node_count()), 0);
      for (const auto& [w, eidx] : nbrs) {
        (void)eidx;
        is_nbr[std::size_t(w)] = 1;
      }
      int links = 0;
      for (const auto& [w, eidx] : nbrs) {
        (void)eidx;
        for (const auto& [x, eidx2] : g.neighbors(w)) {
          (void)eidx2;
          if (x > w && is_nbr[std::size_t(x)]) links++;
        }
      }
      const double pairs = double(nbrs.size()) * double(nbrs.size() - 1) / 2.0;
      t.clustering_max = std::max(t.clustering_max, double(links) / pairs);
    }
  }
  t.betweenness_mean = bet_sum / double(snaps.size());
  t.degree_mean = deg_sum / double(snaps.size());
  return t;
}

}  // namespace

FeatureMatrix assemble_features(const FeatureInputs& in,
                                const std::vector<FeatureSpec>& registry) {
  const HeteroGraph& h = in.h;
  FeatureMatrix m;
  m.names.reserve(registry.size());
  for (const auto& spec : registry) {
    m.names.push_back(spec.name);
    m.groups.push_back(spec.group);
  }
  m.bridge_ids.reserve(h.bridges.size());
  for (const auto& b : h.bridges) m.bridge_ids.push_back(b.osm_id);
  m.values.assign(m.rows() * m.cols(), 0.0);
  m.retained.assign(m.cols(), 1);
  m.mean.assign(m.cols(), 0.0);
  m.stddev.assign(m.cols(), 0.0);

  // Facility positions bucketed by category for count/distance columns.
  std::vector<std::vector<PlanarCoord>> fac_xy(6);
  for (std::size_t i = 0; i < h.facilities.size(); ++i)
    fac_xy[std::size_t(h.facilities[i].category)].push_back(h.facility_xy[i]);

  for (std::size_t b = 0; b < h.bridges.size(); ++b) {
    const BridgeRecord& br = h.bridges[b];
    const ScoreCard& card = in.cards[b];
    const SnapTopology topo = snap_topology(h, int(b), in.betweenness);
    const PlanarCoord at = h.bridge_xy[b];

    for (std::size_t c = 0; c < registry.size(); ++c) {
      const auto parts = split_extractor(registry[c].extractor);
      double v = 0.0;
      if (parts[0] == "score" && parts.size() == 2) {
        if (parts[1] == "transit") v = card.transit;
        else if (parts[1] == "hospital") v = card.hospital;
        else if (parts[1] == "isolation") v = card.isolation;
        else if (parts[1] == "supply") v = card.supply;
        else if (parts[1] == "green") v = card.green;
        else throw FeatureError("unknown score extractor: " + registry[c].extractor);
      } else if (parts[0] == "topo" && parts.size() == 2) {
        if (parts[1] == "betweenness_max") v = topo.betweenness_max;
        else if (parts[1] == "betweenness_mean") v = topo.betweenness_mean;
        else if (parts[1] == "street_connections") v = topo.street_connections;
        else if (parts[1] == "two_hop_max") v = topo.two_hop_max;
        else if (parts[1] == "clustering_max") v = topo.clustering_max;
        else if (parts[1] == "degree_mean") v = topo.degree_mean;
        else if (parts[1] == "degree_max") v = topo.degree_max;
        else if (parts[1] == "way_segments") v = topo.way_segments;
        else throw FeatureError("unknown topology extractor: " + registry[c].extractor);
      } else if (parts[0] == "spatial" && parts.size() == 2) {
        if (parts[1] == "water_dist_log") {
          if (!in.water_xy.empty()) {
            double best = kInf;
            for (const auto& w : in.water_xy)
              best = std::min(best, planar_distance(at, w));
            v = std::log1p(best);
          }
        } else if (parts[1] == "elevation") {
          if (in.raster) {
            const double e = in.raster->sample(at);
            v = in.raster->is_nodata(e) ? 0.0 : e;
          }
        } else if (parts[1] == "lat") {
          v = br.centroid.lat;
        } else if (parts[1] == "lon") {
          v = br.centroid.lon;
        } else if (parts[1] == "snap_elev_mean" || parts[1] == "snap_elev_range") {
          double sum = 0, lo = kInf, hi = -kInf;
          int n = 0;
          for (int s : h.bridge_snaps[b]) {
            const int node = h.snap_edges[std::size_t(s)].node;
            const double e = h.node_elevation.empty()
                                 ? std::nan("")
                                 : h.node_elevation[std::size_t(node)];
            if (std::isnan(e)) continue;
            sum += e;
            lo = std::min(lo, e);
            hi = std::max(hi, e);
            n++;
          }
          if (n > 0) v = parts[1] == "snap_elev_mean" ? sum / n : hi - lo;
        } else {
          throw FeatureError("unknown spatial extractor: " + registry[c].extractor);
        }
      } else if (parts[0] == "fac" && parts.size() >= 3) {
        const auto& pool = fac_xy[std::size_t(category_from_token(parts[2]))];
        if (parts[1] == "count" && parts.size() == 4) {
          const double radius = std::strtod(parts[3].c_str(), nullptr);
          int count = 0;
          for (const auto& p : pool)
            if (planar_distance(at, p) <= radius) count++;
          v = double(count);
        } else if (parts[1] == "dist_log" && parts.size() == 3) {
          if (pool.empty()) {
            v = -1.0;  // numeric absence sentinel
          } else {
            double best = kInf;
            for (const auto& p : pool) best = std::min(best, planar_distance(at, p));
            v = std::log1p(best);
          }
        } else {
          throw FeatureError("unknown facility extractor: " + registry[c].extractor);
        }
      } else if (parts[0] == "attr" && parts.size() >= 3) {
        if (parts[1] == "onehot" && parts.size() >= 4) {
          // Tag key may itself contain ':' (bridge:structure); the value is
          // the final token.
          std::string key = parts[2];
          for (std::size_t i = 3; i + 1 < parts.size(); ++i) key += ":" + parts[i];
          const std::string& want = parts.back();
          const auto it = br.tags.find(key);
          v = (it != br.tags.end() && it->second == want) ? 1.0 : 0.0;
        } else if (parts[1] == "flag" && parts.size() == 3) {
          v = br.tags.count(parts[2]) ? 1.0 : 0.0;
        } else if (parts[1] == "num" && parts.size() == 3) {
          // Absent layer means ground level, not missing data.
          const double fallback = parts[2] == "layer" ? 0.0 : -1.0;
          v = numeric_tag(br.tags, parts[2], fallback);
        } else {
          throw FeatureError("unknown attribute extractor: " + registry[c].extractor);
        }
      } else {
        throw FeatureError("unknown extractor: " + registry[c].extractor);
      }
      m.at(b, c) = v;
    }
  }
  return m;
}

void drop_zero_variance(FeatureMatrix& m) {
  const std::size_t n = m.rows();
  m.mean.assign(m.cols(), 0.0);
  m.stddev.assign(m.cols(), 0.0);
  m.retained.assign(m.cols(), 0);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mu = 0;
    for (std::size_t r = 0; r < n; ++r) mu += m.at(r, c);
    mu /= n > 0 ? double(n) : 1.0;
    double var = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = m.at(r, c) - mu;
      var += d * d;
    }
    var /= n > 0 ? double(n) : 1.0;
    m.mean[c] = mu;
    m.stddev[c] = std::sqrt(var);
    m.retained[c] = var > 1e-6 ? 1 : 0;
  }
}

void zscore_normalize(FeatureMatrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (!m.retained[c]) continue;
    for (std::size_t r = 0; r < m.rows(); ++r)
      m.at(r, c) = (m.at(r, c) - m.mean[c]) / m.stddev[c];
  }
  m.normalized = true;
}

std::vector<char> flag_outliers(const FeatureMatrix& m) {
  std::vector<char> flags(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    int extreme = 0;
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m.retained[c] && std::fabs(m.at(r, c)) > 3.0) extreme++;
    flags[r] = extreme > 3 ? 1 : 0;
  }
  return flags;
}

void write_features_csv(const FeatureMatrix& m, const std::string& path) {
  std::ostringstream out;
  out << "bridge_id";
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (m.retained[c]) out << ',' << csv_escape(m.names[c]);
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << m.bridge_ids[r];
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m.retained[c]) out << ',' << fmt_g17(m.at(r, c));
    out << '\n';
  }
  atomic_write_file(path, out.str());
}

FeatureMatrix read_features_csv(const std::string& path) {
  const auto text = read_file(path);
  if (!text) throw FeatureError("cannot read features csv: " + path);
  std::istringstream in(*text);
  std::string line;
  FeatureMatrix m;
  if (!std::getline(in, line)) throw FeatureError("empty features csv: " + path);
  auto header = csv_split(line);
  if (header.empty() || header[0] != "bridge_id")
    throw FeatureError("features csv must start with bridge_id: " + path);
  for (std::size_t c = 1; c < header.size(); ++c) {
    m.names.push_back(header[c]);
    m.groups.push_back(FeatureGroup::Social);  // group is not serialized
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = csv_split(line);
    if (cells.size() != header.size())
      throw FeatureError("ragged row in features csv: " + path);
    m.bridge_ids.push_back(std::strtoll(cells[0].c_str(), nullptr, 10));
    for (std::size_t c = 1; c < cells.size(); ++c)
      m.values.push_back(std::strtod(cells[c].c_str(), nullptr));
  }
  m.retained.assign(m.cols(), 1);
  m.mean.assign(m.cols(), 0.0);
  m.stddev.assign(m.cols(), 0.0);
  return m;
}

void write_feature_stats_csv(const FeatureMatrix& m, const std::string& path) {
  std::ostringstream out;
  out << "name,group,mean,stddev,retained\n";
  for (std::size_t c = 0; c < m.cols(); ++c) {
    out << csv_escape(m.names[c]) << ',' << feature_group_name(m.groups[c]) << ','
        << fmt_g17(m.mean[c]) << ',' << fmt_g17(m.stddev[c]) << ','
        << int(m.retained[c]) << '\n';
  }
  atomic_write_file(path, out.str());
}

}  // namespace bridgegraph
