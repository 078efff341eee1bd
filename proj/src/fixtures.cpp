#include "bridgegraph/fixtures.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bridgegraph/config.hpp"
#include "bridgegraph/elevation.hpp"
#include "bridgegraph/geo.hpp"
#include "bridgegraph/overpass.hpp"
#include "bridgegraph/util.hpp"

namespace bridgegraph {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// 22x22 street grid crossed by two parallel rivers: the Asagiri between rows
// 5/6 and the Kanna between rows 15/16. Each river gets one crossing per
// column, so the 44 road bridges form two spatially separated families; that
// bimodality is what lets the downstream clustering find two archetypes of
// at least twenty members in a 50-bridge city.
//
// Block sizes are irregular so shortest paths are unique: closing a crossing
// then forces a real detour instead of an equal-length alternative. The two
// river gaps are exactly 50 m wide, which keeps a two-node bridge way's
// centroid 25 m from either endpoint (inside the snap radius) while every
// third node stays beyond it.
constexpr int kGridN = 22;
constexpr double kRiverGap = 50.0;

// Gap east of column c / north of row r. Rows 5 and 15 border the rivers.
double gap_x(int c) { return 50.0 + 30.0 * ((c * 7 + 3) % 5); }
double gap_y(int r) {
  if (r == 5 || r == 15) return kRiverGap;
  return 50.0 + 30.0 * ((r * 11 + 2) % 5);
}

struct CityRecipe {
  BBox bbox;
  ProjectionParams proj;
  bool east_ridge = false;  // false: lone hill under the outpost
};

CityRecipe recipe_for(const std::string& city) {
  CityRecipe r;
  if (city == "synthetic-small") {
    r.bbox = {35.600, 139.400, 35.648, 139.460};
    r.proj = ProjectionParams{};  // zone IX defaults
    r.east_ridge = false;
    return r;
  }
  if (city == "synthetic-ridge") {
    r.bbox = {39.672, 141.100, 39.720, 141.160};
    r.proj.lat0 = 40.0;
    r.proj.lon0 = 140.0 + 50.0 / 60.0;
    r.east_ridge = true;
    return r;
  }
  throw ConfigError("unknown fixture city '" + city + "'");
}

// Row 2 is the only primary row and column 5 the only primary column, and
// the column keeps that class just on its southernmost segment: every
// arterial node then sits south of the Asagiri, so supply routes from the
// rest of the city must cross it.
std::string_view row_class(int r) {
  if (r == 2) return "primary";
  if (r == 19) return "secondary";
  if (r == 8 || r == 13) return "tertiary";
  return "residential";
}
std::string_view col_class(int c) {
  if (c == 2 || c == 19) return "secondary";
  if (c == 8 || c == 13) return "tertiary";
  return "residential";
}

class CityBuilder {
 public:
  explicit CityBuilder(const CityRecipe& r) : recipe_(r), tm_(r.proj) {
    const GeoCoord center{(r.bbox.min_lat + r.bbox.max_lat) / 2.0,
                          (r.bbox.min_lon + r.bbox.max_lon) / 2.0};
    const PlanarCoord c = tm_.project(center);
    xs_.resize(kGridN);
    ys_.resize(kGridN);
    double w = 0.0, hgt = 0.0;
    for (int i = 0; i + 1 < kGridN; ++i) {
      w += gap_x(i);
      hgt += gap_y(i);
    }
    xs_[0] = c.x - w / 2.0;
    ys_[0] = c.y - hgt / 2.0;
    for (int i = 1; i < kGridN; ++i) {
      xs_[i] = xs_[i - 1] + gap_x(i - 1);
      ys_[i] = ys_[i - 1] + gap_y(i - 1);
    }
    cx_ = c.x;
    cy_ = c.y;
  }

  const CityRecipe& recipe() const { return recipe_; }
  const TransverseMercator& tm() const { return tm_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }

  double gx(int c) const { return xs_[std::size_t(c)]; }
  double gy(int r) const { return ys_[std::size_t(r)]; }
  double south_river_y() const { return (gy(5) + gy(6)) / 2.0; }
  double north_river_y() const { return (gy(15) + gy(16)) / 2.0; }

  // The outpost: a 2x3 pocket grid east of the main grid, reached only over
  // the gorge bridge. Its residents sit above the elevation threshold in
  // both cities, so that one closure genuinely cuts high ground off.
  double ox(int j) const { return gx(kGridN - 1) + 50.0 + 50.0 * j; }
  double oy(int i) const { return gy(13) + 50.0 * i; }

  static std::int64_t node_id(int r, int c) { return 100000 + r * 100 + c; }
  static std::int64_t outpost_node_id(int i, int j) { return 130000 + i * 100 + j; }

  json point(double x, double y) const {
    const GeoCoord g = tm_.inverse({x, y});
    return json{{"lat", g.lat}, {"lon", g.lon}};
  }

  json node_el(std::int64_t id, double x, double y, json tags) const {
    const GeoCoord g = tm_.inverse({x, y});
    json el{{"type", "node"}, {"id", id}, {"lat", g.lat}, {"lon", g.lon}};
    if (!tags.empty()) el["tags"] = std::move(tags);
    return el;
  }

  json way_el(std::int64_t id, json tags, const std::vector<std::pair<double, double>>& pts,
              const std::vector<std::int64_t>& refs) const {
    json g = json::array();
    for (const auto& [x, y] : pts) g.push_back(point(x, y));
    json el{{"type", "way"}, {"id", id}, {"tags", std::move(tags)}, {"geometry", std::move(g)}};
    if (!refs.empty()) el["nodes"] = refs;
    return el;
  }

  // Axis-aligned closed square ring centered at (x, y).
  json square_way(std::int64_t id, json tags, double x, double y, double half) const {
    std::vector<std::pair<double, double>> pts = {{x - half, y - half},
                                                  {x + half, y - half},
                                                  {x + half, y + half},
                                                  {x - half, y + half},
                                                  {x - half, y - half}};
    std::vector<std::int64_t> refs;
    for (int i = 0; i < 4; ++i) refs.push_back(id * 10 + i);
    refs.push_back(id * 10);
    return way_el(id, std::move(tags), pts, refs);
  }

 private:
  CityRecipe recipe_;
  TransverseMercator tm_;
  std::vector<double> xs_, ys_;
  double cx_ = 0.0;
  double cy_ = 0.0;
};

struct ElementSets {
  json streets = json::array();
  json bridges_tagged = json::array();
  json bridges_man_made = json::array();
  json buildings = json::array();
  json facilities = json::array();
  json waterways = json::array();
};

ElementSets build_elements(const CityBuilder& b) {
  ElementSets out;
  const double cx = b.cx(), cy = b.cy();
  const double west = b.gx(0) - 400.0;
  const double east = b.ox(2) + 400.0;
  const double south = b.gy(0) - 400.0;

  // Rows run unbroken; columns are split at both rivers, so only bridge
  // ways connect the three bands.
  for (int r = 0; r < kGridN; ++r) {
    std::vector<std::pair<double, double>> pts;
    std::vector<std::int64_t> refs;
    for (int c = 0; c < kGridN; ++c) {
      pts.emplace_back(b.gx(c), b.gy(r));
      refs.push_back(CityBuilder::node_id(r, c));
    }
    out.streets.push_back(
        b.way_el(200000 + r, json{{"highway", std::string(row_class(r))}}, pts, refs));
  }
  for (int c = 0; c < kGridN; ++c) {
    const int band[3][2] = {{0, 5}, {6, 15}, {16, kGridN - 1}};
    for (int seg = 0; seg < 3; ++seg) {
      std::vector<std::pair<double, double>> pts;
      std::vector<std::int64_t> refs;
      for (int r = band[seg][0]; r <= band[seg][1]; ++r) {
        pts.emplace_back(b.gx(c), b.gy(r));
        refs.push_back(CityBuilder::node_id(r, c));
      }
      const std::string cls =
          (c == 5 && seg == 0) ? "primary" : std::string(col_class(c));
      out.streets.push_back(b.way_el(300000 + c * 10 + seg, json{{"highway", cls}}, pts, refs));
    }
  }

  // One crossing per column on each river. The Asagiri carries the old-town
  // stock and the Kanna the newer bypass stock; uniform tags within a family
  // keep each family compact in feature space while position still varies.
  auto crossing = [&](std::int64_t id, const std::string& name, int row, int col, bool old_town) {
    json tags{{"bridge", "yes"},
              {"layer", old_town ? "1" : "2"},
              {"name", name},
              {"highway", old_town ? "residential" : "secondary"},
              {"bridge:structure", old_town ? "beam" : "truss"},
              {"lanes", old_town ? "1" : "4"},
              {"width", old_town ? "3.5" : "14.0"},
              {"length", old_town ? "38.0" : "68.0"}};
    if (!old_town) tags["maxspeed"] = "60";
    return b.way_el(id, std::move(tags),
                    {{b.gx(col), b.gy(row)}, {b.gx(col), b.gy(row + 1)}},
                    {CityBuilder::node_id(row, col), CityBuilder::node_id(row + 1, col)});
  };
  for (int c = 0; c < kGridN; ++c) {
    json w = crossing(400000 + c, "Asagiri Bridge " + std::to_string(c + 1), 5, c, true);
    out.streets.push_back(w);
    out.bridges_tagged.push_back(std::move(w));
  }
  for (int c = 0; c < kGridN; ++c) {
    json w = crossing(410000 + c, "Kanna Bridge " + std::to_string(c + 1), 15, c, false);
    out.streets.push_back(w);
    out.bridges_tagged.push_back(std::move(w));
  }

  // Outpost pocket grid and the single bridge that reaches it.
  {
    for (int i = 0; i < 2; ++i) {
      std::vector<std::pair<double, double>> pts;
      std::vector<std::int64_t> refs;
      for (int j = 0; j < 3; ++j) {
        pts.emplace_back(b.ox(j), b.oy(i));
        refs.push_back(CityBuilder::outpost_node_id(i, j));
      }
      out.streets.push_back(b.way_el(250000 + i, json{{"highway", "residential"}}, pts, refs));
    }
    for (int j = 0; j < 3; ++j) {
      out.streets.push_back(b.way_el(
          250010 + j, json{{"highway", "residential"}},
          {{b.ox(j), b.oy(0)}, {b.ox(j), b.oy(1)}},
          {CityBuilder::outpost_node_id(0, j), CityBuilder::outpost_node_id(1, j)}));
    }
    json w = b.way_el(415000,
                      json{{"bridge", "yes"},
                           {"layer", "1"},
                           {"name", "Tsurumi Gorge Bridge"},
                           {"highway", "residential"},
                           {"bridge:structure", "arch"},
                           {"lanes", "1"},
                           {"width", "5.0"},
                           {"length", "50.0"}},
                      {{b.gx(kGridN - 1), b.gy(13)}, {b.ox(0), b.oy(0)}},
                      {CityBuilder::node_id(13, kGridN - 1), CityBuilder::outpost_node_id(0, 0)});
    out.streets.push_back(w);
    out.bridges_tagged.push_back(std::move(w));
  }

  // Named footbridges: man_made=bridge over 50 m node pairs, so they snap
  // without contributing street edges (footways are not street-class ways).
  struct Foot {
    std::int64_t id;
    const char* name;
    int r0, c0, r1, c1;
  };
  const Foot foot[] = {{420001, "Willow Footbridge", 2, 1, 2, 2},
                       {420002, "Heron Walk Bridge", 19, 1, 19, 2},
                       {420003, "Camellia Footbridge", 8, 16, 9, 16}};
  for (const Foot& f : foot) {
    json tags{{"man_made", "bridge"}, {"highway", "footway"},        {"layer", "1"},
              {"name", f.name},       {"bridge:structure", "truss"}, {"width", "2.5"},
              {"length", "50.0"}};
    out.bridges_man_made.push_back(
        b.way_el(f.id, std::move(tags), {{b.gx(f.c0), b.gy(f.r0)}, {b.gx(f.c1), b.gy(f.r1)}},
                 {CityBuilder::node_id(f.r0, f.c0), CityBuilder::node_id(f.r1, f.c1)}));
  }

  // Named rail bridges far outside the grid: nothing to snap to, so the
  // pipeline must carry them as snap failures instead of dropping them.
  out.bridges_tagged.push_back(
      b.way_el(430001,
               json{{"bridge", "yes"}, {"railway", "rail"}, {"layer", "1"},
                    {"name", "Old Quarry Bridge"}, {"bridge:structure", "truss"},
                    {"length", "50.0"}},
               {{east, cy + 600.0}, {east + 50.0, cy + 600.0}}, {900001, 900002}));
  out.bridges_tagged.push_back(
      b.way_el(430002,
               json{{"bridge", "viaduct"}, {"railway", "rail"}, {"layer", "2"},
                    {"name", "Hillside Rail Bridge"}, {"length", "48.0"}},
               {{west, cy - 500.0}, {west, cy - 550.0}}, {900003, 900004}));

  // Unnamed structures both patterns must filter out.
  out.bridges_tagged.push_back(b.way_el(440001, json{{"bridge", "yes"}},
                                        {{cx + 200.0, south}, {cx + 250.0, south}},
                                        {900011, 900012}));
  out.bridges_man_made.push_back(b.way_el(440002, json{{"man_made", "bridge"}},
                                          {{cx - 400.0, south}, {cx - 350.0, south}},
                                          {900013, 900014}));

  // Hospitals, schools, and bus stops sit in the outskirts beyond the grid,
  // more than a kilometre from either bridge row. They still snap to edge
  // nodes for routing, but no bridge has any of them inside its count
  // circles, so those counts carry no within-family structure that could
  // shear a bridge family apart in feature space.
  const double far_south = b.gy(0) - 1100.0;
  const double far_north = b.gy(kGridN - 1) + 1100.0;
  out.facilities.push_back(b.node_el(
      500001, b.gx(5), far_south,
      json{{"amenity", "hospital"}, {"name", "Sakura General Hospital"}}));
  out.facilities.push_back(b.node_el(
      500002, b.gx(16), far_north,
      json{{"amenity", "hospital"}, {"name", "Hilltop Medical Center"}}));
  out.facilities.push_back(b.node_el(500011, b.gx(3), far_south - 60.0,
                                     json{{"amenity", "school"}, {"name", "Minami Elementary School"}}));
  out.facilities.push_back(b.node_el(500012, b.gx(15), far_south - 110.0,
                                     json{{"amenity", "school"}, {"name", "Kawakita Middle School"}}));
  out.facilities.push_back(b.square_way(500013,
                                        json{{"amenity", "school"}, {"name", "Higashi High School"}},
                                        b.gx(18), far_north + 60.0, 30.0));
  out.facilities.push_back(b.node_el(500014, b.gx(8), far_north + 110.0,
                                     json{{"amenity", "school"}, {"name", "Tsubaki Academy"}}));

  // Every bus stop is in the southern outskirts, one per column: transit
  // access from the rest of the city depends on the crossings, and each
  // crossing serves the residences directly above it.
  for (int c = 0; c < kGridN; ++c) {
    out.facilities.push_back(b.node_el(500101 + c, b.gx(c), far_south + 50.0,
                                       json{{"highway", "bus_stop"},
                                            {"name", "Stop " + std::to_string(c)}}));
  }

  // Parks lie west of the grid, one per band, far enough out that no count
  // circle reaches them; each snaps to a column-0 node, so green-space
  // access from the other bands crosses a column-0 bridge.
  auto park_square = [&](std::int64_t id, const char* name, const char* leisure, double x,
                         double y) {
    json tags{{"leisure", leisure}, {"name", name}};
    return b.square_way(id, std::move(tags), x, y, 120.0);
  };
  const double park_x = b.gx(0) - 1200.0;
  out.facilities.push_back(park_square(710001, "Riverside Park", "park", park_x, b.gy(2)));
  out.facilities.push_back(park_square(710002, "South Meadow Park", "park", park_x, b.gy(9)));
  out.facilities.push_back(park_square(710003, "Kita Reserve", "nature_reserve", park_x, b.gy(19)));

  // Shops along three retail rows; roughly half are food retail. Mid-band
  // shops reach the arterials across the Asagiri and north-band shops cross
  // both rivers, and a shop's nearest arterial nodes sit straight down its
  // own column, so every supply run detours when its column's crossing
  // closes. One shop per column in the north band keeps the count circles
  // smooth along the row.
  {
    static const char* kKinds[] = {"supermarket", "books", "convenience", "clothes", "bakery",
                                   "florist",     "greengrocer", "hardware", "deli", "shoes",
                                   "butcher"};
    for (int i = 0; i < 10; ++i) {
      const int c = 1 + 2 * i;
      out.facilities.push_back(b.node_el(500201 + i, b.gx(c), b.gy(9), json{{"shop", kKinds[i]}}));
    }
    static const char* kRow12[] = {"convenience", "butcher", "kiosk", "supermarket", "stationery"};
    const int kRow12Cols[] = {5, 9, 13, 17, 21};
    for (int i = 0; i < 5; ++i) {
      out.facilities.push_back(
          b.node_el(500211 + i, b.gx(kRow12Cols[i]), b.gy(12), json{{"shop", kRow12[i]}}));
    }
    for (int c = 0; c < kGridN; ++c) {
      out.facilities.push_back(
          b.node_el(500221 + c, b.gx(c), b.gy(18), json{{"shop", kKinds[c % 11]}}));
    }
  }

  // Residential blocks: one small square on roughly a third of the grid
  // cells, offset into the block interior so nothing coincides with a node.
  for (int r = 0; r < kGridN; ++r) {
    for (int c = 0; c < kGridN; ++c) {
      if ((r + c) % 3 != 1) continue;
      const bool flats = (r + c) % 4 < 2;
      json tags{{"building", flats ? "apartments" : "house"},
                {"building:levels", flats ? "4" : "2"}};
      out.buildings.push_back(
          b.square_way(600000 + r * 100 + c, std::move(tags), b.gx(c) + 18.0, b.gy(r) + 18.0, 8.0));
    }
  }
  // The outpost is fully residential.
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.buildings.push_back(b.square_way(660000 + i * 10 + j,
                                           json{{"building", "house"}, {"building:levels", "2"}},
                                           b.ox(j) + 18.0, b.oy(i) + 18.0, 8.0));
    }
  }
  // A few non-residential buildings near the retail rows.
  struct NonRes {
    std::int64_t id;
    const char* kind;
    int r, c;
  };
  const NonRes nonres[] = {{690001, "retail", 9, 4},
                           {690002, "retail", 9, 12},
                           {690003, "industrial", 0, 18},
                           {690004, "office", 12, 4},
                           {690005, "retail", 9, 16}};
  for (const NonRes& n : nonres) {
    out.buildings.push_back(b.square_way(n.id, json{{"building", n.kind}}, b.gx(n.c) + 18.0,
                                         b.gy(n.r) + 18.0, 10.0));
  }
  // One multipolygon relation, outer ring only, to keep that parse path warm.
  {
    json ring = json::array();
    const double x = b.gx(12) + 18.0, y = b.gy(12) + 18.0, half = 10.0;
    const double pts[5][2] = {{x - half, y - half},
                              {x + half, y - half},
                              {x + half, y + half},
                              {x - half, y + half},
                              {x - half, y - half}};
    for (const auto& p : pts) ring.push_back(b.point(p[0], p[1]));
    json member{{"type", "way"}, {"ref", 650002}, {"role", "outer"}, {"geometry", std::move(ring)}};
    out.buildings.push_back(json{{"type", "relation"},
                                 {"id", 650001},
                                 {"tags", json{{"building", "apartments"}}},
                                 {"members", json::array({std::move(member)})}});
  }

  // The two rivers the bridges cross.
  {
    std::vector<std::pair<double, double>> asagiri, kanna;
    std::vector<std::int64_t> a_refs, k_refs;
    for (int i = 0; i < 8; ++i) {
      asagiri.emplace_back(cx - 1400.0 + 400.0 * i, b.south_river_y());
      kanna.emplace_back(cx - 1400.0 + 400.0 * i, b.north_river_y());
      a_refs.push_back(910001 + i);
      k_refs.push_back(920001 + i);
    }
    out.waterways.push_back(b.way_el(800001, json{{"waterway", "river"}, {"name", "Asagiri River"}},
                                     asagiri, a_refs));
    out.waterways.push_back(b.way_el(800002, json{{"waterway", "river"}, {"name", "Kanna River"}},
                                     kanna, k_refs));
  }
  return out;
}

ElevationRaster build_dem(const CityBuilder& b) {
  const BBox& bb = b.recipe().bbox;
  const GeoCoord corners[4] = {{bb.min_lat, bb.min_lon},
                               {bb.min_lat, bb.max_lon},
                               {bb.max_lat, bb.min_lon},
                               {bb.max_lat, bb.max_lon}};
  double minx = 0, maxx = 0, miny = 0, maxy = 0;
  for (int i = 0; i < 4; ++i) {
    const PlanarCoord p = b.tm().project(corners[i]);
    if (i == 0 || p.x < minx) minx = p.x;
    if (i == 0 || p.x > maxx) maxx = p.x;
    if (i == 0 || p.y < miny) miny = p.y;
    if (i == 0 || p.y > maxy) maxy = p.y;
  }

  ElevationRaster r;
  r.cellsize = 40.0;
  r.xllcorner = minx - 200.0;
  r.yllcorner = miny - 200.0;
  r.ncols = int(std::ceil((maxx + 200.0 - r.xllcorner) / r.cellsize));
  r.nrows = int(std::ceil((maxy + 200.0 - r.yllcorner) / r.cellsize));
  r.values.resize(std::size_t(r.ncols) * std::size_t(r.nrows));

  // Both relief shapes put the outpost above the 100 m threshold. The small
  // city uses a lone hill squeezed tight in the north-south direction so the
  // slope dies out before the river rows; the ridge city raises a band that
  // also covers the grid's easternmost column, giving it extra high-ground
  // residences the small city does not have.
  const double hx = b.ox(1);  // outpost center
  const double hy = (b.oy(0) + b.oy(1)) / 2.0;
  for (int sr = 0; sr < r.nrows; ++sr) {
    const int from_bottom = r.nrows - 1 - sr;  // storage row 0 is the north edge
    const double y = r.yllcorner + (from_bottom + 0.5) * r.cellsize;
    for (int c = 0; c < r.ncols; ++c) {
      const double x = r.xllcorner + (c + 0.5) * r.cellsize;
      const double dx = x - hx;
      double h;
      if (b.recipe().east_ridge) {
        h = 12.0 + 115.0 * std::exp(-(dx * dx) / (2.0 * 150.0 * 150.0));
      } else {
        const double dy = y - hy;
        h = 18.0 + 115.0 * std::exp(-(dx * dx) / (2.0 * 200.0 * 200.0) -
                                    (dy * dy) / (2.0 * 90.0 * 90.0));
      }
      r.values[std::size_t(sr) * std::size_t(r.ncols) + std::size_t(c)] = h;
    }
  }
  return r;
}

std::string yaml_text(const CityRecipe& r) {
  std::ostringstream y;
  y << "bbox:\n";
  y << "  min_lat: " << fmt_fixed(r.bbox.min_lat, 6) << "\n";
  y << "  min_lon: " << fmt_fixed(r.bbox.min_lon, 6) << "\n";
  y << "  max_lat: " << fmt_fixed(r.bbox.max_lat, 6) << "\n";
  y << "  max_lon: " << fmt_fixed(r.bbox.max_lon, 6) << "\n";
  y << "projection:\n";
  y << "  lat0: " << fmt_fixed(r.proj.lat0, 6) << "\n";
  y << "  lon0: " << fmt_fixed(r.proj.lon0, 10) << "\n";
  y << "  k0: " << fmt_fixed(r.proj.k0, 4) << "\n";
  y << "  false_easting: 0.0\n";
  y << "  false_northing: 0.0\n";
  y << "elevation_path: dem.asc\n";
  // Cache files cover every query; the URL is a dead port so an accidental
  // cache miss fails loudly instead of going to the network.
  y << "overpass_url: http://127.0.0.1:9/offline\n";
  y << "cache_dir: cache\n";
  y << "rng_seed: 42\n";
  y << "weights:\n";
  y << "  transit: 0.2\n  hospital: 0.2\n  isolation: 0.2\n  supply: 0.2\n  green: 0.2\n";
  y << "indicator_params:\n";
  y << "  transit:\n";
  y << "    impact_radius: 2500.0\n    k_bus: 5\n    theta: 50.0\n    n_norm: 50.0\n";
  y << "    sample_cap: 300\n";
  y << "  hospital:\n";
  y << "    k_hosp: 3\n    d_norm: 250.0\n    influence_radius: 2500.0\n";
  y << "  isolation:\n";
  y << "    elev_threshold: 100.0\n    radius: 1500.0\n";
  y << "  supply:\n";
  y << "    k_highway: 3\n    d_norm: 250.0\n    food_weight: 1.5\n    base_weight: 1.0\n";
  y << "    influence_radius: 2500.0\n";
  y << "  green:\n";
  y << "    k_park: 3\n    d_norm: 250.0\n";
  y << "  population_per_residence: 2.5\n";
  y << "llm:\n";
  y << "  endpoint: http://127.0.0.1:18731/v1/chat/completions\n";
  y << "  model: mock-8b\n";
  y << "  temperature: 0.3\n";
  y << "  timeout_s: 5.0\n";
  y << "  max_retries: 2\n";
  return y.str();
}

}  // namespace

std::vector<std::string> fixture_city_names() {
  return {"synthetic-small", "synthetic-ridge"};
}

std::string generate_fixture_city(const std::string& city, const std::string& out_dir) {
  const CityRecipe recipe = recipe_for(city);
  const CityBuilder b(recipe);

  const fs::path root = fs::path(out_dir) / city;
  const fs::path cache = root / "cache";
  fs::create_directories(cache);

  ElementSets sets = build_elements(b);
  auto write_response = [&](const OverpassQuery& q, json elements) {
    json doc{{"version", 0.6},
             {"generator", "bridgegraph fixture"},
             {"elements", std::move(elements)}};
    atomic_write_file((cache / overpass_cache_filename(q, recipe.bbox)).string(),
                      doc.dump() + "\n");
  };
  write_response(query_streets(recipe.bbox), std::move(sets.streets));
  write_response(query_bridges_tagged(recipe.bbox), std::move(sets.bridges_tagged));
  write_response(query_bridges_man_made(recipe.bbox), std::move(sets.bridges_man_made));
  write_response(query_buildings(recipe.bbox), std::move(sets.buildings));
  write_response(query_facilities(recipe.bbox), std::move(sets.facilities));
  write_response(query_waterways(recipe.bbox), std::move(sets.waterways));

  atomic_write_file((root / "dem.asc").string(), build_dem(b).serialize());

  const fs::path cfg_path = root / (city + ".yaml");
  atomic_write_file(cfg_path.string(), yaml_text(recipe));
  return cfg_path.string();
}

}  // namespace bridgegraph
