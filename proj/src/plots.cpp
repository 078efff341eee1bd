#include "bridgegraph/plots.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "bridgegraph/util.hpp"

namespace bridgegraph {
namespace {

constexpr int kGradientStops[5][3] = {{0x2c, 0x7b, 0xb6},
                                      {0xab, 0xd9, 0xe9},
                                      {0xff, 0xff, 0xbf},
                                      {0xfd, 0xae, 0x61},
                                      {0xd7, 0x19, 0x1c}};

constexpr const char* kNoiseColor = "#9e9e9e";

constexpr const char* kCategorical[10] = {
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
    "#e6ab02", "#a6761d", "#386cb0", "#f0027f", "#bf5b17"};

std::string hex_color(int r, int g, int b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string num(double v) { return fmt_fixed(v, 2); }

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Maps a data rectangle onto an SVG plot area, y axis flipped so north is
// up. With keep_aspect the scale is isotropic and the content centered.
struct Frame {
  double x0 = 0, y0 = 0;    // data origin
  double sx = 1, sy = 1;    // data-to-pixel scale
  double px = 0, py = 0;    // plot area top-left
  double pw = 0, ph = 0;

  double X(double x) const { return px + (x - x0) * sx; }
  double Y(double y) const { return py + ph - (y - y0) * sy; }
};

Frame fit_frame(double minx, double maxx, double miny, double maxy, double px,
                double py, double pw, double ph, bool keep_aspect) {
  double dx = maxx - minx, dy = maxy - miny;
  if (dx <= 0) dx = 1;
  if (dy <= 0) dy = 1;
  const double pad_x = dx * 0.05, pad_y = dy * 0.05;
  minx -= pad_x;
  maxx += pad_x;
  miny -= pad_y;
  maxy += pad_y;
  dx = maxx - minx;
  dy = maxy - miny;

  Frame f;
  f.px = px;
  f.py = py;
  f.pw = pw;
  f.ph = ph;
  f.sx = pw / dx;
  f.sy = ph / dy;
  if (keep_aspect) {
    const double s = std::min(f.sx, f.sy);
    f.sx = f.sy = s;
    // Center the slack.
    f.px += (pw - dx * s) / 2.0;
    f.py += (ph - dy * s) / 2.0;
    f.pw = dx * s;
    f.ph = dy * s;
  }
  f.x0 = minx;
  f.y0 = miny;
  return f;
}

std::string svg_open(int w, int h) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"#ffffff\"/>\n";
  return out.str();
}

void text_at(std::ostringstream& out, double x, double y,
             const std::string& s, const char* anchor = "start",
             int size = 12, const char* fill = "#333333") {
  out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\""
      << "sans-serif\" font-size=\"" << size << "\" text-anchor=\"" << anchor
      << "\" fill=\"" << fill << "\">" << xml_escape(s) << "</text>\n";
}

}  // namespace

std::string score_color(double score) {
  const double s = std::clamp(score, 0.0, 100.0);
  const double t = s / 100.0 * 4.0;  // position along the four segments
  int seg = int(t);
  if (seg >= 4) seg = 3;
  const double local = t - seg;
  const int* a = kGradientStops[seg];
  const int* b = kGradientStops[seg + 1];
  const auto mix = [&](int ch) {
    return int(std::lround(a[ch] + (b[ch] - a[ch]) * local));
  };
  return hex_color(mix(0), mix(1), mix(2));
}

std::string class_color(int label) {
  if (label < 0) return kNoiseColor;
  return kCategorical[std::size_t(label) % 10];
}

std::string svg_score_map(const ScoreMapData& d) {
  const std::size_t n = d.points.size();
  if (d.scores.size() != n || d.snap_failed.size() != n ||
      d.names.size() != n)
    throw PlotError("score map arrays are misaligned");

  const int W = 840, H = 600;
  double minx = 0, maxx = 1, miny = 0, maxy = 1;
  bool first = true;
  const auto grow = [&](PlanarCoord p) {
    if (first) {
      minx = maxx = p.x;
      miny = maxy = p.y;
      first = false;
      return;
    }
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  };
  if (d.streets)
    for (const PlanarCoord& p : d.streets->node_coords()) grow(p);
  for (const PlanarCoord& p : d.points) grow(p);

  const Frame f = fit_frame(minx, maxx, miny, maxy, 40, 40, W - 80, H - 110, true);

  std::ostringstream out;
  out << svg_open(W, H);
  if (d.streets) {
    out << "<g stroke=\"#cccccc\" stroke-width=\"1\" stroke-linecap=\"round\">\n";
    for (const StreetEdge& e : d.streets->edges()) {
      const PlanarCoord a = d.streets->node_xy(e.u);
      const PlanarCoord b = d.streets->node_xy(e.v);
      out << "<line x1=\"" << num(f.X(a.x)) << "\" y1=\"" << num(f.Y(a.y))
          << "\" x2=\"" << num(f.X(b.x)) << "\" y2=\"" << num(f.Y(b.y))
          << "\"/>\n";
    }
    out << "</g>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    const PlanarCoord p = d.points[i];
    const bool failed = d.snap_failed[i] != 0;
    out << "<circle cx=\"" << num(f.X(p.x)) << "\" cy=\"" << num(f.Y(p.y))
        << "\" r=\"5\" fill=\""
        << (failed ? kNoiseColor : score_color(d.scores[i])) << "\" stroke=\""
        << (failed ? "#555555" : "#333333") << "\" stroke-width=\"0.5\"";
    if (failed) out << " stroke-dasharray=\"2,2\"";
    out << "><title>" << xml_escape(d.names[i])
        << (failed ? " (snap failed)"
                   : " (composite " + fmt_fixed(d.scores[i], 2) + ")")
        << "</title></circle>\n";
  }

  // Legend: the documented gradient with its endpoints labeled.
  out << "<defs><linearGradient id=\"scoreGradient\">\n";
  for (int s = 0; s < 5; ++s)
    out << "<stop offset=\"" << (s * 25) << "%\" stop-color=\""
        << hex_color(kGradientStops[s][0], kGradientStops[s][1],
                     kGradientStops[s][2])
        << "\"/>\n";
  out << "</linearGradient></defs>\n";
  out << "<rect x=\"40\" y=\"" << (H - 50)
      << "\" width=\"200\" height=\"12\" fill=\"url(#scoreGradient)\" "
         "stroke=\"#333333\" stroke-width=\"0.5\"/>\n";
  text_at(out, 40, H - 56, "composite score");
  text_at(out, 40, H - 24, "0");
  text_at(out, 140, H - 24, "50", "middle");
  text_at(out, 240, H - 24, "100", "end");
  out << "</svg>\n";
  return out.str();
}

std::string svg_umap_scatter(const ScatterData& d, ColorKey key) {
  const std::size_t n = d.labels.size();
  if (d.xy.size() != n * 2) throw PlotError("scatter arrays are misaligned");

  const int W = 720, H = 560;
  double minx = 0, maxx = 1, miny = 0, maxy = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = d.xy[i * 2], y = d.xy[i * 2 + 1];
    if (i == 0) {
      minx = maxx = x;
      miny = maxy = y;
    } else {
      minx = std::min(minx, x);
      maxx = std::max(maxx, x);
      miny = std::min(miny, y);
      maxy = std::max(maxy, y);
    }
  }
  const Frame f = fit_frame(minx, maxx, miny, maxy, 30, 30, W - 200, H - 60, true);

  std::ostringstream out;
  out << svg_open(W, H);
  for (std::size_t i = 0; i < n; ++i) {
    out << "<circle cx=\"" << num(f.X(d.xy[i * 2])) << "\" cy=\""
        << num(f.Y(d.xy[i * 2 + 1])) << "\" r=\"4\" fill=\""
        << class_color(d.labels[i])
        << "\" stroke=\"#333333\" stroke-width=\"0.4\"/>\n";
  }

  // Legend: one swatch per distinct label, noise last.
  std::map<int, int> seen;
  for (int l : d.labels) seen[l]++;
  double ly = 40;
  const double lx = double(W) - 160;
  text_at(out, lx, ly, key == ColorKey::Cluster ? "clusters" : "cities", "start", 13);
  ly += 10;
  const auto swatch = [&](int label, const std::string& text) {
    ly += 20;
    out << "<circle cx=\"" << num(lx + 6) << "\" cy=\"" << num(ly - 4)
        << "\" r=\"5\" fill=\"" << class_color(label) << "\"/>\n";
    text_at(out, lx + 18, ly, text);
  };
  for (const auto& [label, count] : seen) {
    if (label < 0) continue;
    std::string text;
    if (std::size_t(label) < d.legend.size()) text = d.legend[std::size_t(label)];
    if (text.empty())
      text = (key == ColorKey::Cluster ? "cluster " : "city ") +
             std::to_string(label);
    swatch(label, text + " (" + std::to_string(count) + ")");
  }
  if (seen.count(-1))
    swatch(-1, "noise (" + std::to_string(seen[-1]) + ")");
  out << "</svg>\n";
  return out.str();
}

std::string svg_cluster_bars(const BarsData& d) {
  if (d.cluster_ids.size() != d.sizes.size())
    throw PlotError("cluster bars arrays are misaligned");

  const int W = 640, H = 400;
  const double px = 50, py = 40, pw = W - 90, ph = H - 110;
  const std::size_t nbars = d.sizes.size() + (d.noise > 0 ? 1 : 0);
  int max_size = d.noise;
  for (int s : d.sizes) max_size = std::max(max_size, s);
  if (max_size <= 0) max_size = 1;

  std::ostringstream out;
  out << svg_open(W, H);
  text_at(out, px, 24, "bridges per cluster", "start", 14);
  const double slot = pw / double(std::max<std::size_t>(nbars, 1));
  const double bw = slot * 0.6;
  for (std::size_t i = 0; i < nbars; ++i) {
    const bool is_noise = i >= d.sizes.size();
    const int size = is_noise ? d.noise : d.sizes[i];
    const int label = is_noise ? -1 : d.cluster_ids[i];
    const double h = ph * double(size) / double(max_size);
    const double x = px + slot * double(i) + (slot - bw) / 2.0;
    const double y = py + ph - h;
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
        << num(bw) << "\" height=\"" << num(h) << "\" fill=\""
        << class_color(label) << "\"/>\n";
    text_at(out, x + bw / 2, y - 4, std::to_string(size), "middle", 11);
    text_at(out, x + bw / 2, py + ph + 16,
            is_noise ? std::string("noise") : std::to_string(label), "middle",
            11);
  }
  out << "<line x1=\"" << num(px) << "\" y1=\"" << num(py + ph) << "\" x2=\""
      << num(px + pw) << "\" y2=\"" << num(py + ph)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "</svg>\n";
  return out.str();
}

std::string svg_radar(const RadarData& d) {
  const std::size_t n = d.axes.size();
  if (d.z.size() != n) throw PlotError("radar arrays are misaligned");
  if (n < 3) throw PlotError("radar needs at least three axes");

  const int W = 460, H = 440;
  const double cx = W / 2.0, cy = H / 2.0 + 10, R = 150;
  const auto spoke = [&](std::size_t i, double r, double& x, double& y) {
    const double ang = -M_PI / 2 + 2.0 * M_PI * double(i) / double(n);
    x = cx + r * std::cos(ang);
    y = cy + r * std::sin(ang);
  };

  std::ostringstream out;
  out << svg_open(W, H);
  text_at(out, 20, 24, "cluster " + std::to_string(d.cluster_id) +
                           " indicator z-scores", "start", 14);

  // Rings at z = -3..3; the z = 0 ring is darker.
  for (int k = -3; k <= 3; ++k) {
    const double r = R * double(k + 3) / 6.0;
    if (r <= 0) continue;
    out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\""
        << num(r) << "\" fill=\"none\" stroke=\""
        << (k == 0 ? "#999999" : "#dddddd") << "\" stroke-width=\"1\"/>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    double x, y;
    spoke(i, R, x, y);
    out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(cy) << "\" x2=\""
        << num(x) << "\" y2=\"" << num(y)
        << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
    double lx, ly;
    spoke(i, R + 16, lx, ly);
    text_at(out, lx, ly + 4, d.axes[i], "middle", 11);
  }

  std::string points;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = std::clamp(d.z[i], -3.0, 3.0);
    double x, y;
    spoke(i, R * (z + 3.0) / 6.0, x, y);
    if (!points.empty()) points += " ";
    points += num(x) + "," + num(y);
  }
  const std::string color = class_color(d.cluster_id);
  out << "<polygon points=\"" << points << "\" fill=\"" << color
      << "\" fill-opacity=\"0.35\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
  out << "</svg>\n";
  return out.str();
}

void emit_plot(const PlotSpec& spec, const PlotData& data) {
  std::string svg;
  switch (spec.kind) {
    case PlotKind::ScoreMap:
      if (!data.score_map) throw PlotError("score map data missing");
      svg = svg_score_map(*data.score_map);
      break;
    case PlotKind::UmapScatter:
      if (!data.scatter) throw PlotError("scatter data missing");
      svg = svg_umap_scatter(*data.scatter, spec.color_key);
      break;
    case PlotKind::ClusterBars:
      if (!data.bars) throw PlotError("cluster bars data missing");
      svg = svg_cluster_bars(*data.bars);
      break;
    case PlotKind::Radar:
      if (!data.radar) throw PlotError("radar data missing");
      svg = svg_radar(*data.radar);
      break;
    default:
      throw PlotError("unknown plot kind");
  }
  atomic_write_file(spec.out_path, svg);
}

std::string geojson_scores(const std::vector<BridgeRecord>& bridges,
                           const std::vector<ScoreCard>& cards) {
  if (bridges.size() != cards.size())
    throw PlotError("bridges and score cards are misaligned");
  using ordered = nlohmann::ordered_json;
  const auto r4 = [](double v) { return std::round(v * 1e4) / 1e4; };
  const auto r7 = [](double v) { return std::round(v * 1e7) / 1e7; };

  ordered doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = ordered::array();
  for (std::size_t i = 0; i < bridges.size(); ++i) {
    const BridgeRecord& b = bridges[i];
    const ScoreCard& c = cards[i];
    ordered feat;
    feat["type"] = "Feature";
    feat["geometry"] = {{"type", "Point"},
                        {"coordinates",
                         ordered::array({r7(b.centroid.lon), r7(b.centroid.lat)})}};
    ordered props;
    props["bridge_id"] = b.osm_id;
    props["name"] = b.name;
    props["lat"] = r7(b.centroid.lat);
    props["lon"] = r7(b.centroid.lon);
    props["transit_desert"] = r4(c.transit);
    props["hospital_access"] = r4(c.hospital);
    props["isolation_risk"] = r4(c.isolation);
    props["supply_chain"] = r4(c.supply);
    props["green_space"] = r4(c.green);
    props["composite"] = r4(c.composite);
    props["snap_failed"] = c.snap_failed;
    feat["properties"] = std::move(props);
    doc["features"].push_back(std::move(feat));
  }
  return doc.dump(2) + "\n";
}

}  // namespace bridgegraph
