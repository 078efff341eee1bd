#pragma once

#include <string>
#include <vector>

namespace bridgegraph {

// Names accepted by generate_fixture_city. Each is a self-contained synthetic
// city: a 22x22 street grid with irregular block sizes, crossed by two
// parallel rivers, plus a high-ground outpost reachable over a single
// bridge. It has 50 named bridges (22 crossings per river, 3 footbridges,
// the gorge bridge, 2 unsnappable ghosts), hospitals, schools, south-bank
// bus stops, west-bank parks, shops, residential buildings, and a DEM. The
// two cities share every indicator parameter and differ only in bounding
// box, projection, and terrain shape.
std::vector<std::string> fixture_city_names();

// Writes <out_dir>/<city>/<city>.yaml plus dem.asc and a warm cache/ holding
// one JSON response per OSM query, named so the fetch layer finds them
// without touching the network. Returns the config path. Deterministic:
// output depends only on the city name. Throws ConfigError for unknown
// names, std::runtime_error on I/O failure.
std::string generate_fixture_city(const std::string& city, const std::string& out_dir);

}  // namespace bridgegraph
