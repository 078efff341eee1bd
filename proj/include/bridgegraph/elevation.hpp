#pragma once

#include <string>
#include <vector>

#include "bridgegraph/geo.hpp"

namespace bridgegraph {

// ESRI-style ASCII grid in projected planar meters. Six headers (ncols,
// nrows, xllcorner, yllcorner, cellsize, NODATA_value) followed by row-major
// values with the northernmost row first.
struct ElevationRaster {
  int ncols = 0;
  int nrows = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 0.0;
  double nodata = -9999.0;
  std::vector<double> values;

  static ElevationRaster load(const std::string& path);       // throws std::runtime_error
  static ElevationRaster parse(const std::string& contents);  // throws std::runtime_error

  // Nearest-cell lookup: cell index = floor((coord - corner) / cellsize).
  // Returns the nodata value for points outside the grid.
  double sample(PlanarCoord p) const;

  bool is_nodata(double v) const { return v == nodata; }

  std::string serialize() const;
};

}  // namespace bridgegraph
