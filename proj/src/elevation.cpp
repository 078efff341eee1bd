#include "bridgegraph/elevation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bridgegraph/util.hpp"

namespace bridgegraph {

ElevationRaster ElevationRaster::load(const std::string& path) {
  auto contents = read_file(path);
  if (!contents) throw std::runtime_error("elevation grid not readable: " + path);
  try {
    return parse(*contents);
  } catch (const std::exception& e) {
    throw std::runtime_error("elevation grid " + path + ": " + e.what());
  }
}

ElevationRaster ElevationRaster::parse(const std::string& contents) {
  std::istringstream in(contents);
  ElevationRaster r;

  auto expect_header = [&](const char* name) {
    std::string key;
    if (!(in >> key)) throw std::runtime_error(std::string("missing header ") + name);
    if (to_lower(key) != to_lower(name))
      throw std::runtime_error("expected header '" + std::string(name) + "', got '" + key + "'");
    double v;
    if (!(in >> v)) throw std::runtime_error(std::string("bad value for header ") + name);
    return v;
  };

  r.ncols = int(expect_header("ncols"));
  r.nrows = int(expect_header("nrows"));
  r.xllcorner = expect_header("xllcorner");
  r.yllcorner = expect_header("yllcorner");
  r.cellsize = expect_header("cellsize");
  r.nodata = expect_header("NODATA_value");

  if (r.ncols <= 0 || r.nrows <= 0) throw std::runtime_error("non-positive grid dimensions");
  if (r.cellsize <= 0.0) throw std::runtime_error("non-positive cellsize");

  r.values.reserve(std::size_t(r.ncols) * std::size_t(r.nrows));
  double v;
  while (in >> v) r.values.push_back(v);
  if (r.values.size() != std::size_t(r.ncols) * std::size_t(r.nrows)) {
    throw std::runtime_error("value count " + std::to_string(r.values.size()) +
                             " does not match ncols*nrows");
  }
  return r;
}

double ElevationRaster::sample(PlanarCoord p) const {
  const double fc = std::floor((p.x - xllcorner) / cellsize);
  const double fr = std::floor((p.y - yllcorner) / cellsize);
  if (fc < 0 || fr < 0 || fc >= double(ncols) || fr >= double(nrows)) return nodata;
  const int col = int(fc);
  const int row_from_bottom = int(fr);
  const int row = nrows - 1 - row_from_bottom;  // storage is north row first
  return values[std::size_t(row) * std::size_t(ncols) + std::size_t(col)];
}

std::string ElevationRaster::serialize() const {
  std::ostringstream out;
  out << "ncols " << ncols << "\n";
  out << "nrows " << nrows << "\n";
  out << "xllcorner " << fmt_fixed(xllcorner, 3) << "\n";
  out << "yllcorner " << fmt_fixed(yllcorner, 3) << "\n";
  out << "cellsize " << fmt_fixed(cellsize, 3) << "\n";
  out << "NODATA_value " << fmt_fixed(nodata, 1) << "\n";
  for (int r = 0; r < nrows; ++r) {
    for (int c = 0; c < ncols; ++c) {
      if (c) out << ' ';
      out << fmt_fixed(values[std::size_t(r) * std::size_t(ncols) + std::size_t(c)], 2);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace bridgegraph
