#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bridgegraph/config.hpp"
#include "bridgegraph/osm.hpp"

namespace bridgegraph {

struct OverpassParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A complete Overpass QL request body. The bbox is baked into the text; the
// exact bodies sent for every query kind are documented verbatim in
// docs/overpass_queries.md.
struct OverpassQuery {
  std::string name;  // stable identifier ("bridges_man_made", "streets", ...)
  std::string body;
};

OverpassQuery query_bridges_man_made(const BBox& bbox);
OverpassQuery query_bridges_tagged(const BBox& bbox);
OverpassQuery query_streets(const BBox& bbox);
OverpassQuery query_buildings(const BBox& bbox);
OverpassQuery query_facilities(const BBox& bbox);
OverpassQuery query_waterways(const BBox& bbox);

// Content address of a query: hash over the QL body plus the bbox, so any
// change to either lands in a fresh cache slot.
std::string overpass_cache_filename(const OverpassQuery& q, const BBox& bbox);

struct FetchStats {
  int http_requests = 0;
  int cache_hits = 0;
};

// Returns the raw JSON body for the query, consulting cache_dir first. On a
// miss the Overpass endpoint is POSTed and the verbatim body is cached with
// an atomic write. Throws NetworkError when the endpoint cannot be reached
// and no cached copy exists.
std::string fetch_overpass_raw(const PipelineConfig& cfg, const OverpassQuery& q,
                               FetchStats* stats = nullptr);

// Parse an Overpass JSON document into flattened elements. Way geometry and
// node ids are preserved; relation geometry keeps outer-ring members.
std::vector<RawOsmElement> parse_overpass_json(const std::string& body);

std::vector<RawOsmElement> fetch_overpass(const PipelineConfig& cfg, const OverpassQuery& q,
                                          FetchStats* stats = nullptr);

}  // namespace bridgegraph
