#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "viewset/consistency.hpp"
#include "viewset/geometry.hpp"
#include "viewset/plan.hpp"

namespace viewset {

/// Raised when an input file cannot be read or does not match its schema;
/// messages name the offending file and field.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PosedView {
    std::string id;
    Camera camera;
};

/// Trajectory files are a JSON array of cameras:
///   [{"id", "fx", "fy", "cx", "cy", "width", "height",
///     "R": [9 row-major numbers], "t": [3 numbers]}, ...]
std::vector<PosedView> load_trajectory(const std::string& path);
std::vector<PosedView> parse_trajectory(std::istream& in, const std::string& name);
void save_trajectory(const std::vector<PosedView>& views, std::ostream& out);

/// Plan files:
///   {"views": [{"id", "role": "observed"|"generated", "camera"?: {...}}],
///    "stages": [{"generate": [ids], "condition": [ids]}, ...]}
GenerationPlan load_plan(const std::string& path);
GenerationPlan parse_plan(std::istream& in, const std::string& name);
void save_plan(const GenerationPlan& plan, std::ostream& out);

/// Match files: {"pair": [id_a, id_b], "matches": [[ua, va, ub, vb], ...]}
MatchSet load_match_set(const std::string& path);
MatchSet parse_match_set(std::istream& in, const std::string& name);
void save_match_set(const MatchSet& matches, std::ostream& out);

/// Plain-text encoded-ray dump: a "width height channels" line, one line of
/// frequencies, then one line of channel values per pixel in row-major order.
void write_encoded_rays(const EncodedRays& encoded, std::ostream& out);

}  // namespace viewset
