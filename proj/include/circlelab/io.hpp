#pragma once

// Serialization: JSON and CSV with every float printed to 17 significant
// digits, plus the JSON forms of continued fractions and map specs.

#include "circlelab/arithmetic.hpp"
#include "circlelab/circle_map.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace circlelab::io {

using Json = nlohmann::ordered_json;

/// %.17g; non-finite values become "inf", "-inf", "nan".
std::string format_double(double x);

/// Deterministic JSON text. Floats use format_double, non-finite floats
/// become null. indent < 0 gives a single line.
std::string dump(const Json& j, int indent = 2);

/// Minimal CSV writer; values are already-formatted cells.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& os_;
};

std::string cell(double x);
std::string cell(long long x);
std::string cell(int x);
std::string cell(bool x);

/// Errors collected while reading a document; each entry starts with a field path.
using Problems = std::vector<std::string>;

Json cf_to_json(const arith::ContinuedFraction& cf);
/// Accepts {"quotients":[...], "tail":{...}} or the names "golden" / "silver".
std::optional<arith::ContinuedFraction> cf_from_json(const Json& j, const std::string& path, Problems& problems);

/// A concrete map, or an arnold family whose parameter a is still to be tuned.
struct MapSpec {
    bool family = false;
    double b = 0.0;
    std::optional<double> a;  // family only; absent means "tune onto the target"
    AnalyticCircleMap map;    // concrete maps
};
Json map_to_json(const MapSpec& spec);
std::optional<MapSpec> map_from_json(const Json& j, const std::string& path, Problems& problems);
/// The concrete map; requires a fixed family parameter.
AnalyticCircleMap realize(const MapSpec& spec);

}  // namespace circlelab::io
