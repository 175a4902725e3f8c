#pragma once

// Tuned arnold maps shared across test files; tuning costs about a second.

#include "circlelab/rotation.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace fixtures {

inline const circlelab::AnalyticCircleMap& tuned_arnold(double b, bool silver = false) {
    static std::map<std::pair<double, bool>, circlelab::AnalyticCircleMap> cache;
    auto key = std::make_pair(b, silver);
    auto it = cache.find(key);
    if (it == cache.end()) {
        const auto target = silver ? circlelab::arith::ContinuedFraction::silver_mean()
                                   : circlelab::arith::ContinuedFraction::golden_mean();
        const auto t = circlelab::tune_parameter(circlelab::MapFamily::arnold(b), target, 1e-12);
        it = cache.emplace(key, circlelab::AnalyticCircleMap::arnold(t.a, b)).first;
    }
    return it->second;
}

inline double golden() { return 0.5 * (std::sqrt(5.0) - 1.0); }

}  // namespace fixtures
