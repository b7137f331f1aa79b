#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sisa/region.hpp"

namespace sisa
{

/// User preferences that shape region priority on top of the center heuristic.
struct Preferences
{
    double w_center = 1.0;
    std::map<RegionKind, double> kind_boost;
    std::map<std::string, double> identity_boost;
    double w_area = 0.0;

    void validate() const;
};

struct PriorityEntry
{
    int region_id = 0;
    std::string class_label;
    double score = 0.0;
    int rank = 0; // 1-based
};

struct PriorityAssignment
{
    std::vector<PriorityEntry> entries; // sorted by rank
};

/**
 * Closeness of the box center to the image center, scaled to [0,1]:
 * 1 - d/D, where D is the half-diagonal. 1 at the center, 0 at a corner.
 */
double center_affinity(const Region &region, int width, int height);

/// Same measure for an arbitrary point, e.g. a box center.
double center_affinity_at(double x, double y, int width, int height);

/// Raw score before ranking; exposed so tests can rebuild the ordering independently.
double priority_score(const Region &region, const Preferences &prefs, int width, int height);

/// Sort by score descending; ties go to the larger covered area, then the smaller id.
PriorityAssignment prioritize(const RegionSet &regions, const Preferences &prefs, int width, int height);

} // namespace sisa
