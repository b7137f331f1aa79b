#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sisa/prioritize.hpp"

namespace sisa
{

enum class AlterationMode
{
    Auto,
    Blur,
    Encrypt,
};

const char *to_string(AlterationMode mode);
AlterationMode alteration_mode_from_string(std::string_view name);

struct SecurityPolicy
{
    int level = 1;
    AlterationMode mode = AlterationMode::Auto;
    double sigma = 8.0;

    void validate() const;
    bool operator==(const SecurityPolicy &) const = default;
};

inline constexpr int min_level = 1;
inline constexpr int max_level = 5;

/// Fraction of the image altered at a level: 0.30 at level 1 rising linearly to 1.00 at level 5.
double coverage_for_level(int level);

/// Auto resolves to blur for levels 1-2 and encryption from level 3 up; explicit modes pass through.
AlterationMode resolve_mode(const SecurityPolicy &policy);

/// A region (or the whole image) chosen for alteration, with the pixels it owns.
struct PlannedRegion
{
    std::optional<int> region_id; // empty for the full-image fallback
    BoundingBox bbox;
    MaskRLE mask; // effective mask, relative to bbox
};

struct SelectionPlan
{
    std::vector<PlannedRegion> selected; // rank order
    double target_fraction = 0.0;
    double achieved_fraction = 0.0;
    std::size_t achieved_pixels = 0;
    bool full_image_fallback = false;
    bool shortfall = false;
};

/// Distinct pixels covered by the union of the (optionally masked) boxes.
std::size_t union_pixel_count(const std::vector<std::pair<BoundingBox, std::optional<MaskRLE>>> &areas,
                              int width, int height);

/**
 * Greedy coverage planner. Regions are taken in rank order until the union
 * reaches the level's target fraction. Each pixel belongs to the
 * highest-ranked region covering it; regions left with no pixels are skipped.
 * Running out of regions early flags a shortfall instead of padding.
 */
SelectionPlan plan_selection(const PriorityAssignment &assignment, const RegionSet &regions,
                             const SecurityPolicy &policy, int width, int height);

} // namespace sisa
