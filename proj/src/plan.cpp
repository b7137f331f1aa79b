#include "sisa/plan.hpp"

#include <cmath>
#include <map>
#include <set>

#include "sisa/error.hpp"

namespace sisa
{

const char *to_string(AlterationMode mode)
{
    switch (mode)
    {
    case AlterationMode::Auto: return "auto";
    case AlterationMode::Blur: return "blur";
    case AlterationMode::Encrypt: return "encrypt";
    }
    return "auto";
}

AlterationMode alteration_mode_from_string(std::string_view name)
{
    if (name == "auto")
        return AlterationMode::Auto;
    if (name == "blur")
        return AlterationMode::Blur;
    if (name == "encrypt")
        return AlterationMode::Encrypt;
    throw Error(ErrorKind::Validation, "unknown mode '" + std::string(name) + "'");
}

void SecurityPolicy::validate() const
{
    if (level < min_level || level > max_level)
        throw Error(ErrorKind::Validation, "security level must be in 1..5, got " + std::to_string(level));
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw Error(ErrorKind::Validation, "blur sigma must be positive");
}

double coverage_for_level(int level)
{
    if (level < min_level || level > max_level)
        throw Error(ErrorKind::Validation, "security level must be in 1..5, got " + std::to_string(level));
    // percent first so every level lands on the nearest double to its decimal value
    return (30.0 + 17.5 * (level - 1)) / 100.0;
}

AlterationMode resolve_mode(const SecurityPolicy &policy)
{
    if (policy.mode != AlterationMode::Auto)
        return policy.mode;
    return policy.level <= 2 ? AlterationMode::Blur : AlterationMode::Encrypt;
}

namespace
{

// Cells of `mask` (or the whole box) visited in row-major order.
template <typename Fn>
void for_each_cell(const BoundingBox &bbox, const MaskRLE *mask, int width, Fn &&fn)
{
    const auto cell_index = [&](std::size_t cell) {
        const std::size_t row = cell / std::size_t(bbox.l);
        const std::size_t col = cell % std::size_t(bbox.l);
        return (std::size_t(bbox.q) + row) * std::size_t(width) + std::size_t(bbox.p) + col;
    };
    if (!mask)
    {
        for (std::size_t cell = 0; cell < bbox.area(); ++cell)
            fn(cell, cell_index(cell));
        return;
    }
    std::size_t cell = 0;
    for (std::size_t i = 0; i < mask->runs.size(); ++i)
    {
        if (i % 2 == 1)
            for (std::size_t k = 0; k < mask->runs[i]; ++k)
                fn(cell + k, cell_index(cell + k));
        cell += mask->runs[i];
    }
}

std::size_t required_pixels(double target, std::size_t total)
{
    return std::size_t(std::ceil(target * double(total) - 1e-6));
}

} // namespace

std::size_t union_pixel_count(const std::vector<std::pair<BoundingBox, std::optional<MaskRLE>>> &areas,
                              int width, int height)
{
    std::vector<std::uint8_t> covered(std::size_t(width) * std::size_t(height), 0);
    std::size_t count = 0;
    for (const auto &[bbox, mask] : areas)
    {
        validate_box(bbox, width, height);
        if (mask)
            validate_rle(*mask, bbox.l, bbox.b);
        for_each_cell(bbox, mask ? &*mask : nullptr, width, [&](std::size_t, std::size_t index) {
            count += covered[index] == 0;
            covered[index] = 1;
        });
    }
    return count;
}

SelectionPlan plan_selection(const PriorityAssignment &assignment, const RegionSet &regions,
                             const SecurityPolicy &policy, int width, int height)
{
    policy.validate();
    validate_regions(regions, width, height);

    std::map<int, const Region *> by_id;
    for (const auto &region : regions)
        by_id[region.id] = &region;
    std::set<int> assigned;
    for (const auto &entry : assignment.entries)
    {
        if (!by_id.count(entry.region_id) || !assigned.insert(entry.region_id).second)
            throw Error(ErrorKind::Validation, "priority assignment does not match the region set");
    }
    if (assigned.size() != by_id.size())
        throw Error(ErrorKind::Validation, "priority assignment does not cover every region");

    SelectionPlan plan;
    plan.target_fraction = coverage_for_level(policy.level);
    const std::size_t total = std::size_t(width) * std::size_t(height);

    if (policy.level == max_level)
    {
        plan.full_image_fallback = true;
        plan.selected.push_back({std::nullopt, BoundingBox{0, 0, width, height}, full_mask(width, height)});
        plan.achieved_pixels = total;
        plan.achieved_fraction = 1.0;
        return plan;
    }

    const std::size_t needed = required_pixels(plan.target_fraction, total);
    std::vector<std::uint8_t> owned(total, 0);
    for (const auto &entry : assignment.entries)
    {
        if (plan.achieved_pixels >= needed)
            break;
        const Region &region = *by_id.at(entry.region_id);
        BitMask effective(region.bbox.area(), 0);
        std::size_t fresh = 0;
        for_each_cell(region.bbox, region.mask ? &*region.mask : nullptr, width,
                      [&](std::size_t cell, std::size_t index) {
                          if (owned[index])
                              return;
                          owned[index] = 1;
                          effective[cell] = 1;
                          ++fresh;
                      });
        if (fresh == 0)
            continue;
        plan.selected.push_back({region.id, region.bbox, rle_encode(effective, region.bbox.l, region.bbox.b)});
        plan.achieved_pixels += fresh;
    }

    plan.achieved_fraction = double(plan.achieved_pixels) / double(total);
    plan.shortfall = plan.achieved_pixels < needed;
    return plan;
}

} // namespace sisa
