#include "sisa/region.hpp"

#include <set>

#include "sisa/error.hpp"

namespace sisa
{

const char *to_string(RegionKind kind)
{
    switch (kind)
    {
    case RegionKind::Object: return "object";
    case RegionKind::Face: return "face";
    case RegionKind::Text: return "text";
    }
    return "object";
}

RegionKind region_kind_from_string(std::string_view name)
{
    if (name == "object")
        return RegionKind::Object;
    if (name == "face")
        return RegionKind::Face;
    if (name == "text")
        return RegionKind::Text;
    throw Error(ErrorKind::Validation, "unknown region kind '" + std::string(name) + "'");
}

std::size_t Region::covered_pixels() const
{
    return mask ? popcount(*mask) : bbox.area();
}

void validate_regions(const RegionSet &regions, int width, int height)
{
    std::set<int> ids;
    for (const auto &region : regions)
    {
        if (region.id < 0)
            throw Error(ErrorKind::Validation, "region id must be non-negative");
        if (!ids.insert(region.id).second)
            throw Error(ErrorKind::Validation, "duplicate region id " + std::to_string(region.id));
        validate_box(region.bbox, width, height);
        if (region.mask)
            validate_rle(*region.mask, region.bbox.l, region.bbox.b);
        if (!(region.confidence >= 0.0 && region.confidence <= 1.0))
            throw Error(ErrorKind::Validation,
                        "region " + std::to_string(region.id) + " confidence outside [0,1]");
    }
}

} // namespace sisa
