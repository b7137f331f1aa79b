#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sisa/image.hpp"
#include "sisa/mask.hpp"

namespace sisa
{

enum class RegionKind
{
    Object,
    Face,
    Text,
};

const char *to_string(RegionKind kind);
RegionKind region_kind_from_string(std::string_view name);

/// A detected object: class label plus its (p, q, l, b) box, optionally refined by an instance mask.
struct Region
{
    int id = 0;
    RegionKind kind = RegionKind::Object;
    std::string class_label;
    BoundingBox bbox;
    std::optional<MaskRLE> mask;
    double confidence = 1.0;
    std::optional<std::string> identity;

    /// Pixels actually covered: popcount of the mask, or the box area.
    std::size_t covered_pixels() const;

    bool operator==(const Region &) const = default;
};

using RegionSet = std::vector<Region>;

/// Checks every region against the image size, mask shape, confidence range and id uniqueness.
void validate_regions(const RegionSet &regions, int width, int height);

} // namespace sisa
