#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sisa/region.hpp"

namespace sisa
{

inline constexpr int regions_schema_version = 1;

/// Detector output: the image size the boxes refer to plus the detected regions.
struct RegionsDocument
{
    int schema_version = regions_schema_version;
    int width = 0;
    int height = 0;
    RegionSet regions;

    bool operator==(const RegionsDocument &) const = default;
};

/// Parses and validates a regions document (schema v1). Throws Malformed,
/// UnknownVersion, or Validation for out-of-bounds boxes and bad masks.
RegionsDocument parse_regions(std::string_view text);
RegionsDocument load_regions(const std::filesystem::path &path);

/// Canonical compact JSON in the documented field order.
std::string encode_regions(const RegionsDocument &doc);

/// Centered box whose area is as close to `fraction` of the image as a
/// whole-pixel rectangle allows (exact whenever fraction*w*h factors into the image).
RegionsDocument center_box_detector(int width, int height, double fraction = 0.30);

/// k x k tiling of equal boxes, ids row-major, kind object.
RegionsDocument grid_detector(int width, int height, int k = 3);

/// "center-box", "center-box:0.5", "grid" or "grid:4".
RegionsDocument run_stub_detector(std::string_view spec, int width, int height);

} // namespace sisa
