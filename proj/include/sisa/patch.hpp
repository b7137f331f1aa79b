#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sisa/image.hpp"
#include "sisa/mask.hpp"

namespace sisa
{

/**
 * Canonical pixel-patch serialization shared by alteration and restoration.
 *
 * Masked pixels are visited row-major inside the box, each contributing all
 * of its channels in order. A missing mask selects the whole box.
 */
std::vector<std::uint8_t> extract_patch(const ImageBuffer &img, const BoundingBox &bbox,
                                        const MaskRLE *mask = nullptr);

/// Exact inverse placement of extract_patch. Pixels outside the mask keep their values.
void write_patch_inplace(ImageBuffer &img, const BoundingBox &bbox, const MaskRLE *mask,
                         std::span<const std::uint8_t> bytes);

ImageBuffer write_patch(const ImageBuffer &img, const BoundingBox &bbox, const MaskRLE *mask,
                        std::span<const std::uint8_t> bytes);

/// Byte length extract_patch would produce.
std::size_t patch_length(const ImageBuffer &img, const BoundingBox &bbox, const MaskRLE *mask);

} // namespace sisa
