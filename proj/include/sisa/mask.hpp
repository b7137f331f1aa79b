#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sisa
{

/**
 * Run-length encoded binary mask over an l x b box, row-major.
 *
 * Runs alternate 0s and 1s and always start with a zero-run, which may be
 * empty. No other run is zero, so every mask has exactly one encoding.
 */
struct MaskRLE
{
    std::vector<std::uint32_t> runs;

    bool operator==(const MaskRLE &) const = default;
};

/// Flat mask, one byte per cell holding 0 or 1.
using BitMask = std::vector<std::uint8_t>;

MaskRLE rle_encode(std::span<const std::uint8_t> mask, int l, int b);
BitMask rle_decode(const MaskRLE &rle, int l, int b);

/// Checks canonical form and that the runs sum to l*b. Throws ErrorKind::Validation.
void validate_rle(const MaskRLE &rle, int l, int b);

/// Number of set cells.
std::size_t popcount(const MaskRLE &rle);

/// True when the mask covers the whole l*b box, i.e. runs == [0, l*b].
bool is_full(const MaskRLE &rle, int l, int b);

MaskRLE full_mask(int l, int b);

} // namespace sisa
