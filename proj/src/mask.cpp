#include "sisa/mask.hpp"

#include <numeric>
#include <string>

#include "sisa/error.hpp"

namespace sisa
{

MaskRLE rle_encode(std::span<const std::uint8_t> mask, int l, int b)
{
    if (l < 1 || b < 1 || mask.size() != std::size_t(l) * std::size_t(b))
        throw Error(ErrorKind::Validation, "mask length " + std::to_string(mask.size()) +
                                               " does not match " + std::to_string(l) + "x" +
                                               std::to_string(b));
    MaskRLE rle;
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (auto cell : mask)
    {
        const std::uint8_t bit = cell ? 1 : 0;
        if (bit != current)
        {
            rle.runs.push_back(run);
            current = bit;
            run = 0;
        }
        ++run;
    }
    rle.runs.push_back(run);
    return rle;
}

void validate_rle(const MaskRLE &rle, int l, int b)
{
    if (l < 1 || b < 1)
        throw Error(ErrorKind::Validation, "mask box must be at least 1x1");
    if (rle.runs.empty())
        throw Error(ErrorKind::Validation, "mask has no runs");
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < rle.runs.size(); ++i)
    {
        if (i > 0 && rle.runs[i] == 0)
            throw Error(ErrorKind::Validation, "mask run " + std::to_string(i) + " is zero");
        sum += rle.runs[i];
    }
    const std::uint64_t expected = std::uint64_t(l) * std::uint64_t(b);
    if (sum != expected)
        throw Error(ErrorKind::Validation, "mask runs sum to " + std::to_string(sum) + ", expected " +
                                               std::to_string(expected));
}

BitMask rle_decode(const MaskRLE &rle, int l, int b)
{
    validate_rle(rle, l, b);
    BitMask mask;
    mask.reserve(std::size_t(l) * std::size_t(b));
    std::uint8_t bit = 0;
    for (auto run : rle.runs)
    {
        mask.insert(mask.end(), run, bit);
        bit ^= 1;
    }
    return mask;
}

std::size_t popcount(const MaskRLE &rle)
{
    std::size_t count = 0;
    for (std::size_t i = 1; i < rle.runs.size(); i += 2)
        count += rle.runs[i];
    return count;
}

bool is_full(const MaskRLE &rle, int l, int b)
{
    return rle.runs.size() == 2 && rle.runs[0] == 0 &&
           rle.runs[1] == std::uint64_t(l) * std::uint64_t(b);
}

MaskRLE full_mask(int l, int b)
{
    return MaskRLE{{0, std::uint32_t(std::size_t(l) * std::size_t(b))}};
}

} // namespace sisa
