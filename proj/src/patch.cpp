#include "sisa/patch.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "sisa/error.hpp"

namespace sisa
{

namespace
{

void check_geometry(const ImageBuffer &img, const BoundingBox &bbox, const MaskRLE *mask)
{
    validate_box(bbox, img.width(), img.height());
    if (mask)
        validate_rle(*mask, bbox.l, bbox.b);
}

// Calls fn(x, y, count) for every horizontal span of set mask cells, in scan order.
// Spans never cross a row boundary of the box.
template <typename Fn>
void for_each_span(const BoundingBox &bbox, const MaskRLE *mask, Fn &&fn)
{
    if (!mask || is_full(*mask, bbox.l, bbox.b))
    {
        for (int row = 0; row < bbox.b; ++row)
            fn(bbox.p, bbox.q + row, bbox.l);
        return;
    }
    std::size_t cell = 0;
    for (std::size_t i = 0; i < mask->runs.size(); ++i)
    {
        std::size_t remaining = mask->runs[i];
        if (i % 2 == 0)
        {
            cell += remaining;
            continue;
        }
        while (remaining > 0)
        {
            const int row = int(cell / std::size_t(bbox.l));
            const int col = int(cell % std::size_t(bbox.l));
            const std::size_t take = std::min<std::size_t>(remaining, std::size_t(bbox.l - col));
            fn(bbox.p + col, bbox.q + row, int(take));
            cell += take;
            remaining -= take;
        }
    }
}

} // namespace

std::size_t patch_length(const ImageBuffer &img, const BoundingBox &bbox, const MaskRLE *mask)
{
    return (mask ? popcount(*mask) : bbox.area()) * std::size_t(img.channels());
}

std::vector<std::uint8_t> extract_patch(const ImageBuffer &img, const BoundingBox &bbox, const MaskRLE *mask)
{
    check_geometry(img, bbox, mask);
    std::vector<std::uint8_t> out(patch_length(img, bbox, mask));
    const std::size_t channels = std::size_t(img.channels());
    std::uint8_t *dst = out.data();
    for_each_span(bbox, mask, [&](int x, int y, int count) {
        const std::size_t n = std::size_t(count) * channels;
        std::memcpy(dst, img.pixel(x, y), n);
        dst += n;
    });
    return out;
}

void write_patch_inplace(ImageBuffer &img, const BoundingBox &bbox, const MaskRLE *mask,
                         std::span<const std::uint8_t> bytes)
{
    check_geometry(img, bbox, mask);
    const std::size_t expected = patch_length(img, bbox, mask);
    if (bytes.size() != expected)
        throw Error(ErrorKind::Validation, "patch length " + std::to_string(bytes.size()) +
                                               " does not match " + std::to_string(expected));
    const std::size_t channels = std::size_t(img.channels());
    const std::uint8_t *src = bytes.data();
    for_each_span(bbox, mask, [&](int x, int y, int count) {
        const std::size_t n = std::size_t(count) * channels;
        std::memcpy(img.pixel(x, y), src, n);
        src += n;
    });
}

ImageBuffer write_patch(const ImageBuffer &img, const BoundingBox &bbox, const MaskRLE *mask,
                        std::span<const std::uint8_t> bytes)
{
    ImageBuffer out = img;
    write_patch_inplace(out, bbox, mask, bytes);
    return out;
}

} // namespace sisa
