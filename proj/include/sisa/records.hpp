#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sisa/crypto.hpp"
#include "sisa/image.hpp"
#include "sisa/mask.hpp"
#include "sisa/plan.hpp"
#include "sisa/region.hpp"

namespace sisa
{

/**
 * What was done to one altered area and how to undo it.
 *
 * Encrypt records keep the ciphertext in the image itself. Blur records carry
 * the encrypted original pixels in stored_ciphertext, since blurring is lossy.
 */
struct RegionCipherRecord
{
    std::optional<int> region_id; // empty for the full-image fallback
    std::optional<RegionKind> kind;
    std::string class_label;
    BoundingBox bbox;
    MaskRLE mask; // effective mask, relative to bbox
    Iv iv{};
    std::size_t byte_length = 0;
    std::uint32_t plaintext_crc32 = 0;
    AlterationMode mode = AlterationMode::Encrypt; // Blur or Encrypt, never Auto
    std::optional<std::vector<std::uint8_t>> stored_ciphertext;

    bool operator==(const RegionCipherRecord &) const = default;
};

inline constexpr int manifest_version = 1;

/// Everything needed, apart from the passphrase, to invert a protect() call.
struct ReconstructionManifest
{
    int version = manifest_version;
    std::string original_format = "png";
    int width = 0;
    int height = 0;
    int channels = 0;
    KdfSpec kdf;
    Salt salt{};
    SecurityPolicy policy;
    double target_fraction = 0.0;
    double achieved_fraction = 0.0;
    bool shortfall = false;
    bool full_image_fallback = false;
    std::vector<RegionCipherRecord> records; // application order

    bool operator==(const ReconstructionManifest &) const = default;
};

} // namespace sisa
