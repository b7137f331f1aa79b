#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "sisa/blur.hpp"
#include "sisa/crypto.hpp"
#include "sisa/plan.hpp"
#include "sisa/prioritize.hpp"
#include "sisa/records.hpp"

namespace sisa
{

/// Encrypts the masked patch in place of the plaintext. The record carries iv, length and plaintext CRC32.
std::pair<ImageBuffer, RegionCipherRecord> encrypt_region(const ImageBuffer &img, const BoundingBox &bbox,
                                                          const MaskRLE &mask, const KeyMaterial &key,
                                                          const Iv &iv);

/// Inverse of encrypt_region. Throws ErrorKind::Checksum when the recovered plaintext fails its CRC.
ImageBuffer decrypt_region(const ImageBuffer &img, const RegionCipherRecord &record, const KeyMaterial &key);

struct ProtectOptions
{
    KdfSpec kdf;
    std::string original_format = "png";
};

struct ProtectResult
{
    ImageBuffer image;
    ReconstructionManifest manifest;
    PriorityAssignment assignment;
    SelectionPlan plan;
};

/**
 * Prioritise the regions, plan coverage for the policy's level, then alter each
 * selected area in rank order.
 *
 * Encrypt mode writes AES-256-CFB ciphertext into the pixels. Blur mode first
 * stores the encrypted original patch in the record, then blurs against the
 * unmodified input. A passphrase is only required when something is altered.
 */
ProtectResult protect(const ImageBuffer &img, const RegionSet &regions, const Preferences &prefs,
                      const SecurityPolicy &policy, std::string_view passphrase, EntropySource &entropy,
                      const ProtectOptions &options = {});

/// As protect(), with the key already derived; the manifest records key.salt and key.kdf.
ProtectResult protect_with_key(const ImageBuffer &img, const RegionSet &regions, const Preferences &prefs,
                               const SecurityPolicy &policy, const KeyMaterial &key, EntropySource &entropy,
                               std::string_view original_format = "png");

/// Re-derives the key from the manifest and undoes every record in reverse order.
/// Nothing is returned unless every region passes its checksum.
ImageBuffer restore(const ImageBuffer &img, const ReconstructionManifest &manifest, std::string_view passphrase);

ImageBuffer restore_with_key(const ImageBuffer &img, const ReconstructionManifest &manifest, const KeyMaterial &key);

} // namespace sisa
