#include "sisa/alter.hpp"

#include <map>

#include "sisa/error.hpp"
#include "sisa/patch.hpp"

namespace sisa
{

namespace
{

RegionCipherRecord encrypt_inplace(ImageBuffer &img, const BoundingBox &bbox, const MaskRLE &mask,
                                   const KeyMaterial &key, const Iv &iv)
{
    auto patch = extract_patch(img, bbox, &mask);
    RegionCipherRecord record;
    record.bbox = bbox;
    record.mask = mask;
    record.iv = iv;
    record.byte_length = patch.size();
    record.plaintext_crc32 = crc32(patch);
    record.mode = AlterationMode::Encrypt;
    aes256_cfb_encrypt(key.key, iv, patch);
    write_patch_inplace(img, bbox, &mask, patch);
    return record;
}

void check_record(const RegionCipherRecord &record, const ImageBuffer &img)
{
    validate_box(record.bbox, img.width(), img.height());
    validate_rle(record.mask, record.bbox.l, record.bbox.b);
    const std::size_t expected = patch_length(img, record.bbox, &record.mask);
    if (record.byte_length != expected)
        throw Error(ErrorKind::Invariant, "record byte_length " + std::to_string(record.byte_length) +
                                              " does not match its mask (" + std::to_string(expected) + ")");
    if (record.mode == AlterationMode::Blur &&
        (!record.stored_ciphertext || record.stored_ciphertext->size() != record.byte_length))
        throw Error(ErrorKind::Invariant, "blur record is missing its stored patch");
}

std::string describe(const RegionCipherRecord &record)
{
    return record.region_id ? "region " + std::to_string(*record.region_id) : std::string("full image");
}

void decrypt_inplace(ImageBuffer &img, const RegionCipherRecord &record, const KeyMaterial &key)
{
    check_record(record, img);
    std::vector<std::uint8_t> patch = record.mode == AlterationMode::Blur
                                          ? *record.stored_ciphertext
                                          : extract_patch(img, record.bbox, &record.mask);
    aes256_cfb_decrypt(key.key, record.iv, patch);
    if (crc32(patch) != record.plaintext_crc32)
        throw Error(ErrorKind::Checksum,
                    "checksum mismatch restoring " + describe(record) + ": wrong passphrase or altered image");
    write_patch_inplace(img, record.bbox, &record.mask, patch);
}

ProtectResult alter(const ImageBuffer &img, const RegionSet &regions, PriorityAssignment assignment,
                    SelectionPlan plan, const SecurityPolicy &policy, const KeyMaterial *key,
                    const Salt &salt, const KdfSpec &kdf, EntropySource &entropy, std::string_view original_format)
{
    const AlterationMode mode = resolve_mode(policy);
    if (!plan.selected.empty() && !key)
        throw Error(ErrorKind::Crypto, "a passphrase is required to alter regions");

    std::map<int, const Region *> by_id;
    for (const auto &region : regions)
        by_id[region.id] = &region;

    ReconstructionManifest manifest;
    manifest.original_format = std::string(original_format);
    manifest.width = img.width();
    manifest.height = img.height();
    manifest.channels = img.channels();
    manifest.kdf = kdf;
    manifest.salt = salt;
    manifest.policy = policy;
    manifest.target_fraction = plan.target_fraction;
    manifest.achieved_fraction = plan.achieved_fraction;
    manifest.shortfall = plan.shortfall;
    manifest.full_image_fallback = plan.full_image_fallback;

    ImageBuffer out = img;
    const GaussianKernel kernel = mode == AlterationMode::Blur ? gaussian_kernel(policy.sigma) : GaussianKernel{};
    for (const auto &planned : plan.selected)
    {
        const Iv iv = entropy.draw<16>();
        RegionCipherRecord record;
        if (mode == AlterationMode::Encrypt)
        {
            record = encrypt_inplace(out, planned.bbox, planned.mask, *key, iv);
        }
        else
        {
            // encrypt the untouched original into the record, then blur against the input image
            auto patch = extract_patch(img, planned.bbox, &planned.mask);
            record.bbox = planned.bbox;
            record.mask = planned.mask;
            record.iv = iv;
            record.byte_length = patch.size();
            record.plaintext_crc32 = crc32(patch);
            record.mode = AlterationMode::Blur;
            aes256_cfb_encrypt(key->key, iv, patch);
            record.stored_ciphertext = std::move(patch);
            blur_region_into(img, out, planned.bbox, planned.mask, kernel);
        }
        record.region_id = planned.region_id;
        if (planned.region_id)
        {
            const Region &region = *by_id.at(*planned.region_id);
            record.kind = region.kind;
            record.class_label = region.class_label;
        }
        manifest.records.push_back(std::move(record));
    }

    return {std::move(out), std::move(manifest), std::move(assignment), std::move(plan)};
}

} // namespace

std::pair<ImageBuffer, RegionCipherRecord> encrypt_region(const ImageBuffer &img, const BoundingBox &bbox,
                                                          const MaskRLE &mask, const KeyMaterial &key,
                                                          const Iv &iv)
{
    ImageBuffer out = img;
    auto record = encrypt_inplace(out, bbox, mask, key, iv);
    return {std::move(out), std::move(record)};
}

ImageBuffer decrypt_region(const ImageBuffer &img, const RegionCipherRecord &record, const KeyMaterial &key)
{
    if (record.mode != AlterationMode::Encrypt)
        throw Error(ErrorKind::Validation, "decrypt_region expects an encrypt record");
    ImageBuffer out = img;
    decrypt_inplace(out, record, key);
    return out;
}

ProtectResult protect(const ImageBuffer &img, const RegionSet &regions, const Preferences &prefs,
                      const SecurityPolicy &policy, std::string_view passphrase, EntropySource &entropy,
                      const ProtectOptions &options)
{
    auto assignment = prioritize(regions, prefs, img.width(), img.height());
    auto plan = plan_selection(assignment, regions, policy, img.width(), img.height());
    const Salt salt = entropy.draw<16>();
    if (plan.selected.empty())
        return alter(img, regions, std::move(assignment), std::move(plan), policy, nullptr, salt, options.kdf,
                     entropy, options.original_format);
    if (passphrase.empty())
        throw Error(ErrorKind::Crypto, "a passphrase is required to alter regions");
    const KeyMaterial key = derive_key(passphrase, salt, options.kdf);
    return alter(img, regions, std::move(assignment), std::move(plan), policy, &key, salt, options.kdf, entropy,
                 options.original_format);
}

ProtectResult protect_with_key(const ImageBuffer &img, const RegionSet &regions, const Preferences &prefs,
                               const SecurityPolicy &policy, const KeyMaterial &key, EntropySource &entropy,
                               std::string_view original_format)
{
    auto assignment = prioritize(regions, prefs, img.width(), img.height());
    auto plan = plan_selection(assignment, regions, policy, img.width(), img.height());
    return alter(img, regions, std::move(assignment), std::move(plan), policy, &key, key.salt, key.kdf, entropy,
                 original_format);
}

ImageBuffer restore_with_key(const ImageBuffer &img, const ReconstructionManifest &manifest, const KeyMaterial &key)
{
    if (manifest.version != manifest_version)
        throw Error(ErrorKind::UnknownVersion, "unsupported manifest version " + std::to_string(manifest.version));
    if (img.width() != manifest.width || img.height() != manifest.height || img.channels() != manifest.channels)
        throw Error(ErrorKind::Validation, "image shape does not match the manifest");

    ImageBuffer out = img;
    for (auto it = manifest.records.rbegin(); it != manifest.records.rend(); ++it)
        decrypt_inplace(out, *it, key);
    return out;
}

ImageBuffer restore(const ImageBuffer &img, const ReconstructionManifest &manifest, std::string_view passphrase)
{
    if (manifest.version != manifest_version)
        throw Error(ErrorKind::UnknownVersion, "unsupported manifest version " + std::to_string(manifest.version));
    if (manifest.records.empty())
        return restore_with_key(img, manifest, KeyMaterial{});
    const KeyMaterial key = derive_key(passphrase, manifest.salt, manifest.kdf);
    return restore_with_key(img, manifest, key);
}

} // namespace sisa
