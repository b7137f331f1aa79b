#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "sisa/alter.hpp"
#include "sisa/manifest.hpp"
#include "support/oracles.hpp"

namespace sisa::testing
{

inline const KdfSpec fast_kdf{std::string(kdf_pbkdf2_sha256), {1000}};

/// Hand-built manifest whose canonical encoding is frozen in data/golden_manifest.json.
inline ReconstructionManifest golden_manifest()
{
    ReconstructionManifest m;
    m.width = 10;
    m.height = 10;
    m.channels = 3;
    m.kdf = {std::string(kdf_pbkdf2_sha256), {1000}};
    m.policy = {1, AlterationMode::Auto, 8.0};
    m.target_fraction = 0.3;
    m.achieved_fraction = 0.3;

    RegionCipherRecord blur;
    blur.region_id = 0;
    blur.kind = RegionKind::Face;
    blur.class_label = "face";
    blur.mode = AlterationMode::Blur;
    blur.bbox = {0, 0, 2, 2};
    blur.mask = MaskRLE{{0, 4}};
    blur.byte_length = 12;
    blur.plaintext_crc32 = 305419896;
    blur.stored_ciphertext = std::vector<std::uint8_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};

    RegionCipherRecord enc;
    enc.region_id = 3;
    enc.kind = RegionKind::Text;
    enc.class_label = "sign";
    enc.mode = AlterationMode::Encrypt;
    enc.bbox = {5, 5, 3, 1};
    enc.mask = MaskRLE{{1, 1, 1}};
    enc.iv.fill(0xff);
    enc.byte_length = 3;

    m.records = {blur, enc};
    return m;
}

inline std::string read_text(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    std::string text = out.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
        text.pop_back();
    return text;
}

/// Manifest from a real protect() run on a random image and region set.
inline ReconstructionManifest random_manifest(std::mt19937_64 &rng, EntropySource &entropy)
{
    const int w = uniform(rng, 4, 40), h = uniform(rng, 4, 40);
    const auto img = random_image(rng, w, h, std::array{1, 3, 4}[std::size_t(uniform(rng, 0, 2))]);
    const auto regions = random_regions(rng, w, h, uniform(rng, 1, 6));
    const auto mode = std::array{AlterationMode::Auto, AlterationMode::Blur,
                                 AlterationMode::Encrypt}[std::size_t(uniform(rng, 0, 2))];
    const SecurityPolicy policy{uniform(rng, 1, 5), mode, 0.5 + uniform(rng, 0, 30) / 4.0};
    return protect(img, regions, {}, policy, "pw", entropy, {fast_kdf, "png"}).manifest;
}

} // namespace sisa::testing
