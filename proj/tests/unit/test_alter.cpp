#include <cmath>
#include <random>
#include <set>

#include "doctest.h"

#include "sisa/alter.hpp"
#include "sisa/error.hpp"
#include "sisa/patch.hpp"
#include "support/oracles.hpp"
#include "support/ref_aes.hpp"

using namespace sisa;
using namespace sisa::testing;

namespace
{

const KdfSpec cheap_kdf{std::string(kdf_pbkdf2_sha256), {1000}};

std::vector<std::uint8_t> from_hex(std::string_view hex)
{
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < hex.size(); i += 2)
        out.push_back(std::uint8_t(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
    return out;
}

template <std::size_t N>
std::array<std::uint8_t, N> to_array(const std::vector<std::uint8_t> &v)
{
    std::array<std::uint8_t, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

KeyMaterial test_key(std::uint64_t seed = 1)
{
    SeededEntropy entropy(seed);
    return derive_key("correct horse", entropy.draw<16>(), cheap_kdf);
}

Region region_at(int id, BoundingBox box)
{
    Region r;
    r.id = id;
    r.class_label = "thing";
    r.bbox = box;
    return r;
}

} // namespace

TEST_SUITE("alter-engine")
{
    TEST_CASE("gaussian kernel taps")
    {
        for (double sigma : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0})
        {
            const auto k = gaussian_kernel(sigma);
            CHECK(k.radius == int(std::ceil(3 * sigma)));
            REQUIRE(k.taps.size() == std::size_t(2 * k.radius + 1));
            double sum = 0;
            for (std::size_t i = 0; i < k.taps.size(); ++i)
            {
                sum += k.taps[i];
                CHECK(k.taps[i] == doctest::Approx(k.taps[k.taps.size() - 1 - i]).epsilon(1e-15));
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
        const auto k1 = gaussian_kernel(1.0);
        CHECK(k1.taps[3] / k1.taps[4] == doctest::Approx(1.6487212707001282).epsilon(1e-12));
        CHECK(gaussian_2d(0, 0, 1.0) == doctest::Approx(0.15915494309189535).epsilon(1e-12));
        CHECK_THROWS_AS(gaussian_kernel(0.0), Error);
        CHECK_THROWS_AS(gaussian_kernel(-1.0), Error);
    }

    TEST_CASE("blur of a single white pixel equals 255 * t0^2")
    {
        ImageBuffer img(5, 5, 1);
        img.pixel(2, 2)[0] = 255;
        const auto out = blur_region(img, {0, 0, 5, 5}, full_mask(5, 5), 1.0);
        // 255 * 0.3990502796524549^2 = 40.606..., computed independently
        CHECK(out.pixel(2, 2)[0] == 41);
        const auto k = gaussian_kernel(1.0);
        CHECK(out.pixel(2, 2)[0] == std::uint8_t(std::round(255 * k.center() * k.center())));
        std::vector<std::uint8_t> cells(25, 1);
        CHECK(out == dense_blur(img, {0, 0, 5, 5}, cells, 1.0));
    }

    TEST_CASE("blur leaves constant images and empty masks alone")
    {
        ImageBuffer img(12, 9, 3);
        std::fill(img.pixels().begin(), img.pixels().end(), 137);
        const auto out = blur_region(img, {2, 1, 8, 6}, full_mask(8, 6), 2.5);
        for (std::size_t i = 0; i < out.pixels().size(); ++i)
            CHECK(std::abs(int(out.pixels()[i]) - 137) <= 1);

        std::mt19937_64 rng(1);
        const auto noisy = random_image(rng, 8, 8, 4);
        CHECK(blur_region(noisy, {0, 0, 8, 8}, MaskRLE{{64}}, 3.0) == noisy);
    }

    TEST_CASE("separable blur agrees with the dense 2-D oracle")
    {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 10; ++trial)
        {
            const auto img = random_image(rng, 16, 16, std::array{1, 3, 4}[std::size_t(trial % 3)]);
            const auto box = random_box(rng, 16, 16);
            const auto mask = random_mask(rng, box.l, box.b);
            const double sigma = std::array{0.5, 1.0, 1.7, 2.0}[std::size_t(trial % 4)];
            const auto fast = blur_region(img, box, mask, sigma);
            const auto dense = dense_blur(img, box, rle_decode(mask, box.l, box.b), sigma);
            for (std::size_t i = 0; i < fast.pixels().size(); ++i)
                REQUIRE(std::abs(int(fast.pixels()[i]) - int(dense.pixels()[i])) <= 1);
        }
    }

    TEST_CASE("reference AES matches the FIPS-197 and SP 800-38A vectors")
    {
        const RefAes256 fips(to_array<32>(from_hex("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f")));
        CHECK(fips.encrypt_block(to_array<16>(from_hex("00112233445566778899aabbccddeeff"))) ==
              to_array<16>(from_hex("8ea2b7ca516745bfeafc49904b496089")));

        const auto key = to_array<32>(from_hex("603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4"));
        const auto iv = to_array<16>(from_hex("000102030405060708090a0b0c0d0e0f"));
        const auto plain = from_hex("6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51"
                                    "30c81c46a35ce411e5fbc1191a0a52eff69f2445df4f9b17ad2b417be66c3710");
        const auto expected = from_hex("dc7e84bfda79164b7ecd8486985d386039ffed143b28b1c832113c6331e5407b"
                                       "df10132415e54b92a13ed0a8267ae2f975a385741ab9cef82031623d55b1e471");
        CHECK(RefAes256(key).cfb_encrypt(iv, plain) == expected);

        auto data = plain;
        aes256_cfb_encrypt(key, iv, data);
        CHECK(data == expected);
        aes256_cfb_decrypt(key, iv, data);
        CHECK(data == plain);
    }

    TEST_CASE("derive_key: deterministic, 32 bytes, salt sensitive")
    {
        SeededEntropy entropy(9);
        const Salt salt = entropy.draw<16>();
        const auto a = derive_key("pw", salt, cheap_kdf);
        const auto b = derive_key("pw", salt, cheap_kdf);
        CHECK(a.key == b.key);
        CHECK(a.key.size() == 32);
        CHECK(a.kdf == cheap_kdf);

        std::set<Key> keys;
        for (int i = 0; i < 1000; ++i)
            keys.insert(derive_key("pw", entropy.draw<16>(), KdfSpec{std::string(kdf_pbkdf2_sha256), {1}}).key);
        CHECK(keys.size() == 1000);

        const auto s = derive_key("pw", salt, KdfSpec{std::string(kdf_scrypt), {1024, 8, 1}});
        CHECK(s.key != a.key);

        CHECK_THROWS_AS(derive_key("", salt, cheap_kdf), Error);
        CHECK_THROWS_AS(derive_key("pw", salt, KdfSpec{"md5", {1}}), Error);
        CHECK_THROWS_AS(derive_key("pw", salt, KdfSpec{std::string(kdf_pbkdf2_sha256), {}}), Error);
    }

    TEST_CASE("encrypt_region: length preserving, first segment is E(iv) xor plaintext")
    {
        std::mt19937_64 rng(43);
        const auto key = test_key();
        SeededEntropy entropy(5);
        const auto img = random_image(rng, 20, 20, 3);
        const BoundingBox box{3, 4, 10, 7};
        const auto mask = random_mask(rng, box.l, box.b);
        const Iv iv = entropy.draw<16>();
        const auto [out, record] = encrypt_region(img, box, mask, key, iv);

        const auto plain = extract_patch(img, box, &mask);
        const auto cipher = extract_patch(out, box, &mask);
        CHECK(cipher.size() == plain.size());
        CHECK(record.byte_length == plain.size());
        CHECK(record.plaintext_crc32 == crc32(plain));
        CHECK(record.iv == iv);

        const auto stream = RefAes256(key.key).encrypt_block(iv);
        for (std::size_t i = 0; i < std::min<std::size_t>(16, plain.size()); ++i)
            CHECK(cipher[i] == (stream[i] ^ plain[i]));

        CHECK(decrypt_region(out, record, key) == img);
    }

    TEST_CASE("decrypt_region: wrong key and tampering trip the checksum")
    {
        std::mt19937_64 rng(47);
        const auto key = test_key(1);
        const auto other = test_key(2);
        const auto img = random_image(rng, 16, 16, 4);
        const BoundingBox box{2, 2, 9, 9};
        const auto [out, record] = encrypt_region(img, box, full_mask(9, 9), key, Iv{});

        try
        {
            decrypt_region(out, record, other);
            FAIL("wrong key accepted");
        }
        catch (const Error &e)
        {
            CHECK(e.kind() == ErrorKind::Checksum);
        }

        for (int trial = 0; trial < 50; ++trial)
        {
            ImageBuffer tampered = out;
            const int x = uniform(rng, box.p, box.p + box.l - 1), y = uniform(rng, box.q, box.q + box.b - 1);
            tampered.pixel(x, y)[uniform(rng, 0, 3)] ^= std::uint8_t(1u << uniform(rng, 0, 7));
            CHECK_THROWS_AS(decrypt_region(tampered, record, key), Error);
        }
    }

    TEST_CASE("protect: no regions leaves the image untouched and needs no passphrase")
    {
        std::mt19937_64 rng(53);
        const auto img = random_image(rng, 10, 10, 3);
        SeededEntropy entropy(1);
        const auto result = protect(img, {}, {}, {2, AlterationMode::Auto, 8}, "", entropy, {cheap_kdf, "png"});
        CHECK(result.image == img);
        CHECK(result.manifest.records.empty());
        CHECK(result.manifest.shortfall);
        CHECK(restore(result.image, result.manifest, "") == img);
    }

    TEST_CASE("protect: level 5 encrypts the whole image as one record")
    {
        std::mt19937_64 rng(59);
        const auto img = random_image(rng, 24, 16, 3);
        SeededEntropy entropy(2);
        const auto result = protect(img, {region_at(0, {1, 1, 3, 3})}, {}, {5, AlterationMode::Auto, 8}, "pw",
                                    entropy, {cheap_kdf, "png"});
        REQUIRE(result.manifest.records.size() == 1);
        const auto &record = result.manifest.records[0];
        CHECK(result.manifest.full_image_fallback);
        CHECK(record.mode == AlterationMode::Encrypt);
        CHECK(record.bbox == BoundingBox{0, 0, 24, 16});
        CHECK(record.byte_length == img.pixels().size());

        const auto key = derive_key("pw", result.manifest.salt, cheap_kdf);
        CHECK(result.image.pixels() == RefAes256(key.key).cfb_encrypt(record.iv, img.pixels()));
        CHECK(restore(result.image, result.manifest, "pw") == img);
    }

    TEST_CASE("protect: level 1 alters only the top-priority region")
    {
        std::mt19937_64 rng(61);
        const auto img = random_image(rng, 100, 100, 3);
        // central box holds 30% of the image; the corner box is lower priority
        const RegionSet regions{region_at(0, {20, 25, 60, 50}), region_at(1, {0, 0, 10, 10})};
        SeededEntropy entropy(3);
        const auto result = protect(img, regions, {}, {1, AlterationMode::Auto, 2.0}, "pw", entropy, {cheap_kdf, "png"});
        REQUIRE(result.manifest.records.size() == 1);
        CHECK(result.manifest.records[0].region_id == 0);
        CHECK(result.manifest.records[0].mode == AlterationMode::Blur);
        CHECK(result.manifest.records[0].stored_ciphertext.has_value());
        CHECK(result.manifest.achieved_fraction == doctest::Approx(0.30));
        // corner untouched
        CHECK(extract_patch(result.image, {0, 0, 10, 10}) == extract_patch(img, {0, 0, 10, 10}));
        CHECK(restore(result.image, result.manifest, "pw") == img);
    }

    TEST_CASE("protect/restore roundtrip, locality and fresh IVs over random cases")
    {
        std::mt19937_64 rng(67);
        SeededEntropy entropy(4);
        for (int trial = 0; trial < 40; ++trial)
        {
            const int w = uniform(rng, 8, 48), h = uniform(rng, 8, 48);
            const auto img = random_image(rng, w, h, std::array{1, 3, 4}[std::size_t(trial % 3)]);
            const auto regions = random_regions(rng, w, h, uniform(rng, 0, 5));
            const SecurityPolicy policy{uniform(rng, 1, 5),
                                        trial % 2 ? AlterationMode::Blur : AlterationMode::Encrypt, 1.5};
            const auto result = protect(img, regions, {}, policy, "pw", entropy, {cheap_kdf, "png"});
            REQUIRE(restore(result.image, result.manifest, "pw") == img);

            std::vector<std::pair<BoundingBox, std::optional<MaskRLE>>> altered;
            for (const auto &r : result.manifest.records)
                altered.emplace_back(r.bbox, r.mask);
            const auto grid = coverage_grid(altered, w, h);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (!grid[std::size_t(y) * w + x])
                        for (int c = 0; c < img.channels(); ++c)
                            REQUIRE(result.image.pixel(x, y)[c] == img.pixel(x, y)[c]);

            if (policy.mode == AlterationMode::Encrypt && !result.manifest.records.empty())
            {
                const auto again = protect(img, regions, {}, policy, "pw", entropy, {cheap_kdf, "png"});
                CHECK(again.image != result.image);
                CHECK(again.manifest.records[0].iv != result.manifest.records[0].iv);
            }
        }
    }

    TEST_CASE("restore refuses wrong passphrases and mismatched images")
    {
        std::mt19937_64 rng(71);
        const auto img = random_image(rng, 30, 30, 3);
        SeededEntropy entropy(6);
        for (auto mode : {AlterationMode::Encrypt, AlterationMode::Blur})
        {
            const auto result = protect(img, {region_at(0, {5, 5, 20, 20})}, {}, {3, mode, 2.0}, "pw", entropy,
                                        {cheap_kdf, "png"});
            try
            {
                restore(result.image, result.manifest, "not the passphrase");
                FAIL("wrong passphrase accepted");
            }
            catch (const Error &e)
            {
                CHECK(e.kind() == ErrorKind::Checksum);
            }
            CHECK_THROWS_AS(restore(ImageBuffer(31, 30, 3), result.manifest, "pw"), Error);
            auto future = result.manifest;
            future.version = 2;
            CHECK_THROWS_AS(restore(result.image, future, "pw"), Error);
        }
        CHECK_THROWS_AS(protect(img, {region_at(0, {5, 5, 20, 20})}, {}, {3, AlterationMode::Auto, 2.0}, "", entropy,
                                {cheap_kdf, "png"}),
                        Error);
    }
}
