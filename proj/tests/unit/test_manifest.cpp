#include <fstream>
#include <random>

#include "doctest.h"

#include "png_text.hpp"
#include "sisa/error.hpp"
#include "sisa/manifest.hpp"
#include "support/fixtures.hpp"
#include "support/scratch.hpp"

using namespace sisa;
using namespace sisa::testing;

namespace
{

ErrorKind decode_error(std::string_view text)
{
    try
    {
        decode_manifest(text);
    }
    catch (const Error &e)
    {
        return e.kind();
    }
    FAIL("decode unexpectedly succeeded");
    return ErrorKind::Io;
}

ErrorKind validate_error(const ReconstructionManifest &m)
{
    try
    {
        validate_manifest(m);
    }
    catch (const Error &e)
    {
        return e.kind();
    }
    FAIL("validation unexpectedly succeeded");
    return ErrorKind::Io;
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> sisa_chunk_types(const std::filesystem::path &path)
{
    std::vector<std::string> types;
    for (const auto &chunk : png_text::parse_chunks(file_bytes(path)))
    {
        if (chunk.type != "tEXt" && chunk.type != "zTXt" && chunk.type != "iTXt")
            continue;
        const std::string keyword(chunk.data.begin(),
                                  std::find(chunk.data.begin(), chunk.data.end(), std::uint8_t(0)));
        if (keyword == "SISA")
            types.push_back(chunk.type);
    }
    return types;
}

} // namespace

TEST_SUITE("manifest-codec")
{
    TEST_CASE("golden manifest encodes to the frozen bytes")
    {
        const std::string golden = read_text(std::string(SISA_TEST_DATA) + "/golden_manifest.json");
        REQUIRE(!golden.empty());
        CHECK(encode_manifest(golden_manifest()) == golden);
        CHECK(decode_manifest(golden) == golden_manifest());
    }

    TEST_CASE("encoding is ASCII with no insignificant whitespace")
    {
        auto m = golden_manifest();
        m.records[1].class_label = "caf\xc3\xa9";
        const auto text = encode_manifest(m);
        for (char c : text)
            REQUIRE(static_cast<unsigned char>(c) < 0x80);
        CHECK(text.find(' ') == std::string::npos);
        CHECK(text.find('\n') == std::string::npos);
        CHECK(decode_manifest(text) == m);
    }

    TEST_CASE("property: decode(encode(m)) == m and encoding is stable")
    {
        std::mt19937_64 rng(81);
        SeededEntropy entropy(81);
        for (int trial = 0; trial < 100; ++trial)
        {
            const auto m = random_manifest(rng, entropy);
            const auto text = encode_manifest(m);
            const auto back = decode_manifest(text);
            REQUIRE(back == m);
            REQUIRE(encode_manifest(back) == text);
        }
    }

    TEST_CASE("truncated and non-JSON input is malformed")
    {
        const auto text = encode_manifest(golden_manifest());
        CHECK(decode_error(text.substr(0, text.size() / 2)) == ErrorKind::Malformed);
        CHECK(decode_error("") == ErrorKind::Malformed);
        CHECK(decode_error("[1,2]") == ErrorKind::Malformed);
        CHECK(decode_error(R"({"version":1})") == ErrorKind::Malformed);
    }

    TEST_CASE("unknown version is reported as such")
    {
        auto text = encode_manifest(golden_manifest());
        text.replace(text.find("\"version\":1"), 11, "\"version\":99");
        CHECK(decode_error(text) == ErrorKind::UnknownVersion);
    }

    TEST_CASE("unexpected keys and wrong types are malformed")
    {
        auto text = encode_manifest(golden_manifest());
        CHECK(decode_error(text.substr(0, text.size() - 1) + ",\"extra\":1}") == ErrorKind::Malformed);
        auto bad_type = text;
        bad_type.replace(bad_type.find("\"width\":10"), 10, "\"width\":\"10\"");
        CHECK(decode_error(bad_type) == ErrorKind::Malformed);
        auto bad_b64 = text;
        bad_b64.replace(bad_b64.find("AAECAwQFBgcICQoL"), 16, "AAECAwQFBgcICQo!");
        CHECK(decode_error(bad_b64) == ErrorKind::Malformed);
        auto bad_mode = text;
        bad_mode.replace(bad_mode.find("\"mode\":\"encrypt\""), 16, "\"mode\":\"scramble\"");
        CHECK(decode_error(bad_mode) == ErrorKind::Malformed);
    }

    TEST_CASE("structural invariants")
    {
        CHECK_NOTHROW(validate_manifest(golden_manifest()));

        auto outside = golden_manifest();
        outside.records[1].bbox = {9, 9, 3, 1};
        CHECK(validate_error(outside) == ErrorKind::Invariant);

        auto bad_length = golden_manifest();
        bad_length.records[1].byte_length = 4;
        CHECK(validate_error(bad_length) == ErrorKind::Invariant);

        auto blur_without_store = golden_manifest();
        blur_without_store.records[0].stored_ciphertext.reset();
        CHECK(validate_error(blur_without_store) == ErrorKind::Invariant);

        auto encrypt_with_store = golden_manifest();
        encrypt_with_store.records[1].stored_ciphertext = std::vector<std::uint8_t>(3);
        CHECK(validate_error(encrypt_with_store) == ErrorKind::Invariant);

        auto unresolved = golden_manifest();
        unresolved.records[1].mode = AlterationMode::Auto;
        CHECK(validate_error(unresolved) == ErrorKind::Invariant);

        auto overlap = golden_manifest();
        overlap.records[1].bbox = {1, 1, 1, 1};
        overlap.records[1].mask = MaskRLE{{0, 1}};
        CHECK(validate_error(overlap) == ErrorKind::Invariant);

        auto duplicate = golden_manifest();
        duplicate.records[1].region_id = 0;
        CHECK(validate_error(duplicate) == ErrorKind::Invariant);

        auto bad_mask = golden_manifest();
        bad_mask.records[1].mask = MaskRLE{{1, 1}};
        CHECK(validate_error(bad_mask) == ErrorKind::Invariant);

        auto bad_level = golden_manifest();
        bad_level.policy.level = 6;
        CHECK(validate_error(bad_level) == ErrorKind::Invariant);
    }

    TEST_CASE("embed then extract returns the manifest and leaves pixels identical")
    {
        const Scratch dir("manifest_embed");
        std::mt19937_64 rng(83);
        const auto img = random_image(rng, 10, 10, 3);
        const auto path = dir / "img.png";
        save_lossless(img, path);

        CHECK_THROWS_AS(extract_manifest(path), Error);
        try
        {
            extract_manifest(path);
        }
        catch (const Error &e)
        {
            CHECK(e.kind() == ErrorKind::MissingManifest);
        }

        const auto m = golden_manifest();
        embed_manifest(path, m);
        CHECK(extract_manifest(path) == m);
        CHECK(extract_manifest_bytes(path) == encode_manifest(m));
        CHECK(load_image(path) == img);
        CHECK(sisa_chunk_types(path) == std::vector<std::string>{"tEXt"});

        // re-embedding replaces rather than appends
        auto second = m;
        second.achieved_fraction = 0.25;
        embed_manifest(path, second);
        CHECK(extract_manifest(path) == second);
        CHECK(sisa_chunk_types(path).size() == 1);
        CHECK(load_image(path) == img);
    }

    TEST_CASE("large manifests use a compressed chunk")
    {
        const Scratch dir("manifest_ztxt");
        std::mt19937_64 rng(89);
        SeededEntropy entropy(89);
        const auto img = random_image(rng, 64, 64, 3);
        const auto protected_ = protect(img, {}, {}, {5, AlterationMode::Blur, 1.0}, "pw", entropy, {fast_kdf, "png"});
        REQUIRE(encode_manifest(protected_.manifest).size() > manifest_ztxt_threshold);

        const auto path = dir / "big.png";
        save_lossless(protected_.image, path);
        embed_manifest(path, protected_.manifest);
        CHECK(sisa_chunk_types(path) == std::vector<std::string>{"zTXt"});
        CHECK(extract_manifest(path) == protected_.manifest);
        CHECK(load_image(path) == protected_.image);
    }

    TEST_CASE("non-PNG containers and corrupt chunks are rejected")
    {
        const Scratch dir("manifest_bad");
        std::ofstream(dir / "x.jpg", std::ios::binary) << "\xff\xd8\xff\xe0 not really";
        CHECK_THROWS_AS(extract_manifest(dir / "x.jpg"), Error);
        CHECK_THROWS_AS(embed_manifest(dir / "x.jpg", golden_manifest()), Error);

        save_lossless(ImageBuffer(2, 2, 1), dir / "y.png");
        auto bytes = file_bytes(dir / "y.png");
        bytes[bytes.size() - 20] ^= 0x40;
        std::ofstream(dir / "y.png", std::ios::binary)
            .write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
        CHECK_THROWS_AS(extract_manifest(dir / "y.png"), Error);
    }

    TEST_CASE("sidecar files")
    {
        const Scratch dir("manifest_sidecar");
        CHECK(sidecar_path("/a/b/photo.png") == std::filesystem::path("/a/b/photo.png.sisa.json"));
        const auto path = dir / "m.json";
        write_manifest_file(path, golden_manifest());
        CHECK(read_manifest_file(path) == golden_manifest());
        try
        {
            read_manifest_file(dir / "absent.json");
            FAIL("expected MissingManifest");
        }
        catch (const Error &e)
        {
            CHECK(e.kind() == ErrorKind::MissingManifest);
        }
    }
}
