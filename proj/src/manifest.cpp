#include "sisa/manifest.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

#include "png_text.hpp"
#include "sisa/error.hpp"

namespace sisa
{

using json = nlohmann::ordered_json;

namespace
{

json encode_record(const RegionCipherRecord &record)
{
    json j;
    j["region_id"] = record.region_id ? json(*record.region_id) : json(nullptr);
    j["kind"] = record.kind ? json(to_string(*record.kind)) : json(nullptr);
    j["class_label"] = record.class_label;
    j["mode"] = to_string(record.mode);
    j["bbox"] = json::array({record.bbox.p, record.bbox.q, record.bbox.l, record.bbox.b});
    j["mask_rle"] = record.mask.runs;
    j["iv"] = base64_encode(record.iv);
    j["byte_length"] = record.byte_length;
    j["plaintext_crc32"] = record.plaintext_crc32;
    if (record.stored_ciphertext)
        j["stored_ciphertext"] = base64_encode(*record.stored_ciphertext);
    return j;
}

[[noreturn]] void malformed(const std::string &what)
{
    throw Error(ErrorKind::Malformed, "malformed manifest: " + what);
}

void expect_keys(const json &j, std::initializer_list<const char *> required,
                 std::initializer_list<const char *> optional, const std::string &where)
{
    if (!j.is_object())
        malformed(where + " is not an object");
    std::set<std::string> allowed;
    for (const char *key : required)
    {
        if (!j.contains(key))
            malformed(where + " lacks \"" + key + "\"");
        allowed.insert(key);
    }
    allowed.insert(optional.begin(), optional.end());
    for (const auto &item : j.items())
        if (!allowed.count(item.key()))
            malformed(where + " has unexpected key \"" + item.key() + "\"");
}

template <typename T>
T get_integer(const json &j, const char *key)
{
    const json &v = j.at(key);
    if (!v.is_number_integer())
        malformed(std::string("\"") + key + "\" must be an integer");
    if constexpr (std::is_unsigned_v<T>)
    {
        if (v.is_number_unsigned())
            return v.get<T>();
        if (v.get<std::int64_t>() < 0)
            malformed(std::string("\"") + key + "\" must be non-negative");
    }
    return v.get<T>();
}

double get_real(const json &j, const char *key)
{
    const json &v = j.at(key);
    if (!v.is_number())
        malformed(std::string("\"") + key + "\" must be a number");
    return v.get<double>();
}

bool get_bool(const json &j, const char *key)
{
    const json &v = j.at(key);
    if (!v.is_boolean())
        malformed(std::string("\"") + key + "\" must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json &j, const char *key)
{
    const json &v = j.at(key);
    if (!v.is_string())
        malformed(std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
}

template <std::size_t N>
std::array<std::uint8_t, N> get_fixed_bytes(const json &j, const char *key)
{
    const auto bytes = base64_decode(get_string(j, key));
    if (bytes.size() != N)
        malformed(std::string("\"") + key + "\" must decode to " + std::to_string(N) + " bytes");
    std::array<std::uint8_t, N> out{};
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

RegionCipherRecord decode_record(const json &j, std::size_t index)
{
    const std::string where = "record " + std::to_string(index);
    expect_keys(j,
                {"region_id", "kind", "class_label", "mode", "bbox", "mask_rle", "iv", "byte_length",
                 "plaintext_crc32"},
                {"stored_ciphertext"}, where);

    RegionCipherRecord record;
    if (!j["region_id"].is_null())
        record.region_id = get_integer<int>(j, "region_id");
    if (!j["kind"].is_null())
    {
        try
        {
            record.kind = region_kind_from_string(get_string(j, "kind"));
        }
        catch (const Error &e)
        {
            malformed(e.what());
        }
    }
    record.class_label = get_string(j, "class_label");
    try
    {
        record.mode = alteration_mode_from_string(get_string(j, "mode"));
    }
    catch (const Error &e)
    {
        malformed(e.what());
    }

    const json &bbox = j["bbox"];
    if (!bbox.is_array() || bbox.size() != 4 || !std::all_of(bbox.begin(), bbox.end(), [](const json &v) {
            return v.is_number_integer();
        }))
        malformed(where + " bbox must be four integers");
    record.bbox = {bbox[0].get<int>(), bbox[1].get<int>(), bbox[2].get<int>(), bbox[3].get<int>()};

    const json &runs = j["mask_rle"];
    if (!runs.is_array())
        malformed(where + " mask_rle must be an array");
    for (const auto &run : runs)
    {
        if (!run.is_number_unsigned())
            malformed(where + " mask_rle entries must be non-negative integers");
        record.mask.runs.push_back(run.get<std::uint32_t>());
    }

    record.iv = get_fixed_bytes<16>(j, "iv");
    record.byte_length = get_integer<std::size_t>(j, "byte_length");
    record.plaintext_crc32 = get_integer<std::uint32_t>(j, "plaintext_crc32");
    if (j.contains("stored_ciphertext"))
        record.stored_ciphertext = base64_decode(get_string(j, "stored_ciphertext"));
    return record;
}

[[noreturn]] void violated(const std::string &what)
{
    throw Error(ErrorKind::Invariant, "manifest invariant violated: " + what);
}

} // namespace

std::string encode_manifest(const ReconstructionManifest &m)
{
    json j;
    j["version"] = m.version;
    j["original_format"] = m.original_format;
    j["width"] = m.width;
    j["height"] = m.height;
    j["channels"] = m.channels;
    j["kdf_id"] = m.kdf.id;
    j["kdf_params"] = m.kdf.params;
    j["salt"] = base64_encode(m.salt);
    j["policy"] = json{{"level", m.policy.level}, {"mode", to_string(m.policy.mode)}, {"sigma", m.policy.sigma}};
    j["target_fraction"] = m.target_fraction;
    j["achieved_fraction"] = m.achieved_fraction;
    j["shortfall"] = m.shortfall;
    j["full_image_fallback"] = m.full_image_fallback;
    j["records"] = json::array();
    for (const auto &record : m.records)
        j["records"].push_back(encode_record(record));
    return j.dump(-1, ' ', true);
}

void validate_manifest(const ReconstructionManifest &m)
{
    if (m.version != manifest_version)
        throw Error(ErrorKind::UnknownVersion, "unsupported manifest version " + std::to_string(m.version));
    if (m.width < 1 || m.height < 1)
        violated("image dimensions must be positive");
    if (m.channels != 1 && m.channels != 3 && m.channels != 4)
        violated("channel count must be 1, 3 or 4");
    try
    {
        m.policy.validate();
    }
    catch (const Error &e)
    {
        violated(e.what());
    }
    if (!(m.target_fraction > 0.0 && m.target_fraction <= 1.0))
        violated("target_fraction outside (0,1]");
    if (!(m.achieved_fraction >= 0.0 && m.achieved_fraction <= 1.0))
        violated("achieved_fraction outside [0,1]");

    std::vector<std::uint8_t> owned(std::size_t(m.width) * std::size_t(m.height), 0);
    std::set<int> ids;
    for (std::size_t i = 0; i < m.records.size(); ++i)
    {
        const auto &record = m.records[i];
        const std::string where = "record " + std::to_string(i);
        if (!record.bbox.fits(m.width, m.height))
            violated(where + " bbox outside the image");
        BitMask cells;
        try
        {
            cells = rle_decode(record.mask, record.bbox.l, record.bbox.b);
        }
        catch (const Error &e)
        {
            violated(where + ": " + e.what());
        }
        if (record.mode == AlterationMode::Auto)
            violated(where + " has unresolved mode 'auto'");
        if (record.region_id && !ids.insert(*record.region_id).second)
            violated(where + " repeats region id " + std::to_string(*record.region_id));
        if (record.byte_length != popcount(record.mask) * std::size_t(m.channels))
            violated(where + " byte_length does not match its mask");
        if ((record.mode == AlterationMode::Blur) != record.stored_ciphertext.has_value())
            violated(where + " stored_ciphertext must be present exactly for blur records");
        if (record.stored_ciphertext && record.stored_ciphertext->size() != record.byte_length)
            violated(where + " stored_ciphertext length differs from byte_length");

        for (std::size_t cell = 0; cell < cells.size(); ++cell)
        {
            if (!cells[cell])
                continue;
            const std::size_t x = std::size_t(record.bbox.p) + cell % std::size_t(record.bbox.l);
            const std::size_t y = std::size_t(record.bbox.q) + cell / std::size_t(record.bbox.l);
            auto &slot = owned[y * std::size_t(m.width) + x];
            if (slot)
                violated(where + " overlaps an earlier record");
            slot = 1;
        }
    }
}

ReconstructionManifest decode_manifest(std::string_view bytes)
{
    json j;
    try
    {
        j = json::parse(bytes.begin(), bytes.end());
    }
    catch (const json::exception &e)
    {
        malformed(e.what());
    }
    if (!j.is_object() || !j.contains("version"))
        malformed("document is not an object with a version");
    const int version = get_integer<int>(j, "version");
    if (version != manifest_version)
        throw Error(ErrorKind::UnknownVersion, "unsupported manifest version " + std::to_string(version));

    expect_keys(j,
                {"version", "original_format", "width", "height", "channels", "kdf_id", "kdf_params", "salt",
                 "policy", "target_fraction", "achieved_fraction", "shortfall", "full_image_fallback", "records"},
                {}, "manifest");

    ReconstructionManifest m;
    try
    {
        m.version = version;
        m.original_format = get_string(j, "original_format");
        m.width = get_integer<int>(j, "width");
        m.height = get_integer<int>(j, "height");
        m.channels = get_integer<int>(j, "channels");
        m.kdf.id = get_string(j, "kdf_id");
        if (!j["kdf_params"].is_array())
            malformed("\"kdf_params\" must be an array");
        m.kdf.params.clear();
        for (const auto &param : j["kdf_params"])
        {
            if (!param.is_number_unsigned())
                malformed("\"kdf_params\" entries must be non-negative integers");
            m.kdf.params.push_back(param.get<std::uint64_t>());
        }
        m.salt = get_fixed_bytes<16>(j, "salt");

        const json &policy = j["policy"];
        expect_keys(policy, {"level", "mode", "sigma"}, {}, "policy");
        m.policy.level = get_integer<int>(policy, "level");
        m.policy.sigma = get_real(policy, "sigma");
        try
        {
            m.policy.mode = alteration_mode_from_string(get_string(policy, "mode"));
        }
        catch (const Error &e)
        {
            malformed(e.what());
        }

        m.target_fraction = get_real(j, "target_fraction");
        m.achieved_fraction = get_real(j, "achieved_fraction");
        m.shortfall = get_bool(j, "shortfall");
        m.full_image_fallback = get_bool(j, "full_image_fallback");

        if (!j["records"].is_array())
            malformed("\"records\" must be an array");
        std::size_t index = 0;
        for (const auto &record : j["records"])
            m.records.push_back(decode_record(record, index++));
    }
    catch (const json::exception &e)
    {
        // out-of-range integers and the like
        malformed(e.what());
    }

    validate_manifest(m);
    return m;
}

namespace
{

std::vector<std::uint8_t> read_bytes(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path &path, const void *data, std::size_t size)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(static_cast<const char *>(data), std::streamsize(size));
    if (!out)
        throw Error(ErrorKind::Io, "write failed for " + path.string());
}

} // namespace

void embed_manifest(const std::filesystem::path &png_path, const ReconstructionManifest &manifest)
{
    auto chunks = png_text::parse_chunks(read_bytes(png_path));
    png_text::replace_text(chunks, manifest_chunk_keyword, encode_manifest(manifest), manifest_ztxt_threshold);
    const auto bytes = png_text::serialize_chunks(chunks);
    write_bytes(png_path, bytes.data(), bytes.size());
}

std::string extract_manifest_bytes(const std::filesystem::path &png_path)
{
    const auto chunks = png_text::parse_chunks(read_bytes(png_path));
    auto text = png_text::find_text(chunks, manifest_chunk_keyword);
    if (!text)
        throw Error(ErrorKind::MissingManifest, png_path.string() + " carries no SISA manifest chunk");
    return *text;
}

ReconstructionManifest extract_manifest(const std::filesystem::path &png_path)
{
    return decode_manifest(extract_manifest_bytes(png_path));
}

std::filesystem::path sidecar_path(const std::filesystem::path &image_path)
{
    return std::filesystem::path(image_path.string() + ".sisa.json");
}

void write_manifest_file(const std::filesystem::path &path, const ReconstructionManifest &manifest)
{
    const auto text = encode_manifest(manifest);
    write_bytes(path, text.data(), text.size());
}

ReconstructionManifest read_manifest_file(const std::filesystem::path &path)
{
    if (!std::filesystem::exists(path))
        throw Error(ErrorKind::MissingManifest, "manifest " + path.string() + " does not exist");
    const auto bytes = read_bytes(path);
    return decode_manifest(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()));
}

} // namespace sisa
