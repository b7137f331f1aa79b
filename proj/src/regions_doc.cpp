#include "sisa/regions_doc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

#include "sisa/error.hpp"

namespace sisa
{

using json = nlohmann::ordered_json;

namespace
{

[[noreturn]] void malformed(const std::string &what)
{
    throw Error(ErrorKind::Malformed, "malformed regions document: " + what);
}

int as_int(const json &v, const std::string &what)
{
    if (!v.is_number_integer())
        malformed(what + " must be an integer");
    try
    {
        return v.get<int>();
    }
    catch (const json::exception &)
    {
        malformed(what + " is out of range");
    }
}

Region parse_region(const json &j, std::size_t index)
{
    const std::string where = "region " + std::to_string(index);
    if (!j.is_object())
        malformed(where + " is not an object");
    for (const auto &item : j.items())
    {
        static const std::set<std::string> known = {"id", "kind", "class_label", "bbox", "confidence",
                                                    "mask_rle", "identity"};
        if (!known.count(item.key()))
            malformed(where + " has unexpected key \"" + item.key() + "\"");
    }
    for (const char *key : {"id", "kind", "class_label", "bbox", "confidence"})
        if (!j.contains(key))
            malformed(where + " lacks \"" + key + "\"");

    Region region;
    region.id = as_int(j["id"], where + " id");
    if (!j["kind"].is_string())
        malformed(where + " kind must be a string");
    try
    {
        region.kind = region_kind_from_string(j["kind"].get<std::string>());
    }
    catch (const Error &e)
    {
        malformed(e.what());
    }
    if (!j["class_label"].is_string())
        malformed(where + " class_label must be a string");
    region.class_label = j["class_label"].get<std::string>();

    const json &bbox = j["bbox"];
    if (!bbox.is_array() || bbox.size() != 4)
        malformed(where + " bbox must be [p, q, l, b]");
    region.bbox = {as_int(bbox[0], where + " bbox"), as_int(bbox[1], where + " bbox"),
                   as_int(bbox[2], where + " bbox"), as_int(bbox[3], where + " bbox")};

    if (!j["confidence"].is_number())
        malformed(where + " confidence must be a number");
    region.confidence = j["confidence"].get<double>();

    if (j.contains("mask_rle") && !j["mask_rle"].is_null())
    {
        if (!j["mask_rle"].is_array())
            malformed(where + " mask_rle must be an array");
        MaskRLE mask;
        for (const auto &run : j["mask_rle"])
        {
            if (!run.is_number_unsigned() || run.get<std::uint64_t>() > UINT32_MAX)
                malformed(where + " mask_rle entries must be non-negative integers");
            mask.runs.push_back(run.get<std::uint32_t>());
        }
        region.mask = std::move(mask);
    }
    if (j.contains("identity") && !j["identity"].is_null())
    {
        if (!j["identity"].is_string())
            malformed(where + " identity must be a string");
        region.identity = j["identity"].get<std::string>();
    }
    return region;
}

} // namespace

RegionsDocument parse_regions(std::string_view text)
{
    json j;
    try
    {
        j = json::parse(text.begin(), text.end());
    }
    catch (const json::exception &e)
    {
        malformed(e.what());
    }
    if (!j.is_object() || !j.contains("schema_version"))
        malformed("document is not an object with a schema_version");

    RegionsDocument doc;
    doc.schema_version = as_int(j["schema_version"], "schema_version");
    if (doc.schema_version != regions_schema_version)
        throw Error(ErrorKind::UnknownVersion,
                    "unsupported regions schema version " + std::to_string(doc.schema_version));

    const json &image = j.contains("image") ? j["image"] : json();
    if (!image.is_object() || !image.contains("width") || !image.contains("height"))
        malformed("\"image\" must hold width and height");
    doc.width = as_int(image["width"], "image width");
    doc.height = as_int(image["height"], "image height");
    if (doc.width < 1 || doc.height < 1)
        malformed("image dimensions must be positive");

    if (!j.contains("regions") || !j["regions"].is_array())
        malformed("\"regions\" must be an array");
    std::size_t index = 0;
    for (const auto &region : j["regions"])
        doc.regions.push_back(parse_region(region, index++));

    validate_regions(doc.regions, doc.width, doc.height);
    return doc;
}

RegionsDocument load_regions(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_regions(text);
}

std::string encode_regions(const RegionsDocument &doc)
{
    json j;
    j["schema_version"] = doc.schema_version;
    j["image"] = json{{"width", doc.width}, {"height", doc.height}};
    j["regions"] = json::array();
    for (const auto &region : doc.regions)
    {
        json r;
        r["id"] = region.id;
        r["kind"] = to_string(region.kind);
        r["class_label"] = region.class_label;
        r["bbox"] = json::array({region.bbox.p, region.bbox.q, region.bbox.l, region.bbox.b});
        r["confidence"] = region.confidence;
        if (region.mask)
            r["mask_rle"] = region.mask->runs;
        if (region.identity)
            r["identity"] = *region.identity;
        j["regions"].push_back(std::move(r));
    }
    return j.dump(-1, ' ', true);
}

RegionsDocument center_box_detector(int width, int height, double fraction)
{
    if (width < 1 || height < 1)
        throw Error(ErrorKind::Validation, "center-box needs a non-empty image");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(ErrorKind::Validation, "center-box fraction must be in (0, 1]");

    const double total = double(width) * double(height);
    const auto target = std::max<long long>(1, std::llround(fraction * total));
    const double aspect = std::log(double(width) / double(height));

    int best_l = 0, best_b = 0;
    double best_skew = 0.0;
    for (int l = 1; l <= width; ++l)
    {
        if (target % l != 0 || target / l > height)
            continue;
        const int b = int(target / l);
        const double skew = std::abs(std::log(double(l) / double(b)) - aspect);
        if (best_l == 0 || skew < best_skew)
        {
            best_l = l;
            best_b = b;
            best_skew = skew;
        }
    }
    if (best_l == 0)
    {
        // no exact factorisation fits; keep the image's aspect and round
        best_l = std::clamp(int(std::lround(std::sqrt(double(target) * width / height))), 1, width);
        best_b = std::clamp(int(std::lround(double(target) / best_l)), 1, height);
    }

    RegionsDocument doc;
    doc.width = width;
    doc.height = height;
    Region region;
    region.id = 0;
    region.kind = RegionKind::Object;
    region.class_label = "center-box";
    region.bbox = {(width - best_l) / 2, (height - best_b) / 2, best_l, best_b};
    region.confidence = 1.0;
    doc.regions.push_back(std::move(region));
    return doc;
}

RegionsDocument grid_detector(int width, int height, int k)
{
    if (k < 1 || k > width || k > height)
        throw Error(ErrorKind::Validation, "grid size must be between 1 and the smaller image side");
    RegionsDocument doc;
    doc.width = width;
    doc.height = height;
    const int l = width / k;
    const int b = height / k;
    for (int row = 0; row < k; ++row)
    {
        for (int col = 0; col < k; ++col)
        {
            Region region;
            region.id = row * k + col;
            region.kind = RegionKind::Object;
            region.class_label = "grid";
            region.bbox = {col * l, row * b, l, b};
            region.confidence = 1.0;
            doc.regions.push_back(std::move(region));
        }
    }
    return doc;
}

RegionsDocument run_stub_detector(std::string_view spec, int width, int height)
{
    const auto colon = spec.find(':');
    const std::string_view name = spec.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);

    if (name == "center-box")
    {
        double fraction = 0.30;
        if (!arg.empty())
        {
            try
            {
                std::size_t used = 0;
                fraction = std::stod(std::string(arg), &used);
                if (used != arg.size())
                    throw std::invalid_argument("trailing characters");
            }
            catch (const std::exception &)
            {
                throw Error(ErrorKind::Validation, "center-box expects a fraction, got '" + std::string(arg) + "'");
            }
        }
        return center_box_detector(width, height, fraction);
    }
    if (name == "grid")
    {
        int k = 3;
        if (!arg.empty())
        {
            const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
            if (ec != std::errc{} || ptr != arg.data() + arg.size())
                throw Error(ErrorKind::Validation, "grid expects an integer, got '" + std::string(arg) + "'");
        }
        return grid_detector(width, height, k);
    }
    throw Error(ErrorKind::Validation, "unknown stub detector '" + std::string(name) + "'");
}

} // namespace sisa
