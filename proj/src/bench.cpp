#include "sisa/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "sisa/alter.hpp"
#include "sisa/error.hpp"
#include "sisa/regions_doc.hpp"

namespace sisa
{

const char *to_string(BenchMode mode)
{
    switch (mode)
    {
    case BenchMode::FullEncrypt: return "full_encrypt";
    case BenchMode::SisaEncrypt: return "sisa_encrypt";
    case BenchMode::SisaBlur: return "sisa_blur";
    case BenchMode::FullDecrypt: return "full_decrypt";
    case BenchMode::SisaDecrypt: return "sisa_decrypt";
    }
    return "unknown";
}

std::vector<std::pair<int, int>> parse_sizes(std::string_view spec)
{
    std::vector<std::pair<int, int>> sizes;
    const auto bad = [&] {
        return Error(ErrorKind::Validation, "cannot parse size list '" + std::string(spec) + "' (expected WxH,...)");
    };
    while (!spec.empty())
    {
        const auto comma = spec.find(',');
        const std::string_view item = spec.substr(0, comma);
        spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);

        const auto x = item.find('x');
        if (x == std::string_view::npos)
            throw bad();
        int w = 0, h = 0;
        const auto [wp, we] = std::from_chars(item.data(), item.data() + x, w);
        const auto [hp, he] = std::from_chars(item.data() + x + 1, item.data() + item.size(), h);
        if (we != std::errc{} || he != std::errc{} || wp != item.data() + x || hp != item.data() + item.size() ||
            w < 1 || h < 1)
            throw bad();
        sizes.emplace_back(w, h);
        if (comma != std::string_view::npos && spec.empty())
            throw bad();
    }
    if (sizes.empty())
        throw bad();
    return sizes;
}

double percentile(std::vector<double> samples, double pct)
{
    if (samples.empty())
        throw Error(ErrorKind::Validation, "percentile of an empty sample");
    std::sort(samples.begin(), samples.end());
    const double pos = pct / 100.0 * double(samples.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    return samples[lo] + (pos - double(lo)) * (samples[hi] - samples[lo]);
}

namespace
{

ImageBuffer synthetic_image(int width, int height, std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ (std::uint64_t(width) << 32 | std::uint64_t(height)));
    ImageBuffer img(width, height, 3);
    auto &px = img.pixels();
    for (std::size_t i = 0; i < px.size(); i += 8)
    {
        std::uint64_t word = rng();
        for (std::size_t k = 0; k < 8 && i + k < px.size(); ++k, word >>= 8)
            px[i + k] = std::uint8_t(word);
    }
    return img;
}

BenchRow time_mode(int width, int height, BenchMode mode, double coverage, const BenchConfig &config,
                   const std::function<void()> &body)
{
    for (int i = 0; i < config.warmup; ++i)
        body();
    std::vector<double> samples;
    samples.reserve(std::size_t(config.iterations));
    for (int i = 0; i < config.iterations; ++i)
    {
        const auto start = std::chrono::steady_clock::now();
        body();
        const auto stop = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    BenchRow row;
    row.width = width;
    row.height = height;
    row.mode = mode;
    row.coverage = coverage;
    row.median_ms = percentile(samples, 50);
    row.p10_ms = percentile(samples, 10);
    row.p90_ms = percentile(samples, 90);
    row.iterations = config.iterations;
    return row;
}

} // namespace

std::vector<BenchRow> run_benchmark(const BenchConfig &config)
{
    if (config.iterations < 1 || config.warmup < 0)
        throw Error(ErrorKind::Validation, "benchmark needs at least one iteration");
    if (!(config.coverage > 0.0 && config.coverage <= 1.0))
        throw Error(ErrorKind::Validation, "coverage must be in (0, 1]");

    SeededEntropy entropy(config.seed);
    const Salt salt = entropy.draw<16>();
    // the KDF is not what is being measured
    const KeyMaterial key = derive_key("benchmark", salt, KdfSpec{std::string(kdf_pbkdf2_sha256), {1000}});
    const Preferences prefs;

    std::vector<BenchRow> rows;
    for (const auto &[width, height] : config.sizes)
    {
        const ImageBuffer img = synthetic_image(width, height, config.seed);
        const RegionSet regions = center_box_detector(width, height, config.coverage).regions;
        const SecurityPolicy full{max_level, AlterationMode::Encrypt, config.sigma};
        const SecurityPolicy selective{min_level, AlterationMode::Encrypt, config.sigma};
        const SecurityPolicy blur{min_level, AlterationMode::Blur, config.sigma};

        const auto full_out = protect_with_key(img, {}, prefs, full, key, entropy);
        const auto sisa_out = protect_with_key(img, regions, prefs, selective, key, entropy);
        const double sisa_coverage = sisa_out.plan.achieved_fraction;

        for (BenchMode mode : config.modes)
        {
            switch (mode)
            {
            case BenchMode::FullEncrypt:
                rows.push_back(time_mode(width, height, mode, 1.0, config, [&] {
                    protect_with_key(img, {}, prefs, full, key, entropy);
                }));
                break;
            case BenchMode::SisaEncrypt:
                rows.push_back(time_mode(width, height, mode, sisa_coverage, config, [&] {
                    protect_with_key(img, regions, prefs, selective, key, entropy);
                }));
                break;
            case BenchMode::SisaBlur:
                rows.push_back(time_mode(width, height, mode, sisa_coverage, config, [&] {
                    protect_with_key(img, regions, prefs, blur, key, entropy);
                }));
                break;
            case BenchMode::FullDecrypt:
                rows.push_back(time_mode(width, height, mode, 1.0, config, [&] {
                    restore_with_key(full_out.image, full_out.manifest, key);
                }));
                break;
            case BenchMode::SisaDecrypt:
                rows.push_back(time_mode(width, height, mode, sisa_coverage, config, [&] {
                    restore_with_key(sisa_out.image, sisa_out.manifest, key);
                }));
                break;
            }
        }
    }
    return rows;
}

void write_bench_csv(std::ostream &out, const std::vector<BenchRow> &rows)
{
    out << "width,height,mode,coverage,median_ms,p10_ms,p90_ms,iterations\n";
    for (const auto &row : rows)
        out << row.width << ',' << row.height << ',' << to_string(row.mode) << ',' << row.coverage << ','
            << row.median_ms << ',' << row.p10_ms << ',' << row.p90_ms << ',' << row.iterations << '\n';
}

std::optional<double> bench_ratio(const std::vector<BenchRow> &rows, int width, int height, BenchMode numerator,
                                  BenchMode denominator)
{
    const auto find = [&](BenchMode mode) -> const BenchRow * {
        for (const auto &row : rows)
            if (row.width == width && row.height == height && row.mode == mode)
                return &row;
        return nullptr;
    };
    const BenchRow *num = find(numerator);
    const BenchRow *den = find(denominator);
    if (!num || !den || den->median_ms <= 0.0)
        return std::nullopt;
    return num->median_ms / den->median_ms;
}

} // namespace sisa
