#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sisa
{

enum class BenchMode
{
    FullEncrypt,
    SisaEncrypt,
    SisaBlur,
    FullDecrypt,
    SisaDecrypt,
};

const char *to_string(BenchMode mode);

struct BenchRow
{
    int width = 0;
    int height = 0;
    BenchMode mode = BenchMode::FullEncrypt;
    double coverage = 0.0;
    double median_ms = 0.0;
    double p10_ms = 0.0;
    double p90_ms = 0.0;
    int iterations = 0;
};

struct BenchConfig
{
    std::vector<std::pair<int, int>> sizes{{640, 480}, {1280, 720}, {1920, 1080}};
    double coverage = 0.30;
    int iterations = 20;
    int warmup = 3;
    double sigma = 8.0;
    std::uint64_t seed = 1;
    std::vector<BenchMode> modes{BenchMode::FullEncrypt, BenchMode::SisaEncrypt, BenchMode::SisaBlur,
                                 BenchMode::FullDecrypt, BenchMode::SisaDecrypt};
};

/// "640x480,1280x720". Throws ErrorKind::Validation on anything else.
std::vector<std::pair<int, int>> parse_sizes(std::string_view spec);

/// Linear-interpolated percentile (0..100) of the samples.
double percentile(std::vector<double> samples, double pct);

/**
 * Times each mode per size on a seeded random image, single-threaded,
 * discarding `warmup` runs. Key derivation happens once outside the timed
 * region. The selective modes alter one centered box of `coverage` area.
 */
std::vector<BenchRow> run_benchmark(const BenchConfig &config);

void write_bench_csv(std::ostream &out, const std::vector<BenchRow> &rows);

/// median(numerator) / median(denominator) for one size, if both rows exist.
std::optional<double> bench_ratio(const std::vector<BenchRow> &rows, int width, int height, BenchMode numerator,
                                  BenchMode denominator);

} // namespace sisa
