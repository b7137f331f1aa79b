// sisa: selective image security command line.
//
//   sisa protect --input IN --stub-detector center-box --level 1 --output OUT.png
//   sisa restore --input OUT.png --output ORIG.png
//   sisa inspect --input OUT.png
//   sisa bench --sizes 1280x720,1920x1080 --iterations 20 --out bench.csv
//   sisa stub-detect --input IN --detector grid:3 --out regions.json
//
// The passphrase comes from SISA_PASSPHRASE or, on a terminal, a prompt.
// Exit codes: 0 ok, 2 I/O, 3 validation, 4 crypto.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <termios.h>
#include <unistd.h>

#include "CLI11.hpp"

#include "sisa/alter.hpp"
#include "sisa/bench.hpp"
#include "sisa/error.hpp"
#include "sisa/manifest.hpp"
#include "sisa/regions_doc.hpp"

namespace fs = std::filesystem;

namespace
{

constexpr int exit_io = 2;
constexpr int exit_validation = 3;
constexpr int exit_crypto = 4;

int exit_code(sisa::ErrorKind kind)
{
    using sisa::ErrorKind;
    switch (kind)
    {
    case ErrorKind::Io:
    case ErrorKind::UnsupportedFormat: return exit_io;
    case ErrorKind::Crypto:
    case ErrorKind::Checksum: return exit_crypto;
    default: return exit_validation;
    }
}

std::string read_passphrase()
{
    if (const char *env = std::getenv("SISA_PASSPHRASE"))
        return env;
    if (!isatty(STDIN_FILENO))
        return {};

    std::cerr << "Passphrase: " << std::flush;
    termios saved{};
    const bool have_tty = tcgetattr(STDIN_FILENO, &saved) == 0;
    if (have_tty)
    {
        termios quiet = saved;
        quiet.c_lflag &= ~tcflag_t(ECHO);
        tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
    }
    std::string line;
    std::getline(std::cin, line);
    if (have_tty)
        tcsetattr(STDIN_FILENO, TCSANOW, &saved);
    std::cerr << '\n';
    return line;
}

std::pair<std::string, double> split_boost(const std::string &item)
{
    const auto eq = item.rfind('=');
    if (eq == std::string::npos || eq == 0)
        throw sisa::Error(sisa::ErrorKind::Validation, "boost must look like NAME=VALUE, got '" + item + "'");
    try
    {
        std::size_t used = 0;
        const std::string number = item.substr(eq + 1);
        const double value = std::stod(number, &used);
        if (used != number.size())
            throw std::invalid_argument("trailing");
        return {item.substr(0, eq), value};
    }
    catch (const std::exception &)
    {
        throw sisa::Error(sisa::ErrorKind::Validation, "boost value is not a number in '" + item + "'");
    }
}

/// Explicit path, then the embedded chunk, then the sidecar next to the image.
sisa::ReconstructionManifest locate_manifest(const fs::path &image, const std::string &explicit_path,
                                             std::string *source = nullptr)
{
    if (!explicit_path.empty())
    {
        if (source)
            *source = explicit_path;
        return sisa::read_manifest_file(explicit_path);
    }
    try
    {
        auto manifest = sisa::extract_manifest(image);
        if (source)
            *source = "embedded chunk";
        return manifest;
    }
    catch (const sisa::Error &e)
    {
        if (e.kind() != sisa::ErrorKind::MissingManifest && e.kind() != sisa::ErrorKind::UnsupportedFormat)
            throw;
    }
    const fs::path sidecar = sisa::sidecar_path(image);
    if (fs::exists(sidecar))
    {
        if (source)
            *source = sidecar.string();
        return sisa::read_manifest_file(sidecar);
    }
    throw sisa::Error(sisa::ErrorKind::MissingManifest,
                      "no manifest for " + image.string() + " (no embedded chunk, no " + sidecar.string() + ")");
}

struct ProtectArgs
{
    std::string input;
    std::string regions;
    std::string stub_detector;
    int level = 1;
    std::string mode = "auto";
    double sigma = 8.0;
    std::string output;
    bool no_sidecar = false;
    bool embed = false;
    double w_center = 1.0;
    double w_area = 0.0;
    std::vector<std::string> kind_boosts;
    std::vector<std::string> identity_boosts;
    std::string kdf = std::string(sisa::kdf_pbkdf2_sha256);
    std::vector<std::uint64_t> kdf_params;
};

int run_protect(const ProtectArgs &args)
{
    if (args.regions.empty() == args.stub_detector.empty())
        throw sisa::Error(sisa::ErrorKind::Validation, "give exactly one of --regions or --stub-detector");
    if (args.no_sidecar && !args.embed)
        throw sisa::Error(sisa::ErrorKind::Validation, "--no-sidecar without --embed would discard the manifest");

    sisa::SecurityPolicy policy{args.level, sisa::alteration_mode_from_string(args.mode), args.sigma};
    policy.validate();

    sisa::Preferences prefs;
    prefs.w_center = args.w_center;
    prefs.w_area = args.w_area;
    for (const auto &item : args.kind_boosts)
    {
        const auto [name, value] = split_boost(item);
        prefs.kind_boost[sisa::region_kind_from_string(name)] = value;
    }
    for (const auto &item : args.identity_boosts)
    {
        const auto [name, value] = split_boost(item);
        prefs.identity_boost[name] = value;
    }
    prefs.validate();

    sisa::ProtectOptions options;
    options.kdf = sisa::default_kdf(args.kdf);
    if (!args.kdf_params.empty())
        options.kdf.params = args.kdf_params;

    const sisa::ImageBuffer img = sisa::load_image(args.input);
    options.original_format = sisa::sniff_format(args.input);

    const sisa::RegionsDocument doc = args.regions.empty()
                                          ? sisa::run_stub_detector(args.stub_detector, img.width(), img.height())
                                          : sisa::load_regions(args.regions);
    if (doc.width != img.width() || doc.height != img.height())
        throw sisa::Error(sisa::ErrorKind::Validation, "regions document describes a " + std::to_string(doc.width) +
                                                           "x" + std::to_string(doc.height) + " image, input is " +
                                                           std::to_string(img.width()) + "x" +
                                                           std::to_string(img.height()));

    const std::string passphrase = read_passphrase();
    sisa::SystemEntropy entropy;
    const auto result = sisa::protect(img, doc.regions, prefs, policy, passphrase, entropy, options);

    const fs::path output = args.output;
    sisa::save_lossless(result.image, output);
    if (args.embed)
        sisa::embed_manifest(output, result.manifest);
    if (!args.no_sidecar)
        sisa::write_manifest_file(sisa::sidecar_path(output), result.manifest);

    const auto &m = result.manifest;
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "level " << policy.level << ", mode " << sisa::to_string(sisa::resolve_mode(policy)) << ", target "
              << m.target_fraction << ", achieved " << m.achieved_fraction
              << (m.shortfall ? " (shortfall: regions cannot reach the target)" : "")
              << (m.full_image_fallback ? " (full image)" : "") << '\n';
    for (const auto &record : m.records)
    {
        std::cout << "  " << (record.region_id ? "region " + std::to_string(*record.region_id) : "full image") << ' '
                  << (record.kind ? sisa::to_string(*record.kind) : "image") << " '" << record.class_label << "' bbox ["
                  << record.bbox.p << ',' << record.bbox.q << ',' << record.bbox.l << ',' << record.bbox.b << "] "
                  << sisa::to_string(record.mode) << ' ' << record.byte_length << " bytes\n";
    }
    std::cout << "wrote " << output.string();
    if (!args.no_sidecar)
        std::cout << " and " << sisa::sidecar_path(output).string();
    std::cout << '\n';
    return 0;
}

int run_restore(const std::string &input, const std::string &manifest_path, const std::string &output)
{
    const sisa::ImageBuffer img = sisa::load_image(input);
    const auto manifest = locate_manifest(input, manifest_path);
    const std::string passphrase = read_passphrase();
    // restore throws before anything is written if any region fails its checksum
    const sisa::ImageBuffer restored = sisa::restore(img, manifest, passphrase);
    sisa::save_lossless(restored, output);
    std::cout << "restored " << manifest.records.size() << " region(s) to " << output << '\n';
    return 0;
}

int run_inspect(const std::string &input, const std::string &manifest_path)
{
    std::string source;
    const auto m = locate_manifest(input, manifest_path, &source);
    std::cout << "manifest: " << source << '\n'
              << "version: " << m.version << '\n'
              << "image: " << m.width << 'x' << m.height << 'x' << m.channels << " (original " << m.original_format
              << ")\n"
              << "level: " << m.policy.level << '\n'
              << "mode: " << sisa::to_string(m.policy.mode) << '\n'
              << "sigma: " << m.policy.sigma << '\n'
              << "kdf: " << m.kdf.id << '\n'
              << "target_fraction: " << m.target_fraction << '\n'
              << "achieved_fraction: " << m.achieved_fraction << '\n'
              << "shortfall: " << (m.shortfall ? "yes" : "no") << '\n'
              << "full_image_fallback: " << (m.full_image_fallback ? "yes" : "no") << '\n'
              << "regions: " << m.records.size() << '\n';
    for (const auto &record : m.records)
    {
        std::cout << "  - id " << (record.region_id ? std::to_string(*record.region_id) : std::string("-"))
                  << " kind " << (record.kind ? sisa::to_string(*record.kind) : "image") << " label '"
                  << record.class_label << "' bbox [" << record.bbox.p << ',' << record.bbox.q << ',' << record.bbox.l
                  << ',' << record.bbox.b << "] mode " << sisa::to_string(record.mode) << " pixels "
                  << sisa::popcount(record.mask) << '\n';
    }
    return 0;
}

struct BenchArgs
{
    std::string sizes = "640x480,1280x720,1920x1080";
    double coverage = 0.30;
    int iterations = 20;
    int warmup = 3;
    std::uint64_t seed = 1;
    double sigma = 8.0;
    std::string out;
};

int run_bench(const BenchArgs &args)
{
    sisa::BenchConfig config;
    config.sizes = sisa::parse_sizes(args.sizes);
    config.coverage = args.coverage;
    config.iterations = args.iterations;
    config.warmup = args.warmup;
    config.seed = args.seed;
    config.sigma = args.sigma;
    const auto rows = sisa::run_benchmark(config);

    if (args.out.empty())
    {
        sisa::write_bench_csv(std::cout, rows);
    }
    else
    {
        std::ofstream csv(args.out);
        if (!csv)
            throw sisa::Error(sisa::ErrorKind::Io, "cannot write " + args.out);
        sisa::write_bench_csv(csv, rows);
        if (!csv)
            throw sisa::Error(sisa::ErrorKind::Io, "write failed for " + args.out);
    }

    auto &log = args.out.empty() ? std::cerr : std::cout;
    log << std::fixed << std::setprecision(3);
    for (const auto &[w, h] : config.sizes)
    {
        const auto enc = sisa::bench_ratio(rows, w, h, sisa::BenchMode::SisaEncrypt, sisa::BenchMode::FullEncrypt);
        const auto dec = sisa::bench_ratio(rows, w, h, sisa::BenchMode::SisaDecrypt, sisa::BenchMode::FullDecrypt);
        log << w << 'x' << h << ": sisa_encrypt/full_encrypt = " << enc.value_or(0.0)
            << ", sisa_decrypt/full_decrypt = " << dec.value_or(0.0) << '\n';
    }
    return 0;
}

int run_stub_detect(const std::string &input, int width, int height, const std::string &detector,
                    const std::string &out)
{
    if (!input.empty())
    {
        const auto img = sisa::load_image(input);
        width = img.width();
        height = img.height();
    }
    if (width < 1 || height < 1)
        throw sisa::Error(sisa::ErrorKind::Validation, "give --input or both --width and --height");
    const std::string doc = sisa::encode_regions(sisa::run_stub_detector(detector, width, height));
    if (out.empty())
    {
        std::cout << doc << '\n';
        return 0;
    }
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file || !(file << doc << '\n'))
        throw sisa::Error(sisa::ErrorKind::Io, "cannot write " + out);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Selective image security: blur or encrypt prioritised regions, restore them exactly"};
    app.require_subcommand(1);

    ProtectArgs protect;
    auto *protect_cmd = app.add_subcommand("protect", "Alter the prioritised regions of an image");
    protect_cmd->add_option("--input", protect.input, "Image to protect (PNG, JPEG, BMP)")->required();
    protect_cmd->add_option("--regions", protect.regions, "Regions document from a detector");
    protect_cmd->add_option("--stub-detector", protect.stub_detector, "center-box[:FRACTION] or grid[:K]");
    protect_cmd->add_option("--level", protect.level, "Security level 1..5");
    protect_cmd->add_option("--mode", protect.mode, "auto, blur or encrypt");
    protect_cmd->add_option("--sigma", protect.sigma, "Blur standard deviation in pixels");
    protect_cmd->add_option("--output", protect.output, "Protected PNG to write")->required();
    protect_cmd->add_flag("--no-sidecar", protect.no_sidecar, "Do not write OUTPUT.sisa.json");
    protect_cmd->add_flag("--embed", protect.embed, "Embed the manifest in a PNG text chunk");
    protect_cmd->add_option("--w-center", protect.w_center, "Weight of center affinity");
    protect_cmd->add_option("--w-area", protect.w_area, "Weight of normalised region area");
    protect_cmd->add_option("--kind-boost", protect.kind_boosts, "KIND=VALUE additive boost");
    protect_cmd->add_option("--identity-boost", protect.identity_boosts, "NAME=VALUE additive boost");
    protect_cmd->add_option("--kdf", protect.kdf, "pbkdf2-hmac-sha256 or scrypt");
    protect_cmd->add_option("--kdf-param", protect.kdf_params, "Override KDF cost parameters");

    std::string restore_input, restore_manifest, restore_output;
    auto *restore_cmd = app.add_subcommand("restore", "Undo protection using the manifest and passphrase");
    restore_cmd->add_option("--input", restore_input, "Protected PNG")->required();
    restore_cmd->add_option("--manifest", restore_manifest, "Manifest file (default: embedded, then sidecar)");
    restore_cmd->add_option("--output", restore_output, "Restored PNG to write")->required();

    std::string inspect_input, inspect_manifest;
    auto *inspect_cmd = app.add_subcommand("inspect", "Print a protected image's manifest summary");
    inspect_cmd->add_option("--input", inspect_input, "Protected PNG")->required();
    inspect_cmd->add_option("--manifest", inspect_manifest, "Manifest file (default: embedded, then sidecar)");

    BenchArgs bench;
    auto *bench_cmd = app.add_subcommand("bench", "Time full versus selective alteration");
    bench_cmd->add_option("--sizes", bench.sizes, "Comma separated WxH list");
    bench_cmd->add_option("--coverage", bench.coverage, "Selective coverage fraction");
    bench_cmd->add_option("--iterations", bench.iterations, "Timed iterations per mode");
    bench_cmd->add_option("--warmup", bench.warmup, "Untimed warmup iterations");
    bench_cmd->add_option("--seed", bench.seed, "Synthetic image seed");
    bench_cmd->add_option("--sigma", bench.sigma, "Blur sigma for sisa_blur");
    bench_cmd->add_option("--out", bench.out, "CSV path (default stdout)");

    std::string stub_input, stub_detector = "center-box", stub_out;
    int stub_width = 0, stub_height = 0;
    auto *stub_cmd = app.add_subcommand("stub-detect", "Emit a regions document from a built-in stub detector");
    stub_cmd->add_option("--input", stub_input, "Image whose size to use");
    stub_cmd->add_option("--width", stub_width);
    stub_cmd->add_option("--height", stub_height);
    stub_cmd->add_option("--detector", stub_detector, "center-box[:FRACTION] or grid[:K]");
    stub_cmd->add_option("--out", stub_out, "Output file (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    try
    {
        if (*protect_cmd)
            return run_protect(protect);
        if (*restore_cmd)
            return run_restore(restore_input, restore_manifest, restore_output);
        if (*inspect_cmd)
            return run_inspect(inspect_input, inspect_manifest);
        if (*bench_cmd)
            return run_bench(bench);
        if (*stub_cmd)
            return run_stub_detect(stub_input, stub_width, stub_height, stub_detector, stub_out);
    }
    catch (const sisa::Error &e)
    {
        std::cerr << "sisa: " << e.what() << '\n';
        return exit_code(e.kind());
    }
    catch (const std::exception &e)
    {
        std::cerr << "sisa: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
