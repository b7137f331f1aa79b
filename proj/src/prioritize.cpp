#include "sisa/prioritize.hpp"

#include <algorithm>
#include <cmath>

#include "sisa/error.hpp"

namespace sisa
{

void Preferences::validate() const
{
    if (!std::isfinite(w_center) || w_center < 0.0)
        throw Error(ErrorKind::Validation, "w_center must be finite and non-negative");
    if (!std::isfinite(w_area) || w_area < 0.0)
        throw Error(ErrorKind::Validation, "w_area must be finite and non-negative");
    for (const auto &[kind, boost] : kind_boost)
        if (!std::isfinite(boost))
            throw Error(ErrorKind::Validation, std::string("kind boost for ") + to_string(kind) + " is not finite");
    for (const auto &[identity, boost] : identity_boost)
        if (!std::isfinite(boost))
            throw Error(ErrorKind::Validation, "identity boost for '" + identity + "' is not finite");
}

double center_affinity_at(double x, double y, int width, int height)
{
    if (width < 1 || height < 1)
        throw Error(ErrorKind::Validation, "center affinity needs a non-empty image");
    const double half_diagonal = std::hypot(width / 2.0, height / 2.0);
    const double distance = std::hypot(x - width / 2.0, y - height / 2.0);
    return std::clamp(1.0 - distance / half_diagonal, 0.0, 1.0);
}

double center_affinity(const Region &region, int width, int height)
{
    if (width < 1 || height < 1)
        throw Error(ErrorKind::Validation, "center affinity needs a non-empty image");
    validate_box(region.bbox, width, height);
    return center_affinity_at(region.bbox.p + region.bbox.l / 2.0, region.bbox.q + region.bbox.b / 2.0, width,
                              height);
}

double priority_score(const Region &region, const Preferences &prefs, int width, int height)
{
    double score = prefs.w_center * center_affinity(region, width, height);
    if (auto it = prefs.kind_boost.find(region.kind); it != prefs.kind_boost.end())
        score += it->second;
    if (region.identity)
        if (auto it = prefs.identity_boost.find(*region.identity); it != prefs.identity_boost.end())
            score += it->second;
    if (prefs.w_area != 0.0)
        score += prefs.w_area * double(region.covered_pixels()) / (double(width) * double(height));
    return score;
}

PriorityAssignment prioritize(const RegionSet &regions, const Preferences &prefs, int width, int height)
{
    prefs.validate();
    validate_regions(regions, width, height);

    struct Scored
    {
        const Region *region;
        double score;
        std::size_t area;
    };
    std::vector<Scored> scored;
    scored.reserve(regions.size());
    for (const auto &region : regions)
        scored.push_back({&region, priority_score(region, prefs, width, height), region.covered_pixels()});

    std::sort(scored.begin(), scored.end(), [](const Scored &a, const Scored &b) {
        if (a.score != b.score)
            return a.score > b.score;
        if (a.area != b.area)
            return a.area > b.area;
        return a.region->id < b.region->id;
    });

    PriorityAssignment out;
    out.entries.reserve(scored.size());
    int rank = 1;
    for (const auto &s : scored)
        out.entries.push_back({s.region->id, s.region->class_label, s.score, rank++});
    return out;
}

} // namespace sisa
