#include "mmdc/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

namespace mmdc {

BlockageField::BlockageField(std::vector<Rect> rects, double width, double height, double density_per_km2)
    : rects_(std::move(rects)), width_(width), height_(height), density_(density_per_km2)
{
}

BlockageField generate_field(double density_per_km2, double width, double height, std::mt19937_64& rng,
                             const BlockageOptions& options)
{
    const double expected = density_per_km2 * (width * height) * 1e-6;
    std::size_t count = 0;
    if (expected > 0.0) {
        if (options.fixed_count) {
            count = static_cast<std::size_t>(std::llround(expected));
        } else {
            std::poisson_distribution<long long> poisson(expected);
            count = static_cast<std::size_t>(poisson(rng));
        }
    }

    std::uniform_real_distribution<double> ux(0.0, width);
    std::uniform_real_distribution<double> uy(0.0, height);
    std::uniform_real_distribution<double> dim(options.min_dimension, options.max_dimension);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);

    std::vector<Rect> rects;
    rects.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rect r;
        r.center = {ux(rng), uy(rng)};
        r.hx = 0.5 * dim(rng);
        r.hy = 0.5 * dim(rng);
        if (options.random_orientation)
            r.orientation = angle(rng);
        rects.push_back(r);
    }
    return BlockageField(std::move(rects), width, height, density_per_km2);
}

bool segment_hits_rect(Point a, Point b, const Rect& rect)
{
    // Work in the rect's local frame, then clip the segment against the slab pair.
    const double c = std::cos(rect.orientation);
    const double s = std::sin(rect.orientation);
    auto to_local = [&](Point p) {
        const double dx = p.x - rect.center.x;
        const double dy = p.y - rect.center.y;
        return Point{c * dx + s * dy, -s * dx + c * dy};
    };
    const Point p = to_local(a);
    const Point q = to_local(b);
    const double d[2] = {q.x - p.x, q.y - p.y};
    const double o[2] = {p.x, p.y};
    const double h[2] = {rect.hx, rect.hy};

    double t0 = 0.0;
    double t1 = 1.0;
    for (int axis = 0; axis < 2; ++axis) {
        if (d[axis] == 0.0) {
            if (std::abs(o[axis]) >= h[axis])
                return false;
            continue;
        }
        double lo = (-h[axis] - o[axis]) / d[axis];
        double hi = (h[axis] - o[axis]) / d[axis];
        if (lo > hi)
            std::swap(lo, hi);
        t0 = std::max(t0, lo);
        t1 = std::min(t1, hi);
        if (t0 >= t1)
            return false;
    }
    return true;
}

bool is_los(Point tx, Point rx, const BlockageField& field)
{
    return std::none_of(field.rects().begin(), field.rects().end(),
                        [&](const Rect& r) { return segment_hits_rect(tx, rx, r); });
}

void write_field_csv(std::ostream& out, const BlockageField& field)
{
    out << "index,center_x,center_y,width,height,orientation\n";
    std::size_t i = 0;
    for (const auto& r : field.rects())
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", i++, r.center.x, r.center.y, 2.0 * r.hx,
                           2.0 * r.hy, r.orientation);
}

} // namespace mmdc
