#pragma once

#include <cmath>
#include <iosfwd>
#include <random>
#include <vector>

namespace mmdc {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Oriented rectangle. orientation rotates the local frame counter-clockwise.
struct Rect {
    Point center;
    double hx = 0.5;
    double hy = 0.5;
    double orientation = 0.0;
};

struct BlockageOptions {
    double min_dimension = 1.0;
    double max_dimension = 2.0;
    bool random_orientation = false;
    // Place exactly round(density * area) rects instead of a Poisson count.
    bool fixed_count = false;
};

/// Static set of rectangular obstacles over [0, width] x [0, height].
class BlockageField {
  public:
    BlockageField() = default;
    BlockageField(std::vector<Rect> rects, double width, double height, double density_per_km2);

    [[nodiscard]] const std::vector<Rect>& rects() const { return rects_; }
    [[nodiscard]] double width() const { return width_; }
    [[nodiscard]] double height() const { return height_; }
    [[nodiscard]] double density() const { return density_; }
    [[nodiscard]] bool empty() const { return rects_.empty(); }

  private:
    std::vector<Rect> rects_;
    double width_ = 0.0;
    double height_ = 0.0;
    double density_ = 0.0;
};

BlockageField generate_field(double density_per_km2, double width, double height, std::mt19937_64& rng,
                             const BlockageOptions& options = {});

/// True iff the open segment a-b touches the interior of rect.
bool segment_hits_rect(Point a, Point b, const Rect& rect);

/// True iff the segment tx-rx crosses no obstacle.
bool is_los(Point tx, Point rx, const BlockageField& field);

void write_field_csv(std::ostream& out, const BlockageField& field);

} // namespace mmdc
