#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "angiokit/error.hpp"

namespace angiokit {

struct Point {
    int x = 0;
    int y = 0;

    friend auto operator<=>(const Point&, const Point&) = default;
};

// Row-major index order, used wherever the library needs a deterministic
// "smallest pixel" tie-break.
inline bool row_major_less(Point a, Point b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
}

inline void validate_pixel_size(double mm) {
    if (!(mm > 0.0 && mm < 10.0))
        fail(ErrorCode::InvalidInput, "pixel size must lie in (0, 10) mm, got " + std::to_string(mm));
}

/// 2-D row-major raster with an optional physical pixel size.
///
/// The tag parameter keeps grayscale images, probability maps and binary
/// masks apart at the type level even where they share a value type.
template <typename T, typename Tag>
class Raster {
public:
    using value_type = T;

    Raster() = default;

    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height) {
        require(width >= 0 && height >= 0, ErrorCode::InvalidInput, "raster dimensions must be non-negative");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        require(width >= 0 && height >= 0, ErrorCode::InvalidInput, "raster dimensions must be non-negative");
        require(data_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                ErrorCode::InvalidInput, "raster data length must equal width * height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    bool contains(Point p) const noexcept { return contains(p.x, p.y); }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }
    std::size_t index(Point p) const noexcept { return index(p.x, p.y); }
    Point point(std::size_t i) const noexcept {
        return {static_cast<int>(i % static_cast<std::size_t>(width_)),
                static_cast<int>(i / static_cast<std::size_t>(width_))};
    }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
    T& operator[](Point p) noexcept { return data_[index(p)]; }
    const T& operator[](Point p) const noexcept { return data_[index(p)]; }
    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    // Edge-value replication outside the raster.
    const T& clamped(int x, int y) const noexcept {
        return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
    }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    std::optional<double> pixel_size_mm() const noexcept { return pixel_size_mm_; }
    void set_pixel_size_mm(std::optional<double> mm) {
        if (mm) validate_pixel_size(*mm);
        pixel_size_mm_ = mm;
    }

    bool same_shape(int w, int h) const noexcept { return width_ == w && height_ == h; }
    template <typename U, typename OtherTag>
    bool same_shape(const Raster<U, OtherTag>& other) const noexcept {
        return same_shape(other.width(), other.height());
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
    std::optional<double> pixel_size_mm_;
};

struct GrayTag {};
struct ProbabilityTag {};
struct MaskTag {};

using GrayImage = Raster<double, GrayTag>;
using ProbabilityMap = Raster<double, ProbabilityTag>;
using BinaryMask = Raster<std::uint8_t, MaskTag>;

// Invariant checks for data arriving from outside the library.
void validate(const GrayImage& img);
void validate(const ProbabilityMap& prob);
void validate(const BinaryMask& mask);

template <typename To, typename From>
To retag(const From& src) {
    To out(src.width(), src.height(),
           std::vector<typename To::value_type>(src.data().begin(), src.data().end()));
    out.set_pixel_size_mm(src.pixel_size_mm());
    return out;
}

inline std::size_t count_foreground(const BinaryMask& mask) {
    return static_cast<std::size_t>(std::count(mask.data().begin(), mask.data().end(), std::uint8_t{1}));
}

}  // namespace angiokit
