#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace photogeo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Row-major H x W raster. Element (y, x) is row y, column x; pixel x runs along the
/// image width and is the first homogeneous pixel coordinate.
template <typename T>
class Grid
{
public:
    Grid() = default;
    Grid(int width, int height, const T& fill = T{})
        : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill)
    {
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int y, int x) { return data_[index(y, x)]; }
    const T& operator()(int y, int x) const { return data_[index(y, x)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(int y, int x) const noexcept { return static_cast<std::size_t>(y) * width_ + x; }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept
    {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid& a, const Grid& b)
    {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using ScalarMap = Grid<double>;
/// Per-pixel depth in camera units.
using DepthMap = Grid<double>;
/// Per-pixel unit normals, facing the camera with positive z.
using NormalMap = Grid<Vec3>;
/// Linear RGB image; values nominally in [0, 1] but not clamped until export.
using Image = Grid<Vec3>;
/// Binary mask; nonzero means "inside".
using Mask = Grid<std::uint8_t>;

/// Mirror across the vertical axis: x -> W-1-x.
template <typename T>
Grid<T> mirror_x(const Grid<T>& g)
{
    Grid<T> out(g.width(), g.height());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            out(y, x) = g(y, g.width() - 1 - x);
    return out;
}

} // namespace photogeo
