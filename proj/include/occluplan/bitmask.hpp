#pragma once

// Row-major binary raster. Holds road masks, visibility masks and skeletons.

#include <cstdint>
#include <vector>

#include "occluplan/core.hpp"

namespace occluplan {

class BitMask {
public:
    BitMask() = default;
    BitMask(int width, int height, bool fill = false)
        : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {
        if (width < 0 || height < 0) throw InvalidArgumentError("BitMask: negative dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return bits_.size(); }

    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool in_bounds(const Cell& c) const { return in_bounds(c.x, c.y); }

    bool get(int x, int y) const { return bits_[idx(x, y)] != 0; }
    bool get(const Cell& c) const { return get(c.x, c.y); }
    /// Out-of-bounds coordinates read as 0 (zero padding).
    bool get_padded(int x, int y) const { return in_bounds(x, y) && get(x, y); }

    void set(int x, int y, bool v = true) { bits_[idx(x, y)] = v ? 1 : 0; }
    void set(const Cell& c, bool v = true) { set(c.x, c.y, v); }

    std::size_t popcount() const {
        std::size_t n = 0;
        for (auto b : bits_) n += b;
        return n;
    }

    bool any() const {
        for (auto b : bits_) {
            if (b) return true;
        }
        return false;
    }

    /// True when every set bit of this mask is also set in `other`.
    bool subset_of(const BitMask& other) const {
        if (other.width_ != width_ || other.height_ != height_) return false;
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i] && !other.bits_[i]) return false;
        }
        return true;
    }

    friend bool operator==(const BitMask& a, const BitMask& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.bits_ == b.bits_;
    }

    const std::vector<std::uint8_t>& raw() const { return bits_; }
    std::vector<std::uint8_t>& raw() { return bits_; }

private:
    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

}  // namespace occluplan
