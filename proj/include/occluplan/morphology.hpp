#pragma once

// Binary morphology with a square structuring element and zero padding.
// Dilation/erosion are separable, so each pass is two 1D sweeps.

#include <algorithm>
#include <vector>

#include "occluplan/bitmask.hpp"

namespace occluplan {

namespace detail {

// 1D sliding window max (dilate) or min (erode) over rows then columns.
inline BitMask morph_pass(const BitMask& in, int kernel, bool dilate) {
    const int r = kernel / 2;
    const int w = in.width();
    const int h = in.height();
    BitMask horiz(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool acc = !dilate;
            for (int dx = -r; dx <= r; ++dx) {
                if (in.get_padded(x + dx, y) == dilate) {
                    acc = dilate;
                    break;
                }
            }
            horiz.set(x, y, acc);
        }
    }
    BitMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool acc = !dilate;
            for (int dy = -r; dy <= r; ++dy) {
                if (horiz.get_padded(x, y + dy) == dilate) {
                    acc = dilate;
                    break;
                }
            }
            out.set(x, y, acc);
        }
    }
    return out;
}

}  // namespace detail

inline BitMask dilate(const BitMask& mask, int kernel, int iterations = 1) {
    if (kernel < 3 || kernel % 2 == 0) throw InvalidArgumentError("dilate: kernel must be odd and >= 3");
    BitMask out = mask;
    for (int i = 0; i < iterations; ++i) out = detail::morph_pass(out, kernel, true);
    return out;
}

inline BitMask erode(const BitMask& mask, int kernel, int iterations = 1) {
    if (kernel < 3 || kernel % 2 == 0) throw InvalidArgumentError("erode: kernel must be odd and >= 3");
    BitMask out = mask;
    for (int i = 0; i < iterations; ++i) out = detail::morph_pass(out, kernel, false);
    return out;
}

/// Dilation followed by erosion; bridges gaps up to roughly kernel*iterations.
inline BitMask morph_close(const BitMask& mask, int kernel, int iterations = 1) {
    return erode(dilate(mask, kernel, iterations), kernel, iterations);
}

/// Erosion followed by dilation; removes specks smaller than the element.
inline BitMask morph_open(const BitMask& mask, int kernel, int iterations = 1) {
    return dilate(erode(mask, kernel, iterations), kernel, iterations);
}

}  // namespace occluplan
