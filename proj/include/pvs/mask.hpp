#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvs {

/// Row-major binary mask, one byte per pixel (1 = foreground).
struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int h, int w) : height(h), width(w), bits(static_cast<std::size_t>(h) * w, 0) {
        if (h < 1 || w < 1) throw std::invalid_argument("BinaryMask: height and width must be >= 1");
    }

    std::size_t size() const { return bits.size(); }
    bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
    std::uint8_t at(int r, int c) const { return bits[static_cast<std::size_t>(r) * width + c]; }
    void set(int r, int c, std::uint8_t v = 1) { bits[static_cast<std::size_t>(r) * width + c] = v; }

    long long area() const {
        long long a = 0;
        for (std::uint8_t b : bits) a += b;
        return a;
    }
    bool is_empty() const { return std::all_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b == 0; }); }

    bool operator==(const BinaryMask&) const = default;
};

/// Column-major run-length encoding. Runs alternate background/foreground,
/// starting with background; the first count may be 0 so masks can start
/// with foreground. Matches the COCO uncompressed RLE convention.
struct RleMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint32_t> counts;

    bool operator==(const RleMask&) const = default;
};

/// Axis-aligned box over half-open pixel ranges [r0,r1) x [c0,c1).
struct Box2D {
    int r0 = 0, c0 = 0, r1 = 0, c1 = 0;

    bool valid_in(int height, int width) const {
        return 0 <= r0 && r0 < r1 && r1 <= height && 0 <= c0 && c0 < c1 && c1 <= width;
    }
    bool operator==(const Box2D&) const = default;
};

inline void check_same_dims(const BinaryMask& a, const BinaryMask& b, const char* what) {
    if (a.height != b.height || a.width != b.width)
        throw std::invalid_argument(std::string(what) + ": mask dimensions differ (" +
                                    std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
                                    std::to_string(b.height) + "x" + std::to_string(b.width) + ")");
}

inline RleMask rle_encode(const BinaryMask& m) {
    RleMask r;
    r.height = m.height;
    r.width = m.width;
    std::uint32_t run = 0;
    std::uint8_t cur = 0;  // scan starts in background state
    for (int c = 0; c < m.width; ++c) {
        for (int row = 0; row < m.height; ++row) {
            std::uint8_t v = m.at(row, c);
            if (v != cur) {
                r.counts.push_back(run);
                run = 0;
                cur = v;
            }
            ++run;
        }
    }
    r.counts.push_back(run);
    return r;
}

inline long long rle_pixel_sum(const RleMask& r) {
    return std::accumulate(r.counts.begin(), r.counts.end(), 0LL);
}

/// Foreground area straight from the runs (odd-indexed counts).
inline long long rle_area(const RleMask& r) {
    long long a = 0;
    for (std::size_t i = 1; i < r.counts.size(); i += 2) a += r.counts[i];
    return a;
}

inline void rle_validate(const RleMask& r) {
    if (r.height < 1 || r.width < 1)
        throw std::invalid_argument("RleMask: height and width must be >= 1");
    long long total = static_cast<long long>(r.height) * r.width;
    if (rle_pixel_sum(r) != total)
        throw std::runtime_error("RleMask: run lengths sum to " + std::to_string(rle_pixel_sum(r)) +
                                 ", expected " + std::to_string(total));
    for (std::size_t i = 1; i < r.counts.size(); ++i)
        if (r.counts[i] == 0)
            throw std::runtime_error("RleMask: zero-length run at index " + std::to_string(i) +
                                     " (only the leading background run may be zero)");
}

inline BinaryMask rle_decode(const RleMask& r) {
    rle_validate(r);
    BinaryMask m(r.height, r.width);
    long long pos = 0;
    std::uint8_t v = 0;
    for (std::uint32_t c : r.counts) {
        for (std::uint32_t k = 0; k < c; ++k) {
            int col = static_cast<int>(pos / r.height);
            int row = static_cast<int>(pos % r.height);
            m.set(row, col, v);
            ++pos;
        }
        v = !v;
    }
    return m;
}

/// Region Jaccard. Both masks empty scores 1.0 (a correct "object absent"
/// prediction); exactly one empty scores 0.0.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
    check_same_dims(a, b, "iou");
    long long inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        inter += a.bits[i] & b.bits[i];
        uni += a.bits[i] | b.bits[i];
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// IoU computed by walking two run lists in lockstep, without decoding.
inline double rle_iou(const RleMask& a, const RleMask& b) {
    if (a.height != b.height || a.width != b.width)
        throw std::invalid_argument("rle_iou: mask dimensions differ");
    long long inter = 0, uni = 0;
    std::size_t ia = 0, ib = 0;
    long long ra = ia < a.counts.size() ? a.counts[ia] : 0;
    long long rb = ib < b.counts.size() ? b.counts[ib] : 0;
    bool va = false, vb = false;
    long long remaining = static_cast<long long>(a.height) * a.width;
    while (remaining > 0) {
        while (ra == 0 && ia + 1 < a.counts.size()) { ra = a.counts[++ia]; va = !va; }
        while (rb == 0 && ib + 1 < b.counts.size()) { rb = b.counts[++ib]; vb = !vb; }
        long long step = std::min(ra, rb);
        if (va && vb) inter += step;
        if (va || vb) uni += step;
        ra -= step;
        rb -= step;
        remaining -= step;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Tight bounding box of the foreground, half-open. Errors on empty masks.
inline Box2D tight_box(const BinaryMask& m) {
    int rmin = m.height, rmax = -1, cmin = m.width, cmax = -1;
    for (int r = 0; r < m.height; ++r)
        for (int c = 0; c < m.width; ++c)
            if (m.at(r, c)) {
                rmin = std::min(rmin, r);
                rmax = std::max(rmax, r);
                cmin = std::min(cmin, c);
                cmax = std::max(cmax, c);
            }
    if (rmax < 0) throw std::invalid_argument("tight_box: mask is empty");
    return Box2D{rmin, cmin, rmax + 1, cmax + 1};
}

inline BinaryMask mask_from_box(int height, int width, const Box2D& b) {
    if (!b.valid_in(height, width)) throw std::invalid_argument("mask_from_box: box out of range");
    BinaryMask m(height, width);
    for (int r = b.r0; r < b.r1; ++r)
        for (int c = b.c0; c < b.c1; ++c) m.set(r, c);
    return m;
}

/// 8-bit grayscale image, row-major.
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {
        if (h < 1 || w < 1) throw std::invalid_argument("GrayImage: height and width must be >= 1");
    }
    std::uint8_t at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
    void set(int r, int c, std::uint8_t v) { pixels[static_cast<std::size_t>(r) * width + c] = v; }
    bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }

    bool operator==(const GrayImage&) const = default;
};

}  // namespace pvs
