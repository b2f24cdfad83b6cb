#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pvs/mask.hpp"

namespace pvs {

/// Per-pixel Euclidean distance to the nearest background pixel; zero
/// exactly on background. Out-of-image pixels count as background.
struct DistanceField {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
};

namespace detail {

inline constexpr double kDtInf = 1e20;

// 1D squared distance transform via the lower envelope of parabolas
// (Felzenszwalb & Huttenlocher). Exact for integer-valued f.
inline void dt1d(const double* f, int n, double* out, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kDtInf;
    z[1] = +kDtInf;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = +kDtInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double d = static_cast<double>(q) - v[k];
        out[q] = d * d + f[v[k]];
    }
}

}  // namespace detail

/// Exact squared Euclidean distance from every pixel to the nearest source
/// pixel (source[i] != 0). Pixels with no reachable source get a value
/// >= detail::kDtInf. Row-major output of size h*w.
inline std::vector<double> squared_distance_to_set(int h, int w, const std::vector<std::uint8_t>& source) {
    std::vector<double> d(static_cast<std::size_t>(h) * w);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = source[i] ? 0.0 : detail::kDtInf;

    int n = std::max(h, w);
    std::vector<double> f(n), out(n), z(n + 1);
    std::vector<int> v(n);

    // columns, then rows
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) f[r] = d[static_cast<std::size_t>(r) * w + c];
        detail::dt1d(f.data(), h, out.data(), v.data(), z.data());
        for (int r = 0; r < h; ++r) d[static_cast<std::size_t>(r) * w + c] = out[r];
    }
    for (int r = 0; r < h; ++r) {
        double* row = d.data() + static_cast<std::size_t>(r) * w;
        for (int c = 0; c < w; ++c) f[c] = row[c];
        detail::dt1d(f.data(), w, out.data(), v.data(), z.data());
        for (int c = 0; c < w; ++c) row[c] = out[c];
    }
    return d;
}

/// Squared variant of distance_transform below; kept separate so callers
/// that only compare distances can stay in exact integer arithmetic.
inline std::vector<double> squared_distance_transform(const BinaryMask& m) {
    // Pad with a one-pixel background ring so the image border acts as
    // background; the nearest out-of-image pixel is always axis-aligned,
    // hence inside the ring.
    int ph = m.height + 2, pw = m.width + 2;
    std::vector<std::uint8_t> source(static_cast<std::size_t>(ph) * pw, 1);
    for (int r = 0; r < m.height; ++r)
        for (int c = 0; c < m.width; ++c)
            source[static_cast<std::size_t>(r + 1) * pw + (c + 1)] = m.at(r, c) ? 0 : 1;
    std::vector<double> padded = squared_distance_to_set(ph, pw, source);
    std::vector<double> d(static_cast<std::size_t>(m.height) * m.width);
    for (int r = 0; r < m.height; ++r)
        for (int c = 0; c < m.width; ++c)
            d[static_cast<std::size_t>(r) * m.width + c] = padded[static_cast<std::size_t>(r + 1) * pw + (c + 1)];
    return d;
}

inline DistanceField distance_transform(const BinaryMask& m) {
    DistanceField field;
    field.height = m.height;
    field.width = m.width;
    field.values = squared_distance_transform(m);
    for (double& v : field.values) v = std::sqrt(v);
    return field;
}

}  // namespace pvs
