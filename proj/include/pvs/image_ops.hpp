#pragma once

#include <cstdint>
#include <vector>

#include "pvs/distance.hpp"
#include "pvs/mask.hpp"

namespace pvs {

enum class Connectivity { four = 4, eight = 8 };

/// Labels are contiguous from 1, assigned in row-major discovery order of
/// each component's first pixel; 0 marks background. areas[k] is the pixel
/// count of label k+1.
struct ComponentLabels {
    int height = 0;
    int width = 0;
    std::vector<std::int32_t> labels;
    std::vector<long long> areas;

    int count() const { return static_cast<int>(areas.size()); }
    std::int32_t at(int r, int c) const { return labels[static_cast<std::size_t>(r) * width + c]; }

    BinaryMask component_mask(std::int32_t label) const {
        BinaryMask m(height, width);
        for (std::size_t i = 0; i < labels.size(); ++i) m.bits[i] = labels[i] == label;
        return m;
    }
};

inline ComponentLabels connected_components(const BinaryMask& m, Connectivity conn) {
    ComponentLabels out;
    out.height = m.height;
    out.width = m.width;
    out.labels.assign(m.size(), 0);

    static constexpr int dr8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dc8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dr4[] = {-1, 0, 0, 1};
    static constexpr int dc4[] = {0, -1, 1, 0};
    const int* dr = conn == Connectivity::four ? dr4 : dr8;
    const int* dc = conn == Connectivity::four ? dc4 : dc8;
    const int nn = conn == Connectivity::four ? 4 : 8;

    std::vector<std::size_t> stack;
    std::int32_t next = 0;
    for (int r = 0; r < m.height; ++r) {
        for (int c = 0; c < m.width; ++c) {
            std::size_t idx = static_cast<std::size_t>(r) * m.width + c;
            if (!m.bits[idx] || out.labels[idx]) continue;
            ++next;
            long long area = 0;
            out.labels[idx] = next;
            stack.assign(1, idx);
            while (!stack.empty()) {
                std::size_t cur = stack.back();
                stack.pop_back();
                ++area;
                int cr = static_cast<int>(cur / m.width), cc = static_cast<int>(cur % m.width);
                for (int k = 0; k < nn; ++k) {
                    int nr = cr + dr[k], ncl = cc + dc[k];
                    if (!m.in_bounds(nr, ncl)) continue;
                    std::size_t ni = static_cast<std::size_t>(nr) * m.width + ncl;
                    if (m.bits[ni] && !out.labels[ni]) {
                        out.labels[ni] = next;
                        stack.push_back(ni);
                    }
                }
            }
            out.areas.push_back(area);
        }
    }
    return out;
}

/// Clears every 8-connected foreground component with area < min_area.
inline BinaryMask remove_small_components(const BinaryMask& m, long long min_area) {
    if (min_area <= 0) return m;
    ComponentLabels cl = connected_components(m, Connectivity::eight);
    BinaryMask out = m;
    for (std::size_t i = 0; i < out.bits.size(); ++i)
        if (out.bits[i] && cl.areas[cl.labels[i] - 1] < min_area) out.bits[i] = 0;
    return out;
}

/// Fills background components (8-connectivity) that do not touch the image
/// border and have area < max_area. Border-touching background is never a
/// hole.
inline BinaryMask fill_small_holes(const BinaryMask& m, long long max_area) {
    if (max_area <= 0) return m;
    BinaryMask inverted(m.height, m.width);
    for (std::size_t i = 0; i < m.bits.size(); ++i) inverted.bits[i] = !m.bits[i];
    ComponentLabels cl = connected_components(inverted, Connectivity::eight);

    std::vector<std::uint8_t> touches_border(cl.areas.size() + 1, 0);
    for (int c = 0; c < m.width; ++c) {
        if (std::int32_t l = cl.at(0, c)) touches_border[l] = 1;
        if (std::int32_t l = cl.at(m.height - 1, c)) touches_border[l] = 1;
    }
    for (int r = 0; r < m.height; ++r) {
        if (std::int32_t l = cl.at(r, 0)) touches_border[l] = 1;
        if (std::int32_t l = cl.at(r, m.width - 1)) touches_border[l] = 1;
    }

    BinaryMask out = m;
    for (std::size_t i = 0; i < out.bits.size(); ++i) {
        std::int32_t l = cl.labels[i];
        if (l && !touches_border[l] && cl.areas[l - 1] < max_area) out.bits[i] = 1;
    }
    return out;
}

/// Foreground pixels with at least one 4-neighbor that is background or
/// outside the image.
inline BinaryMask boundary(const BinaryMask& m) {
    BinaryMask out(m.height, m.width);
    for (int r = 0; r < m.height; ++r) {
        for (int c = 0; c < m.width; ++c) {
            if (!m.at(r, c)) continue;
            bool edge = r == 0 || r == m.height - 1 || c == 0 || c == m.width - 1;
            if (!edge)
                edge = !m.at(r - 1, c) || !m.at(r + 1, c) || !m.at(r, c - 1) || !m.at(r, c + 1);
            if (edge) out.set(r, c);
        }
    }
    return out;
}

/// Euclidean-disc dilation: every pixel within distance `radius` of the
/// foreground becomes foreground. radius <= 0 returns the input.
inline BinaryMask dilate(const BinaryMask& m, int radius) {
    if (radius <= 0 || m.is_empty()) return m;
    std::vector<double> d2 = squared_distance_to_set(m.height, m.width, m.bits);
    double r2 = static_cast<double>(radius) * radius;
    BinaryMask out(m.height, m.width);
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = d2[i] <= r2;
    return out;
}

/// Euclidean-disc erosion; the image border erodes like background.
inline BinaryMask erode(const BinaryMask& m, int radius) {
    if (radius <= 0) return m;
    std::vector<double> d2 = squared_distance_transform(m);
    double r2 = static_cast<double>(radius) * radius;
    BinaryMask out(m.height, m.width);
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = d2[i] > r2;
    return out;
}

/// Integer shift; pixels moved outside the frame are lost, vacated pixels
/// become background.
inline BinaryMask translate(const BinaryMask& m, int dr, int dc) {
    BinaryMask out(m.height, m.width);
    for (int r = 0; r < m.height; ++r)
        for (int c = 0; c < m.width; ++c)
            if (m.at(r, c) && out.in_bounds(r + dr, c + dc)) out.set(r + dr, c + dc);
    return out;
}

inline BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b) {
    check_same_dims(a, b, "mask_and_not");
    BinaryMask out(a.height, a.width);
    for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = a.bits[i] & !b.bits[i];
    return out;
}

inline BinaryMask mask_xor(const BinaryMask& a, const BinaryMask& b) {
    check_same_dims(a, b, "mask_xor");
    BinaryMask out(a.height, a.width);
    for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = a.bits[i] ^ b.bits[i];
    return out;
}

}  // namespace pvs
