#include "vtsize/morphology.hpp"

#include <algorithm>
#include <cstdlib>

namespace vtsize {

std::vector<std::pair<int, int>> StructuringElement::offsets() const {
    std::vector<std::pair<int, int>> out;
    const int r = radius;
    switch (shape) {
        case SEShape::Square:
            out.reserve(static_cast<size_t>(2 * r + 1) * (2 * r + 1));
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) out.emplace_back(dx, dy);
            break;
        case SEShape::Cross:
            out.emplace_back(0, 0);
            for (int d = 1; d <= r; ++d) {
                out.emplace_back(d, 0);
                out.emplace_back(-d, 0);
                out.emplace_back(0, d);
                out.emplace_back(0, -d);
            }
            break;
        case SEShape::Disk:
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    if (dx * dx + dy * dy <= r * r) out.emplace_back(dx, dy);
            break;
    }
    return out;
}

namespace {

// Horizontal window-OR of half-width R, O(W) per row via a range diff array.
void dilate_rows(const BinaryMask& in, BinaryMask& out, int R) {
    const int W = in.width, H = in.height;
    std::vector<int> diff(static_cast<size_t>(W) + 1);
    for (int y = 0; y < H; ++y) {
        std::fill(diff.begin(), diff.end(), 0);
        const std::uint8_t* row = &in.data[static_cast<size_t>(y) * W];
        for (int x = 0; x < W; ++x) {
            if (!row[x]) continue;
            diff[std::max(0, x - R)] += 1;
            diff[std::min(W, x + R + 1)] -= 1;
        }
        int acc = 0;
        std::uint8_t* orow = &out.data[static_cast<size_t>(y) * W];
        for (int x = 0; x < W; ++x) {
            acc += diff[x];
            orow[x] = acc > 0 ? 1 : 0;
        }
    }
}

void dilate_cols(const BinaryMask& in, BinaryMask& out, int R) {
    const int W = in.width, H = in.height;
    std::vector<int> diff(static_cast<size_t>(H) + 1);
    for (int x = 0; x < W; ++x) {
        std::fill(diff.begin(), diff.end(), 0);
        for (int y = 0; y < H; ++y) {
            if (!in.at(x, y)) continue;
            diff[std::max(0, y - R)] += 1;
            diff[std::min(H, y + R + 1)] -= 1;
        }
        int acc = 0;
        for (int y = 0; y < H; ++y) {
            acc += diff[y];
            out.at(x, y) = acc > 0 ? 1 : 0;
        }
    }
}

// Erosion = pixel survives iff the nearest background (or border) along the
// axis is farther than R.
void erode_rows(const BinaryMask& in, BinaryMask& out, int R) {
    const int W = in.width, H = in.height;
    std::vector<int> dist(static_cast<size_t>(W));
    for (int y = 0; y < H; ++y) {
        const std::uint8_t* row = &in.data[static_cast<size_t>(y) * W];
        int d = 0; // distance to nearest zero on the left, border counts
        for (int x = 0; x < W; ++x) {
            d = row[x] ? d + 1 : 0;
            dist[x] = d;
        }
        d = 0;
        std::uint8_t* orow = &out.data[static_cast<size_t>(y) * W];
        for (int x = W - 1; x >= 0; --x) {
            d = row[x] ? d + 1 : 0;
            orow[x] = (std::min(dist[x], d) > R) ? 1 : 0;
        }
    }
}

void erode_cols(const BinaryMask& in, BinaryMask& out, int R) {
    const int W = in.width, H = in.height;
    std::vector<int> dist(static_cast<size_t>(H));
    for (int x = 0; x < W; ++x) {
        int d = 0;
        for (int y = 0; y < H; ++y) {
            d = in.at(x, y) ? d + 1 : 0;
            dist[y] = d;
        }
        d = 0;
        for (int y = H - 1; y >= 0; --y) {
            d = in.at(x, y) ? d + 1 : 0;
            out.at(x, y) = (std::min(dist[y], d) > R) ? 1 : 0;
        }
    }
}

BinaryMask dilate_square(const BinaryMask& mask, int R) {
    BinaryMask tmp(mask.width, mask.height), out(mask.width, mask.height);
    dilate_rows(mask, tmp, R);
    dilate_cols(tmp, out, R);
    return out;
}

BinaryMask erode_square(const BinaryMask& mask, int R) {
    BinaryMask tmp(mask.width, mask.height), out(mask.width, mask.height);
    erode_rows(mask, tmp, R);
    erode_cols(tmp, out, R);
    return out;
}

BinaryMask dilate_generic(const BinaryMask& mask, const std::vector<std::pair<int, int>>& offs) {
    BinaryMask out(mask.width, mask.height);
    const int W = mask.width, H = mask.height;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            if (!mask.at(x, y)) continue;
            for (auto [dx, dy] : offs) {
                const int nx = x + dx, ny = y + dy;
                if (nx >= 0 && nx < W && ny >= 0 && ny < H) out.at(nx, ny) = 1;
            }
        }
    }
    return out;
}

BinaryMask erode_generic(const BinaryMask& mask, const std::vector<std::pair<int, int>>& offs) {
    BinaryMask out(mask.width, mask.height);
    const int W = mask.width, H = mask.height;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            if (!mask.at(x, y)) continue;
            bool keep = true;
            for (auto [dx, dy] : offs) {
                if (!mask.test(x + dx, y + dy)) {
                    keep = false;
                    break;
                }
            }
            out.at(x, y) = keep ? 1 : 0;
        }
    }
    return out;
}

void check_iterations(int iterations) {
    if (iterations < 0) throw InvalidInput("morphology: iterations must be >= 0");
}

} // namespace

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se, int iterations) {
    check_iterations(iterations);
    if (iterations == 0 || mask.empty()) return mask;
    // Iterated square dilation equals one dilation by the Minkowski-summed
    // square, which is separable.
    if (se.shape == SEShape::Square) return dilate_square(mask, se.radius * iterations);
    const auto offs = se.offsets();
    BinaryMask out = mask;
    for (int i = 0; i < iterations; ++i) out = dilate_generic(out, offs);
    return out;
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se, int iterations) {
    check_iterations(iterations);
    if (iterations == 0 || mask.empty()) return mask;
    if (se.shape == SEShape::Square) return erode_square(mask, se.radius * iterations);
    const auto offs = se.offsets();
    BinaryMask out = mask;
    for (int i = 0; i < iterations; ++i) out = erode_generic(out, offs);
    return out;
}

BinaryMask open(const BinaryMask& mask, const StructuringElement& se, int iterations) {
    return dilate(erode(mask, se, iterations), se, iterations);
}

BinaryMask close(const BinaryMask& mask, const StructuringElement& se, int iterations) {
    return erode(dilate(mask, se, iterations), se, iterations);
}

namespace {

template <typename Cmp>
GrayImage gray_window(const GrayImage& img, const StructuringElement& se, Cmp better) {
    GrayImage out(img.width, img.height);
    const auto offs = se.offsets();
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            float v = img.at(x, y);
            for (auto [dx, dy] : offs) {
                const float u = img.at_clamped(x + dx, y + dy);
                if (better(u, v)) v = u;
            }
            out.at(x, y) = v;
        }
    }
    return out;
}

} // namespace

GrayImage gray_dilate(const GrayImage& img, const StructuringElement& se) {
    return gray_window(img, se, [](float a, float b) { return a > b; });
}

GrayImage gray_erode(const GrayImage& img, const StructuringElement& se) {
    return gray_window(img, se, [](float a, float b) { return a < b; });
}

GrayImage gray_open(const GrayImage& img, const StructuringElement& se) {
    return gray_dilate(gray_erode(img, se), se);
}

GrayImage gray_close(const GrayImage& img, const StructuringElement& se) {
    return gray_erode(gray_dilate(img, se), se);
}

} // namespace vtsize
