#include "vtsize/skeleton.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace vtsize {

BinaryMask skeletonize(const BinaryMask& mask) {
    BinaryMask img = mask;
    if (img.empty()) return img;
    std::vector<std::int64_t> to_clear;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            to_clear.clear();
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    if (!img.at(x, y)) continue;
                    // P2..P9 clockwise from north.
                    const int p2 = img.test(x, y - 1), p3 = img.test(x + 1, y - 1);
                    const int p4 = img.test(x + 1, y), p5 = img.test(x + 1, y + 1);
                    const int p6 = img.test(x, y + 1), p7 = img.test(x - 1, y + 1);
                    const int p8 = img.test(x - 1, y), p9 = img.test(x - 1, y - 1);

                    const int c = ((!p2 && (p3 || p4)) ? 1 : 0) + ((!p4 && (p5 || p6)) ? 1 : 0) +
                                  ((!p6 && (p7 || p8)) ? 1 : 0) + ((!p8 && (p9 || p2)) ? 1 : 0);
                    if (c != 1) continue;
                    const int n1 = (p9 || p2) + (p3 || p4) + (p5 || p6) + (p7 || p8);
                    const int n2 = (p2 || p3) + (p4 || p5) + (p6 || p7) + (p8 || p9);
                    const int n = n1 < n2 ? n1 : n2;
                    if (n < 2 || n > 3) continue;
                    const bool m = pass == 0 ? ((p6 || p7 || !p9) && p8) : ((p2 || p3 || !p5) && p4);
                    if (m) continue;
                    to_clear.push_back(static_cast<std::int64_t>(y) * img.width + x);
                }
            }
            if (!to_clear.empty()) {
                changed = true;
                for (auto idx : to_clear) img.data[static_cast<size_t>(idx)] = 0;
            }
        }
    }
    return img;
}

double skeleton_length(const BinaryMask& skel) {
    double len = 0;
    for (int y = 0; y < skel.height; ++y) {
        for (int x = 0; x < skel.width; ++x) {
            if (!skel.at(x, y)) continue;
            // Count each link once: right, down, and the two down diagonals.
            if (skel.test(x + 1, y)) len += 1.0;
            if (skel.test(x, y + 1)) len += 1.0;
            if (skel.test(x + 1, y + 1) && !(skel.test(x + 1, y) || skel.test(x, y + 1)))
                len += std::numbers::sqrt2;
            if (skel.test(x - 1, y + 1) && !(skel.test(x - 1, y) || skel.test(x, y + 1)))
                len += std::numbers::sqrt2;
        }
    }
    return len;
}

} // namespace vtsize
