#include "vtsize/components.hpp"

#include <cmath>
#include <numbers>

namespace vtsize {

std::vector<Component> connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8)
        throw InvalidInput("connected_components: connectivity must be 4 or 8");
    std::vector<Component> out;
    if (mask.empty()) return out;

    const int W = mask.width, H = mask.height;
    std::vector<std::int32_t> label(mask.data.size(), -1);
    static const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int ndirs = connectivity == 4 ? 4 : 8;

    std::vector<std::int64_t> stack;
    for (std::int64_t start = 0; start < static_cast<std::int64_t>(mask.data.size()); ++start) {
        if (!mask.data[static_cast<size_t>(start)] || label[static_cast<size_t>(start)] >= 0) continue;
        const auto id = static_cast<std::int32_t>(out.size());
        Component comp;
        stack.clear();
        stack.push_back(start);
        label[static_cast<size_t>(start)] = id;
        while (!stack.empty()) {
            const std::int64_t p = stack.back();
            stack.pop_back();
            comp.pixels.push_back(p);
            const int x = static_cast<int>(p % W), y = static_cast<int>(p / W);
            for (int d = 0; d < ndirs; ++d) {
                const int nx = x + dx8[d], ny = y + dy8[d];
                if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
                const std::int64_t np = static_cast<std::int64_t>(ny) * W + nx;
                if (mask.data[static_cast<size_t>(np)] && label[static_cast<size_t>(np)] < 0) {
                    label[static_cast<size_t>(np)] = id;
                    stack.push_back(np);
                }
            }
        }

        comp.area = static_cast<long long>(comp.pixels.size());
        double sx = 0, sy = 0;
        comp.min_x = W;
        comp.min_y = H;
        comp.max_x = -1;
        comp.max_y = -1;
        for (auto p : comp.pixels) {
            const int x = static_cast<int>(p % W), y = static_cast<int>(p / W);
            sx += x;
            sy += y;
            comp.min_x = std::min(comp.min_x, x);
            comp.max_x = std::max(comp.max_x, x);
            comp.min_y = std::min(comp.min_y, y);
            comp.max_y = std::max(comp.max_y, y);
        }
        comp.centroid_x = sx / static_cast<double>(comp.area);
        comp.centroid_y = sy / static_cast<double>(comp.area);

        if (comp.area >= 2) {
            double mu20 = 0, mu02 = 0, mu11 = 0;
            for (auto p : comp.pixels) {
                const double x = static_cast<double>(p % W) - comp.centroid_x;
                const double y = static_cast<double>(p / W) - comp.centroid_y;
                mu20 += x * x;
                mu02 += y * y;
                mu11 += x * y;
            }
            const double theta = 0.5 * std::atan2(2.0 * mu11, mu20 - mu02);
            comp.orientation_deg = std::abs(theta * 180.0 / std::numbers::pi);
        }
        out.push_back(std::move(comp));
    }
    return out;
}

BinaryMask component_mask(const Component& comp, int mask_width) {
    BinaryMask out(comp.max_x - comp.min_x + 1, comp.max_y - comp.min_y + 1);
    for (auto p : comp.pixels) {
        const int x = static_cast<int>(p % mask_width) - comp.min_x;
        const int y = static_cast<int>(p / mask_width) - comp.min_y;
        out.at(x, y) = 1;
    }
    return out;
}

} // namespace vtsize
