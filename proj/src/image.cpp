#include "vtsize/image.hpp"

namespace vtsize {

GrayImage to_gray(const BinaryMask& mask) {
    GrayImage out(mask.width, mask.height);
    for (size_t i = 0; i < mask.data.size(); ++i)
        out.data[i] = mask.data[i] ? 1.0f : 0.0f;
    return out;
}

BinaryMask threshold(const GrayImage& img, float thresh) {
    BinaryMask out(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = img.data[i] > thresh ? 1 : 0;
    return out;
}

GrayImage luminance(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    for (size_t i = 0, n = out.data.size(); i < n; ++i) {
        const float* px = &img.data[i * 3];
        out.data[i] = 0.299f * px[0] + 0.587f * px[1] + 0.114f * px[2];
    }
    return out;
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    require_same_size(a.width, a.height, b.width, b.height, "mask_and");
    BinaryMask out(a.width, a.height);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = (a.data[i] && b.data[i]) ? 1 : 0;
    return out;
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    require_same_size(a.width, a.height, b.width, b.height, "mask_or");
    BinaryMask out(a.width, a.height);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = (a.data[i] || b.data[i]) ? 1 : 0;
    return out;
}

BinaryMask mask_diff(const BinaryMask& a, const BinaryMask& b) {
    require_same_size(a.width, a.height, b.width, b.height, "mask_diff");
    BinaryMask out(a.width, a.height);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = (a.data[i] && !b.data[i]) ? 1 : 0;
    return out;
}

BinaryMask mask_not(const BinaryMask& a) {
    BinaryMask out(a.width, a.height);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] ? 0 : 1;
    return out;
}

bool is_subset(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height) return false;
    for (size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] && !b.data[i]) return false;
    return true;
}

} // namespace vtsize
