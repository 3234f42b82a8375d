#include "vtsize/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vtsize {

namespace {

// Separable convolution with a centered 1-D kernel, edge replication.
std::vector<double> convolve_rows(const std::vector<double>& in, int W, int H,
                                  const std::vector<double>& k) {
    const int r = static_cast<int>(k.size() / 2);
    std::vector<double> out(in.size());
    for (int y = 0; y < H; ++y) {
        const double* row = &in[static_cast<size_t>(y) * W];
        for (int x = 0; x < W; ++x) {
            double acc = 0;
            for (int i = -r; i <= r; ++i) {
                const int xi = std::clamp(x + i, 0, W - 1);
                acc += k[static_cast<size_t>(i + r)] * row[xi];
            }
            out[static_cast<size_t>(y) * W + x] = acc;
        }
    }
    return out;
}

std::vector<double> convolve_cols(const std::vector<double>& in, int W, int H,
                                  const std::vector<double>& k) {
    const int r = static_cast<int>(k.size() / 2);
    std::vector<double> out(in.size());
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double acc = 0;
            for (int i = -r; i <= r; ++i) {
                const int yi = std::clamp(y + i, 0, H - 1);
                acc += k[static_cast<size_t>(i + r)] * in[static_cast<size_t>(yi) * W + x];
            }
            out[static_cast<size_t>(y) * W + x] = acc;
        }
    }
    return out;
}

std::vector<double> to_double(const GrayImage& img) {
    return {img.data.begin(), img.data.end()};
}

// Sampled 1-D Gaussian and derivatives, radius 3*sigma. The smoothing kernel
// is normalized to unit sum; the second derivative is mean-corrected so a
// constant image maps to exactly zero.
std::vector<double> gauss_kernel(double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<size_t>(2 * r + 1));
    double sum = 0;
    for (int i = -r; i <= r; ++i) {
        k[static_cast<size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[static_cast<size_t>(i + r)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

std::vector<double> gauss_d1_kernel(double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    const double s2 = sigma * sigma;
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    std::vector<double> k(static_cast<size_t>(2 * r + 1));
    for (int i = -r; i <= r; ++i)
        k[static_cast<size_t>(i + r)] = -i / s2 * norm * std::exp(-0.5 * i * i / s2);
    return k; // antisymmetric, zero-sum by construction
}

std::vector<double> gauss_d2_kernel(double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    const double s2 = sigma * sigma;
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    std::vector<double> k(static_cast<size_t>(2 * r + 1));
    double sum = 0;
    for (int i = -r; i <= r; ++i) {
        k[static_cast<size_t>(i + r)] = (i * i / (s2 * s2) - 1.0 / s2) * norm * std::exp(-0.5 * i * i / s2);
        sum += k[static_cast<size_t>(i + r)];
    }
    const double corr = sum / static_cast<double>(k.size());
    for (auto& v : k) v -= corr;
    return k;
}

} // namespace

GrayImage gaussian5x5(const GrayImage& img) {
    if (img.empty()) throw InvalidInput("gaussian5x5: empty image");
    static const std::vector<double> k{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    auto tmp = convolve_rows(to_double(img), img.width, img.height, k);
    tmp = convolve_cols(tmp, img.width, img.height, k);
    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < tmp.size(); ++i)
        out.data[i] = static_cast<float>(std::clamp(tmp[i], 0.0, 1.0));
    return out;
}

GrayImage gaussian(const GrayImage& img, double sigma) {
    if (img.empty()) throw InvalidInput("gaussian: empty image");
    if (!(sigma > 0)) throw InvalidInput("gaussian: sigma must be > 0");
    const auto k = gauss_kernel(sigma);
    auto tmp = convolve_rows(to_double(img), img.width, img.height, k);
    tmp = convolve_cols(tmp, img.width, img.height, k);
    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < tmp.size(); ++i)
        out.data[i] = static_cast<float>(std::clamp(tmp[i], 0.0, 1.0));
    return out;
}

GrayImage frangi(const GrayImage& img, const FrangiParams& params) {
    if (img.empty()) throw InvalidInput("frangi: empty image");
    if (params.scales.empty()) throw InvalidInput("frangi: scale list is empty");
    for (double s : params.scales)
        if (!(s > 0)) throw InvalidInput("frangi: all scales must be > 0");

    const int W = img.width, H = img.height;
    const auto src = to_double(img);
    std::vector<double> best(src.size(), 0.0);

    for (double sigma : params.scales) {
        const auto g = gauss_kernel(sigma);
        const auto d1 = gauss_d1_kernel(sigma);
        const auto d2 = gauss_d2_kernel(sigma);

        // Scale-normalized Hessian entries (gamma = 2).
        auto dxx = convolve_cols(convolve_rows(src, W, H, d2), W, H, g);
        auto dyy = convolve_cols(convolve_rows(src, W, H, g), W, H, d2);
        auto dxy = convolve_cols(convolve_rows(src, W, H, d1), W, H, d1);
        const double s2 = sigma * sigma;

        std::vector<double> l1(src.size()), l2(src.size());
        double max_s = 0;
        for (size_t i = 0; i < src.size(); ++i) {
            const double hxx = s2 * dxx[i], hyy = s2 * dyy[i], hxy = s2 * dxy[i];
            const double tmp = std::sqrt((hxx - hyy) * (hxx - hyy) + 4.0 * hxy * hxy);
            double mu1 = 0.5 * (hxx + hyy + tmp);
            double mu2 = 0.5 * (hxx + hyy - tmp);
            if (std::abs(mu1) > std::abs(mu2)) std::swap(mu1, mu2); // |l1| <= |l2|
            l1[i] = mu1;
            l2[i] = mu2;
            max_s = std::max(max_s, std::sqrt(mu1 * mu1 + mu2 * mu2));
        }
        // Accumulation residue on flat regions is ~1e-16; anything this small
        // is numerically zero for intensities in [0,1].
        if (max_s <= 1e-10) continue;

        const double c_abs = params.c * max_s;
        const double two_beta2 = 2.0 * params.beta * params.beta;
        const double two_c2 = 2.0 * c_abs * c_abs;
        for (size_t i = 0; i < src.size(); ++i) {
            if (l2[i] >= 0) continue; // bright ridges only
            const double rb = l1[i] / l2[i];
            const double s_sq = l1[i] * l1[i] + l2[i] * l2[i];
            const double v = std::exp(-rb * rb / two_beta2) * (1.0 - std::exp(-s_sq / two_c2));
            best[i] = std::max(best[i], v);
        }
    }

    double vmax = 0;
    for (double v : best) vmax = std::max(vmax, v);
    GrayImage out(W, H);
    if (vmax > 1e-12)
        for (size_t i = 0; i < best.size(); ++i)
            out.data[i] = static_cast<float>(std::clamp(best[i] / vmax, 0.0, 1.0));
    return out;
}

GrayImage gabor_bank(const GrayImage& img, const GaborParams& params) {
    if (img.empty()) throw InvalidInput("gabor_bank: empty image");
    if (params.orientations_deg.empty()) throw InvalidInput("gabor_bank: orientation list is empty");
    if (!(params.wavelength > 0) || !(params.sigma > 0))
        throw InvalidInput("gabor_bank: wavelength and sigma must be > 0");

    const int W = img.width, H = img.height;
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * params.sigma)));
    const int side = 2 * r + 1;
    const auto src = to_double(img);
    std::vector<double> acc(src.size(), 0.0);

    std::vector<double> even(static_cast<size_t>(side) * side), odd(even.size());
    for (double deg : params.orientations_deg) {
        const double th = deg * std::numbers::pi / 180.0;
        const double ct = std::cos(th), st = std::sin(th);
        double env_sum = 0, even_sum = 0;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                const double xr = dx * ct + dy * st;
                const double env = std::exp(-0.5 * (dx * dx + dy * dy) / (params.sigma * params.sigma));
                const double phase = 2.0 * std::numbers::pi * xr / params.wavelength;
                const size_t idx = static_cast<size_t>(dy + r) * side + (dx + r);
                even[idx] = env * std::cos(phase);
                odd[idx] = env * std::sin(phase);
                env_sum += env;
                even_sum += even[idx];
            }
        }
        // Remove the even kernel's DC component (envelope-weighted) so flat
        // regions give exactly zero.
        const double dc = even_sum / env_sum;
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                const double env = std::exp(-0.5 * (dx * dx + dy * dy) / (params.sigma * params.sigma));
                even[static_cast<size_t>(dy + r) * side + (dx + r)] -= dc * env;
            }

        for (int y = 0; y < H; ++y) {
            const bool y_interior = y >= r && y < H - r;
            for (int x = 0; x < W; ++x) {
                double ev = 0, od = 0;
                if (y_interior && x >= r && x < W - r) {
                    // hot path: no border clamping, contiguous rows
                    for (int dy = -r; dy <= r; ++dy) {
                        const double* row = &src[static_cast<size_t>(y + dy) * W + (x - r)];
                        const double* ke = &even[static_cast<size_t>(dy + r) * side];
                        const double* ko = &odd[static_cast<size_t>(dy + r) * side];
                        for (int i = 0; i < side; ++i) {
                            ev += ke[i] * row[i];
                            od += ko[i] * row[i];
                        }
                    }
                } else {
                    for (int dy = -r; dy <= r; ++dy) {
                        const int yi = std::clamp(y + dy, 0, H - 1);
                        const double* row = &src[static_cast<size_t>(yi) * W];
                        const size_t krow = static_cast<size_t>(dy + r) * side;
                        for (int dx = -r; dx <= r; ++dx) {
                            const int xi = std::clamp(x + dx, 0, W - 1);
                            ev += even[krow + (dx + r)] * row[xi];
                            od += odd[krow + (dx + r)] * row[xi];
                        }
                    }
                }
                acc[static_cast<size_t>(y) * W + x] += std::sqrt(ev * ev + od * od);
            }
        }
    }

    const double n = static_cast<double>(params.orientations_deg.size());
    double vmax = 0;
    for (auto& v : acc) {
        v /= n;
        vmax = std::max(vmax, v);
    }
    GrayImage out(W, H);
    // The DC correction leaves ~1e-17 residue on flat images; below the floor
    // the response is numerically zero and must not be amplified by rescaling.
    if (vmax > 1e-10)
        for (size_t i = 0; i < acc.size(); ++i)
            out.data[i] = static_cast<float>(std::clamp(acc[i] / vmax, 0.0, 1.0));
    return out;
}

} // namespace vtsize
