#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "testutil.hpp"
#include "vtsize/edge_refine.hpp"
#include "vtsize/morphology.hpp"

using namespace vtsize;
using testutil::rect_mask;

namespace {

GatedConvParams identity_mix_params(int channels, int fi_channels, double gate_bias) {
    GatedConvParams p;
    p.channels = channels;
    p.gate.out_channels = channels;
    p.gate.in_channels = fi_channels;
    p.gate.weights.assign(static_cast<size_t>(channels) * fi_channels, 0.0);
    p.gate.bias.assign(static_cast<size_t>(channels), gate_bias);
    p.channel_mix.assign(static_cast<size_t>(channels) * channels, 0.0);
    for (int c = 0; c < channels; ++c) p.channel_mix[static_cast<size_t>(c) * channels + c] = 1.0;
    return p;
}

FeatureMap random_map(std::mt19937& rng, int c, int h, int w, double scale = 1.0) {
    FeatureMap fm(c, h, w);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& v : fm.data) v = u(rng);
    return fm;
}

// Straight-line scalar evaluation of the gated convolution, kept deliberately
// independent of the library implementation.
FeatureMap gated_oracle(const FeatureMap& ei, const FeatureMap& fi, const GatedConvParams& p) {
    FeatureMap out(ei.channels, ei.height, ei.width);
    for (int y = 0; y < ei.height; ++y) {
        for (int x = 0; x < ei.width; ++x) {
            std::vector<double> h(static_cast<size_t>(ei.channels));
            for (int c = 0; c < ei.channels; ++c) {
                double logit = p.gate.bias[static_cast<size_t>(c)];
                for (int ci = 0; ci < fi.channels; ++ci)
                    logit += p.gate.weights[static_cast<size_t>(c) * fi.channels + ci] * fi.at(ci, y, x);
                const double g = 1.0 / (1.0 + std::exp(-logit));
                h[static_cast<size_t>(c)] = ei.at(c, y, x) * g + ei.at(c, y, x);
            }
            for (int co = 0; co < ei.channels; ++co) {
                double acc = 0;
                for (int ci = 0; ci < ei.channels; ++ci)
                    acc += p.channel_mix[static_cast<size_t>(co) * ei.channels + ci] * h[static_cast<size_t>(ci)];
                out.at(co, y, x) = acc;
            }
        }
    }
    return out;
}

double loss_of(const FeatureMap& out) {
    double acc = 0;
    for (double v : out.data) acc += v * v;
    return 0.5 * acc;
}

FeatureMap loss_grad(const FeatureMap& out) {
    FeatureMap g = out; // dL/dout = out for L = 0.5*sum(out^2)
    return g;
}

// All parameter tensors of one EdgeAttentionParams, for generic FD sweeps.
std::vector<std::vector<double>*> param_tensors(EdgeAttentionParams& p) {
    std::vector<std::vector<double>*> out;
    for (auto& b : p.branches) {
        out.push_back(&b.input_proj.weights);
        out.push_back(&b.input_proj.bias);
        out.push_back(&b.residual.conv_a.weights);
        out.push_back(&b.residual.conv_a.bias);
        out.push_back(&b.residual.conv_b.weights);
        out.push_back(&b.residual.conv_b.bias);
        out.push_back(&b.gated.gate.weights);
        out.push_back(&b.gated.gate.bias);
        out.push_back(&b.gated.channel_mix);
    }
    return out;
}

} // namespace

TEST_CASE("gated_conv: saturated gates reduce to the residual endpoints") {
    std::mt19937 rng(3);
    auto ei = random_map(rng, 2, 4, 4);
    auto fi = random_map(rng, 3, 4, 4);

    // gate logits driven to -inf: g ~ 0, identity mix -> out == ei
    auto p0 = identity_mix_params(2, 3, -1e6);
    auto out0 = gated_conv_forward(ei, fi, p0);
    for (size_t i = 0; i < ei.data.size(); ++i)
        CHECK(out0.data[i] == doctest::Approx(ei.data[i]).epsilon(1e-12));

    // +inf: g ~ 1 -> out == 2*ei
    auto p1 = identity_mix_params(2, 3, 1e6);
    auto out1 = gated_conv_forward(ei, fi, p1);
    for (size_t i = 0; i < ei.data.size(); ++i)
        CHECK(out1.data[i] == doctest::Approx(2.0 * ei.data[i]).epsilon(1e-12));

    // zero logits: sigma(0) = 0.5 -> out == 1.5*ei, exactly
    auto ph = identity_mix_params(2, 3, 0.0);
    ph.gate.weights.assign(ph.gate.weights.size(), 0.0);
    auto outh = gated_conv_forward(ei, fi, ph);
    for (size_t i = 0; i < ei.data.size(); ++i) CHECK(outh.data[i] == 1.5 * ei.data[i]);
}

TEST_CASE("gated_conv: matches the scalar oracle on random fixtures") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto ei = random_map(rng, 2, 4, 4);
        auto fi = random_map(rng, 2, 4, 4);
        GatedConvParams p;
        p.channels = 2;
        p.gate.out_channels = 2;
        p.gate.in_channels = 2;
        std::uniform_real_distribution<double> u(-1, 1);
        p.gate.weights.resize(4);
        p.gate.bias.resize(2);
        p.channel_mix.resize(4);
        for (auto* vec : {&p.gate.weights, &p.gate.bias, &p.channel_mix})
            for (auto& v : *vec) v = u(rng);

        auto got = gated_conv_forward(ei, fi, p);
        auto want = gated_oracle(ei, fi, p);
        for (size_t i = 0; i < got.data.size(); ++i)
            CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-9));

        // gates stay strictly inside (0,1): outputs bounded by 2*|mix|*|ei|
        for (double v : got.data) CHECK(std::isfinite(v));
    }
}

TEST_CASE("gated_conv: shape mismatches name the offending dimension") {
    FeatureMap ei(2, 4, 4), fi(3, 4, 4), fi_bad(3, 5, 4);
    auto p = identity_mix_params(2, 3, 0.0);
    CHECK_THROWS_WITH_AS(gated_conv_forward(ei, fi_bad, p),
                         doctest::Contains("4x4"), InvalidInput);
    auto p_bad = identity_mix_params(2, 4, 0.0); // gate expects 4 input channels
    CHECK_THROWS_WITH_AS(gated_conv_forward(ei, fi, p_bad),
                         doctest::Contains("input channels"), InvalidInput);
    auto p_bad2 = identity_mix_params(3, 3, 0.0); // gate emits 3, edge has 2
    CHECK_THROWS_WITH_AS(gated_conv_forward(ei, fi, p_bad2),
                         doctest::Contains("edge"), InvalidInput);
}

TEST_CASE("edge_attention: zero weights give zero output; branches add up") {
    const int C = 2;
    auto zero = seeded_edge_attention_params(1, C, C, C);
    for (auto* t : param_tensors(zero)) std::fill(t->begin(), t->end(), 0.0);

    std::mt19937 rng(5);
    auto ei = random_map(rng, C, 4, 4);
    auto fi = random_map(rng, C, 4, 4);
    auto out = edge_attention_forward(ei, fi, zero);
    for (double v : out.data) CHECK(v == 0.0);

    // one live branch equals that branch's gated output alone
    auto p = seeded_edge_attention_params(42, C, C, C);
    auto single = p;
    for (size_t k = 1; k < 4; ++k) {
        auto& b = single.branches[k];
        for (auto* t : {&b.input_proj.weights, &b.input_proj.bias, &b.residual.conv_a.weights,
                        &b.residual.conv_a.bias, &b.residual.conv_b.weights, &b.residual.conv_b.bias,
                        &b.gated.gate.weights, &b.gated.gate.bias, &b.gated.channel_mix})
            std::fill(t->begin(), t->end(), 0.0);
    }
    auto full = edge_attention_forward(ei, fi, single);
    auto z = conv1x1_forward(ei, p.branches[0].input_proj);
    auto pre = conv3x3_forward(z, p.branches[0].residual.conv_a);
    for (auto& v : pre.data) v = v > 0 ? v : 0;
    auto r = conv3x3_forward(pre, p.branches[0].residual.conv_b);
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] += z.data[i];
    auto expected = gated_conv_forward(r, fi, p.branches[0].gated);
    for (size_t i = 0; i < full.data.size(); ++i)
        CHECK(full.data[i] == doctest::Approx(expected.data[i]).epsilon(1e-12));
}

TEST_CASE("edge_attention: analytic gradients match central finite differences") {
    const int C = 2, H = 4, W = 4;
    const double eps = 1e-3;
    int checked_draws = 0;
    for (std::uint64_t seed = 100; checked_draws < 5; ++seed) {
        auto p = seeded_edge_attention_params(seed, C, C, C);
        std::mt19937 rng(static_cast<unsigned>(seed * 31 + 7));
        auto ei = random_map(rng, C, H, W);
        auto fi = random_map(rng, C, H, W);

        // FD through a rectifier kink is not a valid oracle; skip draws where
        // any first-conv preactivation sits within 5*eps of zero.
        bool near_kink = false;
        for (const auto& b : p.branches) {
            auto z = conv1x1_forward(ei, b.input_proj);
            auto pre = conv3x3_forward(z, b.residual.conv_a);
            for (double v : pre.data)
                if (std::abs(v) < 5 * eps) near_kink = true;
        }
        if (near_kink) continue;
        ++checked_draws;

        auto out = edge_attention_forward(ei, fi, p);
        auto grads = edge_attention_backward(ei, fi, p, loss_grad(out));

        auto tensors = param_tensors(p);
        auto grad_tensors = param_tensors(grads.params);
        double max_rel = 0;
        for (size_t t = 0; t < tensors.size(); ++t) {
            for (size_t i = 0; i < tensors[t]->size(); ++i) {
                const double saved = (*tensors[t])[i];
                (*tensors[t])[i] = saved + eps;
                const double lp = loss_of(edge_attention_forward(ei, fi, p));
                (*tensors[t])[i] = saved - eps;
                const double lm = loss_of(edge_attention_forward(ei, fi, p));
                (*tensors[t])[i] = saved;
                const double fd = (lp - lm) / (2 * eps);
                const double an = (*grad_tensors[t])[i];
                const double rel = std::abs(fd - an) / std::max(1.0, std::abs(an));
                max_rel = std::max(max_rel, rel);
            }
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("parameter container round trip") {
    auto p = seeded_edge_attention_params(321, 2, 3, 4);
    const std::string manifest = "test_params_manifest.json";
    const std::string blob = "test_params.bin";
    save_edge_attention_params(p, manifest, blob);
    auto q = load_edge_attention_params(manifest);

    auto pt = param_tensors(p);
    auto qt = param_tensors(q);
    REQUIRE(pt.size() == qt.size());
    for (size_t t = 0; t < pt.size(); ++t) CHECK(*pt[t] == *qt[t]);
    std::remove(manifest.c_str());
    std::remove(blob.c_str());
}

TEST_CASE("seeded parameters are deterministic and in range") {
    auto a = seeded_edge_attention_params(7, 2, 2, 3);
    auto b = seeded_edge_attention_params(7, 2, 2, 3);
    auto at = param_tensors(a);
    auto bt = param_tensors(b);
    for (size_t t = 0; t < at.size(); ++t) {
        CHECK(*at[t] == *bt[t]);
        for (double v : *at[t]) {
            CHECK(v >= -0.1);
            CHECK(v <= 0.1);
        }
    }
}

TEST_CASE("edge_mask: ring around a square, nothing on the inside") {
    auto m = rect_mask(50, 50, 15, 15, 34, 34);
    auto band = edge_mask(m, 1);
    CHECK(band.count() > 0);
    CHECK(band.at(25, 25) == 0);       // deep interior
    CHECK(band.at(15, 15) == 1);       // on the boundary
    CHECK(band.at(5, 5) == 0);         // far outside
    // ring thickness ~ 2 pixels: dilate(1) minus erode(1)
    auto oracle = mask_diff(dilate(m, StructuringElement::disk(1)),
                            erode(m, StructuringElement::disk(1)));
    CHECK(band == oracle);

    CHECK(edge_mask(BinaryMask(10, 10), 2).count() == 0);
    CHECK_THROWS_AS(edge_mask(m, 0), InvalidInput);
}

TEST_CASE("edge_mask: full mask only rings at the image border") {
    BinaryMask full(20, 20, 1);
    auto band = edge_mask(full, 2);
    CHECK(band.at(10, 10) == 0);
    CHECK(band.at(0, 0) == 1); // erosion removes the border under the oob=background rule
}

TEST_CASE("refine_mask_classical: pixels outside the band never change") {
    std::mt19937 rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = testutil::random_mask(rng, 48, 40);
        const int band = 3;
        auto out = refine_mask_classical(m, band);
        auto inside = edge_mask(m, band);
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (!inside.at(x, y)) CHECK(out.at(x, y) == m.at(x, y));
    }
}

TEST_CASE("refine_mask_classical: a smooth ellipse barely changes") {
    BinaryMask m(120, 90);
    for (int y = 0; y < 90; ++y)
        for (int x = 0; x < 120; ++x) {
            const double dx = (x - 60.0) / 40.0, dy = (y - 45.0) / 28.0;
            if (dx * dx + dy * dy <= 1.0) m.at(x, y) = 1;
        }
    const int band = 5;
    auto out = refine_mask_classical(m, band);
    auto bandmask = edge_mask(m, band);
    long long band_pixels = bandmask.count(), changed = 0;
    for (size_t i = 0; i < m.data.size(); ++i)
        if (out.data[i] != m.data[i]) ++changed;
    CHECK(changed < band_pixels / 100); // < 1% of band pixels
}

TEST_CASE("refine_mask_classical: staircase boundary gets smoother") {
    // coarse diagonal staircase with 3-pixel steps
    BinaryMask m(90, 90);
    for (int y = 0; y < 90; ++y)
        for (int x = 0; x < 90; ++x)
            if (x <= (y / 3) * 3) m.at(x, y) = 1;

    auto curvature_var = [](const BinaryMask& mask) {
        // variance of the boundary column offsets' second difference
        std::vector<double> edge;
        for (int y = 1; y < mask.height - 1; ++y) {
            int last = -1;
            for (int x = 0; x < mask.width; ++x)
                if (mask.at(x, y)) last = x;
            if (last >= 0) edge.push_back(last);
        }
        std::vector<double> dd;
        for (size_t i = 2; i < edge.size(); ++i) dd.push_back(edge[i] - 2 * edge[i - 1] + edge[i - 2]);
        double mean = 0;
        for (double v : dd) mean += v;
        mean /= dd.size();
        double var = 0;
        for (double v : dd) var += (v - mean) * (v - mean);
        return var / dd.size();
    };

    auto out = refine_mask_classical(m, 4);
    CHECK(curvature_var(out) < curvature_var(m));
}

namespace {

class EchoBackend : public RefinementBackend {
public:
    BinaryMask refine(const BinaryMask& coarse) override { return coarse; }
    std::string describe() const override { return "echo"; }
};

class WrongSizeBackend : public RefinementBackend {
public:
    BinaryMask refine(const BinaryMask& coarse) override {
        return BinaryMask(coarse.width + 1, coarse.height);
    }
    std::string describe() const override { return "wrong-size"; }
};

class FailingBackend : public RefinementBackend {
public:
    BinaryMask refine(const BinaryMask&) override { throw BackendError("connection refused"); }
    std::string describe() const override { return "downed"; }
};

} // namespace

TEST_CASE("refine_mask_external: echo, protocol violation, fallback") {
    auto coarse = rect_mask(30, 30, 5, 5, 24, 24);

    EchoBackend echo;
    auto outcome = refine_mask_external(coarse, echo);
    CHECK(outcome.mask == coarse);
    CHECK_FALSE(outcome.used_fallback);

    WrongSizeBackend wrong;
    CHECK_THROWS_AS(refine_mask_external(coarse, wrong), ProtocolError);

    FailingBackend down;
    RefineOptions opts;
    opts.band = 3;
    auto fb = refine_mask_external(coarse, down, opts);
    CHECK(fb.used_fallback);
    CHECK_FALSE(fb.warning.empty());
    CHECK(fb.mask == refine_mask_classical(coarse, 3));

    opts.fallback_to_classical = false;
    CHECK_THROWS_AS(refine_mask_external(coarse, down, opts), BackendError);
}
