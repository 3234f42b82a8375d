#include "vtsize/edge_refine.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>

#include <json.hpp>

#include "vtsize/filters.hpp"
#include "vtsize/morphology.hpp"

namespace vtsize {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidInput(msg);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

FeatureMap conv1x1_forward(const FeatureMap& in, const Conv1x1& p) {
    require(p.in_channels == in.channels,
            "conv1x1: input has " + std::to_string(in.channels) + " channels, weights expect " +
                std::to_string(p.in_channels));
    FeatureMap out(p.out_channels, in.height, in.width);
    for (int co = 0; co < p.out_channels; ++co) {
        for (int y = 0; y < in.height; ++y) {
            for (int x = 0; x < in.width; ++x) {
                double acc = p.bias[static_cast<size_t>(co)];
                for (int ci = 0; ci < p.in_channels; ++ci)
                    acc += p.weights[static_cast<size_t>(co) * p.in_channels + ci] * in.at(ci, y, x);
                out.at(co, y, x) = acc;
            }
        }
    }
    return out;
}

FeatureMap conv3x3_forward(const FeatureMap& in, const Conv3x3& p) {
    require(p.in_channels == in.channels,
            "conv3x3: input has " + std::to_string(in.channels) + " channels, weights expect " +
                std::to_string(p.in_channels));
    FeatureMap out(p.out_channels, in.height, in.width);
    for (int co = 0; co < p.out_channels; ++co) {
        for (int y = 0; y < in.height; ++y) {
            for (int x = 0; x < in.width; ++x) {
                double acc = p.bias[static_cast<size_t>(co)];
                for (int ci = 0; ci < p.in_channels; ++ci) {
                    for (int dy = -1; dy <= 1; ++dy) {
                        const int yy = y + dy;
                        if (yy < 0 || yy >= in.height) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int xx = x + dx;
                            if (xx < 0 || xx >= in.width) continue;
                            const size_t w_idx =
                                ((static_cast<size_t>(co) * p.in_channels + ci) * 3 + (dy + 1)) * 3 + (dx + 1);
                            acc += p.weights[w_idx] * in.at(ci, yy, xx);
                        }
                    }
                }
                out.at(co, y, x) = acc;
            }
        }
    }
    return out;
}

namespace {

void check_gated_shapes(const FeatureMap& ei, const FeatureMap& fi, const GatedConvParams& p) {
    require(ei.height == fi.height && ei.width == fi.width,
            "gated_conv: edge map is " + std::to_string(ei.width) + "x" + std::to_string(ei.height) +
                " but feature map is " + std::to_string(fi.width) + "x" + std::to_string(fi.height));
    require(p.gate.in_channels == fi.channels,
            "gated_conv: gate expects " + std::to_string(p.gate.in_channels) +
                " input channels, feature map has " + std::to_string(fi.channels));
    require(p.gate.out_channels == ei.channels,
            "gated_conv: gate emits " + std::to_string(p.gate.out_channels) +
                " channels, edge map has " + std::to_string(ei.channels));
    require(p.channels == ei.channels,
            "gated_conv: channel_mix side " + std::to_string(p.channels) + " != edge channels " +
                std::to_string(ei.channels));
    require(p.channel_mix.size() == static_cast<size_t>(p.channels) * p.channels,
            "gated_conv: channel_mix is not square");
}

// Saved intermediates of one branch forward pass, for backprop.
struct BranchTrace {
    FeatureMap z;        // input projection output
    FeatureMap pre_a;    // first 3x3 pre-activation
    FeatureMap r1;       // rectified
    FeatureMap r;        // residual block output (with skip)
    FeatureMap g;        // sigmoid gate
    FeatureMap h;        // r (.) g + r
    FeatureMap out;      // after channel mix
};

FeatureMap residual_forward(const FeatureMap& z, const ResidualBlockParams& p, FeatureMap& pre_a_out,
                            FeatureMap& r1_out) {
    require(p.conv_b.out_channels == z.channels,
            "residual block: conv_b emits " + std::to_string(p.conv_b.out_channels) +
                " channels, skip needs " + std::to_string(z.channels));
    pre_a_out = conv3x3_forward(z, p.conv_a);
    r1_out = pre_a_out;
    for (auto& v : r1_out.data) v = v > 0 ? v : 0.0;
    FeatureMap r = conv3x3_forward(r1_out, p.conv_b);
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] += z.data[i];
    return r;
}

FeatureMap gated_forward_from(const FeatureMap& r, const FeatureMap& fi, const GatedConvParams& p,
                              FeatureMap& g_out, FeatureMap& h_out) {
    check_gated_shapes(r, fi, p);
    g_out = conv1x1_forward(fi, p.gate);
    for (auto& v : g_out.data) v = sigmoid(v);
    h_out = r;
    for (size_t i = 0; i < h_out.data.size(); ++i) h_out.data[i] = r.data[i] * g_out.data[i] + r.data[i];
    FeatureMap out(p.channels, r.height, r.width);
    for (int co = 0; co < p.channels; ++co)
        for (int y = 0; y < r.height; ++y)
            for (int x = 0; x < r.width; ++x) {
                double acc = 0;
                for (int ci = 0; ci < p.channels; ++ci)
                    acc += p.channel_mix[static_cast<size_t>(co) * p.channels + ci] * h_out.at(ci, y, x);
                out.at(co, y, x) = acc;
            }
    return out;
}

BranchTrace branch_forward(const FeatureMap& ei, const FeatureMap& fi, const BranchParams& p) {
    BranchTrace t;
    t.z = conv1x1_forward(ei, p.input_proj);
    t.r = residual_forward(t.z, p.residual, t.pre_a, t.r1);
    t.out = gated_forward_from(t.r, fi, p.gated, t.g, t.h);
    return t;
}

} // namespace

FeatureMap gated_conv_forward(const FeatureMap& ei, const FeatureMap& fi, const GatedConvParams& p) {
    FeatureMap g, h;
    return gated_forward_from(ei, fi, p, g, h);
}

FeatureMap edge_attention_forward(const FeatureMap& ei, const FeatureMap& fi,
                                  const EdgeAttentionParams& p) {
    FeatureMap sum;
    for (const auto& branch : p.branches) {
        const BranchTrace t = branch_forward(ei, fi, branch);
        if (sum.data.empty()) {
            sum = t.out;
        } else {
            require(sum.channels == t.out.channels,
                    "edge_attention: branch output channels disagree (" + std::to_string(sum.channels) +
                        " vs " + std::to_string(t.out.channels) + ")");
            for (size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += t.out.data[i];
        }
    }
    return sum;
}

namespace {

EdgeAttentionParams zeros_like(const EdgeAttentionParams& p) {
    EdgeAttentionParams g = p;
    for (auto& b : g.branches) {
        std::fill(b.input_proj.weights.begin(), b.input_proj.weights.end(), 0.0);
        std::fill(b.input_proj.bias.begin(), b.input_proj.bias.end(), 0.0);
        std::fill(b.residual.conv_a.weights.begin(), b.residual.conv_a.weights.end(), 0.0);
        std::fill(b.residual.conv_a.bias.begin(), b.residual.conv_a.bias.end(), 0.0);
        std::fill(b.residual.conv_b.weights.begin(), b.residual.conv_b.weights.end(), 0.0);
        std::fill(b.residual.conv_b.bias.begin(), b.residual.conv_b.bias.end(), 0.0);
        std::fill(b.gated.gate.weights.begin(), b.gated.gate.weights.end(), 0.0);
        std::fill(b.gated.gate.bias.begin(), b.gated.gate.bias.end(), 0.0);
        std::fill(b.gated.channel_mix.begin(), b.gated.channel_mix.end(), 0.0);
    }
    return g;
}

// d(conv3x3) w.r.t. weights, bias and input.
void conv3x3_backward(const FeatureMap& in, const Conv3x3& p, const FeatureMap& d_out, Conv3x3& d_p,
                      FeatureMap& d_in) {
    d_in = FeatureMap(in.channels, in.height, in.width);
    for (int co = 0; co < p.out_channels; ++co) {
        for (int y = 0; y < in.height; ++y) {
            for (int x = 0; x < in.width; ++x) {
                const double go = d_out.at(co, y, x);
                if (go == 0.0) continue;
                d_p.bias[static_cast<size_t>(co)] += go;
                for (int ci = 0; ci < p.in_channels; ++ci) {
                    for (int dy = -1; dy <= 1; ++dy) {
                        const int yy = y + dy;
                        if (yy < 0 || yy >= in.height) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int xx = x + dx;
                            if (xx < 0 || xx >= in.width) continue;
                            const size_t w_idx =
                                ((static_cast<size_t>(co) * p.in_channels + ci) * 3 + (dy + 1)) * 3 + (dx + 1);
                            d_p.weights[w_idx] += go * in.at(ci, yy, xx);
                            d_in.at(ci, yy, xx) += go * p.weights[w_idx];
                        }
                    }
                }
            }
        }
    }
}

void conv1x1_backward(const FeatureMap& in, const Conv1x1& p, const FeatureMap& d_out, Conv1x1& d_p,
                      FeatureMap& d_in) {
    d_in = FeatureMap(in.channels, in.height, in.width);
    const size_t plane = in.plane();
    for (int co = 0; co < p.out_channels; ++co) {
        for (size_t i = 0; i < plane; ++i) {
            const double go = d_out.data[static_cast<size_t>(co) * plane + i];
            if (go == 0.0) continue;
            d_p.bias[static_cast<size_t>(co)] += go;
            for (int ci = 0; ci < p.in_channels; ++ci) {
                const size_t w_idx = static_cast<size_t>(co) * p.in_channels + ci;
                d_p.weights[w_idx] += go * in.data[static_cast<size_t>(ci) * plane + i];
                d_in.data[static_cast<size_t>(ci) * plane + i] += go * p.weights[w_idx];
            }
        }
    }
}

} // namespace

EdgeAttentionGradients edge_attention_backward(const FeatureMap& ei, const FeatureMap& fi,
                                               const EdgeAttentionParams& p, const FeatureMap& d_out) {
    EdgeAttentionGradients grads;
    grads.params = zeros_like(p);
    grads.d_edge_input = FeatureMap(ei.channels, ei.height, ei.width);
    grads.d_feature_input = FeatureMap(fi.channels, fi.height, fi.width);

    const size_t plane = ei.plane();
    for (size_t k = 0; k < p.branches.size(); ++k) {
        const BranchParams& bp = p.branches[k];
        BranchParams& bg = grads.params.branches[k];
        const BranchTrace t = branch_forward(ei, fi, bp);
        const int C = bp.gated.channels;

        // channel mix: out[co] = sum_ci W[co][ci] h[ci]
        FeatureMap d_h(C, ei.height, ei.width);
        for (int co = 0; co < C; ++co) {
            for (size_t i = 0; i < plane; ++i) {
                const double go = d_out.data[static_cast<size_t>(co) * plane + i];
                if (go == 0.0) continue;
                for (int ci = 0; ci < C; ++ci) {
                    const size_t w_idx = static_cast<size_t>(co) * C + ci;
                    bg.gated.channel_mix[w_idx] += go * t.h.data[static_cast<size_t>(ci) * plane + i];
                    d_h.data[static_cast<size_t>(ci) * plane + i] += go * bp.gated.channel_mix[w_idx];
                }
            }
        }

        // h = r*g + r
        FeatureMap d_r(C, ei.height, ei.width), d_gate_pre(C, ei.height, ei.width);
        for (size_t i = 0; i < d_h.data.size(); ++i) {
            const double g = t.g.data[i];
            d_r.data[i] = d_h.data[i] * (1.0 + g);
            d_gate_pre.data[i] = d_h.data[i] * t.r.data[i] * g * (1.0 - g);
        }

        // gate = sigmoid(conv1x1(fi))
        FeatureMap d_fi_branch;
        conv1x1_backward(fi, bp.gated.gate, d_gate_pre, bg.gated.gate, d_fi_branch);
        for (size_t i = 0; i < grads.d_feature_input.data.size(); ++i)
            grads.d_feature_input.data[i] += d_fi_branch.data[i];

        // r = conv_b(relu(conv_a(z))) + z
        FeatureMap d_r1;
        conv3x3_backward(t.r1, bp.residual.conv_b, d_r, bg.residual.conv_b, d_r1);
        for (size_t i = 0; i < d_r1.data.size(); ++i)
            if (t.pre_a.data[i] <= 0) d_r1.data[i] = 0.0;
        FeatureMap d_z;
        conv3x3_backward(t.z, bp.residual.conv_a, d_r1, bg.residual.conv_a, d_z);
        for (size_t i = 0; i < d_z.data.size(); ++i) d_z.data[i] += d_r.data[i]; // skip path

        FeatureMap d_ei_branch;
        conv1x1_backward(ei, bp.input_proj, d_z, bg.input_proj, d_ei_branch);
        for (size_t i = 0; i < grads.d_edge_input.data.size(); ++i)
            grads.d_edge_input.data[i] += d_ei_branch.data[i];
    }
    return grads;
}

namespace {

// Portable uniform in [-0.1, 0.1] from raw mt19937 draws.
class UniformInit {
public:
    explicit UniformInit(std::uint64_t seed) : rng_(static_cast<std::uint_fast32_t>(seed)) {}
    double next() {
        const double u = static_cast<double>(rng_()) / 4294967296.0; // [0,1)
        return 0.2 * u - 0.1;
    }
    void fill(std::vector<double>& v) {
        for (auto& x : v) x = next();
    }

private:
    std::mt19937 rng_;
};

Conv1x1 make_conv1x1(int out_ch, int in_ch, UniformInit& init) {
    Conv1x1 c;
    c.out_channels = out_ch;
    c.in_channels = in_ch;
    c.weights.resize(static_cast<size_t>(out_ch) * in_ch);
    c.bias.resize(static_cast<size_t>(out_ch));
    init.fill(c.weights);
    init.fill(c.bias);
    return c;
}

Conv3x3 make_conv3x3(int out_ch, int in_ch, UniformInit& init) {
    Conv3x3 c;
    c.out_channels = out_ch;
    c.in_channels = in_ch;
    c.weights.resize(static_cast<size_t>(out_ch) * in_ch * 9);
    c.bias.resize(static_cast<size_t>(out_ch));
    init.fill(c.weights);
    init.fill(c.bias);
    return c;
}

} // namespace

EdgeAttentionParams seeded_edge_attention_params(std::uint64_t seed, int edge_channels,
                                                 int feature_channels, int branch_channels) {
    UniformInit init(seed);
    EdgeAttentionParams p;
    for (auto& b : p.branches) {
        b.input_proj = make_conv1x1(branch_channels, edge_channels, init);
        b.residual.conv_a = make_conv3x3(branch_channels, branch_channels, init);
        b.residual.conv_b = make_conv3x3(branch_channels, branch_channels, init);
        b.gated.gate = make_conv1x1(branch_channels, feature_channels, init);
        b.gated.channels = branch_channels;
        b.gated.channel_mix.resize(static_cast<size_t>(branch_channels) * branch_channels);
        init.fill(b.gated.channel_mix);
    }
    return p;
}

namespace {

struct TensorRef {
    std::string name;
    std::vector<size_t> shape;
    std::vector<double>* data;
};

std::vector<TensorRef> tensor_table(EdgeAttentionParams& p) {
    std::vector<TensorRef> refs;
    for (size_t k = 0; k < p.branches.size(); ++k) {
        auto& b = p.branches[k];
        const std::string prefix = "branch" + std::to_string(k) + ".";
        const auto oc = [](int v) { return static_cast<size_t>(v); };
        refs.push_back({prefix + "input_proj.weight",
                        {oc(b.input_proj.out_channels), oc(b.input_proj.in_channels)},
                        &b.input_proj.weights});
        refs.push_back({prefix + "input_proj.bias", {oc(b.input_proj.out_channels)}, &b.input_proj.bias});
        refs.push_back({prefix + "residual.conv_a.weight",
                        {oc(b.residual.conv_a.out_channels), oc(b.residual.conv_a.in_channels), 3, 3},
                        &b.residual.conv_a.weights});
        refs.push_back({prefix + "residual.conv_a.bias", {oc(b.residual.conv_a.out_channels)},
                        &b.residual.conv_a.bias});
        refs.push_back({prefix + "residual.conv_b.weight",
                        {oc(b.residual.conv_b.out_channels), oc(b.residual.conv_b.in_channels), 3, 3},
                        &b.residual.conv_b.weights});
        refs.push_back({prefix + "residual.conv_b.bias", {oc(b.residual.conv_b.out_channels)},
                        &b.residual.conv_b.bias});
        refs.push_back({prefix + "gate.weight", {oc(b.gated.gate.out_channels), oc(b.gated.gate.in_channels)},
                        &b.gated.gate.weights});
        refs.push_back({prefix + "gate.bias", {oc(b.gated.gate.out_channels)}, &b.gated.gate.bias});
        refs.push_back({prefix + "channel_mix", {oc(b.gated.channels), oc(b.gated.channels)},
                        &b.gated.channel_mix});
    }
    return refs;
}

} // namespace

void save_edge_attention_params(const EdgeAttentionParams& p, const std::string& manifest_path,
                                const std::string& blob_path) {
    EdgeAttentionParams copy = p;
    auto refs = tensor_table(copy);

    std::ofstream blob(blob_path, std::ios::binary);
    if (!blob) throw InvalidInput("params: cannot write " + blob_path);
    nlohmann::json tensors = nlohmann::json::array();
    size_t offset = 0;
    for (const auto& r : refs) {
        tensors.push_back({{"name", r.name}, {"shape", r.shape}, {"offset", offset}});
        blob.write(reinterpret_cast<const char*>(r.data->data()),
                   static_cast<std::streamsize>(r.data->size() * sizeof(double)));
        offset += r.data->size() * sizeof(double);
    }
    nlohmann::json manifest{{"dtype", "float64"}, {"data_file", blob_path}, {"tensors", tensors}};
    std::ofstream mf(manifest_path);
    if (!mf) throw InvalidInput("params: cannot write " + manifest_path);
    mf << manifest.dump(2) << "\n";
}

EdgeAttentionParams load_edge_attention_params(const std::string& manifest_path) {
    std::ifstream mf(manifest_path);
    if (!mf) throw InvalidInput("params: cannot open " + manifest_path);
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput(std::string("params manifest: ") + e.what());
    }
    if (manifest.value("dtype", "") != "float64")
        throw InvalidInput("params: unsupported dtype " + manifest.value("dtype", "<none>"));

    const std::string blob_path = manifest.at("data_file").get<std::string>();
    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) throw InvalidInput("params: cannot open blob " + blob_path);

    // Infer channel counts from the first branch's tensors, then validate the rest.
    auto find = [&](const std::string& name) -> nlohmann::json {
        for (const auto& t : manifest.at("tensors"))
            if (t.at("name") == name) return t;
        throw InvalidInput("params: missing tensor " + name);
    };
    const auto proj0 = find("branch0.input_proj.weight");
    const auto gate0 = find("branch0.gate.weight");
    const int branch_channels = proj0.at("shape")[0].get<int>();
    const int edge_channels = proj0.at("shape")[1].get<int>();
    const int feature_channels = gate0.at("shape")[1].get<int>();

    EdgeAttentionParams p = seeded_edge_attention_params(0, edge_channels, feature_channels, branch_channels);
    auto refs = tensor_table(p);
    for (auto& r : refs) {
        const auto t = find(r.name);
        size_t count = 1;
        for (const auto& d : t.at("shape")) count *= d.get<size_t>();
        if (count != r.data->size())
            throw InvalidInput("params: tensor " + r.name + " has unexpected shape");
        blob.seekg(static_cast<std::streamoff>(t.at("offset").get<size_t>()));
        blob.read(reinterpret_cast<char*>(r.data->data()),
                  static_cast<std::streamsize>(count * sizeof(double)));
        if (!blob) throw InvalidInput("params: blob truncated at tensor " + r.name);
    }
    return p;
}

BinaryMask edge_mask(const BinaryMask& mask, int band) {
    if (band < 1) throw InvalidInput("edge_mask: band must be >= 1");
    const auto se = StructuringElement::disk(band);
    return mask_diff(dilate(mask, se), erode(mask, se));
}

BinaryMask refine_mask_classical(const BinaryMask& coarse, int band) {
    if (band < 1) throw InvalidInput("refine_mask_classical: band must be >= 1");
    if (coarse.empty()) return coarse;
    const BinaryMask bandmask = edge_mask(coarse, band);
    BinaryMask smoothed = close(coarse, StructuringElement::disk(2));
    smoothed = threshold(gaussian5x5(to_gray(smoothed)), 0.5f);

    BinaryMask out = coarse;
    for (size_t i = 0; i < out.data.size(); ++i)
        if (bandmask.data[i]) out.data[i] = smoothed.data[i];
    return out;
}

RefineOutcome refine_mask_external(const BinaryMask& coarse, RefinementBackend& backend,
                                   const RefineOptions& options) {
    RefineOutcome outcome;
    try {
        BinaryMask result = backend.refine(coarse);
        if (result.width != coarse.width || result.height != coarse.height)
            throw ProtocolError("refinement backend returned " + std::to_string(result.width) + "x" +
                                std::to_string(result.height) + ", expected " +
                                std::to_string(coarse.width) + "x" + std::to_string(coarse.height));
        outcome.mask = std::move(result);
        return outcome;
    } catch (const ProtocolError&) {
        throw;
    } catch (const BackendError& e) {
        if (!options.fallback_to_classical) throw;
        outcome.mask = refine_mask_classical(coarse, options.band);
        outcome.used_fallback = true;
        outcome.warning = std::string("backend '") + backend.describe() +
                          "' failed, used classical refinement: " + e.what();
        return outcome;
    }
}

} // namespace vtsize
