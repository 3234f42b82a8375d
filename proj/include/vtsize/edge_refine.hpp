#pragma once

#include <array>
#include <string>
#include <vector>

#include "vtsize/image.hpp"

namespace vtsize {

/// Channel-major (c, y, x) feature tensor.
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int c, int h, int w, double fill = 0.0)
        : channels(c), height(h), width(w),
          data(static_cast<size_t>(c) * h * w, fill) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }

    size_t plane() const { return static_cast<size_t>(height) * width; }
};

/// 1x1 convolution: per-pixel linear map across channels.
struct Conv1x1 {
    int out_channels = 0;
    int in_channels = 0;
    std::vector<double> weights; // [out][in]
    std::vector<double> bias;    // [out]
};

/// 3x3 convolution with zero padding (spatial size preserved).
struct Conv3x3 {
    int out_channels = 0;
    int in_channels = 0;
    std::vector<double> weights; // [out][in][3][3]
    std::vector<double> bias;    // [out]
};

/// Parameters of one gated convolution block: the gating 1x1 convolution and
/// the per-pixel channel-mixing matrix W (square, side = channel count).
struct GatedConvParams {
    Conv1x1 gate;
    std::vector<double> channel_mix; // [out][in], square
    int channels = 0;
};

/// conv3x3 -> rectifier -> conv3x3, plus identity skip.
struct ResidualBlockParams {
    Conv3x3 conv_a;
    Conv3x3 conv_b;
};

struct BranchParams {
    Conv1x1 input_proj;
    ResidualBlockParams residual;
    GatedConvParams gated;
};

/// Four parallel branches over the same input; branch outputs are summed.
struct EdgeAttentionParams {
    std::array<BranchParams, 4> branches;
};

FeatureMap conv1x1_forward(const FeatureMap& in, const Conv1x1& p);
FeatureMap conv3x3_forward(const FeatureMap& in, const Conv3x3& p);

/// out = channel_mix * (ei (.) sigmoid(conv1x1(fi)) + ei), per pixel.
FeatureMap gated_conv_forward(const FeatureMap& ei, const FeatureMap& fi, const GatedConvParams& p);

/// Sum over the four branches of gated_conv(residual(conv1x1(ei)), fi).
FeatureMap edge_attention_forward(const FeatureMap& ei, const FeatureMap& fi,
                                  const EdgeAttentionParams& p);

/// Gradients of a scalar loss through edge_attention_forward, given dL/d_out.
/// `params` holds the parameter gradients in the same layout as the inputs.
struct EdgeAttentionGradients {
    EdgeAttentionParams params;
    FeatureMap d_edge_input;
    FeatureMap d_feature_input;
};

EdgeAttentionGradients edge_attention_backward(const FeatureMap& ei, const FeatureMap& fi,
                                               const EdgeAttentionParams& p, const FeatureMap& d_out);

/// Deterministic uniform [-0.1, 0.1] initialization (portable across
/// platforms for a given seed); used for tests and as a placeholder when no
/// trained container is supplied.
EdgeAttentionParams seeded_edge_attention_params(std::uint64_t seed, int edge_channels,
                                                 int feature_channels, int branch_channels);

/// Flat binary tensor container: a JSON manifest (name/shape/offset, dtype
/// float64 little-endian) next to a raw blob.
void save_edge_attention_params(const EdgeAttentionParams& p, const std::string& manifest_path,
                                const std::string& blob_path);
EdgeAttentionParams load_edge_attention_params(const std::string& manifest_path);

/// Morphological gradient band around the mask boundary:
/// dilate(mask, disk(band)) minus erode(mask, disk(band)).
BinaryMask edge_mask(const BinaryMask& mask, int band);

/// Classical edge smoothing standing in for the learned refinement path:
/// inside the edge band apply close(disk 2), Gaussian smoothing and a 0.5
/// re-threshold; every pixel outside the band is bit-identical to the input.
BinaryMask refine_mask_classical(const BinaryMask& coarse, int band = 7);

/// Adapter slot for an external refinement service.
class RefinementBackend {
public:
    virtual ~RefinementBackend() = default;
    /// Returns the refined mask; throws BackendError on transport failure.
    virtual BinaryMask refine(const BinaryMask& coarse) = 0;
    virtual std::string describe() const = 0;
};

struct RefineOptions {
    int band = 7;
    bool fallback_to_classical = true;
};

struct RefineOutcome {
    BinaryMask mask;
    bool used_fallback = false;
    std::string warning; // set when the fallback path was taken
};

/// Delegate refinement to `backend`. A response of mismatched dimensions is a
/// ProtocolError; transport failures fall back to refine_mask_classical when
/// enabled, otherwise rethrow.
RefineOutcome refine_mask_external(const BinaryMask& coarse, RefinementBackend& backend,
                                   const RefineOptions& options = {});

} // namespace vtsize
