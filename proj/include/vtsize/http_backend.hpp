#pragma once

#include <string>

#include "vtsize/edge_refine.hpp"
#include "vtsize/image.hpp"

namespace vtsize {

/// Split "http://host:port/path" into pieces; throws ConfigError on anything
/// it cannot serve (only plain http is supported).
struct ParsedUrl {
    std::string host;
    int port = 80;
    std::string path = "/";

    static ParsedUrl parse(const std::string& url);
};

/// Mask refinement over HTTP: POST the coarse mask as a PNG body, expect a
/// PNG mask of identical dimensions back.
class HttpRefinementBackend : public RefinementBackend {
public:
    explicit HttpRefinementBackend(std::string url, double timeout_s = 30.0);

    BinaryMask refine(const BinaryMask& coarse) override;
    std::string describe() const override;

private:
    std::string url_;
    double timeout_s_;
};

struct TryOnRequest {
    const RgbImage* person = nullptr;
    const BinaryMask* mask = nullptr;
    const RgbImage* garment = nullptr;
    int size_level = 1;
};

struct TryOnResult {
    RgbImage image;
    double latency_s = 0;
    std::string backend_id; // Server / X-Backend header when present
    int attempts = 1;
};

/// Try-on inference client: multipart POST (person, mask, garment PNG parts
/// plus a size field), PNG response, with bounded exponential-backoff retries.
class TryOnClient {
public:
    TryOnClient(std::string url, double timeout_s = 30.0, int attempts = 3, double backoff_s = 0.5);

    TryOnResult generate(const TryOnRequest& request);
    const std::string& url() const { return url_; }

private:
    std::string url_;
    double timeout_s_;
    int attempts_;
    double backoff_s_;
};

} // namespace vtsize
