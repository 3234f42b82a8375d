#include "vtsize/http_backend.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "vtsize/png_io.hpp"

namespace vtsize {

ParsedUrl ParsedUrl::parse(const std::string& url) {
    ParsedUrl out;
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0)
        throw ConfigError("url: only http:// backends are supported, got '" + url + "'");
    std::string rest = url.substr(scheme.size());
    const auto slash = rest.find('/');
    if (slash != std::string::npos) {
        out.path = rest.substr(slash);
        rest = rest.substr(0, slash);
    }
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
        out.host = rest.substr(0, colon);
        try {
            out.port = std::stoi(rest.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("url: bad port in '" + url + "'");
        }
    } else {
        out.host = rest;
    }
    if (out.host.empty()) throw ConfigError("url: missing host in '" + url + "'");
    return out;
}

namespace {

httplib::Client make_client(const ParsedUrl& u, double timeout_s) {
    httplib::Client client(u.host, u.port);
    const auto sec = static_cast<time_t>(timeout_s);
    const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    return client;
}

} // namespace

HttpRefinementBackend::HttpRefinementBackend(std::string url, double timeout_s)
    : url_(std::move(url)), timeout_s_(timeout_s) {
    ParsedUrl::parse(url_); // validate eagerly
}

BinaryMask HttpRefinementBackend::refine(const BinaryMask& coarse) {
    const ParsedUrl u = ParsedUrl::parse(url_);
    auto client = make_client(u, timeout_s_);
    const std::string body = encode_mask_png(coarse);
    auto res = client.Post(u.path, body, "image/png");
    if (!res)
        throw BackendError("refinement backend " + url_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw BackendError("refinement backend " + url_ + ": HTTP " + std::to_string(res->status));
    try {
        return decode_mask_png(res->body);
    } catch (const Error& e) {
        throw BackendError("refinement backend " + url_ + ": malformed response: " + e.what());
    }
}

std::string HttpRefinementBackend::describe() const { return url_; }

TryOnClient::TryOnClient(std::string url, double timeout_s, int attempts, double backoff_s)
    : url_(std::move(url)), timeout_s_(timeout_s), attempts_(attempts), backoff_s_(backoff_s) {
    ParsedUrl::parse(url_);
    if (attempts_ < 1) throw ConfigError("tryon client: attempts must be >= 1");
}

TryOnResult TryOnClient::generate(const TryOnRequest& request) {
    if (!request.person || !request.mask || !request.garment)
        throw InvalidInput("tryon client: person, mask and garment are all required");

    const ParsedUrl u = ParsedUrl::parse(url_);
    httplib::MultipartFormDataItems parts{
        {"person", encode_rgb_png(*request.person), "person.png", "image/png"},
        {"mask", encode_mask_png(*request.mask), "mask.png", "image/png"},
        {"garment", encode_rgb_png(*request.garment), "garment.png", "image/png"},
        {"size", "A" + std::to_string(request.size_level), "", "text/plain"},
    };

    std::string last_error;
    for (int attempt = 1; attempt <= attempts_; ++attempt) {
        const auto t0 = std::chrono::steady_clock::now();
        auto client = make_client(u, timeout_s_);
        auto res = client.Post(u.path, parts);
        const auto t1 = std::chrono::steady_clock::now();
        if (res && res->status == 200) {
            TryOnResult out;
            try {
                out.image = decode_rgb_png(res->body);
            } catch (const Error& e) {
                throw BackendError("tryon backend " + url_ + ": malformed response: " + e.what());
            }
            out.latency_s = std::chrono::duration<double>(t1 - t0).count();
            out.backend_id = res->has_header("X-Backend") ? res->get_header_value("X-Backend")
                                                          : res->get_header_value("Server");
            out.attempts = attempt;
            return out;
        }
        last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
        if (attempt < attempts_) {
            const double delay = backoff_s_ * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
    }
    throw BackendError("tryon backend " + url_ + ": " + last_error + " after " +
                       std::to_string(attempts_) + " attempts");
}

} // namespace vtsize
