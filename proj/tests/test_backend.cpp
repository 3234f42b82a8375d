#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "testutil.hpp"
#include "vtsize/edge_refine.hpp"
#include "vtsize/http_backend.hpp"
#include "vtsize/png_io.hpp"

using namespace vtsize;
using testutil::rect_mask;

namespace {

// In-process stub server bound to an ephemeral port.
struct StubServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit StubServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }

    ~StubServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

} // namespace

TEST_CASE("url parsing") {
    auto u = ParsedUrl::parse("http://example.test:8042/refine");
    CHECK(u.host == "example.test");
    CHECK(u.port == 8042);
    CHECK(u.path == "/refine");
    auto d = ParsedUrl::parse("http://host");
    CHECK(d.port == 80);
    CHECK(d.path == "/");
    CHECK_THROWS_AS(ParsedUrl::parse("ftp://x"), ConfigError);
    CHECK_THROWS_AS(ParsedUrl::parse("http://:80/x"), ConfigError);
    CHECK_THROWS_AS(ParsedUrl::parse("http://h:banana/x"), ConfigError);
}

TEST_CASE("refinement backend: echo server round trip") {
    StubServer stub;
    stub.server.Post("/refine", [](const httplib::Request& req, httplib::Response& res) {
        // echo the posted mask back
        res.set_content(req.body, "image/png");
    });
    stub.start();

    auto mask = rect_mask(40, 30, 5, 5, 30, 20);
    HttpRefinementBackend backend(stub.url("/refine"), 5.0);
    auto outcome = refine_mask_external(mask, backend);
    CHECK(outcome.mask == mask);
    CHECK_FALSE(outcome.used_fallback);
}

TEST_CASE("refinement backend: wrong-size response is a protocol error") {
    StubServer stub;
    stub.server.Post("/refine", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(encode_mask_png(BinaryMask(7, 7, 1)), "image/png");
    });
    stub.start();

    auto mask = rect_mask(40, 30, 5, 5, 30, 20);
    HttpRefinementBackend backend(stub.url("/refine"), 5.0);
    CHECK_THROWS_AS(refine_mask_external(mask, backend), ProtocolError);
}

TEST_CASE("refinement backend: garbage body is a backend error, fallback applies") {
    StubServer stub;
    stub.server.Post("/refine", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("definitely not a png", "text/plain");
    });
    stub.start();

    auto mask = rect_mask(40, 30, 5, 5, 30, 20);
    HttpRefinementBackend backend(stub.url("/refine"), 5.0);
    RefineOptions opts;
    opts.band = 3;
    auto outcome = refine_mask_external(mask, backend, opts);
    CHECK(outcome.used_fallback);
    CHECK(outcome.mask == refine_mask_classical(mask, 3));
    CHECK(outcome.warning.find("refinement backend") != std::string::npos);
}

TEST_CASE("refinement backend: unreachable server falls back with a warning") {
    auto mask = rect_mask(30, 30, 5, 5, 20, 20);
    HttpRefinementBackend backend("http://127.0.0.1:1/refine", 0.2);
    auto outcome = refine_mask_external(mask, backend);
    CHECK(outcome.used_fallback);
    CHECK_FALSE(outcome.warning.empty());

    RefineOptions opts;
    opts.fallback_to_classical = false;
    CHECK_THROWS_AS(refine_mask_external(mask, backend, opts), BackendError);
}

TEST_CASE("tryon client: multipart request and png response") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Post("/tryon", [&hits](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        REQUIRE(req.has_file("person"));
        REQUIRE(req.has_file("mask"));
        REQUIRE(req.has_file("garment"));
        CHECK(req.get_file_value("person").content_type == "image/png");
        CHECK(req.get_file_value("size").content == "A2");
        // respond with the garment part itself
        res.set_header("X-Backend", "stub-diffusion-0");
        res.set_content(req.get_file_value("garment").content, "image/png");
    });
    stub.start();

    RgbImage person(24, 32, 0.5f, 0.5f, 0.5f);
    RgbImage garment(24, 32, 0.9f, 0.1f, 0.1f);
    auto mask = rect_mask(24, 32, 2, 2, 20, 28);

    TryOnClient client(stub.url("/tryon"), 5.0, 3, 0.01);
    TryOnRequest request{&person, &mask, &garment, 2};
    auto result = client.generate(request);
    CHECK(hits == 1);
    CHECK(result.attempts == 1);
    CHECK(result.backend_id == "stub-diffusion-0");
    CHECK(result.image.width == 24);
    // the upload is 8-bit quantized, so compare against the quantized values
    for (size_t i = 0; i < result.image.data.size(); ++i) {
        const float expected = std::lround(garment.data[i] * 255.0f) / 255.0f;
        CHECK(result.image.data[i] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("tryon client: retries with backoff then succeeds") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Post("/tryon", [&hits](const httplib::Request& req, httplib::Response& res) {
        if (++hits < 3) {
            res.status = 503;
            return;
        }
        res.set_content(req.get_file_value("garment").content, "image/png");
    });
    stub.start();

    RgbImage person(8, 8, 0.2f, 0.2f, 0.2f);
    RgbImage garment(8, 8, 0.7f, 0.7f, 0.2f);
    auto mask = rect_mask(8, 8, 1, 1, 6, 6);
    TryOnClient client(stub.url("/tryon"), 5.0, 3, 0.01);
    auto result = client.generate({&person, &mask, &garment, 1});
    CHECK(hits == 3);
    CHECK(result.attempts == 3);
}

TEST_CASE("tryon client: unreachable backend fails after all attempts") {
    RgbImage person(8, 8), garment(8, 8);
    auto mask = rect_mask(8, 8, 1, 1, 6, 6);
    TryOnClient client("http://127.0.0.1:1/tryon", 0.2, 3, 0.01);
    try {
        client.generate({&person, &mask, &garment, 1});
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
    }
}
