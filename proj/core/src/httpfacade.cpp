#include "webverbs/httpfacade.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace webverbs::mockweb {

using nlohmann::json;

struct HttpFacade::Impl {
    SiteRuntime& runtime;
    httplib::Server server;
    std::thread thread;
    std::atomic<int> port{0};

    explicit Impl(SiteRuntime& rt) : runtime(rt) {}

    void handle(const httplib::Request& req, httplib::Response& res, const std::string& method) {
        // Path: /<site_id>/<rest...>
        std::string path = req.path;
        auto second_slash = path.find('/', 1);
        if (path.size() < 2 || path[0] != '/' || second_slash == std::string::npos) {
            res.status = 404;
            res.set_content(json{{"error", "expected /<site>/<route>"}}.dump(),
                            "application/json");
            return;
        }
        std::string site = path.substr(1, second_slash - 1);
        std::string route = path.substr(second_slash);

        std::map<std::string, std::string> params;
        for (const auto& [k, v] : req.params) params[k] = v;
        if (method == "POST" && !req.body.empty()) {
            json body = json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) {
                res.status = 400;
                res.set_content(json{{"error", "body must be a JSON object"}}.dump(),
                                "application/json");
                return;
            }
            for (const auto& [k, v] : body.items()) {
                if (v.is_string())
                    params[k] = v.get<std::string>();
                else if (v.is_number_integer())
                    params[k] = std::to_string(v.get<std::int64_t>());
                else if (v.is_boolean())
                    params[k] = v.get<bool>() ? "true" : "false";
                else {
                    res.status = 400;
                    res.set_content(
                        json{{"error", "body field '" + k + "' must be a scalar"}}.dump(),
                        "application/json");
                    return;
                }
            }
        }
        std::string session;
        auto sit = params.find("session");
        if (sit != params.end()) session = sit->second;

        ApiResponse out = runtime.api_call(site, method, route, params, session);
        res.status = out.status;
        res.set_content(out.body, "application/json");
    }
};

HttpFacade::HttpFacade(SiteRuntime& runtime) : impl_(std::make_unique<Impl>(runtime)) {
    impl_->server.Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
        impl_->handle(req, res, "GET");
    });
    impl_->server.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
        impl_->handle(req, res, "POST");
    });
}

HttpFacade::~HttpFacade() { stop(); }

bool HttpFacade::start(int port) {
    if (port == 0) {
        int bound = impl_->server.bind_to_any_port("127.0.0.1");
        if (bound <= 0) return false;
        impl_->port = bound;
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port)) return false;
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return true;
}

void HttpFacade::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

int HttpFacade::port() const { return impl_->port.load(); }

std::string HttpFacade::base_url() const {
    return "http://127.0.0.1:" + std::to_string(port());
}

}  // namespace webverbs::mockweb
