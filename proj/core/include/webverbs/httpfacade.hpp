#pragma once

#include <memory>
#include <string>

#include "webverbs/runtime.hpp"

namespace webverbs::mockweb {

// HTTP/1.1 JSON facade over a SiteRuntime: routes are
// /<site_id>/<route path>, plus POST /<site_id>/session. Serves on a
// background thread; content-type application/json, status 200/400/404.
class HttpFacade {
public:
    explicit HttpFacade(SiteRuntime& runtime);
    ~HttpFacade();

    HttpFacade(const HttpFacade&) = delete;
    HttpFacade& operator=(const HttpFacade&) = delete;

    // Binds 127.0.0.1:port; port 0 picks a free port. False if binding fails.
    bool start(int port);
    void stop();

    int port() const;
    std::string base_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace webverbs::mockweb
