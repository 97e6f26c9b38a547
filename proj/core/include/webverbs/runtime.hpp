#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "webverbs/manifest.hpp"
#include "webverbs/mockweb.hpp"

namespace webverbs::mockweb {

class MockWebError : public std::runtime_error {
public:
    enum class Kind { locator_not_found, parse_error, illegal_action, no_page };

    MockWebError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct ApiResponse {
    int status = 200;
    std::string body;  // JSON text
};

// Mutable side of the mock web: sessions, carts, browser page state. One
// instance backs both the HTTP facade and in-process page sessions, so API
// and browser bindings act on the same ground truth. Mutations are
// serialized by an internal mutex.
class SiteRuntime {
public:
    explicit SiteRuntime(const SitePack& pack) : pack_(pack) {}

    const SitePack& pack() const { return pack_; }

    std::string create_session();
    bool has_session(const std::string& session) const;

    // The HTTP facade and the in-process API transport both land here.
    // `params` merges query parameters and stringified JSON body fields.
    ApiResponse api_call(const std::string& site_id, const std::string& method,
                         const std::string& path,
                         const std::map<std::string, std::string>& params,
                         const std::string& session);

    // Browser page machine. `fill_value` carries the resolved text for
    // fill/select steps. Returns the captured value for read/read_list.
    // Throws MockWebError; a throwing step is not counted as executed.
    std::optional<Value> act(const std::string& session, const std::string& site_id,
                             const idl::ActionStep& step, const std::string& fill_value = "");

    // Executed-step counter for one session (all sites), for step-accounting
    // checks.
    std::int64_t steps_executed(const std::string& session) const;

private:
    struct CartItem {
        std::string product;
        std::int64_t quantity = 0;
    };

    struct BrowserState {
        std::string page_path;
        std::map<std::string, std::string> inputs;  // locator path -> text
        bool has_result = false;
        ApiRoute::Shape result_shape = ApiRoute::Shape::list;
        std::map<std::string, Value> result_fields;  // single/cart results
        std::vector<Value> result_rows;              // list results
    };

    struct SessionSiteState {
        std::vector<CartItem> cart;
        std::int64_t orders_placed = 0;
        BrowserState browser;
    };

    struct Session {
        std::map<std::string, SessionSiteState> sites;
        std::int64_t steps = 0;
    };

    struct CartSummary {
        std::int64_t item_count = 0;
        Money total;
    };

    Session& session_or_throw(const std::string& session);
    CartSummary cart_summary(const SiteDefinition& site, const SessionSiteState& st) const;
    // Returns nullopt and fills `error` on bad input (unknown product, bad qty).
    std::optional<CartSummary> cart_add(const SiteDefinition& site, SessionSiteState& st,
                                        const std::string& product, std::int64_t qty,
                                        std::string& error);

    const SitePack& pack_;
    mutable std::mutex mu_;
    std::map<std::string, Session> sessions_;
    std::int64_t next_session_ = 0;
};

}  // namespace webverbs::mockweb
