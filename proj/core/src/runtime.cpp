#include "webverbs/runtime.hpp"

#include <charconv>

#include <nlohmann/json.hpp>

namespace webverbs::mockweb {

using nlohmann::json;

namespace {

json error_doc(const std::string& message) { return json{{"error", message}}; }

json value_to_response_json(const Value& v) {
    switch (v.kind) {
        case Value::Kind::v_int: return v.i;
        case Value::Kind::v_float: return v.f;
        case Value::Kind::v_bool: return v.b;
        case Value::Kind::v_string: return v.s;
        case Value::Kind::v_money:
            return json{{"amount_minor", v.money.amount_minor}, {"currency", v.money.currency}};
        case Value::Kind::v_list: {
            json arr = json::array();
            for (const auto& e : *v.list) arr.push_back(value_to_response_json(e));
            return arr;
        }
        default:
            return nullptr;
    }
}

json project_row(const Value& row, const std::vector<std::string>& fields) {
    json obj = json::object();
    for (const auto& f : fields) {
        const Value* v = row.field(f);
        obj[f] = v ? value_to_response_json(*v) : json(nullptr);
    }
    return obj;
}

json money_json(const Money& m) {
    return json{{"amount_minor", m.amount_minor}, {"currency", m.currency}};
}

}  // namespace

std::string SiteRuntime::create_session() {
    std::lock_guard<std::mutex> lock(mu_);
    std::string id = "s-" + std::to_string(++next_session_);
    sessions_[id];
    return id;
}

bool SiteRuntime::has_session(const std::string& session) const {
    std::lock_guard<std::mutex> lock(mu_);
    return sessions_.count(session) > 0;
}

SiteRuntime::Session& SiteRuntime::session_or_throw(const std::string& session) {
    auto it = sessions_.find(session);
    if (it == sessions_.end())
        throw MockWebError(MockWebError::Kind::illegal_action, "unknown session '" + session + "'");
    return it->second;
}

SiteRuntime::CartSummary SiteRuntime::cart_summary(const SiteDefinition& site,
                                                   const SessionSiteState& st) const {
    CartSummary sum;
    const Catalog* cat = site.catalog(site.cart->catalog);
    std::string currency = "USD";
    // Single-currency catalogs are enforced at load time.
    for (const auto& row : cat->rows)
        if (const Value* p = row.field(site.cart->price_field)) currency = p->money.currency;
    sum.total = Money{0, currency};
    for (const auto& item : st.cart) {
        sum.item_count += item.quantity;
        for (const auto& row : cat->rows) {
            if (row.field(site.cart->key_field)->s == item.product) {
                sum.total.amount_minor +=
                    row.field(site.cart->price_field)->money.amount_minor * item.quantity;
                break;
            }
        }
    }
    return sum;
}

std::optional<SiteRuntime::CartSummary> SiteRuntime::cart_add(const SiteDefinition& site,
                                                              SessionSiteState& st,
                                                              const std::string& product,
                                                              std::int64_t qty,
                                                              std::string& error) {
    if (!site.cart) {
        error = "site has no cart";
        return std::nullopt;
    }
    if (qty < 1) {
        error = "quantity must be >= 1";
        return std::nullopt;
    }
    const Catalog* cat = site.catalog(site.cart->catalog);
    bool found = false;
    for (const auto& row : cat->rows)
        if (row.field(site.cart->key_field)->s == product) found = true;
    if (!found) {
        error = "unknown product '" + product + "'";
        return std::nullopt;
    }
    for (auto& item : st.cart) {
        if (item.product == product) {
            item.quantity += qty;
            return cart_summary(site, st);
        }
    }
    st.cart.push_back({product, qty});
    return cart_summary(site, st);
}

ApiResponse SiteRuntime::api_call(const std::string& site_id, const std::string& method,
                                  const std::string& path,
                                  const std::map<std::string, std::string>& params,
                                  const std::string& session) {
    std::lock_guard<std::mutex> lock(mu_);

    if (path == "/session" && method == "POST") {
        std::string id = "s-" + std::to_string(++next_session_);
        sessions_[id];
        return {200, json{{"session", id}}.dump()};
    }

    const SiteDefinition* site = pack_.find(site_id);
    if (!site) return {404, error_doc("unknown site '" + site_id + "'").dump()};
    const ApiRoute* route = site->route(method, path);
    if (!route) return {404, error_doc("route not found: " + method + " " + path).dump()};

    if (route->kind == ApiRoute::Kind::query) {
        ResolvedQuery q;
        q.catalog = route->catalog;
        for (const auto& f : route->filters) {
            auto it = params.find(f.param);
            if (it == params.end())
                return {400, error_doc("missing parameter '" + f.param + "'").dump()};
            q.filters.push_back({f.field, it->second, f.substring});
        }
        q.sort_field = route->sort_field;
        q.sort_desc = route->sort_desc;
        if (!route->limit_param.empty()) {
            auto it = params.find(route->limit_param);
            if (it != params.end()) {
                std::int64_t lim = 0;
                auto [p, ec] = std::from_chars(it->second.data(),
                                               it->second.data() + it->second.size(), lim);
                if (ec != std::errc() || p != it->second.data() + it->second.size() || lim < 0)
                    return {400, error_doc("bad limit '" + it->second + "'").dump()};
                q.limit = lim;
            }
        }
        std::optional<QueryError> qerr;
        std::vector<Value> rows = run_query(*site, q, qerr);
        if (qerr) return {400, error_doc(qerr->message).dump()};

        if (route->shape == ApiRoute::Shape::single) {
            if (rows.empty()) return {404, error_doc("no match").dump()};
            return {200, project_row(rows.front(), route->fields).dump()};
        }
        json items = json::array();
        for (const auto& row : rows) items.push_back(project_row(row, route->fields));
        return {200, json{{"items", items}}.dump()};
    }

    // Cart routes need a session.
    auto sit = sessions_.find(session);
    if (session.empty() || sit == sessions_.end())
        return {400, error_doc("missing or unknown session").dump()};
    SessionSiteState& st = sit->second.sites[site_id];

    switch (route->kind) {
        case ApiRoute::Kind::cart_add: {
            auto p = params.find("product_name");
            auto qp = params.find("quantity");
            if (p == params.end() || qp == params.end())
                return {400, error_doc("cart_add needs product_name and quantity").dump()};
            std::int64_t qty = 0;
            auto [ptr, ec] =
                std::from_chars(qp->second.data(), qp->second.data() + qp->second.size(), qty);
            if (ec != std::errc() || ptr != qp->second.data() + qp->second.size())
                return {400, error_doc("quantity must be an integer").dump()};
            std::string error;
            auto sum = cart_add(*site, st, p->second, qty, error);
            if (!sum) return {400, error_doc(error).dump()};
            return {200,
                    json{{"item_count", sum->item_count}, {"total", money_json(sum->total)}}
                        .dump()};
        }
        case ApiRoute::Kind::cart_view: {
            if (!site->cart) return {400, error_doc("site has no cart").dump()};
            CartSummary sum = cart_summary(*site, st);
            return {200,
                    json{{"item_count", sum.item_count}, {"total", money_json(sum.total)}}
                        .dump()};
        }
        case ApiRoute::Kind::checkout: {
            if (!site->cart) return {400, error_doc("site has no cart").dump()};
            if (st.cart.empty()) return {400, error_doc("cart is empty").dump()};
            CartSummary sum = cart_summary(*site, st);
            std::int64_t order_id = ++st.orders_placed;
            st.cart.clear();
            return {200, json{{"order_id", order_id},
                              {"item_count", sum.item_count},
                              {"total", money_json(sum.total)}}
                             .dump()};
        }
        default:
            return {400, error_doc("unhandled route kind").dump()};
    }
}

std::int64_t SiteRuntime::steps_executed(const std::string& session) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sessions_.find(session);
    return it == sessions_.end() ? 0 : it->second.steps;
}

}  // namespace webverbs::mockweb
