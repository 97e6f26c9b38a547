#include <charconv>
#include <sstream>

#include "webverbs/runtime.hpp"

namespace webverbs::mockweb {

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> segs;
    std::string seg;
    std::istringstream ss(path);
    while (std::getline(ss, seg, '/')) segs.push_back(seg);
    return segs;
}

Value parse_display(const std::string& text, idl::ParseMode mode, const std::string& where) {
    switch (mode) {
        case idl::ParseMode::as_string:
            return Value::of_string(text);
        case idl::ParseMode::as_int: {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || p != text.data() + text.size())
                throw MockWebError(MockWebError::Kind::parse_error,
                                   "cannot parse '" + text + "' as_int at " + where);
            return Value::of_int(v);
        }
        case idl::ParseMode::as_money: {
            try {
                return parse_scalar(text, *TypeExpr::prim(TypeKind::t_money));
            } catch (const std::invalid_argument&) {
                throw MockWebError(MockWebError::Kind::parse_error,
                                   "cannot parse '" + text + "' as_money at " + where);
            }
        }
        case idl::ParseMode::as_distance: {
            try {
                return Value::of_int(idl::parse_distance_text(text));
            } catch (const std::invalid_argument&) {
                throw MockWebError(MockWebError::Kind::parse_error,
                                   "cannot parse '" + text + "' as_distance at " + where);
            }
        }
    }
    throw MockWebError(MockWebError::Kind::parse_error, "unhandled parse mode");
}

}  // namespace

std::optional<Value> SiteRuntime::act(const std::string& session, const std::string& site_id,
                                      const idl::ActionStep& step,
                                      const std::string& fill_value) {
    std::lock_guard<std::mutex> lock(mu_);
    Session& sess = session_or_throw(session);
    const SiteDefinition* site = pack_.find(site_id);
    if (!site)
        throw MockWebError(MockWebError::Kind::no_page, "unknown site '" + site_id + "'");
    SessionSiteState& st = sess.sites[site_id];
    BrowserState& b = st.browser;

    auto count_step = [&]() { sess.steps += 1; };

    if (step.op == idl::ActionStep::Op::navigate) {
        const PageTemplate* page = site->page(step.path);
        if (!page)
            throw MockWebError(MockWebError::Kind::no_page,
                               "site '" + site_id + "' has no page '" + step.path + "'");
        b = BrowserState{};
        b.page_path = page->path;
        count_step();
        return std::nullopt;
    }

    if (b.page_path.empty())
        throw MockWebError(MockWebError::Kind::illegal_action,
                           "no page loaded; scripts must navigate first");
    const PageTemplate* page = site->page(b.page_path);

    auto result_available = [&](const PageNode&) {
        return b.has_result &&
               (b.result_shape == ApiRoute::Shape::list || !b.result_fields.empty());
    };

    auto resolve = [&](const std::string& locator) -> const PageNode* {
        const PageNode* cur = &page->root;
        for (const auto& seg : split_path(locator)) {
            cur = cur->child(seg);
            if (!cur)
                throw MockWebError(MockWebError::Kind::locator_not_found,
                                   "locator not found on " + b.page_path + ": '" + locator + "'");
            if (cur->result_backed && !result_available(*cur))
                throw MockWebError(MockWebError::Kind::locator_not_found,
                                   "locator '" + locator + "' is not present (no results)");
        }
        return cur;
    };

    auto input_value = [&](const std::string& path, const char* what) -> std::string {
        auto it = b.inputs.find(path);
        if (it == b.inputs.end())
            throw MockWebError(MockWebError::Kind::illegal_action,
                               std::string(what) + " input not filled: '" + path + "'");
        return it->second;
    };

    switch (step.op) {
        case idl::ActionStep::Op::fill: {
            const PageNode* n = resolve(step.locator);
            if (n->kind != PageNode::Kind::text_input)
                throw MockWebError(MockWebError::Kind::illegal_action,
                                   "fill target '" + step.locator + "' is not a text input");
            b.inputs[step.locator] = fill_value;
            count_step();
            return std::nullopt;
        }
        case idl::ActionStep::Op::select_option: {
            const PageNode* n = resolve(step.locator);
            if (n->kind != PageNode::Kind::select_box)
                throw MockWebError(MockWebError::Kind::illegal_action,
                                   "select target '" + step.locator + "' is not a select");
            bool ok = false;
            for (const auto& o : n->options) ok = ok || o == fill_value;
            if (!ok)
                throw MockWebError(MockWebError::Kind::illegal_action,
                                   "option '" + fill_value + "' not offered by '" +
                                       step.locator + "'");
            b.inputs[step.locator] = fill_value;
            count_step();
            return std::nullopt;
        }
        case idl::ActionStep::Op::wait_for: {
            resolve(step.locator);
            count_step();
            return std::nullopt;
        }
        case idl::ActionStep::Op::click: {
            const PageNode* n = resolve(step.locator);
            if (n->kind != PageNode::Kind::button)
                throw MockWebError(MockWebError::Kind::illegal_action,
                                   "click target '" + step.locator + "' is not a button");
            const auto& a = n->action;
            if (a.kind == PageNode::Action::Kind::query) {
                ResolvedQuery q;
                q.catalog = a.catalog;
                for (const auto& f : a.filters)
                    q.filters.push_back({f.field, input_value(f.input, "filter"), f.substring});
                q.sort_field = a.sort_field;
                q.sort_desc = a.sort_desc;
                if (!a.sort_from.empty()) {
                    std::string sv = input_value(a.sort_from, "sort");
                    auto us = sv.rfind('_');
                    std::string dir = us == std::string::npos ? "" : sv.substr(us + 1);
                    if (dir != "asc" && dir != "desc")
                        throw MockWebError(MockWebError::Kind::illegal_action,
                                           "sort option must end in _asc or _desc: '" + sv + "'");
                    q.sort_field = sv.substr(0, us);
                    q.sort_desc = dir == "desc";
                }
                if (!a.limit_from.empty()) {
                    std::string lv = input_value(a.limit_from, "limit");
                    std::int64_t lim = 0;
                    auto [p, ec] = std::from_chars(lv.data(), lv.data() + lv.size(), lim);
                    if (ec != std::errc() || p != lv.data() + lv.size() || lim < 0)
                        throw MockWebError(MockWebError::Kind::illegal_action,
                                           "bad limit '" + lv + "'");
                    q.limit = lim;
                }
                std::optional<QueryError> qerr;
                std::vector<Value> rows = run_query(*site, q, qerr);
                if (qerr)
                    throw MockWebError(MockWebError::Kind::illegal_action, qerr->message);
                b.has_result = true;
                b.result_shape = a.shape;
                b.result_fields.clear();
                b.result_rows.clear();
                if (a.shape == ApiRoute::Shape::single) {
                    if (!rows.empty())
                        for (const auto& [fn, fv] : rows.front().record->fields)
                            b.result_fields[fn] = fv;
                } else {
                    b.result_rows = std::move(rows);
                }
            } else if (a.kind == PageNode::Action::Kind::cart_add) {
                std::string product = input_value(a.product_from, "product");
                std::string qtext = input_value(a.quantity_from, "quantity");
                std::int64_t qty = 0;
                auto [p, ec] = std::from_chars(qtext.data(), qtext.data() + qtext.size(), qty);
                if (ec != std::errc() || p != qtext.data() + qtext.size())
                    throw MockWebError(MockWebError::Kind::illegal_action,
                                       "quantity must be an integer: '" + qtext + "'");
                std::string error;
                auto sum = cart_add(*site, st, product, qty, error);
                if (!sum) throw MockWebError(MockWebError::Kind::illegal_action, error);
                b.has_result = true;
                b.result_shape = ApiRoute::Shape::single;
                b.result_rows.clear();
                b.result_fields = {{"item_count", Value::of_int(sum->item_count)},
                                   {"total", Value::of_money(sum->total.amount_minor,
                                                             sum->total.currency)}};
            } else if (a.kind == PageNode::Action::Kind::cart_view) {
                if (!site->cart)
                    throw MockWebError(MockWebError::Kind::illegal_action, "site has no cart");
                CartSummary sum = cart_summary(*site, st);
                b.has_result = true;
                b.result_shape = ApiRoute::Shape::single;
                b.result_rows.clear();
                b.result_fields = {{"item_count", Value::of_int(sum.item_count)},
                                   {"total", Value::of_money(sum.total.amount_minor,
                                                             sum.total.currency)}};
            } else if (a.kind == PageNode::Action::Kind::checkout) {
                if (!site->cart)
                    throw MockWebError(MockWebError::Kind::illegal_action, "site has no cart");
                if (st.cart.empty())
                    throw MockWebError(MockWebError::Kind::illegal_action, "cart is empty");
                CartSummary sum = cart_summary(*site, st);
                std::int64_t order_id = ++st.orders_placed;
                st.cart.clear();
                b.has_result = true;
                b.result_shape = ApiRoute::Shape::single;
                b.result_rows.clear();
                b.result_fields = {{"order_id", Value::of_int(order_id)},
                                   {"item_count", Value::of_int(sum.item_count)},
                                   {"total", Value::of_money(sum.total.amount_minor,
                                                             sum.total.currency)}};
            } else {
                throw MockWebError(MockWebError::Kind::illegal_action, "button has no action");
            }
            count_step();
            return std::nullopt;
        }
        case idl::ActionStep::Op::read: {
            const PageNode* n = resolve(step.locator);
            if (n->kind != PageNode::Kind::text)
                throw MockWebError(MockWebError::Kind::illegal_action,
                                   "read target '" + step.locator + "' is not a text node");
            std::string text;
            if (!n->bind.empty()) {
                auto it = b.result_fields.find(n->bind);
                if (it == b.result_fields.end())
                    throw MockWebError(MockWebError::Kind::locator_not_found,
                                       "no result value behind '" + step.locator + "'");
                text = display_text(it->second);
            } else {
                text = n->static_text;
            }
            Value v = parse_display(text, step.parse, step.locator);
            count_step();
            return v;
        }
        case idl::ActionStep::Op::read_list: {
            const PageNode* n = resolve(step.locator);
            if (n->kind != PageNode::Kind::list_region)
                throw MockWebError(MockWebError::Kind::illegal_action,
                                   "read_list target '" + step.locator + "' is not a list");
            if (n->children.empty())
                throw MockWebError(MockWebError::Kind::illegal_action,
                                   "list '" + step.locator + "' has no item template");
            const PageNode& tmpl = n->children.front();

            std::vector<Value> rows;
            if (!n->bind.empty()) {
                auto it = b.result_fields.find(n->bind);
                if (it == b.result_fields.end())
                    throw MockWebError(MockWebError::Kind::locator_not_found,
                                       "no result value behind '" + step.locator + "'");
                if (it->second.kind != Value::Kind::v_list)
                    throw MockWebError(MockWebError::Kind::illegal_action,
                                       "bound field '" + n->bind + "' is not a list");
                rows = *it->second.list;
            } else {
                rows = b.result_rows;
            }

            auto template_node = [&](const std::string& spl) -> const PageNode* {
                if (spl.empty()) return &tmpl;
                const PageNode* cur = &tmpl;
                for (const auto& seg : split_path(spl)) {
                    cur = cur->child(seg);
                    if (!cur)
                        throw MockWebError(MockWebError::Kind::locator_not_found,
                                           "row template of '" + step.locator +
                                               "' has no node '" + spl + "'");
                }
                return cur;
            };
            auto row_value = [&](const Value& row, const PageNode* tn) -> const Value& {
                if (tn->bind.empty()) return row;
                if (row.kind != Value::Kind::v_record)
                    throw MockWebError(MockWebError::Kind::illegal_action,
                                       "row is not a record; template binds '" + tn->bind + "'");
                const Value* v = row.field(tn->bind);
                if (!v)
                    throw MockWebError(MockWebError::Kind::illegal_action,
                                       "row has no field '" + tn->bind + "'");
                return *v;
            };

            std::vector<Value> out;
            if (step.item) {
                const PageNode* tn = template_node(step.item->spl);
                for (const auto& row : rows)
                    out.push_back(parse_display(display_text(row_value(row, tn)),
                                                step.item->parse, step.locator));
            } else {
                for (const auto& row : rows) {
                    std::vector<std::pair<std::string, Value>> fields;
                    for (const auto& f : step.item_fields) {
                        const PageNode* tn = template_node(f.spl);
                        fields.emplace_back(
                            f.field, parse_display(display_text(row_value(row, tn)), f.parse,
                                                   step.locator + "/" + f.spl));
                    }
                    out.push_back(Value::of_record(std::move(fields)));
                }
            }
            count_step();
            return Value::of_list(std::move(out));
        }
        default:
            throw MockWebError(MockWebError::Kind::illegal_action, "unhandled action op");
    }
}

}  // namespace webverbs::mockweb
