#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "webverbs/jsonpos.hpp"
#include "webverbs/manifest.hpp"
#include "webverbs/mockweb.hpp"
#include "webverbs/parser.hpp"

namespace webverbs::mockweb {

using jsonpos::JKind;
using jsonpos::JNode;

const CatalogField* Catalog::field(const std::string& n) const {
    for (const auto& f : fields)
        if (f.name == n) return &f;
    return nullptr;
}

const PageNode* PageNode::child(const std::string& seg) const {
    for (const auto& c : children)
        if (c.spl == seg) return &c;
    return nullptr;
}

const Catalog* SiteDefinition::catalog(const std::string& n) const {
    auto it = catalogs.find(n);
    return it == catalogs.end() ? nullptr : &it->second;
}

const ApiRoute* SiteDefinition::route(const std::string& method, const std::string& path) const {
    for (const auto& r : routes)
        if (r.method == method && r.path == path) return &r;
    return nullptr;
}

const PageTemplate* SiteDefinition::page(const std::string& path) const {
    for (const auto& p : pages)
        if (p.path == path) return &p;
    return nullptr;
}

const SiteDefinition* SitePack::find(const std::string& site_id) const {
    for (const auto& s : sites)
        if (s.site_id == site_id) return &s;
    return nullptr;
}

namespace {

bool allowed_catalog_type(const TypeExpr& t) {
    switch (t.kind) {
        case TypeKind::t_int:
        case TypeKind::t_float:
        case TypeKind::t_bool:
        case TypeKind::t_string:
        case TypeKind::t_money:
            return true;
        case TypeKind::t_list:
            return t.element->kind == TypeKind::t_string;
        default:
            return false;
    }
}

class SiteReader {
public:
    SiteReader(const std::string& text, const std::string& file) : text_(text), file_(file) {}

    void run(LoadResult& out) {
        auto parsed = jsonpos::parse_json(text_);
        if (!parsed.ok()) {
            for (auto& d : parsed.diagnostics) out.diagnostics.push_back({file_, d});
            return;
        }
        root_ = std::move(parsed.root);
        if (!root_->is_object()) {
            err(root_->pos, "site file root must be an object");
        } else {
            read_site();
            read_catalogs();
            read_cart();
            read_routes();
            read_pages();
            if (diags_.empty()) validate_cross_references();
        }
        if (diags_.empty()) {
            out.pack.sites.push_back(std::move(site_));
        } else {
            for (auto& d : diags_) out.diagnostics.push_back({file_, std::move(d)});
        }
    }

private:
    void err(SourcePos pos, const std::string& msg) {
        diags_.push_back({pos, Severity::error, msg});
    }

    const JNode* need(const JNode& obj, const std::string& key, const char* what) {
        const JNode* n = obj.get(key);
        if (!n) err(obj.pos, "missing '" + key + "' (" + what + ")");
        return n;
    }

    void read_site() {
        const JNode* site = root_->get("site");
        if (!site || !site->is_object()) {
            err(root_->pos, "missing 'site' object");
            return;
        }
        const JNode* id = need(*site, "id", "string");
        const JNode* cat = need(*site, "category", "string");
        if (!id || !cat || !id->is_string() || !cat->is_string()) return;
        if (!idl::valid_snake_ident(id->str)) err(id->pos, "bad site id '" + id->str + "'");
        if (!idl::valid_site_category(cat->str))
            err(cat->pos, "unknown site category '" + cat->str + "'");
        site_.site_id = id->str;
        site_.category = cat->str;
        const JNode* disp = site->get("display_name");
        site_.display_name = disp && disp->is_string() ? disp->str : id->str;
        site_.source_file = file_;
    }

    Value row_value(const JNode& n, const TypeExpr& t, bool& ok) {
        ok = true;
        switch (t.kind) {
            case TypeKind::t_int:
                if (n.is_int()) return Value::of_int(n.int_val);
                break;
            case TypeKind::t_float:
                if (n.kind == JKind::number) return Value::of_float(n.num_val);
                if (n.is_int()) return Value::of_float(static_cast<double>(n.int_val));
                break;
            case TypeKind::t_bool:
                if (n.kind == JKind::boolean) return Value::of_bool(n.bool_val);
                break;
            case TypeKind::t_string:
                if (n.is_string()) return Value::of_string(n.str);
                break;
            case TypeKind::t_money: {
                if (n.is_object()) {
                    const JNode* amount = n.get("amount_minor");
                    const JNode* cur = n.get("currency");
                    if (amount && amount->is_int() && cur && cur->is_string() &&
                        valid_currency(cur->str))
                        return Value::of_money(amount->int_val, cur->str);
                }
                break;
            }
            case TypeKind::t_list: {
                if (n.is_array()) {
                    std::vector<Value> elems;
                    bool all = true;
                    for (const auto& e : n.elements) {
                        if (!e->is_string()) {
                            all = false;
                            break;
                        }
                        elems.push_back(Value::of_string(e->str));
                    }
                    if (all) return Value::of_list(std::move(elems));
                }
                break;
            }
            default:
                break;
        }
        ok = false;
        err(n.pos, "value does not match declared type " + render_type(t));
        return Value::of_int(0);
    }

    void read_catalogs() {
        const JNode* cats = root_->get("catalogs");
        if (!cats) return;
        if (!cats->is_object()) {
            err(cats->pos, "'catalogs' must be an object");
            return;
        }
        for (const auto& [cname, cnode] : cats->members) {
            if (!cnode->is_object()) {
                err(cnode->pos, "catalog must be an object");
                continue;
            }
            Catalog cat;
            cat.name = cname;
            const JNode* key = need(*cnode, "key", "string");
            const JNode* fields = need(*cnode, "fields", "array");
            const JNode* rows = need(*cnode, "rows", "array");
            if (!key || !fields || !rows || !key->is_string() || !fields->is_array() ||
                !rows->is_array())
                continue;
            cat.key_field = key->str;

            for (const auto& f : fields->elements) {
                if (!f->is_object()) {
                    err(f->pos, "field must be an object");
                    continue;
                }
                const JNode* fname = need(*f, "name", "string");
                const JNode* ftype = need(*f, "type", "string");
                if (!fname || !ftype || !fname->is_string() || !ftype->is_string()) continue;
                TypePtr t;
                try {
                    t = wfl::parse_type_text(ftype->str);
                } catch (const wfl::SyntaxError& e) {
                    err(ftype->pos, "bad type '" + ftype->str + "': " + e.message());
                    continue;
                }
                if (!allowed_catalog_type(*t)) {
                    err(ftype->pos, "catalog fields support int/float/bool/string/money/"
                                    "list<string>, got '" + ftype->str + "'");
                    continue;
                }
                if (cat.field(fname->str)) {
                    err(fname->pos, "duplicate field '" + fname->str + "'");
                    continue;
                }
                cat.fields.push_back({fname->str, t});
            }

            const CatalogField* kf = cat.field(cat.key_field);
            if (!kf) {
                err(key->pos, "key '" + cat.key_field + "' is not a field of catalog '" +
                                  cname + "'");
                continue;
            }
            if (kf->type->kind != TypeKind::t_string)
                err(key->pos, "catalog key must be a string field");

            std::string currency;
            for (const auto& rnode : rows->elements) {
                if (!rnode->is_object()) {
                    err(rnode->pos, "row must be an object");
                    continue;
                }
                std::vector<std::pair<std::string, Value>> fields_out;
                bool row_ok = true;
                for (const auto& f : cat.fields) {
                    const JNode* v = rnode->get(f.name);
                    if (!v) {
                        err(rnode->pos, "row misses field '" + f.name + "'");
                        row_ok = false;
                        break;
                    }
                    bool ok = false;
                    Value val = row_value(*v, *f.type, ok);
                    if (!ok) {
                        row_ok = false;
                        break;
                    }
                    if (val.kind == Value::Kind::v_money) {
                        if (currency.empty()) {
                            currency = val.money.currency;
                        } else if (currency != val.money.currency) {
                            err(v->pos, "catalog '" + cname + "' mixes currencies " + currency +
                                            " and " + val.money.currency);
                            row_ok = false;
                            break;
                        }
                    }
                    fields_out.emplace_back(f.name, std::move(val));
                }
                for (const auto& [mname, mnode] : rnode->members)
                    if (!cat.field(mname))
                        err(mnode->pos, "row has undeclared field '" + mname + "'");
                if (row_ok) cat.rows.push_back(Value::of_record(std::move(fields_out)));
            }

            validate_catalog_consistency(cat, cnode->pos);
            site_.catalogs[cname] = std::move(cat);
        }
    }

    void validate_catalog_consistency(const Catalog& cat, SourcePos pos) {
        const bool directional = cat.field("from_place") && cat.field("to_place");
        const bool has_distance = cat.field("distance_display") && cat.field("distance_meters");

        if (has_distance) {
            for (const auto& row : cat.rows) {
                const Value* disp = row.field("distance_display");
                const Value* meters = row.field("distance_meters");
                try {
                    if (idl::parse_distance_text(disp->s) != meters->i)
                        err(pos, "distance_display '" + disp->s + "' does not equal " +
                                     std::to_string(meters->i) + " meters");
                } catch (const std::invalid_argument& e) {
                    err(pos, e.what());
                }
            }
        }

        if (directional) {
            std::map<std::pair<std::string, std::string>, const Value*> by_pair;
            for (const auto& row : cat.rows) {
                auto key = std::make_pair(row.field("from_place")->s, row.field("to_place")->s);
                if (by_pair.count(key))
                    err(pos, "duplicate pair (" + key.first + ", " + key.second + ")");
                by_pair[key] = &row;
            }
            for (const auto& [key, row] : by_pair) {
                auto rev = by_pair.find({key.second, key.first});
                if (rev == by_pair.end()) {
                    err(pos, "asymmetric pair: (" + key.first + ", " + key.second +
                                 ") has no reverse entry");
                    continue;
                }
                for (const auto& f : cat.fields) {
                    if (f.name == "from_place" || f.name == "to_place") continue;
                    const Value& a = *row->field(f.name);
                    const Value& b = *rev->second->field(f.name);
                    bool same;
                    if (a.kind == Value::Kind::v_list) {
                        auto reversed = *b.list;
                        std::reverse(reversed.begin(), reversed.end());
                        same = a.equals(Value::of_list(std::move(reversed)));
                    } else {
                        same = a.equals(b);
                    }
                    if (!same)
                        err(pos, "asymmetric pair (" + key.first + ", " + key.second +
                                     "): field '" + f.name + "' differs from the reverse entry");
                }
            }
        }
    }

    void read_cart() {
        const JNode* cart = root_->get("cart");
        if (!cart) return;
        if (!cart->is_object()) {
            err(cart->pos, "'cart' must be an object");
            return;
        }
        const JNode* catalog = need(*cart, "catalog", "string");
        const JNode* key = need(*cart, "key_field", "string");
        const JNode* price = need(*cart, "price_field", "string");
        if (!catalog || !key || !price) return;
        site_.cart = CartConfig{catalog->str, key->str, price->str};
    }

    void read_routes() {
        const JNode* routes = root_->get("routes");
        if (!routes) return;
        if (!routes->is_array()) {
            err(routes->pos, "'routes' must be an array");
            return;
        }
        for (const auto& rn : routes->elements) {
            if (!rn->is_object()) {
                err(rn->pos, "route must be an object");
                continue;
            }
            ApiRoute r;
            const JNode* method = need(*rn, "method", "string");
            const JNode* path = need(*rn, "path", "string");
            const JNode* kind = need(*rn, "kind", "string");
            if (!method || !path || !kind) continue;
            r.method = method->str;
            r.path = path->str;
            if (r.method != "GET" && r.method != "POST")
                err(method->pos, "route method must be GET or POST");
            if (r.path.empty() || r.path[0] != '/')
                err(path->pos, "route path must start with '/'");
            if (r.path == "/session")
                err(path->pos, "'/session' is reserved for the built-in session route");

            if (kind->str == "query") {
                r.kind = ApiRoute::Kind::query;
                const JNode* catalog = need(*rn, "catalog", "string");
                const JNode* shape = need(*rn, "shape", "string");
                const JNode* fields = need(*rn, "fields", "array");
                if (!catalog || !shape || !fields) continue;
                r.catalog = catalog->str;
                if (shape->str == "single")
                    r.shape = ApiRoute::Shape::single;
                else if (shape->str == "list")
                    r.shape = ApiRoute::Shape::list;
                else
                    err(shape->pos, "shape must be single or list");
                for (const auto& f : fields->elements)
                    if (f->is_string()) r.fields.push_back(f->str);
                const JNode* filters = rn->get("filters");
                if (filters && filters->is_array()) {
                    for (const auto& fn : filters->elements) {
                        if (!fn->is_object()) continue;
                        const JNode* field = need(*fn, "field", "string");
                        const JNode* param = need(*fn, "param", "string");
                        if (!field || !param) continue;
                        QueryFilter qf{field->str, param->str, false};
                        const JNode* sub = fn->get("substring");
                        if (sub && sub->kind == JKind::boolean) qf.substring = sub->bool_val;
                        r.filters.push_back(std::move(qf));
                    }
                }
                const JNode* sort = rn->get("sort");
                if (sort && sort->is_object()) {
                    const JNode* sf = need(*sort, "field", "string");
                    if (sf) r.sort_field = sf->str;
                    const JNode* dir = sort->get("dir");
                    if (dir && dir->is_string()) r.sort_desc = dir->str == "desc";
                }
                const JNode* limitp = rn->get("limit_param");
                if (limitp && limitp->is_string()) r.limit_param = limitp->str;
            } else if (kind->str == "cart_add") {
                r.kind = ApiRoute::Kind::cart_add;
            } else if (kind->str == "cart_view") {
                r.kind = ApiRoute::Kind::cart_view;
            } else if (kind->str == "checkout") {
                r.kind = ApiRoute::Kind::checkout;
            } else {
                err(kind->pos, "unknown route kind '" + kind->str + "'");
                continue;
            }
            site_.routes.push_back(std::move(r));
        }
    }

    PageNode read_node(const JNode& n, bool in_item_template) {
        PageNode node;
        const JNode* spl = n.get("spl");
        if (spl && spl->is_string()) node.spl = spl->str;
        const JNode* kindn = n.get("kind");
        std::string kind = kindn && kindn->is_string() ? kindn->str : "container";
        if (kind == "container")
            node.kind = PageNode::Kind::container;
        else if (kind == "text_input")
            node.kind = PageNode::Kind::text_input;
        else if (kind == "button")
            node.kind = PageNode::Kind::button;
        else if (kind == "select")
            node.kind = PageNode::Kind::select_box;
        else if (kind == "text")
            node.kind = PageNode::Kind::text;
        else if (kind == "list")
            node.kind = PageNode::Kind::list_region;
        else
            err(kindn ? kindn->pos : n.pos, "unknown node kind '" + kind + "'");

        const JNode* rb = n.get("result_backed");
        if (rb && rb->kind == JKind::boolean) node.result_backed = rb->bool_val;

        const JNode* options = n.get("options");
        if (options && options->is_array())
            for (const auto& o : options->elements)
                if (o->is_string()) node.options.push_back(o->str);
        if (node.kind == PageNode::Kind::select_box && node.options.empty())
            err(n.pos, "select node needs nonempty 'options'");

        const JNode* bind = n.get("bind");
        if (bind && bind->is_string()) node.bind = bind->str;
        const JNode* text = n.get("text");
        if (text && text->is_string()) node.static_text = text->str;
        if (node.kind == PageNode::Kind::text && node.bind.empty() && node.static_text.empty() &&
            !in_item_template)
            err(n.pos, "text node needs 'bind' or 'text'");

        const JNode* action = n.get("action");
        if (action && action->is_object()) {
            const JNode* akind = need(*action, "kind", "string");
            if (akind) {
                auto& a = node.action;
                if (akind->str == "query") {
                    a.kind = PageNode::Action::Kind::query;
                    const JNode* catalog = need(*action, "catalog", "string");
                    if (catalog) a.catalog = catalog->str;
                    const JNode* shape = action->get("shape");
                    a.shape = shape && shape->is_string() && shape->str == "single"
                                  ? ApiRoute::Shape::single
                                  : ApiRoute::Shape::list;
                    const JNode* filters = action->get("filters");
                    if (filters && filters->is_array()) {
                        for (const auto& fn : filters->elements) {
                            if (!fn->is_object()) continue;
                            const JNode* field = need(*fn, "field", "string");
                            const JNode* input = need(*fn, "input", "string");
                            if (!field || !input) continue;
                            PageNode::Action::FilterFrom ff{field->str, input->str, false};
                            const JNode* sub = fn->get("substring");
                            if (sub && sub->kind == JKind::boolean) ff.substring = sub->bool_val;
                            a.filters.push_back(std::move(ff));
                        }
                    }
                    const JNode* sort = action->get("sort");
                    if (sort && sort->is_object()) {
                        const JNode* sf = need(*sort, "field", "string");
                        if (sf) a.sort_field = sf->str;
                        const JNode* dir = sort->get("dir");
                        if (dir && dir->is_string()) a.sort_desc = dir->str == "desc";
                    }
                    const JNode* sfrom = action->get("sort_from");
                    if (sfrom && sfrom->is_string()) a.sort_from = sfrom->str;
                    const JNode* lfrom = action->get("limit_from");
                    if (lfrom && lfrom->is_string()) a.limit_from = lfrom->str;
                } else if (akind->str == "cart_add") {
                    a.kind = PageNode::Action::Kind::cart_add;
                    const JNode* pf = need(*action, "product_from", "string");
                    const JNode* qf = need(*action, "quantity_from", "string");
                    if (pf) a.product_from = pf->str;
                    if (qf) a.quantity_from = qf->str;
                } else if (akind->str == "cart_view") {
                    a.kind = PageNode::Action::Kind::cart_view;
                } else if (akind->str == "checkout") {
                    a.kind = PageNode::Action::Kind::checkout;
                } else {
                    err(akind->pos, "unknown action kind '" + akind->str + "'");
                }
            }
        }
        if (node.kind == PageNode::Kind::button && node.action.kind == PageNode::Action::Kind::none)
            err(n.pos, "button needs an action");

        const JNode* children = n.get("children");
        if (children && children->is_array()) {
            std::set<std::string> seen;
            for (const auto& c : children->elements) {
                PageNode child = read_node(*c, in_item_template);
                if (child.spl.empty()) {
                    err(c->pos, "child node needs an 'spl' segment");
                    continue;
                }
                if (!seen.insert(child.spl).second)
                    err(c->pos, "duplicate spl '" + child.spl + "' among siblings");
                node.children.push_back(std::move(child));
            }
        }

        if (node.kind == PageNode::Kind::list_region) {
            const JNode* item = n.get("item");
            if (!item || !item->is_object()) {
                err(n.pos, "list node needs an 'item' row template");
            } else {
                node.children.clear();
                node.children.push_back(read_node(*item, true));
            }
        }
        return node;
    }

    void read_pages() {
        const JNode* pages = root_->get("pages");
        if (!pages) return;
        if (!pages->is_array()) {
            err(pages->pos, "'pages' must be an array");
            return;
        }
        for (const auto& pn : pages->elements) {
            if (!pn->is_object()) {
                err(pn->pos, "page must be an object");
                continue;
            }
            const JNode* path = need(*pn, "path", "string");
            const JNode* rootn = need(*pn, "root", "object");
            if (!path || !rootn || !rootn->is_object()) continue;
            PageTemplate page;
            page.path = path->str;
            if (page.path.empty() || page.path[0] != '/')
                err(path->pos, "page path must start with '/'");
            for (const auto& p : site_.pages)
                if (p.path == page.path) err(path->pos, "duplicate page '" + page.path + "'");
            page.root = read_node(*rootn, false);
            site_.pages.push_back(std::move(page));
        }
    }

    // Static input-path resolution inside one page.
    const PageNode* resolve_static(const PageNode& root, const std::string& path) {
        const PageNode* cur = &root;
        std::string seg;
        std::istringstream ss(path);
        while (std::getline(ss, seg, '/')) {
            if (seg.empty()) return nullptr;
            cur = cur->child(seg);
            if (!cur) return nullptr;
        }
        return cur;
    }

    void validate_cross_references() {
        SourcePos pos{1, 1};
        if (site_.cart) {
            const Catalog* c = site_.catalog(site_.cart->catalog);
            if (!c) {
                err(pos, "cart references unknown catalog '" + site_.cart->catalog + "'");
            } else {
                const CatalogField* kf = c->field(site_.cart->key_field);
                const CatalogField* pf = c->field(site_.cart->price_field);
                if (!kf || kf->type->kind != TypeKind::t_string)
                    err(pos, "cart key_field must be a string field");
                if (!pf || pf->type->kind != TypeKind::t_money)
                    err(pos, "cart price_field must be a money field");
            }
        }

        std::set<std::string> route_keys;
        for (const auto& r : site_.routes) {
            if (!route_keys.insert(r.method + " " + r.path).second)
                err(pos, "duplicate route " + r.method + " " + r.path);
            if (r.kind == ApiRoute::Kind::query) {
                const Catalog* c = site_.catalog(r.catalog);
                if (!c) {
                    err(pos, "route " + r.path + " references unknown catalog '" + r.catalog +
                                 "'");
                    continue;
                }
                for (const auto& f : r.filters)
                    if (!c->field(f.field))
                        err(pos, "route " + r.path + " filters on unknown field '" + f.field +
                                     "'");
                if (!r.sort_field.empty() && !c->field(r.sort_field))
                    err(pos, "route " + r.path + " sorts on unknown field '" + r.sort_field +
                                 "'");
                if (r.fields.empty())
                    err(pos, "route " + r.path + " projects no fields");
                for (const auto& f : r.fields)
                    if (!c->field(f))
                        err(pos, "route " + r.path + " projects unknown field '" + f + "'");
            } else if (!site_.cart) {
                err(pos, "route " + r.path + " needs a 'cart' config");
            }
        }

        for (const auto& p : site_.pages) {
            // Buttons: filters reference existing inputs and fields.
            std::function<void(const PageNode&)> walk = [&](const PageNode& n) {
                if (n.kind == PageNode::Kind::button) {
                    const auto& a = n.action;
                    auto check_input = [&](const std::string& ipath, const char* what) {
                        if (ipath.empty()) return;
                        const PageNode* in = resolve_static(p.root, ipath);
                        if (!in || (in->kind != PageNode::Kind::text_input &&
                                    in->kind != PageNode::Kind::select_box))
                            err(pos, "page " + p.path + ": " + what + " '" + ipath +
                                         "' is not a form element");
                    };
                    if (a.kind == PageNode::Action::Kind::query) {
                        const Catalog* c = site_.catalog(a.catalog);
                        if (!c) {
                            err(pos, "page " + p.path + " queries unknown catalog '" + a.catalog +
                                         "'");
                        } else {
                            for (const auto& f : a.filters) {
                                if (!c->field(f.field))
                                    err(pos, "page " + p.path + " filters on unknown field '" +
                                                 f.field + "'");
                                check_input(f.input, "filter input");
                            }
                            if (!a.sort_field.empty() && !c->field(a.sort_field))
                                err(pos, "page " + p.path + " sorts on unknown field '" +
                                             a.sort_field + "'");
                        }
                        check_input(a.sort_from, "sort_from input");
                        check_input(a.limit_from, "limit_from input");
                    } else if (a.kind == PageNode::Action::Kind::cart_add) {
                        check_input(a.product_from, "product_from input");
                        check_input(a.quantity_from, "quantity_from input");
                    }
                    if (a.kind != PageNode::Action::Kind::query &&
                        a.kind != PageNode::Action::Kind::none && !site_.cart)
                        err(pos, "page " + p.path + " uses cart actions without a 'cart' config");
                }
                for (const auto& c : n.children) walk(c);
            };
            walk(p.root);
        }
    }

    const std::string& text_;
    std::string file_;
    jsonpos::JNodePtr root_;
    SiteDefinition site_;
    std::vector<Diagnostic> diags_;
};

}  // namespace

LoadResult load_site_file(const std::string& path) {
    LoadResult out;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        out.diagnostics.push_back({path, {{0, 0}, Severity::error, "cannot open file"}});
        return out;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    SiteReader(buf.str(), path).run(out);
    return out;
}

LoadResult load_site_pack(const std::string& dir) {
    LoadResult out;
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 10 && name.substr(name.size() - 10) == ".site.json")
            files.push_back(entry.path().string());
    }
    if (ec) {
        out.diagnostics.push_back({dir, {{0, 0}, Severity::error, "cannot read directory"}});
        return out;
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        LoadResult one = load_site_file(f);
        for (auto& d : one.diagnostics) out.diagnostics.push_back(std::move(d));
        for (auto& s : one.pack.sites) {
            if (out.pack.find(s.site_id))
                out.diagnostics.push_back(
                    {f, {{1, 1}, Severity::error, "duplicate site '" + s.site_id + "'"}});
            else
                out.pack.sites.push_back(std::move(s));
        }
    }
    return out;
}

namespace {

bool ci_contains(const std::string& hay, const std::string& needle) {
    if (needle.empty()) return true;
    auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    return lower(hay).find(lower(needle)) != std::string::npos;
}

int compare_row_field(const Value& a, const Value& b) {
    switch (a.kind) {
        case Value::Kind::v_int: return a.i < b.i ? -1 : a.i > b.i ? 1 : 0;
        case Value::Kind::v_float: return a.f < b.f ? -1 : a.f > b.f ? 1 : 0;
        case Value::Kind::v_string: return a.s < b.s ? -1 : a.s > b.s ? 1 : 0;
        case Value::Kind::v_money:
            return a.money.amount_minor < b.money.amount_minor   ? -1
                   : a.money.amount_minor > b.money.amount_minor ? 1
                                                                 : 0;
        default: return 0;
    }
}

}  // namespace

std::vector<Value> run_query(const SiteDefinition& site, const ResolvedQuery& q,
                             std::optional<QueryError>& err) {
    err.reset();
    const Catalog* cat = site.catalog(q.catalog);
    if (!cat) {
        err = QueryError{"unknown catalog '" + q.catalog + "'"};
        return {};
    }

    std::vector<Value> rows;
    for (const auto& row : cat->rows) {
        bool keep = true;
        for (const auto& f : q.filters) {
            const CatalogField* cf = cat->field(f.field);
            if (!cf) {
                err = QueryError{"unknown field '" + f.field + "'"};
                return {};
            }
            const Value* v = row.field(f.field);
            switch (cf->type->kind) {
                case TypeKind::t_string:
                    keep = f.substring ? ci_contains(v->s, f.value) : v->s == f.value;
                    break;
                case TypeKind::t_int: {
                    std::int64_t want = 0;
                    auto [p, ec] =
                        std::from_chars(f.value.data(), f.value.data() + f.value.size(), want);
                    if (ec != std::errc() || p != f.value.data() + f.value.size()) {
                        err = QueryError{"parameter for '" + f.field + "' must be an integer"};
                        return {};
                    }
                    keep = v->i == want;
                    break;
                }
                default:
                    err = QueryError{"field '" + f.field + "' is not filterable"};
                    return {};
            }
            if (!keep) break;
        }
        if (keep) rows.push_back(row);
    }

    if (!q.sort_field.empty() && !cat->field(q.sort_field)) {
        err = QueryError{"unknown sort field '" + q.sort_field + "'"};
        return {};
    }
    const std::string key_field = cat->key_field;
    std::stable_sort(rows.begin(), rows.end(), [&](const Value& a, const Value& b) {
        if (!q.sort_field.empty()) {
            int c = compare_row_field(*a.field(q.sort_field), *b.field(q.sort_field));
            if (c != 0) return q.sort_desc ? c > 0 : c < 0;
        }
        return compare_row_field(*a.field(key_field), *b.field(key_field)) < 0;
    });

    if (q.limit) {
        if (*q.limit < 0) {
            err = QueryError{"limit must be non-negative"};
            return {};
        }
        if (rows.size() > static_cast<size_t>(*q.limit))
            rows.resize(static_cast<size_t>(*q.limit));
    }
    return rows;
}

std::string display_text(const Value& v) {
    switch (v.kind) {
        case Value::Kind::v_int: return std::to_string(v.i);
        case Value::Kind::v_string: return v.s;
        case Value::Kind::v_enum: return v.s;
        case Value::Kind::v_bool: return v.b ? "true" : "false";
        case Value::Kind::v_money: return render_money(v.money);
        default: return render_value(v);
    }
}

}  // namespace webverbs::mockweb
