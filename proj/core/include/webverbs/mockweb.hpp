#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "webverbs/diag.hpp"
#include "webverbs/types.hpp"

namespace webverbs::mockweb {

struct CatalogField {
    std::string name;
    TypePtr type;  // int | float | bool | string | money | list<string>
};

struct Catalog {
    std::string name;
    std::string key_field;  // secondary sort key; usually the display name
    std::vector<CatalogField> fields;
    std::vector<Value> rows;  // records, field order matching `fields`

    const CatalogField* field(const std::string& name) const;
};

struct QueryFilter {
    std::string field;
    std::string param;  // api: query/body key; pages use input paths instead
    bool substring = false;
};

struct ApiRoute {
    enum class Kind { query, cart_add, cart_view, checkout };
    enum class Shape { single, list };

    std::string method;  // GET | POST
    std::string path;    // site-relative, e.g. "/directions"
    Kind kind = Kind::query;
    std::string catalog;
    std::vector<QueryFilter> filters;
    std::string sort_field;
    bool sort_desc = false;
    std::string limit_param;
    Shape shape = Shape::single;
    std::vector<std::string> fields;  // projected response fields
};

// Page element tree. Every node carries an spl segment, unique among its
// siblings; a locator path "a/b/c" resolves along the tree.
struct PageNode {
    enum class Kind { container, text_input, button, select_box, text, list_region };

    Kind kind = Kind::container;
    std::string spl;
    bool result_backed = false;          // resolvable only once results exist
    std::vector<std::string> options;    // select_box
    std::string bind;                    // text: result field; list_region: list field
    std::string static_text;             // text without a bind
    std::vector<PageNode> children;      // containers and list item templates

    struct Action {
        enum class Kind { none, query, cart_add, cart_view, checkout };
        Kind kind = Kind::none;
        std::string catalog;
        struct FilterFrom {
            std::string field;
            std::string input;  // locator path of the form element
            bool substring = false;
        };
        std::vector<FilterFrom> filters;
        std::string sort_field;
        bool sort_desc = false;
        std::string sort_from;   // select input whose value is "<field>_asc|_desc"
        std::string limit_from;  // numeric input path
        ApiRoute::Shape shape = ApiRoute::Shape::list;
        std::string product_from;  // cart_add
        std::string quantity_from;
    } action;

    const PageNode* child(const std::string& spl_segment) const;
};

struct PageTemplate {
    std::string path;  // "/route"
    PageNode root;
};

struct CartConfig {
    std::string catalog;      // product table
    std::string key_field;    // product identity
    std::string price_field;  // money field
};

struct SiteDefinition {
    std::string site_id;
    std::string category;
    std::string display_name;
    std::map<std::string, Catalog> catalogs;
    std::optional<CartConfig> cart;
    std::vector<ApiRoute> routes;
    std::vector<PageTemplate> pages;
    std::string source_file;

    const Catalog* catalog(const std::string& name) const;
    const ApiRoute* route(const std::string& method, const std::string& path) const;
    const PageTemplate* page(const std::string& path) const;
};

struct SitePack {
    std::vector<SiteDefinition> sites;

    const SiteDefinition* find(const std::string& site_id) const;
};

struct FileDiag {
    std::string file;
    Diagnostic diag;
};

struct LoadResult {
    SitePack pack;
    std::vector<FileDiag> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

// Loads and validates every *.site.json in `dir` (sorted by filename).
// Validation covers catalog typing, directions symmetry, distance display
// consistency, single-currency catalogs, route/page references, and spl
// sibling uniqueness.
LoadResult load_site_pack(const std::string& dir);

LoadResult load_site_file(const std::string& path);

// Shared query engine: the API routes and the page machine both run through
// this, which is what makes dual-binding equivalence hold by construction.
struct ResolvedQuery {
    std::string catalog;
    struct Filter {
        std::string field;
        std::string value;
        bool substring = false;
    };
    std::vector<Filter> filters;
    std::string sort_field;
    bool sort_desc = false;
    std::optional<std::int64_t> limit;
};

struct QueryError {
    std::string message;
};

// Rows sorted by the sort spec, then by the catalog key ascending.
// Returns QueryError on unknown fields or unparseable filter values.
std::vector<Value> run_query(const SiteDefinition& site, const ResolvedQuery& q,
                             std::optional<QueryError>& err);

// Page-text rendering of a scalar value (raw strings, decimal ints,
// "12.00 USD" money); inverse of the read-step parse modes.
std::string display_text(const Value& v);

}  // namespace webverbs::mockweb
