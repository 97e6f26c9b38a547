#include "webverbs/valuejson.hpp"

#include "valuejson_impl.hpp"

namespace webverbs {

using nlohmann::json;

json value_to_json(const Value& v) {
    switch (v.kind) {
        case Value::Kind::v_int: return json{{"i", v.i}};
        case Value::Kind::v_float: return json{{"f", v.f}};
        case Value::Kind::v_bool: return json{{"b", v.b}};
        case Value::Kind::v_string: return json{{"s", v.s}};
        case Value::Kind::v_enum: return json{{"e", v.s}};
        case Value::Kind::v_money:
            return json{{"m", json::array({v.money.amount_minor, v.money.currency})}};
        case Value::Kind::v_record: {
            json fields = json::array();
            for (const auto& [n, fv] : v.record->fields)
                fields.push_back(json::array({n, value_to_json(fv)}));
            return json{{"r", fields}};
        }
        case Value::Kind::v_list: {
            json elems = json::array();
            for (const auto& e : *v.list) elems.push_back(value_to_json(e));
            return json{{"l", elems}};
        }
        case Value::Kind::v_optional:
            return json{{"o", v.opt ? value_to_json(*v.opt) : json(nullptr)}};
    }
    throw std::invalid_argument("unhandled value kind");
}

Value value_from_json(const json& j) {
    if (!j.is_object() || j.size() != 1)
        throw std::invalid_argument("value encoding must be a single-key object");
    const auto& [tag, body] = *j.items().begin();

    if (tag == "i") {
        if (!body.is_number_integer()) throw std::invalid_argument("'i' needs an integer");
        return Value::of_int(body.get<std::int64_t>());
    }
    if (tag == "f") {
        if (!body.is_number()) throw std::invalid_argument("'f' needs a number");
        return Value::of_float(body.get<double>());
    }
    if (tag == "b") {
        if (!body.is_boolean()) throw std::invalid_argument("'b' needs a boolean");
        return Value::of_bool(body.get<bool>());
    }
    if (tag == "s") {
        if (!body.is_string()) throw std::invalid_argument("'s' needs a string");
        return Value::of_string(body.get<std::string>());
    }
    if (tag == "e") {
        if (!body.is_string()) throw std::invalid_argument("'e' needs a string");
        return Value::of_enum(body.get<std::string>());
    }
    if (tag == "m") {
        if (!body.is_array() || body.size() != 2 || !body[0].is_number_integer() ||
            !body[1].is_string())
            throw std::invalid_argument("'m' needs [amount_minor, currency]");
        return Value::of_money(body[0].get<std::int64_t>(), body[1].get<std::string>());
    }
    if (tag == "r") {
        if (!body.is_array()) throw std::invalid_argument("'r' needs an array of pairs");
        std::vector<std::pair<std::string, Value>> fields;
        for (const auto& pair : body) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string())
                throw std::invalid_argument("'r' entries must be [name, value]");
            fields.emplace_back(pair[0].get<std::string>(), value_from_json(pair[1]));
        }
        return Value::of_record(std::move(fields));
    }
    if (tag == "l") {
        if (!body.is_array()) throw std::invalid_argument("'l' needs an array");
        std::vector<Value> elems;
        for (const auto& e : body) elems.push_back(value_from_json(e));
        return Value::of_list(std::move(elems));
    }
    if (tag == "o") {
        if (body.is_null()) return Value::absent();
        return Value::present(value_from_json(body));
    }
    throw std::invalid_argument("unknown value tag '" + tag + "'");
}

std::string value_to_json_text(const Value& v) { return value_to_json(v).dump(); }

Value value_from_json_text(const std::string& text) {
    json j = json::parse(text);  // throws json::parse_error (a std::exception)
    return value_from_json(j);
}

}  // namespace webverbs
