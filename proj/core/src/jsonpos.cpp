#include "webverbs/jsonpos.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace webverbs::jsonpos {

const JNode* JNode::get(const std::string& key) const {
    for (const auto& [k, v] : members)
        if (k == key) return v.get();
    return nullptr;
}

namespace {

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    JsonParseResult run() {
        JsonParseResult res;
        skip_ws();
        res.root = parse_value();
        if (failed_) {
            res.root.reset();
            res.diagnostics.push_back(std::move(error_));
            return res;
        }
        skip_ws();
        if (pos_ < text_.size()) {
            res.root.reset();
            res.diagnostics.push_back({here(), Severity::error, "trailing content after document"});
        }
        return res;
    }

private:
    SourcePos here() const { return {line_, col_}; }

    void fail(const std::string& msg) {
        if (!failed_) {
            failed_ = true;
            error_ = {here(), Severity::error, msg};
        }
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
                advance();
            else
                break;
        }
    }

    bool expect(char c, const char* what) {
        if (peek() != c) {
            fail(std::string("expected ") + what);
            return false;
        }
        advance();
        return true;
    }

    JNodePtr parse_value() {
        if (failed_) return nullptr;
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
            return nullptr;
        }
        char c = peek();
        switch (c) {
            case '{': return parse_object();
            case '[': return parse_array();
            case '"': return parse_string_node();
            case 't':
            case 'f': return parse_bool();
            case 'n': return parse_null();
            default:
                if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return parse_number();
                fail(std::string("unexpected character '") + c + "'");
                return nullptr;
        }
    }

    JNodePtr parse_object() {
        auto node = std::make_unique<JNode>();
        node->kind = JKind::object;
        node->pos = here();
        advance();  // {
        skip_ws();
        if (peek() == '}') {
            advance();
            return node;
        }
        while (true) {
            skip_ws();
            if (peek() != '"') {
                fail("expected member name string");
                return nullptr;
            }
            SourcePos key_pos = here();
            std::string key;
            if (!parse_string_raw(key)) return nullptr;
            for (const auto& [k, v] : node->members) {
                if (k == key) {
                    error_ = {key_pos, Severity::error, "duplicate member '" + key + "'"};
                    failed_ = true;
                    return nullptr;
                }
            }
            skip_ws();
            if (!expect(':', "':'")) return nullptr;
            skip_ws();
            auto val = parse_value();
            if (failed_) return nullptr;
            node->members.emplace_back(std::move(key), std::move(val));
            skip_ws();
            if (peek() == ',') {
                advance();
                continue;
            }
            if (!expect('}', "',' or '}'")) return nullptr;
            return node;
        }
    }

    JNodePtr parse_array() {
        auto node = std::make_unique<JNode>();
        node->kind = JKind::array;
        node->pos = here();
        advance();  // [
        skip_ws();
        if (peek() == ']') {
            advance();
            return node;
        }
        while (true) {
            skip_ws();
            auto val = parse_value();
            if (failed_) return nullptr;
            node->elements.push_back(std::move(val));
            skip_ws();
            if (peek() == ',') {
                advance();
                continue;
            }
            if (!expect(']', "',' or ']'")) return nullptr;
            return node;
        }
    }

    bool parse_string_raw(std::string& out) {
        advance();  // opening quote
        while (true) {
            if (pos_ >= text_.size()) {
                fail("unterminated string");
                return false;
            }
            char c = advance();
            if (c == '"') return true;
            if (c == '\\') {
                if (pos_ >= text_.size()) {
                    fail("unterminated escape");
                    return false;
                }
                char e = advance();
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case '/': out += '/'; break;
                    case 'b': out += '\b'; break;
                    case 'f': out += '\f'; break;
                    case 'n': out += '\n'; break;
                    case 'r': out += '\r'; break;
                    case 't': out += '\t'; break;
                    case 'u': {
                        if (pos_ + 4 > text_.size()) {
                            fail("bad \\u escape");
                            return false;
                        }
                        std::string hex;
                        for (int i = 0; i < 4; ++i) hex += advance();
                        unsigned cp = std::strtoul(hex.c_str(), nullptr, 16);
                        // Encode as UTF-8 (BMP only; surrogate pairs unsupported).
                        if (cp < 0x80) {
                            out += static_cast<char>(cp);
                        } else if (cp < 0x800) {
                            out += static_cast<char>(0xC0 | (cp >> 6));
                            out += static_cast<char>(0x80 | (cp & 0x3F));
                        } else {
                            out += static_cast<char>(0xE0 | (cp >> 12));
                            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                            out += static_cast<char>(0x80 | (cp & 0x3F));
                        }
                        break;
                    }
                    default:
                        fail("unknown escape");
                        return false;
                }
            } else {
                out += c;
            }
        }
    }

    JNodePtr parse_string_node() {
        auto node = std::make_unique<JNode>();
        node->kind = JKind::string;
        node->pos = here();
        if (!parse_string_raw(node->str)) return nullptr;
        return node;
    }

    JNodePtr parse_number() {
        auto node = std::make_unique<JNode>();
        node->pos = here();
        std::string lit;
        bool is_float = false;
        if (peek() == '-') lit += advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) lit += advance();
        if (peek() == '.') {
            is_float = true;
            lit += advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) lit += advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            is_float = true;
            lit += advance();
            if (peek() == '+' || peek() == '-') lit += advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) lit += advance();
        }
        if (lit.empty() || lit == "-") {
            fail("malformed number");
            return nullptr;
        }
        if (is_float) {
            node->kind = JKind::number;
            node->num_val = std::strtod(lit.c_str(), nullptr);
        } else {
            node->kind = JKind::integer;
            auto [p, ec] = std::from_chars(lit.data(), lit.data() + lit.size(), node->int_val);
            if (ec != std::errc()) {
                fail("integer out of range");
                return nullptr;
            }
        }
        return node;
    }

    JNodePtr parse_bool() {
        auto node = std::make_unique<JNode>();
        node->kind = JKind::boolean;
        node->pos = here();
        if (text_.compare(pos_, 4, "true") == 0) {
            for (int i = 0; i < 4; ++i) advance();
            node->bool_val = true;
            return node;
        }
        if (text_.compare(pos_, 5, "false") == 0) {
            for (int i = 0; i < 5; ++i) advance();
            node->bool_val = false;
            return node;
        }
        fail("malformed literal");
        return nullptr;
    }

    JNodePtr parse_null() {
        auto node = std::make_unique<JNode>();
        node->kind = JKind::null;
        node->pos = here();
        if (text_.compare(pos_, 4, "null") == 0) {
            for (int i = 0; i < 4; ++i) advance();
            return node;
        }
        fail("malformed literal");
        return nullptr;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    bool failed_ = false;
    Diagnostic error_;
};

}  // namespace

JsonParseResult parse_json(const std::string& text) { return Reader(text).run(); }

}  // namespace webverbs::jsonpos
