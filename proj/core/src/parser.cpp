#include "webverbs/parser.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace webverbs::wfl {

const char* to_string(BinOp op) {
    switch (op) {
        case BinOp::add: return "+";
        case BinOp::sub: return "-";
        case BinOp::mul: return "*";
        case BinOp::div: return "/";
        case BinOp::lt: return "<";
        case BinOp::le: return "<=";
        case BinOp::gt: return ">";
        case BinOp::ge: return ">=";
        case BinOp::eq: return "==";
        case BinOp::ne: return "!=";
        case BinOp::logical_and: return "&&";
        case BinOp::logical_or: return "||";
    }
    return "?";
}

namespace {

enum class Tok {
    ident,
    int_lit,
    float_lit,
    string_lit,
    kw_let,
    kw_for,
    kw_in,
    kw_if,
    kw_else,
    kw_return,
    kw_grant,
    kw_true,
    kw_false,
    lparen,
    rparen,
    lbracket,
    rbracket,
    lbrace,
    rbrace,
    comma,
    semicolon,
    colon,
    coloncolon,
    dot,
    assign,
    eq,
    ne,
    lt,
    le,
    gt,
    ge,
    plus,
    minus,
    star,
    slash,
    bang,
    and_and,
    or_or,
    eof,
};

struct Token {
    Tok kind;
    SourcePos pos;
    std::string text;       // ident / string payload
    std::int64_t int_val = 0;
    double float_val = 0.0;
};

const char* token_name(Tok t) {
    switch (t) {
        case Tok::ident: return "identifier";
        case Tok::int_lit: return "integer literal";
        case Tok::float_lit: return "float literal";
        case Tok::string_lit: return "string literal";
        case Tok::kw_let: return "'let'";
        case Tok::kw_for: return "'for'";
        case Tok::kw_in: return "'in'";
        case Tok::kw_if: return "'if'";
        case Tok::kw_else: return "'else'";
        case Tok::kw_return: return "'return'";
        case Tok::kw_grant: return "'grant'";
        case Tok::kw_true: return "'true'";
        case Tok::kw_false: return "'false'";
        case Tok::lparen: return "'('";
        case Tok::rparen: return "')'";
        case Tok::lbracket: return "'['";
        case Tok::rbracket: return "']'";
        case Tok::lbrace: return "'{'";
        case Tok::rbrace: return "'}'";
        case Tok::comma: return "','";
        case Tok::semicolon: return "';'";
        case Tok::colon: return "':'";
        case Tok::coloncolon: return "'::'";
        case Tok::dot: return "'.'";
        case Tok::assign: return "'='";
        case Tok::eq: return "'=='";
        case Tok::ne: return "'!='";
        case Tok::lt: return "'<'";
        case Tok::le: return "'<='";
        case Tok::gt: return "'>'";
        case Tok::ge: return "'>='";
        case Tok::plus: return "'+'";
        case Tok::minus: return "'-'";
        case Tok::star: return "'*'";
        case Tok::slash: return "'/'";
        case Tok::bang: return "'!'";
        case Tok::and_and: return "'&&'";
        case Tok::or_or: return "'||'";
        case Tok::eof: return "end of input";
    }
    return "?";
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            Token t = next_token();
            bool done = t.kind == Tok::eof;
            out.push_back(std::move(t));
            if (done) break;
        }
        return out;
    }

private:
    SourcePos here() const { return {line_, col_}; }

    char peek(int off = 0) const {
        return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
    }

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

    void skip_trivia() {
        while (pos_ < text_.size()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (pos_ < text_.size() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    Token next_token() {
        SourcePos p = here();
        if (pos_ >= text_.size()) return {Tok::eof, p, ""};
        char c = peek();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_ident(p);
        if (std::isdigit(static_cast<unsigned char>(c))) return lex_number(p);
        if (c == '"') return lex_string(p);

        advance();
        switch (c) {
            case '(': return {Tok::lparen, p, "("};
            case ')': return {Tok::rparen, p, ")"};
            case '[': return {Tok::lbracket, p, "["};
            case ']': return {Tok::rbracket, p, "]"};
            case '{': return {Tok::lbrace, p, "{"};
            case '}': return {Tok::rbrace, p, "}"};
            case ',': return {Tok::comma, p, ","};
            case ';': return {Tok::semicolon, p, ";"};
            case '.': return {Tok::dot, p, "."};
            case '+': return {Tok::plus, p, "+"};
            case '-': return {Tok::minus, p, "-"};
            case '*': return {Tok::star, p, "*"};
            case '/': return {Tok::slash, p, "/"};
            case ':':
                if (peek() == ':') {
                    advance();
                    return {Tok::coloncolon, p, "::"};
                }
                return {Tok::colon, p, ":"};
            case '=':
                if (peek() == '=') {
                    advance();
                    return {Tok::eq, p, "=="};
                }
                return {Tok::assign, p, "="};
            case '!':
                if (peek() == '=') {
                    advance();
                    return {Tok::ne, p, "!="};
                }
                return {Tok::bang, p, "!"};
            case '<':
                if (peek() == '=') {
                    advance();
                    return {Tok::le, p, "<="};
                }
                return {Tok::lt, p, "<"};
            case '>':
                if (peek() == '=') {
                    advance();
                    return {Tok::ge, p, ">="};
                }
                return {Tok::gt, p, ">"};
            case '&':
                if (peek() == '&') {
                    advance();
                    return {Tok::and_and, p, "&&"};
                }
                throw SyntaxError(p, "stray '&', expected '&&'");
            case '|':
                if (peek() == '|') {
                    advance();
                    return {Tok::or_or, p, "||"};
                }
                throw SyntaxError(p, "stray '|', expected '||'");
            default:
                throw SyntaxError(p, std::string("unexpected character '") + c + "'");
        }
    }

    Token lex_ident(SourcePos p) {
        std::string s;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') s += advance();
        if (s == "let") return {Tok::kw_let, p, s};
        if (s == "for") return {Tok::kw_for, p, s};
        if (s == "in") return {Tok::kw_in, p, s};
        if (s == "if") return {Tok::kw_if, p, s};
        if (s == "else") return {Tok::kw_else, p, s};
        if (s == "return") return {Tok::kw_return, p, s};
        if (s == "grant") return {Tok::kw_grant, p, s};
        if (s == "true") return {Tok::kw_true, p, s};
        if (s == "false") return {Tok::kw_false, p, s};
        return {Tok::ident, p, s};
    }

    Token lex_number(SourcePos p) {
        std::string lit;
        bool is_float = false;
        while (std::isdigit(static_cast<unsigned char>(peek()))) lit += advance();
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            is_float = true;
            lit += advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) lit += advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            is_float = true;
            lit += advance();
            if (peek() == '+' || peek() == '-') lit += advance();
            if (!std::isdigit(static_cast<unsigned char>(peek())))
                throw SyntaxError(here(), "malformed float exponent");
            while (std::isdigit(static_cast<unsigned char>(peek()))) lit += advance();
        }
        Token t;
        t.pos = p;
        t.text = lit;
        if (is_float) {
            t.kind = Tok::float_lit;
            t.float_val = std::strtod(lit.c_str(), nullptr);
        } else {
            t.kind = Tok::int_lit;
            auto [ptr, ec] = std::from_chars(lit.data(), lit.data() + lit.size(), t.int_val);
            if (ec != std::errc()) throw SyntaxError(p, "integer literal out of range");
        }
        return t;
    }

    Token lex_string(SourcePos p) {
        advance();  // opening quote
        std::string s;
        while (true) {
            if (pos_ >= text_.size()) throw SyntaxError(p, "unterminated string literal");
            char c = advance();
            if (c == '"') break;
            if (c == '\n') throw SyntaxError(p, "unterminated string literal");
            if (c == '\\') {
                if (pos_ >= text_.size()) throw SyntaxError(here(), "dangling escape");
                char e = advance();
                switch (e) {
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case 'r': s += '\r'; break;
                    case 'u': {
                        std::string hex;
                        for (int i = 0; i < 4; ++i) {
                            if (pos_ >= text_.size() ||
                                !std::isxdigit(static_cast<unsigned char>(peek())))
                                throw SyntaxError(here(), "bad \\u escape, expected 4 hex digits");
                            hex += advance();
                        }
                        unsigned cp = std::strtoul(hex.c_str(), nullptr, 16);
                        if (cp > 0x7f)
                            throw SyntaxError(p, "\\u escapes above 0x7f unsupported; use UTF-8");
                        s += static_cast<char>(cp);
                        break;
                    }
                    default:
                        throw SyntaxError(here(), std::string("unknown escape '\\") + e + "'");
                }
            } else {
                s += c;
            }
        }
        return {Tok::string_lit, p, s};
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    WorkflowProgram parse_program(std::string source) {
        WorkflowProgram prog;
        prog.source = std::move(source);
        if (at(Tok::kw_grant)) {
            prog.grants_pos = cur().pos;
            advance();
            prog.grants.push_back(expect(Tok::ident, "policy tag").text);
            while (accept(Tok::comma))
                prog.grants.push_back(expect(Tok::ident, "policy tag").text);
            expect(Tok::semicolon, "';' after grant header");
        }
        while (!at(Tok::eof)) prog.statements.push_back(parse_statement());
        return prog;
    }

    ExprPtr parse_single_expression() {
        auto e = parse_expr();
        expect(Tok::eof, "end of expression");
        return e;
    }

    TypePtr parse_single_type() {
        auto t = parse_type(1);
        expect(Tok::eof, "end of type");
        return t;
    }

private:
    const Token& cur() const { return toks_[idx_]; }
    const Token& peek(int off = 1) const {
        std::size_t i = idx_ + off;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(Tok k) const { return cur().kind == k; }
    void advance() {
        if (idx_ + 1 < toks_.size()) ++idx_;
    }
    bool accept(Tok k) {
        if (at(k)) {
            advance();
            return true;
        }
        return false;
    }
    Token expect(Tok k, const std::string& what) {
        if (!at(k))
            throw SyntaxError(cur().pos, "expected " + what + ", found " +
                                             token_name(cur().kind));
        Token t = cur();
        advance();
        return t;
    }

    StmtPtr parse_statement() {
        switch (cur().kind) {
            case Tok::kw_let: return parse_let();
            case Tok::kw_for: return parse_for();
            case Tok::kw_if: return parse_if();
            case Tok::kw_return: return parse_return();
            case Tok::ident:
                if (is_assign_head()) return parse_assign();
                return parse_expr_stmt();
            default:
                return parse_expr_stmt();
        }
    }

    // Lookahead: IDENT ('.' IDENT)* '=' begins an assignment.
    bool is_assign_head() const {
        std::size_t i = idx_;
        if (toks_[i].kind != Tok::ident) return false;
        ++i;
        while (i + 1 < toks_.size() && toks_[i].kind == Tok::dot &&
               toks_[i + 1].kind == Tok::ident)
            i += 2;
        return i < toks_.size() && toks_[i].kind == Tok::assign;
    }

    StmtPtr parse_let() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::let_decl;
        s->pos = cur().pos;
        advance();
        s->name = expect(Tok::ident, "variable name after 'let'").text;
        if (accept(Tok::colon)) s->declared_type = parse_type(1);
        expect(Tok::assign, "'=' in let binding");
        s->expr = parse_expr();
        expect(Tok::semicolon, "';' after let binding");
        return s;
    }

    StmtPtr parse_assign() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::assign;
        s->pos = cur().pos;
        s->target_path.push_back(expect(Tok::ident, "assignment target").text);
        while (accept(Tok::dot))
            s->target_path.push_back(expect(Tok::ident, "field name after '.'").text);
        expect(Tok::assign, "'='");
        s->expr = parse_expr();
        expect(Tok::semicolon, "';' after assignment");
        return s;
    }

    StmtPtr parse_for() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::for_loop;
        s->pos = cur().pos;
        advance();
        s->name = expect(Tok::ident, "loop variable after 'for'").text;
        expect(Tok::kw_in, "'in'");
        s->expr = parse_expr();
        s->body = parse_block();
        return s;
    }

    StmtPtr parse_if() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::if_branch;
        s->pos = cur().pos;
        advance();
        s->expr = parse_expr();
        s->body = parse_block();
        if (accept(Tok::kw_else)) {
            if (at(Tok::kw_if)) {
                s->else_body.push_back(parse_if());
            } else {
                s->else_body = parse_block();
            }
        }
        return s;
    }

    StmtPtr parse_return() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::return_stmt;
        s->pos = cur().pos;
        advance();
        if (!at(Tok::semicolon)) s->expr = parse_expr();
        expect(Tok::semicolon, "';' after return");
        return s;
    }

    StmtPtr parse_expr_stmt() {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::expr_stmt;
        s->pos = cur().pos;
        s->expr = parse_expr();
        expect(Tok::semicolon, "';' after expression");
        return s;
    }

    std::vector<StmtPtr> parse_block() {
        expect(Tok::lbrace, "'{'");
        std::vector<StmtPtr> stmts;
        while (!at(Tok::rbrace)) {
            if (at(Tok::eof)) throw SyntaxError(cur().pos, "unterminated block, expected '}'");
            stmts.push_back(parse_statement());
        }
        advance();
        return stmts;
    }

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr make_binary(BinOp op, SourcePos pos, ExprPtr lhs, ExprPtr rhs) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::binary;
        e->pos = pos;
        e->bin_op = op;
        e->lhs = std::move(lhs);
        e->rhs = std::move(rhs);
        return e;
    }

    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (at(Tok::or_or)) {
            SourcePos p = cur().pos;
            advance();
            lhs = make_binary(BinOp::logical_or, p, std::move(lhs), parse_and());
        }
        return lhs;
    }

    ExprPtr parse_and() {
        auto lhs = parse_cmp();
        while (at(Tok::and_and)) {
            SourcePos p = cur().pos;
            advance();
            lhs = make_binary(BinOp::logical_and, p, std::move(lhs), parse_cmp());
        }
        return lhs;
    }

    // Comparisons are non-associative: a < b < c is a syntax error.
    ExprPtr parse_cmp() {
        auto lhs = parse_add();
        BinOp op;
        switch (cur().kind) {
            case Tok::lt: op = BinOp::lt; break;
            case Tok::le: op = BinOp::le; break;
            case Tok::gt: op = BinOp::gt; break;
            case Tok::ge: op = BinOp::ge; break;
            case Tok::eq: op = BinOp::eq; break;
            case Tok::ne: op = BinOp::ne; break;
            default: return lhs;
        }
        SourcePos p = cur().pos;
        advance();
        auto rhs = parse_add();
        switch (cur().kind) {
            case Tok::lt:
            case Tok::le:
            case Tok::gt:
            case Tok::ge:
            case Tok::eq:
            case Tok::ne:
                throw SyntaxError(cur().pos, "comparisons do not chain; parenthesize");
            default:
                break;
        }
        return make_binary(op, p, std::move(lhs), std::move(rhs));
    }

    ExprPtr parse_add() {
        auto lhs = parse_mul();
        while (at(Tok::plus) || at(Tok::minus)) {
            BinOp op = at(Tok::plus) ? BinOp::add : BinOp::sub;
            SourcePos p = cur().pos;
            advance();
            lhs = make_binary(op, p, std::move(lhs), parse_mul());
        }
        return lhs;
    }

    ExprPtr parse_mul() {
        auto lhs = parse_unary();
        while (at(Tok::star) || at(Tok::slash)) {
            BinOp op = at(Tok::star) ? BinOp::mul : BinOp::div;
            SourcePos p = cur().pos;
            advance();
            lhs = make_binary(op, p, std::move(lhs), parse_unary());
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (at(Tok::bang) || at(Tok::minus)) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::unary;
            e->pos = cur().pos;
            e->un_op = at(Tok::bang) ? UnOp::logical_not : UnOp::negate;
            advance();
            e->lhs = parse_unary();
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        auto e = parse_primary();
        while (at(Tok::dot)) {
            SourcePos p = cur().pos;
            advance();
            auto fa = std::make_unique<Expr>();
            fa->kind = Expr::Kind::field_access;
            fa->pos = p;
            fa->name = expect(Tok::ident, "field name after '.'").text;
            fa->lhs = std::move(e);
            e = std::move(fa);
        }
        return e;
    }

    std::vector<std::pair<std::string, ExprPtr>> parse_named_args(const char* what) {
        std::vector<std::pair<std::string, ExprPtr>> args;
        if (!at(Tok::rparen) && !at(Tok::rbrace)) {
            while (true) {
                Token name = expect(Tok::ident, std::string(what) + " name");
                for (const auto& [n, v] : args)
                    if (n == name.text)
                        throw SyntaxError(name.pos,
                                          "duplicate " + std::string(what) + " '" + name.text + "'");
                expect(Tok::assign, "'='");
                args.emplace_back(name.text, parse_expr());
                if (!accept(Tok::comma)) break;
            }
        }
        return args;
    }

    ExprPtr parse_primary() {
        SourcePos p = cur().pos;
        switch (cur().kind) {
            case Tok::int_lit: {
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::literal;
                e->pos = p;
                e->literal = Value::of_int(cur().int_val);
                advance();
                return e;
            }
            case Tok::float_lit: {
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::literal;
                e->pos = p;
                e->literal = Value::of_float(cur().float_val);
                advance();
                return e;
            }
            case Tok::string_lit: {
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::literal;
                e->pos = p;
                e->literal = Value::of_string(cur().text);
                advance();
                return e;
            }
            case Tok::kw_true:
            case Tok::kw_false: {
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::literal;
                e->pos = p;
                e->literal = Value::of_bool(at(Tok::kw_true));
                advance();
                return e;
            }
            case Tok::lparen: {
                advance();
                auto e = parse_expr();
                expect(Tok::rparen, "')'");
                return e;
            }
            case Tok::lbracket: {
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::list_literal;
                e->pos = p;
                advance();
                if (!at(Tok::rbracket)) {
                    while (true) {
                        e->args.push_back(parse_expr());
                        if (!accept(Tok::comma)) break;
                    }
                }
                expect(Tok::rbracket, "']'");
                return e;
            }
            case Tok::ident: {
                Token head = cur();
                advance();
                if (at(Tok::coloncolon)) {
                    advance();
                    Token second = expect(Tok::ident, "name after '::'");
                    std::string qname = head.text + "::" + second.text;
                    if (accept(Tok::coloncolon)) {
                        // Enum literal: site::type::variant
                        Token variant = expect(Tok::ident, "enum variant after '::'");
                        auto e = std::make_unique<Expr>();
                        e->kind = Expr::Kind::literal;
                        e->pos = p;
                        e->literal = Value::of_enum(variant.text);
                        e->enum_type = qname;
                        return e;
                    }
                    if (at(Tok::lparen)) {
                        advance();
                        auto e = std::make_unique<Expr>();
                        e->kind = Expr::Kind::verb_call;
                        e->pos = p;
                        e->name = qname;
                        e->named_args = parse_named_args("argument");
                        expect(Tok::rparen, "')'");
                        return e;
                    }
                    if (at(Tok::lbrace)) {
                        advance();
                        auto e = std::make_unique<Expr>();
                        e->kind = Expr::Kind::record_literal;
                        e->pos = p;
                        e->name = qname;
                        e->named_args = parse_named_args("field");
                        expect(Tok::rbrace, "'}'");
                        return e;
                    }
                    throw SyntaxError(cur().pos,
                                      "expected '(', '{' or '::' after qualified name '" + qname +
                                          "'");
                }
                if (at(Tok::lparen)) {
                    advance();
                    auto e = std::make_unique<Expr>();
                    e->kind = Expr::Kind::builtin_call;
                    e->pos = p;
                    e->name = head.text;
                    if (!at(Tok::rparen)) {
                        while (true) {
                            e->args.push_back(parse_expr());
                            if (!accept(Tok::comma)) break;
                        }
                    }
                    expect(Tok::rparen, "')'");
                    return e;
                }
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::var;
                e->pos = p;
                e->name = head.text;
                return e;
            }
            default:
                throw SyntaxError(p, std::string("expected expression, found ") +
                                         token_name(cur().kind));
        }
    }

    TypePtr parse_type(int depth) {
        if (depth > kMaxNestingDepth)
            throw SyntaxError(cur().pos, "type nesting exceeds depth 64");
        Token head = expect(Tok::ident, "type name");
        const std::string& n = head.text;
        if (n == "int") return TypeExpr::prim(TypeKind::t_int);
        if (n == "float") return TypeExpr::prim(TypeKind::t_float);
        if (n == "bool") return TypeExpr::prim(TypeKind::t_bool);
        if (n == "string") return TypeExpr::prim(TypeKind::t_string);
        if (n == "money") return TypeExpr::prim(TypeKind::t_money);
        if (n == "list" || n == "optional") {
            expect(Tok::lt, "'<'");
            auto elem = parse_type(depth + 1);
            expect(Tok::gt, "'>'");
            return n == "list" ? TypeExpr::list_of(std::move(elem))
                               : TypeExpr::optional_of(std::move(elem));
        }
        if (accept(Tok::coloncolon)) {
            Token second = expect(Tok::ident, "type name after '::'");
            return TypeExpr::named_ref(n + "::" + second.text);
        }
        return TypeExpr::named_ref(n);
    }

    std::vector<Token> toks_;
    std::size_t idx_ = 0;
};

}  // namespace

WorkflowProgram parse_workflow(const std::string& text) {
    Parser p(Lexer(text).run());
    return p.parse_program(text);
}

ExprPtr parse_expression_text(const std::string& text) {
    Parser p(Lexer(text).run());
    return p.parse_single_expression();
}

TypePtr parse_type_text(const std::string& text) {
    Parser p(Lexer(text).run());
    return p.parse_single_type();
}

}  // namespace webverbs::wfl
