#include "fbamp/netlist.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

namespace fbamp::netlist {

namespace {

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct Token {
    std::string text;
    int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view code) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < code.size()) {
        if (std::isspace(static_cast<unsigned char>(code[i]))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < code.size() && !std::isspace(static_cast<unsigned char>(code[i]))) ++i;
        out.push_back({std::string(code.substr(start, i - start)),
                       static_cast<int>(start) + 1});
    }
    return out;
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
    return true;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size() || !std::isfinite(v)) return false;
    out = v;
    return true;
}

net::Endpoint parse_endpoint(const std::string& s) {
    const auto dot = s.find('.');
    if (dot == std::string::npos) return {"", s};
    return {s.substr(0, dot), s.substr(dot + 1)};
}

std::string endpoint_text(const net::Endpoint& e) {
    return e.is_mode() ? e.port : e.component + "." + e.port;
}

struct LineParser {
    std::vector<Diagnostic>& diags;
    int line;
    const std::vector<Token>& tokens;
    bool failed = false;

    void error(int column, std::string msg) {
        diags.push_back({Severity::Error, std::move(msg), line, column});
        failed = true;
    }

    const Token* need(std::size_t index, const char* what) {
        if (index < tokens.size()) return &tokens[index];
        const int col = tokens.empty() ? 1 : tokens.back().column +
                                                 static_cast<int>(tokens.back().text.size());
        error(col, std::string("expected ") + what);
        return nullptr;
    }

    bool no_extra(std::size_t count) {
        if (tokens.size() <= count) return true;
        error(tokens[count].column, "unexpected trailing token '" + tokens[count].text + "'");
        return false;
    }

    bool identifier(std::size_t index, const char* what, std::string& out) {
        const Token* tok = need(index, what);
        if (!tok) return false;
        if (!is_identifier(tok->text)) {
            error(tok->column, std::string("invalid ") + what + " '" + tok->text + "'");
            return false;
        }
        out = tok->text;
        return true;
    }

    bool number(std::size_t index, const char* what, double& out) {
        const Token* tok = need(index, what);
        if (!tok) return false;
        if (!parse_number(tok->text, out)) {
            error(tok->column, std::string("invalid ") + what + " '" + tok->text + "'");
            return false;
        }
        return true;
    }

    // token of the form key=<number>
    bool key_value(std::size_t index, const char* key, double& out) {
        const Token* tok = need(index, "parameter");
        if (!tok) return false;
        const std::string prefix = std::string(key) + "=";
        if (tok->text.rfind(prefix, 0) != 0) {
            error(tok->column, "expected " + prefix + "<value>, got '" + tok->text + "'");
            return false;
        }
        if (!parse_number(tok->text.substr(prefix.size()), out)) {
            error(tok->column + static_cast<int>(prefix.size()),
                  "invalid number in '" + tok->text + "'");
            return false;
        }
        return true;
    }
};

}  // namespace

ParseResult parse_netlist(std::string_view text) {
    ParseResult result;
    auto& diags = result.diagnostics;

    std::map<std::string, int> mode_line, comp_line;
    std::vector<int> link_lines, output_lines;
    net::NetworkSpec spec;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos
                                                    ? text.size() - pos
                                                    : nl - pos);
        if (nl == std::string_view::npos && pos == text.size() && line_no > 0) break;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

        Statement st;
        st.line = line_no;
        const auto hash = raw.find('#');
        std::string_view code = raw;
        if (hash != std::string_view::npos) {
            st.has_comment = true;
            st.comment = std::string(raw.substr(hash + 1));
            code = raw.substr(0, hash);
        }
        const auto tokens = tokenize(code);
        if (tokens.empty()) {
            result.document.statements.push_back(std::move(st));
            continue;
        }

        LineParser lp{diags, line_no, tokens};
        const std::string& head = tokens[0].text;
        if (head == "mode") {
            std::string name, kind;
            if (!lp.identifier(1, "mode name", name)) continue;
            const Token* kt = lp.need(2, "mode kind (vacuum|idler|coherent)");
            if (!kt) continue;
            kind = kt->text;
            Mode mode;
            mode.name = name;
            if (kind == "vacuum") {
                mode.kind = ModeKind::Vacuum;
                if (!lp.no_extra(3)) continue;
            } else if (kind == "idler") {
                mode.kind = ModeKind::Idler;
                if (!lp.no_extra(3)) continue;
            } else if (kind == "coherent") {
                mode.kind = ModeKind::Coherent;
                double re = 0.0, im = 0.0;
                if (!lp.number(3, "amplitude real part", re)) continue;
                if (!lp.number(4, "amplitude imaginary part", im)) continue;
                if (!lp.no_extra(5)) continue;
                mode.amplitude = Complex{re, im};
            } else {
                lp.error(kt->column, "unknown mode kind '" + kind + "'");
                continue;
            }
            st.kind = Statement::Kind::ModeDecl;
            st.mode = mode;
            if (!mode_line.count(name)) mode_line[name] = line_no;
            spec.sources.push_back(std::move(mode));
        } else if (head == "comp") {
            std::string id;
            if (!lp.identifier(1, "component id", id)) continue;
            const Token* kt = lp.need(2, "component kind (amp|bs|loss|phase)");
            if (!kt) continue;
            net::ComponentSpec comp;
            comp.id = id;
            double value = 0.0;
            if (kt->text == "amp") {
                comp.kind = net::ComponentKind::Amplifier;
                const Token* pt = lp.need(3, "gain=<x> or gain_db=<x>");
                if (!pt) continue;
                if (pt->text.rfind("gain_db=", 0) == 0) {
                    if (!lp.key_value(3, "gain_db", value)) continue;
                    if (!std::isfinite(value) || value < 0.0) {
                        lp.error(pt->column, "gain_db must be >= 0");
                        continue;
                    }
                    // dB accepted wherever gain is specified; converted once
                    comp.param = std::sqrt((std::pow(10.0, value / 10.0) + 1.0) / 2.0);
                } else {
                    if (!lp.key_value(3, "gain", value)) continue;
                    comp.param = value;
                }
                if (!lp.no_extra(4)) continue;
            } else if (kt->text == "bs") {
                comp.kind = net::ComponentKind::BeamSplitter;
                if (!lp.key_value(3, "t", value) || !lp.no_extra(4)) continue;
                comp.param = value;
            } else if (kt->text == "loss") {
                comp.kind = net::ComponentKind::Loss;
                if (!lp.key_value(3, "l", value) || !lp.no_extra(4)) continue;
                comp.param = value;
            } else if (kt->text == "phase") {
                comp.kind = net::ComponentKind::Phase;
                if (!lp.key_value(3, "phi", value) || !lp.no_extra(4)) continue;
                comp.param = value;
            } else {
                lp.error(kt->column, "unknown component kind '" + kt->text + "'");
                continue;
            }
            st.kind = Statement::Kind::Component;
            st.component = comp;
            if (!comp_line.count(id)) comp_line[id] = line_no;
            spec.components.push_back(std::move(comp));
        } else if (head == "link") {
            const Token* src = lp.need(1, "link source");
            if (!src) continue;
            const Token* arrow = lp.need(2, "'->'");
            if (!arrow) continue;
            if (arrow->text != "->") {
                lp.error(arrow->column, "expected '->', got '" + arrow->text + "'");
                continue;
            }
            const Token* dst = lp.need(3, "link target");
            if (!dst || !lp.no_extra(4)) continue;
            st.kind = Statement::Kind::LinkDecl;
            st.link = {parse_endpoint(src->text), parse_endpoint(dst->text)};
            link_lines.push_back(line_no);
            spec.links.push_back(st.link);
        } else if (head == "out") {
            const Token* pt = lp.need(1, "output port");
            if (!pt) continue;
            const Token* as = lp.need(2, "'as'");
            if (!as) continue;
            if (as->text != "as") {
                lp.error(as->column, "expected 'as', got '" + as->text + "'");
                continue;
            }
            std::string name;
            if (!lp.identifier(3, "output name", name) || !lp.no_extra(4)) continue;
            const net::Endpoint ep = parse_endpoint(pt->text);
            if (ep.is_mode()) {
                lp.error(pt->column, "output must name a component port (<comp>.<port>)");
                continue;
            }
            st.kind = Statement::Kind::Output;
            st.output = {{ep.component, ep.port}, name};
            output_lines.push_back(line_no);
            spec.outputs.push_back(st.output);
        } else {
            lp.error(tokens[0].column, "unknown directive '" + head + "'");
            continue;
        }
        result.document.statements.push_back(std::move(st));
    }

    bool has_error = false;
    for (const auto& d : diags) has_error = has_error || d.severity == Severity::Error;

    if (!has_error && spec.sources.empty() && spec.components.empty()) {
        diags.push_back({Severity::Error, "empty network", 1, 1});
        has_error = true;
    }

    if (!has_error) {
        for (const auto& v : spec.check()) {
            Diagnostic d{Severity::Error, v.message, 1, 1};
            if (v.link_index >= 0 && v.link_index < static_cast<int>(link_lines.size()))
                d.line = link_lines[v.link_index];
            else if (v.output_index >= 0 &&
                     v.output_index < static_cast<int>(output_lines.size()))
                d.line = output_lines[v.output_index];
            else if (!v.component.empty() && comp_line.count(v.component))
                d.line = comp_line[v.component];
            else if (!v.mode.empty() && mode_line.count(v.mode))
                d.line = mode_line[v.mode];
            diags.push_back(std::move(d));
            has_error = true;
        }
    }

    if (!has_error) result.spec = std::move(spec);
    return result;
}

namespace {

std::string statement_text(const Statement& st) {
    std::ostringstream out;
    switch (st.kind) {
        case Statement::Kind::Blank: break;
        case Statement::Kind::ModeDecl:
            out << "mode " << st.mode.name << ' ';
            switch (st.mode.kind) {
                case ModeKind::Vacuum: out << "vacuum"; break;
                case ModeKind::Idler: out << "idler"; break;
                case ModeKind::Coherent: {
                    const Complex amp = st.mode.amplitude.value_or(Complex{0.0, 0.0});
                    out << "coherent " << format_number(amp.real()) << ' '
                        << format_number(amp.imag());
                    break;
                }
            }
            break;
        case Statement::Kind::Component:
            out << "comp " << st.component.id << ' ';
            switch (st.component.kind) {
                case net::ComponentKind::Amplifier:
                    out << "amp gain=" << format_number(st.component.param);
                    break;
                case net::ComponentKind::BeamSplitter:
                    out << "bs t=" << format_number(st.component.param);
                    break;
                case net::ComponentKind::Loss:
                    out << "loss l=" << format_number(st.component.param);
                    break;
                case net::ComponentKind::Phase:
                    out << "phase phi=" << format_number(st.component.param);
                    break;
            }
            break;
        case Statement::Kind::LinkDecl:
            out << "link " << endpoint_text(st.link.from) << " -> "
                << endpoint_text(st.link.to);
            break;
        case Statement::Kind::Output:
            out << "out " << st.output.port.component << '.' << st.output.port.port
                << " as " << st.output.name;
            break;
    }
    return out.str();
}

}  // namespace

std::string serialize_document(const NetlistDocument& doc) {
    std::ostringstream out;
    for (const auto& st : doc.statements) {
        std::string text = statement_text(st);
        if (st.has_comment) {
            if (!text.empty()) text += " ";
            text += "#" + st.comment;
        }
        out << text << '\n';
    }
    return out.str();
}

std::string serialize_netlist(const net::NetworkSpec& spec) {
    NetlistDocument doc;
    for (const auto& m : spec.sources) {
        Statement st;
        st.kind = Statement::Kind::ModeDecl;
        st.mode = m;
        doc.statements.push_back(std::move(st));
    }
    for (const auto& c : spec.components) {
        Statement st;
        st.kind = Statement::Kind::Component;
        st.component = c;
        doc.statements.push_back(std::move(st));
    }
    for (const auto& l : spec.links) {
        Statement st;
        st.kind = Statement::Kind::LinkDecl;
        st.link = l;
        doc.statements.push_back(std::move(st));
    }
    for (const auto& o : spec.outputs) {
        Statement st;
        st.kind = Statement::Kind::Output;
        st.output = o;
        doc.statements.push_back(std::move(st));
    }
    return serialize_document(doc);
}

}  // namespace fbamp::netlist
