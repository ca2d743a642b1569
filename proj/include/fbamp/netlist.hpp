#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fbamp/network.hpp"

namespace fbamp::netlist {

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity;
    std::string message;
    int line = 1;    // 1-based
    int column = 1;  // 1-based
};

/// One netlist statement with its source position and trailing comment, so a
/// document round-trips comments intact.
struct Statement {
    enum class Kind { Blank, ModeDecl, Component, LinkDecl, Output };
    Kind kind = Kind::Blank;
    Mode mode;
    net::ComponentSpec component;
    net::Link link;
    net::OutputDecl output;
    bool has_comment = false;
    std::string comment;
    int line = 0;
};

struct NetlistDocument {
    std::vector<Statement> statements;
};

struct ParseResult {
    std::optional<net::NetworkSpec> spec;  // present iff no error diagnostics
    NetlistDocument document;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return spec.has_value(); }
};

/// Line-oriented netlist grammar (`#` starts a comment):
///   mode <name> vacuum | mode <name> idler | mode <name> coherent <re> <im>
///   comp <id> amp gain=<x> | comp <id> amp gain_db=<x>
///   comp <id> bs t=<x>
///   comp <id> loss l=<x>
///   comp <id> phase phi=<x>
///   link <endpoint> -> <endpoint>      endpoint: <mode> or <comp>.<port>
///   out <comp>.<port> as <name>
/// Never throws on malformed input; every failure becomes a positioned
/// diagnostic and parsing continues on the next line.
ParseResult parse_netlist(std::string_view text);

/// Canonical text form of a validated network; parse(serialize(spec))
/// structurally equals spec.
std::string serialize_netlist(const net::NetworkSpec& spec);

/// Text form of a parsed document, preserving comments and blank lines.
std::string serialize_document(const NetlistDocument& doc);

}  // namespace fbamp::netlist
