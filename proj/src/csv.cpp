#include "fbamp/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fbamp/errors.hpp"

namespace fbamp::io {

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string write_csv(const experiments::DataSeries& series) {
    std::ostringstream out;
    if (!series.x_label.empty()) out << "# x=" << series.x_label << '\n';
    if (!series.y_label.empty()) out << "# y=" << series.y_label << '\n';
    out << "# scale=" << (series.y_scale == experiments::Scale::Db ? "db" : "linear")
        << '\n';
    for (const auto& [k, v] : series.metadata) out << "# " << k << '=' << v << '\n';

    bool any_yerr = false;
    for (const auto& pt : series.points) any_yerr = any_yerr || pt.yerr.has_value();
    out << (any_yerr ? "x,y,yerr" : "x,y") << '\n';
    for (const auto& pt : series.points) {
        out << format_double(pt.x) << ',';
        if (pt.y) out << format_double(*pt.y);
        if (any_yerr) {
            out << ',';
            if (pt.yerr) out << format_double(*pt.yerr);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

bool parse_field(std::string_view s, double& out) {
    std::string buf(s);
    const char* begin = buf.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + buf.size() && !buf.empty();
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

experiments::DataSeries read_csv(std::string_view text) {
    experiments::DataSeries series;
    bool header_seen = false;
    bool has_yerr = false;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        if (line[0] == '#') {
            std::string_view body = line.substr(1);
            while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            const std::string key(body.substr(0, eq));
            const std::string value(body.substr(eq + 1));
            if (key == "x")
                series.x_label = value;
            else if (key == "y")
                series.y_label = value;
            else if (key == "scale")
                series.y_scale = value == "db" ? experiments::Scale::Db
                                               : experiments::Scale::Linear;
            else
                series.metadata[key] = value;
            continue;
        }

        if (!header_seen) {
            if (line == "x,y")
                has_yerr = false;
            else if (line == "x,y,yerr")
                has_yerr = true;
            else
                throw CsvError("expected header row 'x,y' or 'x,y,yerr'", line_no);
            header_seen = true;
            continue;
        }

        const auto fields = split_fields(line);
        if (fields.size() != (has_yerr ? 3u : 2u))
            throw CsvError("wrong number of fields", line_no);
        experiments::DataPoint pt;
        if (!parse_field(fields[0], pt.x)) throw CsvError("invalid x value", line_no);
        if (!fields[1].empty()) {
            double y;
            if (!parse_field(fields[1], y)) throw CsvError("invalid y value", line_no);
            pt.y = y;
        }
        if (has_yerr && !fields[2].empty()) {
            double e;
            if (!parse_field(fields[2], e)) throw CsvError("invalid yerr value", line_no);
            pt.yerr = e;
        }
        if (!series.points.empty() && !(pt.x > series.points.back().x))
            throw CsvError("x values must be strictly increasing", line_no);
        series.points.push_back(pt);
    }
    if (!header_seen) throw CsvError("missing header row", line_no);
    return series;
}

void write_csv_file(const std::string& path, const experiments::DataSeries& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << write_csv(series);
    if (!out) throw Error("failed writing '" + path + "'");
}

experiments::DataSeries read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_csv(buf.str());
}

}  // namespace fbamp::io
