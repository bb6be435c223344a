#include "ftme/fieldio.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ftme/errors.hpp"

namespace ftme {

namespace {

std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& token, std::size_t line)
{
    if (token.empty()) {
        throw IoError("csv parse error at line " + std::to_string(line) + ": empty field");
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE) {
        throw IoError("csv parse error at line " + std::to_string(line) + ": bad number '" + token + "'");
    }
    return v;
}

void write_file(const std::filesystem::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

}  // namespace

void Grid2D::validate() const
{
    if (!(x_max > x_min) || !(y_max > y_min)) {
        throw InvalidArgument("grid bounds must satisfy max > min");
    }
    if (nx < 2 || ny < 2) {
        throw InvalidArgument("grid needs at least 2 nodes per axis");
    }
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) || !std::isfinite(y_max)) {
        throw InvalidArgument("grid bounds must be finite");
    }
}

Grid2D Grid2D::parse(const std::string& spec)
{
    // xmin:xmax:ymin:ymax:NXxNY
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        parts.push_back(item);
    }
    if (parts.size() != 5) {
        throw InvalidArgument("grid spec must look like xmin:xmax:ymin:ymax:NXxNY, got '" + spec + "'");
    }
    Grid2D g;
    try {
        std::size_t used = 0;
        auto num = [&](const std::string& s) {
            const double v = std::stod(s, &used);
            if (used != s.size()) {
                throw std::invalid_argument(s);
            }
            return v;
        };
        g.x_min = num(parts[0]);
        g.x_max = num(parts[1]);
        g.y_min = num(parts[2]);
        g.y_max = num(parts[3]);
        const std::size_t cross = parts[4].find('x');
        if (cross == std::string::npos) {
            throw std::invalid_argument(parts[4]);
        }
        const std::string nx_s = parts[4].substr(0, cross);
        const std::string ny_s = parts[4].substr(cross + 1);
        g.nx = std::stoi(nx_s, &used);
        if (used != nx_s.size()) {
            throw std::invalid_argument(nx_s);
        }
        g.ny = std::stoi(ny_s, &used);
        if (used != ny_s.size()) {
            throw std::invalid_argument(ny_s);
        }
    } catch (const std::logic_error&) {
        throw InvalidArgument("grid spec must look like xmin:xmax:ymin:ymax:NXxNY, got '" + spec + "'");
    }
    g.validate();
    return g;
}

std::string Grid2D::to_spec() const
{
    std::ostringstream out;
    out << format_real(x_min) << ':' << format_real(x_max) << ':' << format_real(y_min) << ':'
        << format_real(y_max) << ':' << nx << 'x' << ny;
    return out.str();
}

ScalarField2D::ScalarField2D(const Grid2D& g)
    : grid(g), values(g.size(), 0.0), mask(g.size(), 1), status(g.size(), NodeStatus::valid)
{
    g.validate();
}

std::size_t ScalarField2D::valid_count() const
{
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::optional<std::pair<double, double>> ScalarField2D::valid_range() const
{
    std::optional<std::pair<double, double>> range;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!mask[k]) {
            continue;
        }
        if (!range) {
            range = std::make_pair(values[k], values[k]);
        } else {
            range->first = std::min(range->first, values[k]);
            range->second = std::max(range->second, values[k]);
        }
    }
    return range;
}

std::string to_csv(const ScalarField2D& field)
{
    const auto range = field.valid_range();
    const double fill = range ? range->second : 0.0;
    std::string out = "x,y,value,valid\n";
    out.reserve(field.values.size() * 64);
    for (int j = 0; j < field.grid.ny; ++j) {
        for (int i = 0; i < field.grid.nx; ++i) {
            const std::size_t k = field.grid.index(i, j);
            const bool ok = field.mask[k] != 0;
            out += format_real(field.grid.x(i));
            out += ',';
            out += format_real(field.grid.y(j));
            out += ',';
            out += format_real(ok ? field.values[k] : fill);
            out += ok ? ",1\n" : ",0\n";
        }
    }
    return out;
}

void export_csv(const ScalarField2D& field, const std::filesystem::path& path)
{
    write_file(path, to_csv(field));
}

std::string to_pgm(const ScalarField2D& field, std::optional<std::pair<double, double>> clip)
{
    double lo = 0.0;
    double hi = 1.0;
    if (clip) {
        lo = clip->first;
        hi = clip->second;
        if (!(hi > lo)) {
            throw InvalidArgument("export_pgm: clip range needs hi > lo");
        }
    } else if (const auto range = field.valid_range()) {
        lo = range->first;
        hi = range->second;
        if (!(hi > lo)) {
            // Constant field: a unit-width window centred on the value renders mid-grey.
            lo -= 0.5;
            hi = lo + 1.0;
        }
    }

    std::string out = "P5\n" + std::to_string(field.grid.nx) + " " + std::to_string(field.grid.ny) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + field.grid.size());
    std::size_t pos = header;
    for (int j = field.grid.ny - 1; j >= 0; --j) {
        for (int i = 0; i < field.grid.nx; ++i) {
            const std::size_t k = field.grid.index(i, j);
            unsigned char pixel = 0;
            if (field.mask[k]) {
                const double scaled = (field.values[k] - lo) / (hi - lo) * 255.0;
                pixel = static_cast<unsigned char>(std::lround(std::clamp(scaled, 0.0, 255.0)));
            }
            out[pos++] = static_cast<char>(pixel);
        }
    }
    return out;
}

void export_pgm(const ScalarField2D& field, const std::filesystem::path& path,
                std::optional<std::pair<double, double>> clip)
{
    write_file(path, to_pgm(field, clip));
}

ScalarField2D parse_csv(const std::string& text)
{
    struct Row {
        double x, y, value;
        bool valid;
    };
    std::vector<Row> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw IoError("csv parse error at line 1: missing header");
    }
    ++line_no;
    if (line != "x,y,value,valid") {
        throw IoError("csv parse error at line 1: unexpected header '" + line + "'");
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cols.push_back(cell);
        }
        if (cols.size() != 4) {
            throw IoError("csv parse error at line " + std::to_string(line_no) + ": expected 4 columns");
        }
        if (cols[3] != "0" && cols[3] != "1") {
            throw IoError("csv parse error at line " + std::to_string(line_no) + ": valid flag must be 0 or 1");
        }
        rows.push_back(Row{parse_real(cols[0], line_no), parse_real(cols[1], line_no),
                           parse_real(cols[2], line_no), cols[3] == "1"});
    }
    if (rows.size() < 4) {
        throw IoError("csv parse error: need at least a 2x2 grid");
    }

    int nx = 1;
    while (static_cast<std::size_t>(nx) < rows.size() && rows[nx].y == rows[0].y) {
        ++nx;
    }
    if (rows.size() % static_cast<std::size_t>(nx) != 0) {
        throw IoError("csv parse error: ragged grid (" + std::to_string(rows.size()) + " rows, " +
                      std::to_string(nx) + " per line)");
    }
    Grid2D g;
    g.nx = nx;
    g.ny = static_cast<int>(rows.size() / nx);
    g.x_min = rows.front().x;
    g.x_max = rows[nx - 1].x;
    g.y_min = rows.front().y;
    g.y_max = rows.back().y;
    try {
        g.validate();
    } catch (const InvalidArgument& e) {
        throw IoError(std::string("csv parse error: ") + e.what());
    }

    ScalarField2D field(g);
    const double tol_x = 1e-9 * (g.x_max - g.x_min);
    const double tol_y = 1e-9 * (g.y_max - g.y_min);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const Row& r = rows[k];
            if (std::abs(r.x - g.x(i)) > tol_x || std::abs(r.y - g.y(j)) > tol_y) {
                throw IoError("csv parse error at line " + std::to_string(k + 2) + ": node off the regular grid");
            }
            field.values[k] = r.value;
            field.mask[k] = r.valid ? 1 : 0;
            field.status[k] = r.valid ? NodeStatus::valid : NodeStatus::masked;
        }
    }
    return field;
}

ScalarField2D import_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str());
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace ftme
