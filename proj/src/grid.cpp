#include "visar/grid.hpp"

#include "visar/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace visar {

Grid read_asc(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open grid file: " + path);

    Grid g;
    bool have_ncols = false, have_nrows = false, have_cell = false;
    bool x_is_center = false, y_is_center = false;
    std::string key;

    // Header: key/value lines until the first purely numeric token row.
    while (true) {
        std::streampos pos = in.tellg();
        if (!(in >> key)) throw ValidationError(path + ": truncated grid header");
        std::string lower = key;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        double v = 0.0;
        if (lower == "ncols") { in >> v; g.ncols = static_cast<int>(v); have_ncols = true; }
        else if (lower == "nrows") { in >> v; g.nrows = static_cast<int>(v); have_nrows = true; }
        else if (lower == "xllcorner") { in >> g.xll; }
        else if (lower == "yllcorner") { in >> g.yll; }
        else if (lower == "xllcenter") { in >> g.xll; x_is_center = true; }
        else if (lower == "yllcenter") { in >> g.yll; y_is_center = true; }
        else if (lower == "cellsize") { in >> g.cell; have_cell = true; }
        else if (lower == "nodata_value") { in >> g.nodata; }
        else {
            in.seekg(pos);
            break;
        }
        if (!in) throw ValidationError(path + ": malformed grid header near '" + key + "'");
    }
    if (!have_ncols || !have_nrows || !have_cell)
        throw ValidationError(path + ": grid header missing ncols/nrows/cellsize");
    if (g.ncols <= 0 || g.nrows <= 0)
        throw ValidationError(path + ": empty grid");
    if (g.cell <= 0.0)
        throw ValidationError(path + ": cellsize must be positive");
    if (x_is_center) g.xll -= 0.5 * g.cell;
    if (y_is_center) g.yll -= 0.5 * g.cell;

    size_t n = static_cast<size_t>(g.ncols) * g.nrows;
    g.values.resize(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(in >> g.values[i]))
            throw ValidationError(path + ": grid body truncated at value " + std::to_string(i));
    }
    return g;
}

void write_asc(const Grid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write grid file: " + path);
    out << "ncols " << g.ncols << "\n";
    out << "nrows " << g.nrows << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", g.xll);
    out << "xllcorner " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.10g", g.yll);
    out << "yllcorner " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.10g", g.cell);
    out << "cellsize " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.10g", g.nodata);
    out << "NODATA_value " << buf << "\n";
    for (int r = 0; r < g.nrows; ++r) {
        for (int c = 0; c < g.ncols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.10g", g.at(c, r));
            out << buf << (c + 1 < g.ncols ? " " : "\n");
        }
    }
}

} // namespace visar
