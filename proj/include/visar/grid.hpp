#pragma once

#include <string>
#include <vector>

namespace visar {

/// Regular raster in a planar metric CRS, read from ESRI ASCII grid files.
/// Values are stored row-major exactly as in the file: row 0 is the
/// northernmost row. Cell (col, row) covers
///   x in [xll + col*cell, xll + (col+1)*cell)
///   y in [yll + (nrows-1-row)*cell, yll + (nrows-row)*cell)
struct Grid {
    int ncols = 0;
    int nrows = 0;
    double xll = 0.0;   ///< x of the lower-left corner of the grid (m)
    double yll = 0.0;   ///< y of the lower-left corner of the grid (m)
    double cell = 1.0;  ///< cell size (m)
    double nodata = -9999.0;
    std::vector<double> values; ///< ncols * nrows, row-major from the north

    bool empty() const { return ncols <= 0 || nrows <= 0; }
    double xmin() const { return xll; }
    double ymin() const { return yll; }
    double xmax() const { return xll + cell * ncols; }
    double ymax() const { return yll + cell * nrows; }

    double at(int col, int row) const { return values[static_cast<size_t>(row) * ncols + col]; }
    double& at(int col, int row) { return values[static_cast<size_t>(row) * ncols + col]; }
    bool is_nodata(double v) const { return v == nodata; }

    bool contains(double x, double y) const {
        return x >= xmin() && x < xmax() && y >= ymin() && y < ymax();
    }
    int col_of(double x) const { return static_cast<int>((x - xll) / cell); }
    int row_of(double y) const {
        int from_bottom = static_cast<int>((y - yll) / cell);
        return nrows - 1 - from_bottom;
    }
    /// Value of the cell containing (x, y); nodata sentinel outside the extent.
    double value_at(double x, double y) const {
        if (!contains(x, y)) return nodata;
        return at(col_of(x), row_of(y));
    }

    /// Same origin, cell size and shape (exact comparison; resampling is the
    /// caller's job).
    bool aligned_with(const Grid& o) const {
        return ncols == o.ncols && nrows == o.nrows && xll == o.xll && yll == o.yll &&
               cell == o.cell;
    }
};

/// Parses an ESRI ASCII grid (.asc). Honors NODATA_value; accepts
/// xllcorner/yllcorner or xllcenter/yllcenter headers.
Grid read_asc(const std::string& path);

void write_asc(const Grid& grid, const std::string& path);

} // namespace visar
