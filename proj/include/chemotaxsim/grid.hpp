#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "chemotaxsim/errors.hpp"

namespace chemotaxsim {

// Uniform rectangular box, cell-centered storage. Unused trailing axes carry
// one cell of unit length so that all loops can run over three axes.
struct GridSpec {
    int dim = 0;
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};

    static GridSpec make(int dim, const std::vector<int>& n, const std::vector<double>& len) {
        if (dim < 1 || dim > 3)
            throw parameter_error("grid dimension must be 1, 2 or 3");
        if (static_cast<int>(n.size()) != dim || static_cast<int>(len.size()) != dim)
            throw parameter_error("cells/lengths must have one entry per axis");
        GridSpec g;
        g.dim = dim;
        for (int a = 0; a < dim; ++a) {
            if (n[a] < 2)
                throw parameter_error("every axis needs at least 2 cells");
            if (!(len[a] > 0.0) || !std::isfinite(len[a]))
                throw parameter_error("every axis length must be positive");
            g.cells[a] = n[a];
            g.lengths[a] = len[a];
            g.spacing[a] = len[a] / n[a];
        }
        return g;
    }

    std::size_t total_cells() const {
        return static_cast<std::size_t>(cells[0]) * cells[1] * cells[2];
    }
    double cell_volume() const { return spacing[0] * spacing[1] * spacing[2] / pad_volume(); }
    double measure() const { return lengths[0] * lengths[1] * lengths[2] / pad_volume(); }

    // Cell center coordinate along one axis.
    double center(int axis, int i) const { return (i + 0.5) * spacing[axis]; }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * cells[1] + j) * static_cast<std::size_t>(cells[2]) + k;
    }

    bool same_shape(const GridSpec& o) const {
        return dim == o.dim && cells == o.cells && lengths == o.lengths;
    }

private:
    // Unused axes contribute factor 1 to volumes by construction.
    double pad_volume() const { return 1.0; }
};

struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0)
        : grid(g), values(g.total_cells(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

// One value per cell face, per axis. Along axis a there are cells[a]+1 face
// layers; layer 0 and layer cells[a] are boundary faces.
struct FaceField {
    GridSpec grid;
    std::array<std::vector<double>, 3> axis;

    FaceField() = default;
    explicit FaceField(const GridSpec& g) : grid(g) {
        for (int a = 0; a < 3; ++a) {
            std::array<int, 3> e = g.cells;
            if (a < g.dim) e[a] += 1;
            axis[a].assign(static_cast<std::size_t>(e[0]) * e[1] * e[2], 0.0);
        }
    }

    std::size_t findex(int a, int i, int j, int k) const {
        std::array<int, 3> e = grid.cells;
        if (a < grid.dim) e[a] += 1;
        return (static_cast<std::size_t>(i) * e[1] + j) * static_cast<std::size_t>(e[2]) + k;
    }
};

inline void ensure_finite(const ScalarField& f, const char* what) {
    for (double v : f.values)
        if (!std::isfinite(v))
            throw data_integrity_error(std::string("non-finite value in ") + what);
}

// Midpoint-rule integral over the box.
inline double integrate(const ScalarField& f) {
    ensure_finite(f, "integrate operand");
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

inline double lp_norm(const ScalarField& f, double p) {
    ensure_finite(f, "lp_norm operand");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    if (p < 1.0)
        throw parameter_error("lp_norm requires p >= 1");
    double s = 0.0;
    for (double v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

// Two-point difference gradients on faces; boundary faces are exactly 0,
// which is the zero-flux encoding of the homogeneous Neumann condition.
inline FaceField face_gradient(const ScalarField& f) {
    ensure_finite(f, "face_gradient operand");
    const GridSpec& g = f.grid;
    FaceField out(g);
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    for (int a = 0; a < g.dim; ++a) {
        const double inv_h = 1.0 / g.spacing[a];
        const std::array<int, 3> step{a == 0 ? 1 : 0, a == 1 ? 1 : 0, a == 2 ? 1 : 0};
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) {
                    // interior face between cell (i,j,k) and its +a neighbor
                    const int ia = (a == 0 ? i : (a == 1 ? j : k));
                    if (ia + 1 >= g.cells[a]) continue;
                    const double lo = f[g.index(i, j, k)];
                    const double hi = f[g.index(i + step[0], j + step[1], k + step[2])];
                    out.axis[a][out.findex(a, i + step[0], j + step[1], k + step[2])] =
                        (hi - lo) * inv_h;
                }
    }
    return out;
}

// Face-assembled \int |grad f|^2: each interior face contributes g^2 times one
// cell volume (face area times the spacing across the face).
inline double grad_l2_sq(const ScalarField& f) {
    FaceField gf = face_gradient(f);
    double s = 0.0;
    for (int a = 0; a < f.grid.dim; ++a)
        for (double v : gf.axis[a]) s += v * v;
    return s * f.grid.cell_volume();
}

// Cellwise |grad f|^2 by the same face assembly, each face's contribution
// split evenly between its two adjacent cells. Summing the result times cell
// volume reproduces grad_l2_sq exactly.
inline ScalarField cellwise_grad_sq(const FaceField& gf) {
    const GridSpec& g = gf.grid;
    ScalarField out(g, 0.0);
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    for (int a = 0; a < g.dim; ++a) {
        const std::array<int, 3> step{a == 0 ? 1 : 0, a == 1 ? 1 : 0, a == 2 ? 1 : 0};
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) {
                    const int ia = (a == 0 ? i : (a == 1 ? j : k));
                    if (ia + 1 >= g.cells[a]) continue;
                    const double v =
                        gf.axis[a][gf.findex(a, i + step[0], j + step[1], k + step[2])];
                    const double half = 0.5 * v * v;
                    out[g.index(i, j, k)] += half;
                    out[g.index(i + step[0], j + step[1], k + step[2])] += half;
                }
    }
    return out;
}

// Discrete divergence of a face flux with zero boundary flux. The telescoping
// sum makes integrate(div_flux(F)) vanish to roundoff.
inline ScalarField div_flux(const FaceField& F) {
    const GridSpec& g = F.grid;
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    for (int a = 0; a < g.dim; ++a) {
        for (int i = 0; i < (a == 0 ? 1 : n0); ++i)
            for (int j = 0; j < (a == 1 ? 1 : n1); ++j)
                for (int k = 0; k < (a == 2 ? 1 : n2); ++k) {
                    std::array<int, 3> lo{i, j, k}, hi{i, j, k};
                    hi[a] = g.cells[a];
                    if (F.axis[a][F.findex(a, lo[0], lo[1], lo[2])] != 0.0 ||
                        F.axis[a][F.findex(a, hi[0], hi[1], hi[2])] != 0.0)
                        throw contract_error("div_flux requires zero boundary flux");
                }
    }
    ScalarField out(g, 0.0);
    for (int a = 0; a < g.dim; ++a) {
        const double inv_h = 1.0 / g.spacing[a];
        const std::array<int, 3> step{a == 0 ? 1 : 0, a == 1 ? 1 : 0, a == 2 ? 1 : 0};
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) {
                    const double flo = F.axis[a][F.findex(a, i, j, k)];
                    const double fhi =
                        F.axis[a][F.findex(a, i + step[0], j + step[1], k + step[2])];
                    out[g.index(i, j, k)] += (fhi - flo) * inv_h;
                }
    }
    return out;
}

// ---- CHEMOFIELD v1 snapshot format ----------------------------------------

inline void write_chemofield(std::ostream& os, const ScalarField& f, double t) {
    os << "CHEMOFIELD v1 dim=" << f.grid.dim << " cells=";
    for (int a = 0; a < f.grid.dim; ++a) os << (a ? "," : "") << f.grid.cells[a];
    os << " lengths=";
    os.precision(17);
    for (int a = 0; a < f.grid.dim; ++a) os << (a ? "," : "") << f.grid.lengths[a];
    os << " t=" << t << "\n";
    for (double v : f.values) os << v << "\n";
}

inline void write_chemofield(const std::string& path, const ScalarField& f, double t) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open snapshot file for writing", path);
    write_chemofield(os, f, t);
    if (!os) throw io_error("snapshot write failed", path);
}

struct FieldSnapshot {
    ScalarField field;
    double t = 0.0;
};

inline FieldSnapshot read_chemofield(std::istream& is, const std::string& path = "<stream>") {
    std::string header;
    if (!std::getline(is, header))
        throw io_error("empty snapshot file", path);
    std::istringstream hs(header);
    std::string magic, ver;
    hs >> magic >> ver;
    if (magic != "CHEMOFIELD" || ver != "v1")
        throw io_error("not a CHEMOFIELD v1 file", path);
    int dim = 0;
    std::vector<int> cells;
    std::vector<double> lengths;
    double t = 0.0;
    std::string tok;
    auto split_list = [](const std::string& s, auto push) {
        std::istringstream ls(s);
        std::string item;
        while (std::getline(ls, item, ',')) push(item);
    };
    while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "dim") dim = std::stoi(val);
        else if (key == "cells") split_list(val, [&](const std::string& s) { cells.push_back(std::stoi(s)); });
        else if (key == "lengths") split_list(val, [&](const std::string& s) { lengths.push_back(std::stod(s)); });
        else if (key == "t") t = std::stod(val);
    }
    FieldSnapshot snap;
    snap.t = t;
    snap.field = ScalarField(GridSpec::make(dim, cells, lengths));
    for (double& v : snap.field.values)
        if (!(is >> v)) throw io_error("truncated snapshot file", path);
    return snap;
}

inline FieldSnapshot read_chemofield(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open snapshot file", path);
    return read_chemofield(is, path);
}

} // namespace chemotaxsim
