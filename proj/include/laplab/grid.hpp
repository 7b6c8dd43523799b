#pragma once

#include <algorithm>
#include <memory>
#include <vector>

#include "laplab/common.hpp"

namespace laplab {

// Strictly increasing radial sampling shared by tables and field data.
// Table grids may start at r = 0; solver grids start at a positive core
// radius so the reduced equation's r^alpha behaviour stays representable.
struct RadialGrid {
    std::vector<double> r;
    int dim = 3;

    std::size_t size() const { return r.size(); }
    double front() const { return r.front(); }
    double back() const { return r.back(); }

    void validate() const {
        if (dim < 1) throw std::invalid_argument("RadialGrid: dimension must be >= 1");
        if (r.size() < 2) throw std::invalid_argument("RadialGrid: need at least two nodes");
        if (r.front() < 0.0) throw std::invalid_argument("RadialGrid: radii must be >= 0");
        for (std::size_t i = 1; i < r.size(); ++i)
            if (!(r[i] > r[i - 1]))
                throw std::invalid_argument("RadialGrid: radii must be strictly increasing");
    }

    // Index of the cell [r[i], r[i+1]) containing x (clamped to the ends).
    std::size_t cell_of(double x) const {
        if (x <= r.front()) return 0;
        if (x >= r.back()) return r.size() - 2;
        auto it = std::upper_bound(r.begin(), r.end(), x);
        return std::size_t(it - r.begin()) - 1;
    }

    // Geometric spacing from r0 (> 0) out to rmax, growth factor `ratio`,
    // with an optional absolute step cap. A cap is how solver grids keep a
    // fixed number of nodes per local wavelength at the largest energy used.
    static RadialGrid geometric(double r0, double rmax, double ratio, int dim,
                                double step_cap = 0.0, double step_floor = 0.0) {
        if (!(r0 > 0.0) || !(rmax > r0)) throw std::invalid_argument("RadialGrid: bad span");
        if (!(ratio > 1.0)) throw std::invalid_argument("RadialGrid: ratio must exceed 1");
        RadialGrid g;
        g.dim = dim;
        g.r.push_back(r0);
        double x = r0;
        while (x < rmax) {
            double h = x * (ratio - 1.0);
            if (step_floor > 0.0) h = std::max(h, step_floor);
            if (step_cap > 0.0) h = std::min(h, step_cap);
            x += h;
            if (x >= rmax * (1.0 - 1e-12)) x = rmax;
            g.r.push_back(x);
        }
        g.validate();
        return g;
    }

    // Same graded layout but including the origin (table grids).
    static RadialGrid table(double rmax, double ratio, int dim, double first_step = 1e-3) {
        RadialGrid g = geometric(first_step, rmax, ratio, dim);
        g.r.insert(g.r.begin(), 0.0);
        g.validate();
        return g;
    }

    static RadialGrid uniform(double r0, double rmax, std::size_t n, int dim) {
        if (n < 2) throw std::invalid_argument("RadialGrid: need at least two nodes");
        RadialGrid g;
        g.dim = dim;
        g.r.resize(n);
        double h = (rmax - r0) / double(n - 1);
        for (std::size_t i = 0; i < n; ++i) g.r[i] = r0 + h * double(i);
        g.r.back() = rmax;
        g.validate();
        return g;
    }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr share(RadialGrid g) { return std::make_shared<const RadialGrid>(std::move(g)); }

} // namespace laplab
