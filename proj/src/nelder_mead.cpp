#include "veh/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "veh/errors.hpp"

namespace veh {

namespace {

struct Vertex {
    std::vector<double> x;
    double f = 0.0;
};

double sanitize(double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

std::vector<double> affine(const std::vector<double>& base, const std::vector<double>& toward,
                           double t) {
    std::vector<double> out(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + t * (toward[i] - base[i]);
    return out;
}

} // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    if (n == 0) throw DomainError("optimize", "Nelder-Mead needs at least one coordinate");
    if (!(opts.tol > 0.0) || !(opts.initial_step > 0.0)) {
        throw DomainError("optimize", "Nelder-Mead tolerance and step must be > 0");
    }
    const auto eval = [&](const std::vector<double>& x) { return sanitize(f(x)); };

    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back({x0, eval(x0)});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = x0;
        x[i] += opts.initial_step;
        simplex.push_back({x, eval(x)});
    }

    NelderMeadResult r;
    const auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    std::stable_sort(simplex.begin(), simplex.end(), by_value);

    while (true) {
        double diameter = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            diameter = std::max(diameter, distance(simplex[i].x, simplex[0].x));
        }
        if (diameter < opts.tol) {
            r.converged = true;
            break;
        }
        if (r.iterations >= opts.max_iterations) break;
        ++r.iterations;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i].x[k];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        Vertex& worst = simplex[n];
        const double f_best = simplex[0].f;
        const double f_second = simplex[n - 1].f;

        const std::vector<double> xr = affine(centroid, worst.x, -1.0);
        const double fr = eval(xr);
        bool shrink = false;
        if (fr < f_best) {
            const std::vector<double> xe = affine(centroid, worst.x, -2.0);
            const double fe = eval(xe);
            worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        } else if (fr < f_second) {
            worst = {xr, fr};
        } else if (fr < worst.f) {
            const std::vector<double> xc = affine(centroid, xr, 0.5);
            const double fc = eval(xc);
            if (fc <= fr) {
                worst = {xc, fc};
            } else {
                shrink = true;
            }
        } else {
            const std::vector<double> xc = affine(centroid, worst.x, 0.5);
            const double fc = eval(xc);
            if (fc < worst.f) {
                worst = {xc, fc};
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 1; i <= n; ++i) {
                simplex[i].x = affine(simplex[0].x, simplex[i].x, 0.5);
                simplex[i].f = eval(simplex[i].x);
            }
        }
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        r.trace.emplace_back(simplex[0].x, simplex[0].f);
    }

    r.x = simplex[0].x;
    r.value = simplex[0].f;
    return r;
}

} // namespace veh
