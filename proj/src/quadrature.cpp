#include "veh/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "veh/errors.hpp"

namespace veh {

namespace {

// Kronrod 15-point abscissae; odd indices are the embedded 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    bool splittable = true;
};

struct ByError {
    bool operator()(const Segment& x, const Segment& y) const {
        if (x.error != y.error) return x.error < y.error;
        return x.a > y.a;
    }
};

Segment gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double uflow = std::numeric_limits<double>::min();

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);

    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        resk += kWgk[j] * (f1[j] + f2[j]);
        resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
    }
    const double reskh = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
    }

    const double ah = std::abs(half);
    resasc *= ah;
    resabs *= ah;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    if (resabs > uflow / (50.0 * eps)) {
        err = std::max(50.0 * eps * resabs, err);
    }

    Segment s;
    s.a = a;
    s.b = b;
    s.value = resk * half;
    s.error = err;
    const double scale = std::max(std::abs(a), std::abs(b));
    s.splittable = (b - a) > 100.0 * eps * std::max(scale, 1.0);
    return s;
}

} // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    std::vector<double> breakpoints, double rel_tol,
                                    double abs_tol, std::size_t max_intervals) {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw DomainError("quadrature", "tolerances must be strictly positive");
    }
    for (const double b : breakpoints) {
        if (!std::isfinite(b)) throw DomainError("quadrature", "breakpoints must be finite");
    }
    if (breakpoints.size() < 2 || !std::is_sorted(breakpoints.begin(), breakpoints.end())) {
        throw DomainError("quadrature", "breakpoints must be sorted with at least two entries");
    }
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    QuadratureResult out;
    std::priority_queue<Segment, std::vector<Segment>, ByError> open;
    std::vector<Segment> closed;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        Segment s = gauss_kronrod_15(f, breakpoints[i], breakpoints[i + 1]);
        out.evaluations += 15;
        total += s.value;
        total_err += s.error;
        if (s.splittable) {
            open.push(s);
        } else {
            closed.push_back(s);
        }
    }

    const auto recompute = [&] {
        total = 0.0;
        total_err = 0.0;
        std::vector<Segment> all = closed;
        auto copy = open;
        while (!copy.empty()) {
            all.push_back(copy.top());
            copy.pop();
        }
        std::sort(all.begin(), all.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
        for (const Segment& s : all) {
            total += s.value;
            total_err += s.error;
        }
        return all;
    };

    std::size_t iteration = 0;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (open.empty()) {
            recompute();
            if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
            throw ToleranceError("quadrature", "no subdividable interval left; error estimate " +
                                                   std::to_string(total_err));
        }
        if (open.size() + closed.size() >= max_intervals) {
            throw ToleranceError("quadrature", "interval limit reached with error estimate " +
                                                   std::to_string(total_err) + " for integral " +
                                                   std::to_string(total));
        }
        const Segment worst = open.top();
        open.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = gauss_kronrod_15(f, worst.a, mid);
        const Segment right = gauss_kronrod_15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        for (const Segment& s : {left, right}) {
            if (s.splittable) {
                open.push(s);
            } else {
                closed.push_back(s);
            }
        }
        if (++iteration % 64 == 0) recompute();
    }

    const std::vector<Segment> all = recompute();
    if (!std::isfinite(total)) {
        throw NumericError("quadrature", "integrand produced a non-finite value");
    }
    out.value = total;
    out.error = total_err;
    out.intervals = all.size();
    return out;
}

} // namespace veh
