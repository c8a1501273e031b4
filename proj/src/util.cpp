#include "mgt/util.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace mgt {

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int default_workers() {
    if (const char* env = std::getenv("MGT_WORKERS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f;
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / n);
    f.slope_stderr = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
    return f;
}

}  // namespace mgt
