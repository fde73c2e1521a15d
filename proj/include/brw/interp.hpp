#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace brw {

// Fritsch-Carlson monotone piecewise-cubic interpolant. Preserves the
// monotonicity of the data; evaluation clamps to the endpoint values.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y))
    {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("MonotoneCubic: need matching arrays, n >= 2");
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double dx = x_[i + 1] - x_[i];
            if (!(dx > 0)) throw std::invalid_argument("MonotoneCubic: x not increasing");
            d[i] = (y_[i + 1] - y_[i]) / dx;
        }
        m_.assign(n, 0.0);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0)
                m_[i] = 0.0;
            else {
                // harmonic mean weighting (Fritsch-Butland variant, always in
                // the monotone region)
                double w1 = 2 * (x_[i + 1] - x_[i]) + (x_[i] - x_[i - 1]);
                double w2 = (x_[i + 1] - x_[i]) + 2 * (x_[i] - x_[i - 1]);
                m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        // clamp endpoint slopes into the monotone region
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                m_[i] = m_[i + 1] = 0.0;
                continue;
            }
            double a = m_[i] / d[i], b = m_[i + 1] / d[i];
            double s = a * a + b * b;
            if (s > 9.0) {
                double tau = 3.0 / std::sqrt(s);
                m_[i] = tau * a * d[i];
                m_[i + 1] = tau * b * d[i];
            }
        }
    }

    double operator()(double xq) const
    {
        if (xq <= x_.front()) return y_.front();
        if (xq >= x_.back()) return y_.back();
        auto it = std::upper_bound(x_.begin(), x_.end(), xq);
        std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
        double hgt = x_[i + 1] - x_[i];
        double t = (xq - x_[i]) / hgt;
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y_[i] + h10 * hgt * m_[i] + h01 * y_[i + 1] + h11 * hgt * m_[i + 1];
    }

private:
    std::vector<double> x_, y_, m_;
};

} // namespace brw
