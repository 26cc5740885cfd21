#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "psfg/errors.hpp"
#include "psfg/loss.hpp"
#include "psfg/matrix.hpp"
#include "psfg/network.hpp"

namespace psfg {

// ||a - b||^2 / ||a||^2. Normalization is by the first (reference) argument;
// not symmetric, and larger than 1 for anti-correlated outputs.
inline double nmse(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "nmse");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double av = a.data()[i];
        const double d = av - static_cast<double>(b.data()[i]);
        num += d * d;
        den += av * av;
    }
    if (den == 0.0) {
        throw MetricError("nmse: reference has zero energy");
    }
    return num / den;
}

namespace detail {

struct WindowStats {
    double mean_a, mean_b, var_a, var_b, cov;
};

inline double ssim_from_stats(const WindowStats& s, double c1, double c2) {
    return ((2.0 * s.mean_a * s.mean_b + c1) * (2.0 * s.cov + c2)) /
           ((s.mean_a * s.mean_a + s.mean_b * s.mean_b + c1) * (s.var_a + s.var_b + c2));
}

} // namespace detail

// Structural similarity over 8x8 windows, stride 1, uniform weighting,
// population (divide-by-N) statistics, C1 = (0.01 L)^2, C2 = (0.03 L)^2,
// mean over windows. Images smaller than 8x8 in either dimension are scored
// with a single global window. Result is in [-1, 1], 1 iff bit-identical.
inline double ssim(const Matrix& a, const Matrix& b, double dynamic_range) {
    check_same_shape(a, b, "ssim");
    if (dynamic_range <= 0.0) {
        throw MetricError("ssim: dynamic range must be positive");
    }
    const double c1 = 0.01 * dynamic_range * 0.01 * dynamic_range;
    const double c2 = 0.03 * dynamic_range * 0.03 * dynamic_range;

    const bool global_window = a.rows() < 8 || a.cols() < 8;
    const std::size_t wr = global_window ? a.rows() : 8;
    const std::size_t wc = global_window ? a.cols() : 8;

    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t r0 = 0; r0 + wr <= a.rows(); ++r0) {
        for (std::size_t c0 = 0; c0 + wc <= a.cols(); ++c0) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t r = 0; r < wr; ++r) {
                for (std::size_t c = 0; c < wc; ++c) {
                    const double va = a.at(r0 + r, c0 + c);
                    const double vb = b.at(r0 + r, c0 + c);
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                }
            }
            const double n = static_cast<double>(wr * wc);
            detail::WindowStats s;
            s.mean_a = sa / n;
            s.mean_b = sb / n;
            s.var_a = saa / n - s.mean_a * s.mean_a;
            s.var_b = sbb / n - s.mean_b * s.mean_b;
            s.cov = sab / n - s.mean_a * s.mean_b;
            total += detail::ssim_from_stats(s, c1, c2);
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

// Mean SSIM over paired rows of two sample matrices, each row reshaped to an
// img_rows x img_cols image.
inline double ssim_rows_mean(const Matrix& a, const Matrix& b, std::size_t img_rows,
                             std::size_t img_cols, double dynamic_range) {
    check_same_shape(a, b, "ssim_rows_mean");
    if (img_rows * img_cols != a.cols()) {
        throw ShapeError("ssim_rows_mean: image shape does not match row width");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Matrix ia = Matrix::from(img_rows, img_cols,
                                 {a.row(i).begin(), a.row(i).end()});
        Matrix ib = Matrix::from(img_rows, img_cols,
                                 {b.row(i).begin(), b.row(i).end()});
        total += ssim(ia, ib, dynamic_range);
    }
    return total / static_cast<double>(a.rows());
}

// Fraction of argmax matches; ties resolve to the lowest class index.
inline double classify_accuracy(const Network& judge, const Matrix& samples,
                                std::span<const std::uint16_t> labels) {
    if (samples.rows() != labels.size()) {
        throw ShapeError("classify_accuracy: sample/label count mismatch");
    }
    const Matrix logits = forward(judge, samples);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j) {
            if (logits.at(i, j) > logits.at(i, best)) best = j;
        }
        if (best == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

// Pointwise p/(p+q) over a discrete support; the unique maximizer of the
// value function for fixed generator. Points with p+q == 0 are excluded
// (NaN marker).
inline std::vector<double> optimal_discriminator(std::span<const double> p,
                                                 std::span<const double> q) {
    if (p.size() != q.size()) {
        throw ShapeError("optimal_discriminator: support sizes differ");
    }
    std::vector<double> d(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        d[i] = p[i] + q[i] > 0.0 ? p[i] / (p[i] + q[i])
                                 : std::numeric_limits<double>::quiet_NaN();
    }
    return d;
}

// Empirical V(G, D) = mean log D(x) over real samples + mean log(1 - D(x))
// over generated samples, with D clamped like the training loss. Equals
// -log 4 for D == 1/2 regardless of the sample sets.
inline double value_function(const std::function<double(std::span<const float>)>& d,
                             const Matrix& p_samples, const Matrix& q_samples) {
    auto mean_log = [&d](const Matrix& m, bool complement) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double v = d(m.row(i));
            v = std::min(std::max(v, static_cast<double>(kProbEps)),
                         1.0 - static_cast<double>(kProbEps));
            acc += std::log(complement ? 1.0 - v : v);
        }
        return acc / static_cast<double>(m.rows());
    };
    return mean_log(p_samples, false) + mean_log(q_samples, true);
}

// Histogram Jensen-Shannon divergence over [-1,1]^d, d <= 2, `bins` cells per
// dimension, natural log; in [0, log 2].
inline double jsd_empirical(const Matrix& p_samples, const Matrix& q_samples,
                            std::uint32_t bins) {
    if (p_samples.rows() == 0 || q_samples.rows() == 0) {
        throw MetricError("jsd_empirical: need at least one sample per side");
    }
    if (p_samples.cols() != q_samples.cols()) {
        throw ShapeError("jsd_empirical: dimension mismatch");
    }
    const std::size_t d = p_samples.cols();
    if (d > 2) {
        throw MetricError("jsd_empirical: only 1-D and 2-D supported, got d=" +
                          std::to_string(d));
    }
    const std::size_t cells = d == 1 ? bins : static_cast<std::size_t>(bins) * bins;
    auto histogram = [bins, d, cells](const Matrix& m) {
        std::vector<double> h(cells, 0.0);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            std::size_t cell = 0;
            for (std::size_t j = 0; j < d; ++j) {
                const double x = m.at(i, j);
                auto k = static_cast<std::int64_t>((x + 1.0) / 2.0 * bins);
                k = std::clamp<std::int64_t>(k, 0, bins - 1);
                cell = cell * bins + static_cast<std::size_t>(k);
            }
            h[cell] += 1.0;
        }
        for (double& v : h) v /= static_cast<double>(m.rows());
        return h;
    };
    const auto hp = histogram(p_samples);
    const auto hq = histogram(q_samples);
    double jsd = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double m = 0.5 * (hp[i] + hq[i]);
        if (hp[i] > 0.0) jsd += 0.5 * hp[i] * std::log(hp[i] / m);
        if (hq[i] > 0.0) jsd += 0.5 * hq[i] * std::log(hq[i] / m);
    }
    return jsd;
}

// One row of metrics.csv; emitted once per communication round.
struct MetricsRecord {
    std::uint64_t round = 0;
    double cl_accuracy = 0.0;
    double avg_d_loss = 0.0;
    double avg_g_loss = 0.0;
    double nmse = 0.0;          // server twin vs client generator on probe noise
    double ssim = 1.0;          // likewise
    std::size_t sync_bit_diff = 0; // max over users/steps of differing params
    double param_distance = 0.0;   // max over users of ||G_u - G_s||_2
    std::uint64_t bytes_cumulative = 0;
    std::uint64_t messages_cumulative = 0;
};

inline std::string metrics_csv_header() {
    return "round,cl_accuracy,avg_d_loss,avg_g_loss,nmse,ssim,sync_bit_diff,"
           "param_distance,bytes_cumulative,messages_cumulative";
}

inline std::string to_csv_row(const MetricsRecord& r) {
    std::ostringstream os;
    os.precision(9);
    os << r.round << ',' << r.cl_accuracy << ',' << r.avg_d_loss << ',' << r.avg_g_loss << ','
       << r.nmse << ',' << r.ssim << ',' << r.sync_bit_diff << ',' << r.param_distance << ','
       << r.bytes_cumulative << ',' << r.messages_cumulative;
    return os.str();
}

} // namespace psfg
