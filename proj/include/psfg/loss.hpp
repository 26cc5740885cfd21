#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "psfg/errors.hpp"
#include "psfg/matrix.hpp"

namespace psfg {

// Predictions are clamped to [kProbEps, 1 - kProbEps] before any log; the
// clamp keeps losses finite when a sigmoid saturates.
inline constexpr float kProbEps = 1e-7f;

struct LossGrad {
    double loss = 0.0;
    Matrix grad; // dLoss/dPred, same shape as pred
};

// Binary cross-entropy, mean over all elements:
//   loss = -mean(t log p + (1 - t) log(1 - p))
// The reduction accumulates in binary64 in flat index order. Gradients are
// zero where the clamp is active.
inline LossGrad bce_loss(const Matrix& pred, const Matrix& target) {
    check_same_shape(pred, target, "bce_loss");
    LossGrad out;
    out.grad = Matrix(pred.rows(), pred.cols());
    const double n = static_cast<double>(pred.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const float p_raw = pred.data()[i];
        const float p = std::min(std::max(p_raw, kProbEps), 1.0f - kProbEps);
        const double t = static_cast<double>(target.data()[i]);
        acc += t * std::log(static_cast<double>(p)) +
               (1.0 - t) * std::log(1.0 - static_cast<double>(p));
        const bool clamped = p_raw < kProbEps || p_raw > 1.0f - kProbEps;
        out.grad.data()[i] =
            clamped ? 0.0f
                    : static_cast<float>(-(t / static_cast<double>(p) -
                                           (1.0 - t) / (1.0 - static_cast<double>(p))) / n);
    }
    out.loss = -acc / n;
    return out;
}

// Multi-class cross-entropy on raw logits (for the global classifier and
// judge models). Row-wise log-sum-exp in binary64; grad = (softmax - onehot)/n.
inline LossGrad softmax_ce_loss(const Matrix& logits, std::span<const std::uint16_t> labels) {
    if (logits.rows() != labels.size()) {
        throw ShapeError("softmax_ce_loss: " + std::to_string(logits.rows()) + " rows vs " +
                         std::to_string(labels.size()) + " labels");
    }
    LossGrad out;
    out.grad = Matrix(logits.rows(), logits.cols());
    const double n = static_cast<double>(logits.rows());
    double acc = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const std::uint16_t label = labels[i];
        if (label >= logits.cols()) {
            throw DataError("softmax_ce_loss: label " + std::to_string(label) +
                            " >= class count " + std::to_string(logits.cols()));
        }
        const auto row = logits.row(i);
        double maxv = row[0];
        for (float v : row) maxv = std::max(maxv, static_cast<double>(v));
        double sum = 0.0;
        for (float v : row) sum += std::exp(static_cast<double>(v) - maxv);
        const double lse = maxv + std::log(sum);
        acc += lse - static_cast<double>(row[label]);
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            const double soft = std::exp(static_cast<double>(row[j]) - lse);
            out.grad.at(i, j) =
                static_cast<float>((soft - (j == label ? 1.0 : 0.0)) / n);
        }
    }
    out.loss = acc / n;
    return out;
}

} // namespace psfg
