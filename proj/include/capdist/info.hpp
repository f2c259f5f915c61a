#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace capdist {

/// Row-stochastic matrix P(y|x), stored row-major (|X| rows, |Y| columns).
class ChannelMatrix {
public:
    ChannelMatrix() = default;
    ChannelMatrix(std::size_t inputs, std::size_t outputs, std::vector<double> data);

    std::size_t inputs() const noexcept { return inputs_; }
    std::size_t outputs() const noexcept { return outputs_; }
    std::span<const double> row(std::size_t x) const {
        return {data_.data() + x * outputs_, outputs_};
    }
    double operator()(std::size_t x, std::size_t y) const { return data_[x * outputs_ + y]; }

    /// Keeps only the listed rows, in the given order.
    ChannelMatrix restrict_rows(std::span<const std::size_t> rows) const;

private:
    std::size_t inputs_ = 0;
    std::size_t outputs_ = 0;
    std::vector<double> data_;
};

// All logarithms are natural (nats). 0 log 0 is taken as 0 throughout.

double binary_entropy(double t);

double entropy(std::span<const double> p);

/// D(p || q); +infinity when p is not absolutely continuous w.r.t. q.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// q(y) = sum_x p(x) W(y|x).
std::vector<double> output_distribution(const ChannelMatrix& channel, std::span<const double> px);

/// I(X;Y) for input law px through the channel.
double mutual_information(const ChannelMatrix& channel, std::span<const double> px);

constexpr double kNatsPerBit = 0.69314718055994530942;

inline double nats_to_bits(double nats) { return nats / kNatsPerBit; }

}  // namespace capdist
