#include "capdist/info.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace capdist {

ChannelMatrix::ChannelMatrix(std::size_t inputs, std::size_t outputs, std::vector<double> data)
    : inputs_(inputs), outputs_(outputs), data_(std::move(data)) {
    if (data_.size() != inputs_ * outputs_)
        throw std::invalid_argument("ChannelMatrix: data size does not match dimensions");
}

ChannelMatrix ChannelMatrix::restrict_rows(std::span<const std::size_t> rows) const {
    std::vector<double> out;
    out.reserve(rows.size() * outputs_);
    for (std::size_t x : rows) {
        auto r = row(x);
        out.insert(out.end(), r.begin(), r.end());
    }
    return ChannelMatrix(rows.size(), outputs_, std::move(out));
}

double binary_entropy(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return -t * std::log(t) - (1.0 - t) * std::log1p(-t);
}

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d < 0.0 ? 0.0 : d;
}

std::vector<double> output_distribution(const ChannelMatrix& channel, std::span<const double> px) {
    std::vector<double> q(channel.outputs(), 0.0);
    for (std::size_t x = 0; x < channel.inputs(); ++x) {
        if (px[x] == 0.0) continue;
        auto row = channel.row(x);
        for (std::size_t y = 0; y < q.size(); ++y) q[y] += px[x] * row[y];
    }
    return q;
}

double mutual_information(const ChannelMatrix& channel, std::span<const double> px) {
    const auto q = output_distribution(channel, px);
    double info = 0.0;
    for (std::size_t x = 0; x < channel.inputs(); ++x) {
        if (px[x] <= 0.0) continue;
        info += px[x] * kl_divergence(channel.row(x), q);
    }
    return info < 0.0 ? 0.0 : info;
}

}  // namespace capdist
