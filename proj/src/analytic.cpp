#include "capdist/analytic.hpp"

#include <cmath>
#include <string>

#include "capdist/errors.hpp"

namespace capdist::analytic {

namespace {

void require_prior(double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("r must lie in [0, 1], got " + std::to_string(r));
}

// The published closed forms assume the state is more likely off than on.
void require_closed_form_range(double r) {
    if (!(r > 0.0 && r <= 0.5)) throw InvalidArgument("closed form needs r in (0, 1/2], got " + std::to_string(r));
}

void require_budget(double d) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidArgument("distortion budget must be finite and >= 0");
}

ChannelModel binary_state_channel(double r, int (*law)(int x, int s)) {
    std::vector<double> transition(2 * 2 * 2, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int s = 0; s < 2; ++s) transition[static_cast<std::size_t>((x * 2 + s) * 2 + law(x, s))] = 1.0;
    return ChannelModel::from_flat(2, 2, 2, std::move(transition), {1.0 - r, r}, {0.0, 1.0, 1.0, 0.0});
}

}  // namespace

ChannelModel scalar_multiplicative_model(double r) {
    require_prior(r);
    return binary_state_channel(r, [](int x, int s) { return x * s; });
}

ChannelModel additive_mod2_model(double r) {
    require_prior(r);
    return binary_state_channel(r, [](int x, int s) { return x ^ s; });
}

ChannelModel block_multiplicative_model(double r, unsigned block_length) {
    return block_to_super_symbol(scalar_multiplicative_model(r), block_length);
}

ClosedForm scalar_cd_closed_form(double r, double distortion) {
    require_closed_form_range(r);
    require_budget(distortion);
    const double h = binary_entropy(r);
    const double a = 1.0 / (1.0 + std::exp(h / r));
    ClosedForm out;
    out.threshold = r - a;
    if (distortion >= out.threshold) {
        out.p_star = a / r;
        out.capacity = binary_entropy(out.p_star * r) - out.p_star * h;
    } else {
        out.p_star = 1.0 - distortion / r;
        out.capacity = binary_entropy(r - distortion) - out.p_star * h;
    }
    return out;
}

double scalar_small_d_slope(double r) {
    require_closed_form_range(r);
    return -std::log1p(-r) / r;
}

bool case1_predicate(double r, unsigned block_length) {
    require_closed_form_range(r);
    if (block_length == 0) throw InvalidArgument("block length must be at least 1");
    return std::ldexp(1.0, static_cast<int>(block_length)) > 1.0 + std::pow(1.0 - r, -1.0 / r);
}

ClosedForm block_cd_closed_form(double r, unsigned block_length, double distortion) {
    require_closed_form_range(r);
    require_budget(distortion);
    if (block_length == 0) throw InvalidArgument("block length must be at least 1");
    const double k = static_cast<double>(block_length);
    const double nonzero = std::ldexp(1.0, static_cast<int>(block_length)) - 1.0;
    const double log_nonzero = std::log(nonzero);
    const double h = binary_entropy(r);

    ClosedForm out;
    if (case1_predicate(r, block_length)) {
        out.case1 = true;
        out.p_star = 1.0;
        out.threshold = 0.0;
        out.capacity = r * log_nonzero / k;
        return out;
    }
    const double a = 1.0 / (1.0 + std::exp(h / r) / nonzero);
    // A negative printed threshold means every budget D >= 0 is slack.
    out.threshold = std::max(r - a, 0.0);
    out.p_star = distortion >= out.threshold ? a / r : 1.0 - distortion / r;
    out.capacity = (binary_entropy(out.p_star * r) + out.p_star * (r * log_nonzero - h)) / k;
    return out;
}

std::vector<double> block_optimizer(unsigned block_length, double p_star) {
    const std::size_t letters = std::size_t{1} << block_length;
    std::vector<double> p(letters, p_star / static_cast<double>(letters - 1));
    p[0] = 1.0 - p_star;
    return p;
}

double training_rate(double r, unsigned block_length) {
    require_prior(r);
    if (block_length == 0) throw InvalidArgument("block length must be at least 1");
    const double k = static_cast<double>(block_length);
    return r * (k - 1.0) * std::log(2.0) / k;
}

}  // namespace capdist::analytic
