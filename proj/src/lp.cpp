#include "capdist/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace capdist::lp {

namespace {

constexpr double kPivotEps = 1e-12;

struct Tableau {
    std::size_t rows = 0;
    std::size_t cols = 0;  // variables, rhs stored separately
    std::vector<std::vector<double>> a;
    std::vector<double> rhs;
    std::vector<std::size_t> basis;

    void pivot(std::size_t r, std::size_t c) {
        const double p = a[r][c];
        for (double& v : a[r]) v /= p;
        rhs[r] /= p;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            const double f = a[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) a[i][j] -= f * a[r][j];
            rhs[i] -= f * rhs[r];
        }
        basis[r] = c;
    }

    // Maximizes cost . x over the current basis; columns >= allowed never enter.
    void optimize(const std::vector<double>& cost, std::size_t allowed) {
        for (int guard = 0; guard < 100000; ++guard) {
            std::size_t enter = cols;
            for (std::size_t j = 0; j < allowed; ++j) {
                double d = cost[j];
                for (std::size_t i = 0; i < rows; ++i) d -= cost[basis[i]] * a[i][j];
                if (d > 1e-12) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols) return;
            std::size_t leave = rows;
            double best = 0.0;
            for (std::size_t i = 0; i < rows; ++i) {
                if (a[i][enter] <= kPivotEps) continue;
                const double ratio = rhs[i] / a[i][enter];
                if (leave == rows || ratio < best - 1e-15 ||
                    (ratio <= best + 1e-15 && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == rows) throw std::runtime_error("lp::maximize: problem is unbounded");
            pivot(leave, enter);
        }
        throw std::runtime_error("lp::maximize: iteration guard exceeded");
    }
};

}  // namespace

std::optional<std::vector<double>> maximize(const std::vector<double>& objective,
                                            const std::vector<std::vector<double>>& rows,
                                            const std::vector<double>& rhs) {
    const std::size_t m = rows.size(), n = objective.size();
    if (rhs.size() != m) throw std::invalid_argument("lp::maximize: rhs size mismatch");

    Tableau t;
    t.rows = m;
    t.cols = n + m;
    t.a.assign(m, std::vector<double>(n + m, 0.0));
    t.rhs = rhs;
    t.basis.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].size() != n) throw std::invalid_argument("lp::maximize: row size mismatch");
        const double sign = rhs[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t.a[i][j] = sign * rows[i][j];
        t.rhs[i] *= sign;
        t.a[i][n + i] = 1.0;
        t.basis[i] = n + i;
    }

    // Phase 1: drive the artificial variables to zero.
    std::vector<double> phase1(n + m, 0.0);
    std::fill(phase1.begin() + static_cast<std::ptrdiff_t>(n), phase1.end(), -1.0);
    t.optimize(phase1, n + m);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis[i] >= n) infeasibility += t.rhs[i];
    if (infeasibility > 1e-9) return std::nullopt;

    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] < n) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(t.a[i][j]) > 1e-9) {
                t.pivot(i, j);
                break;
            }
    }

    std::vector<double> phase2(n + m, 0.0);
    std::copy(objective.begin(), objective.end(), phase2.begin());
    t.optimize(phase2, n);

    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis[i] < n) x[t.basis[i]] = std::max(t.rhs[i], 0.0);
    return x;
}

std::optional<std::vector<double>> most_slack_distribution(const std::vector<std::vector<double>>& costs,
                                                           const std::vector<double>& budgets) {
    if (costs.empty() || costs.size() != budgets.size())
        throw std::invalid_argument("most_slack_distribution: one budget per cost vector");
    const std::size_t n = costs.front().size(), m = costs.size();
    // Variables: p (n), t, slack_j (m), u with t + u = 1.
    const std::size_t nv = n + 1 + m + 1;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;

    std::vector<double> simplex(nv, 0.0);
    std::fill(simplex.begin(), simplex.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
    rows.push_back(std::move(simplex));
    rhs.push_back(1.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (costs[j].size() != n) throw std::invalid_argument("most_slack_distribution: cost size mismatch");
        std::vector<double> row(nv, 0.0);
        for (std::size_t x = 0; x < n; ++x) row[x] = costs[j][x];
        row[n] = 1.0;
        row[n + 1 + j] = 1.0;
        rows.push_back(std::move(row));
        rhs.push_back(budgets[j]);
    }
    std::vector<double> cap(nv, 0.0);
    cap[n] = 1.0;
    cap[nv - 1] = 1.0;
    rows.push_back(std::move(cap));
    rhs.push_back(1.0);

    std::vector<double> objective(nv, 0.0);
    objective[n] = 1.0;
    auto sol = maximize(objective, rows, rhs);
    if (!sol) return std::nullopt;
    std::vector<double> p(sol->begin(), sol->begin() + static_cast<std::ptrdiff_t>(n));
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace capdist::lp
