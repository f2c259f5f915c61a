#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "capdist/analytic.hpp"
#include "capdist/cd_solver.hpp"
#include "capdist/errors.hpp"
#include "capdist/extensions.hpp"
#include "capdist/info.hpp"
#include "capdist/simulator.hpp"
#include "capdist/spec_io.hpp"

namespace capdist::cli {

namespace {

// Largest block length for which `analytic --compare` runs the numeric solver.
constexpr unsigned kMaxCompareBlock = 8;

// 15 significant digits: enough that bits and nats agree to ~1e-15 after a reparse.
std::string num(double v) {
    if (v == 0.0) v = 0.0;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string join(std::span<const double> values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + num(values[i]);
    return s;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Input: return kInputError;
        case ErrorKind::Infeasible: return kInfeasible;
        case ErrorKind::Convergence: return kNotConverged;
    }
    return kInputError;
}

struct ChannelSource {
    std::string path;
    std::string preset;

    void attach(CLI::App& cmd) {
        cmd.add_option("spec", path, "Channel spec file (JSON)");
        cmd.add_option("--preset", preset, "Named preset, e.g. \"scalar_multiplicative r=0.4\"");
    }

    io::ChannelSpecFile load() const {
        if (path.empty() == preset.empty())
            throw InvalidArgument("give exactly one of a spec file path or --preset");
        if (!path.empty()) return io::load_spec_file(path);
        return io::ChannelSpecFile{io::parse_preset(preset), std::nullopt, preset};
    }
};

void print_point(std::ostream& out, const CDPoint& p, bool bits) {
    out << "D = " << num(p.distortion_budget) << '\n';
    out << "C(D) = " << num(p.capacity) << " nats\n";
    if (bits) out << "C(D) = " << num(nats_to_bits(p.capacity)) << " bits\n";
    out << "optimizer = " << join(p.optimizer.probs()) << '\n';
    out << "constraint_active = " << (p.constraint_active ? "true" : "false") << '\n';
    if (p.constraint_active) out << "multiplier = " << num(p.multiplier) << '\n';
}

// ----------------------------------------------------------------------------

int cmd_dstar(const ChannelSource& src, std::ostream& out) {
    const auto file = src.load();
    const auto& model = file.model;
    const auto policy = optimal_estimator(model);
    out << "channel: " << file.description << '\n';
    out << "x\td*(x)\testimator s_hat(x,y) for y = 0.." << model.output_size() - 1 << '\n';
    for (std::size_t x = 0; x < model.input_size(); ++x) {
        out << x << '\t' << num(policy.cost_vector[x]) << '\t';
        for (std::size_t y = 0; y < model.output_size(); ++y) {
            if (y) out << ' ';
            if (policy.is_reachable(x, y))
                out << policy.estimate(x, y);
            else
                out << '-';
        }
        out << '\n';
    }
    return kOk;
}

int cmd_point(const ChannelSource& src, double distortion, bool bits, std::ostream& out, std::ostream& err) {
    const auto file = src.load();
    const auto point = capacity_distortion_point(file.model, distortion);
    print_point(out, point, bits);
    if (point.convergence_warning) {
        err << "warning: " << *point.convergence_warning << '\n';
        return kNotConverged;
    }
    return kOk;
}

int cmd_curve(const ChannelSource& src, std::optional<std::size_t> grid, const std::string& d_list,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
    if (grid.has_value() == !d_list.empty()) throw InvalidArgument("give exactly one of --grid or --d-list");
    const auto file = src.load();
    const auto range = feasible_range(file.model);

    std::vector<double> budgets;
    if (grid) {
        if (*grid == 0) throw InvalidArgument("--grid must be at least 1");
        budgets = default_grid(file.model, *grid);
    } else {
        budgets = io::parse_number_list(d_list, "--d-list");
    }
    std::vector<double> feasible, skipped;
    for (double d : budgets) (d < range.d_min ? skipped : feasible).push_back(d);

    CDCurve curve;
    if (!feasible.empty()) curve = cd_curve(file.model, feasible);
    const auto rows = io::curve_rows(curve);

    std::ostream* summary = &out;
    if (out_path.empty() || out_path == "-") {
        io::write_curve_csv(out, rows);
        summary = &err;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw InvalidArgument("cannot open output file '" + out_path + "'");
        io::write_curve_csv(f, rows);
        if (!f) throw InvalidArgument("failed writing '" + out_path + "'");
    }

    *summary << "d_min = " << num(range.d_min) << '\n';
    *summary << "d_max = " << num(range.d_max) << '\n';
    *summary << "C_max = " << num(range.unconstrained_capacity) << " nats\n";
    *summary << "rows = " << rows.size() << '\n';

    bool warned = false;
    for (const auto& p : curve.points)
        if (p.convergence_warning) {
            err << "warning: D=" << num(p.distortion_budget) << ": " << *p.convergence_warning << '\n';
            warned = true;
        }
    if (!skipped.empty()) {
        err << "warning: skipped budgets below d_min=" << num(range.d_min) << ": " << join(skipped) << '\n';
        return kInfeasible;
    }
    return warned ? kNotConverged : kOk;
}

void print_cpud(std::ostream& out, const char* label, const CpudResult& r) {
    out << label << ": ";
    if (r.infinite()) {
        out << "infinite \xE2\x80\x94 " << r.infinite_reason << '\n';
        return;
    }
    out << num(r.value) << " nats per unit distortion";
    if (r.witness_letter) out << " (witness letter x=" << *r.witness_letter << ")";
    if (r.witness_budget) out << " (best ratio at D=" << num(*r.witness_budget) << ")";
    out << '\n';
}

int cmd_cpud(const ChannelSource& src, std::ostream& out) {
    const auto file = src.load();
    try {
        print_cpud(out, "ratio formula", cpud_ratio_formula(file.model));
    } catch (const NoZeroCostLetter&) {
        out << "ratio formula: not applicable (no zero-cost letter)\n";
    }
    print_cpud(out, "sup definition", cpud_sup_definition(file.model));
    return kOk;
}

int cmd_compound(const ChannelSource& src, double distortion, bool bits, std::ostream& out, std::ostream& err) {
    const auto file = src.load();
    const CompoundFamily family =
        file.compound ? *file.compound
                      : CompoundFamily(file.model, {std::vector<double>(file.model.state_prior().begin(),
                                                                        file.model.state_prior().end())});
    const auto r = compound_cd(family, distortion);
    out << "members = " << family.size() << '\n';
    out << "D = " << num(distortion) << '\n';
    out << "C(D) = " << num(r.value) << " nats\n";
    if (bits) out << "C(D) = " << num(nats_to_bits(r.value)) << " bits\n";
    out << "optimizer = " << join(r.optimizer.probs()) << '\n';
    out << "worst_member = " << r.worst_theta << '\n';
    out << "upper_bound = " << num(r.upper_bound) << " nats\n";
    out << "certificate = " << (r.certificate == Certificate::DualityGap ? "duality gap" : "grid search") << '\n';
    if (r.convergence_warning) {
        err << "warning: " << *r.convergence_warning << '\n';
        return kNotConverged;
    }
    return kOk;
}

int cmd_simulate(const ChannelSource& src, const std::string& px_text, std::optional<double> optimal_for,
                 std::uint64_t samples, std::uint64_t seed, unsigned workers, std::ostream& out) {
    if (px_text.empty() == !optimal_for.has_value()) throw InvalidArgument("give exactly one of --px or --optimal-for");
    const auto file = src.load();
    const InputDistribution px = optimal_for ? capacity_distortion_point(file.model, *optimal_for).optimizer
                                             : InputDistribution(io::parse_number_list(px_text, "--px"));
    const auto r = simulate(file.model, px, samples, seed, workers);
    out << "samples = " << r.samples << '\n';
    out << "seed = " << r.seed << '\n';
    out << "input_distribution = " << join(px.probs()) << '\n';
    out << "empirical_distortion = " << num(r.empirical_distortion) << '\n';
    out << "standard_error = " << num(r.standard_error()) << '\n';
    out << "analytic_distortion = " << num(r.analytic_distortion) << '\n';
    out << "empirical_mi = " << num(r.empirical_mi) << " nats\n";
    out << "analytic_mi = " << num(mutual_information(file.model, px)) << " nats\n";
    return kOk;
}

int cmd_analytic(const std::string& which, double r, unsigned k, bool compare, std::size_t points, bool bits,
                 std::ostream& out) {
    if (points == 0) throw InvalidArgument("--points must be at least 1");
    if (!(r > 0.0 && r <= 0.5)) throw InvalidArgument("--r must lie in (0, 0.5]");
    const bool block = which == "block";
    if (!block && which != "scalar") throw InvalidArgument("--model must be scalar or block");
    if (block && k < 1) throw InvalidArgument("--K must be at least 1");

    auto closed = [&](double d) {
        return block ? analytic::block_cd_closed_form(r, k, d) : analytic::scalar_cd_closed_form(r, d);
    };
    const bool run_solver = compare && (!block || k <= kMaxCompareBlock);
    std::optional<ChannelModel> model;
    if (run_solver) model = block ? analytic::block_multiplicative_model(r, k) : analytic::scalar_multiplicative_model(r);
    const double per_use = block ? static_cast<double>(k) : 1.0;

    out << "model = " << which << " multiplicative, r = " << num(r);
    if (block) out << ", K = " << k;
    out << '\n';
    const auto at_zero = closed(0.0);
    out << "threshold = " << num(at_zero.threshold) << '\n';
    if (block) {
        out << "case = " << (at_zero.case1 ? "1 (all-zero block unused, C(D) flat)" : "2") << '\n';
        const double r0 = analytic::training_rate(r, k);
        out << "C(0) = " << num(at_zero.capacity) << " nats per use\n";
        out << "R(0) = " << num(r0) << " nats per use (train then transmit)\n";
        out << "C(0)/R(0) = " << num(at_zero.capacity / r0) << '\n';
    } else {
        out << "small_D_slope = " << num(analytic::scalar_small_d_slope(r)) << '\n';
    }
    if (compare && !run_solver)
        out << "note: solver comparison skipped for K > " << kMaxCompareBlock << '\n';

    out << "D\tclosed_form\tp_star";
    if (run_solver) out << "\tsolver\tabs_diff";
    out << '\n';
    double max_diff = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double d = points == 1 ? r : r * static_cast<double>(i) / static_cast<double>(points - 1);
        const auto cf = closed(d);
        auto unit = [&](double nats) { return bits ? nats_to_bits(nats) : nats; };
        out << num(d) << '\t' << num(unit(cf.capacity)) << '\t' << num(cf.p_star);
        if (run_solver) {
            // The block solver works per super-symbol; its budget and rate are per block.
            const double solved = capacity_distortion_point(*model, d, {}).capacity / per_use;
            const double diff = std::abs(solved - cf.capacity);
            max_diff = std::max(max_diff, diff);
            out << '\t' << num(unit(solved)) << '\t' << num(unit(diff));
        }
        out << '\n';
    }
    if (run_solver) out << "max_abs_diff = " << num(bits ? nats_to_bits(max_diff) : max_diff) << (bits ? " bits\n" : " nats\n");
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacity-distortion solver for joint communication and state estimation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "capdist 0.1.0");

    ChannelSource src;
    double distortion = 0.0;
    bool bits = false;

    auto* dstar = app.add_subcommand("dstar", "Per-letter estimation cost d*(x) and the optimal estimator");
    src.attach(*dstar);

    auto* point = app.add_subcommand("point", "Capacity-distortion value C(D) at one budget");
    src.attach(*point);
    point->add_option("--distortion,-D", distortion, "Distortion budget D")->required();
    point->add_flag("--bits", bits, "Also report bits");

    std::optional<std::size_t> grid;
    std::string d_list, out_path;
    auto* curve = app.add_subcommand("curve", "C(D) over a grid of budgets, written as CSV");
    src.attach(*curve);
    curve->add_option("--grid", grid, "Number of evenly spaced budgets from d_min to max d*(x)");
    curve->add_option("--d-list", d_list, "Comma-separated budgets");
    curve->add_option("--out,-o", out_path, "CSV output path (stdout when omitted or '-')");

    auto* cpud = app.add_subcommand("cpud", "Capacity per unit distortion");
    src.attach(*cpud);

    auto* compound = app.add_subcommand("compound", "Max-min C(D) over the spec's compound block of priors");
    src.attach(*compound);
    compound->add_option("--distortion,-D", distortion, "Distortion budget D")->required();
    compound->add_flag("--bits", bits, "Also report bits");

    std::string px_text;
    std::optional<double> optimal_for;
    std::uint64_t samples = 100000, seed = 1;
    unsigned workers = 1;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of distortion and mutual information");
    src.attach(*sim);
    sim->add_option("--px", px_text, "Input distribution, comma separated");
    sim->add_option("--optimal-for", optimal_for, "Use the C(D) optimizer at this budget");
    sim->add_option("--samples,-n", samples, "Number of channel uses")->capture_default_str();
    sim->add_option("--seed", seed, "Random seed")->capture_default_str();
    sim->add_option("--workers", workers, "Worker threads (results do not depend on it)")->capture_default_str();

    std::string which;
    double r = 0.0;
    unsigned k = 1;
    bool cmp = false;
    std::size_t points = 10;
    auto* ana = app.add_subcommand("analytic", "Closed-form multiplicative-channel results");
    ana->add_option("--model", which, "scalar or block")->required()->check(CLI::IsMember({"scalar", "block"}));
    ana->add_option("--r", r, "P(s = 1)")->required();
    ana->add_option("--K", k, "Block length (block model)")->capture_default_str();
    ana->add_flag("--compare", cmp, "Run the numeric solver alongside the closed form");
    ana->add_option("--points", points, "Number of budgets in [0, r]")->capture_default_str();
    ana->add_flag("--bits", bits, "Report capacities in bits");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == static_cast<int>(CLI::ExitCodes::Success) ? kOk : kInputError;
    }

    try {
        if (*dstar) return cmd_dstar(src, out);
        if (*point) return cmd_point(src, distortion, bits, out, err);
        if (*curve) return cmd_curve(src, grid, d_list, out_path, out, err);
        if (*cpud) return cmd_cpud(src, out);
        if (*compound) return cmd_compound(src, distortion, bits, out, err);
        if (*sim) return cmd_simulate(src, px_text, optimal_for, samples, seed, workers, out);
        if (*ana) return cmd_analytic(which, r, k, cmp, points, bits, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace capdist::cli
