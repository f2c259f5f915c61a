#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "capdist/cd_solver.hpp"
#include "capdist/channel_model.hpp"
#include "capdist/extensions.hpp"

namespace capdist::io {

/// A channel spec file, parsed and validated.
///
/// The file is JSON. Either give the tensors explicitly:
///
///     {
///       "sizes": {"x": 2, "y": 2, "s": 2},
///       "transition": [[[1, 0], [1, 0]], [[1, 0], [0, 1]]],   // [x][s][y]
///       "state_prior": [0.6, 0.4],
///       "distortion": [[0, 1], [1, 0]]                         // [s][s_hat]
///     }
///
/// or name a preset, "preset": "scalar_multiplicative r=0.4" (also
/// "block_multiplicative r=0.3 K=2" and "additive_mod2 r=0.3"). An optional
/// "compound": {"priors": [[...], ...]} block turns the file into a family of
/// state priors sharing the transition and distortion.
struct ChannelSpecFile {
    ChannelModel model;
    std::optional<CompoundFamily> compound;
    std::string description;
};

/// Throws ParseError naming the offending field, or the validation error of
/// the channel itself.
ChannelSpecFile parse_spec_text(const std::string& text);
ChannelSpecFile load_spec_file(const std::string& path);

/// "scalar_multiplicative r=0.4", "block_multiplicative r=0.3 K=2", "additive_mod2 r=0.3".
ChannelModel parse_preset(const std::string& preset);

/// One row of the curve CSV.
struct CurveRow {
    double distortion = 0.0;
    double capacity_nats = 0.0;
    double capacity_bits = 0.0;
    bool constraint_active = false;
};

inline constexpr const char* kCurveHeader = "D,capacity_nats,capacity_bits,constraint_active";

std::vector<CurveRow> curve_rows(const CDCurve& curve);

/// Header plus one line per row, 12 significant digits, '\n' line endings.
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

/// Inverse of write_curve_csv; ParseError on malformed input or unsorted D.
std::vector<CurveRow> read_curve_csv(std::istream& in);

/// Formats a value with 12 significant digits as used in the CSV.
std::string format_number(double value);

/// Parses "0.1,0.2, 0.3" into numbers; ParseError on anything else.
std::vector<double> parse_number_list(const std::string& text, const std::string& field);

}  // namespace capdist::io
