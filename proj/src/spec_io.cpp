#include "capdist/spec_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "capdist/analytic.hpp"
#include "capdist/errors.hpp"

namespace capdist::io {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end()) throw ParseError(std::string("missing field `") + field + "`");
    return *it;
}

template <class T>
T get_as(const json& value, const std::string& field) {
    try {
        return value.get<T>();
    } catch (const json::exception& e) {
        throw ParseError("field `" + field + "` has the wrong type: " + e.what());
    }
}

double parse_double(const std::string& text, const std::string& field) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw ParseError("field `" + field + "`: cannot parse '" + text + "' as a number");
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ChannelModel parse_preset(const std::string& preset) {
    std::istringstream in(preset);
    std::string name, token;
    in >> name;
    std::map<std::string, std::string> params;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError("preset: expected key=value, got '" + token + "'");
        params[token.substr(0, eq)] = token.substr(eq + 1);
    }
    auto take = [&](const char* key) {
        auto it = params.find(key);
        if (it == params.end()) throw ParseError("preset `" + name + "` needs parameter `" + key + "`");
        std::string v = it->second;
        params.erase(it);
        return v;
    };
    auto finish = [&] {
        if (!params.empty()) throw ParseError("preset `" + name + "`: unknown parameter `" + params.begin()->first + "`");
    };

    if (name == "scalar_multiplicative") {
        const double r = parse_double(take("r"), "preset.r");
        finish();
        return analytic::scalar_multiplicative_model(r);
    }
    if (name == "additive_mod2") {
        const double r = parse_double(take("r"), "preset.r");
        finish();
        return analytic::additive_mod2_model(r);
    }
    if (name == "block_multiplicative") {
        const double r = parse_double(take("r"), "preset.r");
        const double k = parse_double(take("K"), "preset.K");
        finish();
        if (k < 1.0 || k != std::floor(k) || k > 64.0) throw ParseError("preset.K must be a positive integer");
        return analytic::block_multiplicative_model(r, static_cast<unsigned>(k));
    }
    throw ParseError("unknown preset `" + name + "`");
}

ChannelSpecFile parse_spec_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("spec must be a JSON object");

    std::optional<ChannelModel> model;
    std::string description;
    if (auto it = doc.find("preset"); it != doc.end()) {
        for (const char* field : {"transition", "state_prior", "distortion", "sizes"})
            if (doc.contains(field))
                throw ParseError(std::string("field `") + field + "` cannot be combined with `preset`");
        description = get_as<std::string>(*it, "preset");
        model = parse_preset(description);
    } else {
        const auto& sizes = require(doc, "sizes");
        ChannelSpec spec;
        spec.inputs = get_as<std::size_t>(require(sizes, "x"), "sizes.x");
        spec.outputs = get_as<std::size_t>(require(sizes, "y"), "sizes.y");
        spec.states = get_as<std::size_t>(require(sizes, "s"), "sizes.s");
        spec.transition = get_as<decltype(spec.transition)>(require(doc, "transition"), "transition");
        spec.state_prior = get_as<std::vector<double>>(require(doc, "state_prior"), "state_prior");
        spec.distortion = get_as<decltype(spec.distortion)>(require(doc, "distortion"), "distortion");
        model = validate_channel(spec);
        std::ostringstream d;
        d << "explicit channel |X|=" << spec.inputs << " |Y|=" << spec.outputs << " |S|=" << spec.states;
        description = d.str();
    }

    std::optional<CompoundFamily> compound;
    if (auto it = doc.find("compound"); it != doc.end()) {
        const auto& priors = require(*it, "priors");
        compound.emplace(*model, get_as<std::vector<std::vector<double>>>(priors, "compound.priors"));
    }
    return ChannelSpecFile{std::move(*model), std::move(compound), std::move(description)};
}

ChannelSpecFile load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec_text(buf.str());
}

std::string format_number(double value) {
    if (value == 0.0) value = 0.0;  // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::vector<CurveRow> curve_rows(const CDCurve& curve) {
    std::vector<CurveRow> rows;
    rows.reserve(curve.points.size());
    for (const auto& p : curve.points)
        rows.push_back({p.distortion_budget, p.capacity, nats_to_bits(p.capacity), p.constraint_active});
    return rows;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
    out << kCurveHeader << '\n';
    for (const auto& r : rows)
        out << format_number(r.distortion) << ',' << format_number(r.capacity_nats) << ','
            << format_number(r.capacity_bits) << ',' << (r.constraint_active ? "true" : "false") << '\n';
}

std::vector<CurveRow> read_curve_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCurveHeader) throw ParseError("curve CSV: missing or unexpected header");
    std::vector<CurveRow> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 4)
            throw ParseError("curve CSV line " + std::to_string(rows.size() + 2) + ": expected 4 fields");
        CurveRow row;
        row.distortion = parse_double(fields[0], "D");
        row.capacity_nats = parse_double(fields[1], "capacity_nats");
        row.capacity_bits = parse_double(fields[2], "capacity_bits");
        if (fields[3] == "true")
            row.constraint_active = true;
        else if (fields[3] != "false")
            throw ParseError("curve CSV: constraint_active must be true or false");
        if (!rows.empty() && row.distortion < rows.back().distortion)
            throw ParseError("curve CSV: rows are not sorted by D");
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), field));
    if (out.empty()) throw ParseError("field `" + field + "` is empty");
    return out;
}

}  // namespace capdist::io
