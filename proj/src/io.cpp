#include "relux/io.hpp"

#include <fstream>
#include <sstream>

namespace relux {

namespace {

Json scalar_json(const Rational& q) { return format_rational(q); }
Json scalar_json(double x) { return x; }
Json scalar_json(const BigFloat& x) { return ScalarTraits<BigFloat>::to_string(x); }

template <class T>
Json layers_json(const Network<T>& net) {
    Json layers = Json::array();
    for (const auto& l : net.layers()) {
        Json w = Json::array();
        for (std::size_t i = 0; i < l.rows; ++i) {
            Json row = Json::array();
            for (std::size_t j = 0; j < l.cols; ++j) row.push_back(scalar_json(l.w(i, j)));
            w.push_back(row);
        }
        Json b = Json::array();
        for (const auto& v : l.bias) b.push_back(scalar_json(v));
        layers.push_back({{"rows", l.rows}, {"cols", l.cols}, {"weights", w}, {"bias", b}});
    }
    return layers;
}

template <class T>
Json doc(const Network<T>& net, const std::string& mode) {
    return {{"version", 1},
            {"activation", activation_name(net.activation())},
            {"scalar_mode", mode},
            {"layers", layers_json(net)}};
}

double double_from_json(const Json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    throw ParseError(where + ": expected a number");
}

BigFloat bigfloat_from_json(const Json& v, const std::string& where) {
    try {
        if (v.is_string()) return BigFloat(v.get<std::string>());
        if (v.is_number()) return BigFloat(v.get<double>());
    } catch (const std::exception&) {
    }
    throw ParseError(where + ": expected a decimal string");
}

template <class T, class Conv>
Network<T> parse_layers(const Json& j, Activation act, Conv conv) {
    if (!j.contains("layers") || !j["layers"].is_array()) throw ParseError("field 'layers': missing or not an array");
    std::vector<AffineLayer<T>> layers;
    const auto& arr = j["layers"];
    for (std::size_t li = 0; li < arr.size(); ++li) {
        const std::string at = "layers[" + std::to_string(li) + "]";
        const auto& lj = arr[li];
        if (!lj.is_object()) throw ParseError(at + ": expected an object");
        for (const char* k : {"rows", "cols", "weights", "bias"})
            if (!lj.contains(k)) throw ParseError(at + ": missing field '" + k + "'");
        if (!lj["rows"].is_number_unsigned() || !lj["cols"].is_number_unsigned())
            throw ParseError(at + ": rows/cols must be positive integers");
        std::size_t r = lj["rows"].get<std::size_t>(), c = lj["cols"].get<std::size_t>();
        AffineLayer<T> l(r, c);
        const auto& w = lj["weights"];
        const auto& b = lj["bias"];
        if (!w.is_array() || !b.is_array() || b.size() != r) throw ParseError(at + ": weights/bias shape mismatch");
        bool nested = !w.empty() && w[0].is_array();
        if (nested ? w.size() != r : w.size() != r * c) throw ParseError(at + ".weights: wrong number of entries");
        for (std::size_t i = 0; i < r; ++i) {
            if (nested && (!w[i].is_array() || w[i].size() != c))
                throw ParseError(at + ".weights[" + std::to_string(i) + "]: expected " + std::to_string(c) +
                                 " entries");
            for (std::size_t k = 0; k < c; ++k) {
                const Json& e = nested ? w[i][k] : w[i * c + k];
                l.w(i, k) = conv(e, at + ".weights[" + std::to_string(i) + "][" + std::to_string(k) + "]");
            }
            l.bias[i] = conv(b[i], at + ".bias[" + std::to_string(i) + "]");
        }
        layers.push_back(std::move(l));
    }
    try {
        return Network<T>(std::move(layers), act);
    } catch (const Error& e) {
        throw ParseError(std::string("layers: ") + e.what());
    }
}

}  // namespace

Rational rational_from_json(const Json& v, const std::string& where) {
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rational(static_cast<long>(v.get<long long>()));
        if (v.is_number_float()) return rational_from_double(v.get<double>());
    } catch (const Error& e) {
        throw ParseError(where + ": " + e.what());
    }
    throw ParseError(where + ": expected a rational string \"p/q\"");
}

Json network_to_json(const Network<Rational>& net) { return doc(net, "rational"); }
Json network_to_json(const Network<double>& net) { return doc(net, "binary64"); }
Json network_to_json(const Network<BigFloat>& net) {
    Json j = doc(net, "multiprecision");
    j["digits"] = BigFloat::default_precision();
    return j;
}
Json network_to_json(const AnyNetwork& net) {
    return std::visit([](const auto& n) { return network_to_json(n); }, net);
}

AnyNetwork network_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("network document must be an object");
    if (!j.contains("version") || j["version"] != 1) throw ParseError("field 'version': expected 1");
    if (!j.contains("activation") || !j["activation"].is_string())
        throw ParseError("field 'activation': missing or not a string");
    Activation act = parse_activation(j["activation"].get<std::string>());
    std::string mode = j.value("scalar_mode", std::string("rational"));
    switch (parse_mode(mode)) {
        case ScalarMode::rational: return parse_layers<Rational>(j, act, rational_from_json);
        case ScalarMode::binary64: return parse_layers<double>(j, act, double_from_json);
        case ScalarMode::multiprecision: {
            unsigned digits = j.value("digits", 50u);
            BigFloat::default_precision(digits);
            return parse_layers<BigFloat>(j, act, bigfloat_from_json);
        }
    }
    throw ParseError("field 'scalar_mode': unsupported");
}

Json pwl_to_json(const Pwl1D& f) {
    Json bp = Json::array(), sl = Json::array();
    for (const auto& x : f.breakpoints()) bp.push_back(format_rational(x));
    for (const auto& s : f.slopes()) sl.push_back(format_rational(s));
    auto a = f.anchor();
    return {{"breakpoints", bp}, {"slopes", sl}, {"anchor", {format_rational(a.first), format_rational(a.second)}}};
}

Pwl1D pwl_from_json(const Json& j) {
    for (const char* k : {"breakpoints", "slopes", "anchor"})
        if (!j.contains(k) || !j[k].is_array()) throw ParseError(std::string("field '") + k + "': missing array");
    std::vector<Rational> bp, sl;
    for (std::size_t i = 0; i < j["breakpoints"].size(); ++i)
        bp.push_back(rational_from_json(j["breakpoints"][i], "breakpoints[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < j["slopes"].size(); ++i)
        sl.push_back(rational_from_json(j["slopes"][i], "slopes[" + std::to_string(i) + "]"));
    if (j["anchor"].size() != 2) throw ParseError("field 'anchor': expected [x0, y0]");
    auto x0 = rational_from_json(j["anchor"][0], "anchor[0]");
    auto y0 = rational_from_json(j["anchor"][1], "anchor[1]");
    try {
        return Pwl1D(bp, sl, {x0, y0});
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

}  // namespace relux
