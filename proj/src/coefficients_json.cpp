#include <string>

#include <json.hpp>

#include "bura/error.hpp"
#include "bura/rational.hpp"

namespace bura {

using nlohmann::json;

std::string coefficients_to_json(const CoefficientSet& set, int indent) {
    json doc;
    doc["alpha"] = set.params.alpha;
    doc["beta"] = set.params.beta;
    doc["m"] = set.params.m;
    doc["k"] = set.params.k;
    doc["E"] = set.minimax_error;
    doc["poles"] = set.pf.poles;
    doc["residues"] = set.pf.residues;
    doc["c0"] = set.pf.inverse_part;
    doc["poly"] = set.pf.poly_part;
    doc["precision_bits"] = set.precision_bits;
    return doc.dump(indent);
}

CoefficientSet coefficients_from_json(const std::string& text) {
    CoefficientSet set;
    try {
        const json doc = json::parse(text);
        set.params.alpha = doc.at("alpha").get<double>();
        set.params.beta = doc.at("beta").get<int>();
        set.params.m = doc.at("m").get<int>();
        set.params.k = doc.at("k").get<int>();
        set.minimax_error = doc.at("E").get<double>();
        set.pf.poles = doc.at("poles").get<std::vector<double>>();
        set.pf.residues = doc.at("residues").get<std::vector<double>>();
        set.pf.inverse_part = doc.at("c0").get<std::vector<double>>();
        set.pf.poly_part = doc.value("poly", std::vector<double>{});
        set.precision_bits = doc.value("precision_bits", 0);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Io, std::string("malformed coefficient document: ") + e.what());
    }
    set.params.validate();
    set.pf.beta = set.params.beta;
    if (set.pf.poles.size() != set.pf.residues.size()) {
        throw Error(ErrorKind::Io, "poles and residues differ in length");
    }
    if (static_cast<int>(set.pf.inverse_part.size()) != set.params.beta) {
        throw Error(ErrorKind::Io, "c0 must hold beta coefficients");
    }
    return set;
}

}  // namespace bura
