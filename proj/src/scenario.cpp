#include "fsse/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace fsse {

using nlohmann::json;

const char* to_string(EstimatorMode mode) {
    switch (mode) {
    case EstimatorMode::fsse: return "fsse";
    case EstimatorMode::exhaustive: return "exhaustive";
    case EstimatorMode::both: return "both";
    }
    return "?";
}

EstimatorMode parse_estimator_mode(std::string_view text) {
    if (text == "fsse") return EstimatorMode::fsse;
    if (text == "exhaustive") return EstimatorMode::exhaustive;
    if (text == "both") return EstimatorMode::both;
    throw ParseError("estimator", "expected fsse, exhaustive or both, got '" + std::string(text) + "'");
}

AgreementMode parse_agreement_mode(std::string_view text) {
    if (text == "mean") return AgreementMode::mean;
    if (text == "median") return AgreementMode::median;
    throw ParseError("agreement", "expected mean or median, got '" + std::string(text) + "'");
}

SensorSet AttackScenario::support() const {
    SensorSet s;
    for (const SensorAttack& a : sensors) {
        s.push_back(a.index);
    }
    std::sort(s.begin(), s.end());
    return s;
}

void AttackScenario::validate(std::size_t p, int s_max, long horizon) const {
    std::set<SensorIndex> seen;
    for (const SensorAttack& a : sensors) {
        if (a.index >= p) {
            throw ParseError("attack.sensors", "sensor index out of range");
        }
        if (!seen.insert(a.index).second) {
            throw ParseError("attack.sensors", "sensor listed twice");
        }
        if (a.uniform && !(a.lo <= a.hi)) {
            throw ParseError("attack.sensors.uniform", "expected lo <= hi");
        }
        if (!a.uniform && static_cast<long>(a.sequence.size()) < horizon) {
            throw ParseError("attack.sensors.sequence", "shorter than the horizon");
        }
    }
    if (seen.size() > static_cast<std::size_t>(std::max(s_max, 0))) {
        throw ParseError("attack.sensors", "more attacked sensors than s_max");
    }
}

Vector ControlSpec::input(long t, const Vector& x_hat, double sample_period) const {
    Vector u = K * x_hat;
    if (reference.kind == "sine") {
        const double r = reference.amplitude *
                         std::sin(reference.frequency * static_cast<double>(t) * sample_period);
        u.array() += r;
    }
    return u;
}

SystemModel Scenario::model() const {
    return SystemModel(A, B, C, tau, s_max, E, sample_period);
}

bool operator==(const Scenario& a, const Scenario& b) {
    auto same = [](const Matrix& x, const Matrix& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    return a.name == b.name && a.sample_period == b.sample_period && same(a.A, b.A) &&
           same(a.B, b.B) && same(a.C, b.C) && same(a.E, b.E) && a.tau == b.tau &&
           a.s_max == b.s_max && a.w_bound == b.w_bound && a.v_bounds == b.v_bounds &&
           same(a.x0, b.x0) && a.horizon == b.horizon && same(a.control.K, b.control.K) &&
           a.control.reference == b.control.reference && a.attack == b.attack &&
           a.estimator == b.estimator && a.agreement == b.agreement;
}

namespace {

const json& require(const json& doc, const char* key, const std::string& path) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw ParseError(path + key, "missing");
    }
    return doc.at(key);
}

double to_double(const json& v, const std::string& field) {
    if (!v.is_number()) {
        throw ParseError(field, "expected a number");
    }
    return v.get<double>();
}

long to_long(const json& v, const std::string& field) {
    if (!v.is_number_integer()) {
        throw ParseError(field, "expected an integer");
    }
    return v.get<long>();
}

Matrix to_matrix(const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) {
        throw ParseError(field, "expected a non-empty nested array");
    }
    const std::size_t rows = v.size();
    if (!v[0].is_array()) {
        throw ParseError(field, "expected rows as arrays");
    }
    const std::size_t cols = v[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!v[r].is_array() || v[r].size() != cols) {
            throw ParseError(field, "ragged row " + std::to_string(r));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                to_double(v[r][c], field);
        }
    }
    return m;
}

std::vector<double> to_vector(const json& v, const std::string& field) {
    if (!v.is_array()) {
        throw ParseError(field, "expected an array");
    }
    std::vector<double> out;
    for (const json& e : v) {
        out.push_back(to_double(e, field));
    }
    return out;
}

json from_matrix(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("document", e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("document", "expected an object");
    }
    Scenario s;
    s.name = doc.value("name", std::string("scenario"));
    if (doc.contains("sample_period")) {
        s.sample_period = to_double(doc["sample_period"], "sample_period");
    }
    s.A = to_matrix(require(doc, "A", ""), "A");
    s.B = to_matrix(require(doc, "B", ""), "B");
    s.C = to_matrix(require(doc, "C", ""), "C");
    if (doc.contains("E") && !doc["E"].is_null()) {
        s.E = to_matrix(doc["E"], "E");
    }
    s.tau = static_cast<int>(to_long(require(doc, "tau", ""), "tau"));
    s.s_max = static_cast<int>(to_long(require(doc, "s_max", ""), "s_max"));

    const json& noise = require(doc, "noise", "");
    s.w_bound = to_double(require(noise, "w_bound", "noise."), "noise.w_bound");
    s.v_bounds = to_vector(require(noise, "v_bounds", "noise."), "noise.v_bounds");
    if (s.w_bound < 0.0) {
        throw ParseError("noise.w_bound", "must be non-negative");
    }
    for (double v : s.v_bounds) {
        if (v < 0.0) {
            throw ParseError("noise.v_bounds", "must be non-negative");
        }
    }

    const std::vector<double> x0 = to_vector(require(doc, "x0", ""), "x0");
    s.x0 = Eigen::Map<const Vector>(x0.data(), static_cast<Eigen::Index>(x0.size()));
    s.horizon = to_long(require(doc, "horizon", ""), "horizon");

    if (doc.contains("control")) {
        const json& control = doc["control"];
        if (control.contains("K")) {
            s.control.K = to_matrix(control["K"], "control.K");
        }
        if (control.contains("reference")) {
            const json& ref = control["reference"];
            s.control.reference.kind = ref.value("kind", std::string("none"));
            if (s.control.reference.kind != "none" && s.control.reference.kind != "sine") {
                throw ParseError("control.reference.kind", "expected none or sine");
            }
            if (ref.contains("amplitude")) {
                s.control.reference.amplitude =
                    to_double(ref["amplitude"], "control.reference.amplitude");
            }
            if (ref.contains("frequency")) {
                s.control.reference.frequency =
                    to_double(ref["frequency"], "control.reference.frequency");
            }
        }
    }

    if (doc.contains("attack")) {
        const json& attack = doc["attack"];
        if (attack.contains("sensors")) {
            for (const json& a : attack["sensors"]) {
                SensorAttack sa;
                const long index = to_long(require(a, "index", "attack.sensors."), "attack.sensors.index");
                if (index < 1) {
                    throw ParseError("attack.sensors.index", "labels are 1-based");
                }
                sa.index = static_cast<SensorIndex>(index - 1);
                if (a.contains("uniform")) {
                    const std::vector<double> r = to_vector(a["uniform"], "attack.sensors.uniform");
                    if (r.size() != 2) {
                        throw ParseError("attack.sensors.uniform", "expected [lo, hi]");
                    }
                    sa.uniform = true;
                    sa.lo = r[0];
                    sa.hi = r[1];
                } else if (a.contains("sequence")) {
                    sa.uniform = false;
                    sa.sequence = to_vector(a["sequence"], "attack.sensors.sequence");
                } else {
                    throw ParseError("attack.sensors", "expected uniform or sequence");
                }
                s.attack.sensors.push_back(std::move(sa));
            }
        }
    }
    if (doc.contains("seed")) {
        const json& seed = doc["seed"];
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long>() >= 0)) {
            throw ParseError("seed", "expected a non-negative integer");
        }
        s.attack.seed = seed.get<std::uint64_t>();
    }
    if (doc.contains("estimator")) {
        s.estimator = parse_estimator_mode(doc["estimator"].get<std::string>());
    }
    if (doc.contains("agreement")) {
        s.agreement = parse_agreement_mode(doc["agreement"].get<std::string>());
    }

    // Structural checks that need the whole document.
    const Eigen::Index n = s.A.rows();
    if (s.A.cols() != n) throw ParseError("A", "must be square");
    if (s.B.rows() != n) throw ParseError("B", "row count must match A");
    if (s.C.cols() != n) throw ParseError("C", "column count must match A");
    if (s.E.size() > 0 && s.E.rows() != n) throw ParseError("E", "row count must match A");
    if (static_cast<Eigen::Index>(s.v_bounds.size()) != s.C.rows()) {
        throw ParseError("noise.v_bounds", "expected one bound per sensor");
    }
    if (s.x0.size() != n) throw ParseError("x0", "length must match A");
    if (s.horizon < s.tau) throw ParseError("horizon", "must be at least tau");
    if (s.control.K.size() == 0) {
        s.control.K = Matrix::Zero(s.B.cols(), n);
    } else if (s.control.K.rows() != s.B.cols() || s.control.K.cols() != n) {
        throw ParseError("control.K", "expected an m x n gain");
    }
    try {
        (void)s.model();
    } catch (const DimensionError& e) {
        throw ParseError("model", e.what());
    }
    s.attack.validate(static_cast<std::size_t>(s.C.rows()), s.s_max, s.horizon);
    return s;
}

std::string serialize_scenario(const Scenario& s) {
    json doc;
    doc["name"] = s.name;
    doc["sample_period"] = s.sample_period;
    doc["A"] = from_matrix(s.A);
    doc["B"] = from_matrix(s.B);
    doc["C"] = from_matrix(s.C);
    if (s.E.size() > 0) {
        doc["E"] = from_matrix(s.E);
    }
    doc["tau"] = s.tau;
    doc["s_max"] = s.s_max;
    doc["noise"] = {{"w_bound", s.w_bound}, {"v_bounds", s.v_bounds}};
    doc["x0"] = std::vector<double>(s.x0.data(), s.x0.data() + s.x0.size());
    doc["horizon"] = s.horizon;
    doc["control"] = {{"K", from_matrix(s.control.K)},
                      {"reference",
                       {{"kind", s.control.reference.kind},
                        {"amplitude", s.control.reference.amplitude},
                        {"frequency", s.control.reference.frequency}}}};
    json sensors = json::array();
    for (const SensorAttack& a : s.attack.sensors) {
        json entry = {{"index", a.index + 1}};
        if (a.uniform) {
            entry["uniform"] = {a.lo, a.hi};
        } else {
            entry["sequence"] = a.sequence;
        }
        sensors.push_back(std::move(entry));
    }
    doc["attack"] = {{"sensors", sensors}};
    doc["estimator"] = to_string(s.estimator);
    doc["agreement"] = to_string(s.agreement);
    doc["seed"] = s.attack.seed;
    return doc.dump(2);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("document", "cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace fsse
