#include "lo/json_io.hpp"

#include <charconv>
#include <cmath>

#include <fstream>
#include <sstream>

#include "lo/error.hpp"

namespace lo::io {

namespace {

const char* kind_name(EstimateKind k) {
    switch (k) {
        case EstimateKind::exact: return "exact";
        case EstimateKind::exact_bracket: return "exact_bracket";
        case EstimateKind::monte_carlo: return "monte_carlo";
    }
    return "exact";
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigInvalid(std::string("missing field '") + key + "'");
    return j.at(key);
}

template <class T>
T number_from(const Json& j, const char* what) {
    if (!j.is_number_integer()) throw ConfigInvalid(std::string(what) + " must be an integer");
    return j.get<T>();
}

Json cells(const std::vector<QVec>& v, std::size_t dim) {
    Json out = Json::array();
    for (const auto& e : v) out.push_back(dim == 1 ? to_json(e[0]) : to_json(e));
    return out;
}

QVec cell_from(const Json& j, std::size_t dim) {
    QVec v = j.is_array() ? qvec_from(j) : QVec{rational_from(j)};
    if (v.size() != dim) throw ConfigInvalid("entry has dimension " + std::to_string(v.size()) + ", expected " +
                                             std::to_string(dim));
    return v;
}

Integer integer_from(const Json& j) {
    Rational r = rational_from(j);
    if (r.get_den() != 1) throw ConfigInvalid("expected an integer, got " + to_string(r));
    return r.get_num();
}

std::size_t dim_of(const Json& j) {
    if (j.contains("d")) {
        auto d = number_from<long>(j.at("d"), "d");
        if (d < 1) throw ConfigInvalid("d must be positive");
        return static_cast<std::size_t>(d);
    }
    return 1;
}

Json ivec(const std::vector<Integer>& v) {
    Json out = Json::array();
    for (const auto& x : v) out.push_back(to_json(x));
    return out;
}

}  // namespace

Json to_json(const Rational& x) { return lo::to_string(x); }

Json to_json(const QVec& v) {
    Json out = Json::array();
    for (const auto& x : v) out.push_back(to_json(x));
    return out;
}

Json to_json(const Integer& x) {
    if (x.fits_slong_p()) return x.get_si();
    return x.get_str();
}

Json to_json(const Gap& q) {
    Json gens = Json::array();
    for (const auto& g : q.generators()) gens.push_back(to_json(g));
    return Json{{"dim", q.ambient_dim()},      {"offset", to_json(q.offset())},   {"generators", gens},
                {"lower", q.lower_bounds()}, {"upper", q.upper_bounds()},       {"symmetric", q.symmetric()}};
}

Json to_json(const DiscreteDist& d) {
    Json atoms = Json::array();
    for (const auto& a : d.atoms()) atoms.push_back({{"value", to_json(a.value)}, {"mass", to_json(a.mass)}});
    return Json{{"atoms", atoms}};
}

Json to_json(const CoeffVector& v) { return Json{{"d", v.dim()}, {"entries", cells(v.entries(), v.dim())}}; }

Json to_json(const CoeffMatrix& a) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < a.size(); ++i) rows.push_back(cells(a.row(i), a.dim()));
    return Json{{"d", a.dim()}, {"entries", rows}};
}

Json to_json(const SmallBallEstimate& e) {
    Json j{{"kind", kind_name(e.kind)}, {"value", to_json(e.value)}};
    if (e.kind == EstimateKind::monte_carlo) {
        j["ci_low"] = e.ci_low;
        j["ci_high"] = e.ci_high;
        j["samples"] = e.samples;
        j["seed"] = e.seed;
    } else {
        j["lower"] = to_json(e.lower);
        j["upper"] = to_json(e.upper);
        j["witness_center"] = to_json(e.witness_center);
    }
    return j;
}

Json to_json(const DecouplingReport& r) {
    Json j{{"lhs_rho", to_json(r.lhs_rho)},
           {"lhs_center", to_json(r.lhs_center)},
           {"rhs_prob", to_json(r.rhs_prob)},
           {"tau_squared", to_json(r.tau_squared)},
           {"tau", to_json(r.tau)},
           {"constant_floor", to_json(r.constant_floor)},
           {"constant_floor_8pi", to_json(r.constant_floor_8pi)},
           {"verdict", r.verdict},
           {"verdict_8pi", r.verdict_8pi},
           {"min_c_log", r.min_c_log ? to_json(*r.min_c_log) : Json(nullptr)}};
    if (r.condition)
        j["condition"] = {{"probability", to_json(r.condition->probability)},
                          {"satisfied", r.condition->satisfied}};
    return j;
}

Json to_json(const StructuredInstance& inst) {
    Json coeffs = std::visit([](const auto& c) { return to_json(c); }, inst.coefficients);
    Json hidden{{"values", cells(inst.hidden.values, inst.dim())},
                {"gap_part", cells(inst.hidden.gap_part, inst.dim())},
                {"k", inst.hidden.k}};
    Json b = Json::array();
    for (const auto& row : inst.hidden.b) b.push_back(cells(row, inst.dim()));
    hidden["b"] = b;
    return Json{{"kind", to_string(inst.kind)},
                {"n", inst.size()},
                {"d", inst.dim()},
                {"coefficients", coeffs},
                {"gap", inst.gap ? to_json(*inst.gap) : Json(nullptr)},
                {"perturbation", to_json(inst.perturbation)},
                {"claimed_beta", to_json(inst.claimed_beta)},
                {"claimed_rho_lower", to_json(inst.claimed_rho_lower)},
                {"seed", inst.seed},
                {"hidden", hidden}};
}

Json to_json(const InstanceCheck& c) {
    Json j{{"witness_center", to_json(c.witness_center)},
           {"witness_mass", to_json(c.witness_mass)},
           {"holds", c.holds}};
    if (c.sup) j["sup"] = to_json(*c.sup);
    return j;
}

Json to_json(const GapFit& f) {
    Json assign = Json::object();
    for (const auto& [i, p] : f.assignments)
        assign[std::to_string(i)] = {{"coords", p.coords}, {"value", to_json(p.value)}};
    return Json{{"gap", to_json(f.gap)}, {"covered", f.covered}, {"assignments", assign}};
}

Json to_json(const StructureCertificate& c) {
    Json rows = Json::object();
    for (const auto& [i, ks] : c.row_coeffs) rows[std::to_string(i)] = ivec(ks);
    return Json{{"k", to_json(c.k)},
                {"pivot_rows", c.pivot_rows},
                {"row_coeffs", rows},
                {"surviving", c.surviving},
                {"bound_exponent", c.bound_exponent},
                {"radius_factor", to_json(c.radius_factor)}};
}

Json to_json(const PipelineTrace& t) {
    Json good = Json::array();
    for (const auto& g : t.good_vectors) {
        Json coeffs = Json::array();
        for (const auto& row : g.coeffs) coeffs.push_back(ivec(row));
        good.push_back({{"y", to_json(g.y)},
                        {"mass", to_json(g.mass)},
                        {"fit", g.fit ? to_json(*g.fit) : Json(nullptr)},
                        {"tuple", g.tuple},
                        {"coeffs", coeffs}});
    }
    Json common = Json::array();
    for (const auto& row : t.common_coeff_matrix) common.push_back(ivec(row));
    Json rows = Json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"row", r.row},
                        {"coeffs", ivec(r.coeffs)},
                        {"covered_mass", to_json(r.covered_mass)},
                        {"support_mass", to_json(r.support_mass)},
                        {"support", r.support},
                        {"verified", r.verified}});
    Json votes = Json::array();
    for (const auto& v : t.subset_votes)
        votes.push_back({{"subset", v.subset},
                         {"certified", v.certified},
                         {"failure", v.failure},
                         {"pivots", v.pivots},
                         {"k", to_json(v.k)}});
    return Json{{"rho", to_json(t.rho)},
                {"hypothesis_met", t.hypothesis_met},
                {"total_mass", to_json(t.total_mass)},
                {"good_mass", to_json(t.good_mass)},
                {"good_without_fit", t.good_without_fit},
                {"good_vectors", good},
                {"common_tuple", t.common_tuple},
                {"common_coeff_matrix", common},
                {"tuple_mass", to_json(t.tuple_mass)},
                {"coeff_mass", to_json(t.coeff_mass)},
                {"rows", rows},
                {"subset_votes", votes},
                {"consensus_subsets", t.consensus_subsets}};
}

Rational rational_from(const Json& j) {
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const InvalidParameter& e) {
            throw ConfigInvalid(e.what());
        }
    }
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number_float()) {
        // Shortest decimal that round-trips, read exactly.
        const double d = j.get<double>();
        if (!std::isfinite(d)) throw ConfigInvalid("non-finite number " + j.dump());
        char buf[512];
        auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed);
        if (res.ec != std::errc()) throw ConfigInvalid("cannot read number " + j.dump());
        return parse_rational(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
    }
    throw ConfigInvalid("expected a rational string such as \"1/2\", got " + j.dump());
}

QVec qvec_from(const Json& j) {
    if (!j.is_array()) throw ConfigInvalid("expected an array of rationals");
    QVec v;
    for (const auto& x : j) v.push_back(rational_from(x));
    return v;
}

Gap gap_from(const Json& j) {
    try {
        const std::size_t dim = static_cast<std::size_t>(number_from<long>(field(j, "dim"), "dim"));
        std::vector<QVec> gens;
        for (const auto& g : field(j, "generators")) gens.push_back(qvec_from(g));
        QVec offset = j.contains("offset") ? qvec_from(j.at("offset")) : zero_vec(dim);
        auto upper = field(j, "upper").get<Coords>();
        Coords lower;
        if (j.contains("lower")) {
            lower = j.at("lower").get<Coords>();
        } else {
            for (auto u : upper) lower.push_back(-u);
        }
        const bool sym = j.value("symmetric", false);
        return Gap(dim, offset, gens, lower, upper, sym);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("bad GAP: ") + e.what());
    } catch (const InvalidParameter& e) {
        throw ConfigInvalid(e.what());
    }
}

DiscreteDist dist_from(const Json& j) {
    const Json& atoms = j.is_array() ? j : field(j, "atoms");
    if (!atoms.is_array()) throw ConfigInvalid("atoms must be an array");
    std::vector<Atom> out;
    for (const auto& a : atoms) {
        if (a.is_array() && a.size() == 2)
            out.push_back({rational_from(a[0]), rational_from(a[1])});
        else
            out.push_back({rational_from(field(a, "value")), rational_from(field(a, "mass"))});
    }
    try {
        return DiscreteDist(std::move(out));
    } catch (const InvalidParameter& e) {
        throw ConfigInvalid(e.what());
    }
}

CoeffMatrix matrix_from(const Json& src) {
    const Json& j = src.is_object() && src.contains("coefficients") ? src.at("coefficients") : src;
    const std::size_t dim = dim_of(j);
    const Json& rows = field(j, "entries");
    if (!rows.is_array()) throw ConfigInvalid("entries must be an array of rows");
    const std::size_t n = rows.size();
    std::vector<QVec> entries;
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != n) throw ConfigInvalid("matrix must be square");
        for (const auto& c : row) entries.push_back(cell_from(c, dim));
    }
    return CoeffMatrix(n, dim, std::move(entries));
}

std::optional<CoeffVector> matrix_shift_from(const Json& src) {
    const Json& j = src.is_object() && src.contains("coefficients") ? src.at("coefficients") : src;
    if (!j.is_object() || !j.contains("b")) return std::nullopt;
    const std::size_t dim = dim_of(j);
    std::vector<QVec> b;
    for (const auto& c : j.at("b")) b.push_back(cell_from(c, dim));
    return CoeffVector(dim, std::move(b));
}

CoeffVector vector_from(const Json& src) {
    const Json& j = src.is_object() && src.contains("coefficients") ? src.at("coefficients") : src;
    if (j.is_array()) {
        std::vector<QVec> e;
        for (const auto& c : j) e.push_back(cell_from(c, 1));
        return CoeffVector(1, std::move(e));
    }
    const std::size_t dim = dim_of(j);
    std::vector<QVec> e;
    for (const auto& c : field(j, "entries")) e.push_back(cell_from(c, dim));
    return CoeffVector(dim, std::move(e));
}

std::vector<QVec> points_from(const Json& j) {
    const Json& pts = j.is_array() ? j : (j.contains("points") ? j.at("points") : field(j, "entries"));
    if (!pts.is_array()) throw ConfigInvalid("points must be an array");
    std::vector<QVec> out;
    for (const auto& p : pts) out.push_back(p.is_array() ? qvec_from(p) : QVec{rational_from(p)});
    return out;
}

StructureCertificate certificate_from(const Json& src) {
    const Json& j = src.is_object() && src.contains("certificate") ? src.at("certificate") : src;
    try {
        StructureCertificate c;
        c.k = integer_from(field(j, "k"));
        c.pivot_rows = field(j, "pivot_rows").get<std::vector<std::size_t>>();
        for (const auto& [key, val] : field(j, "row_coeffs").items()) {
            std::vector<Integer> ks;
            for (const auto& x : val) ks.push_back(integer_from(x));
            c.row_coeffs[std::stoul(key)] = ks;
        }
        c.surviving = field(j, "surviving").get<std::vector<std::size_t>>();
        c.bound_exponent = j.value("bound_exponent", 1u);
        if (j.contains("radius_factor")) c.radius_factor = rational_from(j.at("radius_factor"));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("bad certificate: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ConfigInvalid(std::string("bad certificate: ") + e.what());
    }
}

FitParams fit_params_from(const Json& j, FitParams p) {
    if (j.is_null()) return p;
    if (!j.is_object()) throw ConfigInvalid("fit parameters must be an object");
    auto positive = [&](const char* key, auto& out) {
        if (!j.contains(key)) return;
        auto v = number_from<long>(j.at(key), key);
        if (v < 1) throw ConfigInvalid(std::string(key) + " must be positive");
        out = static_cast<std::remove_reference_t<decltype(out)>>(v);
    };
    if (j.contains("beta")) p.beta = rational_from(j.at("beta"));
    positive("r_max", p.r_max);
    positive("p_max", p.p_max);
    positive("m_max", p.m_max);
    positive("k_max", p.k_max);
    positive("size_cap", p.size_cap);
    positive("max_candidates", p.max_candidates);
    positive("reduce_cap", p.reduce_cap);
    if (j.contains("n_prime")) p.n_prime = static_cast<std::size_t>(number_from<long>(j.at("n_prime"), "n_prime"));
    if (j.contains("B")) p.B = rational_from(j.at("B"));
    if (j.contains("epsilon")) p.epsilon = rational_from(j.at("epsilon"));
    return p;
}

DiscreteDist dist_from_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    auto arg = [&](const char* fallback) {
        return parse_rational(colon == std::string::npos ? std::string(fallback) : spec.substr(colon + 1));
    };
    try {
        if (name == "bernoulli") return bernoulli_lazy(Rational(1));
        if (name == "lazy-bernoulli") return bernoulli_lazy(arg("1/2"));
        if (name == "sym-bernoulli") return symmetrize(bernoulli_lazy(Rational(1)));
        if (name == "lazy-sym-bernoulli") return lazy_product(symmetrize(bernoulli_lazy(Rational(1))), arg("1/2"));
    } catch (const InvalidParameter& e) {
        throw ConfigInvalid(std::string("bad distribution '") + spec + "': " + e.what());
    }
    return dist_from(read_file(spec));
}

Json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigInvalid("malformed JSON in '" + path + "': " + e.what());
    }
}

void write_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigInvalid("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace lo::io
