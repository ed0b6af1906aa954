#include "lo/harness.hpp"

#include <chrono>

#include "lo/error.hpp"

#ifndef LO_VERSION
#define LO_VERSION "0.0.0"
#endif

namespace lo {

namespace {

using io::Json;

constexpr std::pair<Task, const char*> kTaskNames[] = {
    {Task::rho, "rho"},
    {Task::construct, "construct"},
    {Task::decouple, "decouple"},
    {Task::inverse_linear, "inverse-linear"},
    {Task::inverse_bilinear, "inverse-bilinear"},
    {Task::inverse_quadratic, "inverse-quadratic"},
    {Task::verify, "verify"},
    {Task::accept, "accept"},
};

class Params {
  public:
    explicit Params(const Json& j) : j_(j) {
        if (!j_.is_object()) throw ConfigInvalid("task parameters must be an object");
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    std::string str(const char* key) const {
        if (!has(key)) throw ConfigInvalid(std::string("missing option '") + key + "'");
        if (!j_.at(key).is_string()) throw ConfigInvalid(std::string("option '") + key + "' must be a string");
        return j_.at(key).get<std::string>();
    }
    std::string str(const char* key, const std::string& fallback) const { return has(key) ? str(key) : fallback; }

    Rational rational(const char* key) const {
        if (!has(key)) throw ConfigInvalid(std::string("missing option '") + key + "'");
        return io::rational_from(j_.at(key));
    }
    Rational rational(const char* key, const Rational& fallback) const { return has(key) ? rational(key) : fallback; }

    std::uint64_t count(const char* key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const Json& v = j_.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<long>() >= 0) return static_cast<std::uint64_t>(v.get<long>());
        if (v.is_string()) {
            try {
                std::size_t pos = 0;
                auto x = std::stoull(v.get<std::string>(), &pos);
                if (pos == v.get<std::string>().size()) return x;
            } catch (const std::exception&) {
            }
        }
        throw ConfigInvalid(std::string("option '") + key + "' must be a non-negative integer");
    }

    Json file(const char* key) const { return io::read_file(str(key)); }
    const Json& raw(const char* key) const { return j_.at(key); }

  private:
    const Json& j_;
};

std::uint64_t budget_of(const Params& p) {
    const auto b = p.count("budget", 1u << 24);
    if (b == 0) throw ConfigInvalid("budget must be positive");
    return b;
}

// "exhaustive" or "sample:N" (seeded with `seed`).
SampleMode sample_mode(const std::string& text, std::uint64_t seed) {
    if (text == "exhaustive") return Exhaustive{};
    if (text.rfind("sample:", 0) == 0) {
        try {
            std::size_t pos = 0;
            auto n = std::stoull(text.substr(7), &pos);
            if (pos == text.size() - 7 && n > 0) return Sampled{seed, n};
        } catch (const std::exception&) {
        }
    }
    throw ConfigInvalid("sampling mode must be 'exhaustive' or 'sample:N', got '" + text + "'");
}

CenterMode center_of(const Params& p, std::size_t dim) {
    if (!p.has("center")) return SupOverCenter{};
    const Json& c = p.raw("center");
    if (c.is_string() && c.get<std::string>() == "sup") return SupOverCenter{};
    QVec v = c.is_array() ? io::qvec_from(c) : QVec{io::rational_from(c)};
    if (v.size() != dim) throw ConfigInvalid("centre dimension does not match the form");
    return FixedCenter{v};
}

// Multiples of beta covering the range of a linear or quadratic form (d = 1), capped in size.
std::vector<QVec> default_grid(const Form& form, const Rational& beta, std::size_t dim) {
    if (dim != 1 || beta == 0) return {zero_vec(dim)};
    Rational reach = 0;
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, LinearForm>) {
                for (const auto& e : f.a.entries()) reach += abs(e[0]);
            } else {
                for (std::size_t i = 0; i < f.a.size(); ++i)
                    for (std::size_t j = 0; j < f.a.size(); ++j) reach += abs(f.a.at(i, j)[0]);
            }
        },
        form);
    Integer steps = floor_of(reach / beta);
    if (steps > 2048) steps = 2048;
    std::vector<QVec> grid;
    for (long s = -steps.get_si(); s <= steps.get_si(); ++s) grid.push_back({beta * Rational(s)});
    return grid;
}

Json run_rho(const Params& p) {
    const std::string form_name = p.str("form", "linear");
    const Json m = p.file("matrix");
    SmallBallQuery q{p.rational("beta"), LinearForm{CoeffVector::zeros(0, 1)}, SupOverCenter{},
                     DiscreteDist::point_mass(Rational(0)), std::nullopt};
    q.dist = io::dist_from_spec(p.str("dist", "bernoulli"));
    if (p.has("dist2")) q.second_dist = io::dist_from_spec(p.str("dist2"));
    std::size_t dim = 1;
    if (form_name == "linear") {
        auto v = io::vector_from(m);
        dim = v.dim();
        q.form = LinearForm{v};
    } else if (form_name == "bilinear") {
        auto a = io::matrix_from(m);
        dim = a.dim();
        q.form = BilinearForm{a};
    } else if (form_name == "quadratic") {
        auto a = io::matrix_from(m);
        dim = a.dim();
        q.form = QuadraticForm{a, io::matrix_shift_from(m).value_or(CoeffVector::zeros(a.size(), a.dim()))};
    } else {
        throw ConfigInvalid("form must be linear, bilinear or quadratic");
    }
    q.center = center_of(p, dim);
    const std::string mode = p.str("mode", "exact");
    if (mode == "exact") return io::to_json(rho_exact(q, budget_of(p)));
    if (mode != "mc") throw ConfigInvalid("mode must be exact or mc");
    std::vector<QVec> grid;
    if (p.has("grid")) {
        for (const auto& c : p.raw("grid")) grid.push_back(c.is_array() ? io::qvec_from(c) : QVec{io::rational_from(c)});
    } else {
        grid = default_grid(q.form, q.beta, dim);
    }
    return io::to_json(rho_monte_carlo(q, p.count("samples", 100000), p.count("seed", 0), grid));
}

Json run_construct(const Params& p) {
    const InstanceKind kind = parse_instance_kind(p.str("kind"));
    const Json cfg = p.file("params");
    const std::uint64_t seed = p.count("seed", 0), budget = budget_of(p);
    auto req = [&](const char* key) -> const Json& {
        if (!cfg.contains(key)) throw ConfigInvalid(std::string("construction parameter '") + key + "' missing");
        return cfg.at(key);
    };
    const auto n = static_cast<std::size_t>(req("n").get<long>());
    const Rational delta = cfg.contains("delta") ? io::rational_from(cfg.at("delta")) : Rational(0);
    auto int_rows = [&](const Json& j) {
        IntMatrix k;
        if (!j.empty() && j[0].is_array())
            k = j.get<IntMatrix>();
        else
            k.push_back(j.get<std::vector<std::int64_t>>());
        return k;
    };
    auto b_rows = [&](const Json& j) {
        std::vector<CoeffVector> b;
        if (!j.empty() && j[0].is_object()) {
            for (const auto& row : j) b.push_back(io::vector_from(row));
        } else if (!j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
            for (const auto& row : j) b.push_back(io::vector_from(Json{{"d", row[0].size()}, {"entries", row}}));
        } else if (!j.empty() && j[0].is_array()) {
            for (const auto& row : j) b.push_back(io::vector_from(row));
        } else {
            b.push_back(io::vector_from(j));
        }
        return b;
    };
    auto build = [&]() {
        switch (kind) {
            case InstanceKind::linear_gap:
                return build_linear_gap_instance(n, io::gap_from(req("gap")), delta, seed, budget);
            case InstanceKind::quadratic_gap:
                return build_quadratic_gap_instance(n, io::gap_from(req("gap")), delta, seed, budget);
            case InstanceKind::rank_one: {
                auto k = int_rows(req("k"));
                auto b = b_rows(req("b"));
                if (k.size() != 1 || b.size() != 1) throw ConfigInvalid("ex1.5 takes one k row and one b row");
                return build_rank_one_instance(n, k[0], b[0], delta, seed, budget);
            }
            case InstanceKind::mixed:
                break;
        }
        return build_mixed_instance(n, io::gap_from(req("gap")), int_rows(req("k")), b_rows(req("b")), delta, seed,
                                    budget);
    };
    std::optional<StructuredInstance> made;
    try {
        made = build();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("bad construction parameters: ") + e.what());
    }
    Json out = io::to_json(*made);
    out["check"] = io::to_json(certify_instance(*made, budget));
    return out;
}

Json run_decouple(const Params& p) {
    const Json m = p.file("matrix");
    const CoeffMatrix a = io::matrix_from(m);
    DecouplingParams d;
    d.beta = p.rational("beta");
    d.xi = io::dist_from_spec(p.str("dist", "bernoulli"));
    d.b = io::matrix_shift_from(m);
    d.center = center_of(p, a.dim());
    d.c_log = p.rational("clog", Rational(1));
    d.budget = budget_of(p);
    if (p.has("condition")) {
        const QVec c = io::qvec_from(p.raw("condition"));
        if (c.size() != 3) throw ConfigInvalid("condition takes c1, c2, c3");
        d.condition = ConditionParams{c[0], c[1], c[2]};
    }
    SubsetMask u;
    try {
        u = SubsetMask::parse(a.size(), p.str("subset"));
    } catch (const InvalidParameter& e) {
        throw ConfigInvalid(e.what());
    }
    return io::to_json(decoupling_check(a, u, d));
}

FitParams fit_params(const Params& p) {
    FitParams f;
    if (p.has("params")) f = io::fit_params_from(p.file("params"), f);
    if (p.has("beta")) f.beta = p.rational("beta");
    return f;
}

PipelineParams pipeline_params(const Params& p) {
    PipelineParams pp;
    pp.fit = fit_params(p);
    pp.budget = budget_of(p);
    if (p.has("rho")) pp.rho = p.rational("rho");
    const std::uint64_t seed = p.count("seed", 0);
    pp.y_mode = sample_mode(p.str("y_mode", "exhaustive"), seed);
    pp.subset_mode = sample_mode(p.str("subsets", "exhaustive"), seed);
    if (p.has("min_subset_fraction")) pp.min_subset_fraction = p.rational("min_subset_fraction");
    return pp;
}

Json certificate_payload(const CertificateResult& r) {
    return Json{{"certificate", io::to_json(r.certificate)}, {"trace", io::to_json(r.trace)}};
}

Json run_verify(const Params& p) {
    const CoeffMatrix a = io::matrix_from(p.file("matrix"));
    const StructureCertificate cert = io::certificate_from(p.file("cert"));
    const Rational beta = p.rational("beta");
    const DiscreteDist z = io::dist_from_spec(p.str("dist", "lazy-sym-bernoulli"));
    const auto probs = verify_certificate(a, cert, z, beta, budget_of(p));
    Rational floor = 1 / pow(Rational(static_cast<long>(a.size())), cert.bound_exponent);
    floor.canonicalize();
    Json rows = Json::object();
    bool all = true;
    for (const auto& [i, prob] : probs) {
        rows[std::to_string(i)] = {{"probability", io::to_json(prob)}, {"meets_floor", prob >= floor}};
        all = all && prob >= floor;
    }
    return Json{{"bound_exponent", cert.bound_exponent},
                {"radius", io::to_json(beta * pow(Rational(static_cast<long>(a.size())), cert.bound_exponent))},
                {"floor", io::to_json(floor)},
                {"all_meet_floor", all},
                {"rows", rows}};
}

Json dispatch(const ExperimentConfig& c) {
    const Params p(c.params);
    switch (c.task) {
        case Task::rho: return run_rho(p);
        case Task::construct: return run_construct(p);
        case Task::decouple: return run_decouple(p);
        case Task::inverse_linear: {
            auto fit = fit_gap_linear(io::points_from(p.file("points")), fit_params(p));
            return Json{{"fit", fit ? io::to_json(*fit) : Json(nullptr)}};
        }
        case Task::inverse_bilinear: {
            const Json m = p.file("matrix");
            const DiscreteDist x = io::dist_from_spec(p.str("dist", "bernoulli"));
            const DiscreteDist y = p.has("dist_y") ? io::dist_from_spec(p.str("dist_y")) : x;
            return certificate_payload(bilinear_certificate(io::matrix_from(m), x, y, pipeline_params(p)));
        }
        case Task::inverse_quadratic:
            return certificate_payload(quadratic_certificate(io::matrix_from(p.file("matrix")),
                                                             io::dist_from_spec(p.str("dist", "bernoulli")),
                                                             pipeline_params(p)));
        case Task::verify: return run_verify(p);
        case Task::accept: {
            const std::string level = p.str("level", "quick");
            if (level != "quick" && level != "full") throw ConfigInvalid("level must be quick or full");
            return to_json(acceptance_suite(level == "full" ? AcceptanceLevel::full : AcceptanceLevel::quick));
        }
    }
    throw ConfigInvalid("unknown task");
}

}  // namespace

const char* to_string(Task t) {
    for (const auto& [task, name] : kTaskNames)
        if (task == t) return name;
    return "?";
}

Task parse_task(const std::string& name) {
    for (const auto& [task, n] : kTaskNames)
        if (name == n) return task;
    throw ConfigInvalid("unknown task '" + name + "'");
}

RunReport run(const ExperimentConfig& config) {
    RunReport r;
    r.config = {{"task", to_string(config.task)}, {"params", config.params}};
    r.version = LO_VERSION;
    if (config.params.is_object() && config.params.contains("seed")) {
        try {
            r.seed = Params(config.params).count("seed", 0);
        } catch (const Error&) {
        }
    }
    const auto start = std::chrono::steady_clock::now();
    try {
        r.payload = dispatch(config);
    } catch (const Error& e) {
        r.error_class = e.class_name();
        r.error_message = e.what();
        r.exit_code = static_cast<int>(e.exit_code());
        r.payload = nullptr;
    } catch (const nlohmann::json::exception& e) {
        r.error_class = "ConfigInvalid";
        r.error_message = e.what();
        r.exit_code = static_cast<int>(ExitCode::config);
        r.payload = nullptr;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (config.output) {
        try {
            io::write_file(*config.output, to_json(r));
        } catch (const Error& e) {
            if (r.exit_code == 0) {
                r.error_class = e.class_name();
                r.error_message = e.what();
                r.exit_code = static_cast<int>(e.exit_code());
            }
        }
    }
    return r;
}

io::Json to_json(const RunReport& r) {
    Json j{{"config", r.config}, {"seconds", r.seconds}, {"version", r.version}, {"seed", r.seed}};
    if (!r.error_class.empty()) j["error"] = {{"class", r.error_class}, {"message", r.error_message}};
    j["exit_code"] = r.exit_code;
    j["payload"] = r.payload;
    return j;
}

io::Json to_json(const std::vector<CriterionResult>& results) {
    Json rows = Json::array();
    bool all = true;
    for (const auto& c : results) {
        rows.push_back({{"id", c.id}, {"passed", c.passed}, {"measured", c.measured}, {"seconds", c.seconds}});
        all = all && c.passed;
    }
    return Json{{"all_passed", all}, {"criteria", rows}};
}

}  // namespace lo
