#include "nalab/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nalab {

using Json = nlohmann::ordered_json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that the
// leftovers can be reported as unknown.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

    const Json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    template <class T>
    void read(const std::string& key, T& out) {
        const Json* v = find(key);
        if (!v) return;
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v->is_boolean()) throw ConfigError(field(key), "expected a boolean");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v->is_number()) throw ConfigError(field(key), "expected a number");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v->is_string()) throw ConfigError(field(key), "expected a string");
            }
            out = v->get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(field(key), e.what());
        }
    }

    Section sub(const std::string& key) {
        static const Json empty = Json::object();
        const Json* v = find(key);
        return Section(v ? *v : empty, field(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<TrigTerm> read_terms(Section& s, const std::string& key, std::vector<TrigTerm> fallback) {
    const Json* v = s.find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(s.field(key), "expected an array of terms");
    std::vector<TrigTerm> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        Section t((*v)[i], s.field(key) + "[" + std::to_string(i) + "]");
        TrigTerm term;
        t.read("amplitude", term.amplitude);
        t.read("frequency", term.frequency);
        t.read("phase", term.phase);
        t.finish();
        out.push_back(term);
    }
    return out;
}

Json terms_json(const std::vector<TrigTerm>& terms) {
    Json a = Json::array();
    for (const auto& t : terms) a.push_back(Json{{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
    return a;
}

std::vector<double> read_doubles(Section& s, const std::string& key, std::vector<double> fallback) {
    const Json* v = s.find(key);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError(s.field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(s.field(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
    }
    return out;
}

DriverConfig read_driver(Section s) {
    DriverConfig d;
    s.read("kind", d.kind);
    d.terms = read_terms(s, "terms", d.kind == "trig_poly" ? d.terms : std::vector<TrigTerm>{});
    s.read("class_hint", d.class_hint);

    Section params = s.sub("params");
    params.read("mean", d.mean);
    params.read("K", d.K);
    params.read("amp_ratio", d.amp_ratio);
    params.read("freq_ratio", d.freq_ratio);
    params.finish();

    Section wf = s.sub("window_form");
    wf.read("type", d.form);
    if (d.form == "power") {
        wf.read("beta", d.power.beta);
        wf.read("scale", d.power.scale);
        wf.read("sign_past", d.power.sign_past);
        wf.read("sign_future", d.power.sign_future);
    } else if (d.form == "dip_train") {
        wf.read("period", d.period);
        wf.read("half_width", d.half_width);
        wf.read("depth0", d.depth0);
        wf.read("depth_growth", d.depth_growth);
        wf.read("j_min", d.j_min);
        wf.read("j_max", d.j_max);
        wf.read("baseline", d.baseline);
        wf.read("baseline_scale", d.baseline_scale);
    }
    wf.finish();
    s.finish();
    return d;
}

Json driver_json(const DriverConfig& d) {
    Json j;
    j["kind"] = d.kind;
    j["terms"] = terms_json(d.terms);
    Json wf;
    wf["type"] = d.form;
    if (d.form == "power") {
        wf["beta"] = d.power.beta;
        wf["scale"] = d.power.scale;
        wf["sign_past"] = d.power.sign_past;
        wf["sign_future"] = d.power.sign_future;
    } else if (d.form == "dip_train") {
        wf["period"] = d.period;
        wf["half_width"] = d.half_width;
        wf["depth0"] = d.depth0;
        wf["depth_growth"] = d.depth_growth;
        wf["j_min"] = d.j_min;
        wf["j_max"] = d.j_max;
        wf["baseline"] = d.baseline;
        wf["baseline_scale"] = d.baseline_scale;
    }
    j["window_form"] = wf;
    j["params"] = Json{{"mean", d.mean}, {"K", d.K}, {"amp_ratio", d.amp_ratio}, {"freq_ratio", d.freq_ratio}};
    j["class_hint"] = d.class_hint;
    return j;
}

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw ConfigError(field, message);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
    for (const char* o : options)
        if (v == o) return true;
    return false;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "b_case_forwards", "pinched_no_forwards", "asymptotic_zero_attractor", "fr_segment_liyorke",
        "cone_containment", "sublinear_forwards", "absorbing_check", "lyapunov_zero"};
    return names;
}

ExperimentConfig parse_config(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    ExperimentConfig c;
    Section top(root, "");

    Section dom = top.sub("domain");
    dom.read("bc", c.domain.bc);
    dom.read("alpha", c.domain.alpha);
    dom.read("N", c.domain.N);
    dom.read("M", c.domain.M);
    dom.finish();

    c.driver = read_driver(top.sub("driver"));

    Section lin = top.sub("linear_part");
    lin.read("mode", c.linear.mode);
    lin.read("epsilon", c.linear.epsilon);
    c.linear.chi = read_terms(lin, "chi", c.linear.chi);
    lin.finish();

    Section nl = top.sub("nonlinearity");
    nl.read("r0", c.nonlinearity.r0);
    nl.read("kappa", c.nonlinearity.kappa);
    nl.finish();

    Section in = top.sub("integrator");
    in.read("dt", c.integrator.dt);
    std::string scheme = "etd2";
    in.read("scheme", scheme);
    if (scheme == "etd2") {
        c.integrator.scheme = Scheme::etd2;
    } else if (scheme == "imex") {
        c.integrator.scheme = Scheme::imex;
    } else {
        throw ConfigError("integrator.scheme", "expected etd2 or imex, got '" + scheme + "'");
    }
    in.finish();

    auto& e = c.experiment;
    Section ex = top.sub("experiment");
    ex.read("name", e.name);
    ex.read("offset", e.offset);
    ex.read("T", e.T);
    ex.read("dt_sample", e.dt_sample);
    Section w = ex.sub("window");
    w.read("T_minus", e.window.T_minus);
    w.read("T_plus", e.window.T_plus);
    w.read("grid_step", e.window.grid_step);
    w.finish();
    Section th = ex.sub("thresholds");
    th.read("M_cut", e.thresholds.M_cut);
    th.read("eps_zero", e.thresholds.eps_zero);
    th.read("eps_rec", e.thresholds.eps_rec);
    th.finish();
    Section pb = ex.sub("pullback");
    pb.read("r", e.pullback.r);
    pb.read("t0", e.pullback.t0);
    pb.read("tol", e.pullback.tol);
    pb.read("n_max", e.pullback.n_max);
    pb.read("min_depth", e.pullback.min_depth);
    pb.finish();
    ex.read("anchor_every", e.anchor_every);
    e.offsets = read_doubles(ex, "offsets", e.offsets);
    e.bounds = read_doubles(ex, "bounds", e.bounds);
    ex.read("sample_k", e.sample_k);
    ex.read("lambda1", e.lambda1);
    ex.read("lambda2", e.lambda2);
    ex.read("samples", e.samples);
    ex.read("seed", e.seed);
    ex.read("threads", e.threads);
    ex.finish();

    Section out = top.sub("output");
    out.read("directory", c.output.directory);
    Section fmt = out.sub("formats");
    fmt.read("csv", c.output.csv);
    fmt.read("svg", c.output.svg);
    fmt.finish();
    out.finish();

    top.finish();
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("<file>", "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c) {
    Json j;
    j["domain"] = Json{{"bc", c.domain.bc}, {"alpha", c.domain.alpha}, {"N", c.domain.N}, {"M", c.domain.M}};
    j["driver"] = driver_json(c.driver);
    j["linear_part"] = Json{{"mode", c.linear.mode}, {"epsilon", c.linear.epsilon}, {"chi", terms_json(c.linear.chi)}};
    j["nonlinearity"] = Json{{"r0", c.nonlinearity.r0}, {"kappa", c.nonlinearity.kappa}};
    j["integrator"] =
        Json{{"dt", c.integrator.dt}, {"scheme", c.integrator.scheme == Scheme::etd2 ? "etd2" : "imex"}};
    const auto& e = c.experiment;
    Json ex;
    ex["name"] = e.name;
    ex["offset"] = e.offset;
    ex["T"] = e.T;
    ex["dt_sample"] = e.dt_sample;
    ex["window"] = Json{{"T_minus", e.window.T_minus}, {"T_plus", e.window.T_plus}, {"grid_step", e.window.grid_step}};
    ex["thresholds"] = Json{{"M_cut", e.thresholds.M_cut},
                            {"eps_zero", e.thresholds.eps_zero},
                            {"eps_rec", e.thresholds.eps_rec}};
    ex["pullback"] =
        Json{{"r", e.pullback.r}, {"t0", e.pullback.t0}, {"tol", e.pullback.tol}, {"n_max", e.pullback.n_max},
             {"min_depth", e.pullback.min_depth}};
    ex["anchor_every"] = e.anchor_every;
    ex["offsets"] = e.offsets;
    ex["bounds"] = e.bounds;
    ex["sample_k"] = e.sample_k;
    ex["lambda1"] = e.lambda1;
    ex["lambda2"] = e.lambda2;
    ex["samples"] = e.samples;
    ex["seed"] = e.seed;
    ex["threads"] = e.threads;
    j["experiment"] = ex;
    j["output"] = Json{{"directory", c.output.directory},
                       {"formats", Json{{"csv", c.output.csv}, {"svg", c.output.svg}}}};
    return j.dump(2) + "\n";
}

void validate(const ExperimentConfig& c) {
    require(one_of(c.domain.bc, {"dirichlet", "neumann", "robin"}), "domain.bc",
            "expected dirichlet, neumann or robin");
    require(c.domain.alpha >= 0.0 && std::isfinite(c.domain.alpha), "domain.alpha", "must be >= 0");
    require(c.domain.N >= 2, "domain.N", "must be >= 2");
    require(c.domain.M >= 4 * c.domain.N, "domain.M", "must be >= 4 N");

    const auto& d = c.driver;
    require(one_of(d.kind, {"trig_poly", "geometric_limit_periodic", "synthetic_window"}), "driver.kind",
            "expected trig_poly, geometric_limit_periodic or synthetic_window");
    for (std::size_t i = 0; i < d.terms.size(); ++i) {
        const auto& t = d.terms[i];
        require(std::isfinite(t.amplitude) && std::isfinite(t.frequency) && std::isfinite(t.phase),
                "driver.terms[" + std::to_string(i) + "]", "must be finite");
        if (d.kind != "trig_poly")
            require(t.frequency != 0.0, "driver.terms[" + std::to_string(i) + "].frequency",
                    "added terms must have zero mean (frequency != 0)");
    }
    require(std::isfinite(d.mean), "driver.params.mean", "must be finite");
    require(d.K >= 1 && d.K <= 30, "driver.params.K", "must be in [1, 30]");
    require(d.amp_ratio > 0.0 && d.amp_ratio < 1.0, "driver.params.amp_ratio", "must be in (0, 1)");
    require(d.freq_ratio > 0.0 && d.freq_ratio < 1.0, "driver.params.freq_ratio", "must be in (0, 1)");
    require(one_of(d.form, {"none", "power", "dip_train"}), "driver.window_form.type",
            "expected none, power or dip_train");
    require((d.kind == "synthetic_window") == (d.form != "none"), "driver.window_form.type",
            "a window form is required for synthetic_window and only there");
    if (d.form == "power") {
        require(d.power.beta > 0.0 && d.power.beta < 1.0, "driver.window_form.beta", "must be in (0, 1)");
        require(d.power.scale > 0.0, "driver.window_form.scale", "must be > 0");
        require(std::abs(d.power.sign_past) == 1.0, "driver.window_form.sign_past", "must be +1 or -1");
        require(std::abs(d.power.sign_future) == 1.0, "driver.window_form.sign_future", "must be +1 or -1");
    } else if (d.form == "dip_train") {
        require(d.period > 0.0, "driver.window_form.period", "must be > 0");
        require(d.half_width > 0.0 && 2.0 * d.half_width < d.period, "driver.window_form.half_width",
                "must be in (0, period / 2)");
        require(d.depth0 >= 0.0, "driver.window_form.depth0", "must be >= 0");
        require(d.depth_growth >= 0.0, "driver.window_form.depth_growth", "must be >= 0");
        require(d.j_min <= d.j_max, "driver.window_form.j_min", "must be <= j_max");
        require(d.baseline >= 0.0, "driver.window_form.baseline", "must be >= 0");
        require(d.baseline_scale > 0.0, "driver.window_form.baseline_scale", "must be > 0");
    }

    require(one_of(c.linear.mode, {"homogeneous", "perturbed"}), "linear_part.mode",
            "expected homogeneous or perturbed");
    require(std::isfinite(c.linear.epsilon) && c.linear.epsilon >= 0.0, "linear_part.epsilon", "must be >= 0");
    require(c.linear.mode == "homogeneous" || c.domain.bc == "dirichlet", "linear_part.mode",
            "the perturbed linear part needs the dirichlet basis");

    require(c.nonlinearity.r0 > 0.0 && std::isfinite(c.nonlinearity.r0), "nonlinearity.r0", "must be > 0");
    require(c.nonlinearity.kappa > 0.0 && std::isfinite(c.nonlinearity.kappa), "nonlinearity.kappa",
            "must be > 0");
    require(c.integrator.dt > 0.0 && c.integrator.dt <= 0.1, "integrator.dt", "must be in (0, 0.1]");

    const auto& e = c.experiment;
    bool known = false;
    for (const auto& n : experiment_names()) known = known || n == e.name;
    if (!known) {
        std::string list;
        for (const auto& n : experiment_names()) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("experiment.name", "unknown experiment '" + e.name + "'; available: " + list);
    }
    require(std::isfinite(e.offset), "experiment.offset", "must be finite");
    require(e.T > 0.0 && std::isfinite(e.T), "experiment.T", "must be > 0");
    require(e.dt_sample > 0.0 && e.dt_sample <= e.T, "experiment.dt_sample", "must be in (0, T]");
    require(e.window.T_minus < 0.0, "experiment.window.T_minus", "must be < 0");
    require(e.window.T_plus > 0.0, "experiment.window.T_plus", "must be > 0");
    require(e.window.grid_step > 0.0, "experiment.window.grid_step", "must be > 0");
    require(e.thresholds.M_cut > 0.0, "experiment.thresholds.M_cut", "must be > 0");
    require(e.thresholds.eps_zero > 0.0 && e.thresholds.eps_zero < 1.0, "experiment.thresholds.eps_zero",
            "must be in (0, 1)");
    require(e.thresholds.eps_rec > 0.0, "experiment.thresholds.eps_rec", "must be > 0");
    require(e.pullback.r >= 0.0, "experiment.pullback.r", "must be >= 0 (0 selects the default)");
    require(e.pullback.t0 > 0.0, "experiment.pullback.t0", "must be > 0");
    require(e.pullback.tol > 0.0, "experiment.pullback.tol", "must be > 0");
    require(e.pullback.n_max >= 1, "experiment.pullback.n_max", "must be >= 1");
    require(e.pullback.min_depth >= 0.0, "experiment.pullback.min_depth", "must be >= 0");
    require(e.anchor_every >= 0.0, "experiment.anchor_every", "must be >= 0");
    for (std::size_t i = 0; i < e.bounds.size(); ++i)
        require(e.bounds[i] > 0.0, "experiment.bounds[" + std::to_string(i) + "]", "must be > 0");
    for (std::size_t i = 0; i < e.offsets.size(); ++i)
        require(std::isfinite(e.offsets[i]), "experiment.offsets[" + std::to_string(i) + "]", "must be finite");
    require(e.sample_k >= 1, "experiment.sample_k", "must be >= 1");
    require(std::abs(e.lambda1) <= 1.0, "experiment.lambda1", "must satisfy |lambda| <= 1");
    require(std::abs(e.lambda2) <= 1.0, "experiment.lambda2", "must satisfy |lambda| <= 1");
    require(e.samples >= 1, "experiment.samples", "must be >= 1");
    require(e.threads >= 0, "experiment.threads", "must be >= 0");
    require(!c.output.directory.empty(), "output.directory", "must not be empty");
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t config_hash(const ExperimentConfig& config) { return fnv1a64(dump_config(config)); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Driver build_driver(const DriverConfig& d) {
    Driver out;
    if (d.kind == "trig_poly") {
        out = Driver::trig(d.terms, d.mean);
    } else if (d.kind == "geometric_limit_periodic") {
        out = Driver::geometric(d.K, d.amp_ratio, d.freq_ratio).plus(d.terms);
    } else if (d.form == "power") {
        out = Driver::power(d.power).plus(d.terms);
    } else {
        out = Driver::dip_train(Driver::make_dip_train(d.period, d.half_width, d.depth0, d.depth_growth, d.j_min,
                                                       d.j_max, d.baseline, d.baseline_scale))
                  .plus(d.terms);
    }
    out.class_hint = d.class_hint;
    return out;
}

ProblemSpec build_spec(const ExperimentConfig& c) {
    ProblemSpec s;
    BoundaryCondition bc;
    bc.kind = c.domain.bc == "dirichlet" ? BoundaryKind::dirichlet
              : c.domain.bc == "neumann" ? BoundaryKind::neumann
                                         : BoundaryKind::robin;
    bc.alpha = c.domain.alpha;
    s.basis = Basis::build(bc, c.domain.N, c.domain.M);
    s.driver = build_driver(c.driver);
    if (c.linear.mode == "perturbed") {
        s.linear_part = LinearPart::perturbed;
        s.perturbation = Perturbation{c.linear.epsilon, Driver::trig(c.linear.chi)};
    }
    s.nonlinearity = c.nonlinearity;
    s.integrator = c.integrator;
    return s;
}

PullbackParams resolved_pullback(const ExperimentConfig& config, const ProblemSpec& spec) {
    PullbackParams p = config.experiment.pullback;
    if (p.r <= 0.0) p.r = default_pullback_params(spec).r;
    return p;
}

}  // namespace nalab
