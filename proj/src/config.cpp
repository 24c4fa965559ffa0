#include "quasilog/config.hpp"

#include "quasilog/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace quasilog {

namespace {

// Thrown by value converters; rethrown as ParseError with the line and key attached.
struct BadValue {
    std::string message;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_real(const std::string& text) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw BadValue{"expected a finite number, got '" + text + "'"};
    }
    return value;
}

long long to_integer(const std::string& text) {
    long long value = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw BadValue{"expected an integer, got '" + text + "'"};
    }
    return value;
}

bool to_bool(const std::string& text) {
    if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
    if (text == "false" || text == "no" || text == "off" || text == "0") return false;
    throw BadValue{"expected true or false, got '" + text + "'"};
}

std::vector<double> to_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(to_real(trim(item)));
    if (out.empty()) throw BadValue{"expected a comma-separated list of numbers"};
    return out;
}

double positive(const std::string& text) {
    const double v = to_real(text);
    if (!(v > 0.0)) throw BadValue{"value " + text + " out of range (must be > 0)"};
    return v;
}

double nonnegative(const std::string& text) {
    const double v = to_real(text);
    if (!(v >= 0.0)) throw BadValue{"value " + text + " out of range (must be >= 0)"};
    return v;
}

int integer_at_least(const std::string& text, long long lo) {
    const long long v = to_integer(text);
    if (v < lo || v > 1'000'000'000) {
        throw BadValue{"value " + text + " out of range (must be >= " + std::to_string(lo) + ")"};
    }
    return static_cast<int>(v);
}

template <class F>
auto enumerated(F&& parse, const std::string& text) {
    try {
        return parse(text);
    } catch (const Error& err) {
        throw BadValue{err.what()};
    }
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

struct KeySpec {
    ConfigKey doc;
    Setter set;
};

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table{
        {{"experiment", "kind", "verify-f|eig|solve|branch|lambda-sweep|kappa-sweep|large|stability", "solve"},
         [](ExperimentConfig& c, const std::string& v) { c.kind = enumerated(experiment_kind_from_string, v); }},
        {{"experiment", "seed", "seed of the random probes", "0"},
         [](ExperimentConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(integer_at_least(v, 0)); }},
        {{"experiment", "mode", "warm|cold sweep seeding", "warm"},
         [](ExperimentConfig& c, const std::string& v) { c.mode = enumerated(sweep_mode_from_string, v); }},
        {{"experiment", "starts", "random starts of the solve probe", "3"},
         [](ExperimentConfig& c, const std::string& v) { c.starts = integer_at_least(v, 0); }},

        {{"domain", "dimension", "1 or 2", "1"},
         [](ExperimentConfig& c, const std::string& v) {
             c.dimension = integer_at_least(v, 1);
             if (c.dimension > 2) throw BadValue{"value " + v + " out of range (must be 1 or 2)"};
         }},
        {{"domain", "x_min", "left end of the x extent", "0"},
         [](ExperimentConfig& c, const std::string& v) { c.x.lo = to_real(v); }},
        {{"domain", "x_max", "right end of the x extent", "1"},
         [](ExperimentConfig& c, const std::string& v) { c.x.hi = to_real(v); }},
        {{"domain", "y_min", "lower end of the y extent (2D)", "0"},
         [](ExperimentConfig& c, const std::string& v) { c.y.lo = to_real(v); }},
        {{"domain", "y_max", "upper end of the y extent (2D)", "1"},
         [](ExperimentConfig& c, const std::string& v) { c.y.hi = to_real(v); }},
        {{"domain", "n", "interior nodes per axis", "63"},
         [](ExperimentConfig& c, const std::string& v) { c.n = integer_at_least(v, 3); }},

        {{"weight", "weight", "zero|constant|disk-bump", "constant"},
         [](ExperimentConfig& c, const std::string& v) { c.weight.mode = enumerated(weight_mode_from_string, v); }},
        {{"weight", "b0", "weight amplitude", "1"},
         [](ExperimentConfig& c, const std::string& v) { c.weight.b0 = positive(v); }},
        {{"weight", "center_x", "bump center x", "0.5"},
         [](ExperimentConfig& c, const std::string& v) { c.weight.center[0] = to_real(v); }},
        {{"weight", "center_y", "bump center y", "0.5"},
         [](ExperimentConfig& c, const std::string& v) { c.weight.center[1] = to_real(v); }},
        {{"weight", "radius", "bump support radius", "0.25"},
         [](ExperimentConfig& c, const std::string& v) { c.weight.radius = positive(v); }},

        {{"transform", "kappa", "quasilinear coupling, >= 0", "1"},
         [](ExperimentConfig& c, const std::string& v) { c.kappa = nonnegative(v); }},
        {{"transform", "p", "logistic exponent, > 1", "3"},
         [](ExperimentConfig& c, const std::string& v) {
             c.p = to_real(v);
             if (!(c.p > 1.0)) throw BadValue{"value " + v + " out of range (must be > 1)"};
         }},

        {{"solver", "newton_tol", "Newton residual tolerance", "1e-9"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.newton_tol = positive(v); }},
        {{"solver", "step_tol", "Newton step tolerance", "1e-11"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.step_tol = positive(v); }},
        {{"solver", "max_newton", "Newton iteration cap", "200"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.max_newton = integer_at_least(v, 1); }},
        {{"solver", "damping", "line-search backtracking factor in (0,1)", "0.5"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.damping = positive(v);
             if (c.solver.damping >= 1.0) throw BadValue{"value " + v + " out of range (must be < 1)"};
         }},
        {{"solver", "monotone_fallback", "fall back to monotone iteration", "true"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.monotone_fallback = to_bool(v); }},
        {{"solver", "monotone_shift", "shift of the monotone scheme, 0 = automatic", "0"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.monotone_shift = nonnegative(v); }},
        {{"solver", "max_monotone", "monotone sweep cap", "20000"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.max_monotone = integer_at_least(v, 1); }},
        {{"solver", "zero_threshold", "sup-norm declaring the trivial solution", "1e-8"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.zero_threshold = positive(v); }},
        {{"solver", "eigen_tol", "eigen-residual tolerance", "1e-10"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.eigen.tol = positive(v); }},
        {{"solver", "eigen_max_iter", "inverse-iteration cap", "5000"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.eigen.max_iter = integer_at_least(v, 1); }},

        {{"sweep", "lambda_unit", "absolute|lambda1|lambda_b0|refuge_gap: scale of every lambda value", "lambda1"},
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "absolute") c.lambda_unit = LambdaUnit::absolute;
             else if (v == "lambda1") c.lambda_unit = LambdaUnit::lambda1;
             else if (v == "lambda_b0") c.lambda_unit = LambdaUnit::lambda_b0;
             else if (v == "refuge_gap") c.lambda_unit = LambdaUnit::refuge_gap;
             else throw BadValue{"expected absolute, lambda1, lambda_b0 or refuge_gap, got '" + v + "'"};
         }},
        {{"sweep", "lambda", "lambda of solve, stability, kappa-sweep and the compact bound", "2"},
         [](ExperimentConfig& c, const std::string& v) { c.lambda = positive(v); }},
        {{"sweep", "lambda_from", "first branch lambda", "1.001"},
         [](ExperimentConfig& c, const std::string& v) { c.lambda_from = positive(v); }},
        {{"sweep", "lambda_to", "last branch lambda", "3"},
         [](ExperimentConfig& c, const std::string& v) { c.lambda_to = positive(v); }},
        {{"sweep", "steps", "branch points", "40"},
         [](ExperimentConfig& c, const std::string& v) { c.steps = integer_at_least(v, 2); }},
        {{"sweep", "lambda_grid", "lambda values of lambda-sweep", "1.5,1.25,1.1,1.01,1.001"},
         [](ExperimentConfig& c, const std::string& v) {
             c.lambda_grid = to_list(v);
             for (double x : c.lambda_grid) {
                 if (!(x > 0.0)) throw BadValue{"lambda values must be > 0"};
             }
         }},
        {{"sweep", "kappa_grid", "kappa values (defaults depend on the experiment)", ""},
         [](ExperimentConfig& c, const std::string& v) {
             c.kappa_grid = to_list(v);
             for (double x : c.kappa_grid) {
                 if (!(x > 0.0)) throw BadValue{"kappa values must be > 0"};
             }
         }},
        {{"sweep", "regime", "auto|a|b|c for kappa-sweep", "auto"},
         [](ExperimentConfig& c, const std::string& v) { c.regime = enumerated(kappa_regime_from_string, v); }},
        {{"sweep", "control", "lambda-sweep against the kappa = 0 control problem", "false"},
         [](ExperimentConfig& c, const std::string& v) { c.control = to_bool(v); }},
        {{"sweep", "compact", "none|refuge|support", "none"},
         [](ExperimentConfig& c, const std::string& v) {
             if (v != "none" && v != "refuge" && v != "support") {
                 throw BadValue{"expected none, refuge or support, got '" + v + "'"};
             }
             c.compact = v;
         }},
        {{"sweep", "compact_radius", "radius of the support compact", "0.0625"},
         [](ExperimentConfig& c, const std::string& v) { c.compact_radius = positive(v); }},
        {{"sweep", "compact_margin", "refuge compact margin in cells", "3"},
         [](ExperimentConfig& c, const std::string& v) { c.compact_margin = nonnegative(v); }},
        {{"sweep", "continuum_tol", "relative gate of lambda1 against the continuum value", "1e-3"},
         [](ExperimentConfig& c, const std::string& v) { c.continuum_tol = positive(v); }},

        {{"large", "ball_dimension", "dimension of the radial problem", "2"},
         [](ExperimentConfig& c, const std::string& v) { c.ball_dimension = integer_at_least(v, 1); }},
        {{"large", "ball_radius", "ball radius", "0.3"},
         [](ExperimentConfig& c, const std::string& v) { c.ball_radius = positive(v); }},
        {{"large", "ball_lambda", "absolute lambda of the radial problem", "99.3"},
         [](ExperimentConfig& c, const std::string& v) { c.ball_lambda = nonnegative(v); }},
        {{"large", "ball_b0", "constant weight on the ball", "1000"},
         [](ExperimentConfig& c, const std::string& v) { c.ball_b0 = positive(v); }},
        {{"large", "mesh_n", "uniform radial cells", "400"},
         [](ExperimentConfig& c, const std::string& v) { c.large.mesh_n = integer_at_least(v, 4); }},
        {{"large", "first_value", "first boundary value of the schedule", "10"},
         [](ExperimentConfig& c, const std::string& v) { c.large.first_value = positive(v); }},
        {{"large", "max_doublings", "schedule length cap", "200"},
         [](ExperimentConfig& c, const std::string& v) { c.large.max_doublings = integer_at_least(v, 1); }},
        {{"large", "large_tol", "interior stabilization tolerance", "1e-6"},
         [](ExperimentConfig& c, const std::string& v) { c.large.tolerance = positive(v); }},
        {{"large", "ko_t", "upper limit of the partial integral", "1e4"},
         [](ExperimentConfig& c, const std::string& v) {
             c.ko_t = to_real(v);
             if (!(c.ko_t > 1.0)) throw BadValue{"value " + v + " out of range (must be > 1)"};
         }},

        {{"verify", "t_min", "smallest sampled t", "1e-6"},
         [](ExperimentConfig& c, const std::string& v) { c.t_min = positive(v); }},
        {{"verify", "t_max", "largest sampled t", "1e3"},
         [](ExperimentConfig& c, const std::string& v) { c.t_max = positive(v); }},
        {{"verify", "samples", "sampled t per kappa", "200"},
         [](ExperimentConfig& c, const std::string& v) { c.samples = integer_at_least(v, 2); }},
    };
    return table;
}

const KeySpec* find_key(const std::string& name) {
    for (const KeySpec& spec : key_table()) {
        if (spec.doc.name == name) return &spec;
    }
    return nullptr;
}

std::string where(const std::string& origin, int line) {
    return line > 0 ? origin + ":" + std::to_string(line) : origin;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::verify_f: return "verify-f";
        case ExperimentKind::eig: return "eig";
        case ExperimentKind::solve: return "solve";
        case ExperimentKind::branch: return "branch";
        case ExperimentKind::lambda_sweep: return "lambda-sweep";
        case ExperimentKind::kappa_sweep: return "kappa-sweep";
        case ExperimentKind::large: return "large";
        case ExperimentKind::stability: return "stability";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (ExperimentKind k : {ExperimentKind::verify_f, ExperimentKind::eig, ExperimentKind::solve,
                             ExperimentKind::branch, ExperimentKind::lambda_sweep, ExperimentKind::kappa_sweep,
                             ExperimentKind::large, ExperimentKind::stability}) {
        if (to_string(k) == name) return k;
    }
    throw DomainError("unknown experiment '" + name + "'");
}

std::string to_string(LambdaUnit unit) {
    switch (unit) {
        case LambdaUnit::absolute: return "absolute";
        case LambdaUnit::lambda1: return "lambda1";
        case LambdaUnit::lambda_b0: return "lambda_b0";
        case LambdaUnit::refuge_gap: return "refuge_gap";
    }
    return "unknown";
}

Grid ExperimentConfig::grid() const {
    return dimension == 1 ? Grid::interval(x, n) : Grid::rectangle(x, y, n, n);
}

WeightField ExperimentConfig::weight_field() const { return build_weight(grid(), weight); }

double ExperimentConfig::absolute_lambda(double value, const Spectrum& spectrum) const {
    switch (lambda_unit) {
        case LambdaUnit::absolute: return value;
        case LambdaUnit::lambda1: return value * spectrum.lambda1;
        case LambdaUnit::lambda_b0:
            if (!spectrum.refuge) throw ConfigurationError("lambda_unit = lambda_b0 needs a refuge");
            return value * spectrum.lambda_b0();
        case LambdaUnit::refuge_gap:
            if (!spectrum.refuge) throw ConfigurationError("lambda_unit = refuge_gap needs a refuge");
            return spectrum.lambda1 + value * (spectrum.lambda_b0() - spectrum.lambda1);
    }
    return value;
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const KeySpec& spec : key_table()) out.push_back(spec.doc);
        return out;
    }();
    return keys;
}

ConfigSource ConfigSource::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read config file '" + path.string() + "'", 0, "");
    std::stringstream text;
    text << in.rdbuf();
    return from_text(text.str(), path.string());
}

ConfigSource ConfigSource::from_text(const std::string& text, const std::string& origin) {
    ConfigSource out;
    std::stringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string body = trim(raw.substr(0, raw.find_first_of("#;")));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError(where(origin, line) + ": malformed section header", line, "");
            section = trim(body.substr(1, body.size() - 2));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ParseError(where(origin, line) + ": expected 'key = value'", line, body);
        }
        const std::string key = trim(body.substr(0, eq));
        const KeySpec* spec = find_key(key);
        if (!spec) throw ParseError(where(origin, line) + ": unknown key '" + key + "'", line, key);
        if (!section.empty() && section != spec->doc.section) {
            throw ParseError(where(origin, line) + ": key '" + key + "' belongs in [" + spec->doc.section +
                                 "], not [" + section + "]",
                             line, key);
        }
        out.set(key, trim(body.substr(eq + 1)), line, origin);
    }
    return out;
}

void ConfigSource::set(const std::string& key, const std::string& value, int line, const std::string& origin) {
    if (!find_key(key)) throw ParseError(where(origin, line) + ": unknown key '" + key + "'", line, key);
    entries_[key] = Entry{value, line, origin};
}

ExperimentConfig ConfigSource::build() const {
    ExperimentConfig config;
    // Table order, so that later checks see earlier fields.
    for (const KeySpec& spec : key_table()) {
        const auto it = entries_.find(spec.doc.name);
        if (it == entries_.end()) continue;
        const Entry& e = it->second;
        try {
            spec.set(config, e.value);
        } catch (const BadValue& bad) {
            throw ParseError(where(e.origin, e.line) + ": key '" + spec.doc.name + "': " + bad.message, e.line,
                             spec.doc.name);
        }
    }
    const auto fail = [&](const std::string& key, const std::string& message) {
        const auto it = entries_.find(key);
        const int line = it == entries_.end() ? 0 : it->second.line;
        const std::string origin = it == entries_.end() ? "config" : where(it->second.origin, line);
        throw ParseError(origin + ": key '" + key + "': " + message, line, key);
    };
    if (!(config.x.hi > config.x.lo)) fail("x_max", "must exceed x_min");
    if (!(config.y.hi > config.y.lo)) fail("y_max", "must exceed y_min");
    if (!(config.t_max > config.t_min)) fail("t_max", "must exceed t_min");
    try {
        config.solver.validate();
    } catch (const ConfigurationError& err) {
        fail("newton_tol", err.what());
    }
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) { return ConfigSource::from_file(path).build(); }

}  // namespace quasilog
