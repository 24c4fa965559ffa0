#include "quasilog/config.hpp"
#include "quasilog/errors.hpp"
#include "quasilog/experiment.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace quasilog;

namespace {

ParseError parse_error(const std::string& text) {
    try {
        ConfigSource::from_text(text, "t.ini").build();
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("no ParseError for:\n" << text);
    return ParseError("", 0, "");
}

std::vector<std::string> split_words(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

}  // namespace

TEST_CASE("config text with sections", "[config]") {
    const ExperimentConfig c = ConfigSource::from_text(R"(
# comment
[experiment]
kind = kappa-sweep
seed = 12
mode = cold

[domain]
dimension = 2   ; trailing comment
n = 31

[weight]
weight = disk-bump
b0 = 1000

[transform]
kappa = 0.25
p = 4

[sweep]
lambda_unit = lambda_b0
lambda = 1.2
kappa_grid = 0.1, 0.01,0.001
regime = c
compact = support
)")
                                   .build();
    CHECK(c.kind == ExperimentKind::kappa_sweep);
    CHECK(c.seed == 12);
    CHECK(c.mode == SweepMode::cold);
    CHECK(c.dimension == 2);
    CHECK(c.n == 31);
    CHECK(c.weight.mode == WeightMode::bump);
    CHECK(c.weight.b0 == 1000.0);
    CHECK(c.kappa == 0.25);
    CHECK(c.p == 4.0);
    CHECK(c.lambda_unit == LambdaUnit::lambda_b0);
    CHECK(c.kappa_grid == std::vector<double>{0.1, 0.01, 0.001});
    CHECK(c.regime == KappaRegime::c);
    CHECK(c.compact == "support");
}

TEST_CASE("defaults", "[config]") {
    const ExperimentConfig c = ConfigSource{}.build();
    CHECK(c.seed == 0);
    CHECK(c.mode == SweepMode::warm);
    CHECK(c.kappa == 1.0);
    CHECK(c.lambda_unit == LambdaUnit::lambda1);
    for (const ConfigKey& key : config_keys()) {
        INFO(key.name);
        CHECK_FALSE(key.section.empty());
        CHECK_FALSE(key.help.empty());
    }
}

TEST_CASE("parse errors name line and key", "[config]") {
    const ParseError range = parse_error("[transform]\n\nkappa = -1\n");
    CHECK(range.line() == 3);
    CHECK(range.key() == "kappa");
    CHECK(std::string(range.what()).find("out of range") != std::string::npos);

    const ParseError unknown = parse_error("[transform]\nkapa = 1\n");
    CHECK(unknown.line() == 2);
    CHECK(unknown.key() == "kapa");

    const ParseError type = parse_error("[domain]\nn = 3.5\n");
    CHECK(type.key() == "n");
    CHECK(type.line() == 2);

    const ParseError misplaced = parse_error("[domain]\nkappa = 1\n");
    CHECK(misplaced.key() == "kappa");

    CHECK(parse_error("[domain]\ndimension = 3\n").key() == "dimension");
    CHECK(parse_error("[transform]\np = 1\n").key() == "p");
    CHECK(parse_error("[domain]\nx_min = 1\nx_max = 0\n").key() == "x_max");
    CHECK(parse_error("[sweep]\nkappa_grid = 0.1, -2\n").key() == "kappa_grid");
    CHECK(parse_error("[experiment]\nkind = nonsense\n").key() == "kind");
    CHECK(parse_error("just words\n").line() == 1);
}

TEST_CASE("missing file names the path", "[config]") {
    try {
        ConfigSource::from_file("/nonexistent/dir/run.ini");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/dir/run.ini") != std::string::npos);
    }
}

TEST_CASE("flags override the file", "[config]") {
    ConfigSource source = ConfigSource::from_text("[sweep]\nlambda = 3\n[transform]\nkappa = 0.5\n");
    source.set("lambda", "12.5");
    const ExperimentConfig c = source.build();
    CHECK(c.lambda == 12.5);
    CHECK(c.kappa == 0.5);

    source.set("kappa", "-1");
    try {
        source.build();
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 0);
        CHECK(e.key() == "kappa");
    }
    CHECK_THROWS_AS(source.set("no_such_flag", "1"), ParseError);
}

TEST_CASE("lambda units", "[config]") {
    WeightShape shape;
    shape.mode = WeightMode::bump;
    shape.b0 = 10.0;
    const WeightField weight = build_weight(Grid::rectangle({0.0, 1.0}, {0.0, 1.0}, 15, 15), shape);
    const Spectrum spec = analyze_spectrum(weight);
    ExperimentConfig c;
    c.lambda_unit = LambdaUnit::absolute;
    CHECK(c.absolute_lambda(7.0, spec) == 7.0);
    c.lambda_unit = LambdaUnit::lambda1;
    CHECK(c.absolute_lambda(2.0, spec) == 2.0 * spec.lambda1);
    c.lambda_unit = LambdaUnit::lambda_b0;
    CHECK(c.absolute_lambda(1.2, spec) == 1.2 * spec.lambda_b0());
    c.lambda_unit = LambdaUnit::refuge_gap;
    CHECK(c.absolute_lambda(0.0, spec) == spec.lambda1);
    CHECK_THAT(c.absolute_lambda(1.0, spec), Catch::Matchers::WithinRel(spec.lambda_b0(), 1e-15));
}

TEST_CASE("verdict lines are machine-parseable", "[experiment]") {
    ExperimentConfig c;
    c.kind = ExperimentKind::solve;
    c.n = 31;
    c.starts = 2;
    const ExperimentResult r = run_experiment(c);
    std::istringstream in(verdict_text(r));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        const std::vector<std::string> words = split_words(line);
        REQUIRE(words.size() == 4);
        CHECK((words[1] == "PASS" || words[1] == "FAIL" || words[1] == "SKIPPED"));
        CHECK_NOTHROW(std::stod(words[2]));
        CHECK_NOTHROW(std::stod(words[3]));
        ++lines;
    }
    CHECK(lines == r.checks.size());
    CHECK(r.passed());
}

TEST_CASE("artifacts and verdict are written to the output directory", "[experiment]") {
    ExperimentConfig c;
    c.kind = ExperimentKind::branch;
    c.n = 31;
    c.steps = 6;
    c.lambda_from = 0.5;
    c.lambda_to = 2.0;
    const ExperimentResult r = run_experiment(c);
    CHECK(r.find("nonzero_below_lambda1")->status == CheckStatus::pass);
    CHECK(r.find("bifurcation_ratio")->status == CheckStatus::skipped);
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "quasilog-test-artifacts";
    std::filesystem::remove_all(dir);
    write_artifacts(r, dir);
    CHECK(std::filesystem::exists(dir / "branch.csv"));
    std::ifstream verdict(dir / "verdict.txt");
    std::stringstream text;
    text << verdict.rdbuf();
    CHECK(text.str() == verdict_text(r));
    std::filesystem::remove_all(dir);
}

TEST_CASE("failing checks fail the run unless exploratory", "[experiment]") {
    ExperimentResult r;
    r.checks.push_back({"a", CheckStatus::pass, 1.0, 2.0});
    r.checks.push_back({"b", CheckStatus::skipped, 0.0, 0.0});
    CHECK(r.passed());
    Check info{"c", CheckStatus::fail, 3.0, 0.0};
    info.exploratory = true;
    r.checks.push_back(info);
    CHECK(r.passed());
    CHECK(verdict_text(r).find("info.c FAIL 3 0") != std::string::npos);
    r.checks.push_back({"d", CheckStatus::fail, 3.0, 0.0});
    CHECK_FALSE(r.passed());
}

TEST_CASE("cold runs are deterministic", "[experiment][property]") {
    ExperimentConfig c;
    c.kind = ExperimentKind::kappa_sweep;
    c.dimension = 2;
    c.n = 23;
    c.weight.mode = WeightMode::bump;
    c.weight.b0 = 1000.0;
    c.lambda_unit = LambdaUnit::refuge_gap;
    c.lambda = 0.5;
    c.mode = SweepMode::cold;
    c.kappa_grid = {0.1, 0.01, 0.001};
    ::setenv("QUASILOG_THREADS", "3", 1);
    const ExperimentResult a = run_experiment(c);
    ::setenv("QUASILOG_THREADS", "1", 1);
    const ExperimentResult b = run_experiment(c);
    ::unsetenv("QUASILOG_THREADS");
    REQUIRE(a.artifacts.size() == b.artifacts.size());
    for (std::size_t k = 0; k < a.artifacts.size(); ++k) CHECK(a.artifacts[k].content == b.artifacts[k].content);

    c.kind = ExperimentKind::solve;
    c.dimension = 1;
    c.weight.mode = WeightMode::constant;
    c.weight.b0 = 1.0;
    c.lambda_unit = LambdaUnit::lambda1;
    c.lambda = 2.0;
    c.starts = 3;
    c.seed = 5;
    const ExperimentResult s1 = run_experiment(c);
    const ExperimentResult s2 = run_experiment(c);
    CHECK(s1.artifacts[1].content == s2.artifacts[1].content);
    c.seed = 6;
    CHECK(run_experiment(c).artifacts[1].content != s1.artifacts[1].content);
}

TEST_CASE("verify-f reports every property", "[experiment]") {
    const ExperimentResult r = verify_transform({1e-3, 1.0}, 4.0, 50, 1e-6, 1e3, 0);
    CHECK(r.passed());
    CHECK(r.find("g_over_t_increasing_violations")->status == CheckStatus::pass);
    const ExperimentResult low = verify_transform({1.0}, 2.0, 20, 1e-3, 1.0, 0);
    CHECK(low.find("fpfp_over_t_increasing_violations")->status == CheckStatus::skipped);
    CHECK_THROWS_AS(verify_transform({}, 4.0, 50, 1e-6, 1e3, 0), DomainError);
}
