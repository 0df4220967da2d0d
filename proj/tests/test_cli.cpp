#include "lcorder/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using nlohmann::json;

namespace {

struct Run
{
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> const& args)
{
    std::ostringstream out;
    std::ostringstream err;
    int const code = lcorder::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir(std::string const& name)
{
    auto const dir = std::filesystem::temp_directory_path() / ("lcorder-" + name + "-" + std::to_string(getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("dist")
{
    Run const b = run({"dist", R"({"kind":"binomial","n":2,"p":0.5})"});
    REQUIRE(b.code == 0);
    json const j = json::parse(b.out);
    CHECK(j.at("pmf").at("weights") == json::array({0.25, 0.5, 0.25}));
    CHECK(j.at("mean").at("value").get<double>() == doctest::Approx(1.0));

    Run const s = run({"dist", R"({"kind":"bernoulli_sum","ps":[0.1,0.2,0.3]})"});
    REQUIRE(s.code == 0);
    auto const w = json::parse(s.out).at("pmf").at("weights").get<std::vector<double>>();
    std::vector<double> const oracle{0.504, 0.398, 0.092, 0.006};
    REQUIRE(w.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(w[i] - oracle[i]) <= 1e-15);
    }

    CHECK(run({"dist", "{not json"}).code == 2);
    CHECK(run({"dist", R"({"kind":"binomial","n":2,"p":1.5})"}).code == 2);
    CHECK(run({"dist", "/nonexistent/spec.json"}).code == 2);

    auto const dir = scratch_dir("dist");
    auto const spec = dir / "spec.json";
    std::ofstream(spec) << R"({"kind":"poisson","lambda":2})";
    auto const saved = dir / "out.json";
    REQUIRE(run({"dist", spec.string(), "--out", saved.string()}).code == 0);
    std::ifstream in(saved);
    json const back = json::parse(in);
    CHECK(back.at("kind") == "explicit");
    CHECK(back.at("family").at("kind") == "poisson");

    Run const g = run({"dist", R"({"kind":"gamma","alpha":2,"beta":1})", "--grid-nodes", "1025"});
    REQUIRE(g.code == 0);
    CHECK(json::parse(g.out).at("mean").at("value").get<double>() == doctest::Approx(2.0).epsilon(1e-6));
    std::filesystem::remove_all(dir);
}

TEST_CASE("order exit codes")
{
    std::string const bi = R"({"kind":"binomial","n":3,"p":0.4})";
    std::string const po = R"({"kind":"poisson","lambda":1.2})";
    CHECK(run({"order", bi, po}).code == 0);
    Run const back = run({"order", R"({"kind":"poisson","lambda":1})", bi});
    CHECK(back.code == 1);
    CHECK(json::parse(back.out).contains("failure_kind"));
    CHECK(run({"order", bi, bi}).code == 0);
    CHECK(run({"order", bi}).code == 2);
    Run const w = run({"order", R"({"kind":"explicit","weights":[0.4,0.2,0.4]})",
                       R"({"kind":"explicit","weights":[0.2,0.6,0.2]})"});
    CHECK(w.code == 1);
    CHECK(json::parse(w.out).at("witness_index") == 1);
}

TEST_CASE("div")
{
    std::string const f = R"({"kind":"binomial","n":4,"p":0.3})";
    CHECK(json::parse(run({"div", f, f}).out).at("value").get<double>() == doctest::Approx(0.0));
    Run const tv = run({"div", "--measure", "tv", R"({"kind":"explicit","weights":[1]})",
                        R"({"kind":"explicit","offset":1,"weights":[1]})"});
    CHECK(json::parse(tv.out).at("value").get<double>() == 1.0);
    Run const h = run({"div", "--measure", "entropy", R"({"kind":"binomial","n":1,"p":0.5})"});
    CHECK(json::parse(h.out).at("value").get<double>() == doctest::Approx(std::log(2.0)));
    CHECK(run({"div", "--measure", "entropy", f, f}).code == 2);
    CHECK(run({"div", "--measure", "l2", f, f}).code == 2);
    Run const inf = run({"div", R"({"kind":"binomial","n":3,"p":0.5})", R"({"kind":"binomial","n":2,"p":0.5})"});
    CHECK(json::parse(inf.out).at("finite") == false);
}

TEST_CASE("approx")
{
    Run const r = run({"--format", "csv", "approx", "--probs", "0.1", "0.2", "0.3", "--m-max", "8"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# lcorder-approx v1");
    std::getline(in, line);
    CHECK(line == "family,m,p,kl,kl_error");
    std::vector<double> kl;
    std::string last;
    while (std::getline(in, line)) {
        last = line;
        if (line.rfind("binomial,", 0) == 0) {
            kl.push_back(std::stod(line.substr(line.find(',', line.find(',', 9) + 1) + 1)));
        }
    }
    CHECK(kl.size() == 6);
    for (std::size_t k = 1; k < kl.size(); ++k) {
        CHECK(kl[k] >= kl[k - 1]);
    }
    CHECK(last.rfind("poisson,", 0) == 0);

    Run const eq = run({"approx", "--probs", "0.4", "0.4", "0.4"});
    REQUIRE(eq.code == 0);
    auto const t = json::parse(eq.out);
    CHECK(std::abs(t.at("rows").at(0).at("kl").at("value").get<double>()) <= 1e-14);
    CHECK(run({"approx", "--kind", "negbinomial", "--probs", "0.3", "0.6"}).code == 0);
    CHECK(run({"approx", "--probs", "0.3", "--m-max", "0.5"}).code == 2);
}

TEST_CASE("verify")
{
    Run const t = run({"--seed", "7", "--instances", "40", "verify", "triangle"});
    CHECK(t.code == 0);
    std::istringstream in(t.out);
    std::string line;
    int lines = 0;
    std::string last;
    while (std::getline(in, line)) {
        ++lines;
        last = line;
    }
    CHECK(lines == 81);
    CHECK(json::parse(last).contains("summary"));
    CHECK(run({"verify", "no-such-suite"}).code == 2);

    Run const csv = run({"--seed", "7", "--instances", "5", "--format", "csv", "verify", "karlin"});
    CHECK(csv.out.rfind("# lcorder-verdicts v1\n", 0) == 0);

    auto const dir = scratch_dir("fuzz");
    auto const summary = dir / "summary.csv";
    Run const f = run({"--instances", "300", "verify", "open-problem-fuzz", "--counterexample-dir",
                       (dir / "cx").string(), "--summary", summary.string()});
    CHECK(f.code == 0);
    std::ifstream s(summary);
    std::getline(s, line);
    CHECK(line == "# lcorder-summary v1");
    int saved = 0;
    for (auto const& entry : std::filesystem::directory_iterator(dir / "cx")) {
        Run const r = run({"replay", entry.path().string()});
        CHECK(r.code == 0);
        ++saved;
    }
    CHECK(saved > 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("replay is byte-identical and the seed comes from the environment")
{
    std::vector<std::string> const args{"--seed", "99", "--instances", "60", "verify", "quadrangle"};
    Run const a = run(args);
    Run const b = run(args);
    CHECK(a.out == b.out);
    CHECK(a.code == 0);

    std::vector<std::string> const env_args{"--instances", "20", "verify", "concave"};
    setenv("LCORDER_SEED", "99", 1);
    Run const e1 = run(env_args);
    setenv("LCORDER_SEED", "100", 1);
    Run const e2 = run(env_args);
    unsetenv("LCORDER_SEED");
    Run const flag = run({"--seed", "99", "--instances", "20", "verify", "concave"});
    CHECK(e1.out == flag.out);
    CHECK(e1.out != e2.out);
}

TEST_CASE("usage errors")
{
    CHECK(run({}).code == 2);
    CHECK(run({"--format", "xml", "dist", "{}"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}
