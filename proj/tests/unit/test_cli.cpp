#include "fifth/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fifth;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / ("fifth-cli-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A small training split: the first few corpus CSPs.
fs::path small_split(const std::string& name, int count)
{
    fs::path dir = scratch(name);
    auto files = program_files(corpus_root() / "csp/train");
    REQUIRE(files.size() >= static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) fs::copy_file(files[static_cast<std::size_t>(i)], dir / files[static_cast<std::size_t>(i)].filename());
    return dir;
}

}  // namespace

TEST_CASE("solve examples")
{
    auto r = run({"solve", (corpus_root() / "queens/q4.5th").string()});
    CHECK(r.code == kExitOk);
    auto j = json::parse(r.out);
    CHECK(j["solutions"].size() == 2);
    CHECK(j["stats"]["complete"] == true);

    auto missing = run({"solve", "/nonexistent/missing.5th"});
    CHECK(missing.code == kExitUsage);
    CHECK(missing.out.empty());
    CHECK(!missing.err.empty());

    auto starved = run({"solve", (corpus_root() / "queens/q6.5th").string(), "--steps", "0"});
    CHECK(starved.code == kExitIncomplete);
    CHECK(json::parse(starved.out)["stats"]["steps"] == 0);
}

TEST_CASE("solve exit codes for unsat, parse errors and usage")
{
    fs::path dir = scratch("codes");
    std::ofstream(dir / "unsat.5th") << "(def (main x) (choose x 1 2) (const y 3) (equal x y))\n(query (main) (show x))\n";
    std::ofstream(dir / "broken.5th") << "(def (main x) (choose x 1 2)\n";
    CHECK(run({"solve", (dir / "unsat.5th").string()}).code == kExitUnsatisfiable);
    auto broken = run({"solve", (dir / "broken.5th").string()});
    CHECK(broken.code == kExitUsage);
    CHECK(broken.err.find("parse error") != std::string::npos);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"solve"}).code == kExitUsage);
    CHECK(run({"optimize", (corpus_root() / "queens/q4.5th").string()}).code == kExitUsage);
    CHECK(run({"solve", (corpus_root() / "queens/q4.5th").string(), "--oracle", "learned"}).code == kExitUsage);
}

TEST_CASE("optimize report and out file")
{
    fs::path dir = scratch("optimize");
    auto r = run({"optimize", (corpus_root() / "jobshop/js-2x1.5th").string(), "--out", (dir / "r.json").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.empty());
    auto j = json::parse(slurp(dir / "r.json"));
    CHECK(j["objective"] == 7);
    CHECK(j["stats"]["proven_optimal"] == true);
    CHECK(!j["bound_trace"].empty());
}

TEST_CASE("solve --trace includes frame and spine structure")
{
    auto r = run({"solve", (corpus_root() / "fact/fact6.5th").string(), "--trace"});
    REQUIRE(r.code == kExitOk);
    auto j = json::parse(r.out);
    int expanded = 0;
    for (const auto& f : j["trace"]["frames"]) expanded += f["state"] == "expanded";
    CHECK(expanded == 7);
    CHECK(!j["trace"]["spines"].empty());
}

TEST_CASE("train examples")
{
    fs::path empty = scratch("empty");
    fs::path model = scratch("model-empty");
    auto none = run({"train", empty.string(), "--model", model.string()});
    CHECK(none.code == kExitUsage);
    CHECK(none.err.find("no instances") != std::string::npos);

    fs::path split = small_split("train-small", 4);
    fs::path m1 = scratch("model-1"), m2 = scratch("model-2");
    auto a = run({"train", split.string(), "--model", m1.string(), "--seed", "5"});
    auto b = run({"train", split.string(), "--model", m2.string(), "--seed", "5"});
    REQUIRE(a.code == kExitOk);
    REQUIRE(b.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK(slurp(m1 / "manifest.json") == slurp(m2 / "manifest.json"));
    for (const auto& e : fs::directory_iterator(m1)) CHECK(slurp(e.path()) == slurp(m2 / e.path().filename()));

    auto report = json::parse(a.out);
    CHECK(report["instances"] == 4);
    REQUIRE(!report["encoders"].empty());
    for (const auto& e : report["encoders"]) CHECK(std::isfinite(e["final_loss"].get<double>()));

    CHECK(run({"train", split.string()}).code == kExitUsage);
}

TEST_CASE("measure examples")
{
    fs::path split = small_split("measure-small", 3);
    auto same = run({"measure", split.string(), split.string(), "--oracle", "uniform"});
    REQUIRE(same.code == kExitOk);
    auto j = json::parse(same.out);
    for (const auto& row : j["instances"]) {
        CHECK(row["nodes_uniform"] == row["nodes_learned"]);
        CHECK(row["solutions_equal"] == true);
    }

    fs::path model = scratch("measure-model");
    REQUIRE(run({"train", split.string(), "--model", model.string()}).code == kExitOk);
    auto learned = run({"measure", split.string(), split.string(), "--model", model.string()});
    CHECK(learned.code == kExitOk);
    auto k = json::parse(learned.out);
    CHECK(k["oracle"] == "learned");
    CHECK(k["aggregate"]["all_solutions_equal"] == true);
    CHECK(std::isfinite(k["aggregate"]["median_nodes_learned"].get<double>()));

    CHECK(run({"measure", split.string(), split.string(), "--model", "/nonexistent/model"}).code == kExitUsage);
}

TEST_CASE("check examples")
{
    auto ok = run({"check", "--self-test"});
    CHECK(ok.code == kExitOk);
    for (const char* suite : {"lattice-laws", "confluence", "gradient-check"}) CHECK(ok.out.find(suite) != std::string::npos);
    auto broken = run({"check", "--self-test", "--inject-merge-fault"});
    CHECK(broken.code != kExitOk);
    CHECK(broken.out.find("FAIL") != std::string::npos);
    CHECK(run({"check"}).code == kExitUsage);
}
