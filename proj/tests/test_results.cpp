#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"

#include "ltesim/error.hpp"
#include "ltesim/results.hpp"
#include "ltesim/rng.hpp"
#include "oracles.hpp"

using namespace ltesim;
using namespace ltesim::sim;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ResultTable sample_table()
{
    ResultTable t("demo", "k");
    t.add(10.0, "tput.a", std::vector<double>{1.0, 2.0, 4.0});
    t.add({2.0, "tput.b", 0.1, 0.0, 1});
    t.add({2.0, "jain", 1.0 / 3.0, 1e-17, 12});
    t.add({10.0, "jain", -2.5e-300, 0.0, 7});
    return t;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("ltesim_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("summaries", "[results]")
{
    const std::vector<double> one{3.0};
    const ResultRow r1 = summarize(0.0, "x", one);
    CHECK(r1.mean == 3.0);
    CHECK(r1.std_error == 0.0);
    CHECK(r1.n == 1);

    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    const ResultRow r = summarize(0.0, "x", s);
    CHECK(r.mean == 2.5);
    CHECK(r.std_error == Catch::Approx(std::sqrt(oracle::variance(s) / 4.0)));

    // Standard error falls like 1/sqrt(n) for i.i.d. samples.
    RngStream rng = RngStream::derive(1, 0, StreamPurpose::Test);
    std::vector<double> small(2500);
    std::vector<double> large(40000);
    for (double& x : small) x = rng.normal();
    for (double& x : large) x = rng.normal();
    const double ratio = summarize(0, "x", large).std_error / summarize(0, "x", small).std_error;
    CHECK(ratio == Catch::Approx(0.25).epsilon(0.05));
    CHECK_THROWS_AS(summarize(0.0, "x", std::vector<double>{}), InvalidParameter);
}

TEST_CASE("result table ordering and lookup", "[results]")
{
    const ResultTable t = sample_table();
    REQUIRE(t.rows().size() == 4);
    CHECK(t.rows()[0].sweep_value == 2.0);
    CHECK(t.rows()[0].metric == "jain");
    CHECK(t.sweep_values() == std::vector<double>{2.0, 10.0});
    CHECK(t.metrics() == std::vector<std::string>{"jain", "tput.a", "tput.b"});
    CHECK(t.at(10.0, "tput.a").n == 3);
    CHECK(t.find(2.0, "tput.a") == nullptr);
    CHECK_THROWS_AS(t.at(3.0, "jain"), OutOfRange);

    ResultTable dup = sample_table();
    CHECK_THROWS_AS(dup.add({2.0, "jain", 0.0, 0.0, 1}), InvalidParameter);
    CHECK_THROWS_AS(dup.add({2.0, "bad,name", 0.0, 0.0, 1}), InvalidParameter);
}

TEST_CASE("CSV round trip", "[results]")
{
    const ResultTable t = sample_table();
    std::ostringstream out;
    write_csv(out, t);
    const std::string text = out.str();
    CHECK(text.rfind("sweep_var,sweep_value,metric,mean,stderr,n\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    std::istringstream in(text);
    CHECK(parse_csv(in, "demo") == t);

    std::ostringstream empty;
    write_csv(empty, ResultTable("none", "k"));
    CHECK(empty.str() == "sweep_var,sweep_value,metric,mean,stderr,n\n");

    std::istringstream bad("wrong header\n");
    CHECK_THROWS_AS(parse_csv(bad), InvalidParameter);
    std::istringstream short_row("sweep_var,sweep_value,metric,mean,stderr,n\nk,1,x,2\n");
    CHECK_THROWS_AS(parse_csv(short_row), InvalidParameter);
}

TEST_CASE("emitted files", "[results]")
{
    const auto dir = scratch("emit");
    const ResultTable t = sample_table();
    const EmittedFiles files = emit_results(t, dir);
    CHECK(files.csv == dir / "demo.csv");
    CHECK(files.plot == dir / "demo.gp");
    const std::string csv = slurp(files.csv);
    std::istringstream in(csv);
    CHECK(parse_csv(in, "demo") == t);
    const std::string gp = slurp(files.plot);
    CHECK(gp.find("'demo.csv'") != std::string::npos);
    CHECK(gp.find(dir.string()) == std::string::npos);

    emit_results(t, dir);
    CHECK(slurp(files.csv) == csv);
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        CHECK((entry.path().extension() == ".csv" || entry.path().extension() == ".gp"));

    // A regular file where the directory should be.
    const auto blocker = dir / "blocker";
    std::ofstream(blocker) << "x";
    try {
        emit_results(t, blocker / "sub");
        FAIL("writing below a file succeeded");
    } catch (const IoError& e) {
        CHECK(e.path().find("blocker") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
