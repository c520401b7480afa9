#include "lergo/cli.hpp"
#include "lergo/ergotropy.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lergo;
using namespace lergo::cli;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "lergo");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

RunConfig parse(std::vector<std::string> args)
{
    args.insert(args.begin(), "lergo");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return parse_command_line(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ','))
            cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content)
{
    const auto p = std::filesystem::temp_directory_path() / ("lergo_test_" + name);
    std::ofstream(p) << content;
    return p;
}

double num(const json& v) { return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>(); }

} // namespace

TEST_CASE("number formatting")
{
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-0.5) == "-0.5");
    CHECK(format_number(0.1 + 0.2) == "0.3");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
    CHECK(format_number(1e-20) == "1e-20");
    CHECK(format_number(INFINITY) == "inf");
    CHECK(format_number(0.0) == "0");
}

TEST_CASE("ranges")
{
    const auto r = Range::parse("-1.3:-1.2:0.05");
    const auto v = r.values();
    REQUIRE(v.size() == 3);
    CHECK(v[2] == doctest::Approx(-1.2));
    CHECK(Range::parse("0.5").values().size() == 1);
    CHECK_THROWS_AS(Range::parse("1:0:0.1"), ConfigError);
    CHECK_THROWS_AS(Range::parse("0:1:0"), ConfigError);
    CHECK_THROWS_AS(Range::parse("0:1"), ConfigError);
    CHECK_THROWS_AS(Range::parse("a:1:0.1"), ConfigError);
}

TEST_CASE("configuration layering")
{
    const auto cfg_path = temp_file("cfg.json", R"({"L": 9, "J": -1, "Delta": 0.25, "ell": 2, "alpha": "inf", "format": "json"})");

    SUBCASE("file over defaults")
    {
        const auto cfg = parse({"distribution", "--config", cfg_path.string()});
        CHECK(cfg.sites() == 9);
        CHECK(cfg.J == -1.0);
        CHECK(std::isinf(*cfg.alpha));
        CHECK(cfg.format == Format::Json);
        CHECK(std::get<CurrentSpec>(*cfg.state).ell == 2);
        CHECK(cfg.ring().is_nearest_neighbor());
        CHECK(coupling_table(cfg.ring(), 0.0).nearest() == -1.0);
    }
    SUBCASE("flags over file, state replaced as a whole")
    {
        const auto cfg = parse({"distribution", "--config", cfg_path.string(), "--L", "7", "--Delta", "-2", "--bell", "1,3",
                                "--format", "csv"});
        CHECK(cfg.sites() == 7);
        CHECK(cfg.Delta == -2.0);
        CHECK(cfg.format == Format::Csv);
        CHECK(std::holds_alternative<BellSpec>(*cfg.state));
        CHECK(cfg.J == -1.0);
    }
    SUBCASE("power law defaults g to J/2")
    {
        const auto cfg = parse({"distribution", "--ell", "1", "--alpha", "3", "--J", "0.8"});
        const auto t = coupling_table(cfg.ring(), 0.0);
        CHECK(t.nearest() == doctest::Approx(0.8).epsilon(1e-14));
        CHECK_FALSE(t.nearest_only());
    }
    SUBCASE("invalid configurations")
    {
        CHECK_THROWS_AS(parse({"distribution"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--ell", "1", "--l1", "1", "--l2", "2"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--l1", "1"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--l1", "1", "--l2", "12"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--bell", "2,2"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--ell", "1", "--L", "2"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--ell", "1", "--g", "0.5"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--ell", "1", "--alpha", "-1"}), ConfigError);
        CHECK_THROWS_AS(parse({"sweep", "--ell", "1"}), ConfigError);
        CHECK_THROWS_AS(parse({"sweep", "--ell", "1", "--Delta-range", "0:1:0.5", "--components"}), ConfigError);
        CHECK_THROWS_AS(parse({"dynamics", "--ell", "1"}), ConfigError);
        CHECK_THROWS_AS(parse({"frobnicate", "--ell", "1"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--ell", "x"}), ConfigError);
        CHECK_THROWS_AS(parse({"distribution", "--ell", "1", "--S", "12"}), ConfigError);
        const auto bad = temp_file("bad.json", R"({"Lx": 3})");
        CHECK_THROWS_AS(parse({"distribution", "--config", bad.string(), "--ell", "1"}), ConfigError);
    }
}

TEST_CASE("exit codes")
{
    CHECK(run({"distribution"}).code == 1);
    CHECK(run({"distribution", "--no-such-flag"}).code == 1);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"verify", "--L", "15"}).code == 3);
    CHECK(run({"distribution", "--ell", "1"}).code == 0);
}

TEST_CASE("amplitude files")
{
    const auto path = temp_file("amp.txt", "# f_j\n1 0\n0 1\n1 0\n\n0 -1\n0.5 0.5\n");
    const auto r = run({"distribution", "--amplitudes", path.string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("normalized") != std::string::npos);
    const auto rows = csv_rows(r.out);
    CHECK(rows.size() == 6);
    double total = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        total += std::stod(rows[i][9]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    const auto exact = temp_file("amp_exact.txt", "1 0\n0 0\n0 0\n");
    CHECK(run({"distribution", "--amplitudes", exact.string()}).err.empty());
    CHECK(run({"distribution", "--amplitudes", exact.string(), "--L", "4"}).code == 1);
    const auto broken = temp_file("amp_broken.txt", "1 0 3\n");
    CHECK(run({"distribution", "--amplitudes", broken.string()}).code == 1);
}

TEST_CASE("distribution")
{
    SUBCASE("reference row at S = L")
    {
        const auto rows = csv_rows(run({"distribution", "--l1", "1", "--l2", "2", "--Delta", "0"}).out);
        REQUIRE(rows.size() == 12);
        CHECK(rows[0][1] == "le");
        CHECK(rows[11][0] == "11");
        CHECK(std::stod(rows[11][1]) == doctest::Approx(1.8279).epsilon(1e-4));
    }
    SUBCASE("single current is homogeneous")
    {
        const auto rows = csv_rows(run({"distribution", "--ell", "2", "--Delta", "-0.3"}).out);
        for (std::size_t i = 2; i < rows.size(); ++i)
            CHECK(rows[i][1] == rows[1][1]);
    }
    SUBCASE("X-optimal tags follow the branch ratio")
    {
        const auto rows = csv_rows(run({"distribution", "--l1", "1", "--l2", "2", "--Delta", "-0.6"}).out);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double g = std::stod(rows[i][3]);
            CHECK((rows[i][11] == "X") == (0.6 > g));
        }
        CHECK(rows[11][11] != "X");
        CHECK(rows[1][11] != "X");
        CHECK(rows[10][11] != "X");
    }
}

TEST_CASE("sweep")
{
    SUBCASE("superposition against its components at Delta = 0")
    {
        const auto rows = csv_rows(
            run({"sweep", "--l1", "1", "--l2", "2", "--Delta-range", "-0.2:0:0.1", "--components"}).out);
        REQUIRE(rows.size() == 10);
        double sup = 0.0, parts = 0.0;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i][1] == "0")
                (rows[i][0] == "superposition" ? sup : parts) += std::stod(rows[i][3]);
        CHECK(std::abs(sup - parts) < 1e-12);
        CHECK(rows[1][0] == "superposition");
        CHECK(rows[4][0] == "l=1");
        CHECK(rows[7][0] == "l=2");
    }
    SUBCASE("convexity sign change near the shape threshold")
    {
        const auto r = run({"sweep", "--l1", "1", "--l2", "2", "--Delta-range", "-2:0:0.01", "--format", "json"});
        const auto j = json::parse(r.out);
        const auto& ch = j["report"]["convexity_sign_changes"];
        REQUIRE(ch.size() >= 1);
        bool found = false;
        for (const auto& c : ch) {
            const double lo = std::min(num(c["abs_Delta_over_J"][0]), num(c["abs_Delta_over_J"][1]));
            const double hi = std::max(num(c["abs_Delta_over_J"][0]), num(c["abs_Delta_over_J"][1]));
            found = found || (lo <= 1.257 + 0.01 && hi >= 1.257 - 0.01);
        }
        CHECK(found);
        CHECK(j["report"]["S"] == 11);
    }
    SUBCASE("J < 0 at Delta = 0")
    {
        const auto rows = csv_rows(
            run({"sweep", "--l1", "1", "--l2", "2", "--J-range", "-1:-1:1", "--Delta", "0", "--components"}).out);
        REQUIRE(rows.size() == 4);
        CHECK(std::stod(rows[2][3]) == 0.0);
        CHECK(std::stod(rows[3][3]) == 0.0);
        // the superposition vanishes only at S = L; 4/L (root - hop) elsewhere
        CHECK(std::stod(rows[1][3]) == doctest::Approx(0.0386758).epsilon(1e-6));
    }
}

TEST_CASE("dynamics")
{
    SUBCASE("Bell profile at t = 0")
    {
        const auto rows = csv_rows(run({"dynamics", "--bell", "1,11", "--Delta", "-0.5", "--t-max", "0.1", "--dt", "0.05"}).out);
        REQUIRE(rows.size() == 1 + 3 * 11);
        for (int S = 1; S <= 11; ++S)
            CHECK(std::stod(rows[static_cast<std::size_t>(S)][2]) == doctest::Approx(S == 1 || S == 11 ? 4.0 : 1.0));
    }
    SUBCASE("two-current drift stays at rounding level")
    {
        const auto r = run({"dynamics", "--l1", "1", "--l2", "2", "--Delta", "-0.3", "--t-max", "4", "--dt", "0.05",
                            "--format", "json"});
        const auto j = json::parse(r.out);
        for (const auto& row : j["rows"]) {
            CHECK(row["drift_applicable"] == 1);
            CHECK(num(row["drift"]) < 1e-8);
        }
        CHECK(j["report"]["two_current"] == true);
        CHECK(num(j["report"]["omega"]) == doctest::Approx(1.703354).epsilon(1e-6));
    }
    SUBCASE("dipolar ring oscillates faster at site 1")
    {
        auto period = [](const std::string& alpha) {
            const auto r = run({"dynamics", "--l1", "1", "--l2", "2", "--alpha", alpha, "--t-max", "12", "--dt", "0.01",
                                "--format", "json"});
            return num(json::parse(r.out)["report"]["period"]);
        };
        CHECK(period("3") < period("inf"));
    }
}

TEST_CASE("reproducible and consistent encodings")
{
    const std::vector<std::string> base{"sweep", "--l1", "1", "--l2", "2", "--phi21", "0.3", "--Delta-range", "-1:0:0.25",
                                        "--J-range", "-1:1:1", "--alpha", "3"};
    const auto a = run(base);
    const auto b = run(base);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    auto json_args = base;
    json_args.insert(json_args.end(), {"--format", "json"});
    const auto j = json::parse(run(json_args).out);
    const auto rows = csv_rows(a.out);
    REQUIRE(j["rows"].size() + 1 == rows.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& jr = j["rows"][i - 1];
        for (std::size_t c = 0; c < rows[0].size(); ++c) {
            const auto& v = jr[rows[0][c]];
            std::string text;
            if (v.is_string())
                text = v.get<std::string>();
            else if (v.is_number_integer())
                text = std::to_string(v.get<long long>());
            else
                text = format_number(v.get<double>());
            CHECK(text == rows[i][c]);
        }
    }

    SUBCASE("output file")
    {
        const auto p = std::filesystem::temp_directory_path() / "lergo_test_out.csv";
        auto args = base;
        args.insert(args.end(), {"--output", p.string()});
        CHECK(run(args).out.empty());
        std::ifstream in(p);
        const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        CHECK(content == a.out);
    }
}

TEST_CASE("verify command")
{
    const auto r = run({"verify", "--samples", "2", "--L", "5", "--format", "json"});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["rows"].size() == 9);
    CHECK(j["report"]["all_passed"] == true);
}
