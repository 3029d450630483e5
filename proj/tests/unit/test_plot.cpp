#include "daqd/loop.hpp"
#include "daqd/plot.hpp"

#include "../support/tmpdir.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace daqd;
namespace fs = std::filesystem;

namespace {

fs::path write_run(const fs::path& dir, std::size_t size_at_100)
{
    fs::create_directories(dir);
    const fs::path p = dir / "metrics.csv";
    MetricsLog log(p);
    log.append(MetricsRow{0, 0, 0.0});
    log.append(MetricsRow{100, size_at_100, -static_cast<double>(size_at_100)});
    return p;
}

std::size_t count(const std::string& text, const std::string& part)
{
    std::size_t n = 0;
    for (auto pos = text.find(part); pos != std::string::npos; pos = text.find(part, pos + 1))
        ++n;
    return n;
}

} // namespace

TEST_CASE("quantile")
{
    CHECK(quantile({3.0}, 0.25) == 3.0);
    CHECK(quantile({4, 1, 3, 2}, 0.5) == 2.5);
    CHECK(quantile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.25) == doctest::Approx(3.25));
    CHECK(quantile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.75) == doctest::Approx(7.75));
    CHECK_THROWS_AS(quantile({}, 0.5), DimensionError);
}

TEST_CASE("summaries and bands")
{
    testing_util::TempDir tmp("plot");
    std::vector<fs::path> csvs;
    for (std::size_t i = 0; i < 10; ++i)
        csvs.push_back(write_run(tmp / "daqd" / ("rep_" + std::to_string(i)), i + 1));
    csvs.push_back(write_run(tmp / "qd" / "rep_0", 4));
    csvs.push_back(write_run(tmp / "qd" / "rep_1", 6));

    const auto s = summarize_metrics(csvs, "repertoire_size");
    REQUIRE(s.size() == 2);
    CHECK(s[0].label == "daqd");
    CHECK(s[0].replications == 10);
    CHECK(s[0].x == std::vector<double>{0, 100});
    CHECK(s[0].median[1] == doctest::Approx(5.5));
    CHECK(s[0].q25[1] == doctest::Approx(3.25));
    CHECK(s[0].q75[1] == doctest::Approx(7.75));
    CHECK(s[0].has_band());
    CHECK_FALSE(s[1].has_band());
    CHECK(s[1].median[1] == doctest::Approx(5.0));

    const std::string svg = render_svg(s, "repertoire_size");
    CHECK(count(svg, "class=\"iqr\"") == 1);
    CHECK(count(svg, "class=\"median\"") == 2);

    const auto files = plot_metrics(csvs, tmp / "plots");
    CHECK(files.size() == 2);
    for (const auto& f : files)
        CHECK(fs::file_size(f) > 0);
    CHECK_THROWS_AS(summarize_metrics(csvs, "wall_time"), ConfigError);
}

TEST_CASE("plot input errors")
{
    testing_util::TempDir tmp("plotbad");
    CHECK_THROWS_AS(summarize_metrics({}, "qd_score"), ConfigError);
    std::ofstream(tmp / "empty.csv") << kMetricsHeader << "\n";
    CHECK_THROWS_AS(summarize_metrics({tmp / "empty.csv"}, "qd_score"), ParseError);
    std::ofstream(tmp / "old.csv") << "evals_used,repertoire_size,qd_score\n1,2,3\n";
    try {
        summarize_metrics({tmp / "old.csv"}, "qd_score");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("imagined_size") != std::string::npos);
    }
}
