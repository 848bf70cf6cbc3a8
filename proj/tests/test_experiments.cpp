#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "irsim/experiments.hpp"

using namespace irsim;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    return out;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const char* name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("fig4 output lists all four schemes at every sweep point") {
    TempDir dir("irsim_test_fig4");
    RunOverrides ov;
    ov.trials = 2;
    ov.seed = 11;
    REQUIRE(run_named("fig4", SystemConfig{}, dir.path, ov) == 0);

    const auto lines = read_lines(dir.path / "fig4.csv");
    REQUIRE(lines.size() == 1 + 5 * 4);
    CHECK(lines[0] == "scheme,m_r,rate_bps_hz");
    std::set<std::pair<std::string, std::string>> seen;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i]);
        REQUIRE(f.size() == 3);
        seen.emplace(f[0], f[1]);
        CHECK(std::stod(f[2]) >= 0.0);
    }
    for (const char* scheme : {"proposed", "proposed_no_cpa", "rr", "ccce"}) {
        for (const char* m : {"10", "30", "50", "70", "90"}) {
            CHECK(seen.count({scheme, m}) == 1);
        }
    }
    CHECK(std::filesystem::file_size(dir.path / "manifest.txt") > 0);
}

TEST_CASE("fig5 output covers the full stage split for each combination") {
    TempDir dir("irsim_test_fig5");
    RunOverrides ov;
    ov.trials = 2;
    ov.seed = 12;
    REQUIRE(run_named("fig5", SystemConfig{}, dir.path, ov) == 0);

    const auto lines = read_lines(dir.path / "fig5.csv");
    REQUIRE(lines.size() == 1 + 3 * 28);  // N1 in 2..29 per combination
    CHECK(lines[0] == "m_r,pt_dbm,n1,rate_bps_hz");
    std::set<std::tuple<std::string, std::string, int>> seen;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i]);
        REQUIRE(f.size() == 4);
        const int n1 = std::stoi(f[2]);
        CHECK(n1 >= 2);
        CHECK(n1 <= 29);
        seen.emplace(f[0], f[1], n1);
    }
    CHECK(seen.size() == 3 * 28);
    for (int n1 = 2; n1 <= 29; ++n1) {
        CHECK(seen.count({"50", "31", n1}) == 1);
        CHECK(seen.count({"100", "31", n1}) == 1);
        CHECK(seen.count({"50", "41", n1}) == 1);
    }
}

TEST_CASE("fig3 trace covers one frame per scheme") {
    TempDir dir("irsim_test_fig3");
    RunOverrides ov;
    ov.trials = 3;
    ov.seed = 13;
    REQUIRE(run_named("fig3", SystemConfig{}, dir.path, ov) == 0);

    const auto trace = read_lines(dir.path / "fig3b.csv");
    REQUIRE(trace.size() == 1 + 2 * 30);
    CHECK(trace[0] == "scheme,block_index,snr_db");

    const auto cdf = read_lines(dir.path / "fig3a.csv");
    // 3 trials x 25 pooled blocks per scheme
    REQUIRE(cdf.size() == 1 + 2 * 3 * 25);
    // cdf column is nondecreasing within each scheme
    double prev = 0.0;
    std::string prev_scheme;
    for (size_t i = 1; i < cdf.size(); ++i) {
        const auto f = split(cdf[i]);
        REQUIRE(f.size() == 3);
        if (f[0] != prev_scheme) {
            prev_scheme = f[0];
            prev = 0.0;
        }
        const double p = std::stod(f[2]);
        CHECK(p >= prev);
        prev = p;
    }

    // unknown experiment name is rejected
    CHECK(run_named("fig9", SystemConfig{}, dir.path, ov) != 0);
}
