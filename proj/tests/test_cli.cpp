// Exercises the built CLI binary end to end. The test runner exports
// FAIRLAUNCH_CLI with the binary's path.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("FAIRLAUNCH_CLI");
    REQUIRE(env != nullptr);
    REQUIRE(fs::exists(env));
    return env;
}

int run_cli(const std::string& args) {
    const std::string command = cli_path() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const std::string kSmallRun =
    " --scenario bentham --preset high --synthetic --replicates 2"
    " --n-initial 120 --entrant-scale 60 --t-end 75";

} // namespace

TEST_CASE("simulate writes the full results directory", "[cli]") {
    const fs::path dir = fs::temp_directory_path() / "fl_cli_smoke";
    fs::remove_all(dir);
    REQUIRE(run_cli("simulate" + kSmallRun + " --seed 7 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "config.json"));
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "ensemble.csv"));
    CHECK(fs::exists(dir / "whales_final.csv"));

    // ensemble covers the pre row plus one row per day
    std::ifstream in(dir / "ensemble.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 1 + 1 + (75 - 45 + 1));  // header + pre + days

    const std::string config = slurp(dir / "config.json");
    CHECK(config.find("philox4x64-10") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("simulate without market data exits with usage error", "[cli]") {
    CHECK(run_cli("simulate --scenario bentham --replicates 1 --n-initial 50") == 1);
}

TEST_CASE("missing market file is a data error", "[cli]") {
    CHECK(run_cli("simulate --market-data /nonexistent.csv --replicates 1"
                  " --n-initial 50 --t-end 50") == 2);
}

TEST_CASE("same seed twice produces byte-identical outputs", "[cli]") {
    const fs::path dir_a = fs::temp_directory_path() / "fl_cli_det_a";
    const fs::path dir_b = fs::temp_directory_path() / "fl_cli_det_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    REQUIRE(run_cli("simulate" + kSmallRun + " --seed 9 --workers 1 --out " +
                    dir_a.string()) == 0);
    REQUIRE(run_cli("simulate" + kSmallRun + " --seed 9 --workers 4 --out " +
                    dir_b.string()) == 0);
    CHECK(slurp(dir_a / "metrics.csv") == slurp(dir_b / "metrics.csv"));
    CHECK(slurp(dir_a / "ensemble.csv") == slurp(dir_b / "ensemble.csv"));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("synth-data emits a loadable market csv", "[cli]") {
    const fs::path out = fs::temp_directory_path() / "fl_cli_synth.csv";
    fs::remove(out);
    REQUIRE(run_cli("synth-data --seed 4 --days 40 --out " + out.string()) == 0);
    REQUIRE(fs::exists(out));
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "date,price_usd,fgi");
    fs::remove(out);
}

TEST_CASE("plot-data produces panels with a reference overlay", "[cli]") {
    const fs::path dir = fs::temp_directory_path() / "fl_cli_plot";
    fs::remove_all(dir);
    REQUIRE(run_cli("simulate" + kSmallRun + " --seed 3 --out " + dir.string()) == 0);

    const fs::path ref = fs::temp_directory_path() / "fl_cli_plot_ref.csv";
    {
        std::ofstream out(ref);
        out << "t,gini\n46,0.25\n47,0.5\n";
    }
    REQUIRE(run_cli("plot-data --run " + dir.string() + " --reference " + ref.string()) == 0);
    REQUIRE(fs::exists(dir / "gini_panel.csv"));
    REQUIRE(fs::exists(dir / "nse_panel.csv"));

    const std::string panel = slurp(dir / "gini_panel.csv");
    CHECK(panel.find("47,") != std::string::npos);
    CHECK(panel.find("0.5") != std::string::npos);
    CHECK(panel.find("_pre") == std::string::npos);
    {
        std::ifstream count_in(dir / "gini_panel.csv");
        std::string row;
        int panel_rows = 0;
        while (std::getline(count_in, row)) ++panel_rows;
        CHECK(panel_rows == 1 + (75 - 45 + 1));  // header + one row per day
    }

    // without a reference the overlay column stays empty
    REQUIRE(run_cli("plot-data --run " + dir.string()) == 0);
    std::ifstream in(dir / "gini_panel.csv");
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);
    CHECK(line.back() == ',');
    fs::remove(ref);
    fs::remove_all(dir);
}

TEST_CASE("record-fills emits per-day fill logs", "[cli]") {
    const fs::path dir = fs::temp_directory_path() / "fl_cli_fills";
    fs::remove_all(dir);
    REQUIRE(run_cli("simulate" + kSmallRun + " --seed 2 --record-fills --out " +
                    dir.string()) == 0);
    bool any_fill_log = false;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("fills_", 0) == 0) {
            any_fill_log = true;
            std::ifstream in(entry.path());
            std::string header;
            std::getline(in, header);
            CHECK(header == "t,buyer,seller,tokens,fiat,price");
            break;
        }
    }
    CHECK(any_fill_log);
    fs::remove_all(dir);
}

TEST_CASE("table-whales runs the matrix and is self-consistent", "[cli]") {
    const fs::path root = fs::temp_directory_path() / "fl_cli_whales";
    fs::remove_all(root);
    REQUIRE(run_cli("table-whales --run-matrix --synthetic --replicates 2"
                    " --n-initial 100 --entrant-scale 80 --t-end 65 --seed 5 --out " +
                    root.string()) == 0);
    std::ifstream in(root / "whale_table.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "scenario,preset,percentage,whales_mean,agents_mean");
    int rows = 0;
    while (std::getline(in, line)) {
        const auto fields = [&] {
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string tok;
            while (std::getline(ss, tok, ',')) f.push_back(tok);
            return f;
        }();
        REQUIRE(fields.size() == 5);
        const double pct = std::stod(fields[2]);
        const double k = std::stod(fields[3]);
        const double n = std::stod(fields[4]);
        CHECK(std::abs(pct - k / n * 100.0) < 0.01);  // percentage == k/N_A
        ++rows;
    }
    CHECK(rows == 9);

    // aggregation from the written runs reproduces the table
    REQUIRE(run_cli("table-whales --root " + root.string() + " --t-end 65") == 0);
    fs::remove_all(root);
}

TEST_CASE("validate-event and validate-sensitivity run against a reference file",
          "[cli]") {
    const fs::path ref = fs::temp_directory_path() / "fl_cli_val_ref.csv";
    {
        std::ofstream out(ref);
        out << "t,gini,one_minus_nse,whale_share,n_holders\n";
        for (int t = 45; t <= 70; ++t) {
            out << t << ",0.5,0.2,0.3,100\n";
        }
    }
    const fs::path dir = fs::temp_directory_path() / "fl_cli_val";
    fs::remove_all(dir);
    REQUIRE(run_cli("validate-event --synthetic --replicates 2 --n-initial 100"
                    " --entrant-scale 80 --t-end 70 --seed 6 --reference " +
                    ref.string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "event_validity.csv"));
    fs::remove_all(dir);

    REQUIRE(run_cli("validate-sensitivity --synthetic --replicates 2 --n-initial 100"
                    " --entrant-scale 80 --t-end 70 --seed 6 --dh-shares 0.1,0.3"
                    " --reference " + ref.string() + " --out " + dir.string()) == 0);
    std::ifstream in(dir / "sensitivity.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);  // header + two shares
    fs::remove(ref);
    fs::remove_all(dir);
}

TEST_CASE("calibrate writes the cell table and best cell", "[cli]") {
    const fs::path ref = fs::temp_directory_path() / "fl_cli_cal_ref.csv";
    {
        std::ofstream out(ref);
        out << "t,gini\n50,0.2\n55,0.3\n60,0.35\n";
    }
    const fs::path dir = fs::temp_directory_path() / "fl_cli_cal";
    fs::remove_all(dir);
    REQUIRE(run_cli("calibrate --synthetic --n-initial 100 --entrant-scale 80"
                    " --t-end 65 --seed 12 --cell-replicates 2 --refine"
                    " --p-dh-buy-values 0.3,0.7 --reference " +
                    ref.string() + " --out " + dir.string()) == 0);
    REQUIRE(fs::exists(dir / "calibration_table.csv"));
    REQUIRE(fs::exists(dir / "best.json"));
    std::ifstream in(dir / "calibration_table.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows > 3);  // header + two coarse cells + refinement cells
    const std::string best = slurp(dir / "best.json");
    CHECK(best.find("\"p_dh_buy\"") != std::string::npos);
    fs::remove(ref);
    fs::remove_all(dir);
}

TEST_CASE("experiment presets bind scenario and horizon", "[cli]") {
    const fs::path dir = fs::temp_directory_path() / "fl_cli_exp";
    fs::remove_all(dir);
    REQUIRE(run_cli("simulate --experiment bentham-extension --synthetic --replicates 1"
                    " --n-initial 80 --entrant-scale 100 --seed 4 --t-end 80 --out " +
                    dir.string()) == 0);
    const std::string echo = slurp(dir / "config.json");
    CHECK(echo.find("\"kind\": \"bentham\"") != std::string::npos);
    CHECK(echo.find("\"t_end\": 80") != std::string::npos);  // explicit flag wins
    CHECK(echo.find("\"p_t_fgi_n\": 0.8") != std::string::npos);  // high preset
    fs::remove_all(dir);

    CHECK(run_cli("simulate --experiment nonsense --synthetic --replicates 1") == 1);
}

TEST_CASE("results root env var places runs without --out", "[cli]") {
    const fs::path root = fs::temp_directory_path() / "fl_cli_envroot";
    fs::remove_all(root);
    const std::string command = "FAIRLAUNCH_RESULTS_DIR=" + root.string() + " " +
                                cli_path() + " simulate" + kSmallRun +
                                " --seed 13 >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(command.c_str())) == 0);
    CHECK(fs::exists(root / "bentham_high_s13" / "ensemble.csv"));
    fs::remove_all(root);
}

TEST_CASE("help succeeds for every subcommand", "[cli]") {
    const std::string cli = cli_path();
    for (const char* sub : {"simulate", "calibrate", "validate-event",
                            "validate-sensitivity", "table-whales", "plot-data",
                            "synth-data"}) {
        const std::string command = cli + " " + sub + " --help >/dev/null 2>&1";
        CHECK(WEXITSTATUS(std::system(command.c_str())) == 0);
    }
}

TEST_CASE("config file composes with flags, flags winning", "[cli]") {
    const fs::path cfg = fs::temp_directory_path() / "fl_cli_cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"seed": 5, "t_end": 75, "population": {"n_initial": 120},)"
            << R"( "entrants": {"scale_divisor": 60.0}})";
    }
    const fs::path dir = fs::temp_directory_path() / "fl_cli_cfgrun";
    fs::remove_all(dir);
    REQUIRE(run_cli("simulate --config " + cfg.string() +
                    " --scenario rawls --synthetic --replicates 1 --seed 8 --out " +
                    dir.string()) == 0);
    const std::string echo = slurp(dir / "config.json");
    CHECK(echo.find("\"seed\": 8") != std::string::npos);       // flag wins
    CHECK(echo.find("\"t_end\": 75") != std::string::npos);     // file value kept
    CHECK(echo.find("\"kind\": \"rawls\"") != std::string::npos);
    fs::remove(cfg);
    fs::remove_all(dir);
}
