// Exercises the installed CLI binary end to end via std::system. The binary
// path arrives in the SDSEQ_CLI environment variable (set by CTest).

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("SDSEQ_CLI");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    const auto dir = fs::temp_directory_path() / "sdseq_cli_test";
    fs::create_directories(dir);
    const auto out_path = dir / "stdout.txt";
    const auto err_path = dir / "stderr.txt";
    const std::string cmd = cli_path() + " " + args + " >" + out_path.string() + " 2>" +
                            err_path.string();
    const int status = std::system(cmd.c_str());
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const auto dir = fs::temp_directory_path() / "sdseq_cli_test";
    fs::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p) << content;
    return p;
}

} // namespace

TEST_CASE("run: three-row CSV produces three records") {
    const auto csv = write_file("three.csv", "x,y\n0.1,0.9\n0.2,0.8\n0.3,0.7\n");
    const auto r = run_cli("run --order fsd --variant gro --input " + csv.string());
    REQUIRE(r.exit_code == 0);
    int lines = 0;
    std::istringstream ss(r.out);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        ++lines;
        CHECK(line.rfind("{\"t\":", 0) == 0);
        CHECK(line.find("\"log_e_value\":") != std::string::npos);
        CHECK(line.find("\"rejected\":") != std::string::npos);
        CHECK(line.find("\"active_threshold_count\":") != std::string::npos);
    }
    CHECK(lines == 3);
}

TEST_CASE("run: strongly separated stream rejects with exit 10") {
    std::string body = "x,y\n";
    for (int i = 0; i < 300; ++i) body += "0.1,0.9\n";
    const auto csv = write_file("sep.csv", body);
    const auto r = run_cli("run --order fsd --variant adagro-exp --alpha 0.05 --input " +
                           csv.string());
    CHECK(r.exit_code == 10);
    CHECK(r.out.find("\"rejected\":true") != std::string::npos);
}

TEST_CASE("run: alpha outside (0,1) is a config error") {
    const auto csv = write_file("tiny.csv", "x,y\n0.1,0.9\n");
    const auto r = run_cli("run --alpha 1.5 --input " + csv.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("config error") != std::string::npos);
}

TEST_CASE("run: malformed row names the line") {
    const auto csv = write_file("bad.csv", "x,y\n0.1,0.9\nnot-a-number,0.3\n");
    const auto r = run_cli("run --input " + csv.string());
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("run: ksd support violation names the row") {
    const auto csv = write_file("ksd.csv", "x,y\n0.5,0.7\n-0.2,0.4\n");
    const auto r =
        run_cli("run --order ksd:2:0 --variant up --grid-lo 0 --grid-hi 1 --input " + csv.string());
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("run: incompatible variant/order fails before reading data") {
    const auto r = run_cli("run --order ksd:2:0 --variant gro --input /nonexistent.csv");
    CHECK(r.exit_code == 2);
}

TEST_CASE("run: config file with flag override") {
    const auto csv = write_file("cfg_in.csv", "x,y\n0.4,0.6\n0.3,0.7\n");
    const auto cfg = write_file("cfg.json",
                                "{\"variant\":\"constant\",\"alpha\":0.5,\"input\":\"" +
                                    csv.string() + "\"}");
    // Flag overrides the config's alpha; variant comes from the file.
    const auto r = run_cli("run --config " + cfg.string() + " --alpha 0.25");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("\"t\":2") != std::string::npos);

    const auto bad = run_cli("run --config /does/not/exist.json");
    CHECK(bad.exit_code == 2);
}

TEST_CASE("run: unpaired batch mode") {
    const auto fx = write_file("bx.txt", "0.1 0.2 0.15\n0.3 0.2\n");
    const auto fy = write_file("by.txt", "0.8 0.9\n0.7 0.95 0.85\n");
    const auto r = run_cli("run --variant up --input-x " + fx.string() + " --input-y " +
                           fy.string());
    REQUIRE(r.exit_code == 0);
    int lines = 0;
    std::istringstream ss(r.out);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 2);

    const auto ragged = run_cli("run --variant up --input-x " + fx.string() + " --input-y " +
                                write_file("by_short.txt", "0.8 0.9\n").string());
    CHECK(ragged.exit_code == 3);
}

TEST_CASE("run: bounded-history mode streams with bounded memory") {
    std::string body = "x,y\n";
    for (int i = 0; i < 500; ++i) body += "0.1,0.9\n";
    const auto csv = write_file("bounded.csv", body);
    const auto r = run_cli("run --variant adagro-exp --bounded-history 128 --input " +
                           csv.string());
    CHECK(r.exit_code == 10);  // still detects the violation
}

TEST_CASE("simulate + report round-trip") {
    const auto dir = fs::temp_directory_path() / "sdseq_cli_test" / "sim";
    fs::remove_all(dir);
    const auto r = run_cli("simulate --scenario anticorr --variants gro,constant --reps 20 "
                           "--horizon 150 --seed 7 --out-dir " + dir.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(dir / "anticorr_metrics.csv"));
    REQUIRE(fs::exists(dir / "anticorr_rejections.jsonl"));

    const auto rep = run_cli("report --metrics " + (dir / "anticorr_metrics.csv").string() +
                             " --rejections " + (dir / "anticorr_rejections.jsonl").string());
    REQUIRE(rep.exit_code == 0);
    CHECK(rep.out.find("gro") != std::string::npos);
    CHECK(rep.out.find("max_ville") != std::string::npos);

    const auto empty = write_file("empty.csv", "");
    CHECK(run_cli("report --metrics " + empty.string()).exit_code == 3);

    const auto mismatched = write_file("weird.csv", "a,b,c\n1,2,3\n");
    CHECK(run_cli("report --metrics " + mismatched.string()).exit_code == 3);
}

TEST_CASE("simulate: zero reps is a config error") {
    const auto r = run_cli("simulate --scenario anticorr --reps 0");
    CHECK(r.exit_code == 2);
}
