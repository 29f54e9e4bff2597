#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ccr/stateio.hpp"

namespace fs = std::filesystem;

namespace {

std::string cliPath() {
    const char* env = std::getenv("CCR_CLI");
    REQUIRE_MESSAGE(env != nullptr, "CCR_CLI must point at the ccr binary");
    return env;
}

struct RunResult {
    int exitCode = -1;
    std::string output;
};

RunResult runCli(const std::string& args) {
    std::string cmd = cliPath() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), n);
    int status = pclose(pipe);
    result.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string readFile(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path tempPath(const std::string& name) {
    return fs::temp_directory_path() / ("ccr_cli_test_" + name);
}

void writeBellFile(const fs::path& p) {
    std::ofstream out(p);
    out << R"({"dims": [2, 2], "vector": [[0.7071067811865476, 0], [0, 0], [0, 0],)"
        << R"( [0.7071067811865476, 0]]})";
}

// value of a named column in a quantifiers CSV
double csvValue(const std::string& csv, const std::string& name) {
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(name + ",", 0) == 0) {
            std::size_t a = line.find(','), b = line.find(',', a + 1);
            return std::stod(line.substr(a + 1, b - a - 1));
        }
    }
    REQUIRE_MESSAGE(false, ("no row named " + name).c_str());
    return 0.0;
}

}  // namespace

TEST_CASE("verify: passing batch exits 0, impossible tolerance exits 2") {
    RunResult ok = runCli("verify --relation ccr-pure --dims 2x2 --trials 50 --tol 1e-10 --seed 7");
    CHECK(ok.exitCode == 0);
    CHECK(ok.output.find("# seed: 7") != std::string::npos);
    CHECK(ok.output.find("failures=0") != std::string::npos);

    RunResult fail =
        runCli("verify --relation ccr-reality --dims 3 --trials 20 --tol 1e-18 --seed 8");
    CHECK(fail.exitCode == 2);
}

TEST_CASE("verify: dimension constraint violations are usage errors") {
    RunResult r = runCli("verify --relation ccr-tessier --dims 3x3 --trials 10 --seed 1");
    CHECK(r.exitCode == 1);
    CHECK(r.output.find("requires 2x2") != std::string::npos);

    RunResult unknown = runCli("verify --relation ccr-nope --trials 10 --seed 1");
    CHECK(unknown.exitCode == 1);
}

TEST_CASE("verify: koashi batch reports the optimizer spread column") {
    RunResult r = runCli(
        "verify --relation ccr-koashi --trials 5 --tol 1e-3 --restarts 10 --seed 11");
    CHECK(r.exitCode == 0);
    CHECK(r.output.find("trial,seed,residual,spread,converged,mode") != std::string::npos);
    CHECK(r.output.find("projective") != std::string::npos);
}

TEST_CASE("quantifiers: Bell state table") {
    fs::path bell = tempPath("bell.json");
    writeBellFile(bell);
    RunResult r = runCli("quantifiers --state " + bell.string());
    CHECK(r.exitCode == 0);
    CHECK(csvValue(r.output, "S_vn") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(csvValue(r.output, "I_A:B") == doctest::Approx(2.0));
    CHECK(csvValue(r.output, "S_A|B") == doctest::Approx(-1.0));
    CHECK(csvValue(r.output, "E_f") == doctest::Approx(1.0));
    fs::remove(bell);
}

TEST_CASE("quantifiers: qubit diag(3/4, 1/4)") {
    fs::path p = tempPath("diag.json");
    {
        std::ofstream out(p);
        out << R"({"dims": [2], "matrix": [[0.75, 0], [0, 0], [0, 0], [0.25, 0]]})";
    }
    RunResult r = runCli("quantifiers --state " + p.string());
    CHECK(r.exitCode == 0);
    CHECK(csvValue(r.output, "C_re") == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(csvValue(r.output, "P_vn") == doctest::Approx(0.1887).epsilon(1e-3));
    fs::remove(p);
}

TEST_CASE("quantifiers: malformed file exits 1 and writes nothing") {
    fs::path bad = tempPath("bad.json");
    {
        std::ofstream out(bad);
        out << "{\"dims\": [2,\n  \"matrix\": oops";
    }
    fs::path outFile = tempPath("bad_report.csv");
    fs::remove(outFile);
    RunResult r = runCli("quantifiers --state " + bad.string() + " --out " + outFile.string());
    CHECK(r.exitCode == 1);
    CHECK(r.output.find("line") != std::string::npos);
    CHECK(!fs::exists(outFile));
    fs::remove(bad);
}

TEST_CASE("decohere: CSV contract and coarse grid rejection") {
    fs::path out = tempPath("traj.csv");
    RunResult r = runCli("decohere --input plus --gamma 1 --tmax 5 --steps 120 --seed 3 --out " +
                         out.string());
    REQUIRE(r.exitCode == 0);
    std::string csv = readFile(out);

    std::istringstream in(csv);
    std::string line;
    int rows = 0;
    bool sawHeader = false;
    double maxResidual = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!sawHeader) {
            CHECK(line == "time,C_re,P_vn,S_vn,E_f_AE,J_AA,I_AA,ccr_residual");
            sawHeader = true;
            continue;
        }
        ++rows;
        auto lastComma = line.rfind(',');
        maxResidual = std::max(maxResidual, std::stod(line.substr(lastComma + 1)));
    }
    CHECK(rows == 120);
    CHECK(maxResidual <= 1e-10);

    std::string sidecar = readFile(out.string() + ".meta.json");
    auto meta = nlohmann::json::parse(sidecar);
    CHECK(meta.contains("pointer_basis_time"));
    CHECK(!meta["pointer_basis_time"].is_null());

    RunResult coarse = runCli("decohere --input plus --steps 2 --out " + out.string() + ".x");
    CHECK(coarse.exitCode == 1);
    fs::remove(out);
    fs::remove(out.string() + ".meta.json");
}

TEST_CASE("decohere: zero input leaves the record empty") {
    fs::path out = tempPath("traj_zero.csv");
    RunResult r = runCli("decohere --input zero --gamma 1 --tmax 4 --steps 40 --seed 5 --out " +
                         out.string());
    REQUIRE(r.exitCode == 0);
    std::istringstream in(readFile(out));
    std::string line;
    bool sawHeader = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!sawHeader) {
            sawHeader = true;
            continue;
        }
        // J_AA is the sixth numeric column
        std::istringstream cells(line);
        std::string cell;
        for (int i = 0; i < 6; ++i) std::getline(cells, cell, ',');
        CHECK(std::abs(std::stod(cell)) < 1e-9);
    }
    fs::remove(out);
    fs::remove(out.string() + ".meta.json");
}

TEST_CASE("byte-identical reruns for identical config and seed") {
    fs::path a = tempPath("det_a.csv"), b = tempPath("det_b.csv");
    std::string argsTail = " --gamma 0.8 --tmax 3 --steps 60 --seed 99 --out ";
    REQUIRE(runCli("decohere --input plus" + argsTail + a.string()).exitCode == 0);
    REQUIRE(runCli("decohere --input plus" + argsTail + b.string()).exitCode == 0);
    CHECK(readFile(a) == readFile(b));
    CHECK(readFile(a.string() + ".meta.json") == readFile(b.string() + ".meta.json"));

    RunResult v1 = runCli("verify --relation ccr-qc --dims 2x3 --trials 40 --seed 12");
    RunResult v2 = runCli("verify --relation ccr-qc --dims 2x3 --trials 40 --seed 12");
    CHECK(v1.output == v2.output);

    for (const auto& p : {a, b}) {
        fs::remove(p);
        fs::remove(p.string() + ".meta.json");
    }
}

TEST_CASE("JSON and CSV renderings agree to 12 significant digits") {
    fs::path csvOut = tempPath("rep.csv"), jsonOut = tempPath("rep.json");
    std::string common = "verify --relation ccr-koashi --trials 5 --restarts 8 --tol 1e-3 --seed 21 ";
    REQUIRE(runCli(common + "--format csv --out " + csvOut.string()).exitCode == 0);
    REQUIRE(runCli(common + "--format json --out " + jsonOut.string()).exitCode == 0);

    auto j = nlohmann::json::parse(readFile(jsonOut));
    std::istringstream in(readFile(csvOut));
    std::string line;
    std::vector<double> csvResiduals;
    bool sawHeader = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!sawHeader) {
            sawHeader = true;
            continue;
        }
        std::istringstream cells(line);
        std::string cell;
        for (int i = 0; i < 3; ++i) std::getline(cells, cell, ',');
        csvResiduals.push_back(std::stod(cell));
    }
    REQUIRE(csvResiduals.size() == j["trials"].size());
    for (std::size_t i = 0; i < csvResiduals.size(); ++i) {
        double jsonVal = j["trials"][i]["residual"].get<double>();
        double scale = std::max(std::abs(jsonVal), 1e-300);
        CHECK(std::abs(csvResiduals[i] - jsonVal) / scale < 1e-11);
    }
    fs::remove(csvOut);
    fs::remove(jsonOut);
}

TEST_CASE("state JSON round trip through serialize and parse") {
    using namespace ccr;
    for (int trial = 0; trial < 8; ++trial) {
        DensityMatrix rho({2, 2}, randomMixed(4, 1 + trial % 4, mixSeed(1500, trial)).mat());
        LoadedState back = parseStateJson(stateToJson(rho));
        CHECK((asDensity(back).mat() - rho.mat()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(asDensity(back).dims() == rho.dims());

        PureState psi = randomPure({2, 3}, mixSeed(1501, trial));
        LoadedState backPure = parseStateJson(stateToJson(psi));
        REQUIRE(std::holds_alternative<PureState>(backPure));
        CHECK((std::get<PureState>(backPure).amplitudes() - psi.amplitudes())
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }
}

TEST_CASE("missing subcommand or bad flags exit 1") {
    CHECK(runCli("").exitCode == 1);
    CHECK(runCli("verify").exitCode == 1);                      // --relation required
    CHECK(runCli("verify --relation ccr-pure --format xml").exitCode == 1);
    CHECK(runCli("--help").exitCode == 0);
}
