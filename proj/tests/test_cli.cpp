#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <cqedwb/cqedwb.hpp>

#include "../tools/cli_table.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace cqedwb::cli;

namespace {

const std::vector<std::string> kCommands = {
    "transmon-spectrum", "flux-tune", "tphi",      "jc-spectrum",      "chi",          "zz",
    "crossing",          "flux-coupling", "screening", "fbl-t1",       "allxy",        "tomo-reconstruct",
    "process-tomo",      "qec-sweep", "witnesses", "kerr-q",           "readout-snr",  "bright-state"};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("cqedwb_cli_") + info->name() + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    // Runs the CLI inside `where` (default: the test directory) and returns its exit code.
    int run(const std::string& args, const fs::path& where = {}, const std::string& env = "") {
        const fs::path d = where.empty() ? dir_ : where;
        const std::string cmd = "cd '" + d.string() + "' && " + env + " '" + CQEDWB_CLI_PATH + "' " + args +
                                " > stdout.txt 2> stderr.txt";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const std::string& name, const fs::path& where = {}) const {
        std::ifstream in((where.empty() ? dir_ : where) / name, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    json summary(const std::string& prefix) const { return json::parse(slurp(prefix + ".json")); }

    Table table(const std::string& prefix) const {
        std::istringstream in(slurp(prefix + ".csv"));
        return read_csv(in);
    }

    void write(const std::string& name, const std::string& body) const { std::ofstream(dir_ / name) << body; }

    fs::path dir_;
};

double num(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return *d;
    if (auto i = std::get_if<long long>(&c)) return static_cast<double>(*i);
    throw std::runtime_error("cell is not numeric");
}

std::size_t col(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return i;
    throw std::runtime_error("missing column " + name);
}

} // namespace

TEST(CsvTable, RoundTripInMemory) {
    Table t;
    t.columns = {"a", "b,c", "q\"uote", "d"};
    t.rows = {{1.0, std::string("x,y"), true, -0.0},
              {std::nan(""), std::string("say \"hi\""), false, 1e-300},
              {HUGE_VAL, std::string("line\nbreak"), 42LL, -HUGE_VAL},
              {0.1, std::string(""), -7LL, 6.02214076e23},
              {1.0 / 3.0, std::string("plain"), std::string("true-ish"), 123456789012345678.0}};
    std::ostringstream out;
    write_csv(out, t);
    std::istringstream in(out.str());
    const Table back = read_csv(in);
    EXPECT_TRUE(same_table(t, back));
    EXPECT_TRUE(std::signbit(std::get<double>(back.rows[0][3])));
    std::ostringstream again;
    write_csv(again, back);
    EXPECT_EQ(out.str(), again.str());
    EXPECT_EQ(out.str().find('\r'), std::string::npos);
}

TEST(CsvTable, FloatsKeepAllDigits) {
    for (double x : {0.1, 1.0 / 3.0, 2.0 / 7.0 * 1e-17, 9007199254740993.0, -1.2345678901234567e89}) {
        const Cell c = parse_cell(format_double(x));
        EXPECT_EQ(num(c), x);
    }
}

TEST(CsvTable, RejectsRaggedRecords) {
    std::istringstream in("a,b\n1,2\n3\n");
    EXPECT_THROW(read_csv(in), std::runtime_error);
    std::istringstream open_quote("a\n\"x\n");
    EXPECT_THROW(read_csv(open_quote), std::runtime_error);
}

TEST_F(Cli, EveryCommandSucceedsWithDefaults) {
    for (const auto& c : kCommands) {
        SCOPED_TRACE(c);
        ASSERT_EQ(run(c + " -o out"), 0) << slurp("stderr.txt");
        const json s = summary("out");
        EXPECT_EQ(s["command"], c);
        EXPECT_EQ(s["status"], "ok");
        const Table t = table("out");
        EXPECT_EQ(t.rows.size(), s["table"]["rows"].get<std::size_t>());
        EXPECT_EQ(t.columns, s["table"]["columns"].get<std::vector<std::string>>());
    }
}

TEST_F(Cli, CsvReparsesToTheSameBytes) {
    for (const auto& c : kCommands) {
        SCOPED_TRACE(c);
        ASSERT_EQ(run(c + " -o out"), 0);
        const std::string raw = slurp("out.csv");
        std::istringstream in(raw);
        std::ostringstream again;
        write_csv(again, read_csv(in));
        EXPECT_EQ(raw, again.str());
    }
}

TEST_F(Cli, SummariesMatchTheSchema) {
    if (std::system("python3 -c 'import jsonschema' > /dev/null 2>&1") != 0) GTEST_SKIP() << "python3 jsonschema unavailable";
    std::vector<std::string> files;
    for (const auto& c : kCommands) {
        ASSERT_EQ(run(c + " -o " + c), 0);
        files.push_back(c + ".json");
    }
    ASSERT_EQ(run("tphi --flux 0.5 -o failed"), 1);
    files.push_back("failed.json");
    ASSERT_EQ(run("transmon-spectrum --ng 0:1:5 --ej 20:40:3:log -o swept"), 0);
    files.push_back("swept.json");
    ASSERT_EQ(run("fbl-t1 --cc 0 -o singular"), 1);
    files.push_back("singular.json");

    write("check.py",
          "import json, sys, jsonschema\n"
          "schema = json.load(open(sys.argv[1]))\n"
          "jsonschema.Draft202012Validator.check_schema(schema)\n"
          "v = jsonschema.Draft202012Validator(schema)\n"
          "bad = 0\n"
          "for f in sys.argv[2:]:\n"
          "    for e in v.iter_errors(json.load(open(f))):\n"
          "        print(f, e.message); bad += 1\n"
          "sys.exit(1 if bad else 0)\n");
    std::string cmd = "cd '" + dir_.string() + "' && python3 check.py '" + CQEDWB_SCHEMA_PATH + "'";
    for (const auto& f : files) cmd += " " + f;
    cmd += " > schema.txt 2>&1";
    EXPECT_EQ(std::system(cmd.c_str()), 0) << slurp("schema.txt");
}

TEST_F(Cli, ComputationErrorExitsOneWithKind) {
    EXPECT_EQ(run("tphi --flux 0.5 -o e"), 1);
    const json s = summary("e");
    EXPECT_EQ(s["status"], "error");
    EXPECT_EQ(s["error"]["kind"], "OutOfRegime");
    EXPECT_TRUE(s["table"].is_null());
    EXPECT_FALSE(fs::exists(dir_ / "e.csv"));

    EXPECT_EQ(run("qec-sweep --pmax 1.5 -o p"), 1);
    EXPECT_EQ(summary("p")["error"]["kind"], "InvalidProbability");
    EXPECT_EQ(run("zz --f1 6 --f2 6.3 --alpha -0.3 -o r"), 1);
    EXPECT_EQ(summary("r")["error"]["kind"], "Divergent");
    EXPECT_EQ(run("fbl-t1 --cc 0 -o s"), 1);
    EXPECT_EQ(summary("s")["error"]["kind"], "SingularNetwork");
}

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("no-such-command"), 2);
    EXPECT_EQ(run("chi --nope 1"), 2);
    EXPECT_EQ(run("chi --g 5parsec"), 2);
    EXPECT_EQ(run("chi --g 5ns"), 2);
    EXPECT_EQ(run("chi --g abc"), 2);
    EXPECT_EQ(run("chi --g 0:1:1"), 2);
    EXPECT_EQ(run("chi --g -1:1:5:log"), 2);
    EXPECT_EQ(run("chi --qubit-levels 1"), 2);
    EXPECT_EQ(run("qec-sweep --kind both"), 2);
    EXPECT_EQ(run("qec-sweep --pmax 0:1:3"), 2);
    EXPECT_EQ(run("chi --jobs 0"), 2);
    EXPECT_EQ(run("chi", {}, "CQEDWB_JOBS=many"), 2);
    EXPECT_EQ(run("chi --config missing.json"), 2);
    EXPECT_EQ(run("tomo-reconstruct --input missing.csv"), 2);
    EXPECT_FALSE(slurp("stderr.txt").empty());
}

TEST_F(Cli, DuplicateFlagIsRejected) {
    EXPECT_EQ(run("transmon-spectrum --ej 30GHz --ej 31GHz"), 2);
    EXPECT_NE(slurp("stderr.txt").find("ej"), std::string::npos);
    EXPECT_EQ(run("fbl-t1 --filtered --filtered"), 2);
}

TEST_F(Cli, UnknownConfigKeyIsNamed) {
    write("cfg.json", R"({"g": 0.05, "bogus_key": 3})");
    EXPECT_EQ(run("chi --config cfg.json"), 2);
    EXPECT_NE(slurp("stderr.txt").find("bogus_key"), std::string::npos);
    write("notobj.json", "[1, 2]");
    EXPECT_EQ(run("chi --config notobj.json"), 2);
    write("badsweep.json", R"({"g": {"start": 0.01, "stop": 0.02}})");
    EXPECT_EQ(run("chi --config badsweep.json"), 2);
}

TEST_F(Cli, FlagsOverrideConfig) {
    write("cfg.json", R"({"ej": "20GHz", "ec": 0.3, "ng": {"start": 0, "stop": 1, "points": 3}, "levels": 5})");
    ASSERT_EQ(run("transmon-spectrum --config cfg.json --ej 25000MHz -o mixed"), 0);
    ASSERT_EQ(run("transmon-spectrum --ej 25GHz --ec 300MHz --ng 0:1:3 --levels 5 -o flags"), 0);
    const json in = summary("mixed")["inputs"];
    EXPECT_EQ(in["ej"], 25.0);
    EXPECT_EQ(in["ec"], 0.3);
    EXPECT_EQ(in["levels"], 5);
    EXPECT_EQ(in["ng"]["points"], 3);
    // the merged configuration and the equivalent flags produce the same table
    EXPECT_EQ(slurp("mixed.csv"), slurp("flags.csv"));

    write("flag.json", R"({"filtered": true, "cg": "10pF", "lf": "1nH"})");
    ASSERT_EQ(run("fbl-t1 --config flag.json --filtered=false -o off"), 0);
    EXPECT_EQ(summary("off")["inputs"]["filtered"], false);
    EXPECT_EQ(summary("off")["inputs"]["cg"], 1e-11);
}

TEST_F(Cli, UnitsAreConverted) {
    ASSERT_EQ(run("fbl-t1 --csigma 40fF --freq 9000MHz -o a"), 0);
    ASSERT_EQ(run("fbl-t1 --csigma 4e-14 --freq 9 -o b"), 0);
    EXPECT_EQ(summary("a")["inputs"]["csigma"], 4e-14);
    EXPECT_EQ(summary("a")["inputs"]["freq"], 9.0);
    EXPECT_EQ(slurp("a.csv"), slurp("b.csv"));
    ASSERT_EQ(run("witnesses --state ghz-phi --phi 90deg -o d"), 0);
    EXPECT_NEAR(summary("d")["inputs"]["phi"].get<double>(), M_PI / 2, 1e-15);
    ASSERT_EQ(run("chi --alpha -300MHz -o neg"), 0);
    EXPECT_EQ(summary("neg")["inputs"]["alpha"], -0.3);
}

TEST_F(Cli, SweepsFormACartesianProduct) {
    ASSERT_EQ(run("chi --g 0.01:0.02:2 --f01 6:6.5:3 -o s"), 0);
    const Table t = table("s");
    ASSERT_EQ(t.rows.size(), 6u);
    EXPECT_EQ(t.columns[0], "f01_ghz");
    EXPECT_EQ(t.columns[1], "g_ghz");
    const double f01[] = {6, 6, 6.25, 6.25, 6.5, 6.5}, g[] = {0.01, 0.02, 0.01, 0.02, 0.01, 0.02};
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(num(t.rows[i][0]), f01[i]);
        EXPECT_EQ(num(t.rows[i][1]), g[i]);
    }
    const json s = summary("s");
    EXPECT_EQ(s["points"], 6);
    EXPECT_TRUE(s["outputs"].contains("min_chi_exact_ghz"));
    EXPECT_TRUE(s["outputs"].contains("max_chi_exact_ghz"));

    ASSERT_EQ(run("screening --ratio 0.1:10:5:log -o l"), 0);
    const Table l = table("l");
    const double expect[] = {0.1, std::sqrt(0.1), 1.0, std::sqrt(10.0), 10.0};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(num(l.rows[i][0]), expect[i], 1e-14 * expect[i]);
    EXPECT_EQ(num(l.rows[0][0]), 0.1);
    EXPECT_EQ(num(l.rows[4][0]), 10.0);
}

TEST_F(Cli, OutputIsDeterministicAcrossRunsAndJobs) {
    const fs::path a = dir_ / "a", b = dir_ / "b", c = dir_ / "c";
    for (const auto& d : {a, b, c}) fs::create_directories(d);
    const std::string args = "qec-sweep --kind bit --model incoherent --points 21 -o out";
    ASSERT_EQ(run(args, a), 0);
    ASSERT_EQ(run(args + " --jobs 4", b), 0);
    ASSERT_EQ(run(args, c, "CQEDWB_JOBS=3"), 0);
    for (const auto& d : {b, c}) {
        EXPECT_EQ(slurp("out.csv", a), slurp("out.csv", d));
        EXPECT_EQ(slurp("out.json", a), slurp("out.json", d));
    }
    const std::string sweep = "transmon-spectrum --ng 0:1:9 --ej 20:40:3 -o out";
    ASSERT_EQ(run(sweep + " --jobs 1", a), 0);
    ASSERT_EQ(run(sweep + " --jobs 5", b), 0);
    EXPECT_EQ(slurp("out.csv", a), slurp("out.csv", b));
    EXPECT_EQ(slurp("out.json", a), slurp("out.json", b));
}

TEST_F(Cli, StdoutCarriesCsvWithoutPrefix) {
    ASSERT_EQ(run("tphi"), 0);
    std::istringstream in(slurp("stdout.txt"));
    const Table t = read_csv(in);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.columns[0], "tphi_s");
    EXPECT_EQ(json::parse(slurp("stderr.txt"))["status"], "ok");
}

TEST_F(Cli, FilteredFluxLineLifetime) {
    ASSERT_EQ(run("fbl-t1 --filtered --cc 0.25fF --csigma 40fF --ls 0.5nH --cg 10pF --lf 1nH --freq 9GHz -o f"), 0);
    const json out = summary("f")["outputs"];
    EXPECT_NEAR(out["t1_common_s"].get<double>(), 1.6e-3, 0.16e-3);
    EXPECT_GT(out["t1_diff_s"].get<double>(), out["t1_common_s"].get<double>());
}

TEST_F(Cli, PhaseCodeSweepCoefficients) {
    ASSERT_EQ(run("qec-sweep --kind phase --pmax 1 --points 41 -o q"), 0);
    const Table t = table("q");
    ASSERT_EQ(t.rows.size(), 41u);
    const auto ip = col(t, "p"), iff = col(t, "fidelity");
    for (const auto& r : t.rows) {
        const double p = num(r[ip]);
        EXPECT_NEAR(num(r[iff]), 1 - 3 * p * p + 2 * p * p * p, 1e-9);
    }
    const json out = summary("q")["outputs"];
    EXPECT_LT(std::abs(out["c1"].get<double>()), 1e-6);
    EXPECT_NEAR(out["c0"].get<double>(), 1.0, 1e-9);
    EXPECT_NEAR(out["c2"].get<double>(), -3.0, 0.01);
    EXPECT_NEAR(out["c3"].get<double>(), 2.0, 0.02);
}

TEST_F(Cli, AllXyIdealRows) {
    ASSERT_EQ(run("allxy -o a"), 0);
    const Table t = table("a");
    ASSERT_EQ(t.rows.size(), 21u);
    const auto ii = col(t, "ideal"), iz = col(t, "z");
    for (std::size_t k = 0; k < 21; ++k) {
        const double want = k < 5 ? 1.0 : k < 17 ? 0.0 : -1.0;
        EXPECT_EQ(num(t.rows[k][ii]), want) << k;
        EXPECT_EQ(num(t.rows[k][iz]), want) << k;
    }
    EXPECT_EQ(std::get<std::string>(t.rows[1][col(t, "sequence")]), "Xp,Xp");
}

TEST_F(Cli, TomographyReadsVoltageFiles) {
    using namespace cqedwb;
    // Bell pair voltages under uniform readout weights, written in reverse table order
    const int n = 2;
    StateVector psi = StateVector::Zero(4);
    psi(0) = psi(3) = 1 / std::sqrt(2.0);
    const MeasurementModel m{n, {0.25, 0.25, 0.25, 0.25}};
    const auto v = simulate_tomo_voltages(projector(psi), m);
    const auto rows = prerotation_table(n);
    std::string csv = "label,voltage\n";
    for (std::size_t k = rows.size(); k-- > 0;) csv += row_label(rows[k]) + "," + format_double(v[k]) + "\n";
    write("bell.csv", csv);
    ASSERT_EQ(run("tomo-reconstruct --qubits 2 --input bell.csv -o bell"), 0) << slurp("stderr.txt");
    const Table t = table("bell");
    const auto labels = pauli_labels(n);
    const auto want = pauli_expectations(projector(psi), n).values;
    ASSERT_EQ(t.rows.size(), labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) {
        EXPECT_EQ(std::get<std::string>(t.rows[k][col(t, "pauli")]), labels[k]);
        EXPECT_NEAR(num(t.rows[k][col(t, "value")]), want[k], 1e-12) << labels[k];
    }

    write("bad.csv", "label,voltage\nnot_a_row,1\n");
    EXPECT_EQ(run("tomo-reconstruct --qubits 1 --input bad.csv -o bad"), 1);
    EXPECT_EQ(summary("bad")["error"]["kind"], "InvalidInput");
}

TEST_F(Cli, ThesisOrderGroupsByWeight) {
    ASSERT_EQ(run("tomo-reconstruct --order thesis -o t"), 0);
    const Table t = table("t");
    const std::vector<std::string> head = {"IIX", "IIY", "IIZ", "IXI", "IYI", "IZI", "XII", "YII", "ZII",
                                           "IXX", "IYX", "IZX", "IXY"};
    for (std::size_t k = 0; k < head.size(); ++k) EXPECT_EQ(std::get<std::string>(t.rows[k][col(t, "pauli")]), head[k]);
    EXPECT_EQ(std::get<std::string>(t.rows[36][col(t, "pauli")]), "XXX");
    EXPECT_EQ(std::get<std::string>(t.rows[37][col(t, "pauli")]), "YXX");
    EXPECT_EQ(std::get<std::string>(t.rows[39][col(t, "pauli")]), "XYX");
}
