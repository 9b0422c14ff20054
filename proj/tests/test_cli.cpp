#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "blp/panel.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class Workspace {
public:
    Workspace() {
        dir_ = fs::temp_directory_path() / ("blpdemand_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Workspace() { fs::remove_all(dir_); }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    fs::path path(const std::string& name) const { return dir_ / name; }

    Run run(const std::string& args) const {
        const std::string cmd = "cd '" + dir_.string() + "' && '" BLPDEMAND_EXE "' " + args + " > stdout.txt 2> stderr.txt";
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(path("stdout.txt")), slurp(path("stderr.txt"))};
    }

private:
    fs::path dir_;
    static inline int counter_ = 0;
};

const char* kSmallPanel =
    "unit,period,quantity,market_size,Price,CPU_cost,RAM_cost,CPU\n"
    "A,2015,100,1000,300,10,5,1\n"
    "B,2015,200,1000,400,12,4,2\n"
    "A,2016,150,1000,280,11,6,1\n"
    "B,2016,250,1000,390,13,3,2\n";

const char* kNoiselessSim = R"({"xi_scale": 0, "price_endogeneity": 0.8, "periods": 10, "seed": 7})";

const char* kSimSpec = R"({"dependent": "log_share_diff", "exogenous": ["x1", "x2"], "endogenous": ["price"],
  "instruments": ["cost1", "cost2"], "dataset": "market.csv"})";

}  // namespace

TEST_CASE("invert adds the dependent column") {
    Workspace w;
    write(w.path("panel.csv"), kSmallPanel);
    const auto r = w.run("invert --data panel.csv --output out.csv");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("2015,0.69999999999999996") != std::string::npos);
    const auto data = blp::load_panel(w.path("out.csv"));
    REQUIRE(data.has("log_share_diff"));
    CHECK(data.column("log_share_diff").values[0] == doctest::Approx(std::log(0.1 / 0.7)));
    CHECK(fs::exists(w.path("out.csv.manifest.json")));
}

TEST_CASE("invert rejects a period whose quantities exhaust the market") {
    Workspace w;
    write(w.path("bad.csv"), "unit,period,quantity,market_size\nA,2015,600,1000\nB,2015,400,1000\nA,2016,1,1000\n");
    const auto r = w.run("invert --data bad.csv");
    CHECK(r.code == 2);
    CHECK(r.err.find("2015") != std::string::npos);
}

TEST_CASE("invert reports parse errors with the line number") {
    Workspace w;
    write(w.path("bad.csv"), "unit,period,quantity,market_size\nA,2015,10,1000\nB,2015,ten,1000\n");
    const auto r = w.run("invert --data bad.csv");
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("estimate on a noiseless simulated market") {
    Workspace w;
    write(w.path("sim.json"), kNoiselessSim);
    REQUIRE(w.run("simulate sim.json --replications 1 --emit-dataset market.csv").code == 0);
    write(w.path("spec.json"), kSimSpec);

    const auto text = w.run("estimate --spec spec.json --method 2sls --robust");
    REQUIRE(text.code == 0);
    CHECK(text.out.find("x1                            1.000***") != std::string::npos);
    CHECK(text.out.find("price                        -1.000***") != std::string::npos);
    CHECK(text.out.find("R2                               1.000") != std::string::npos);
    CHECK(text.out.find("Observations                        50") != std::string::npos);

    const auto csv = w.run("estimate --spec spec.json --format csv");
    REQUIRE(csv.code == 0);
    std::istringstream lines(csv.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "name,estimate,std_error,t_value");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("estimate exit codes") {
    Workspace w;
    write(w.path("sim.json"), kNoiselessSim);
    REQUIRE(w.run("simulate sim.json --replications 1 --emit-dataset market.csv").code == 0);
    write(w.path("dup.json"), R"({"dependent": "log_share_diff", "exogenous": ["x1", "x1_copy"], "dataset": "d.csv"})");
    {
        auto data = blp::load_panel(w.path("market.csv"));
        data.set_column(blp::Column{"x1_copy", blp::ColumnKind::continuous, data.column("x1").values});
        blp::save_panel(w.path("d.csv"), data);
    }
    const auto rank = w.run("estimate --spec dup.json");
    CHECK(rank.code == 3);
    CHECK(rank.err.find("x1_copy") != std::string::npos);

    write(w.path("weight.json"), R"({"dependent": "log_share_diff", "exogenous": ["Weight"], "dataset": "market.csv"})");
    const auto missing = w.run("estimate --spec weight.json");
    CHECK(missing.code == 2);
    CHECK(missing.err.find("Weight") != std::string::npos);

    CHECK(w.run("estimate").code == 1);
    CHECK(w.run("bogus").code == 1);
}

TEST_CASE("diagnose") {
    Workspace w;
    write(w.path("sim.json"), R"({"price_endogeneity": 0.8, "periods": 10, "seed": 11})");
    REQUIRE(w.run("simulate sim.json --replications 1 --emit-dataset market.csv").code == 0);

    write(w.path("spec.json"), kSimSpec);
    const auto over = w.run("diagnose --spec spec.json");
    REQUIRE(over.code == 0);
    CHECK(over.out.find("Res.Df") != std::string::npos);
    CHECK(over.out.find("Sargan") != std::string::npos);

    write(w.path("exact.json"), R"({"dependent": "log_share_diff", "exogenous": ["x1", "x2"], "endogenous": ["price"],
  "instruments": ["cost1"], "dataset": "market.csv"})");
    const auto exact = w.run("diagnose --spec exact.json");
    REQUIRE(exact.code == 0);
    CHECK(exact.out.find("exactly identified") != std::string::npos);
    CHECK(exact.out.find("Res.Df") != std::string::npos);

    write(w.path("none.json"), R"({"dependent": "log_share_diff", "exogenous": ["x1"], "endogenous": ["price"],
  "dataset": "market.csv"})");
    CHECK(w.run("diagnose --spec none.json").code == 4);
}

TEST_CASE("simulate") {
    Workspace w;
    write(w.path("sim.json"), R"({"price_endogeneity": 0.8, "periods": 10, "replications": 20})");
    const auto a = w.run("simulate sim.json --seed 99 --emit-dataset one.csv --output a.txt");
    REQUIRE(a.code == 0);
    const auto b = w.run("simulate sim.json --seed 99 --output b.txt");
    REQUIRE(b.code == 0);
    CHECK(slurp(w.path("a.txt")) == slurp(w.path("b.txt")));
    CHECK(slurp(w.path("a.txt")).find("seed 99") != std::string::npos);
    CHECK(blp::load_panel(w.path("one.csv")).size() == 50);

    const auto c = w.run("simulate sim.json --seed 100 --output c.txt");
    CHECK(slurp(w.path("a.txt")) != slurp(w.path("c.txt")));

    write(w.path("bad.json"), R"({"xi_scale": -1})");
    CHECK(w.run("simulate bad.json").code == 5);
    write(w.path("unknown.json"), R"({"gamma": 1})");
    CHECK(w.run("simulate unknown.json").code == 5);
}

TEST_CASE("replaying a manifest reproduces the output byte for byte") {
    Workspace w;
    write(w.path("sim.json"), R"({"price_endogeneity": 0.5, "periods": 8, "seed": 3})");
    REQUIRE(w.run("simulate sim.json --replications 1 --emit-dataset market.csv").code == 0);
    write(w.path("spec.json"), kSimSpec);

    for (const std::string cmd : {"estimate --spec spec.json --output result.txt",
                                  "diagnose --spec spec.json --format csv --output result.txt",
                                  "simulate sim.json --replications 5 --output result.txt"}) {
        CAPTURE(cmd);
        REQUIRE(w.run(cmd).code == 0);
        const std::string first = slurp(w.path("result.txt"));
        fs::rename(w.path("result.txt.manifest.json"), w.path("saved.manifest.json"));
        fs::remove(w.path("result.txt"));
        REQUIRE(w.run("replay saved.manifest.json").code == 0);
        CHECK(slurp(w.path("result.txt")) == first);
    }
}
