#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("aisf_cli_" + name))
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    [[nodiscard]] std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

int run(const std::string& args, const std::string& log = "/dev/null")
{
    const std::string cmd = std::string(AISF_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

const std::string kSmall = " --generate --vessels 12 --channels 8 --hidden 8 --epochs 1 ";

}  // namespace

TEST_CASE("generate is deterministic and reports the tail")
{
    Scratch s("generate");
    REQUIRE(run("generate --vessels 30 --seed 2021 --out " + (s / "a")) == 0);
    REQUIRE(run("generate --vessels 30 --seed 2021 --out " + (s / "b")) == 0);
    CHECK(slurp(s / "a/ais.csv") == slurp(s / "b/ais.csv"));
    CHECK(slurp(s / "a/ais.csv").rfind("vessel_id,timestamp,lat,lon,cog,sog\n", 0) == 0);
    REQUIRE(run("generate --vessels 30 --seed 2022 --out " + (s / "c")) == 0);
    CHECK(slurp(s / "a/ais.csv") != slurp(s / "c/ais.csv"));

    REQUIRE(run("generate --vessels 50 --seed 2021 --outlier-rate 0.05 --out " + (s / "d")) == 0);
    const json rep = read_json(s / "d/generate_report.json");
    CHECK(rep["vessels"] == 50);
    CHECK(rep["delta_t_max_over_median"].get<double>() > 100.0);
}

TEST_CASE("usage errors exit with 2")
{
    Scratch s("usage");
    CHECK(run("generate --vessels 0 --out " + (s / "x")) == 2);
    CHECK(run("train --generate --model transformer --out " + (s / "x")) == 2);
    CHECK(run("train --generate --channels 7 --out " + (s / "x")) == 2);
    CHECK(run("train --generate --layers 4 --out " + (s / "x")) == 2);
    CHECK(run("train --data foo.csv --generate --out " + (s / "x")) == 2);
    CHECK(run("train --generate --seed 1 --seeds all --out " + (s / "x")) == 2);
    CHECK(run("nonsense") == 2);
    CHECK(run("") == 2);
}

TEST_CASE("train writes its artifacts under the output directory")
{
    Scratch s("train");
    REQUIRE(run("train" + kSmall + "--model proposed --regime low --out " + (s / "p")) == 0);
    for (const char* f : {"checkpoint.json", "epochs.csv", "report.json"}) CHECK(fs::exists(s.dir / "p" / f));
    const json rep = read_json(s.dir / "p/report.json");
    for (const char* key : {"hte", "mae", "huber", "rmse", "rpd", "n_elements", "per_variable", "seed", "window",
                            "horizon", "model"}) {
        CHECK(rep.contains(key));
    }
    CHECK(rep["window"] == 15);
    CHECK(rep["horizon"] == 5);
    CHECK(rep["model"] == "proposed");
    const std::string log = slurp(s.dir / "p/epochs.csv");
    CHECK(log.rfind("epoch,train_hte,test_hte,lr\n1,", 0) == 0);

    REQUIRE(run("train --generate --vessels 12 --model control --regime medium --out " + (s / "c")) == 0);
    CHECK_FALSE(fs::exists(s.dir / "c/checkpoint.json"));
    CHECK_FALSE(fs::exists(s.dir / "c/epochs.csv"));
    CHECK(read_json(s.dir / "c/report.json").contains("rpd"));

    std::size_t entries = 0;
    for (const auto& e : fs::recursive_directory_iterator(s.dir)) entries += e.is_regular_file();
    CHECK(entries == 4);
}

TEST_CASE("too-short data names the minimum length")
{
    Scratch s("short");
    REQUIRE(run("generate --vessels 5 --min-messages 30 --max-messages 40 --out " + (s / "g")) == 0);
    const std::string log = s / "log.txt";
    CHECK(run("train --data " + (s / "g/ais.csv") + " --model control --regime high --out " + (s / "t"), log) == 1);
    CHECK(slurp(log).find("80") != std::string::npos);
}

TEST_CASE("seeds all aggregates five runs")
{
    Scratch s("seeds");
    REQUIRE(run("train --generate --vessels 12 --model chain --regime low --seeds all --out " + (s / "a")) == 0);
    const json rep = read_json(s.dir / "a/report.json");
    REQUIRE(rep.contains("aggregate"));
    CHECK(rep["aggregate"]["n_runs"] == 5);
    CHECK(rep["aggregate"]["rpd"].contains("mean"));
    CHECK(rep["aggregate"]["rpd"].contains("std"));
    CHECK(rep["runs"].size() == 5);
    for (const char* seed : {"2021", "2121", "2221", "2321", "2421"}) {
        CHECK(fs::exists(s.dir / "a" / (std::string("seed_") + seed) / "report.json"));
    }
}

TEST_CASE("evaluate reproduces the train report")
{
    Scratch s("evaluate");
    REQUIRE(run("train" + kSmall + "--model gru --regime low --out " + (s / "t")) == 0);
    REQUIRE(run("evaluate --generate --vessels 12 --checkpoint " + (s / "t/checkpoint.json") + " --per-step --out "
                + (s / "e"))
            == 0);
    const json tr = read_json(s.dir / "t/report.json");
    const json ev = read_json(s.dir / "e/evaluation.json");
    for (const char* key : {"hte", "mae", "huber", "rmse", "rpd"}) {
        CHECK(std::abs(tr[key].get<double>() - ev[key].get<double>()) <= 1e-10);
    }

    std::ifstream csv(s.dir / "e/per_step.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "step,variable,hte,mae,huber,rmse,rpd,n_elements");
    std::size_t rows = 0;
    while (std::getline(csv, line)) rows += !line.empty();
    CHECK(rows == 5 * 5);

    CHECK(run("evaluate --generate --vessels 12 --window 30 --checkpoint " + (s / "t/checkpoint.json") + " --out "
              + (s / "bad"))
          == 1);
}

TEST_CASE("gradcheck filter and negative control")
{
    const std::string log = (fs::temp_directory_path() / "aisf_cli_gradcheck.txt").string();
    REQUIRE(run("gradcheck --layer lstm --trials 5", log) == 0);
    const std::string out = slurp(log);
    CHECK(out.find("layer.lstm") != std::string::npos);
    CHECK(out.find("PASS") != std::string::npos);
    CHECK(out.find("layer.gru") == std::string::npos);
    CHECK(out.find("op.matmul") == std::string::npos);

    CHECK(run("gradcheck --layer op.tanh --trials 5 --inject-wrong-sign", log) == 1);
    CHECK(slurp(log).find("FAIL") != std::string::npos);
    fs::remove(log);
}
