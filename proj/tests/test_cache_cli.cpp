#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bsu/cache.hpp"
#include "bsu/measure.hpp"

using namespace bsu;

namespace {
std::string run_cli(const std::string& args, int& exit_code) {
    const char* cli = std::getenv("BSU_CLI");
    REQUIRE(cli != nullptr);
    std::string cmd = std::string(cli) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    exit_code = WEXITSTATUS(status);
    return out;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/bsu_test_" + name) { std::remove(path.c_str()); }
    ~TempFile() { std::remove(path.c_str()); }
};
} // namespace

TEST_CASE("cache file: persistence and corrupt-tail truncation") {
    TempFile tf("cache1");
    {
        ZetaCache c(tf.path);
        c.store("k1", Rat(Int(22), Int(7)));
        c.store("k2", Rat(-5));
    }
    {
        ZetaCache c(tf.path);
        REQUIRE(c.lookup("k1").has_value());
        CHECK(*c.lookup("k1") == Rat(Int(22), Int(7)));
        CHECK(*c.lookup("k2") == Rat(-5));
        CHECK(!c.lookup("k3").has_value());
    }
    // append a torn record (no newline) and a corrupt line before it
    {
        std::ofstream f(tf.path, std::ios::app);
        f << "k3\tnot_a_number\n";
        f << "k4\t12";  // torn
    }
    {
        ZetaCache c(tf.path);
        CHECK(c.lookup("k1").has_value());
        CHECK(!c.lookup("k3").has_value());
        CHECK(!c.lookup("k4").has_value());
        c.store("k5", Rat(9));
    }
    {
        ZetaCache c(tf.path);
        CHECK(c.lookup("k5").has_value());
        CHECK(c.size() == 3);
    }
}

TEST_CASE("measure results are identical with cold and warm cache") {
    TempFile tf("cache2");
    QuadField F = make_field(Int(221));
    NarrowClassGroup G = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(15), Rat(0)}));
    Int cold, warm;
    {
        ZetaCache cache(tf.path);
        MeasureHandle h = make_measure(F, G, 1, Int(3), Int(5), {}, &cache);
        cold = measure_of(h, Int(1), Int(2), 2);
    }
    unsigned long evals_before = zeta_evaluations().load();
    {
        ZetaCache cache(tf.path);
        MeasureHandle h = make_measure(F, G, 1, Int(3), Int(5), {}, &cache);
        warm = measure_of(h, Int(1), Int(2), 2);
    }
    CHECK(cold == warm);
    CHECK(zeta_evaluations().load() == evals_before);  // served from the file cache
}

TEST_CASE("cli: config errors map to distinct exit codes") {
    int code = 0;
    run_cli("selftest", code);
    CHECK(code == 0);
    run_cli("compute -D 9 -p 3 -l 5", code);
    CHECK(code == 2);  // not a fundamental discriminant
    run_cli("compute -D -7 -p 3 -l 5", code);
    CHECK(code == 2);  // not real
    run_cli("compute -D 221 -p 5 -l 7", code);
    CHECK(code == 3);  // 5 splits: not inert
    run_cli("zeta -D 221 -p 3 -l 2", code);
    CHECK(code == 3);  // no degree-1 prime above 2
}

TEST_CASE("cli: zeta values, determinism, and cache reuse") {
    int code = 0;
    std::string out1 = run_cli("zeta -D 221 -p 3 -l 5", code);
    CHECK(code == 0);
    CHECK(out1.find("\"zeta0\": \"15\"") != std::string::npos);
    CHECK(out1.find("\"zeta0\": \"-15\"") != std::string::npos);
    CHECK(out1.find("\"zeta0\": \"3\"") != std::string::npos);
    CHECK(out1.find("\"zeta0\": \"-3\"") != std::string::npos);
    // byte-identical on repeat
    std::string out2 = run_cli("zeta -D 221 -p 3 -l 5", code);
    CHECK(out1 == out2);
    // warm cache run does no cone summation
    TempFile tf("cache3");
    std::string cached1 = run_cli("zeta -D 221 -p 3 -l 5 --cache " + tf.path, code);
    CHECK(code == 0);
    std::string cached2 = run_cli("zeta -D 221 -p 3 -l 5 --cache " + tf.path, code);
    CHECK(cached2.find("\"zeta_evaluations\": 0") != std::string::npos);
    CHECK(cached2.find("\"cone_point_visits\": 0") != std::string::npos);
    // values identical apart from the instrumentation counters
    auto strip = [](std::string s) {
        auto p = s.find("\"zeta_evaluations\"");
        return s.substr(0, p);
    };
    CHECK(strip(cached1) == strip(cached2));
}

TEST_CASE("cli: compute emits the reference polynomial (low precision run)") {
    int code = 0;
    std::string out = run_cli("compute -D 221 -p 3 -l 5 -M 45", code);
    CHECK(code == 0);
    CHECK(out.find("\"schema\": 1") != std::string::npos);
    CHECK(out.find("\"degree\": 4") != std::string::npos);
    CHECK(out.find("\"palindromic\": true") != std::string::npos);
    // X^3 coefficient in the display basis
    CHECK(out.find("-423812/1594323 + 71680/14348907*sqrt(221)") != std::string::npos);
}
