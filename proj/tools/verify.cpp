// verify: runs verification suites and dumps series as JSON.
//
//   verify <suite> [--g G] [--p P] [--k K] [--window N] [--M M] [--s S] [--mode generic-u|exact-eps]
//                  [--spec S]... [--out FILE] [--strict] [--jobs J]
//   verify dump <u|x|y|loop|basis:A|basis:I=...|basis:Q=(...)> [same flags]

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <thetacert/suites.hpp>

namespace {

constexpr int kUsage = 64;

int emit(const thetacert::json& j, const std::string& out)
{
    const std::string text = j.dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
        return 0;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) {
        std::cerr << "verify: cannot write " << out << "\n";
        return 1;
    }
    f << text;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace thetacert;
    CLI::App app{"Certified checks for the p-torsion construction on y^2 = x^(2g+1) + x"};
    SuiteConfig cfg;
    std::string command;
    std::string object;
    long window = 0, M = 0, s = 0;

    std::string registry = "all";
    for (const auto& s : suite_names()) registry += "|" + s;
    app.add_option("command", command, "suite (" + registry + ") or dump")->required();
    app.add_option("object", object, "dump selector");
    app.add_option("--g", cfg.g, "genus")->envname("THETACERT_G");
    app.add_option("--p", cfg.p, "prime, 1 mod 4g")->envname("THETACERT_P");
    app.add_option("--k", cfg.k, "working precision p^k")->envname("THETACERT_K");
    app.add_option("--window", window, "tail depth of the curve expansions")->envname("THETACERT_WINDOW");
    app.add_option("--M", M, "head depth of loop expansions")->envname("THETACERT_M");
    app.add_option("--s", s, "twist exponent for prop43")->envname("THETACERT_S");
    app.add_option("--mode", cfg.mode, "generic-u or exact-eps")->envname("THETACERT_MODE");
    app.add_option("--spec", cfg.specs, "divisor spec: A, I=0,3, Q=(1,sqrt2)")->envname("THETACERT_SPEC");
    app.add_option("--out", cfg.out, "report path (stdout when absent)")->envname("THETACERT_OUT");
    app.add_flag("--strict", cfg.strict, "treat Unknown as failure")->envname("THETACERT_STRICT");
    app.add_option("--jobs", cfg.jobs, "worker threads")->envname("THETACERT_JOBS");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }
    if (app.count("--window")) cfg.window = window;
    if (app.count("--M")) cfg.M = M;
    if (app.count("--s")) cfg.s = s;

    try {
        if (command == "dump") {
            if (object.empty()) throw UsageError("dump needs a selector");
            return emit(dump(cfg, object), cfg.out);
        }
        if (!object.empty()) throw UsageError("unexpected argument: " + object);
        cfg.suite = command;
        Report rep = run_suite(cfg);
        for (const auto& c : rep.certificates) {
            std::cerr << to_string(c.verdict) << "  " << c.name;
            if (!c.reason.empty()) std::cerr << "  [" << c.reason << "]";
            std::cerr << "\n";
        }
        if (int rc = emit(to_json(rep), cfg.out)) return rc;
        return rep.exit_code();
    } catch (const UsageError& e) {
        std::cerr << "verify: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "verify: " << e.what() << "\n";
        return 1;
    }
}
