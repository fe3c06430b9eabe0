// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace rsmr;

namespace
{

Json
readJson(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open " + path);
    }
    return Json::parse(in);
}

void
writeJson(std::string const& path, Json const& j)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path);
    }
    out << j.dump(2) << '\n';
}

// "A..B" inclusive, or a single seed.
std::vector<std::uint64_t>
parseSeeds(std::string const& s)
{
    auto dots = s.find("..");
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    try
    {
        lo = std::stoull(s.substr(0, dots));
        hi = dots == std::string::npos ? lo : std::stoull(s.substr(dots + 2));
    }
    catch (std::logic_error const&)
    {
        throw CLI::ValidationError("--seeds", "expected A..B, got " + s);
    }
    if (hi < lo)
    {
        throw CLI::ValidationError("--seeds", "empty range " + s);
    }
    std::vector<std::uint64_t> out;
    for (auto k = lo; k <= hi; ++k)
    {
        out.push_back(k);
    }
    return out;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Recoverable SMR simulator and checker"};
    app.require_subcommand(1);

    std::string configPath;
    std::string tracePath;
    std::string reportPath;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("config", configPath, "Scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--trace", tracePath, "Write the JSON-lines trace here");
    run->add_option("--report", reportPath, "Write the JSON report here");

    std::string seedRange;
    auto* sw = app.add_subcommand("sweep", "Run a scenario over a seed range");
    sw->add_option("config", configPath, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sw->add_option("--seeds", seedRange, "Inclusive range A..B")->required();
    sw->add_option("--report", reportPath, "Write the JSON report here");

    auto* au = app.add_subcommand("audit", "Recheck a stored trace");
    au->add_option("trace", tracePath, "JSON-lines trace")->required()->check(CLI::ExistingFile);
    au->add_option("--report", reportPath, "Write the JSON report here");

    std::string rc = "1/3";
    std::string rl = "1/3";
    std::uint32_t rounds = 3;
    auto* sc = app.add_subcommand("schedule", "Print the resilience schedule");
    sc->add_option("--rc", rc, "rho_C as a fraction")->capture_default_str();
    sc->add_option("--rl", rl, "rho_L as a fraction")->capture_default_str();
    sc->add_option("--r", rounds, "Largest r to print")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            auto cfg = configFromJson(readJson(configPath));
            if (seed)
            {
                cfg.seed = *seed;
            }
            auto out = runScenario(cfg);
            if (!tracePath.empty())
            {
                std::ofstream f(tracePath);
                out.trace.write(f);
            }
            auto rep = makeReport(out.trace);
            std::cout << formatReport(rep);
            if (!reportPath.empty())
            {
                writeJson(reportPath, reportToJson(rep));
            }
            return rep.passed() ? 0 : 1;
        }
        if (*sw)
        {
            auto cfg = configFromJson(readJson(configPath));
            auto res = sweep(cfg, parseSeeds(seedRange));
            std::cout << formatSweep(res);
            if (!reportPath.empty())
            {
                writeJson(reportPath, sweepToJson(res));
            }
            return res.passed() ? 0 : 1;
        }
        if (*au)
        {
            std::ifstream in(tracePath);
            auto res = audit(Trace::read(in));
            std::cout << formatReport(res.report);
            if (!reportPath.empty())
            {
                writeJson(reportPath, reportToJson(res.report));
            }
            return res.report.passed() ? 0 : 1;
        }
        auto rhoC = parseRational(rc);
        auto rhoL = parseRational(rl);
        std::cout << "r   x_r        g1         g2\n";
        for (std::uint32_t r = 0; r <= rounds; ++r)
        {
            auto g = resilienceSchedule(rhoC, rhoL, r);
            std::cout << std::left << std::setw(4) << r << std::setw(11)
                      << formatRational(resilienceX(rhoC, r)) << std::setw(11)
                      << formatRational(g.g1) << formatRational(g.g2) << "\n";
        }
        return 0;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
