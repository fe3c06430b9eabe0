// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include "generators.hpp"
#include "oracles.hpp"
#include "rsmr/global_finalize.hpp"
#include "trace_tools.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace rsmr;
using namespace rsmr::testing;

namespace
{

// Pinned parameters.
constexpr std::size_t kSeedsOneViolation = 50;
constexpr std::size_t kSeedsTail = 200;
constexpr std::size_t kSeedsCombo = 50;
constexpr std::size_t kSeedsPerStrategy = 5;
constexpr std::size_t kSeedsPsync = 5;
constexpr double kTailSigmas = 3.0;
constexpr std::size_t kMinSnapshotChecks = 100000;
constexpr std::size_t kDetectorSets = 1000;
constexpr std::size_t kDetectorMaxSize = 12;
constexpr Timeslot kDeltaStars[] = {5, 10, 20};

struct Verdict
{
    bool pass = true;
    std::ostringstream why;

    void
    fail(std::string const& msg)
    {
        if (pass)
        {
            why << msg;
        }
        pass = false;
    }
};

std::size_t
checkedCount(RunReport const& r)
{
    auto const* c = r.check("liveness");
    if (!c)
    {
        return 0;
    }
    std::size_t n = 0;
    std::istringstream in(c->detail.substr(c->detail.find_last_of(';') + 1));
    in >> n;
    return n;
}

struct Run
{
    ScenarioConfig cfg;
    RunReport report;
    Trace trace;
};

// Every acceptance run goes through here so the cross-cutting criteria
// see all of them.
struct Corpus
{
    Run
    run(ScenarioConfig const& cfg, std::string const& family)
    {
        auto out = runScenario(cfg);
        auto view = viewTrace(out.trace);
        auto au = audit(out.trace);
        Run r{cfg, au.report, std::move(out.trace)};
        ++runs;
        simChecks += view.summary.value("finalization_checks", std::size_t{0});
        simMismatches += view.summary.value("finalization_mismatches", std::size_t{0});
        auditChecks += au.snapshotChecks;
        auditMismatches += au.finalizationMismatches;
        finishConflicts += au.finishQcConflicts;
        for (auto const* name : {"recovery_entry_spread", "recovery_exit_agreement",
                                 "audit_unique_finish", "genesis_monotone"})
        {
            if (auto const* c = r.report.check(name); c && !c->pass)
            {
                agreementFailures.push_back(family + " seed " +
                                            std::to_string(cfg.seed) + ": " + name);
            }
        }
        if (cfg.delays.deltaStar)
        {
            auto ds = *cfg.delays.deltaStar;
            if (!r.report.rollback)
            {
                timingFailures.push_back(family + " seed " + std::to_string(cfg.seed) +
                                         ": no stable horizon");
            }
            else
            {
                ++rollbackRuns;
                worstRollbackRatio = std::max(worstRollbackRatio,
                                              double(*r.report.rollback) / double(ds));
                if (*r.report.rollback >= 2 * ds)
                {
                    rollbackFailures.push_back(family + " seed " +
                                               std::to_string(cfg.seed));
                }
            }
            auto f = static_cast<Timeslot>(r.report.faulty.size());
            for (auto const& rec : r.report.recoveries)
            {
                ++recoveries;
                auto worst = 2 * ds + 8 * (f + 1) * ds;
                if (rec.duration > rec.bound || rec.duration > worst)
                {
                    timingFailures.push_back(
                        family + " seed " + std::to_string(cfg.seed) + " r=" +
                        std::to_string(rec.r) + " took " + std::to_string(rec.duration));
                }
            }
        }
        if (!firstDigest.count(family))
        {
            firstDigest[family] = {cfg, r.trace.digest()};
        }
        return r;
    }

    std::size_t runs = 0;
    std::size_t simChecks = 0;
    std::size_t simMismatches = 0;
    std::size_t auditChecks = 0;
    std::size_t auditMismatches = 0;
    std::size_t finishConflicts = 0;
    std::size_t rollbackRuns = 0;
    std::size_t recoveries = 0;
    double worstRollbackRatio = 0;
    std::vector<std::string> agreementFailures;
    std::vector<std::string> rollbackFailures;
    std::vector<std::string> timingFailures;
    std::map<std::string, std::pair<ScenarioConfig, Digest>> firstDigest;
};

void
report(int id, std::string const& name, Verdict const& v)
{
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << id << "  " << name << "  ("
              << v.why.str() << ")" << std::endl;
}

Verdict
scheduleCriterion()
{
    Verdict v;
    Rational third(1, 3);
    std::vector<std::pair<Rational, Rational>> expect{
        {Rational(1, 3), Rational(1, 3)},
        {Rational(5, 9), Rational(5, 9)},
        {Rational(2, 3), Rational(2, 3)},
        {Rational(2, 3), Rational(2, 3)},
        {Rational(2, 3), Rational(2, 3)}};
    for (std::uint32_t r = 0; r < expect.size(); ++r)
    {
        auto g = resilienceSchedule(third, third, r);
        if (g.g1 != expect[r].first || g.g2 != expect[r].second)
        {
            v.fail("r=" + std::to_string(r) + " gave " + formatRational(g.g1) + ", " +
                   formatRational(g.g2));
        }
    }
    if (v.pass)
    {
        v.why << "g(0)=1/3 g(1)=5/9 g(2..4)=2/3 exact";
    }
    return v;
}

ScenarioConfig
attackConfig(std::string strategy, std::size_t f, Timeslot deltaStar, std::uint64_t seed)
{
    auto c = scenario(std::move(strategy), 9, f, deltaStar, seed);
    c.horizon = 400 + 42 * deltaStar;
    return c;
}

// Criteria 2 and 6 share one 200-seed sweep.
std::pair<Verdict, Verdict>
splitBrainCriteria(Corpus& corpus)
{
    Verdict one;
    Verdict tail;
    std::vector<std::uint32_t> v0s;
    for (std::uint64_t seed = 1; seed <= kSeedsTail; ++seed)
    {
        auto c = scenario("split-brain", 9, 4, 10, seed);
        auto r = corpus.run(c, "split-brain/10");
        auto tag = "seed " + std::to_string(seed) + ": ";
        if (r.report.recoveries.empty())
        {
            tail.fail(tag + "no recovery");
            one.fail(tag + "no recovery");
            continue;
        }
        v0s.push_back(r.report.recoveries.front().v0);
        if (seed > kSeedsOneViolation)
        {
            continue;
        }
        TraceIndex ix(r.trace);
        auto view = viewTrace(r.trace);
        if (r.report.violations != 1 || ix.violations.size() != 1)
        {
            one.fail(tag + std::to_string(r.report.violations) + " violations");
        }
        if (r.report.recoveries.size() != 1)
        {
            one.fail(tag + std::to_string(r.report.recoveries.size()) + " recoveries");
        }
        if (!r.report.passed())
        {
            one.fail(tag + "report failed");
        }
        auto guilty = ix.precommitEquivocators();
        for (auto p : view.correct)
        {
            auto const& last = view.states.at(p).back();
            auto removed = setMinus(allProcesses(9), last.piR);
            if (last.r != 2 || last.rec || removed.size() < 3)
            {
                one.fail(tag + "p" + std::to_string(p.value) + " removed " +
                         std::to_string(removed.size()));
            }
            for (auto q : removed)
            {
                if (!guilty.count(q.value) || !ix.faulty.count(q.value))
                {
                    one.fail(tag + "p" + std::to_string(q.value) + " removed without proof");
                }
            }
        }
    }
    if (one.pass)
    {
        one.why << kSeedsOneViolation << " seeds, 1 violation and 1 recovery each, "
                << ">= 3 equivocators removed";
    }

    auto n = static_cast<double>(v0s.size());
    for (std::uint32_t d = 1; d <= 5; ++d)
    {
        auto above = std::count_if(v0s.begin(), v0s.end(), [&](auto v) { return v > d; });
        double frac = above / n;
        double p = std::pow(4.0 / 9.0, d);
        double bound = p + kTailSigmas * std::sqrt(p * (1 - p) / n);
        tail.why << "d=" << d << " " << frac << "<=" << std::setprecision(3) << bound
                 << (d < 5 ? "; " : "");
        if (frac > bound)
        {
            tail.pass = false;
        }
    }
    if (v0s.size() != kSeedsTail)
    {
        tail.pass = false;
    }
    return {std::move(one), std::move(tail)};
}

Verdict
comboCriterion(Corpus& corpus)
{
    Verdict v;
    std::size_t twice = 0;
    std::size_t checked = 0;
    for (std::uint64_t seed = 1; seed <= kSeedsCombo; ++seed)
    {
        auto c = scenario("combo", 9, 5, 10, seed);
        c.horizon = 1000;
        auto r = corpus.run(c, "combo/10");
        auto tag = "seed " + std::to_string(seed) + ": ";
        if (r.report.violations > 2)
        {
            v.fail(tag + std::to_string(r.report.violations) + " violations");
        }
        if (!r.report.passed())
        {
            v.fail(tag + "report failed");
        }
        if (r.report.violations == 2)
        {
            ++twice;
            auto k = checkedCount(r.report);
            checked += k;
            if (k == 0)
            {
                v.fail(tag + "no transaction after the second recovery");
            }
        }
    }
    if (twice == 0)
    {
        v.fail("second violation never produced");
    }
    v.why << (v.pass ? "" : "; ") << twice << "/" << kSeedsCombo
          << " runs with 2 violations, " << checked << " transactions checked live";
    return v;
}

// Prefix held for exactly 2 Delta* then abandoned.
Trace
negativeControl(Timeslot deltaStar)
{
    ScenarioConfig cfg;
    cfg.n = 4;
    cfg.delays.deltaStar = deltaStar;
    cfg.horizon = 10 * deltaStar;
    Trace t;
    t.push({{"t", 0},
            {"kind", "config"},
            {"config", configToJson(cfg)},
            {"faulty", {4}},
            {"pi_star", {1, 2, 3, 4}}});
    auto state = [&](Timeslot at, std::uint32_t p, Log const& log) {
        t.push({{"t", at},
                {"kind", "state"},
                {"p", p},
                {"r", 1},
                {"rec", 0},
                {"log", encodeLog(log)},
                {"log_star", encodeLog(Log{})},
                {"log_g", encodeLog(Log{})},
                {"pi_r", encodeProcessSet(allProcesses(4))}});
    };
    state(0, 2, Log{"b"});
    state(0, 3, Log{"b"});
    state(deltaStar, 1, Log{"a"});
    state(3 * deltaStar, 1, Log{"b"});
    return t;
}

Verdict
rollbackCriterion(Corpus& corpus)
{
    Verdict v;
    for (auto ds : kDeltaStars)
    {
        for (auto const& id : strategyIds())
        {
            for (std::uint64_t seed = 1; seed <= kSeedsPerStrategy; ++seed)
            {
                corpus.run(attackConfig(id, 4, ds, seed), id + "/" + std::to_string(ds));
            }
        }
    }
    for (auto const& f : corpus.rollbackFailures)
    {
        v.fail(f + " rolled back too far");
    }
    for (auto ds : kDeltaStars)
    {
        auto rep = makeReport(negativeControl(ds));
        auto const* c = rep.check("rollback");
        if (!c || c->pass || rep.rollback != 2 * ds)
        {
            v.fail("negative control not flagged at delta_star " + std::to_string(ds));
        }
    }
    if (v.pass)
    {
        v.why << corpus.rollbackRuns << " runs below 2 delta_star (worst "
              << corpus.worstRollbackRatio << " delta_star), negative control flagged";
    }
    return v;
}

Verdict
recoveryTimeCriterion(Corpus const& corpus)
{
    Verdict v;
    for (auto const& f : corpus.timingFailures)
    {
        v.fail(f);
    }
    if (corpus.recoveries == 0)
    {
        v.fail("no recoveries measured");
    }
    if (v.pass)
    {
        v.why << corpus.recoveries << " recoveries within 2+8 v0 and 2+8(f+1) delta_star";
    }
    return v;
}

Verdict
finalizationCriterion(Corpus const& corpus)
{
    Verdict v;
    if (corpus.simMismatches != 0 || corpus.auditMismatches != 0)
    {
        v.fail(std::to_string(corpus.simMismatches + corpus.auditMismatches) +
               " mismatches");
    }
    if (corpus.auditChecks < kMinSnapshotChecks)
    {
        v.fail("only " + std::to_string(corpus.auditChecks) + " snapshot checks");
    }
    if (v.pass)
    {
        v.why << "0 mismatches in " << corpus.auditChecks << " replayed and "
              << corpus.simChecks << " in-run checks over " << corpus.runs << " traces";
    }
    return v;
}

Verdict
agreementCriterion(Corpus const& corpus)
{
    Verdict v;
    if (corpus.finishConflicts != 0)
    {
        v.fail(std::to_string(corpus.finishConflicts) + " recoveries with two finish-QCs");
    }
    for (auto const& f : corpus.agreementFailures)
    {
        v.fail(f);
    }
    if (v.pass)
    {
        v.why << "unique finish-QC, entry within delta_star and identical exit in "
              << corpus.runs << " traces";
    }
    return v;
}

Verdict
detectorCriterion()
{
    Verdict v;
    std::mt19937_64 rng(2026);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < kDetectorSets; ++i)
    {
        Fixture fx(3);
        auto msgs = randomPrecommitSet(rng, fx, 4 + i % (kDetectorMaxSize - 3));
        auto table = oracle::tabulate(msgs, [&](MessageSet const& m) {
            return oracle::naiveFinalize(fx.ctx, m.all());
        });
        bool expected = oracle::exhaustiveViolation(table);
        positives += expected;
        if (hasViolation(fx.ctx, setOf(msgs)) != expected)
        {
            v.fail("has_violation disagrees on set " + std::to_string(i));
        }
    }
    RecoveryPool pool;
    auto pi = allProcesses(4);
    std::map<int, std::size_t> byCount;
    for (std::size_t i = 0; i < kDetectorSets; ++i)
    {
        auto msgs = pool.draw(rng, kDetectorMaxSize);
        auto table = oracle::tabulate(msgs, [&](MessageSet const& m) {
            return oracle::naiveGlobalFinalize(m, pi, Log{});
        });
        auto [best, witness] = oracle::exhaustiveMaxViolations(table);
        ++byCount[best];
        if (countViolations(chainOf(msgs, witness), pi, Log{}) !=
            static_cast<std::size_t>(best))
        {
            v.fail("count_violations disagrees on set " + std::to_string(i));
        }
    }
    if (positives == 0 || byCount[1] == 0 || byCount[2] == 0)
    {
        v.fail("generator did not reach every outcome");
    }
    v.why << (v.pass ? "" : "; ") << kDetectorSets << " base sets (" << positives
          << " violating), " << kDetectorSets << " recovery sets (0/1/2 violations: "
          << byCount[0] << "/" << byCount[1] << "/" << byCount[2] << ")";
    return v;
}

Verdict
psyncCriterion(Corpus& corpus)
{
    Verdict v;
    std::size_t checked = 0;
    std::size_t runs = 0;
    for (std::size_t f = 0; f < 3; ++f)
    {
        for (auto const* id : {"passive", "honest", "split-brain"})
        {
            for (std::uint64_t seed = 1; seed <= kSeedsPsync; ++seed)
            {
                auto c = scenario(id, 9, f, std::nullopt, seed);
                c.delays.gst = 500;
                c.horizon = 1300;
                auto r = corpus.run(c, std::string("psync/") + id + "/" + std::to_string(f));
                ++runs;
                auto tag = std::string(id) + " f=" + std::to_string(f) + " seed " +
                           std::to_string(seed) + ": ";
                if (r.report.violations != 0)
                {
                    v.fail(tag + "violation");
                }
                auto k = checkedCount(r.report);
                checked += k;
                if (!r.report.passed() || k == 0)
                {
                    v.fail(tag + "liveness not shown");
                }
            }
        }
    }
    v.why << (v.pass ? "" : "; ") << runs << " runs, 0 violations, " << checked
          << " transactions final within ell after gst";
    return v;
}

Verdict
determinismCriterion(Corpus const& corpus)
{
    Verdict v;
    for (auto const& [family, first] : corpus.firstDigest)
    {
        if (runScenario(first.first).trace.digest() != first.second)
        {
            v.fail(family + " digest changed on rerun");
        }
    }
    if (v.pass)
    {
        v.why << corpus.firstDigest.size() << " scenarios replayed byte-identically";
    }
    return v;
}

} // namespace

int
main()
{
    auto start = std::chrono::steady_clock::now();
    Corpus corpus;
    std::map<int, std::pair<std::string, Verdict>> results;
    auto put = [&](int id, std::string name, Verdict v) {
        results.emplace(id, std::make_pair(std::move(name), std::move(v)));
    };

    put(1, "resilience schedule", scheduleCriterion());
    auto [one, tail] = splitBrainCriteria(corpus);
    put(2, "one-violation regime", std::move(one));
    put(3, "two-violation regime", comboCriterion(corpus));
    put(4, "rollback bound", rollbackCriterion(corpus));
    put(6, "probabilistic recovery time", std::move(tail));
    put(9, "detector equivalence", detectorCriterion());
    put(10, "partial-synchrony baseline", psyncCriterion(corpus));
    // These read everything the runs above recorded.
    put(5, "recovery time", recoveryTimeCriterion(corpus));
    put(7, "local finalization oracle", finalizationCriterion(corpus));
    put(8, "recovery agreement", agreementCriterion(corpus));
    put(11, "determinism", determinismCriterion(corpus));

    bool all = true;
    for (auto const& [id, r] : results)
    {
        report(id, r.first, r.second);
        all = all && r.second.pass;
    }
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    std::cout << corpus.runs << " runs in " << std::fixed << std::setprecision(1)
              << secs.count() << " s" << std::endl;
    return all ? 0 : 1;
}
