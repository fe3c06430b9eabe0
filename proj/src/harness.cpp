// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace rsmr
{

namespace
{

std::size_t
commonPrefix(Log const& a, Log const& b)
{
    auto const& x = a.entries();
    auto const& y = b.entries();
    std::size_t k = 0;
    while (k < x.size() && k < y.size() && x[k] == y[k])
    {
        ++k;
    }
    return k;
}

bool
holds(Log const& log, Transaction const& tx)
{
    auto const& e = log.entries();
    return std::find(e.begin(), e.end(), tx) != e.end();
}

std::string
joinIds(ProcessSet const& s)
{
    std::string out;
    for (auto p : s)
    {
        out += (out.empty() ? "" : ",") + std::to_string(p.value);
    }
    return "{" + out + "}";
}

} // namespace

Rational
parseRational(std::string const& s)
{
    auto slash = s.find('/');
    try
    {
        if (slash == std::string::npos)
        {
            return Rational(std::stoll(s));
        }
        auto den = std::stoll(s.substr(slash + 1));
        if (den == 0)
        {
            throw std::invalid_argument("zero denominator");
        }
        return Rational(std::stoll(s.substr(0, slash))) / Rational(den);
    }
    catch (std::logic_error const&)
    {
        throw std::invalid_argument("not a fraction: " + s);
    }
}

std::string
formatRational(Rational const& q)
{
    return q.str();
}

Rational
resilienceX(Rational const& rhoC, std::uint32_t r)
{
    Rational x = 0;
    for (std::uint32_t k = 0; k < r; ++k)
    {
        x += rhoC * (1 - x);
    }
    return x;
}

Resilience
resilienceSchedule(Rational const& rhoC, Rational const& rhoL, std::uint32_t r)
{
    if (rhoC <= 0 || rhoL < 0 || rhoC + 2 * rhoL != 1)
    {
        throw std::invalid_argument(
            "resilience schedule needs rho_C > 0 and rho_C + 2 rho_L = 1");
    }
    Rational cap = 1 - rhoL;
    // x only grows, so iteration can stop once it passes the cap.
    Rational x = 0;
    std::uint32_t k = 0;
    for (; k < r && x < cap; ++k)
    {
        x += rhoC * (1 - x);
    }
    Rational g1 = x + rhoC * (1 - x);
    Rational g2 = x + rhoL * (1 - x);
    return Resilience{std::min(g1, cap), std::min(g2, cap)};
}

std::optional<std::uint32_t>
violationAllowance(std::size_t f, std::size_t n)
{
    Rational third(1, 3);
    Rational frac(static_cast<long long>(f), static_cast<long long>(n));
    if (frac >= 1 - third)
    {
        return std::nullopt;
    }
    for (std::uint32_t r = 0;; ++r)
    {
        if (frac < resilienceSchedule(third, third, r).g1)
        {
            return r;
        }
    }
}

Timeslot
livenessBound(Timeslot delta, std::size_t nPrime)
{
    return 8 * delta * static_cast<Timeslot>(nPrime);
}

TraceView::State const*
TraceView::stateAt(ProcessId p, Timeslot t) const
{
    auto it = states.find(p);
    if (it == states.end())
    {
        return nullptr;
    }
    auto const& v = it->second;
    auto pos = std::upper_bound(v.begin(), v.end(), t,
                                [](Timeslot x, State const& s) { return x < s.t; });
    return pos == v.begin() ? nullptr : &*std::prev(pos);
}

TraceView
viewTrace(Trace const& trace)
{
    auto const& events = trace.events();
    if (events.empty() || events.front().at("kind") != "config")
    {
        throw std::runtime_error("trace does not start with a config event");
    }
    TraceView v;
    v.summary = Json::object();
    auto const& head = events.front();
    v.config = configFromJson(head.at("config"));
    v.faulty = decodeProcessSet(head.at("faulty"));
    std::vector<ProcessId> order;
    for (auto const& p : head.at("pi_star"))
    {
        order.push_back(ProcessId{p.get<std::uint32_t>()});
    }
    v.piStar = Permutation(std::move(order));
    v.correct = setMinus(allProcesses(v.config.n), v.faulty);
    v.deltaStar = effectiveDeltaStar(v.config.delays);
    for (auto const& e : events)
    {
        auto const& kind = e.at("kind").get_ref<std::string const&>();
        if (kind == "state")
        {
            TraceView::State s;
            s.t = e.at("t");
            s.r = e.at("r");
            s.rec = e.at("rec").get<int>() != 0;
            s.log = decodeLog(e.at("log"));
            s.logStar = decodeLog(e.at("log_star"));
            s.logG = decodeLog(e.at("log_g"));
            s.piR = decodeProcessSet(e.at("pi_r"));
            v.states[ProcessId{e.at("p").get<std::uint32_t>()}].push_back(
                std::move(s));
        }
        else if (kind == "recovery_begin" || kind == "recovery_end")
        {
            v.recoveryEvents.push_back({e.at("t").get<Timeslot>(),
                                        ProcessId{e.at("p").get<std::uint32_t>()},
                                        e.at("r").get<std::uint32_t>(),
                                        kind == "recovery_begin"});
        }
        else if (kind == "violation")
        {
            v.violationTimes.push_back(e.at("t"));
        }
        else if (kind == "summary")
        {
            v.summary = e;
        }
    }
    return v;
}

Timeslot
measureRollback(Trace const& trace)
{
    return measureRollback(viewTrace(trace));
}

Timeslot
measureRollback(TraceView const& view)
{
    std::vector<Log> finals;
    for (auto const& [p, ss] : view.states)
    {
        if (ss.back().rec)
        {
            throw MeasurementError("trace ends while p" +
                                   std::to_string(p.value) + " is recovering");
        }
        finals.push_back(ss.back().log);
    }
    auto end = view.config.horizon + 1;
    Timeslot worst = 0;
    for (auto const& [p, ss] : view.states)
    {
        // since[k] = slot from which the prefix of length k+1 has been held.
        std::vector<Timeslot> since;
        Log current;
        auto close = [&](Log const& held, std::size_t keep, Timeslot t) {
            auto safe = held.size();
            for (auto const& f : finals)
            {
                safe = std::min(safe, commonPrefix(held, f));
            }
            for (auto k = std::max(keep, safe); k < since.size(); ++k)
            {
                worst = std::max(worst, t - since[k]);
            }
            since.resize(keep);
        };
        for (auto const& s : ss)
        {
            auto keep = commonPrefix(current, s.log);
            close(current, keep, s.t);
            since.resize(s.log.size(), s.t);
            current = s.log;
        }
        close(current, 0, end);
    }
    return worst;
}

std::uint32_t
firstCorrectView(Permutation const& piStar, ProcessSet const& piR,
                 ProcessSet const& faulty)
{
    auto order = inducedPermutation(piStar, piR);
    for (std::size_t v = 1; v <= order.size(); ++v)
    {
        if (!contains(faulty, order.at(v)))
        {
            return static_cast<std::uint32_t>(v);
        }
    }
    throw std::logic_error("Pi_r has no correct member");
}

std::vector<RecoveryRecord>
measureRecovery(Trace const& trace)
{
    return measureRecovery(viewTrace(trace));
}

std::vector<RecoveryRecord>
measureRecovery(TraceView const& view)
{
    struct Span
    {
        std::optional<Timeslot> begin;
        std::optional<Timeslot> end;
        std::set<ProcessId> open;
        ProcessId first{0};
    };
    std::map<std::uint32_t, Span> spans;
    for (auto const& e : view.recoveryEvents)
    {
        auto& s = spans[e.r];
        if (e.begin)
        {
            if (!s.begin || e.t < *s.begin)
            {
                s.begin = e.t;
                s.first = e.p;
            }
            s.open.insert(e.p);
        }
        else
        {
            s.end = std::max(s.end.value_or(e.t), e.t);
            s.open.erase(e.p);
        }
    }
    std::vector<RecoveryRecord> out;
    for (auto const& [r, s] : spans)
    {
        if (!s.begin || !s.end || !s.open.empty())
        {
            throw MeasurementError("recovery " + std::to_string(r) +
                                   " is still open at the horizon");
        }
        auto const* st = view.stateAt(s.first, *s.begin);
        if (!st || st->r != r)
        {
            throw MeasurementError("no state for recovery " + std::to_string(r));
        }
        RecoveryRecord rec;
        rec.r = r;
        rec.begin = *s.begin;
        rec.end = *s.end;
        rec.duration = rec.end - rec.begin;
        rec.v0 = firstCorrectView(view.piStar, st->piR, view.faulty);
        rec.bound = 2 * view.deltaStar + 8 * rec.v0 * view.deltaStar;
        out.push_back(rec);
    }
    return out;
}

bool
RunReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(),
                       [](BoundCheck const& c) { return c.pass; });
}

BoundCheck const*
RunReport::check(std::string const& name) const
{
    for (auto const& c : checks)
    {
        if (c.name == name)
        {
            return &c;
        }
    }
    return nullptr;
}

namespace
{

// Entry and exit agreement, per recovery.
void
checkRecoveryAgreement(TraceView const& view, std::vector<BoundCheck>& checks)
{
    std::map<std::uint32_t, std::vector<Timeslot>> begins;
    std::map<std::uint32_t, std::vector<Timeslot>> ends;
    for (auto const& e : view.recoveryEvents)
    {
        (e.begin ? begins : ends)[e.r].push_back(e.t);
    }
    auto spread = [](std::vector<Timeslot> const& ts) {
        auto [lo, hi] = std::minmax_element(ts.begin(), ts.end());
        return *hi - *lo;
    };
    BoundCheck entry{"recovery_entry_spread", true, ""};
    for (auto const& [r, ts] : begins)
    {
        if (spread(ts) > view.deltaStar)
        {
            entry.pass = false;
            entry.detail += "r=" + std::to_string(r) + " spread " +
                            std::to_string(spread(ts)) + "; ";
        }
    }
    BoundCheck exit{"recovery_exit_agreement", true, ""};
    for (auto const& [r, ts] : ends)
    {
        if (spread(ts) > view.deltaStar)
        {
            exit.pass = false;
            exit.detail += "r=" + std::to_string(r) + " spread " +
                           std::to_string(spread(ts)) + "; ";
        }
        std::optional<std::pair<ProcessSet, Log>> agreed;
        for (auto const& [p, ss] : view.states)
        {
            auto it = std::find_if(ss.begin(), ss.end(), [&](auto const& s) {
                return s.r == r + 1;
            });
            if (it == ss.end())
            {
                continue;
            }
            std::pair<ProcessSet, Log> mine{it->piR, it->logG};
            if (!agreed)
            {
                agreed = mine;
            }
            else if (*agreed != mine)
            {
                exit.pass = false;
                exit.detail += "r=" + std::to_string(r) + " p" +
                               std::to_string(p.value) + " disagrees; ";
            }
        }
    }
    checks.push_back(std::move(entry));
    checks.push_back(std::move(exit));
}

bool
genesisMonotone(TraceView const& view)
{
    for (auto const& [p, ss] : view.states)
    {
        for (std::size_t k = 1; k < ss.size(); ++k)
        {
            if (ss[k].r > ss[k - 1].r && !isPrefix(ss[k - 1].logG, ss[k].logG))
            {
                return false;
            }
        }
    }
    return true;
}

BoundCheck
checkLiveness(TraceView const& view, std::size_t violations,
              std::vector<RecoveryRecord> const& recs)
{
    BoundCheck c{"liveness", true, ""};
    auto const& cfg = view.config;
    Rational third(1, 3);
    Rational frac(static_cast<long long>(view.faulty.size()),
                  static_cast<long long>(cfg.n));
    if (frac >= resilienceSchedule(third, third,
                                   static_cast<std::uint32_t>(violations))
                    .g2)
    {
        c.detail = "not asserted at this fault level";
        return c;
    }
    Timeslot anchor = cfg.delays.gst;
    for (auto const& r : recs)
    {
        anchor = std::max(anchor, r.end);
    }
    std::size_t members = cfg.n;
    for (auto const& [p, ss] : view.states)
    {
        members = ss.back().piR.size();
    }
    auto ell = livenessBound(cfg.delays.delta, members);
    std::size_t checked = 0;
    std::size_t late = 0;
    for (auto const& tx : cfg.txs)
    {
        if (!contains(view.correct, tx.to))
        {
            continue;
        }
        auto deadline = std::max(anchor, tx.t) + ell;
        if (deadline > cfg.horizon)
        {
            continue;
        }
        ++checked;
        for (auto p : view.correct)
        {
            auto const* s = view.stateAt(p, deadline);
            if (!s || !holds(s->log, tx.tx))
            {
                ++late;
                if (c.pass)
                {
                    c.detail = tx.tx.payload + " missing at p" +
                               std::to_string(p.value) + " by " +
                               std::to_string(deadline) + "; ";
                }
                c.pass = false;
                break;
            }
        }
    }
    c.detail += std::to_string(checked) + " checked, " + std::to_string(late) +
                " late, ell " + std::to_string(ell);
    return c;
}

} // namespace

RunReport
makeReport(Trace const& trace)
{
    auto view = viewTrace(trace);
    auto const& cfg = view.config;
    RunReport rep;
    rep.seed = cfg.seed;
    rep.strategy = cfg.strategy;
    rep.n = cfg.n;
    rep.faulty = view.faulty;
    rep.violations = view.violationTimes.size();
    rep.firstView = firstCorrectView(view.piStar, allProcesses(cfg.n), view.faulty);
    rep.traceDigest = trace.digest().hex();
    for (auto const& [p, ss] : view.states)
    {
        rep.finalLogs[p] = ss.back().log;
        rep.finalStrongLogs[p] = ss.back().logStar;
    }

    BoundCheck stable{"stable_horizon", true, ""};
    try
    {
        rep.rollback = measureRollback(view);
        rep.recoveries = measureRecovery(view);
    }
    catch (MeasurementError const& e)
    {
        stable.pass = false;
        stable.detail = e.what();
    }
    rep.checks.push_back(stable);

    BoundCheck allowance{"violation_allowance", true, ""};
    if (auto a = violationAllowance(view.faulty.size(), cfg.n))
    {
        allowance.pass = rep.violations <= *a;
        allowance.detail = std::to_string(rep.violations) + " <= " + std::to_string(*a);
    }
    else
    {
        allowance.detail = "no bound at this fault level";
    }
    rep.checks.push_back(allowance);

    // The timing bounds presuppose Delta* synchrony.
    if (cfg.delays.deltaStar)
    {
        BoundCheck rb{"rollback", true, ""};
        if (rep.rollback)
        {
            rb.pass = *rep.rollback < 2 * view.deltaStar;
            rb.detail = std::to_string(*rep.rollback) + " < " +
                        std::to_string(2 * view.deltaStar);
        }
        rep.checks.push_back(rb);
        BoundCheck rt{"recovery_time", true, ""};
        for (auto const& r : rep.recoveries)
        {
            rt.detail += "r=" + std::to_string(r.r) + " " +
                         std::to_string(r.duration) + "/" +
                         std::to_string(r.bound) + "; ";
            rt.pass = rt.pass && r.duration <= r.bound;
        }
        rep.checks.push_back(rt);
        checkRecoveryAgreement(view, rep.checks);
    }
    rep.checks.push_back({"genesis_monotone", genesisMonotone(view), ""});

    auto mism = view.summary.value("finalization_mismatches", std::size_t{0});
    rep.checks.push_back({"local_finalization", mism == 0,
                          std::to_string(mism) + " mismatches in " +
                              std::to_string(view.summary.value(
                                  "finalization_checks", std::size_t{0})) +
                              " checks"});
    auto breaches = view.summary.value("envelope_breaches", std::size_t{0});
    rep.checks.push_back({"delivery_envelope", breaches == 0,
                          std::to_string(breaches) + " breaches"});
    if (stable.pass)
    {
        rep.checks.push_back(checkLiveness(view, rep.violations, rep.recoveries));
    }
    return rep;
}

Json
reportToJson(RunReport const& r)
{
    auto logs = [](std::map<ProcessId, Log> const& m) {
        auto out = Json::object();
        for (auto const& [p, l] : m)
        {
            out[std::to_string(p.value)] = encodeLog(l);
        }
        return out;
    };
    auto recs = Json::array();
    for (auto const& x : r.recoveries)
    {
        recs.push_back({{"r", x.r},
                        {"begin", x.begin},
                        {"end", x.end},
                        {"duration", x.duration},
                        {"v0", x.v0},
                        {"bound", x.bound}});
    }
    auto checks = Json::array();
    for (auto const& c : r.checks)
    {
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    return Json{{"schema_version", kReportSchemaVersion},
                {"seed", r.seed},
                {"strategy", r.strategy},
                {"n", r.n},
                {"faulty", encodeProcessSet(r.faulty)},
                {"violations", r.violations},
                {"rollback", r.rollback ? Json(*r.rollback) : Json(nullptr)},
                {"first_correct_view", r.firstView},
                {"recoveries", std::move(recs)},
                {"final_logs", logs(r.finalLogs)},
                {"final_strong_logs", logs(r.finalStrongLogs)},
                {"checks", std::move(checks)},
                {"passed", r.passed()},
                {"trace_digest", r.traceDigest}};
}

std::string
formatReport(RunReport const& r)
{
    std::ostringstream out;
    out << "seed " << r.seed << "  strategy " << r.strategy << "  n " << r.n
        << "  faulty " << joinIds(r.faulty) << "\n";
    out << "violations " << r.violations << "  rollback "
        << (r.rollback ? std::to_string(*r.rollback) : "n/a")
        << "  first correct view " << r.firstView << "\n";
    for (auto const& x : r.recoveries)
    {
        out << "recovery r=" << x.r << "  begin " << x.begin << "  end " << x.end
            << "  duration " << x.duration << "  v0 " << x.v0 << "  bound "
            << x.bound << "\n";
    }
    for (auto const& c : r.checks)
    {
        out << (c.pass ? "  ok    " : "  FAIL  ") << c.name;
        if (!c.detail.empty())
        {
            out << "  (" << c.detail << ")";
        }
        out << "\n";
    }
    for (auto const& [p, l] : r.finalLogs)
    {
        out << "p" << p.value << "  |log| " << l.size() << "  |log*| "
            << r.finalStrongLogs.at(p).size() << "\n";
    }
    out << "digest " << r.traceDigest << "\n";
    return out.str();
}

AuditResult
audit(Trace const& trace)
{
    AuditResult res;
    res.report = makeReport(trace);
    auto view = viewTrace(trace);
    auto pi = allProcesses(view.config.n);
    auto const& genesis = view.config.genesisLog;

    MessageDecoder decoder;
    MessageSet all;
    std::map<ProcessId, MessageSet> held;
    std::map<ProcessId, std::pair<std::size_t, Log>> cache;

    auto const& events = trace.events();
    std::size_t i = 0;
    for (Timeslot t = 0; t <= view.config.horizon; ++t)
    {
        for (; i < events.size() && events[i].at("t").get<Timeslot>() <= t; ++i)
        {
            auto const& e = events[i];
            auto const& kind = e.at("kind").get_ref<std::string const&>();
            if (kind == "send")
            {
                decoder.addDefinitions(e.at("defs"));
                auto m = decoder.get(e.at("id"));
                all.insert(m);
                ProcessId from{e.at("from").get<std::uint32_t>()};
                if (contains(view.correct, from))
                {
                    held[from].insert(m);
                }
            }
            else if (kind == "deliver")
            {
                held[ProcessId{e.at("to").get<std::uint32_t>()}].insert(
                    decoder.get(e.at("id")));
            }
        }
        for (auto p : view.correct)
        {
            auto const* s = view.stateAt(p, t);
            if (!s)
            {
                continue;
            }
            auto& m = held[p];
            auto& [count, f] = cache[p];
            if (count != m.size() || m.size() == 0)
            {
                f = globalFinalize(m, pi, genesis).log;
                count = m.size();
            }
            ++res.snapshotChecks;
            if (f != s->log)
            {
                ++res.finalizationMismatches;
            }
        }
    }

    // Every certified proposal must be unique per recovery.
    std::map<std::uint32_t, ProcessSet> piByR;
    for (auto const& [p, ss] : view.states)
    {
        for (auto const& s : ss)
        {
            piByR.emplace(s.r, s.piR);
        }
    }
    for (auto const& [r, piR] : piByR)
    {
        if (validFinishQcs(all, r, piR).size() > 1)
        {
            ++res.finishQcConflicts;
        }
    }
    res.genesisMonotone = genesisMonotone(view);
    res.report.checks.push_back(
        {"audit_local_finalization", res.finalizationMismatches == 0,
         std::to_string(res.finalizationMismatches) + " mismatches in " +
             std::to_string(res.snapshotChecks) + " replayed checks"});
    res.report.checks.push_back({"audit_unique_finish", res.finishQcConflicts == 0,
                                 std::to_string(res.finishQcConflicts) +
                                     " recoveries with two certified proposals"});
    return res;
}

double
SweepResult::tailFraction(std::uint32_t d) const
{
    if (firstViews.empty())
    {
        return 0.0;
    }
    auto k = std::count_if(firstViews.begin(), firstViews.end(),
                           [d](std::uint32_t v) { return v > d; });
    return static_cast<double>(k) / static_cast<double>(firstViews.size());
}

Timeslot
SweepResult::durationQuantile(double q) const
{
    if (durations.empty())
    {
        return 0;
    }
    auto idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(durations.size())));
    return durations[std::min(durations.size() - 1, idx == 0 ? 0 : idx - 1)];
}

bool
SweepResult::passed() const
{
    return std::all_of(runs.begin(), runs.end(),
                       [](RunReport const& r) { return r.passed(); }) &&
           std::all_of(checks.begin(), checks.end(),
                       [](BoundCheck const& c) { return c.pass; });
}

SweepResult
sweep(ScenarioConfig const& base, std::vector<std::uint64_t> const& seeds)
{
    SweepResult s;
    std::size_t faulty = 0;
    for (auto seed : seeds)
    {
        auto cfg = base;
        cfg.seed = seed;
        auto out = runScenario(cfg);
        auto rep = makeReport(out.trace);
        faulty = rep.faulty.size();
        ++s.violationHistogram[rep.violations];
        for (auto const& r : rep.recoveries)
        {
            s.durations.push_back(r.duration);
        }
        s.firstViews.push_back(rep.firstView);
        s.runs.push_back(std::move(rep));
    }
    std::sort(s.durations.begin(), s.durations.end());
    if (seeds.size() > 1 && faulty > 0)
    {
        // Geometric tail of the first correct leader's position.
        auto rho = static_cast<double>(faulty) / static_cast<double>(base.n);
        auto total = static_cast<double>(seeds.size());
        BoundCheck tail{"first_view_tail", true, ""};
        for (std::uint32_t d = 1; d <= 5; ++d)
        {
            auto p = std::pow(rho, d);
            auto limit = p + 3.0 * std::sqrt(p * (1 - p) / total);
            auto got = s.tailFraction(d);
            tail.pass = tail.pass && got <= limit;
            std::ostringstream line;
            line << "d=" << d << " " << got << "<=" << limit << "; ";
            tail.detail += line.str();
        }
        s.checks.push_back(std::move(tail));
    }
    return s;
}

Json
sweepToJson(SweepResult const& s)
{
    auto runs = Json::array();
    for (auto const& r : s.runs)
    {
        runs.push_back(reportToJson(r));
    }
    auto hist = Json::object();
    for (auto const& [k, v] : s.violationHistogram)
    {
        hist[std::to_string(k)] = v;
    }
    auto tail = Json::array();
    for (std::uint32_t d = 1; d <= 5; ++d)
    {
        tail.push_back({{"d", d}, {"fraction", s.tailFraction(d)}});
    }
    auto checks = Json::array();
    for (auto const& c : s.checks)
    {
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    return Json{{"schema_version", kReportSchemaVersion},
                {"runs", std::move(runs)},
                {"violation_histogram", std::move(hist)},
                {"duration_quantiles",
                 {{"p50", s.durationQuantile(0.5)},
                  {"p90", s.durationQuantile(0.9)},
                  {"max", s.durationQuantile(1.0)}}},
                {"first_view_tail", std::move(tail)},
                {"checks", std::move(checks)},
                {"passed", s.passed()}};
}

std::string
formatSweep(SweepResult const& s)
{
    std::ostringstream out;
    out << "seed      viol  rollback  recoveries  v0  result\n";
    for (auto const& r : s.runs)
    {
        out << std::left << std::setw(10) << r.seed << std::setw(6) << r.violations
            << std::setw(10) << (r.rollback ? std::to_string(*r.rollback) : "n/a")
            << std::setw(12) << r.recoveries.size() << std::setw(4) << r.firstView
            << (r.passed() ? "ok" : "FAIL") << "\n";
    }
    out << "violations:";
    for (auto const& [k, v] : s.violationHistogram)
    {
        out << " " << k << "x" << v;
    }
    out << "\nrecovery duration p50 " << s.durationQuantile(0.5) << "  p90 "
        << s.durationQuantile(0.9) << "  max " << s.durationQuantile(1.0) << "\n";
    for (auto const& c : s.checks)
    {
        out << (c.pass ? "ok    " : "FAIL  ") << c.name << "  (" << c.detail << ")\n";
    }
    auto failed = std::count_if(s.runs.begin(), s.runs.end(),
                                [](RunReport const& r) { return !r.passed(); });
    out << s.runs.size() - static_cast<std::size_t>(failed) << "/" << s.runs.size()
        << " runs passed\n";
    return out.str();
}

} // namespace rsmr
