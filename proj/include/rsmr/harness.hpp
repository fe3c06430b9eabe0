// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/netsim.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace rsmr
{

using Rational = boost::multiprecision::cpp_rational;

/// Parses "a/b" or an integer.
Rational parseRational(std::string const& s);
std::string formatRational(Rational const& q);

struct Resilience
{
    Rational g1; // tolerated fraction for at most r violations
    Rational g2; // tolerated fraction for liveness after r violations
};

/// Throws std::invalid_argument unless rhoC + 2 rhoL = 1 and rhoC > 0.
Resilience resilienceSchedule(Rational const& rhoC, Rational const& rhoL,
                              std::uint32_t r);

/// x_r of the recursion x_0 = 0, x_{r+1} = x_r + rhoC (1 - x_r).
Rational resilienceX(Rational const& rhoC, std::uint32_t r);

/// Largest number of violations allowed with f of n faulty, or nullopt
/// when no bound applies (f/n at or above 1 - rhoL).
std::optional<std::uint32_t> violationAllowance(std::size_t f, std::size_t n);

/// Base liveness parameter for n' members.
Timeslot livenessBound(Timeslot delta, std::size_t nPrime);

/// Decoded view of a trace, shared by the measurements.
struct TraceView
{
    ScenarioConfig config;
    ProcessSet faulty;
    ProcessSet correct;
    Permutation piStar{{}};
    Timeslot deltaStar = 0;

    struct State
    {
        Timeslot t = 0;
        std::uint32_t r = 1;
        bool rec = false;
        Log log;
        Log logStar;
        Log logG;
        ProcessSet piR;
    };
    /// Per correct process, in time order, one entry per change.
    std::map<ProcessId, std::vector<State>> states;

    struct RecoveryEvent
    {
        Timeslot t;
        ProcessId p;
        std::uint32_t r;
        bool begin;
    };
    std::vector<RecoveryEvent> recoveryEvents;
    std::vector<Timeslot> violationTimes;
    Json summary;

    /// State of p at the end of slot t, or null before its first state.
    State const* stateAt(ProcessId p, Timeslot t) const;
};

TraceView viewTrace(Trace const& trace);

struct MeasurementError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Longest time an abandoned prefix was held by a correct process.
/// Throws MeasurementError when the trace ends mid-recovery.
Timeslot measureRollback(Trace const& trace);
Timeslot measureRollback(TraceView const& view);

struct RecoveryRecord
{
    std::uint32_t r = 0;
    Timeslot begin = 0;
    Timeslot end = 0;
    Timeslot duration = 0;
    std::uint32_t v0 = 0; // first view of Pi_r with a correct leader
    Timeslot bound = 0;   // 2 Delta* + 8 v0 Delta*
};

/// One record per completed recovery. Throws MeasurementError when a
/// recovery is still open at the horizon.
std::vector<RecoveryRecord> measureRecovery(Trace const& trace);
std::vector<RecoveryRecord> measureRecovery(TraceView const& view);

/// First view of Pi_r led by a correct process.
std::uint32_t firstCorrectView(Permutation const& piStar, ProcessSet const& piR,
                               ProcessSet const& faulty);

struct BoundCheck
{
    std::string name;
    bool pass = true;
    std::string detail;
};

inline constexpr int kReportSchemaVersion = 1;

struct RunReport
{
    std::uint64_t seed = 0;
    std::string strategy;
    std::size_t n = 0;
    ProcessSet faulty;
    std::size_t violations = 0;
    std::optional<Timeslot> rollback; // nullopt if the trace ended mid-recovery
    std::uint32_t firstView = 0;      // v0 of Pi_1 under the run's Pi*
    std::vector<RecoveryRecord> recoveries;
    std::map<ProcessId, Log> finalLogs;
    std::map<ProcessId, Log> finalStrongLogs;
    std::vector<BoundCheck> checks;
    std::string traceDigest;

    bool passed() const;
    BoundCheck const* check(std::string const& name) const;
};

/// Derives the report from the trace alone.
RunReport makeReport(Trace const& trace);

Json reportToJson(RunReport const& r);
/// Human-readable summary.
std::string formatReport(RunReport const& r);

struct AuditResult
{
    RunReport report;
    std::size_t snapshotChecks = 0;
    std::size_t finalizationMismatches = 0;
    std::size_t finishQcConflicts = 0; // rounds with two certified proposals
    bool genesisMonotone = true;
};

/// Replays message sets from the trace and rechecks local finalization
/// and genesis monotonicity independently of the simulator's own checks.
AuditResult audit(Trace const& trace);

struct SweepResult
{
    std::vector<RunReport> runs;
    std::map<std::size_t, std::size_t> violationHistogram;
    std::vector<Timeslot> durations; // sorted
    std::vector<std::uint32_t> firstViews; // v0 of Pi_1, per run
    std::vector<BoundCheck> checks;

    /// Fraction of runs whose first correct view exceeds d.
    double tailFraction(std::uint32_t d) const;
    /// Duration quantile, q in [0, 1]; 0 when no recovery happened.
    Timeslot durationQuantile(double q) const;
    bool passed() const;
};

SweepResult sweep(ScenarioConfig const& base, std::vector<std::uint64_t> const& seeds);
Json sweepToJson(SweepResult const& s);
std::string formatSweep(SweepResult const& s);

} // namespace rsmr
