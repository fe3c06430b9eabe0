// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/codec.hpp"
#include "rsmr/global_finalize.hpp"

#include <functional>
#include <random>

namespace rsmr
{

struct DelayModel
{
    Timeslot delta = 2;
    std::optional<Timeslot> deltaStar = 10; // nullopt: no bound before GST
    Timeslot gst = 0;
};

/// Clamps the requested delivery slot (nullopt = as late as possible) to
/// the envelope. Self-delivery is immediate.
Timeslot scheduleDelivery(DelayModel const& model, Timeslot sendTime,
                          ProcessId src, ProcessId dst,
                          std::optional<Timeslot> choice);

/// Delta* the wrapper runs with. Without a bound its timers never matter
/// for the checked properties, so a generous value is used.
Timeslot effectiveDeltaStar(DelayModel const& model);

/// Latest slot the envelope allows for a message sent at sendTime.
Timeslot latestDelivery(DelayModel const& model, Timeslot sendTime);

enum class DeliveryPolicy : std::uint8_t
{
    Max,
    Uniform,
    Min,
};

struct TxInjection
{
    Timeslot t = 0;
    ProcessId to;
    Transaction tx;
};

/// Periodic groups of transactions sent to one correct process.
struct TxBursts
{
    Timeslot start = 1;
    Timeslot every = 35;
    std::size_t size = 3;
    Timeslot until = 0; // 0: horizon / 2
};

struct ScenarioConfig
{
    std::size_t n = 4;
    std::optional<ProcessSet> faulty;
    std::size_t faultyCount = 0;
    DelayModel delays;
    Timeslot horizon = 400;
    std::vector<Timeslot> startOffsets;
    std::vector<TxInjection> txs;
    std::optional<TxBursts> bursts;
    std::string strategy = "passive";
    Json strategyParams = Json::object();
    DeliveryPolicy policy = DeliveryPolicy::Uniform;
    Log genesisLog;
    std::uint64_t seed = 1;
    bool checkFinalization = true;
};

ScenarioConfig configFromJson(Json const& j);
Json configToJson(ScenarioConfig const& c);

/// Throws std::invalid_argument when the configuration breaks the model.
void validateConfig(ScenarioConfig const& c);

/// JSON-lines trace. Each event is one object with "t" and "kind".
class Trace
{
  public:
    void
    push(Json event)
    {
        mEvents.push_back(std::move(event));
    }
    std::vector<Json> const&
    events() const
    {
        return mEvents;
    }
    /// SHA-256 over the serialized lines.
    Digest digest() const;
    void write(std::ostream& out) const;
    static Trace read(std::istream& in);

  private:
    std::vector<Json> mEvents;
};

class Simulation;

/// Byzantine controller of the faulty processes. Sees everything.
class Adversary
{
  public:
    virtual ~Adversary() = default;
    virtual void init(Simulation& sim) = 0;
    /// Called once per slot after deliveries and before correct steps.
    /// inbox holds what each faulty process received this slot.
    virtual void step(Simulation& sim, Timeslot t,
                      std::map<ProcessId, std::vector<MsgPtr>> const& inbox) = 0;
    /// Requested delivery slot for a message sent by a correct process.
    virtual std::optional<std::optional<Timeslot>>
    delayFor(MsgPtr const&, ProcessId, ProcessId, Timeslot)
    {
        return std::nullopt;
    }
};

using AdversaryFactory =
    std::function<std::unique_ptr<Adversary>(ScenarioConfig const&)>;

/// Called at the end of every slot.
using SlotHook = std::function<void(Simulation const&, Timeslot)>;

struct RunStats
{
    std::size_t finalizationChecks = 0;
    std::size_t finalizationMismatches = 0;
    std::size_t violations = 0;
    std::size_t deliveries = 0;
    std::size_t envelopeBreaches = 0;
};

struct RunOutput
{
    Trace trace;
    RunStats stats;
    ProcessSet faulty;
    Permutation piStar{{}};
    /// Final per-process view, correct processes only.
    std::map<ProcessId, Log> finalLogs;
    std::map<ProcessId, Log> finalStrongLogs;
};

class Simulation
{
  public:
    Simulation(ScenarioConfig cfg, std::unique_ptr<Adversary> adversary);

    RunOutput run(SlotHook hook = {});

    ScenarioConfig const&
    config() const
    {
        return mCfg;
    }
    ProcessSet const&
    faulty() const
    {
        return mFaulty;
    }
    ProcessSet const&
    correct() const
    {
        return mCorrect;
    }
    Permutation const&
    piStar() const
    {
        return mPiStar;
    }
    WrapperConfig wrapperConfig() const;
    /// Wrapper of a correct process, or null before its clock starts.
    Wrapper const* process(ProcessId id) const;
    KeyRing const&
    keys() const
    {
        return mKeys;
    }
    Timeslot
    now() const
    {
        return mNow;
    }
    /// Every message sent by anyone so far.
    MessageSet const&
    observed() const
    {
        return mObserved;
    }
    std::mt19937_64&
    rng()
    {
        return mRng;
    }

    /// Adversary sends a message signed by a faulty process. `at` maps
    /// recipients to requested slots; recipients not listed get none.
    void adversarySend(MsgPtr const& m,
                       std::map<ProcessId, std::optional<Timeslot>> const& at);
    /// Convenience: to every process, as late as allowed or as given.
    void adversaryBroadcast(MsgPtr const& m,
                            std::optional<Timeslot> at = std::nullopt);
    /// To every process with the run's delivery policy, as a correct
    /// process would.
    void adversaryForward(MsgPtr const& m);
    /// Delivery slot drawn from the run's policy for a send at `sent`.
    std::optional<Timeslot> policyChoice(Timeslot sent);

  private:
    struct Pending
    {
        MsgPtr msg;
        ProcessId from;
        ProcessId to;
        Timeslot sent;
    };

    void schedule(MsgPtr const& m, ProcessId from, ProcessId to,
                  std::optional<Timeslot> choice);
    void recordSend(MsgPtr const& m, ProcessId from);
    void snapshot(Timeslot t);

    ScenarioConfig mCfg;
    std::unique_ptr<Adversary> mAdversary;
    KeyRing mKeys;
    ProcessSet mFaulty;
    ProcessSet mCorrect;
    Permutation mPiStar{{}};
    std::mt19937_64 mRng;
    Timeslot mNow = 0;

    std::map<ProcessId, std::unique_ptr<Wrapper>> mProcs;
    std::map<ProcessId, std::vector<MsgPtr>> mBacklog; // before clock start
    std::map<ProcessId, std::unordered_set<Digest, DigestHash>> mReceived;
    std::map<Timeslot, std::vector<Pending>> mQueue;
    MessageSet mObserved;
    MessageSet mCorrectUnion;
    MessageEncoder mEncoder;
    Trace mTrace;
    RunStats mStats;

    struct ProcTrack
    {
        Json lastState;
        std::size_t msgCount = SIZE_MAX;
        Log lastFinal;
        bool haveFinal = false;
        std::size_t breaks = 0;
    };
    std::map<ProcessId, ProcTrack> mTrack;
    std::size_t mUnionCount = SIZE_MAX;
    Log mUnionFinal;
    bool mHaveUnionFinal = false;
    std::size_t mUnionBreaks = 0;
};

/// Builds the strategy named in the config. Defined by the adversary
/// module.
std::unique_ptr<Adversary> makeAdversary(ScenarioConfig const& cfg);

/// run() with the configured strategy.
RunOutput runScenario(ScenarioConfig const& cfg, SlotHook hook = {});

} // namespace rsmr
