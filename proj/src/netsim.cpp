// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/netsim.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace rsmr
{

namespace
{

char const*
policyName(DeliveryPolicy p)
{
    switch (p)
    {
    case DeliveryPolicy::Max:
        return "max";
    case DeliveryPolicy::Uniform:
        return "uniform";
    case DeliveryPolicy::Min:
        return "min";
    }
    return "?";
}

DeliveryPolicy
policyFromName(std::string const& s)
{
    if (s == "max")
    {
        return DeliveryPolicy::Max;
    }
    if (s == "uniform")
    {
        return DeliveryPolicy::Uniform;
    }
    if (s == "min")
    {
        return DeliveryPolicy::Min;
    }
    throw std::invalid_argument("unknown delivery policy " + s);
}

std::uint64_t
draw(std::mt19937_64& rng, std::uint64_t bound)
{
    return uniformBelow(bound, [&] { return rng(); });
}

} // namespace

Timeslot
effectiveDeltaStar(DelayModel const& model)
{
    return model.deltaStar.value_or(
        std::max<Timeslot>(model.gst + model.delta, 1));
}

Timeslot
latestDelivery(DelayModel const& model, Timeslot sendTime)
{
    auto latest = std::max(model.gst, sendTime) + model.delta;
    if (model.deltaStar)
    {
        latest = std::min(latest, sendTime + *model.deltaStar);
    }
    return std::max(latest, sendTime + 1);
}

Timeslot
scheduleDelivery(DelayModel const& model, Timeslot sendTime, ProcessId src,
                 ProcessId dst, std::optional<Timeslot> choice)
{
    if (src == dst)
    {
        return sendTime;
    }
    auto latest = latestDelivery(model, sendTime);
    if (!choice)
    {
        return latest;
    }
    return std::clamp(*choice, sendTime + 1, latest);
}

ScenarioConfig
configFromJson(Json const& j)
{
    ScenarioConfig c;
    c.n = j.value("n", c.n);
    if (j.contains("faulty") && j["faulty"].is_array())
    {
        c.faulty = decodeProcessSet(j["faulty"]);
    }
    c.faultyCount = j.value("faulty_count", c.faultyCount);
    c.delays.delta = j.value("delta", c.delays.delta);
    if (j.contains("delta_star") && !j["delta_star"].is_null())
    {
        c.delays.deltaStar = j["delta_star"].get<Timeslot>();
    }
    else
    {
        c.delays.deltaStar.reset();
    }
    c.delays.gst = j.value("gst", c.delays.gst);
    c.horizon = j.value("horizon", c.horizon);
    if (j.contains("start_offsets"))
    {
        c.startOffsets = j["start_offsets"].get<std::vector<Timeslot>>();
    }
    if (j.contains("txs"))
    {
        for (auto const& e : j["txs"])
        {
            c.txs.push_back(TxInjection{e.at("t").get<Timeslot>(),
                                        ProcessId{e.at("to").get<std::uint32_t>()},
                                        Transaction{e.at("tx").get<std::string>()}});
        }
    }
    if (j.contains("tx_bursts") && !j["tx_bursts"].is_null())
    {
        auto const& b = j["tx_bursts"];
        TxBursts bursts;
        bursts.start = b.value("start", bursts.start);
        bursts.every = b.value("every", bursts.every);
        bursts.size = b.value("size", bursts.size);
        bursts.until = b.value("until", bursts.until);
        c.bursts = bursts;
    }
    if (j.contains("strategy"))
    {
        auto const& s = j["strategy"];
        if (s.is_string())
        {
            c.strategy = s.get<std::string>();
        }
        else
        {
            c.strategy = s.at("id").get<std::string>();
            c.strategyParams = s.value("params", Json::object());
        }
    }
    if (j.contains("policy"))
    {
        c.policy = policyFromName(j["policy"].get<std::string>());
    }
    if (j.contains("genesis_log"))
    {
        c.genesisLog = decodeLog(j["genesis_log"]);
    }
    c.seed = j.value("seed", c.seed);
    c.checkFinalization = j.value("check_finalization", c.checkFinalization);
    return c;
}

Json
configToJson(ScenarioConfig const& c)
{
    Json j{{"n", c.n},
           {"faulty_count", c.faultyCount},
           {"delta", c.delays.delta},
           {"delta_star", c.delays.deltaStar ? Json(*c.delays.deltaStar)
                                             : Json(nullptr)},
           {"gst", c.delays.gst},
           {"horizon", c.horizon},
           {"start_offsets", c.startOffsets},
           {"strategy", {{"id", c.strategy}, {"params", c.strategyParams}}},
           {"policy", policyName(c.policy)},
           {"genesis_log", encodeLog(c.genesisLog)},
           {"seed", c.seed},
           {"check_finalization", c.checkFinalization}};
    j["faulty"] = c.faulty ? encodeProcessSet(*c.faulty) : Json(nullptr);
    auto txs = Json::array();
    for (auto const& tx : c.txs)
    {
        txs.push_back({{"t", tx.t}, {"to", tx.to.value}, {"tx", tx.tx.payload}});
    }
    j["txs"] = std::move(txs);
    if (c.bursts)
    {
        j["tx_bursts"] = {{"start", c.bursts->start},
                          {"every", c.bursts->every},
                          {"size", c.bursts->size},
                          {"until", c.bursts->until}};
    }
    else
    {
        j["tx_bursts"] = nullptr;
    }
    return j;
}

void
validateConfig(ScenarioConfig const& c)
{
    auto fail = [](std::string const& why) {
        throw std::invalid_argument("invalid scenario: " + why);
    };
    if (c.n == 0)
    {
        fail("n must be positive");
    }
    auto f = c.faulty ? c.faulty->size() : c.faultyCount;
    if (f >= c.n)
    {
        fail("faulty count must be below n");
    }
    if (c.faulty)
    {
        for (auto p : *c.faulty)
        {
            if (p.value == 0 || p.value > c.n)
            {
                fail("faulty id out of range");
            }
        }
    }
    if (c.delays.delta <= 0)
    {
        fail("delta must be positive");
    }
    if (c.delays.deltaStar && *c.delays.deltaStar < c.delays.delta)
    {
        fail("delta_star below delta");
    }
    if (c.delays.gst < 0 || c.horizon < 0)
    {
        fail("negative gst or horizon");
    }
    if (!c.startOffsets.empty() && c.startOffsets.size() != c.n)
    {
        fail("start_offsets needs one entry per process");
    }
    for (auto o : c.startOffsets)
    {
        if (o < 0 || (c.delays.deltaStar && o > *c.delays.deltaStar))
        {
            fail("start offset outside [0, delta_star]");
        }
    }
    for (auto const& tx : c.txs)
    {
        if (tx.to.value == 0 || tx.to.value > c.n || tx.t < 0)
        {
            fail("transaction injection out of range");
        }
    }
    if (c.bursts && (c.bursts->every <= 0 || c.bursts->size == 0))
    {
        fail("tx_bursts needs positive every and size");
    }
}

Digest
Trace::digest() const
{
    Hasher h;
    for (auto const& e : mEvents)
    {
        h.add(std::string_view(e.dump())).add(std::string_view("\n"));
    }
    return h.finish();
}

void
Trace::write(std::ostream& out) const
{
    for (auto const& e : mEvents)
    {
        out << e.dump() << '\n';
    }
}

Trace
Trace::read(std::istream& in)
{
    Trace t;
    std::string line;
    while (std::getline(in, line))
    {
        if (!line.empty())
        {
            t.push(Json::parse(line));
        }
    }
    return t;
}

Simulation::Simulation(ScenarioConfig cfg, std::unique_ptr<Adversary> adversary)
    : mCfg(std::move(cfg))
    , mAdversary(std::move(adversary))
    , mKeys(mCfg.n)
    , mRng(mCfg.seed)
{
    validateConfig(mCfg);
    auto all = allProcesses(mCfg.n);
    if (mCfg.faulty)
    {
        mFaulty = makeProcessSet(*mCfg.faulty);
    }
    else
    {
        auto pool = all;
        for (std::size_t i = 0; i < mCfg.faultyCount; ++i)
        {
            auto j = i + draw(mRng, pool.size() - i);
            std::swap(pool[i], pool[j]);
            mFaulty.push_back(pool[i]);
        }
        mFaulty = makeProcessSet(std::move(mFaulty));
    }
    mCorrect = setMinus(all, mFaulty);
    mPiStar = Permutation::sample(mCfg.n, mRng());
    if (mCfg.startOffsets.empty())
    {
        mCfg.startOffsets.assign(mCfg.n, 0);
    }
    if (mCfg.bursts)
    {
        auto b = *mCfg.bursts;
        auto until = b.until > 0 ? b.until : mCfg.horizon / 2;
        for (auto t = b.start; t <= until; t += b.every)
        {
            auto to = mCorrect[draw(mRng, mCorrect.size())];
            for (std::size_t k = 0; k < b.size; ++k)
            {
                mCfg.txs.push_back(TxInjection{
                    t, to,
                    Transaction{"t" + std::to_string(t) + "." + std::to_string(k)}});
            }
        }
        mCfg.bursts.reset();
    }
    std::stable_sort(mCfg.txs.begin(), mCfg.txs.end(),
                     [](TxInjection const& a, TxInjection const& b) {
                         return a.t < b.t;
                     });
}

WrapperConfig
Simulation::wrapperConfig() const
{
    WrapperConfig w;
    w.pi = allProcesses(mCfg.n);
    w.genesisLog = mCfg.genesisLog;
    w.piStar = mPiStar;
    w.delta = mCfg.delays.delta;
    w.deltaStar = effectiveDeltaStar(mCfg.delays);
    return w;
}

Wrapper const*
Simulation::process(ProcessId id) const
{
    auto it = mProcs.find(id);
    return it == mProcs.end() ? nullptr : it->second.get();
}

std::optional<Timeslot>
Simulation::policyChoice(Timeslot sent)
{
    switch (mCfg.policy)
    {
    case DeliveryPolicy::Max:
        return std::nullopt;
    case DeliveryPolicy::Min:
        return sent + 1;
    case DeliveryPolicy::Uniform:
    {
        auto latest = latestDelivery(mCfg.delays, sent);
        return sent + 1 +
               static_cast<Timeslot>(draw(mRng, static_cast<std::uint64_t>(
                                                    latest - sent)));
    }
    }
    return std::nullopt;
}

void
Simulation::schedule(MsgPtr const& m, ProcessId from, ProcessId to,
                     std::optional<Timeslot> choice)
{
    auto at = scheduleDelivery(mCfg.delays, mNow, from, to, choice);
    mQueue[at].push_back(Pending{m, from, to, mNow});
}

void
Simulation::recordSend(MsgPtr const& m, ProcessId from)
{
    mObserved.insert(m);
    mTrace.push({{"t", mNow},
                 {"kind", "send"},
                 {"from", from.value},
                 {"id", m->digest.hex()},
                 {"defs", mEncoder.define(m)}});
}

void
Simulation::adversarySend(MsgPtr const& m,
                          std::map<ProcessId, std::optional<Timeslot>> const& at)
{
    if (!contains(mFaulty, m->signer))
    {
        throw std::logic_error("adversary may only send faulty-signed messages");
    }
    recordSend(m, m->signer);
    for (auto const& [to, choice] : at)
    {
        if (to == m->signer)
        {
            continue;
        }
        schedule(m, m->signer, to, choice);
    }
}

void
Simulation::adversaryBroadcast(MsgPtr const& m, std::optional<Timeslot> at)
{
    std::map<ProcessId, std::optional<Timeslot>> all;
    for (auto p : allProcesses(mCfg.n))
    {
        all[p] = at;
    }
    adversarySend(m, all);
}

void
Simulation::adversaryForward(MsgPtr const& m)
{
    std::map<ProcessId, std::optional<Timeslot>> all;
    for (auto p : allProcesses(mCfg.n))
    {
        all[p] = policyChoice(mNow);
    }
    adversarySend(m, all);
}

void
Simulation::snapshot(Timeslot t)
{
    auto const& wc = wrapperConfig();
    std::size_t worst = mUnionBreaks;
    std::string witness = "union";
    for (auto p : mCorrect)
    {
        auto const* w = process(p);
        if (!w)
        {
            continue;
        }
        auto& tr = mTrack[p];
        Json state{{"r", w->r()},
                   {"rec", w->recovering() ? 1 : 0},
                   {"log", encodeLog(w->log())},
                   {"log_star", encodeLog(w->logStar())},
                   {"log_g", encodeLog(w->genesisHistory().back())},
                   {"pi_r", encodeProcessSet(w->piHistory().back())}};
        if (state != tr.lastState)
        {
            tr.lastState = state;
            state["t"] = t;
            state["kind"] = "state";
            state["p"] = p.value;
            mTrace.push(std::move(state));
        }
        Log f = w->log();
        if (mCfg.checkFinalization)
        {
            if (w->messages().size() != tr.msgCount || !tr.haveFinal ||
                f != tr.lastFinal)
            {
                f = globalFinalize(w->messages(), wc.pi, wc.genesisLog).log;
                tr.msgCount = w->messages().size();
            }
            else
            {
                f = tr.lastFinal;
            }
            ++mStats.finalizationChecks;
            if (f != w->log())
            {
                ++mStats.finalizationMismatches;
            }
        }
        if (tr.haveFinal && !isPrefix(tr.lastFinal, f))
        {
            ++tr.breaks;
        }
        tr.lastFinal = std::move(f);
        tr.haveFinal = true;
        if (tr.breaks > worst)
        {
            worst = tr.breaks;
            witness = "p" + std::to_string(p.value);
        }
    }
    if (mCorrectUnion.size() != mUnionCount)
    {
        mUnionCount = mCorrectUnion.size();
        auto f = globalFinalize(mCorrectUnion, wc.pi, wc.genesisLog).log;
        if (mHaveUnionFinal && !isPrefix(mUnionFinal, f))
        {
            ++mUnionBreaks;
            if (mUnionBreaks > worst)
            {
                worst = mUnionBreaks;
                witness = "union";
            }
        }
        mUnionFinal = std::move(f);
        mHaveUnionFinal = true;
    }
    while (mStats.violations < worst)
    {
        ++mStats.violations;
        mTrace.push({{"t", t},
                     {"kind", "violation"},
                     {"count", mStats.violations},
                     {"witness", witness}});
    }
}

RunOutput
Simulation::run(SlotHook hook)
{
    auto order = Json::array(); // Pi* in permutation order, not sorted
    for (auto p : mPiStar.order())
    {
        order.push_back(p.value);
    }
    mTrace.push({{"t", 0},
                 {"kind", "config"},
                 {"config", configToJson(mCfg)},
                 {"faulty", encodeProcessSet(mFaulty)},
                 {"pi_star", std::move(order)}});
    for (auto p : mCorrect)
    {
        mTrack[p];
    }
    if (mAdversary)
    {
        mAdversary->init(*this);
    }
    auto env = mKeys.environment();
    std::size_t nextTx = 0;

    for (Timeslot t = 0; t <= mCfg.horizon; ++t)
    {
        mNow = t;
        std::map<ProcessId, std::vector<MsgPtr>> inbox;
        auto deliver = [&](MsgPtr const& m, ProcessId from, ProcessId to,
                           Timeslot sent) {
            if (!mReceived[to].insert(m->digest).second)
            {
                return;
            }
            inbox[to].push_back(m);
            if (contains(mCorrect, to))
            {
                ++mStats.deliveries;
                if (from != kEnvironment && from != to &&
                    (t < sent + 1 || t > latestDelivery(mCfg.delays, sent)))
                {
                    ++mStats.envelopeBreaches;
                }
                mTrace.push({{"t", t},
                             {"kind", "deliver"},
                             {"to", to.value},
                             {"from", from.value},
                             {"id", m->digest.hex()},
                             {"sent", sent}});
            }
        };
        if (auto it = mQueue.find(t); it != mQueue.end())
        {
            for (auto const& d : it->second)
            {
                deliver(d.msg, d.from, d.to, d.sent);
            }
            mQueue.erase(it);
        }
        for (; nextTx < mCfg.txs.size() && mCfg.txs[nextTx].t <= t; ++nextTx)
        {
            auto const& inj = mCfg.txs[nextTx];
            auto m = env.sign(TxBody{inj.tx});
            recordSend(m, kEnvironment);
            deliver(m, kEnvironment, inj.to, t);
        }

        if (mAdversary)
        {
            std::map<ProcessId, std::vector<MsgPtr>> faultyInbox;
            for (auto p : mFaulty)
            {
                faultyInbox[p] = inbox[p];
            }
            mAdversary->step(*this, t, faultyInbox);
        }

        for (auto p : mCorrect)
        {
            auto local = t - mCfg.startOffsets[p.value - 1];
            auto& backlog = mBacklog[p];
            auto& fresh = inbox[p];
            backlog.insert(backlog.end(), fresh.begin(), fresh.end());
            if (local < 0)
            {
                continue;
            }
            auto& w = mProcs[p];
            if (!w)
            {
                w = std::make_unique<Wrapper>(wrapperConfig(), p,
                                              mKeys.signerFor(p));
            }
            auto received = std::move(backlog);
            backlog.clear();
            auto out = w->step(local, received);
            for (auto const& ev : w->events())
            {
                mTrace.push(
                    {{"t", t},
                     {"kind", ev.kind == WrapperEventKind::RecoveryBegin
                                  ? "recovery_begin"
                                  : "recovery_end"},
                     {"p", p.value},
                     {"r", ev.r},
                     {"local", ev.localTime}});
            }
            auto send = [&](MsgPtr const& m) {
                for (auto q : allProcesses(mCfg.n))
                {
                    if (q == p)
                    {
                        continue;
                    }
                    std::optional<Timeslot> choice;
                    std::optional<std::optional<Timeslot>> override;
                    if (mAdversary)
                    {
                        override = mAdversary->delayFor(m, p, q, t);
                    }
                    choice = override ? *override : policyChoice(t);
                    schedule(m, p, q, choice);
                }
            };
            for (auto const& m : out)
            {
                mReceived[p].insert(m->digest);
                mCorrectUnion.insert(m);
                recordSend(m, p);
                send(m);
            }
            for (auto const& m : received)
            {
                mCorrectUnion.insert(m);
                send(m); // gossip: every first receipt is relayed once
            }
        }

        snapshot(t);
        if (hook)
        {
            hook(*this, t);
        }
    }

    RunOutput out;
    out.stats = mStats;
    out.faulty = mFaulty;
    out.piStar = mPiStar;
    auto finals = Json::object();
    for (auto p : mCorrect)
    {
        if (auto const* w = process(p))
        {
            out.finalLogs[p] = w->log();
            out.finalStrongLogs[p] = w->logStar();
            finals[std::to_string(p.value)] = {
                {"log", encodeLog(w->log())},
                {"log_star", encodeLog(w->logStar())},
                {"r", w->r()},
                {"rec", w->recovering() ? 1 : 0}};
        }
    }
    mTrace.push({{"t", mCfg.horizon},
                 {"kind", "summary"},
                 {"violations", mStats.violations},
                 {"finalization_checks", mStats.finalizationChecks},
                 {"finalization_mismatches", mStats.finalizationMismatches},
                 {"deliveries", mStats.deliveries},
                 {"envelope_breaches", mStats.envelopeBreaches},
                 {"final", finals}});
    out.trace = std::move(mTrace);
    return out;
}

RunOutput
runScenario(ScenarioConfig const& cfg, SlotHook hook)
{
    Simulation sim(cfg, makeAdversary(cfg));
    return sim.run(std::move(hook));
}

} // namespace rsmr
