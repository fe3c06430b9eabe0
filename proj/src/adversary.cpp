// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/adversary.hpp"

#include <algorithm>

namespace rsmr
{

namespace
{

class PassiveAdversary : public Adversary
{
  public:
    void
    init(Simulation&) override
    {
    }
    void
    step(Simulation&, Timeslot,
         std::map<ProcessId, std::vector<MsgPtr>> const&) override
    {
    }
};

bool
isBaseKind(MsgKind k)
{
    return k == MsgKind::Proposal || k == MsgKind::Prevote ||
           k == MsgKind::Precommit;
}

ProcessSet
intersect(ProcessSet const& a, ProcessSet const& b)
{
    ProcessSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
}

ProcessSet
take(ProcessSet const& from, std::size_t& cursor, std::size_t count)
{
    ProcessSet out(from.begin() + cursor, from.begin() + cursor + count);
    cursor += count;
    return out;
}

} // namespace

std::vector<std::string> const&
strategyIds()
{
    static std::vector<std::string> const ids{
        "passive",       "honest",           "split-brain", "recovery-stall",
        "genesis-liar", "leader-equivocate", "combo"};
    return ids;
}

std::optional<SplitPlan>
planSplit(ProcessSet const& members, ProcessSet const& faulty, Fraction rho)
{
    auto bad = intersect(members, faulty);
    auto honest = setMinus(members, bad);
    auto n = members.size();
    auto q = quorum(n, rho);
    if (2 * q <= n)
    {
        return std::nullopt;
    }
    auto e = 2 * q - n;
    auto room = q - e; // honest votes each side can take
    auto hA = std::min(room, (honest.size() + 1) / 2);
    auto hB = honest.size() - hA;
    if (hA == 0 || hB == 0 || hB > room)
    {
        return std::nullopt;
    }
    auto xA = room - hA;
    auto xB = room - hB;
    if (e + xA + xB > bad.size())
    {
        return std::nullopt;
    }
    SplitPlan plan;
    std::size_t h = 0;
    plan.sideA = take(honest, h, hA);
    plan.sideB = take(honest, h, hB);
    std::size_t f = 0;
    plan.equivocators = take(bad, f, e);
    plan.extraA = take(bad, f, xA);
    plan.extraB = take(bad, f, xB);
    return plan;
}

ShadowAdversary::ShadowAdversary(std::set<std::uint32_t> attackExecs,
                                 RecoveryConduct conduct)
    : mAttackExecs(std::move(attackExecs)), mConduct(conduct)
{
}

std::set<std::uint32_t>
ShadowAdversary::firedExecs() const
{
    std::set<std::uint32_t> out;
    for (auto const& [r, a] : mAttacks)
    {
        out.insert(r);
    }
    return out;
}

void
ShadowAdversary::init(Simulation& sim)
{
    for (auto p : sim.faulty())
    {
        mShadows[p] = std::make_unique<Wrapper>(sim.wrapperConfig(), p,
                                                sim.keys().signerFor(p));
    }
}

MsgPtr
ShadowAdversary::sign(Simulation& sim, ProcessId p, Body body)
{
    return sim.keys().signerFor(p).sign(std::move(body));
}

void
ShadowAdversary::sendTo(Simulation& sim, MsgPtr const& m, ProcessSet const& to)
{
    std::map<ProcessId, std::optional<Timeslot>> at;
    for (auto p : to)
    {
        at[p] = sim.now() + 1;
    }
    sim.adversarySend(m, at);
}

bool
ShadowAdversary::isAttacker(ProcessId p) const
{
    for (auto const& [r, a] : mAttacks)
    {
        if (contains(a.plan.extraA, p) || contains(a.plan.extraB, p))
        {
            return true;
        }
    }
    return false;
}

void
ShadowAdversary::tryFire(Simulation& sim, Timeslot t, std::uint32_t exec)
{
    Wrapper const* first = nullptr;
    std::optional<std::set<Transaction>> common;
    for (auto p : sim.correct())
    {
        auto const* w = sim.process(p);
        if (!w || w->r() != exec || !w->base())
        {
            return;
        }
        auto const* b = w->base();
        if (b->prevoted() || b->lockedRound() != -1 || b->validRound() != -1)
        {
            return;
        }
        if (!first)
        {
            first = w;
        }
        auto const* f = first->base();
        if (b->height() != f->height() || b->round() != f->round() ||
            b->tip() != f->tip())
        {
            return;
        }
        auto mine = b->pending();
        std::set<Transaction> set(mine.begin(), mine.end());
        if (!common)
        {
            common = std::move(set);
        }
        else
        {
            std::set<Transaction> both;
            std::set_intersection(common->begin(), common->end(), set.begin(),
                                  set.end(), std::inserter(both, both.end()));
            common = std::move(both);
        }
    }
    if (!first || !common || common->size() < 2)
    {
        return;
    }
    auto ctx = first->executionContext();
    auto const* base = first->base();
    auto leader = baseLeader(ctx, base->height(), base->round());
    if (!contains(sim.faulty(), leader))
    {
        return;
    }
    auto plan = planSplit(ctx.members, sim.faulty(), ctx.rho);
    if (!plan)
    {
        return;
    }

    Attack a;
    a.exec = exec;
    a.plan = *plan;
    a.height = base->height();
    a.round = base->round();
    a.fired = t;
    a.quietUntil = t + 4 * sim.config().delays.delta;
    a.quorum = ctx.quorumSize();
    std::vector<Transaction> txs(common->begin(), common->end());
    a.blockA = makeBlock(exec, a.height, base->tip(), txs, leader);
    std::reverse(txs.begin(), txs.end());
    a.blockB = makeBlock(exec, a.height, base->tip(), txs, leader);

    auto side = [&](BlockPtr const& block, ProcessSet const& honest,
                    ProcessSet const& extra) {
        sendTo(sim,
               sign(sim, leader,
                    ProposalBody{exec, a.height, a.round, block, -1, {}}),
               honest);
        ProcessSet voters = a.plan.equivocators;
        voters.insert(voters.end(), extra.begin(), extra.end());
        for (auto v : voters)
        {
            sendTo(sim,
                   sign(sim, v,
                        PrevoteBody{exec, a.height, a.round, block->digest, -1,
                                    {}}),
                   honest);
        }
    };
    side(a.blockA, a.plan.sideA, a.plan.extraA);
    side(a.blockB, a.plan.sideB, a.plan.extraB);
    mAttacks[exec] = std::move(a);
}

void
ShadowAdversary::tryPrecommit(Simulation& sim, Attack& a, bool sideA)
{
    auto& done = sideA ? a.doneA : a.doneB;
    if (done)
    {
        return;
    }
    auto const& block = sideA ? a.blockA : a.blockB;
    auto const& honest = sideA ? a.plan.sideA : a.plan.sideB;
    auto voters = a.plan.equivocators;
    auto const& extra = sideA ? a.plan.extraA : a.plan.extraB;
    voters.insert(voters.end(), extra.begin(), extra.end());
    voters = makeProcessSet(std::move(voters));

    std::map<ProcessId, MsgPtr> pol;
    for (auto const& m : sim.observed().ofKind(MsgKind::Prevote, a.exec))
    {
        auto const* pv = m->as<PrevoteBody>();
        if (pv->height == a.height && pv->round == a.round &&
            pv->value == block->digest &&
            (contains(honest, m->signer) || contains(voters, m->signer)))
        {
            pol.emplace(m->signer, m);
        }
    }
    if (pol.size() < a.quorum)
    {
        return;
    }
    std::vector<MsgPtr> proof;
    for (auto const& [p, m] : pol)
    {
        proof.push_back(m);
    }
    for (auto v : voters)
    {
        sendTo(sim,
               sign(sim, v,
                    PrecommitBody{a.exec, a.height, a.round, block, proof}),
               honest);
    }
    done = true;
}

std::optional<std::optional<Timeslot>>
ShadowAdversary::delayFor(MsgPtr const& m, ProcessId from, ProcessId to,
                          Timeslot t)
{
    auto tag = m->execTag();
    if (!isBaseKind(m->kind()) || !tag)
    {
        return std::nullopt;
    }
    auto it = mAttacks.find(*tag);
    if (it == mAttacks.end() || t > it->second.quietUntil)
    {
        return std::nullopt;
    }
    auto const& plan = it->second.plan;
    bool fromA = contains(plan.sideA, from);
    bool fromB = contains(plan.sideB, from);
    bool toA = contains(plan.sideA, to);
    bool toB = contains(plan.sideB, to);
    if ((fromA && toB) || (fromB && toA))
    {
        return std::optional<Timeslot>{}; // as late as allowed
    }
    return std::optional<Timeslot>{t + 1};
}

void
ShadowAdversary::forward(Simulation& sim, Wrapper const& shadow,
                         MsgPtr const& m)
{
    auto k = m->kind();
    auto tag = m->execTag();
    if (isBaseKind(k) && tag && mAttackExecs.count(*tag))
    {
        return; // silent in attacked executions
    }
    if (k == MsgKind::Genesis)
    {
        auto const* g = m->as<GenesisBody>();
        if (mConduct == RecoveryConduct::Liar)
        {
            sim.adversaryForward(sign(
                sim, m->signer,
                GenesisBody{shadow.genesisHistory()[g->r - 1], g->r}));
            return;
        }
        if (mConduct == RecoveryConduct::Equivocate && isAttacker(m->signer))
        {
            sendTo(sim, m, sim.faulty()); // withheld from correct processes
            return;
        }
    }
    if (k == MsgKind::ViewProposal)
    {
        if (mConduct == RecoveryConduct::Stall)
        {
            return;
        }
        auto const* vp = m->as<ViewProposalBody>();
        if (mConduct == RecoveryConduct::Equivocate && !vp->qc)
        {
            auto const& p = *vp->proposal;
            std::vector<MsgPtr> reduced;
            for (auto const& g : p.genesis)
            {
                if (!isAttacker(g->signer))
                {
                    reduced.push_back(g);
                }
            }
            auto active = setMinus(shadow.piHistory()[p.r - 1], p.faulty);
            auto sigma = majoritySigma(reduced, active.size());
            if (reduced.size() != p.genesis.size() && sigma)
            {
                auto other = sign(sim, m->signer,
                                  ViewProposalBody{makeRProposal(p.faulty, *sigma,
                                                                 reduced, p.r),
                                                   vp->v, std::nullopt});
                auto const& correct = sim.correct();
                auto half = (correct.size() + 1) / 2;
                ProcessSet first(correct.begin(), correct.begin() + half);
                ProcessSet second(correct.begin() + half, correct.end());
                first.insert(first.end(), sim.faulty().begin(),
                             sim.faulty().end());
                sendTo(sim, m, makeProcessSet(std::move(first)));
                sendTo(sim, other, second);
                return;
            }
        }
    }
    sim.adversaryForward(m);
}

void
ShadowAdversary::step(Simulation& sim, Timeslot t,
                      std::map<ProcessId, std::vector<MsgPtr>> const& inbox)
{
    for (auto& [p, shadow] : mShadows)
    {
        auto it = inbox.find(p);
        static std::vector<MsgPtr> const none;
        auto out = shadow->step(t, it == inbox.end() ? none : it->second);
        for (auto const& m : out)
        {
            forward(sim, *shadow, m);
        }
    }
    for (auto exec : mAttackExecs)
    {
        if (!mAttacks.count(exec))
        {
            tryFire(sim, t, exec);
        }
    }
    for (auto& [exec, a] : mAttacks)
    {
        tryPrecommit(sim, a, true);
        tryPrecommit(sim, a, false);
    }
}

std::unique_ptr<Adversary>
makeAdversary(ScenarioConfig const& cfg)
{
    auto const& id = cfg.strategy;
    std::set<std::uint32_t> execs{1};
    if (id == "combo")
    {
        execs = {1, 2};
    }
    if (cfg.strategyParams.contains("attack_execs"))
    {
        execs = cfg.strategyParams["attack_execs"].get<std::set<std::uint32_t>>();
    }
    if (id == "passive")
    {
        return std::make_unique<PassiveAdversary>();
    }
    if (id == "honest")
    {
        return std::make_unique<ShadowAdversary>(std::set<std::uint32_t>{},
                                                 RecoveryConduct::Honest);
    }
    if (id == "split-brain" || id == "combo")
    {
        return std::make_unique<ShadowAdversary>(execs, RecoveryConduct::Honest);
    }
    if (id == "recovery-stall")
    {
        return std::make_unique<ShadowAdversary>(execs, RecoveryConduct::Stall);
    }
    if (id == "genesis-liar")
    {
        return std::make_unique<ShadowAdversary>(execs, RecoveryConduct::Liar);
    }
    if (id == "leader-equivocate")
    {
        return std::make_unique<ShadowAdversary>(execs,
                                                 RecoveryConduct::Equivocate);
    }
    throw std::invalid_argument("unknown strategy " + id);
}

} // namespace rsmr
