// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/netsim.hpp"

namespace rsmr
{

/// Recognized strategy ids.
std::vector<std::string> const& strategyIds();

/// How the faulty processes behave once a recovery is under way.
enum class RecoveryConduct : std::uint8_t
{
    Honest,
    Stall,     // faulty leaders never propose
    Liar,      // genesis messages carry log_{G_r}
    Equivocate // faulty leaders send two proposals to disjoint halves
};

/// Split of one execution's members for a double-commit attack.
struct SplitPlan
{
    ProcessSet sideA;        // honest receivers of block b
    ProcessSet sideB;        // honest receivers of block b'
    ProcessSet equivocators; // vote for both blocks
    ProcessSet extraA;       // faulty voting only for b
    ProcessSet extraB;       // faulty voting only for b'
};

/// Smallest attack that yields a quorum on both sides, or nothing when the
/// faulty members are too few.
std::optional<SplitPlan> planSplit(ProcessSet const& members,
                                   ProcessSet const& faulty, Fraction rho = {});

/// Faulty processes run shadow copies of the honest wrapper. Messages of
/// attacked executions are withheld and replaced by a double-commit
/// attack; recovery messages are rewritten per RecoveryConduct.
class ShadowAdversary : public Adversary
{
  public:
    ShadowAdversary(std::set<std::uint32_t> attackExecs, RecoveryConduct conduct);

    void init(Simulation& sim) override;
    void step(Simulation& sim, Timeslot t,
              std::map<ProcessId, std::vector<MsgPtr>> const& inbox) override;
    std::optional<std::optional<Timeslot>>
    delayFor(MsgPtr const& m, ProcessId from, ProcessId to, Timeslot t) override;

    /// Executions in which the attack fired.
    std::set<std::uint32_t> firedExecs() const;

  private:
    struct Attack
    {
        std::uint32_t exec = 0;
        SplitPlan plan;
        std::int64_t height = 0;
        std::int32_t round = 0;
        BlockPtr blockA;
        BlockPtr blockB;
        Timeslot fired = 0;
        Timeslot quietUntil = 0; // cross-side delays stretched until then
        std::size_t quorum = 0;
        bool doneA = false;
        bool doneB = false;
    };

    void tryFire(Simulation& sim, Timeslot t, std::uint32_t exec);
    void tryPrecommit(Simulation& sim, Attack& a, bool sideA);
    void forward(Simulation& sim, Wrapper const& shadow, MsgPtr const& m);
    void sendTo(Simulation& sim, MsgPtr const& m, ProcessSet const& to);
    MsgPtr sign(Simulation& sim, ProcessId p, Body body);
    bool isAttacker(ProcessId p) const;

    std::set<std::uint32_t> mAttackExecs;
    RecoveryConduct mConduct;
    std::map<ProcessId, std::unique_ptr<Wrapper>> mShadows;
    std::map<ProcessId, std::vector<MsgPtr>> mInject;
    std::map<std::uint32_t, Attack> mAttacks;
};

} // namespace rsmr
