// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "fixtures.hpp"
#include "rsmr/wrapper.hpp"
#include "test_support.hpp"

#include <random>

using namespace rsmr;
using namespace rsmr::testing;

namespace
{

Log
logOf(std::initializer_list<char const*> names)
{
    return Log(txs(names));
}

template <class B>
std::vector<MsgPtr>
ofBody(std::vector<MsgPtr> const& msgs)
{
    std::vector<MsgPtr> out;
    for (auto const& m : msgs)
    {
        if (m->as<B>())
        {
            out.push_back(m);
        }
    }
    return out;
}

// Four processes, p1 under test. Blocks a and z conflict at height one;
// p2 and p3 precommit both, so they are provably guilty.
struct Rig
{
    explicit Rig(std::vector<std::uint32_t> order = {4, 1, 2, 3})
        : fx(4)
    {
        std::vector<ProcessId> ids;
        for (auto i : order)
        {
            ids.push_back(p(i));
        }
        cfg.pi = allProcesses(4);
        cfg.piStar = Permutation(ids);
        cfg.delta = 2;
        cfg.deltaStar = 5;
        w = std::make_unique<Wrapper>(cfg, p(1), fx.ring.signerFor(p(1)));
        blockA = makeBlock(1, 1, kGenesisParent, txs({"a"}), p(1));
        blockZ = makeBlock(1, 1, kGenesisParent, txs({"z"}), p(2));
    }

    std::vector<MsgPtr>
    step(std::vector<MsgPtr> const& inbox = {})
    {
        auto out = w->step(now, inbox);
        sent.insert(sent.end(), out.begin(), out.end());
        ++now;
        return out;
    }

    void
    runUntil(Timeslot t)
    {
        while (now < t)
        {
            step();
        }
    }

    MsgPtr
    sign(std::uint32_t who, Body body)
    {
        return fx.ring.signerFor(p(who)).sign(std::move(body));
    }

    // Commit a at slot 0, conflicting z at slot 1: recovery starts at 1.
    void
    enterRecovery()
    {
        step(fx.commit(blockA, {1, 2, 3}));
        step(fx.commit(blockZ, {2, 3, 4}));
        REQUIRE(w->recovering());
        ownGenesis = ofBody<GenesisBody>(sent).at(0);
        genesis4 = sign(4, GenesisBody{Log{}, 1});
    }

    MsgPtr
    proposal(std::uint32_t signer, ProcessSet faulty, Log sigma,
             std::vector<MsgPtr> genesis, std::uint32_t v = 1)
    {
        return sign(signer, ViewProposalBody{makeRProposal(std::move(faulty),
                                                           std::move(sigma),
                                                           std::move(genesis), 1),
                                             v, std::nullopt});
    }

    MsgPtr
    validProposal()
    {
        return proposal(4, {p(2), p(3)}, Log{}, {ownGenesis, genesis4});
    }

    Fixture fx;
    WrapperConfig cfg;
    std::unique_ptr<Wrapper> w;
    BlockPtr blockA;
    BlockPtr blockZ;
    Timeslot now = 0;
    std::vector<MsgPtr> sent;
    MsgPtr ownGenesis;
    MsgPtr genesis4;
};

} // namespace

TEST_CASE("recovery leader examples")
{
    Permutation a({p(3), p(1), p(2)});
    auto all3 = allProcesses(3);
    CHECK(recoveryLeader(a, all3, 1) == p(3));
    CHECK(recoveryLeader(a, all3, 3) == p(2));
    Permutation b({p(2), p(4), p(1), p(3)});
    CHECK(recoveryLeader(b, {p(3), p(4)}, 2) == p(3));
    CHECK_THROWS_AS(recoveryLeader(b, {p(3), p(4)}, 3), SimulationFault);
}

TEST_CASE("majority sigma examples")
{
    Fixture fx(5);
    auto gen = [&](std::uint32_t who, Log l) {
        return fx.ring.signerFor(p(who)).sign(GenesisBody{std::move(l), 1});
    };
    std::vector<MsgPtr> mixed{gen(1, logOf({"a", "b"})), gen(2, logOf({"a"})),
                              gen(3, logOf({"a", "c"})), gen(4, Log{}),
                              gen(5, logOf({"d"}))};
    CHECK(majoritySigma(mixed, 5) == logOf({"a"}));

    std::vector<MsgPtr> same;
    for (std::uint32_t i = 1; i <= 5; ++i)
    {
        same.push_back(gen(i, Log{}));
    }
    CHECK(majoritySigma(same, 5) == Log{});
    // Two messages cannot be a majority of five.
    CHECK_FALSE(majoritySigma({same[0], same[1]}, 5).has_value());
}

TEST_CASE("majority sigma is the unique longest majority prefix")
{
    std::mt19937_64 rng(7);
    Fixture fx(7);
    char const* names[] = {"a", "b", "c"};
    for (int iter = 0; iter < 300; ++iter)
    {
        auto count = 1 + rng() % 7;
        std::vector<MsgPtr> gens;
        std::vector<Log> logs;
        for (std::uint64_t i = 0; i < count; ++i)
        {
            std::vector<Transaction> t;
            auto len = rng() % 4;
            for (std::uint64_t k = 0; k < len; ++k)
            {
                t.push_back(Transaction{names[rng() % 2 == 0 ? 0 : 1 + rng() % 2]});
            }
            logs.emplace_back(t);
            gens.push_back(fx.ring.signerFor(p(static_cast<std::uint32_t>(i + 1)))
                               .sign(GenesisBody{logs.back(), 1}));
        }
        auto active = count + rng() % 3;

        // Oracle: every prefix of every genesis log, counted directly.
        std::vector<Log> supported;
        for (auto const& l : logs)
        {
            for (std::size_t k = 0; k <= l.size(); ++k)
            {
                Log cand(std::vector<Transaction>(l.entries().begin(),
                                                  l.entries().begin() + k));
                std::size_t support = 0;
                for (auto const& o : logs)
                {
                    support += isPrefix(cand, o) ? 1 : 0;
                }
                if (2 * support > active)
                {
                    supported.push_back(cand);
                }
            }
        }
        auto got = majoritySigma(gens, active);
        if (supported.empty())
        {
            CHECK_FALSE(got.has_value());
            continue;
        }
        REQUIRE(got.has_value());
        for (auto const& s : supported)
        {
            CHECK(isPrefix(s, *got));
        }
        CHECK(std::find(supported.begin(), supported.end(), *got) != supported.end());
    }
}

TEST_CASE("execution one starts at local time zero")
{
    Rig rig;
    rig.step();
    CHECK(rig.w->r() == 1);
    CHECK_FALSE(rig.w->recovering());
    REQUIRE(rig.w->piHistory().size() == 1);
    CHECK(rig.w->piHistory()[0] == allProcesses(4));
    CHECK(rig.w->genesisHistory()[0] == Log{});
    CHECK(rig.w->base() != nullptr);
}

TEST_CASE("a violation sends a genesis message and resets the log")
{
    Rig rig;
    rig.step(rig.fx.commit(rig.blockA, {1, 2, 3}));
    CHECK(rig.w->log() == logOf({"a"}));
    auto out = rig.step(rig.fx.commit(rig.blockZ, {2, 3, 4}));
    CHECK(rig.w->recovering());
    CHECK(rig.w->log() == Log{});
    CHECK(rig.w->base() == nullptr);
    REQUIRE(rig.w->events().size() == 1);
    CHECK(rig.w->events()[0].kind == WrapperEventKind::RecoveryBegin);
    auto gens = ofBody<GenesisBody>(out);
    REQUIRE(gens.size() == 1);
    CHECK(gens[0]->as<GenesisBody>()->sigma == logOf({"a"}));
    CHECK(gens[0]->as<GenesisBody>()->r == 1);
    CHECK(rig.w->guilty() == ProcessSet{p(2), p(3)});
}

TEST_CASE("strong finalization needs two delta-star of tenure")
{
    Rig rig;
    rig.runUntil(10);
    rig.step(rig.fx.commit(rig.blockA, {1, 2, 3}));
    CHECK(rig.w->log() == logOf({"a"}));
    rig.runUntil(20);
    CHECK(rig.w->logStar() == Log{});
    rig.step();
    CHECK(rig.w->logStar() == logOf({"a"}));
}

TEST_CASE("a reset before the tenure elapses blocks strong finalization")
{
    Rig rig;
    rig.runUntil(10);
    rig.step(rig.fx.commit(rig.blockA, {1, 2, 3}));
    rig.runUntil(15);
    rig.step(rig.fx.commit(rig.blockZ, {2, 3, 4}));
    rig.runUntil(40);
    CHECK(rig.w->recovering());
    CHECK(rig.w->logStar() == Log{});
}

TEST_CASE("view proposal validity conditions")
{
    Rig rig;
    rig.enterRecovery();
    rig.step({rig.genesis4});
    rig.runUntil(12); // P_i(1) fixed at t0 + 2 delta-star = 11
    REQUIRE(rig.w->genesisSenders() == ProcessSet{p(1), p(4)});

    CHECK(rig.w->isValidViewProposal(rig.validProposal()));
    // (ii) one culprit is below rho_C |Pi_1|
    CHECK_FALSE(rig.w->isValidViewProposal(
        rig.proposal(4, {p(2)}, Log{}, {rig.ownGenesis, rig.genesis4})));
    // (iii) p4 has no proof of guilt
    CHECK_FALSE(rig.w->isValidViewProposal(
        rig.proposal(4, {p(2), p(3), p(4)}, Log{}, {rig.ownGenesis})));
    // (v) p4's genesis is missing
    CHECK_FALSE(rig.w->isValidViewProposal(
        rig.proposal(4, {p(2), p(3)}, Log{}, {rig.ownGenesis})));
    // (vi) [a] lacks majority support
    CHECK_FALSE(rig.w->isValidViewProposal(
        rig.proposal(4, {p(2), p(3)}, logOf({"a"}), {rig.ownGenesis, rig.genesis4})));
    // (vii) wrong leader
    CHECK_FALSE(rig.w->isValidViewProposal(
        rig.proposal(1, {p(2), p(3)}, Log{}, {rig.ownGenesis, rig.genesis4})));
}

TEST_CASE("equivocation detection")
{
    Rig rig;
    rig.enterRecovery();
    auto r1 = rig.validProposal();
    auto r2 = rig.proposal(4, {p(2), p(3)}, logOf({"a"}), {rig.ownGenesis});
    rig.step({r1});
    CHECK_FALSE(rig.w->detectsEquivocation(1));

    SUBCASE("two direct proposals")
    {
        rig.step({r2});
        CHECK(rig.w->detectsEquivocation(1));
    }
    SUBCASE("a conflicting proposal inside a vote")
    {
        rig.step({rig.sign(2, ViewVoteBody{r2})});
        CHECK(rig.w->detectsEquivocation(1));
    }
    SUBCASE("a non-leader's proposal")
    {
        rig.step({rig.proposal(2, {p(2), p(3)}, Log{}, {rig.ownGenesis})});
        CHECK_FALSE(rig.w->detectsEquivocation(1));
    }
}

TEST_CASE("recovery completes through vote, lock and finish")
{
    Rig rig;
    rig.enterRecovery();
    rig.step({rig.genesis4});
    rig.runUntil(21); // leader proposes at t0 + 4 delta-star
    auto r1 = rig.validProposal();
    auto out = rig.step({r1});
    auto votes = ofBody<ViewVoteBody>(out);
    REQUIRE(votes.size() == 1);
    CHECK(votes[0]->as<ViewVoteBody>()->target == r1);

    // The QC forms when p4's vote arrives at 22; the timer runs 2 delta-star.
    rig.step({rig.sign(4, ViewVoteBody{r1})});
    REQUIRE(rig.w->lock().has_value());
    while (rig.now < 32)
    {
        CHECK(ofBody<FinishVoteBody>(rig.step()).empty());
    }
    auto finish = ofBody<FinishVoteBody>(rig.step());
    REQUIRE(finish.size() == 1);
    auto const& proposal = r1->as<ViewProposalBody>()->proposal;
    CHECK(finish[0]->as<FinishVoteBody>()->proposal == proposal);
    CHECK(ofBody<ViewVoteBody>(rig.sent).size() == 1);

    rig.step({rig.sign(4, FinishVoteBody{proposal})});
    CHECK_FALSE(rig.w->recovering());
    CHECK(rig.w->r() == 2);
    REQUIRE(rig.w->piHistory().size() == 2);
    CHECK(rig.w->piHistory()[1] == ProcessSet{p(1), p(4)});
    CHECK(rig.w->genesisHistory()[1] == Log{});
    CHECK(rig.w->log() == Log{});
    CHECK_FALSE(rig.w->lock().has_value());
    CHECK_FALSE(rig.w->recoveryStart().has_value());
    REQUIRE(rig.w->events().size() == 1);
    CHECK(rig.w->events()[0].kind == WrapperEventKind::RecoveryEnd);
}

TEST_CASE("no finish vote after equivocation and no second vote per view")
{
    Rig rig;
    rig.enterRecovery();
    rig.step({rig.genesis4});
    rig.runUntil(21);
    auto r1 = rig.validProposal();
    rig.step({r1});
    rig.step({rig.sign(4, ViewVoteBody{r1}),
              rig.proposal(4, {p(2), p(3)}, logOf({"a"}), {rig.ownGenesis})});
    rig.runUntil(45);
    CHECK(ofBody<ViewVoteBody>(rig.sent).size() == 1);
    CHECK(ofBody<FinishVoteBody>(rig.sent).empty());
    CHECK(rig.w->recovering());
}

TEST_CASE("leader proposal carries the guilty set and majority sigma")
{
    Rig rig({1, 2, 3, 4});
    rig.enterRecovery();
    rig.step({rig.genesis4});
    rig.runUntil(21);
    auto out = rig.step();
    auto props = ofBody<ViewProposalBody>(out);
    REQUIRE(props.size() == 1);
    auto const& body = *props[0]->as<ViewProposalBody>();
    CHECK(body.v == 1);
    CHECK_FALSE(body.qc.has_value());
    CHECK(body.proposal->faulty == ProcessSet{p(2), p(3)});
    CHECK(body.proposal->sigma == Log{}); // [a] is held by p1 alone
    CHECK(body.proposal->genesis.size() == 2);
    // Own proposal is voted for in the same slot.
    CHECK(ofBody<ViewVoteBody>(out).size() == 1);
}

TEST_CASE("a held QC is re-proposed in the next view")
{
    Rig rig({1, 4, 2, 3});
    rig.enterRecovery();
    rig.step({rig.genesis4});
    rig.runUntil(21);
    auto r1 = ofBody<ViewProposalBody>(rig.step()).at(0);
    rig.step({rig.sign(4, ViewVoteBody{r1})});
    auto held = rig.w->proposalFor(2);
    REQUIRE(held.has_value());
    auto const* body = std::get_if<ViewProposalBody>(&*held);
    REQUIRE(body != nullptr);
    CHECK(body->v == 2);
    CHECK(body->proposal == r1->as<ViewProposalBody>()->proposal);
    REQUIRE(body->qc.has_value());
    CHECK(body->qc->size() == 2);
}

TEST_CASE("QC validity")
{
    Rig rig;
    rig.enterRecovery();
    auto r1 = rig.validProposal();
    auto v1 = rig.sign(1, ViewVoteBody{r1});
    auto v4 = rig.sign(4, ViewVoteBody{r1});
    auto pi = allProcesses(4);
    CHECK(validQc({v1, v4}, pi).has_value());
    CHECK_FALSE(validQc({v1}, pi).has_value());
    CHECK_FALSE(validQc({v1, v1}, pi).has_value());
    // A vote from an excluded process invalidates the set.
    CHECK_FALSE(validQc({v1, v4, rig.sign(2, ViewVoteBody{r1})}, pi).has_value());
    auto other = rig.proposal(4, {p(2), p(3)}, logOf({"a"}), {});
    CHECK_FALSE(validQc({v1, rig.sign(4, ViewVoteBody{other})}, pi).has_value());
}
