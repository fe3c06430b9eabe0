// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/message.hpp"

#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace rsmr
{

/// Consistency resilience as an exact fraction num/den.
struct Fraction
{
    std::int64_t num = 1;
    std::int64_t den = 3;
};

/// ceil(rho * n).
std::size_t ceilFraction(Fraction rho, std::size_t n);

/// Quorum for n' members: ceil((n' + ceil(rho*n')) / 2). Two quorums
/// intersect in at least ceil(rho*n') members.
std::size_t quorum(std::size_t nPrime, Fraction rho = {});

/// Parameters of one execution E_r: (Pi', log_G', r).
struct ExecutionContext
{
    ProcessSet members;
    Log genesisLog;
    std::uint32_t exec = 1;
    Fraction rho;

    std::size_t
    quorumSize() const
    {
        return quorum(members.size(), rho);
    }
};

/// Leader of (height, round): members in index order, rotating.
ProcessId baseLeader(ExecutionContext const& ctx, std::int64_t height,
                     std::int32_t round);

/// q prevotes from distinct members for exactly (exec, height, round, value).
bool isWellFormedPol(ExecutionContext const& ctx, std::vector<MsgPtr> const& pol,
                     std::int64_t height, std::int32_t round,
                     std::optional<Digest> const& value);

/// Incremental tally of precommits for one execution. A block is committed
/// once q members precommit it in a single round.
class CommitIndex
{
  public:
    explicit CommitIndex(ExecutionContext ctx);

    ExecutionContext const&
    context() const
    {
        return mCtx;
    }

    /// Ignores everything except member precommits for this execution.
    /// Returns true when a block became committed.
    bool add(MsgPtr const& m);
    void addAll(std::vector<MsgPtr> const& msgs);

    /// The chain chosen by the finalization rule.
    std::vector<BlockPtr> const& chain() const;
    /// genesis log followed by the chain's transactions.
    Log finalized() const;
    bool hasViolation() const;

    std::vector<BlockPtr> committedBlocks() const;
    std::size_t
    commitCount() const
    {
        return mCommitCount;
    }

  private:
    struct Tally
    {
        BlockPtr block;
        std::map<std::int32_t, std::set<ProcessId>> signersByRound;
        bool committed = false;
    };

    void refresh() const;

    ExecutionContext mCtx;
    std::size_t mQuorum;
    std::unordered_map<Digest, Tally, DigestHash> mTallies;
    std::map<std::int64_t, std::vector<BlockPtr>> mCommitted;
    std::size_t mCommitCount = 0;
    bool mForked = false;

    mutable bool mDirty = false;
    mutable std::vector<BlockPtr> mChain;
    mutable bool mViolation = false;
};

/// F(Pi', log_G')(M).
Log finalizeFn(ExecutionContext const& ctx, MessageSet const& m);
/// M has a consistency violation with respect to F(Pi', log_G').
bool hasViolation(ExecutionContext const& ctx, MessageSet const& m);
/// F(M) extends sigma.
bool isCertificate(ExecutionContext const& ctx, MessageSet const& m,
                   Log const& sigma);

enum class GuiltKind : std::uint8_t
{
    PrevoteEquivocation,
    PrecommitEquivocation,
    Amnesia,
    UnjustifiedPrecommit,
    UnjustifiedPrevote,
};

char const* guiltKindName(GuiltKind kind);

/// Messages signed by the culprit that no correct process could have
/// produced together.
struct GuiltProof
{
    ProcessId culprit;
    GuiltKind kind;
    std::vector<MsgPtr> evidence;
};

/// Checks one proof in isolation.
bool verifyGuiltProof(ExecutionContext const& ctx, GuiltProof const& proof);

/// One proof per culprit among ctx.members, in culprit order.
std::vector<GuiltProof> extractGuilt(ExecutionContext const& ctx,
                                     MessageSet const& m);
std::vector<GuiltProof> extractGuilt(ExecutionContext const& ctx,
                                     std::vector<MsgPtr> const& baseMsgs);
ProcessSet guiltySet(std::vector<GuiltProof> const& proofs);

/// Honest behaviour of one member in one execution. Rounds within a
/// height follow the prevote/precommit/lock discipline; see README.
class BaseProcess
{
  public:
    BaseProcess(ExecutionContext ctx, ProcessId self, Timeslot delta,
                Timeslot startTime);

    /// Feeds a newly received message. Other executions are ignored.
    void observe(MsgPtr const& m);
    /// Feeds an environment transaction.
    void observeTx(Transaction const& tx);

    /// Runs the protocol at local time `now` against the committed chain.
    /// Returns bodies to be signed and sent by the caller.
    std::vector<Body> step(Timeslot now, std::vector<BlockPtr> const& chain);

    ExecutionContext const&
    context() const
    {
        return mCtx;
    }
    std::int64_t
    height() const
    {
        return mHeight;
    }
    std::int32_t
    round() const
    {
        return mRound;
    }
    bool
    prevoted() const
    {
        return mPrevoted;
    }
    bool
    active() const
    {
        return mActive;
    }
    std::int32_t
    lockedRound() const
    {
        return mLockedRound;
    }
    std::int32_t
    validRound() const
    {
        return mValidRound;
    }
    Digest
    tip() const
    {
        return mTip;
    }
    /// Known transactions not yet in the genesis log or chain, by payload.
    std::vector<Transaction> pending() const;
    /// True if the block may extend the current chain.
    bool isValidBlock(Block const& b) const;

  private:
    struct RoundTally
    {
        std::vector<MsgPtr> proposals;
        std::map<std::optional<Digest>, std::vector<MsgPtr>> prevotes;
        std::map<std::optional<Digest>, std::set<ProcessId>> prevoteSigners;
        std::set<ProcessId> precommitSigners;
        std::set<ProcessId> anySigners;
    };

    void advanceHeight(Timeslot now, std::vector<BlockPtr> const& chain);
    void enterRound(std::int32_t round, Timeslot now);
    RoundTally& tally(std::int64_t h, std::int32_t k);
    RoundTally const* findTally(std::int64_t h, std::int32_t k) const;
    std::optional<std::vector<MsgPtr>> polFor(std::int32_t k,
                                              Digest const& value) const;
    void updateValid();
    bool trySteps(Timeslot now, std::vector<Body>& out);

    ExecutionContext mCtx;
    ProcessId mSelf;
    Timeslot mDelta;
    std::size_t mQuorum;
    std::size_t mJumpThreshold;

    std::int64_t mHeight = 1;
    std::int32_t mRound = 0;
    Timeslot mRoundStart;
    bool mActive = false;
    Digest mTip = kGenesisParent;

    bool mProposed = false;
    bool mPrevoted = false;
    bool mPrecommitted = false;
    std::optional<Digest> mMyPrevote;

    BlockPtr mLockedBlock;
    std::int32_t mLockedRound = -1;
    std::vector<MsgPtr> mLockedPol;
    BlockPtr mValidBlock;
    std::int32_t mValidRound = -1;
    std::vector<MsgPtr> mValidPol;

    std::map<std::pair<std::int64_t, std::int32_t>, RoundTally> mTallies;
    std::unordered_map<Digest, BlockPtr, DigestHash> mBlocks;
    std::set<Transaction> mKnownTxs;
    std::unordered_set<std::string> mIncluded;
    std::size_t mChainLen = 0;
};

} // namespace rsmr
