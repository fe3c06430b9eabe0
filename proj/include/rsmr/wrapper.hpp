// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/base_smr.hpp"

#include <stdexcept>

namespace rsmr
{

/// Raised when the model's own bounds are exceeded, e.g. a recovery view
/// index beyond the active process count.
class SimulationFault : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// lead(r, v): position v of Pi* restricted to Pi_r.
ProcessId recoveryLeader(Permutation const& piStar, ProcessSet const& piR,
                         std::uint32_t v);

/// Number of distinct signers required by a recovery QC over `active`
/// processes: strictly more than half.
inline std::size_t
majorityOf(std::size_t active)
{
    return active / 2 + 1;
}

/// Longest sequence extended by more than half of `active` among the
/// genesis messages. Empty when no sequence has that support.
std::optional<Log> majoritySigma(std::vector<MsgPtr> const& genesis,
                                 std::size_t active);

/// View (r, v) of a ViewProposal message.
struct ViewIndex
{
    std::uint32_t r = 1;
    std::uint32_t v = 1;

    auto operator<=>(ViewIndex const&) const = default;
};

/// Votes for one ViewProposal.
struct QuorumCert
{
    MsgPtr target;
    std::vector<MsgPtr> votes;

    ViewIndex view() const;
    RProposalPtr proposal() const;
};

/// A vote set is a valid QC when every vote re-signs the same proposal,
/// every signer is in Pi_r - F, and more than half of Pi_r - F signed.
std::optional<QuorumCert> validQc(std::vector<MsgPtr> const& votes,
                                  ProcessSet const& piR);

struct FinishQc
{
    RProposalPtr proposal;
    std::vector<MsgPtr> votes;
};

/// Every proposal for execution r with a valid finish-QC in m, ordered by
/// proposal digest.
std::vector<FinishQc> validFinishQcs(MessageSet const& m, std::uint32_t r,
                                     ProcessSet const& piR);

struct WrapperConfig
{
    ProcessSet pi;
    Log genesisLog;
    Permutation piStar{{}};
    Timeslot delta = 2;
    Timeslot deltaStar = 10;
    Fraction rho;
};

enum class WrapperEventKind : std::uint8_t
{
    RecoveryBegin,
    RecoveryEnd,
};

struct WrapperEvent
{
    WrapperEventKind kind;
    std::uint32_t r;
    Timeslot localTime;
};

/// One process running the recoverable wrapper around successive
/// executions of the base protocol.
class Wrapper
{
  public:
    Wrapper(WrapperConfig cfg, ProcessId self, Signer signer);

    /// Runs one local timeslot. Every message in inbox and everything the
    /// process sends is added to M_i before returning. Returns the
    /// messages to send to all processes.
    std::vector<MsgPtr> step(Timeslot local, std::vector<MsgPtr> const& inbox);

    /// Events raised by the latest step.
    std::vector<WrapperEvent> const&
    events() const
    {
        return mEvents;
    }

    ProcessId
    self() const
    {
        return mSelf;
    }
    std::uint32_t
    r() const
    {
        return mR;
    }
    bool
    recovering() const
    {
        return mRec;
    }
    Log const&
    log() const
    {
        return mLog;
    }
    Log const&
    logStar() const
    {
        return mLogStar;
    }
    /// Pi_r and log_{G_r} for each execution started so far (index r-1).
    std::vector<ProcessSet> const&
    piHistory() const
    {
        return mPi;
    }
    std::vector<Log> const&
    genesisHistory() const
    {
        return mLogG;
    }
    MessageSet const&
    messages() const
    {
        return mM;
    }
    WrapperConfig const&
    config() const
    {
        return mCfg;
    }
    /// The running base process; null during recovery.
    BaseProcess const*
    base() const
    {
        return mRec ? nullptr : mBase.get();
    }
    CommitIndex const&
    commits() const
    {
        return *mCommits;
    }
    std::optional<Timeslot>
    recoveryStart() const
    {
        return mT0;
    }
    std::optional<ProcessSet> const&
    genesisSenders() const
    {
        return mPiR;
    }
    std::optional<QuorumCert> const&
    lock() const
    {
        return mQPlus;
    }

    ExecutionContext executionContext() const;
    /// The recovery view containing local time t, if any.
    std::optional<std::uint32_t> viewAt(Timeslot t) const;

    /// Checks conditions (i)-(ix) for proposal R at the current state.
    bool isValidViewProposal(MsgPtr const& r) const;
    /// At least two distinct (r, v) proposals signed by lead(r, v).
    bool detectsEquivocation(std::uint32_t v) const;
    /// Processes in Pi_r with a proof of guilt in M_i.
    ProcessSet const& guilty() const;
    /// What Makeproposal would send now for view v, or nothing if the
    /// view is aborted.
    std::optional<Body> proposalFor(std::uint32_t v) const;

  private:
    void ingest(MsgPtr const& m);
    void ingestAll(std::vector<MsgPtr> const& msgs);
    MsgPtr emit(Body body, std::vector<MsgPtr>& out);
    void startExecution(Timeslot local);
    void setLog(Log next, Timeslot local);
    bool runBase(Timeslot local, std::vector<MsgPtr>& out);
    void recovery(Timeslot local, std::vector<MsgPtr>& out);
    bool tryFinish(Timeslot local);
    std::optional<QuorumCert> heldQc(std::uint32_t v) const;
    ProcessSet const& active(ProcessSet const& faulty) const;

    WrapperConfig mCfg;
    ProcessId mSelf;
    Signer mSigner;

    std::uint32_t mR = 1;
    bool mRec = false;
    bool mStarted = false;
    Log mLog;
    Log mLogStar;
    std::vector<Timeslot> mSince; // mSince[L-1]: prefix of length L held since
    std::vector<ProcessSet> mPi;
    std::vector<Log> mLogG;
    MessageSet mM;
    std::vector<Transaction> mTxs;

    std::unique_ptr<BaseProcess> mBase;
    std::unique_ptr<CommitIndex> mCommits;

    std::optional<Timeslot> mT0;
    std::optional<ProcessSet> mPiR;
    std::optional<QuorumCert> mQPlus;
    std::set<std::uint32_t> mVoted;
    std::set<std::uint32_t> mLockSet;
    std::map<std::uint32_t, Timeslot> mTimers;

    std::vector<WrapperEvent> mEvents;

    mutable std::size_t mGuiltVersion = SIZE_MAX;
    mutable ProcessSet mGuilty;
    mutable std::unordered_map<Digest, std::optional<Log>, DigestHash>
        mSigmaCache;
    mutable std::map<ProcessSet, ProcessSet> mActiveCache;
};

} // namespace rsmr
