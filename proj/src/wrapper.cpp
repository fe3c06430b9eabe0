// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/wrapper.hpp"

#include <algorithm>

namespace rsmr
{

namespace
{

std::size_t
commonPrefix(Log const& a, Log const& b)
{
    std::size_t n = std::min(a.size(), b.size());
    std::size_t i = 0;
    while (i < n && a[i] == b[i])
    {
        ++i;
    }
    return i;
}

// Votes of one execution grouped by the proposal they re-sign.
std::map<Digest, std::vector<MsgPtr>>
votesByTarget(MessageSet const& m, std::uint32_t r, ProcessSet const& piR)
{
    // Votes from processes the target excludes do not count.
    std::map<Digest, std::vector<MsgPtr>> out;
    for (auto const& vote : m.ofKind(MsgKind::ViewVote, r))
    {
        auto const& target = vote->as<ViewVoteBody>()->target;
        auto const& p = target->as<ViewProposalBody>()->proposal;
        if (contains(piR, vote->signer) && !contains(p->faulty, vote->signer))
        {
            out[target->digest].push_back(vote);
        }
    }
    return out;
}

constexpr int kMaxPasses = 64;

} // namespace

ProcessId
recoveryLeader(Permutation const& piStar, ProcessSet const& piR,
               std::uint32_t v)
{
    if (v == 0 || v > piR.size())
    {
        throw SimulationFault("recovery view " + std::to_string(v) +
                              " exceeds |Pi_r| = " +
                              std::to_string(piR.size()));
    }
    return inducedPermutation(piStar, piR).at(v);
}

std::optional<Log>
majoritySigma(std::vector<MsgPtr> const& genesis, std::size_t active)
{
    auto need = majorityOf(active);
    if (genesis.size() < need)
    {
        return std::nullopt;
    }
    std::vector<Log const*> logs;
    for (auto const& m : genesis)
    {
        logs.push_back(&m->as<GenesisBody>()->sigma);
    }
    std::optional<Log> best;
    for (auto const* a : logs)
    {
        std::vector<std::size_t> lcp;
        for (auto const* b : logs)
        {
            lcp.push_back(commonPrefix(*a, *b));
        }
        std::sort(lcp.rbegin(), lcp.rend());
        auto len = lcp[need - 1];
        if (!best || len > best->size())
        {
            best = a->prefix(len);
        }
    }
    return best;
}

ViewIndex
QuorumCert::view() const
{
    auto const* b = target->as<ViewProposalBody>();
    return {b->proposal->r, b->v};
}

RProposalPtr
QuorumCert::proposal() const
{
    return target->as<ViewProposalBody>()->proposal;
}

std::optional<QuorumCert>
validQc(std::vector<MsgPtr> const& votes, ProcessSet const& piR)
{
    if (votes.empty())
    {
        return std::nullopt;
    }
    auto const* first = votes.front()->as<ViewVoteBody>();
    if (!first)
    {
        return std::nullopt;
    }
    QuorumCert qc{first->target, {}};
    auto active = setMinus(piR, qc.proposal()->faulty);
    std::set<ProcessId> signers;
    for (auto const& m : votes)
    {
        auto const* b = m->as<ViewVoteBody>();
        if (!b || b->target->digest != qc.target->digest ||
            !contains(active, m->signer))
        {
            return std::nullopt;
        }
        if (signers.insert(m->signer).second)
        {
            qc.votes.push_back(m);
        }
    }
    if (signers.size() < majorityOf(active.size()))
    {
        return std::nullopt;
    }
    return qc;
}

std::vector<FinishQc>
validFinishQcs(MessageSet const& m, std::uint32_t r, ProcessSet const& piR)
{
    std::map<Digest, FinishQc> groups;
    std::map<Digest, std::set<ProcessId>> signers;
    for (auto const& vote : m.ofKind(MsgKind::FinishVote, r))
    {
        auto const& p = vote->as<FinishVoteBody>()->proposal;
        if (!contains(piR, vote->signer) || contains(p->faulty, vote->signer))
        {
            continue;
        }
        auto& g = groups[p->digest];
        g.proposal = p;
        if (signers[p->digest].insert(vote->signer).second)
        {
            g.votes.push_back(vote);
        }
    }
    std::vector<FinishQc> out;
    for (auto& [d, g] : groups)
    {
        if (g.votes.size() >= majorityOf(setMinus(piR, g.proposal->faulty).size()))
        {
            out.push_back(std::move(g));
        }
    }
    return out;
}

Wrapper::Wrapper(WrapperConfig cfg, ProcessId self, Signer signer)
    : mCfg(std::move(cfg)), mSelf(self), mSigner(signer)
{
    if (signer.id() != self)
    {
        throw std::invalid_argument("wrapper signer does not match process");
    }
    mLog = mCfg.genesisLog;
    mLogStar = mCfg.genesisLog;
    mSince.assign(mLog.size(), 0);
    mPi.push_back(mCfg.pi);
    mLogG.push_back(mCfg.genesisLog);
}

ExecutionContext
Wrapper::executionContext() const
{
    return ExecutionContext{mPi[mR - 1], mLogG[mR - 1], mR, mCfg.rho};
}

std::optional<std::uint32_t>
Wrapper::viewAt(Timeslot t) const
{
    if (!mT0 || t < *mT0 + 2 * mCfg.deltaStar)
    {
        return std::nullopt;
    }
    return static_cast<std::uint32_t>((t - *mT0 - 2 * mCfg.deltaStar) /
                                      (8 * mCfg.deltaStar)) +
           1;
}

void
Wrapper::ingest(MsgPtr const& msg)
{
    for (auto const& m : mM.insert(msg))
    {
        if (auto tx = m->as<TxBody>())
        {
            mTxs.push_back(tx->tx);
            if (mBase)
            {
                mBase->observeTx(tx->tx);
            }
            continue;
        }
        auto k = m->kind();
        if ((k == MsgKind::Proposal || k == MsgKind::Prevote ||
             k == MsgKind::Precommit) &&
            m->execTag() == mR && mBase)
        {
            mBase->observe(m);
            mCommits->add(m);
        }
    }
}

void
Wrapper::ingestAll(std::vector<MsgPtr> const& msgs)
{
    for (auto const& m : msgs)
    {
        ingest(m);
    }
}

MsgPtr
Wrapper::emit(Body body, std::vector<MsgPtr>& out)
{
    auto m = mSigner.sign(std::move(body));
    ingest(m);
    out.push_back(m);
    return m;
}

void
Wrapper::startExecution(Timeslot local)
{
    auto ctx = executionContext();
    mBase = std::make_unique<BaseProcess>(ctx, mSelf, mCfg.delta, local);
    mCommits = std::make_unique<CommitIndex>(ctx);
    for (auto const& tx : mTxs)
    {
        mBase->observeTx(tx);
    }
    for (auto k : {MsgKind::Proposal, MsgKind::Prevote, MsgKind::Precommit})
    {
        for (auto const& m : mM.ofKind(k, mR))
        {
            mBase->observe(m);
            mCommits->add(m);
        }
    }
}

void
Wrapper::setLog(Log next, Timeslot local)
{
    auto keep = commonPrefix(mLog, next);
    mSince.resize(next.size());
    for (auto i = keep; i < next.size(); ++i)
    {
        mSince[i] = local;
    }
    mLog = std::move(next);
}

bool
Wrapper::runBase(Timeslot local, std::vector<MsgPtr>& out)
{
    if (!contains(mPi[mR - 1], mSelf))
    {
        return false;
    }
    auto bodies = mBase->step(local, mCommits->chain());
    for (auto& b : bodies)
    {
        emit(std::move(b), out);
    }
    return !bodies.empty();
}

ProcessSet const&
Wrapper::active(ProcessSet const& faulty) const
{
    auto it = mActiveCache.find(faulty);
    if (it == mActiveCache.end())
    {
        it = mActiveCache.emplace(faulty, setMinus(mPi[mR - 1], faulty)).first;
    }
    return it->second;
}

ProcessSet const&
Wrapper::guilty() const
{
    auto version = mM.ofKind(MsgKind::Prevote, mR).size() +
                   mM.ofKind(MsgKind::Precommit, mR).size() +
                   (static_cast<std::size_t>(mR) << 40);
    if (version != mGuiltVersion)
    {
        mGuilty = guiltySet(extractGuilt(executionContext(), mM));
        mGuiltVersion = version;
    }
    return mGuilty;
}

bool
Wrapper::detectsEquivocation(std::uint32_t v) const
{
    auto const& piR = mPi[mR - 1];
    if (v == 0 || v > piR.size())
    {
        return false;
    }
    auto leader = recoveryLeader(mCfg.piStar, piR, v);
    int seen = 0;
    for (auto const& m : mM.ofKind(MsgKind::ViewProposal, mR))
    {
        if (m->as<ViewProposalBody>()->v == v && m->signer == leader &&
            ++seen >= 2)
        {
            return true;
        }
    }
    return false;
}

bool
Wrapper::isValidViewProposal(MsgPtr const& msg) const
{
    auto const* vp = msg->as<ViewProposalBody>();
    if (!vp)
    {
        return false;
    }
    auto const& p = *vp->proposal;
    // (i)
    if (p.r != mR || mR > mPi.size())
    {
        return false;
    }
    auto const& piR = mPi[mR - 1];
    // (ii)
    if (!isSubset(p.faulty, piR) || p.faulty.size() >= piR.size() ||
        static_cast<std::int64_t>(p.faulty.size()) * mCfg.rho.den <
            mCfg.rho.num * static_cast<std::int64_t>(piR.size()))
    {
        return false;
    }
    // (iii)
    if (!isSubset(p.faulty, guilty()))
    {
        return false;
    }
    // (iv)
    auto const& live = active(p.faulty);
    std::set<ProcessId> signers;
    for (auto const& g : p.genesis)
    {
        auto const* gb = g->as<GenesisBody>();
        if (!gb || gb->r != mR || !contains(live, g->signer) ||
            !signers.insert(g->signer).second)
        {
            return false;
        }
    }
    // (v), restricted to senders outside F
    if (mPiR)
    {
        for (auto pk : *mPiR)
        {
            if (!contains(p.faulty, pk) && !signers.count(pk))
            {
                return false;
            }
        }
    }
    // (vi)
    auto cached = mSigmaCache.find(p.digest);
    if (cached == mSigmaCache.end())
    {
        cached =
            mSigmaCache.emplace(p.digest, majoritySigma(p.genesis, live.size()))
                .first;
    }
    if (!cached->second || *cached->second != p.sigma)
    {
        return false;
    }
    // (vii)
    if (vp->v == 0 || vp->v > piR.size() ||
        msg->signer != recoveryLeader(mCfg.piStar, piR, vp->v))
    {
        return false;
    }
    // (viii)
    if (mQPlus)
    {
        if (!vp->qc)
        {
            return false;
        }
        auto q = validQc(*vp->qc, piR);
        if (!q || q->view().r != mR || q->view() < mQPlus->view() ||
            q->proposal()->digest != p.digest)
        {
            return false;
        }
    }
    // (ix)
    return !detectsEquivocation(vp->v);
}

std::optional<QuorumCert>
Wrapper::heldQc(std::uint32_t v) const
{
    std::optional<QuorumCert> best;
    for (auto const& [d, votes] : votesByTarget(mM, mR, mPi[mR - 1]))
    {
        auto vv = votes.front()->as<ViewVoteBody>()->target->as<ViewProposalBody>()->v;
        if (vv >= v || (best && best->view().v >= vv))
        {
            continue;
        }
        if (auto q = validQc(votes, mPi[mR - 1]))
        {
            best = std::move(q);
        }
    }
    return best;
}

std::optional<Body>
Wrapper::proposalFor(std::uint32_t v) const
{
    if (auto q = heldQc(v))
    {
        return ViewProposalBody{q->proposal(), v, q->votes};
    }
    auto const& faulty = guilty();
    auto const& live = active(faulty);
    std::map<ProcessId, MsgPtr> pick;
    for (auto const& g : mM.ofKind(MsgKind::Genesis, mR))
    {
        if (!contains(live, g->signer))
        {
            continue;
        }
        auto [it, fresh] = pick.emplace(g->signer, g);
        if (!fresh && g->digest < it->second->digest)
        {
            it->second = g;
        }
    }
    std::vector<MsgPtr> chosen;
    for (auto const& [p, g] : pick)
    {
        chosen.push_back(g);
    }
    auto sigma = majoritySigma(chosen, live.size());
    if (!sigma)
    {
        return std::nullopt;
    }
    return ViewProposalBody{makeRProposal(faulty, *sigma, chosen, mR), v,
                            std::nullopt};
}

void
Wrapper::recovery(Timeslot local, std::vector<MsgPtr>& out)
{
    auto const ds = mCfg.deltaStar;
    if (!mT0)
    {
        mT0 = local;
    }
    auto const& piR = mPi[mR - 1];
    if (!mPiR && local >= *mT0 + 2 * ds)
    {
        ProcessSet senders;
        for (auto const& g : mM.ofKind(MsgKind::Genesis, mR))
        {
            if (contains(piR, g->signer))
            {
                senders.push_back(g->signer);
            }
        }
        mPiR = makeProcessSet(std::move(senders));
    }

    auto sinceFirst = local - *mT0 - 4 * ds;
    if (sinceFirst >= 0 && sinceFirst % (8 * ds) == 0)
    {
        auto v = static_cast<std::uint32_t>(sinceFirst / (8 * ds)) + 1;
        bool mine = recoveryLeader(mCfg.piStar, piR, v) == mSelf;
        bool already = false;
        for (auto const& m : mM.ofKind(MsgKind::ViewProposal, mR))
        {
            already = already || (m->signer == mSelf &&
                                  m->as<ViewProposalBody>()->v == v);
        }
        if (mine && !already)
        {
            if (auto body = proposalFor(v))
            {
                emit(std::move(*body), out);
            }
        }
    }

    auto view = viewAt(local);
    if (!view)
    {
        return;
    }
    auto v = *view;
    if (!mVoted.count(v))
    {
        for (auto const& m : mM.ofKind(MsgKind::ViewProposal, mR))
        {
            if (m->as<ViewProposalBody>()->v == v && isValidViewProposal(m))
            {
                emit(ViewVoteBody{m}, out);
                mVoted.insert(v);
                break;
            }
        }
    }
    if (!mLockSet.count(v))
    {
        for (auto const& [d, votes] : votesByTarget(mM, mR, mPi[mR - 1]))
        {
            auto const* target =
                votes.front()->as<ViewVoteBody>()->target->as<ViewProposalBody>();
            if (target->v != v)
            {
                continue;
            }
            if (auto q = validQc(votes, piR))
            {
                mQPlus = std::move(q);
                mLockSet.insert(v);
                mTimers[v] = local + 2 * ds;
                break;
            }
        }
    }
    auto timer = mTimers.find(v);
    if (timer != mTimers.end() && timer->second == local)
    {
        mTimers.erase(timer);
        if (mQPlus && !detectsEquivocation(v))
        {
            emit(FinishVoteBody{mQPlus->proposal()}, out);
        }
    }
}

bool
Wrapper::tryFinish(Timeslot local)
{
    auto qcs = validFinishQcs(mM, mR, mPi[mR - 1]);
    if (qcs.empty())
    {
        return false;
    }
    auto const& p = *qcs.front().proposal;
    mPi.push_back(setMinus(mPi[mR - 1], p.faulty));
    mLogG.push_back(p.sigma);
    mEvents.push_back({WrapperEventKind::RecoveryEnd, mR, local});
    ++mR;
    mT0.reset();
    mQPlus.reset();
    mPiR.reset();
    mVoted.clear();
    mLockSet.clear();
    mTimers.clear();
    mSigmaCache.clear();
    mActiveCache.clear();
    mRec = false;
    setLog(p.sigma, local);
    startExecution(local);
    return true;
}

std::vector<MsgPtr>
Wrapper::step(Timeslot local, std::vector<MsgPtr> const& inbox)
{
    mEvents.clear();
    std::vector<MsgPtr> out;
    if (!mStarted)
    {
        mStarted = true;
        startExecution(local);
    }
    ingestAll(inbox);

    for (int pass = 0; pass < kMaxPasses; ++pass)
    {
        if (!mRec)
        {
            if (mCommits->hasViolation())
            {
                emit(GenesisBody{mLog, mR}, out);
                setLog(mLogG[mR - 1], local);
                mBase.reset();
                mRec = true;
                mEvents.push_back({WrapperEventKind::RecoveryBegin, mR, local});
                continue;
            }
            auto f = mCommits->finalized();
            if (f.size() > mLog.size())
            {
                setLog(std::move(f), local);
            }
            auto horizon = local - 2 * mCfg.deltaStar;
            if (isPrefix(mLogStar, mLog))
            {
                auto len = mLog.size();
                while (len > mLogStar.size() && mSince[len - 1] > horizon)
                {
                    --len;
                }
                if (len > mLogStar.size())
                {
                    mLogStar = mLog.prefix(len);
                }
            }
            if (runBase(local, out))
            {
                continue;
            }
            break;
        }
        auto before = out.size();
        recovery(local, out);
        if (tryFinish(local))
        {
            continue;
        }
        if (out.size() == before)
        {
            break;
        }
    }
    return out;
}

} // namespace rsmr
