// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/base_smr.hpp"

#include <algorithm>
#include <tuple>

namespace rsmr
{

std::size_t
ceilFraction(Fraction rho, std::size_t n)
{
    if (rho.den <= 0 || rho.num < 0)
    {
        throw std::invalid_argument("fraction must be non-negative");
    }
    auto prod = static_cast<std::int64_t>(n) * rho.num;
    return static_cast<std::size_t>((prod + rho.den - 1) / rho.den);
}

std::size_t
quorum(std::size_t nPrime, Fraction rho)
{
    if (nPrime == 0)
    {
        throw std::invalid_argument("quorum of an empty process set");
    }
    return (nPrime + ceilFraction(rho, nPrime) + 1) / 2;
}

ProcessId
baseLeader(ExecutionContext const& ctx, std::int64_t height,
           std::int32_t round)
{
    auto n = static_cast<std::int64_t>(ctx.members.size());
    auto idx = ((height - 1 + round) % n + n) % n;
    return ctx.members[static_cast<std::size_t>(idx)];
}

bool
isWellFormedPol(ExecutionContext const& ctx, std::vector<MsgPtr> const& pol,
                std::int64_t height, std::int32_t round,
                std::optional<Digest> const& value)
{
    std::set<ProcessId> signers;
    for (auto const& m : pol)
    {
        auto pv = m->as<PrevoteBody>();
        if (pv && pv->exec == ctx.exec && pv->height == height &&
            pv->round == round && pv->value == value &&
            contains(ctx.members, m->signer))
        {
            signers.insert(m->signer);
        }
    }
    return signers.size() >= ctx.quorumSize();
}

// ---------------------------------------------------------------------------

CommitIndex::CommitIndex(ExecutionContext ctx)
    : mCtx(std::move(ctx)), mQuorum(mCtx.quorumSize())
{
}

bool
CommitIndex::add(MsgPtr const& m)
{
    auto pc = m->as<PrecommitBody>();
    if (!pc || !pc->block || pc->exec != mCtx.exec ||
        !contains(mCtx.members, m->signer))
    {
        return false;
    }
    auto const& block = pc->block;
    if (block->exec != mCtx.exec || block->height != pc->height ||
        block->height < 1)
    {
        return false;
    }
    auto& t = mTallies[block->digest];
    if (!t.block)
    {
        t.block = block;
    }
    auto& signers = t.signersByRound[pc->round];
    signers.insert(m->signer);
    if (t.committed || signers.size() < mQuorum)
    {
        return false;
    }
    t.committed = true;
    auto& atHeight = mCommitted[block->height];
    atHeight.insert(std::lower_bound(atHeight.begin(), atHeight.end(), block,
                                     [](BlockPtr const& a, BlockPtr const& b) {
                                         return a->digest < b->digest;
                                     }),
                    block);
    mForked = mForked || atHeight.size() > 1;
    ++mCommitCount;
    mDirty = true;
    return true;
}

void
CommitIndex::addAll(std::vector<MsgPtr> const& msgs)
{
    for (auto const& m : msgs)
    {
        add(m);
    }
}

namespace
{

bool
txPrefix(std::vector<Transaction> const& a, std::vector<Transaction> const& b)
{
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

} // namespace

void
CommitIndex::refresh() const
{
    if (!mDirty)
    {
        return;
    }
    mDirty = false;
    mChain.clear();
    Digest prev = kGenesisParent;
    for (std::int64_t h = 1;; ++h)
    {
        auto it = mCommitted.find(h);
        if (it == mCommitted.end())
        {
            break;
        }
        BlockPtr pick;
        for (auto const& b : it->second) // sorted by digest
        {
            if (b->parent == prev)
            {
                pick = b;
                break;
            }
        }
        if (!pick)
        {
            break;
        }
        mChain.push_back(pick);
        prev = pick->digest;
    }

    mViolation = false;
    if (!mForked)
    {
        return;
    }
    // Reachable tree: committed blocks whose whole ancestry is committed.
    std::unordered_map<Digest, std::vector<BlockPtr>, DigestHash> children;
    std::unordered_map<Digest, std::int64_t, DigestHash> reachable{
        {kGenesisParent, 0}};
    for (auto const& [h, blocks] : mCommitted)
    {
        for (auto const& b : blocks)
        {
            auto it = reachable.find(b->parent);
            if (it != reachable.end() && it->second == h - 1)
            {
                children[b->parent].push_back(b);
                reachable.emplace(b->digest, h);
            }
        }
    }
    // At a fork, the branch through the smaller-digest child wins. A
    // violation exists iff some block on a losing branch carries a
    // transaction sequence (from the fork) that is not a prefix of the
    // winning child's sequence.
    for (auto const& [parent, kids] : children)
    {
        for (std::size_t i = 0; i < kids.size() && !mViolation; ++i)
        {
            for (std::size_t j = i + 1; j < kids.size() && !mViolation; ++j)
            {
                auto const& winner = kids[i];
                auto const& loser = kids[j];
                std::vector<std::pair<BlockPtr, std::vector<Transaction>>> stack;
                stack.push_back({loser, loser->txs});
                while (!stack.empty() && !mViolation)
                {
                    auto [b, seq] = std::move(stack.back());
                    stack.pop_back();
                    if (!txPrefix(seq, winner->txs))
                    {
                        mViolation = true;
                        break;
                    }
                    auto cit = children.find(b->digest);
                    if (cit == children.end())
                    {
                        continue;
                    }
                    for (auto const& c : cit->second)
                    {
                        auto next = seq;
                        next.insert(next.end(), c->txs.begin(), c->txs.end());
                        stack.push_back({c, std::move(next)});
                    }
                }
            }
        }
        if (mViolation)
        {
            break;
        }
    }
}

std::vector<BlockPtr> const&
CommitIndex::chain() const
{
    refresh();
    return mChain;
}

Log
CommitIndex::finalized() const
{
    refresh();
    std::vector<Transaction> txs = mCtx.genesisLog.entries();
    for (auto const& b : mChain)
    {
        txs.insert(txs.end(), b->txs.begin(), b->txs.end());
    }
    return Log(std::move(txs));
}

bool
CommitIndex::hasViolation() const
{
    refresh();
    return mViolation;
}

std::vector<BlockPtr>
CommitIndex::committedBlocks() const
{
    std::vector<BlockPtr> out;
    for (auto const& [h, blocks] : mCommitted)
    {
        out.insert(out.end(), blocks.begin(), blocks.end());
    }
    return out;
}

Log
finalizeFn(ExecutionContext const& ctx, MessageSet const& m)
{
    CommitIndex idx(ctx);
    idx.addAll(m.ofKind(MsgKind::Precommit, ctx.exec));
    return idx.finalized();
}

bool
hasViolation(ExecutionContext const& ctx, MessageSet const& m)
{
    CommitIndex idx(ctx);
    idx.addAll(m.ofKind(MsgKind::Precommit, ctx.exec));
    return idx.hasViolation();
}

bool
isCertificate(ExecutionContext const& ctx, MessageSet const& m,
              Log const& sigma)
{
    return isPrefix(sigma, finalizeFn(ctx, m));
}

// ---------------------------------------------------------------------------

char const*
guiltKindName(GuiltKind kind)
{
    switch (kind)
    {
    case GuiltKind::PrevoteEquivocation:
        return "prevote-equivocation";
    case GuiltKind::PrecommitEquivocation:
        return "precommit-equivocation";
    case GuiltKind::Amnesia:
        return "amnesia";
    case GuiltKind::UnjustifiedPrecommit:
        return "unjustified-precommit";
    case GuiltKind::UnjustifiedPrevote:
        return "unjustified-prevote";
    }
    return "?";
}

namespace
{

struct VoteView
{
    MsgPtr msg;
    std::int64_t height;
    std::int32_t round;
    std::optional<Digest> value;
    std::int32_t justRound = -1;
    std::vector<MsgPtr> const* pol;
};

std::optional<VoteView>
prevoteView(ExecutionContext const& ctx, MsgPtr const& m)
{
    auto pv = m->as<PrevoteBody>();
    if (!pv || pv->exec != ctx.exec)
    {
        return std::nullopt;
    }
    return VoteView{m, pv->height, pv->round, pv->value, pv->justRound,
                    &pv->pol};
}

std::optional<VoteView>
precommitView(ExecutionContext const& ctx, MsgPtr const& m)
{
    auto pc = m->as<PrecommitBody>();
    if (!pc || pc->exec != ctx.exec)
    {
        return std::nullopt;
    }
    std::optional<Digest> value;
    if (pc->block)
    {
        value = pc->block->digest;
    }
    return VoteView{m, pc->height, pc->round, value, -1, &pc->pol};
}

bool
unjustifiedPrevote(ExecutionContext const& ctx, VoteView const& v)
{
    if (v.justRound < -1)
    {
        return true;
    }
    if (v.justRound == -1)
    {
        return false;
    }
    if (!v.value || v.justRound >= v.round)
    {
        return true;
    }
    return !isWellFormedPol(ctx, *v.pol, v.height, v.justRound, v.value);
}

bool
unjustifiedPrecommit(ExecutionContext const& ctx, VoteView const& v)
{
    if (!v.value)
    {
        return false;
    }
    auto pc = v.msg->as<PrecommitBody>();
    if (pc->block->height != v.height || pc->block->exec != ctx.exec)
    {
        return true;
    }
    return !isWellFormedPol(ctx, *v.pol, v.height, v.round, v.value);
}

bool
isAmnesia(VoteView const& precommit, VoteView const& prevote)
{
    return precommit.value && prevote.value &&
           precommit.height == prevote.height &&
           *precommit.value != *prevote.value &&
           prevote.round > precommit.round &&
           prevote.justRound < precommit.round;
}

} // namespace

bool
verifyGuiltProof(ExecutionContext const& ctx, GuiltProof const& proof)
{
    if (!contains(ctx.members, proof.culprit))
    {
        return false;
    }
    for (auto const& m : proof.evidence)
    {
        if (m->signer != proof.culprit)
        {
            return false;
        }
    }
    auto const& ev = proof.evidence;
    switch (proof.kind)
    {
    case GuiltKind::PrevoteEquivocation:
    case GuiltKind::PrecommitEquivocation: {
        if (ev.size() != 2 || ev[0]->digest == ev[1]->digest)
        {
            return false;
        }
        auto view = proof.kind == GuiltKind::PrevoteEquivocation
                        ? &prevoteView
                        : &precommitView;
        auto a = view(ctx, ev[0]);
        auto b = view(ctx, ev[1]);
        return a && b && a->height == b->height && a->round == b->round;
    }
    case GuiltKind::Amnesia: {
        if (ev.size() != 2)
        {
            return false;
        }
        auto pc = precommitView(ctx, ev[0]);
        auto pv = prevoteView(ctx, ev[1]);
        return pc && pv && isAmnesia(*pc, *pv);
    }
    case GuiltKind::UnjustifiedPrecommit: {
        auto pc = ev.size() == 1 ? precommitView(ctx, ev[0]) : std::nullopt;
        return pc && unjustifiedPrecommit(ctx, *pc);
    }
    case GuiltKind::UnjustifiedPrevote: {
        auto pv = ev.size() == 1 ? prevoteView(ctx, ev[0]) : std::nullopt;
        return pv && unjustifiedPrevote(ctx, *pv);
    }
    }
    return false;
}

std::vector<GuiltProof>
extractGuilt(ExecutionContext const& ctx, std::vector<MsgPtr> const& baseMsgs)
{
    using Slot = std::tuple<ProcessId, std::int64_t, std::int32_t>;
    std::map<Slot, std::vector<VoteView>> prevotes;
    std::map<Slot, std::vector<VoteView>> precommits;
    std::map<ProcessId, GuiltProof> found;

    auto record = [&](ProcessId p, GuiltKind kind, std::vector<MsgPtr> ev) {
        auto it = found.find(p);
        if (it == found.end() ||
            static_cast<int>(kind) < static_cast<int>(it->second.kind))
        {
            found[p] = GuiltProof{p, kind, std::move(ev)};
        }
    };

    for (auto const& m : baseMsgs)
    {
        if (!contains(ctx.members, m->signer))
        {
            continue;
        }
        if (auto pv = prevoteView(ctx, m))
        {
            prevotes[{m->signer, pv->height, pv->round}].push_back(*pv);
            if (unjustifiedPrevote(ctx, *pv))
            {
                record(m->signer, GuiltKind::UnjustifiedPrevote, {m});
            }
        }
        else if (auto pc = precommitView(ctx, m))
        {
            precommits[{m->signer, pc->height, pc->round}].push_back(*pc);
            if (unjustifiedPrecommit(ctx, *pc))
            {
                record(m->signer, GuiltKind::UnjustifiedPrecommit, {m});
            }
        }
    }

    auto equivocations = [&](auto const& bySlot, GuiltKind kind) {
        for (auto const& [slot, votes] : bySlot)
        {
            for (std::size_t i = 1; i < votes.size(); ++i)
            {
                if (votes[i].msg->digest != votes[0].msg->digest)
                {
                    record(std::get<0>(slot), kind,
                           {votes[0].msg, votes[i].msg});
                    break;
                }
            }
        }
    };
    equivocations(prevotes, GuiltKind::PrevoteEquivocation);
    equivocations(precommits, GuiltKind::PrecommitEquivocation);

    // Amnesia: per (signer, height), compare non-nil precommits against
    // later non-nil prevotes.
    std::map<std::pair<ProcessId, std::int64_t>, std::vector<VoteView>> pcs;
    for (auto const& [slot, votes] : precommits)
    {
        for (auto const& v : votes)
        {
            if (v.value)
            {
                pcs[{std::get<0>(slot), std::get<1>(slot)}].push_back(v);
            }
        }
    }
    for (auto const& [slot, votes] : prevotes)
    {
        auto it = pcs.find({std::get<0>(slot), std::get<1>(slot)});
        if (it == pcs.end())
        {
            continue;
        }
        for (auto const& pv : votes)
        {
            for (auto const& pc : it->second)
            {
                if (isAmnesia(pc, pv))
                {
                    record(std::get<0>(slot), GuiltKind::Amnesia,
                           {pc.msg, pv.msg});
                }
            }
        }
    }

    std::vector<GuiltProof> out;
    for (auto& [p, proof] : found)
    {
        out.push_back(std::move(proof));
    }
    return out;
}

std::vector<GuiltProof>
extractGuilt(ExecutionContext const& ctx, MessageSet const& m)
{
    auto msgs = m.ofKind(MsgKind::Prevote, ctx.exec);
    auto const& pcs = m.ofKind(MsgKind::Precommit, ctx.exec);
    msgs.insert(msgs.end(), pcs.begin(), pcs.end());
    return extractGuilt(ctx, msgs);
}

ProcessSet
guiltySet(std::vector<GuiltProof> const& proofs)
{
    ProcessSet out;
    for (auto const& p : proofs)
    {
        out.push_back(p.culprit);
    }
    return makeProcessSet(std::move(out));
}

// ---------------------------------------------------------------------------

BaseProcess::BaseProcess(ExecutionContext ctx, ProcessId self, Timeslot delta,
                         Timeslot startTime)
    : mCtx(std::move(ctx))
    , mSelf(self)
    , mDelta(delta)
    , mQuorum(mCtx.quorumSize())
    , mJumpThreshold(std::max<std::size_t>(
          1, ceilFraction(mCtx.rho, mCtx.members.size())))
    , mRoundStart(startTime)
{
    for (auto const& tx : mCtx.genesisLog.entries())
    {
        mIncluded.insert(tx.payload);
    }
}

BaseProcess::RoundTally&
BaseProcess::tally(std::int64_t h, std::int32_t k)
{
    return mTallies[{h, k}];
}

BaseProcess::RoundTally const*
BaseProcess::findTally(std::int64_t h, std::int32_t k) const
{
    auto it = mTallies.find({h, k});
    return it == mTallies.end() ? nullptr : &it->second;
}

void
BaseProcess::observeTx(Transaction const& tx)
{
    mKnownTxs.insert(tx);
}

void
BaseProcess::observe(MsgPtr const& m)
{
    if (auto tx = m->as<TxBody>())
    {
        observeTx(tx->tx);
        return;
    }
    auto tag = m->execTag();
    if (!tag || *tag != mCtx.exec || !contains(mCtx.members, m->signer))
    {
        return;
    }
    if (auto p = m->as<ProposalBody>())
    {
        if (p->height < mHeight || p->round < 0 ||
            m->signer != baseLeader(mCtx, p->height, p->round))
        {
            return;
        }
        auto& t = tally(p->height, p->round);
        t.proposals.push_back(m);
        t.anySigners.insert(m->signer);
        mBlocks.emplace(p->block->digest, p->block);
    }
    else if (auto pv = m->as<PrevoteBody>())
    {
        if (pv->height < mHeight || pv->round < 0)
        {
            return;
        }
        auto& t = tally(pv->height, pv->round);
        if (t.prevoteSigners[pv->value].insert(m->signer).second)
        {
            t.prevotes[pv->value].push_back(m);
        }
        t.anySigners.insert(m->signer);
    }
    else if (auto pc = m->as<PrecommitBody>())
    {
        if (pc->height < mHeight || pc->round < 0)
        {
            return;
        }
        auto& t = tally(pc->height, pc->round);
        t.precommitSigners.insert(m->signer);
        t.anySigners.insert(m->signer);
        if (pc->block)
        {
            mBlocks.emplace(pc->block->digest, pc->block);
        }
    }
}

std::vector<Transaction>
BaseProcess::pending() const
{
    std::vector<Transaction> out;
    for (auto const& tx : mKnownTxs)
    {
        if (!mIncluded.count(tx.payload))
        {
            out.push_back(tx);
        }
    }
    return out;
}

bool
BaseProcess::isValidBlock(Block const& b) const
{
    if (b.exec != mCtx.exec || b.height != mHeight || b.parent != mTip ||
        b.txs.empty())
    {
        return false;
    }
    std::unordered_set<std::string> seen;
    for (auto const& tx : b.txs)
    {
        if (mIncluded.count(tx.payload) || !seen.insert(tx.payload).second)
        {
            return false;
        }
    }
    return true;
}

void
BaseProcess::advanceHeight(Timeslot now, std::vector<BlockPtr> const& chain)
{
    for (auto i = mChainLen; i < chain.size(); ++i)
    {
        for (auto const& tx : chain[i]->txs)
        {
            mIncluded.insert(tx.payload);
        }
    }
    mChainLen = chain.size();
    mTip = chain.back()->digest;
    mHeight = static_cast<std::int64_t>(chain.size()) + 1;
    mLockedBlock.reset();
    mLockedRound = -1;
    mLockedPol.clear();
    mValidBlock.reset();
    mValidRound = -1;
    mValidPol.clear();
    mActive = false;
    mTallies.erase(mTallies.begin(), mTallies.lower_bound({mHeight, 0}));
    for (auto it = mBlocks.begin(); it != mBlocks.end();)
    {
        it = it->second->height < mHeight ? mBlocks.erase(it) : std::next(it);
    }
    enterRound(0, now);
}

void
BaseProcess::enterRound(std::int32_t round, Timeslot now)
{
    mRound = round;
    mRoundStart = now;
    mProposed = false;
    mPrevoted = false;
    mPrecommitted = false;
    mMyPrevote.reset();
}

std::optional<std::vector<MsgPtr>>
BaseProcess::polFor(std::int32_t k, Digest const& value) const
{
    auto t = findTally(mHeight, k);
    if (!t)
    {
        return std::nullopt;
    }
    auto it = t->prevotes.find(value);
    if (it == t->prevotes.end() || it->second.size() < mQuorum)
    {
        return std::nullopt;
    }
    return it->second;
}

void
BaseProcess::updateValid()
{
    for (auto k = mRound; k > mValidRound; --k)
    {
        auto t = findTally(mHeight, k);
        if (!t)
        {
            continue;
        }
        for (auto const& [value, votes] : t->prevotes)
        {
            if (!value || votes.size() < mQuorum)
            {
                continue;
            }
            auto bit = mBlocks.find(*value);
            if (bit == mBlocks.end() || !isValidBlock(*bit->second))
            {
                continue;
            }
            mValidBlock = bit->second;
            mValidRound = k;
            mValidPol = votes;
            return;
        }
    }
}

bool
BaseProcess::trySteps(Timeslot now, std::vector<Body>& out)
{
    auto const exec = mCtx.exec;
    auto const before = out.size();

    if (baseLeader(mCtx, mHeight, mRound) == mSelf && !mProposed)
    {
        if (mValidBlock && mValidRound < mRound)
        {
            out.push_back(ProposalBody{exec, mHeight, mRound, mValidBlock,
                                       mValidRound, mValidPol});
            mProposed = true;
        }
        else if (auto txs = pending(); !txs.empty())
        {
            auto block = makeBlock(exec, mHeight, mTip, std::move(txs), mSelf);
            mBlocks.emplace(block->digest, block);
            out.push_back(ProposalBody{exec, mHeight, mRound, block, -1, {}});
            mProposed = true;
        }
    }

    auto const* t = findTally(mHeight, mRound);

    if (!mPrevoted)
    {
        ProposalBody const* best = nullptr;
        if (t)
        {
            for (auto const& m : t->proposals)
            {
                auto p = m->as<ProposalBody>();
                if (!isValidBlock(*p->block))
                {
                    continue;
                }
                if (p->validRound >= 0 &&
                    (p->validRound >= mRound ||
                     !isWellFormedPol(mCtx, p->pol, mHeight, p->validRound,
                                      p->block->digest)))
                {
                    continue;
                }
                if (p->validRound < -1)
                {
                    continue;
                }
                if (!best || p->block->digest < best->block->digest)
                {
                    best = p;
                }
            }
        }
        if (best)
        {
            auto const& d = best->block->digest;
            bool lockedOnIt = mLockedBlock && mLockedBlock->digest == d;
            PrevoteBody vote{exec, mHeight, mRound, std::nullopt, -1, {}};
            if (best->validRound == -1)
            {
                if (mLockedRound == -1 || lockedOnIt)
                {
                    vote.value = d;
                    if (lockedOnIt)
                    {
                        vote.justRound = mLockedRound;
                        vote.pol = mLockedPol;
                    }
                }
            }
            else if (mLockedRound <= best->validRound || lockedOnIt)
            {
                vote.value = d;
                vote.justRound = best->validRound;
                vote.pol = best->pol;
                if (lockedOnIt && mLockedRound > best->validRound)
                {
                    vote.justRound = mLockedRound;
                    vote.pol = mLockedPol;
                }
            }
            mMyPrevote = vote.value;
            out.push_back(std::move(vote));
            mPrevoted = true;
        }
        else if (now >= mRoundStart + 3 * mDelta)
        {
            out.push_back(PrevoteBody{exec, mHeight, mRound, std::nullopt, -1, {}});
            mPrevoted = true;
        }
    }

    if (mPrevoted && !mPrecommitted)
    {
        // Prefer the value this process prevoted, else the smallest digest.
        BlockPtr choice;
        if (t)
        {
            for (auto const& [value, votes] : t->prevotes)
            {
                if (!value || votes.size() < mQuorum)
                {
                    continue;
                }
                auto bit = mBlocks.find(*value);
                if (bit == mBlocks.end() || !isValidBlock(*bit->second))
                {
                    continue;
                }
                if (!choice || mMyPrevote == value)
                {
                    choice = bit->second;
                }
            }
        }
        if (choice)
        {
            auto pol = *polFor(mRound, choice->digest);
            out.push_back(PrecommitBody{exec, mHeight, mRound, choice, pol});
            mLockedBlock = choice;
            mLockedRound = mRound;
            mLockedPol = std::move(pol);
            mPrecommitted = true;
        }
        else
        {
            bool nilQuorum = false;
            if (t)
            {
                auto it = t->prevoteSigners.find(std::nullopt);
                nilQuorum = it != t->prevoteSigners.end() &&
                            it->second.size() >= mQuorum;
            }
            if (nilQuorum || now >= mRoundStart + 5 * mDelta)
            {
                out.push_back(
                    PrecommitBody{exec, mHeight, mRound, nullptr, {}});
                mPrecommitted = true;
            }
        }
    }

    updateValid();

    if ((t && t->precommitSigners.size() >= mQuorum) ||
        now >= mRoundStart + 7 * mDelta)
    {
        enterRound(mRound + 1, now);
        return true;
    }
    return out.size() != before;
}

std::vector<Body>
BaseProcess::step(Timeslot now, std::vector<BlockPtr> const& chain)
{
    std::vector<Body> out;
    if (chain.size() > mChainLen)
    {
        advanceHeight(now, chain);
    }
    if (!mActive)
    {
        bool seen = mTallies.lower_bound({mHeight, 0}) != mTallies.end() &&
                    mTallies.lower_bound({mHeight, 0})->first.first == mHeight;
        mRoundStart = now;
        if (!seen && pending().empty())
        {
            return out;
        }
        mActive = true;
    }
    std::int32_t target = mRound;
    for (auto it = mTallies.lower_bound({mHeight, mRound + 1});
         it != mTallies.end() && it->first.first == mHeight; ++it)
    {
        if (it->second.anySigners.size() >= mJumpThreshold)
        {
            target = it->first.second;
        }
    }
    if (target > mRound)
    {
        enterRound(target, now);
    }
    // Rounds may cascade within a slot; emitted messages end the pass so
    // the caller can ingest them first.
    for (int guard = 0; guard < 4; ++guard)
    {
        auto produced = out.size();
        bool progressed = trySteps(now, out);
        if (out.size() != produced || !progressed)
        {
            break;
        }
    }
    return out;
}

} // namespace rsmr
