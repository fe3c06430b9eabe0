// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/message.hpp"

#include <algorithm>

namespace rsmr
{

namespace
{

template <class... Ts> struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

void
addMessages(Hasher& h, std::vector<MsgPtr> const& msgs)
{
    h.add(static_cast<std::uint64_t>(msgs.size()));
    for (auto const& m : msgs)
    {
        h.add(m->digest);
    }
}

void
addTxs(Hasher& h, std::vector<Transaction> const& txs)
{
    h.add(static_cast<std::uint64_t>(txs.size()));
    for (auto const& tx : txs)
    {
        h.add(std::string_view(tx.payload));
    }
}

Digest
digestOf(ProcessId signer, Body const& body)
{
    Hasher h;
    h.add(static_cast<std::uint64_t>(body.index()));
    h.add(static_cast<std::uint64_t>(signer.value));
    std::visit(
        Overloaded{
            [&](TxBody const& b) { h.add(std::string_view(b.tx.payload)); },
            [&](ProposalBody const& b) {
                h.add(static_cast<std::uint64_t>(b.exec))
                    .add(b.height)
                    .add(static_cast<std::int64_t>(b.round))
                    .add(b.block->digest)
                    .add(static_cast<std::int64_t>(b.validRound));
                addMessages(h, b.pol);
            },
            [&](PrevoteBody const& b) {
                h.add(static_cast<std::uint64_t>(b.exec))
                    .add(b.height)
                    .add(static_cast<std::int64_t>(b.round))
                    .add(static_cast<std::uint64_t>(b.value.has_value()))
                    .add(b.value.value_or(Digest{}))
                    .add(static_cast<std::int64_t>(b.justRound));
                addMessages(h, b.pol);
            },
            [&](PrecommitBody const& b) {
                h.add(static_cast<std::uint64_t>(b.exec))
                    .add(b.height)
                    .add(static_cast<std::int64_t>(b.round))
                    .add(static_cast<std::uint64_t>(b.block != nullptr))
                    .add(b.block ? b.block->digest : Digest{});
                addMessages(h, b.pol);
            },
            [&](GenesisBody const& b) {
                h.add(b.sigma).add(static_cast<std::uint64_t>(b.r));
            },
            [&](ViewProposalBody const& b) {
                h.add(b.proposal->digest)
                    .add(static_cast<std::uint64_t>(b.v))
                    .add(static_cast<std::uint64_t>(b.qc.has_value()));
                if (b.qc)
                {
                    addMessages(h, *b.qc);
                }
            },
            [&](ViewVoteBody const& b) { h.add(b.target->digest); },
            [&](FinishVoteBody const& b) { h.add(b.proposal->digest); },
        },
        body);
    return h.finish();
}

void
requirePresent(bool ok, char const* what)
{
    if (!ok)
    {
        throw std::invalid_argument(what);
    }
}

void
validateShape(Body const& body)
{
    std::visit(Overloaded{
                   [](ProposalBody const& b) {
                       requirePresent(b.block != nullptr,
                                      "proposal without block");
                   },
                   [](ViewProposalBody const& b) {
                       requirePresent(b.proposal != nullptr,
                                      "view proposal without r-proposal");
                   },
                   [](ViewVoteBody const& b) {
                       requirePresent(b.target != nullptr &&
                                          b.target->kind() ==
                                              MsgKind::ViewProposal,
                                      "view vote must target a proposal");
                   },
                   [](FinishVoteBody const& b) {
                       requirePresent(b.proposal != nullptr,
                                      "finish vote without r-proposal");
                   },
                   [](auto const&) {},
               },
               body);
}

} // namespace

char const*
kindName(MsgKind kind)
{
    switch (kind)
    {
    case MsgKind::Tx:
        return "tx";
    case MsgKind::Proposal:
        return "proposal";
    case MsgKind::Prevote:
        return "prevote";
    case MsgKind::Precommit:
        return "precommit";
    case MsgKind::Genesis:
        return "genesis";
    case MsgKind::ViewProposal:
        return "view_proposal";
    case MsgKind::ViewVote:
        return "view_vote";
    case MsgKind::FinishVote:
        return "finish_vote";
    }
    return "?";
}

BlockPtr
makeBlock(std::uint32_t exec, std::int64_t height, Digest parent,
          std::vector<Transaction> txs, ProcessId proposer)
{
    auto b = std::make_shared<Block>();
    b->exec = exec;
    b->height = height;
    b->parent = parent;
    b->txs = std::move(txs);
    b->proposer = proposer;
    Hasher h;
    h.add(std::string_view("block"))
        .add(static_cast<std::uint64_t>(exec))
        .add(height)
        .add(parent)
        .add(static_cast<std::uint64_t>(proposer.value));
    addTxs(h, b->txs);
    b->digest = h.finish();
    return b;
}

RProposalPtr
makeRProposal(ProcessSet faulty, Log sigma, std::vector<MsgPtr> genesis,
              std::uint32_t r)
{
    auto p = std::make_shared<RProposal>();
    p->faulty = makeProcessSet(std::move(faulty));
    p->sigma = std::move(sigma);
    std::sort(genesis.begin(), genesis.end(),
              [](MsgPtr const& a, MsgPtr const& b) {
                  return std::tie(a->signer, a->digest) <
                         std::tie(b->signer, b->digest);
              });
    p->genesis = std::move(genesis);
    p->r = r;
    Hasher h;
    h.add(std::string_view("r-proposal"))
        .add(p->faulty)
        .add(p->sigma)
        .add(static_cast<std::uint64_t>(r));
    addMessages(h, p->genesis);
    p->digest = h.finish();
    return p;
}

Message::Message(SignatureKey, ProcessId signer_, Body body_)
    : signer(signer_), body(std::move(body_))
{
    validateShape(body);
    digest = digestOf(signer, body);
}

MsgKind
Message::kind() const
{
    return static_cast<MsgKind>(body.index());
}

std::vector<MsgPtr>
Message::children() const
{
    return std::visit(
        Overloaded{
            [](ProposalBody const& b) { return b.pol; },
            [](PrevoteBody const& b) { return b.pol; },
            [](PrecommitBody const& b) { return b.pol; },
            [](ViewProposalBody const& b) {
                auto out = b.proposal->genesis;
                if (b.qc)
                {
                    out.insert(out.end(), b.qc->begin(), b.qc->end());
                }
                return out;
            },
            [](ViewVoteBody const& b) { return std::vector<MsgPtr>{b.target}; },
            [](FinishVoteBody const& b) { return b.proposal->genesis; },
            [](auto const&) { return std::vector<MsgPtr>{}; },
        },
        body);
}

std::optional<std::uint32_t>
Message::execTag() const
{
    return std::visit(
        Overloaded{
            [](TxBody const&) -> std::optional<std::uint32_t> {
                return std::nullopt;
            },
            [](ProposalBody const& b) -> std::optional<std::uint32_t> {
                return b.exec;
            },
            [](PrevoteBody const& b) -> std::optional<std::uint32_t> {
                return b.exec;
            },
            [](PrecommitBody const& b) -> std::optional<std::uint32_t> {
                return b.exec;
            },
            [](GenesisBody const& b) -> std::optional<std::uint32_t> {
                return b.r;
            },
            [](ViewProposalBody const& b) -> std::optional<std::uint32_t> {
                return b.proposal->r;
            },
            [](ViewVoteBody const& b) -> std::optional<std::uint32_t> {
                return b.target->execTag();
            },
            [](FinishVoteBody const& b) -> std::optional<std::uint32_t> {
                return b.proposal->r;
            },
        },
        body);
}

MsgPtr
Signer::sign(Body body) const
{
    if (mId == kEnvironment && !std::holds_alternative<TxBody>(body))
    {
        throw std::invalid_argument("environment only signs transactions");
    }
    if (mId != kEnvironment && std::holds_alternative<TxBody>(body))
    {
        throw std::invalid_argument("transactions are signed by the "
                                    "environment");
    }
    return std::make_shared<Message const>(SignatureKey{}, mId,
                                           std::move(body));
}

Signer
KeyRing::signerFor(ProcessId id) const
{
    if (id.value == 0 || id.value > mN)
    {
        throw std::out_of_range("no key for process " +
                                std::to_string(id.value));
    }
    return Signer(id);
}

MsgPtr
restoreMessage(ProcessId signer, Body body)
{
    return std::make_shared<Message const>(SignatureKey{}, signer,
                                           std::move(body));
}

std::vector<MsgPtr>
MessageSet::insert(MsgPtr const& msg)
{
    std::vector<MsgPtr> added;
    std::vector<MsgPtr> stack{msg};
    while (!stack.empty())
    {
        auto m = std::move(stack.back());
        stack.pop_back();
        if (!mByDigest.emplace(m->digest, m).second)
        {
            continue;
        }
        mAll.push_back(m);
        mByKind[static_cast<std::size_t>(m->kind())].push_back(m);
        if (auto tag = m->execTag())
        {
            mByExec[{m->kind(), *tag}].push_back(m);
        }
        added.push_back(m);
        auto kids = m->children();
        stack.insert(stack.end(), kids.rbegin(), kids.rend());
    }
    return added;
}

void
MessageSet::insertAll(std::vector<MsgPtr> const& msgs)
{
    for (auto const& m : msgs)
    {
        insert(m);
    }
}

bool
MessageSet::contains(Digest const& d) const
{
    return mByDigest.count(d) != 0;
}

std::vector<MsgPtr> const&
MessageSet::ofKind(MsgKind kind) const
{
    return mByKind[static_cast<std::size_t>(kind)];
}

std::vector<MsgPtr> const&
MessageSet::ofKind(MsgKind kind, std::uint32_t exec) const
{
    static std::vector<MsgPtr> const empty;
    auto it = mByExec.find({kind, exec});
    return it == mByExec.end() ? empty : it->second;
}

} // namespace rsmr
