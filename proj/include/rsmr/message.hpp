// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/core.hpp"

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

namespace rsmr
{

// Digest used as the parent of every height-1 block.
inline constexpr Digest kGenesisParent{};

/// A block of the base protocol. The digest covers every field.
struct Block
{
    std::uint32_t exec = 1;
    std::int64_t height = 1;
    Digest parent;
    std::vector<Transaction> txs;
    ProcessId proposer;
    Digest digest;
};
using BlockPtr = std::shared_ptr<Block const>;

BlockPtr makeBlock(std::uint32_t exec, std::int64_t height, Digest parent,
                   std::vector<Transaction> txs, ProcessId proposer);

struct Message;
using MsgPtr = std::shared_ptr<Message const>;

enum class MsgKind : std::uint8_t
{
    Tx,
    Proposal,
    Prevote,
    Precommit,
    Genesis,
    ViewProposal,
    ViewVote,
    FinishVote,
};
inline constexpr std::size_t kMsgKindCount = 8;

char const* kindName(MsgKind kind);

// Base protocol messages. `pol` is a proof-of-lock: prevotes for the
// same value at the referenced round.

struct TxBody
{
    Transaction tx;
};

struct ProposalBody
{
    std::uint32_t exec = 1;
    std::int64_t height = 1;
    std::int32_t round = 0;
    BlockPtr block;
    std::int32_t validRound = -1;
    std::vector<MsgPtr> pol;
};

struct PrevoteBody
{
    std::uint32_t exec = 1;
    std::int64_t height = 1;
    std::int32_t round = 0;
    std::optional<Digest> value; // nullopt = nil
    std::int32_t justRound = -1;
    std::vector<MsgPtr> pol;
};

struct PrecommitBody
{
    std::uint32_t exec = 1;
    std::int64_t height = 1;
    std::int32_t round = 0;
    BlockPtr block; // null = nil
    std::vector<MsgPtr> pol;
};

// Recovery procedure messages.

struct GenesisBody
{
    Log sigma;
    std::uint32_t r = 1;
};

/// r-proposal (F, sigma, M, r). Unsigned value type.
struct RProposal
{
    ProcessSet faulty;
    Log sigma;
    std::vector<MsgPtr> genesis; // sorted by signer
    std::uint32_t r = 1;
    Digest digest;
};
using RProposalPtr = std::shared_ptr<RProposal const>;

RProposalPtr makeRProposal(ProcessSet faulty, Log sigma,
                           std::vector<MsgPtr> genesis, std::uint32_t r);

struct ViewProposalBody
{
    RProposalPtr proposal;
    std::uint32_t v = 1;
    std::optional<std::vector<MsgPtr>> qc; // nullopt = bottom
};

struct ViewVoteBody
{
    MsgPtr target; // the (r,v)-proposal being re-signed
};

struct FinishVoteBody
{
    RProposalPtr proposal;
};

using Body = std::variant<TxBody, ProposalBody, PrevoteBody, PrecommitBody,
                          GenesisBody, ViewProposalBody, ViewVoteBody,
                          FinishVoteBody>;

/// Construction token: only Signer and the trace decoder hold one.
class SignatureKey
{
    SignatureKey() = default;
    friend class Signer;
    friend MsgPtr restoreMessage(ProcessId, Body);
};

/// Signed message m_{p}. Immutable; identity is the digest.
struct Message
{
    Message(SignatureKey, ProcessId signer, Body body);

    ProcessId signer;
    Body body;
    Digest digest;

    MsgKind kind() const;
    /// Messages embedded in this one (proof-of-lock votes, QC votes,
    /// justification genesis messages, vote targets).
    std::vector<MsgPtr> children() const;
    /// Execution id r carried by base and recovery messages.
    std::optional<std::uint32_t> execTag() const;

    template <class T>
    T const*
    as() const
    {
        return std::get_if<T>(&body);
    }
};

/// The only way to produce a message attributed to a process.
class Signer
{
  public:
    ProcessId
    id() const
    {
        return mId;
    }
    MsgPtr sign(Body body) const;

  private:
    explicit Signer(ProcessId id) : mId(id)
    {
    }
    ProcessId mId;
    friend class KeyRing;
};

/// Issues signing capabilities. The simulator hands each actor only the
/// signers it owns.
class KeyRing
{
  public:
    explicit KeyRing(std::size_t n) : mN(n)
    {
    }
    Signer signerFor(ProcessId id) const;
    Signer
    environment() const
    {
        return Signer(kEnvironment);
    }

  private:
    std::size_t mN;
};

/// Rebuilds a message read back from a stored trace. Replay only.
MsgPtr restoreMessage(ProcessId signer, Body body);

/// A set of received messages, closed under embedding.
class MessageSet
{
  public:
    /// Inserts msg and everything embedded in it. Returns newly added
    /// messages, outermost first.
    std::vector<MsgPtr> insert(MsgPtr const& msg);
    void insertAll(std::vector<MsgPtr> const& msgs);

    bool contains(Digest const& d) const;
    bool
    contains(MsgPtr const& m) const
    {
        return contains(m->digest);
    }
    std::size_t
    size() const
    {
        return mAll.size();
    }
    std::vector<MsgPtr> const&
    all() const
    {
        return mAll;
    }
    std::vector<MsgPtr> const& ofKind(MsgKind kind) const;
    /// Base or recovery messages of one kind with a given exec tag.
    std::vector<MsgPtr> const& ofKind(MsgKind kind, std::uint32_t exec) const;

  private:
    std::unordered_map<Digest, MsgPtr, DigestHash> mByDigest;
    std::vector<MsgPtr> mAll;
    std::array<std::vector<MsgPtr>, kMsgKindCount> mByKind;
    std::map<std::pair<MsgKind, std::uint32_t>, std::vector<MsgPtr>> mByExec;
};

} // namespace rsmr
