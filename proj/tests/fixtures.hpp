// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/base_smr.hpp"

namespace rsmr::testing
{

inline ProcessId
p(std::uint32_t i)
{
    return ProcessId{i};
}

inline std::vector<Transaction>
txs(std::initializer_list<char const*> names)
{
    std::vector<Transaction> out;
    for (auto n : names)
    {
        out.push_back(Transaction{n});
    }
    return out;
}

struct Fixture
{
    explicit Fixture(std::size_t n, Log genesis = {}) : ring(n + 2)
    {
        ctx.members = allProcesses(n);
        ctx.genesisLog = std::move(genesis);
        ctx.exec = 1;
    }

    MsgPtr
    prevote(std::uint32_t signer, BlockPtr const& b, std::int32_t round = 0)
    {
        return ring.signerFor(p(signer)).sign(PrevoteBody{
            ctx.exec, b->height, round, b->digest, -1, {}});
    }

    std::vector<MsgPtr>
    pol(BlockPtr const& b, std::vector<std::uint32_t> signers,
        std::int32_t round = 0)
    {
        std::vector<MsgPtr> out;
        for (auto s : signers)
        {
            out.push_back(prevote(s, b, round));
        }
        return out;
    }

    MsgPtr
    precommit(std::uint32_t signer, BlockPtr const& b, std::int32_t round = 0,
              std::vector<MsgPtr> withPol = {})
    {
        return ring.signerFor(p(signer)).sign(PrecommitBody{
            ctx.exec, b->height, round, b, std::move(withPol)});
    }

    /// Quorum of precommits for b, each carrying a well-formed POL from
    /// the same signers.
    std::vector<MsgPtr>
    commit(BlockPtr const& b, std::vector<std::uint32_t> signers,
           std::int32_t round = 0)
    {
        auto proof = pol(b, signers, round);
        std::vector<MsgPtr> out;
        for (auto s : signers)
        {
            out.push_back(precommit(s, b, round, proof));
        }
        return out;
    }

    ExecutionContext ctx;
    KeyRing ring;
};

inline MessageSet
setOf(std::vector<MsgPtr> const& msgs)
{
    MessageSet s;
    s.insertAll(msgs);
    return s;
}

inline std::vector<MsgPtr>
concat(std::vector<MsgPtr> a, std::vector<MsgPtr> const& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace rsmr::testing
