// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/codec.hpp"

namespace rsmr
{

namespace
{

Json
ids(std::vector<MsgPtr> const& msgs)
{
    auto out = Json::array();
    for (auto const& m : msgs)
    {
        out.push_back(m->digest.hex());
    }
    return out;
}

Json
encodeBlock(BlockPtr const& b)
{
    if (!b)
    {
        return nullptr;
    }
    return Json{{"exec", b->exec},
                {"height", b->height},
                {"parent", b->parent.hex()},
                {"txs", encodeLog(Log(b->txs))},
                {"proposer", b->proposer.value}};
}

BlockPtr
decodeBlock(Json const& j)
{
    if (j.is_null())
    {
        return nullptr;
    }
    return makeBlock(j.at("exec").get<std::uint32_t>(),
                     j.at("height").get<std::int64_t>(),
                     Digest::fromHex(j.at("parent").get<std::string>()),
                     decodeLog(j.at("txs")).entries(),
                     ProcessId{j.at("proposer").get<std::uint32_t>()});
}

Json
encodeProposal(RProposal const& p)
{
    return Json{{"faulty", encodeProcessSet(p.faulty)},
                {"sigma", encodeLog(p.sigma)},
                {"genesis", ids(p.genesis)},
                {"r", p.r}};
}

} // namespace

Json
encodeLog(Log const& log)
{
    auto out = Json::array();
    for (auto const& tx : log.entries())
    {
        out.push_back(tx.payload);
    }
    return out;
}

Log
decodeLog(Json const& j)
{
    std::vector<Transaction> txs;
    for (auto const& e : j)
    {
        txs.push_back(Transaction{e.get<std::string>()});
    }
    return Log(std::move(txs));
}

Json
encodeProcessSet(ProcessSet const& s)
{
    auto out = Json::array();
    for (auto p : s)
    {
        out.push_back(p.value);
    }
    return out;
}

ProcessSet
decodeProcessSet(Json const& j)
{
    ProcessSet out;
    for (auto const& e : j)
    {
        out.push_back(ProcessId{e.get<std::uint32_t>()});
    }
    return makeProcessSet(std::move(out));
}

Json
MessageEncoder::encode(Message const& m) const
{
    Json j{{"id", m.digest.hex()},
           {"signer", m.signer.value},
           {"kind", kindName(m.kind())}};
    if (auto b = m.as<TxBody>())
    {
        j["tx"] = b->tx.payload;
    }
    else if (auto b = m.as<ProposalBody>())
    {
        j.update({{"exec", b->exec},
                  {"height", b->height},
                  {"round", b->round},
                  {"block", encodeBlock(b->block)},
                  {"valid_round", b->validRound},
                  {"pol", ids(b->pol)}});
    }
    else if (auto b = m.as<PrevoteBody>())
    {
        j.update({{"exec", b->exec},
                  {"height", b->height},
                  {"round", b->round},
                  {"value", b->value ? Json(b->value->hex()) : Json(nullptr)},
                  {"just_round", b->justRound},
                  {"pol", ids(b->pol)}});
    }
    else if (auto b = m.as<PrecommitBody>())
    {
        j.update({{"exec", b->exec},
                  {"height", b->height},
                  {"round", b->round},
                  {"block", encodeBlock(b->block)},
                  {"pol", ids(b->pol)}});
    }
    else if (auto b = m.as<GenesisBody>())
    {
        j.update({{"sigma", encodeLog(b->sigma)}, {"r", b->r}});
    }
    else if (auto b = m.as<ViewProposalBody>())
    {
        j.update({{"proposal", encodeProposal(*b->proposal)},
                  {"v", b->v},
                  {"qc", b->qc ? ids(*b->qc) : Json(nullptr)}});
    }
    else if (auto b = m.as<ViewVoteBody>())
    {
        j["target"] = b->target->digest.hex();
    }
    else if (auto b = m.as<FinishVoteBody>())
    {
        j["proposal"] = encodeProposal(*b->proposal);
    }
    return j;
}

Json
MessageEncoder::define(MsgPtr const& root)
{
    auto out = Json::array();
    // Post-order so children precede their parents.
    std::vector<std::pair<MsgPtr, bool>> stack{{root, false}};
    while (!stack.empty())
    {
        auto [m, expanded] = stack.back();
        stack.pop_back();
        if (mDefined.count(m->digest))
        {
            continue;
        }
        if (expanded)
        {
            mDefined.insert(m->digest);
            out.push_back(encode(*m));
            continue;
        }
        stack.push_back({m, true});
        for (auto const& c : m->children())
        {
            if (!mDefined.count(c->digest))
            {
                stack.push_back({c, false});
            }
        }
    }
    return out;
}

void
MessageDecoder::addDefinitions(Json const& defs)
{
    for (auto const& d : defs)
    {
        auto id = d.at("id").get<std::string>();
        if (mById.count(id))
        {
            continue;
        }
        auto m = decode(d);
        if (m->digest.hex() != id)
        {
            throw std::runtime_error("trace message digest mismatch for " + id);
        }
        mById.emplace(std::move(id), std::move(m));
    }
}

MsgPtr
MessageDecoder::get(std::string const& id) const
{
    auto it = mById.find(id);
    if (it == mById.end())
    {
        throw std::runtime_error("trace references undefined message " + id);
    }
    return it->second;
}

MsgPtr
MessageDecoder::decode(Json const& j) const
{
    auto refs = [&](Json const& a) {
        std::vector<MsgPtr> out;
        for (auto const& e : a)
        {
            out.push_back(get(e.get<std::string>()));
        }
        return out;
    };
    auto proposal = [&](Json const& p) {
        return makeRProposal(decodeProcessSet(p.at("faulty")),
                             decodeLog(p.at("sigma")), refs(p.at("genesis")),
                             p.at("r").get<std::uint32_t>());
    };
    ProcessId signer{j.at("signer").get<std::uint32_t>()};
    auto kind = j.at("kind").get<std::string>();
    Body body;
    if (kind == "tx")
    {
        body = TxBody{Transaction{j.at("tx").get<std::string>()}};
    }
    else if (kind == "proposal")
    {
        body = ProposalBody{j.at("exec"), j.at("height"), j.at("round"),
                            decodeBlock(j.at("block")), j.at("valid_round"),
                            refs(j.at("pol"))};
    }
    else if (kind == "prevote")
    {
        std::optional<Digest> value;
        if (!j.at("value").is_null())
        {
            value = Digest::fromHex(j.at("value").get<std::string>());
        }
        body = PrevoteBody{j.at("exec"), j.at("height"), j.at("round"), value,
                           j.at("just_round"), refs(j.at("pol"))};
    }
    else if (kind == "precommit")
    {
        body = PrecommitBody{j.at("exec"), j.at("height"), j.at("round"),
                             decodeBlock(j.at("block")), refs(j.at("pol"))};
    }
    else if (kind == "genesis")
    {
        body = GenesisBody{decodeLog(j.at("sigma")), j.at("r")};
    }
    else if (kind == "view_proposal")
    {
        std::optional<std::vector<MsgPtr>> qc;
        if (!j.at("qc").is_null())
        {
            qc = refs(j.at("qc"));
        }
        body = ViewProposalBody{proposal(j.at("proposal")), j.at("v"), qc};
    }
    else if (kind == "view_vote")
    {
        body = ViewVoteBody{get(j.at("target").get<std::string>())};
    }
    else if (kind == "finish_vote")
    {
        body = FinishVoteBody{proposal(j.at("proposal"))};
    }
    else
    {
        throw std::runtime_error("unknown message kind " + kind);
    }
    return restoreMessage(signer, std::move(body));
}

} // namespace rsmr
