// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/global_finalize.hpp"

namespace rsmr
{

FinalizeResult
globalFinalize(MessageSet const& m, ProcessSet const& pi,
               Log const& genesisLog, Fraction rho)
{
    FinalizeResult out;
    ProcessSet piR = pi;
    Log logG = genesisLog;
    for (std::uint32_t r = 1;; ++r)
    {
        ExecutionContext ctx{piR, logG, r, rho};
        CommitIndex index(ctx);
        index.addAll(m.ofKind(MsgKind::Precommit, r));
        bool violated = index.hasViolation();
        out.perExecution.push_back({piR, logG, violated});
        if (!violated)
        {
            out.log = index.finalized();
            return out;
        }
        auto qcs = validFinishQcs(m, r, piR);
        if (qcs.size() != 1)
        {
            out.log = logG;
            return out;
        }
        piR = setMinus(piR, qcs.front().proposal->faulty);
        logG = qcs.front().proposal->sigma;
    }
}

std::size_t
countBreaks(std::vector<Log> const& logs)
{
    std::size_t breaks = 0;
    for (std::size_t i = 1; i < logs.size(); ++i)
    {
        breaks += !isPrefix(logs[i - 1], logs[i]);
    }
    return breaks;
}

std::size_t
countViolations(std::vector<MessageSet> const& chain, ProcessSet const& pi,
                Log const& genesisLog, Fraction rho)
{
    std::vector<Log> logs;
    for (std::size_t i = 0; i < chain.size(); ++i)
    {
        if (i > 0)
        {
            for (auto const& msg : chain[i - 1].all())
            {
                if (!chain[i].contains(msg))
                {
                    throw std::invalid_argument(
                        "message set chain is not increasing");
                }
            }
        }
        logs.push_back(globalFinalize(chain[i], pi, genesisLog, rho).log);
    }
    return countBreaks(logs);
}

} // namespace rsmr
