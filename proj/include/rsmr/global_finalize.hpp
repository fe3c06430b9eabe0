// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/wrapper.hpp"

namespace rsmr
{

struct ExecutionSummary
{
    ProcessSet pi;
    Log genesisLog;
    bool violated = false;
};

struct FinalizeResult
{
    Log log;
    std::vector<ExecutionSummary> perExecution; // index r-1
};

/// The wrapper-level finalization function evaluated on a bare message
/// set. Replays executions r = 1, 2, ... while each has a violation and a
/// unique proposal with a valid finish-QC.
FinalizeResult globalFinalize(MessageSet const& m, ProcessSet const& pi,
                              Log const& genesisLog, Fraction rho = {});

/// Number of adjacent pairs in which the earlier log is not a prefix of
/// the later one.
std::size_t countBreaks(std::vector<Log> const& logs);

/// Breaks of globalFinalize along a chain of message sets, which must be
/// increasing under inclusion.
std::size_t countViolations(std::vector<MessageSet> const& chain,
                            ProcessSet const& pi, Log const& genesisLog,
                            Fraction rho = {});

} // namespace rsmr
