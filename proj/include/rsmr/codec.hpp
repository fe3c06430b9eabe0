// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

// JSON encoding of messages for traces. Embedded messages are referenced
// by digest and defined once per trace.

#pragma once

#include "rsmr/message.hpp"

#include <json.hpp>

#include <unordered_set>

namespace rsmr
{

using Json = nlohmann::json;

Json encodeLog(Log const& log);
Log decodeLog(Json const& j);
Json encodeProcessSet(ProcessSet const& s);
ProcessSet decodeProcessSet(Json const& j);

/// Encodes messages, emitting each definition once.
class MessageEncoder
{
  public:
    /// Definitions of m and of embedded messages not yet emitted,
    /// innermost first.
    Json define(MsgPtr const& m);

  private:
    Json encode(Message const& m) const;
    std::unordered_set<Digest, DigestHash> mDefined;
};

/// Rebuilds messages from definitions; verifies every digest.
class MessageDecoder
{
  public:
    void addDefinitions(Json const& defs);
    MsgPtr get(std::string const& id) const;

  private:
    MsgPtr decode(Json const& j) const;
    std::unordered_map<std::string, MsgPtr> mById;
};

} // namespace rsmr
