// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "rsmr/core.hpp"

#include <doctest.h>

namespace doctest
{
template <> struct StringMaker<rsmr::Log>
{
    static String
    convert(rsmr::Log const& log)
    {
        return rsmr::formatLog(log).c_str();
    }
};
template <> struct StringMaker<rsmr::ProcessId>
{
    static String
    convert(rsmr::ProcessId p)
    {
        return ("p" + std::to_string(p.value)).c_str();
    }
};
}
