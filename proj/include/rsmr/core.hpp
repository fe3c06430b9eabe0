// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsmr
{

/// Discrete time unit. Global slots and local clocks both use it.
using Timeslot = std::int64_t;

/// Process identifier p_i, 1-based. Index 0 is reserved for the
/// environment, which signs transactions.
struct ProcessId
{
    std::uint32_t value = 0;

    constexpr auto operator<=>(ProcessId const&) const = default;
};

inline constexpr ProcessId kEnvironment{0};

using ProcessSet = std::vector<ProcessId>; // sorted, unique

ProcessSet makeProcessSet(std::vector<ProcessId> ids);
ProcessSet allProcesses(std::size_t n);
bool contains(ProcessSet const& set, ProcessId id);
ProcessSet setMinus(ProcessSet const& a, ProcessSet const& b);
bool isSubset(ProcessSet const& a, ProcessSet const& b);

struct Transaction
{
    std::string payload;

    auto operator<=>(Transaction const&) const = default;
};

/// A finalized sequence of transactions.
class Log
{
  public:
    Log() = default;
    explicit Log(std::vector<Transaction> entries);
    Log(std::initializer_list<std::string_view> payloads);

    std::size_t
    size() const
    {
        return mEntries.size();
    }
    bool
    empty() const
    {
        return mEntries.empty();
    }
    std::vector<Transaction> const&
    entries() const
    {
        return mEntries;
    }
    Transaction const&
    operator[](std::size_t i) const
    {
        return mEntries[i];
    }

    Log prefix(std::size_t len) const;
    Log extended(std::span<Transaction const> txs) const;
    bool containsTx(Transaction const& tx) const;

    bool operator==(Log const&) const = default;

  private:
    std::vector<Transaction> mEntries;
};

/// sigma is a prefix of tau.
bool isPrefix(Log const& sigma, Log const& tau);
bool compatible(Log const& a, Log const& b);
std::string formatLog(Log const& log);

/// SHA-256 content digest. Ordered lexicographically by bytes.
struct Digest
{
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(Digest const&) const = default;

    std::string hex() const;
    std::string shortHex() const;
    static Digest fromHex(std::string_view hex);
};

/// Incremental canonical encoder feeding a SHA-256 context.
class Hasher
{
  public:
    Hasher();
    ~Hasher();
    Hasher(Hasher const&) = delete;
    Hasher& operator=(Hasher const&) = delete;

    Hasher& add(std::uint64_t v);
    Hasher& add(std::int64_t v);
    Hasher& add(std::string_view s);
    Hasher& add(Digest const& d);
    Hasher& add(Log const& log);
    Hasher& add(ProcessSet const& set);
    Digest finish();

  private:
    struct Impl;
    std::unique_ptr<Impl> mImpl;
};

struct DigestHash
{
    std::size_t
    operator()(Digest const& d) const noexcept
    {
        std::size_t h = 0;
        for (int i = 0; i < 8; ++i)
        {
            h = (h << 8) | d.bytes[i];
        }
        return h;
    }
};

/// Random permutation Pi* : [1, n] -> Pi.
class Permutation
{
  public:
    explicit Permutation(std::vector<ProcessId> order);

    /// Uniform permutation of {p_1..p_n} drawn from a seeded generator.
    static Permutation sample(std::size_t n, std::uint64_t seed);

    std::vector<ProcessId> const&
    order() const
    {
        return mOrder;
    }
    std::size_t
    size() const
    {
        return mOrder.size();
    }
    /// 1-based position.
    ProcessId at(std::size_t position) const;

    bool operator==(Permutation const&) const = default;

  private:
    std::vector<ProcessId> mOrder;
};

/// Restriction of piStar to subset, keeping piStar's relative order.
Permutation inducedPermutation(Permutation const& piStar,
                               ProcessSet const& subset);

/// Uniform integer in [0, bound) from a 64-bit generator output stream,
/// portable across standard libraries.
std::uint64_t uniformBelow(std::uint64_t bound,
                           std::function<std::uint64_t()> const& next);

} // namespace rsmr

template <> struct std::hash<rsmr::ProcessId>
{
    std::size_t
    operator()(rsmr::ProcessId p) const noexcept
    {
        return p.value;
    }
};
