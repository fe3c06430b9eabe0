// Copyright 2026 The recoverable-smr Authors. Licensed under the Apache
// License, Version 2.0. See the LICENSE file at the root of this
// distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include "rsmr/core.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

namespace rsmr
{

ProcessSet
makeProcessSet(std::vector<ProcessId> ids)
{
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

ProcessSet
allProcesses(std::size_t n)
{
    ProcessSet out;
    out.reserve(n);
    for (std::uint32_t i = 1; i <= n; ++i)
    {
        out.push_back(ProcessId{i});
    }
    return out;
}

bool
contains(ProcessSet const& set, ProcessId id)
{
    return std::binary_search(set.begin(), set.end(), id);
}

ProcessSet
setMinus(ProcessSet const& a, ProcessSet const& b)
{
    ProcessSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
    return out;
}

bool
isSubset(ProcessSet const& a, ProcessSet const& b)
{
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Log::Log(std::vector<Transaction> entries) : mEntries(std::move(entries))
{
}

Log::Log(std::initializer_list<std::string_view> payloads)
{
    for (auto p : payloads)
    {
        mEntries.push_back(Transaction{std::string(p)});
    }
}

Log
Log::prefix(std::size_t len) const
{
    len = std::min(len, mEntries.size());
    return Log(std::vector<Transaction>(mEntries.begin(),
                                        mEntries.begin() + len));
}

Log
Log::extended(std::span<Transaction const> txs) const
{
    auto copy = mEntries;
    copy.insert(copy.end(), txs.begin(), txs.end());
    return Log(std::move(copy));
}

bool
Log::containsTx(Transaction const& tx) const
{
    return std::find(mEntries.begin(), mEntries.end(), tx) != mEntries.end();
}

bool
isPrefix(Log const& sigma, Log const& tau)
{
    if (sigma.size() > tau.size())
    {
        return false;
    }
    return std::equal(sigma.entries().begin(), sigma.entries().end(),
                      tau.entries().begin());
}

bool
compatible(Log const& a, Log const& b)
{
    return isPrefix(a, b) || isPrefix(b, a);
}

std::string
formatLog(Log const& log)
{
    std::string out = "[";
    for (std::size_t i = 0; i < log.size(); ++i)
    {
        if (i)
        {
            out += ",";
        }
        out += log[i].payload;
    }
    return out + "]";
}

std::string
Digest::hex() const
{
    static char const* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (auto b : bytes)
    {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::string
Digest::shortHex() const
{
    return hex().substr(0, 12);
}

Digest
Digest::fromHex(std::string_view hex)
{
    if (hex.size() != 64)
    {
        throw std::invalid_argument("digest hex must be 64 characters");
    }
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9')
            return c - '0';
        if (c >= 'a' && c <= 'f')
            return c - 'a' + 10;
        throw std::invalid_argument("bad hex digit");
    };
    Digest d;
    for (std::size_t i = 0; i < 32; ++i)
    {
        d.bytes[i] = (nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]);
    }
    return d;
}

struct Hasher::Impl
{
    EVP_MD_CTX* ctx = nullptr;
};

Hasher::Hasher() : mImpl(std::make_unique<Impl>())
{
    mImpl->ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(mImpl->ctx, EVP_sha256(), nullptr);
}

Hasher::~Hasher()
{
    EVP_MD_CTX_free(mImpl->ctx);
}

Hasher&
Hasher::add(std::uint64_t v)
{
    std::uint8_t buf[8];
    for (int i = 0; i < 8; ++i)
    {
        buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    EVP_DigestUpdate(mImpl->ctx, buf, sizeof(buf));
    return *this;
}

Hasher&
Hasher::add(std::int64_t v)
{
    return add(static_cast<std::uint64_t>(v));
}

Hasher&
Hasher::add(std::string_view s)
{
    add(static_cast<std::uint64_t>(s.size()));
    EVP_DigestUpdate(mImpl->ctx, s.data(), s.size());
    return *this;
}

Hasher&
Hasher::add(Digest const& d)
{
    EVP_DigestUpdate(mImpl->ctx, d.bytes.data(), d.bytes.size());
    return *this;
}

Hasher&
Hasher::add(Log const& log)
{
    add(static_cast<std::uint64_t>(log.size()));
    for (auto const& tx : log.entries())
    {
        add(std::string_view(tx.payload));
    }
    return *this;
}

Hasher&
Hasher::add(ProcessSet const& set)
{
    add(static_cast<std::uint64_t>(set.size()));
    for (auto p : set)
    {
        add(static_cast<std::uint64_t>(p.value));
    }
    return *this;
}

Digest
Hasher::finish()
{
    Digest d;
    unsigned int len = 0;
    EVP_DigestFinal_ex(mImpl->ctx, d.bytes.data(), &len);
    return d;
}

Permutation::Permutation(std::vector<ProcessId> order)
    : mOrder(std::move(order))
{
    auto sorted = mOrder;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    {
        throw std::invalid_argument("permutation has duplicate entries");
    }
}

std::uint64_t
uniformBelow(std::uint64_t bound, std::function<std::uint64_t()> const& next)
{
    if (bound == 0)
    {
        throw std::invalid_argument("uniformBelow: empty range");
    }
    // Rejection sampling on the top of the range keeps it unbiased.
    std::uint64_t const limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;)
    {
        auto x = next();
        if (x < limit)
        {
            return x % bound;
        }
    }
}

Permutation
Permutation::sample(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto next = [&rng]() { return rng(); };
    auto order = allProcesses(n);
    for (std::size_t i = n; i > 1; --i)
    {
        auto j = uniformBelow(i, next);
        std::swap(order[i - 1], order[j]);
    }
    return Permutation(std::move(order));
}

ProcessId
Permutation::at(std::size_t position) const
{
    if (position == 0 || position > mOrder.size())
    {
        throw std::out_of_range("permutation position " +
                                std::to_string(position) + " outside [1, " +
                                std::to_string(mOrder.size()) + "]");
    }
    return mOrder[position - 1];
}

Permutation
inducedPermutation(Permutation const& piStar, ProcessSet const& subset)
{
    if (subset.empty())
    {
        throw std::invalid_argument("induced permutation of an empty set");
    }
    std::vector<ProcessId> order;
    for (auto p : piStar.order())
    {
        if (contains(subset, p))
        {
            order.push_back(p);
        }
    }
    if (order.size() != subset.size())
    {
        throw std::invalid_argument(
            "induced permutation: subset not contained in permutation");
    }
    return Permutation(std::move(order));
}

} // namespace rsmr
