#pragma once
// Account-name categories used by the EOSIO-style feature channel.

#include <cstdint>
#include <string_view>

namespace i2b {

// General: exactly 12 characters, no '.'. Auction: shorter than 12, no '.'.
// SubAccount: contains '.' anywhere. The '.' rule takes precedence; names of
// 12+ characters without a dot fall into General.
enum class NameKind : uint8_t { General = 0, Auction = 1, SubAccount = 2 };

inline NameKind classify_name(std::string_view name) {
    if (name.find('.') != std::string_view::npos) return NameKind::SubAccount;
    if (name.size() < 12) return NameKind::Auction;
    return NameKind::General;
}

// True for system accounts that the sampler must not expand in EOSIO mode.
inline bool is_system_account(std::string_view name) {
    return name.rfind("EOSIO.", 0) == 0 || name.rfind("eosio.", 0) == 0;
}

}  // namespace i2b
