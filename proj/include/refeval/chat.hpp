#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace refeval::chat {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role);
std::optional<Role> parse_role(std::string_view name);

struct Message {
    Role role;
    std::string content;

    bool operator==(const Message&) const = default;
};

using MessageList = std::vector<Message>;

}  // namespace refeval::chat
