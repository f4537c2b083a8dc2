#pragma once

#include <string>

namespace srag {

/// One chat completion at temperature 0. Implementations must be safe for
/// concurrent calls.
class ChatClient {
public:
    virtual ~ChatClient() = default;

    virtual std::string complete(const std::string& system_prompt,
                                 const std::string& user_prompt) = 0;

    /// Provenance string recorded in run manifests.
    virtual std::string name() const = 0;
};

/// Offline stand-in: returns the user prompt verbatim, so answers carry the
/// full retrieved context and runs stay deterministic.
class EchoChatClient final : public ChatClient {
public:
    std::string complete(const std::string&, const std::string& user_prompt) override {
        return user_prompt;
    }
    std::string name() const override { return "local:echo"; }
};

} // namespace srag
