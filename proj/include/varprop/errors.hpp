#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace varprop {

// Base error carrying a short category tag so the CLI can print
// "error [category]: message" and exit nonzero.
class error : public std::runtime_error {
public:
    error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

struct config_error : error {
    explicit config_error(const std::string& m) : error("config", m) {}
};

struct domain_error : error {
    explicit domain_error(const std::string& m) : error("domain", m) {}
};

struct dimension_error : error {
    explicit dimension_error(const std::string& m) : error("dimension", m) {}
};

struct insufficient_batch_error : error {
    explicit insufficient_batch_error(const std::string& m) : error("insufficient-batch", m) {}
};

struct degeneracy_error : error {
    explicit degeneracy_error(const std::string& m) : error("degeneracy", m) {}
};

struct consistency_error : error {
    explicit consistency_error(const std::string& m) : error("consistency", m) {}
};

struct io_error : error {
    explicit io_error(const std::string& m) : error("io", m) {}
};

} // namespace varprop
