#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace pesto {

/// Shared "pesto" logger writing to stderr, warn level until configured.
std::shared_ptr<spdlog::logger> logger();

} // namespace pesto
