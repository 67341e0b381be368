#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace drm {

enum class DegradationKind { Rain, Haze, LowLight };

inline constexpr DegradationKind kAllKinds[] = {DegradationKind::Rain, DegradationKind::Haze,
                                                DegradationKind::LowLight};

std::string_view to_string(DegradationKind kind);
/// Accepts "rain", "haze", "lowlight".
std::optional<DegradationKind> parse_kind(std::string_view name);

}  // namespace drm
