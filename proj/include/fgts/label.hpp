#pragma once

#include <string>
#include <string_view>

namespace fgts {

// Positive class is always `fake`.
enum class Label { real = 0, fake = 1 };

std::string_view to_string(Label label) noexcept;
Label parse_label(std::string_view text);

inline constexpr std::string_view kRealGenerator = "-";

}  // namespace fgts
