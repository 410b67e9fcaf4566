#include "fgts/label.hpp"

#include "fgts/error.hpp"

namespace fgts {

std::string_view to_string(Label label) noexcept { return label == Label::fake ? "fake" : "real"; }

Label parse_label(std::string_view text) {
    if (text == "real") return Label::real;
    if (text == "fake") return Label::fake;
    throw ValidationError("unknown label token \"" + std::string(text) + "\"");
}

}  // namespace fgts
